//! Command-line front end: config resolution, subcommands and output files.
//!
//! The binary only forwards `std::env::args` to [`main_with_args`], so every
//! code path here is reachable from tests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::allocation::{
    average_sum_rate_closed_form, optimal_rf_count_analytic, phi, CircuitBudget, EqualPowerVariant,
};
use crate::channel::{draw_drop, trial_rng, write_geometry_csv};
use crate::error::{Error, Result};
use crate::experiments::{
    fmt_sig9, run_sweep, write_csv, AggregateStats, Algorithm, ExperimentConfig, SweepAxis,
};
use crate::selection::{
    bfs_select, bfs_subset_count, binomial_big, complexity_estimate, greedy_candidate_count,
    greedy_select, random_select, ComplexityAlgo, GreedyOptions, InitStrategy, SelectionResult,
};

pub const SEED_ENV: &str = "MIMO_RFSEL_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "mimo-rfsel",
    version,
    about = "RF-chain count optimization and antenna selection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form optimum chain count and the average-rate table.
    Analytic(CommonArgs),
    /// Antenna selection on a single channel realization.
    Select {
        #[command(flatten)]
        common: CommonArgs,
        /// Chain count for random selection.
        #[arg(long)]
        chains: Option<usize>,
    },
    /// Monte-Carlo sweep over one parameter.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        axis: Option<SweepAxis>,
        /// Comma list of values; `a..b` expands to the integers a through b.
        #[arg(long)]
        values: Option<String>,
    },
    /// Search complexity estimates and measured greedy counters.
    Complexity {
        #[command(flatten)]
        common: CommonArgs,
        /// Defaults to floor(p_max / p_c).
        #[arg(long)]
        max_chains: Option<usize>,
        /// Run greedy once and compare its counters with the estimate.
        #[arg(long)]
        dry_run: bool,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Comma list of greedy, bfs, random, random_erp, analytic.
    #[arg(long)]
    pub algo: Option<String>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub equal_power_variant: Option<EqualPowerVariant>,
    #[arg(short = 'k', long)]
    pub users: Option<usize>,
    #[arg(long)]
    pub antennas: Option<usize>,
    #[arg(long)]
    pub p_max: Option<f64>,
    #[arg(long)]
    pub p_c: Option<f64>,
    /// Return the best visited greedy point instead of the first-decrease stop.
    #[arg(long)]
    pub keep_best: bool,
}

/// Config file contents. Every key is optional; a `[manifest]` table is
/// accepted and ignored so manifests can be fed back as configs.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverlay {
    pub users: Option<usize>,
    pub antennas: Option<usize>,
    pub p_max: Option<f64>,
    pub p_c: Option<f64>,
    pub alpha: Option<f64>,
    pub cell_radius: Option<f64>,
    pub min_distance: Option<f64>,
    pub trials: Option<u64>,
    pub master_seed: Option<u64>,
    pub sweep_axis: Option<SweepAxis>,
    pub sweep_values: Option<Vec<f64>>,
    pub algorithms: Option<Vec<Algorithm>>,
    pub equal_power_variant: Option<EqualPowerVariant>,
    pub init_strategy: Option<InitStrategy>,
    pub keep_best: Option<bool>,
    pub bfs_cap: Option<u64>,
    pub chains: Option<usize>,
    pub manifest: Option<toml::Table>,
}

impl ConfigOverlay {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn apply(self, cfg: &mut ExperimentConfig, chains: &mut Option<usize>) {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { cfg.$f = v; })* };
        }
        set!(
            users,
            antennas,
            p_max,
            p_c,
            alpha,
            cell_radius,
            min_distance,
            trials,
            master_seed,
            sweep_axis,
            sweep_values,
            algorithms,
            equal_power_variant,
            init_strategy,
            keep_best,
            bfs_cap
        );
        if self.chains.is_some() {
            *chains = self.chains;
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub experiment: ExperimentConfig,
    pub chains: Option<usize>,
}

/// Precedence: flag, then config file, then `MIMO_RFSEL_SEED` (seed only),
/// then built-in defaults.
pub fn resolve(common: &CommonArgs, env_seed: Option<&str>) -> Result<Resolved> {
    let mut cfg = ExperimentConfig::default();
    let mut chains = None;
    if let Some(seed) = env_seed {
        cfg.master_seed = seed
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_ENV}={seed} is not an unsigned integer")))?;
    }
    if let Some(path) = &common.config {
        ConfigOverlay::load(path)?.apply(&mut cfg, &mut chains);
    }
    macro_rules! flag {
        ($($f:ident),*) => { $(if let Some(v) = common.$f { cfg.$f = v; })* };
    }
    flag!(users, antennas, p_max, p_c, trials, equal_power_variant);
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(list) = &common.algo {
        cfg.algorithms = parse_algorithms(list)?;
    }
    if common.keep_best {
        cfg.keep_best = true;
    }
    Ok(Resolved {
        experiment: cfg,
        chains,
    })
}

pub fn parse_algorithms(list: &str) -> Result<Vec<Algorithm>> {
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let a: Algorithm = item.parse()?;
        if !out.contains(&a) {
            out.push(a);
        }
    }
    if out.is_empty() {
        return Err(Error::Config("empty algorithm list".into()));
    }
    Ok(out)
}

/// Parses `2,3.5,8` or `10..20` (inclusive integer range), or a mix of both.
pub fn parse_values(list: &str) -> Result<Vec<f64>> {
    let bad = |item: &str| Error::Config(format!("invalid sweep value '{item}'"));
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad(item))?;
            let b: u64 = b.trim().parse().map_err(|_| bad(item))?;
            if a > b {
                return Err(bad(item));
            }
            out.extend((a..=b).map(|v| v as f64));
        } else {
            out.push(item.parse().map_err(|_| bad(item))?);
        }
    }
    if out.is_empty() {
        return Err(Error::Config("empty sweep value list".into()));
    }
    Ok(out)
}

/// Failure of a subcommand together with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_runtime_infeasibility() {
            EXIT_INFEASIBLE
        } else {
            EXIT_CONFIG
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

fn config_error(e: Error) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: e.to_string(),
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses arguments, runs the subcommand and returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    match run(&cli.command, env_seed.as_deref(), stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

pub fn run(command: &Command, env_seed: Option<&str>, out: &mut dyn Write) -> CmdResult {
    match command {
        Command::Analytic(common) => cmd_analytic(common, env_seed, out),
        Command::Select { common, chains } => cmd_select(common, *chains, env_seed, out),
        Command::Sweep {
            common,
            axis,
            values,
        } => cmd_sweep(common, *axis, values.as_deref(), env_seed, out),
        Command::Complexity {
            common,
            max_chains,
            dry_run,
        } => cmd_complexity(common, *max_chains, *dry_run, env_seed, out),
    }
}

fn cmd_analytic(common: &CommonArgs, env_seed: Option<&str>, out: &mut dyn Write) -> CmdResult {
    let cfg = resolve(common, env_seed)?.experiment;
    let budget = CircuitBudget::new(cfg.p_max, cfg.p_c).map_err(config_error)?;
    let users = cfg.users;
    let s_star = optimal_rf_count_analytic(users, &budget).map_err(config_error)?;
    writeln!(out, "K = {users}")?;
    writeln!(out, "p_max = {}", cfg.p_max)?;
    writeln!(out, "p_c = {}", cfg.p_c)?;
    writeln!(out, "max_chains = {}", budget.max_chains())?;
    writeln!(out, "phi = {}", fmt_fixed(phi(users, &budget)))?;
    writeln!(out, "S* = {s_star}")?;
    writeln!(out)?;
    writeln!(out, "S,avg_rate,p_out")?;
    for s in users..=budget.max_chains() {
        let rate = average_sum_rate_closed_form(s, users, &budget).map_err(config_error)?;
        writeln!(
            out,
            "{s},{},{}",
            fmt_sig9(rate),
            fmt_sig9(budget.transmit_budget(s))
        )?;
    }
    Ok(())
}

fn with_pool<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> std::result::Result<T, Failure> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(config_error(Error::Config(
            "--threads must be at least 1".into(),
        ))),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure {
                    code: EXIT_IO,
                    message: e.to_string(),
                })?;
            Ok(pool.install(f))
        }
    }
}

/// Skip count of one sweep point and algorithm: axis label, algorithm,
/// total and per-reason counts.
pub type SkipSummary = (String, Algorithm, u64, Vec<(String, u64)>);

/// Manifest written next to every output CSV: the resolved configuration as
/// flat keys (re-readable with `--config`) plus a `[manifest]` table.
pub fn manifest_text(
    resolved: &Resolved,
    command: &str,
    started: &str,
    finished: &str,
    outputs: &[String],
    skips: &[SkipSummary],
) -> Result<String> {
    let mut table =
        toml::Table::try_from(&resolved.experiment).map_err(|e| Error::Config(e.to_string()))?;
    if let Some(c) = resolved.chains {
        table.insert("chains".into(), toml::Value::Integer(c as i64));
    }
    let mut meta = toml::Table::new();
    meta.insert("command".into(), command.into());
    meta.insert("tool_version".into(), env!("CARGO_PKG_VERSION").into());
    meta.insert(
        "master_seed".into(),
        toml::Value::String(resolved.experiment.master_seed.to_string()),
    );
    meta.insert("started".into(), started.into());
    meta.insert("finished".into(), finished.into());
    meta.insert(
        "outputs".into(),
        toml::Value::Array(outputs.iter().map(|s| s.as_str().into()).collect()),
    );
    let skip_rows = skips
        .iter()
        .map(|(point, algorithm, count, reasons)| {
            let mut row = toml::Table::new();
            row.insert("axis_value".into(), point.as_str().into());
            row.insert("algorithm".into(), algorithm.name().into());
            row.insert("skipped".into(), toml::Value::Integer(*count as i64));
            let mut why = toml::Table::new();
            for (reason, n) in reasons {
                why.insert(reason.clone(), toml::Value::Integer(*n as i64));
            }
            row.insert("reasons".into(), toml::Value::Table(why));
            toml::Value::Table(row)
        })
        .collect();
    meta.insert("skips".into(), toml::Value::Array(skip_rows));
    table.insert("manifest".into(), toml::Value::Table(meta));
    toml::to_string(&table).map_err(|e| Error::Config(e.to_string()))
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn select_one(
    resolved: &Resolved,
    algorithm: Algorithm,
    channel: &crate::channel::ChannelRealization,
    budget: &CircuitBudget,
    rng: &crate::channel::TrialRng,
) -> Result<SelectionResult> {
    let cfg = &resolved.experiment;
    match algorithm {
        Algorithm::Greedy => greedy_select(
            channel,
            budget,
            &GreedyOptions {
                init: cfg.init_strategy,
                keep_best: cfg.keep_best,
            },
        ),
        Algorithm::Bfs => bfs_select(channel, budget, cfg.bfs_cap as u128),
        Algorithm::Random => {
            let chains = resolved
                .chains
                .ok_or_else(|| Error::Config("random selection needs --chains".into()))?;
            random_select(channel, budget, chains, &mut rng.clone())
        }
        Algorithm::RandomErp | Algorithm::Analytic => Err(Error::Config(format!(
            "algorithm {algorithm} is not available for select"
        ))),
    }
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn cmd_select(
    common: &CommonArgs,
    chains: Option<usize>,
    env_seed: Option<&str>,
    out: &mut dyn Write,
) -> CmdResult {
    let started = now();
    let mut resolved = resolve(common, env_seed)?;
    if chains.is_some() {
        resolved.chains = chains;
    }
    if common.algo.is_none() {
        // Without --algo, keep whichever configured algorithms select can run.
        let has_chains = resolved.chains.is_some();
        resolved.experiment.algorithms.retain(|a| match a {
            Algorithm::Greedy | Algorithm::Bfs => true,
            Algorithm::Random => has_chains,
            Algorithm::RandomErp | Algorithm::Analytic => false,
        });
        if resolved.experiment.algorithms.is_empty() {
            resolved.experiment.algorithms = vec![Algorithm::Greedy];
        }
    }
    // Select reports on one realization regardless of any sweep settings.
    resolved.experiment.trials = 1;
    resolved.experiment.sweep_axis = SweepAxis::None;
    resolved.experiment.sweep_values.clear();
    let cfg = &resolved.experiment;
    cfg.validate().map_err(config_error)?;
    for a in &cfg.algorithms {
        if matches!(a, Algorithm::RandomErp | Algorithm::Analytic) {
            return Err(config_error(Error::Config(format!(
                "algorithm {a} is not available for select"
            ))));
        }
        if *a == Algorithm::Random && resolved.chains.is_none() {
            return Err(config_error(Error::Config(
                "random selection needs --chains".into(),
            )));
        }
    }
    let params = cfg.point_params(None).map_err(config_error)?;
    let mut rng = trial_rng(cfg.master_seed, 0);
    let drop = draw_drop(&params.drop, &mut rng)?;

    let results: Vec<(Algorithm, Result<SelectionResult>)> = cfg
        .algorithms
        .iter()
        .map(|&a| {
            (
                a,
                select_one(&resolved, a, &drop.channel, &params.budget, &rng),
            )
        })
        .collect();
    if let Some((_, Err(e))) = results.iter().find(|(_, r)| r.is_err()) {
        return Err(e.clone().into());
    }
    let results: Vec<(Algorithm, SelectionResult)> = results
        .into_iter()
        .map(|(a, r)| (a, r.expect("checked above")))
        .collect();

    fs::create_dir_all(&common.out)?;
    let mut select_csv = Vec::new();
    writeln!(
        select_csv,
        "algorithm,chains,rate,p_out,eta_sq,subset,powers,gram_builds,rank1_updates,inversions,subsets_enumerated,candidate_evaluations"
    )?;
    let mut trajectory_csv = Vec::new();
    writeln!(trajectory_csv, "algorithm,chains,rate")?;
    for (a, r) in &results {
        let c = &r.counters;
        writeln!(
            select_csv,
            "{a},{},{},{},{},{},{},{},{},{},{},{}",
            r.chains,
            fmt_sig9(r.rate),
            fmt_sig9(r.p_out()),
            fmt_sig9(r.eta_sq),
            join(&r.subset),
            join(r.allocation.powers.iter().map(|p| fmt_sig9(*p))),
            c.gram_builds,
            c.rank1_updates,
            c.inversions,
            c.subsets_enumerated,
            c.candidate_evaluations
        )?;
        for (s, rate) in &r.trajectory {
            writeln!(trajectory_csv, "{a},{s},{}", fmt_sig9(*rate))?;
        }
        writeln!(
            out,
            "{a}: S = {}, rate = {} bit/s/Hz, p_out = {}, subset = [{}]",
            r.chains,
            fmt_sig9(r.rate),
            fmt_sig9(r.p_out()),
            r.subset
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        )?;
    }
    let mut geometry_csv = Vec::new();
    write_geometry_csv(
        &mut geometry_csv,
        &[(0, &drop.geometry, &drop.channel.large_scale)],
    )?;

    let files = ["select.csv", "trajectory.csv", "geometry.csv"];
    for (name, bytes) in files
        .iter()
        .zip([&select_csv, &trajectory_csv, &geometry_csv])
    {
        fs::write(common.out.join(name), bytes)?;
    }
    let outputs: Vec<String> = files.iter().map(|s| s.to_string()).collect();
    let manifest = manifest_text(&resolved, "select", &started, &now(), &outputs, &[])?;
    fs::write(common.out.join("manifest.toml"), manifest)?;
    writeln!(out, "wrote {}", common.out.display())?;
    Ok(())
}

fn cmd_sweep(
    common: &CommonArgs,
    axis: Option<SweepAxis>,
    values: Option<&str>,
    env_seed: Option<&str>,
    out: &mut dyn Write,
) -> CmdResult {
    let started = now();
    let mut resolved = resolve(common, env_seed)?;
    let cfg = &mut resolved.experiment;
    if let Some(axis) = axis {
        cfg.sweep_axis = axis;
    }
    if let Some(values) = values {
        cfg.sweep_values = parse_values(values).map_err(config_error)?;
    }
    if cfg.sweep_axis == SweepAxis::None {
        cfg.sweep_values.clear();
    }
    cfg.validate().map_err(config_error)?;
    let cfg = &resolved.experiment;

    let stats: AggregateStats = with_pool(common.threads, || run_sweep(cfg))??;
    let rows = stats.rows();
    let mut csv = Vec::new();
    write_csv(&mut csv, cfg.sweep_axis, &rows)?;
    fs::create_dir_all(&common.out)?;
    let name = format!("sweep_{}.csv", cfg.sweep_axis);
    fs::write(common.out.join(&name), &csv)?;

    let points = cfg.points();
    let mut skips = Vec::new();
    for (i, value) in points.iter().enumerate() {
        let label = value.map_or_else(|| "NA".to_string(), |v| v.to_string());
        for &a in &cfg.algorithms {
            let n = stats.skipped(i, a);
            if n > 0 {
                skips.push((label.clone(), a, n, stats.skip_reasons(i, a)));
            }
        }
    }
    let manifest = manifest_text(
        &resolved,
        "sweep",
        &started,
        &now(),
        std::slice::from_ref(&name),
        &skips,
    )?;
    fs::write(common.out.join("manifest.toml"), manifest)?;

    out.write_all(&csv)?;
    writeln!(out, "wrote {}", common.out.join(&name).display())?;
    if stats.total_trials() == 0 {
        let reason = skips
            .first()
            .and_then(|(_, _, _, r)| r.first().map(|(s, _)| s.clone()))
            .unwrap_or_else(|| "no trial succeeded".into());
        return Err(Failure {
            code: EXIT_INFEASIBLE,
            message: format!("every trial failed: {reason}"),
        });
    }
    Ok(())
}

fn cmd_complexity(
    common: &CommonArgs,
    max_chains: Option<usize>,
    dry_run: bool,
    env_seed: Option<&str>,
    out: &mut dyn Write,
) -> CmdResult {
    let resolved = resolve(common, env_seed)?;
    let cfg = &resolved.experiment;
    let (n, k) = (cfg.antennas, cfg.users);
    if n == 0 || k == 0 {
        return Err(config_error(Error::Config(
            "users and antennas must be positive".into(),
        )));
    }
    let budget = CircuitBudget::new(cfg.p_max, cfg.p_c).map_err(config_error)?;
    let m = max_chains.unwrap_or_else(|| budget.max_chains());
    let bfs = complexity_estimate(n, k, m, ComplexityAlgo::Bfs);
    let greedy = complexity_estimate(n, k, m, ComplexityAlgo::Greedy);
    let standard: num_bigint::BigUint = (k..=m.min(n)).map(|s| binomial_big(n, s)).sum();
    writeln!(out, "N = {n}, K = {k}, max_chains = {m}")?;
    writeln!(out, "bfs_estimate = {bfs} (~10^{})", magnitude(&bfs))?;
    writeln!(
        out,
        "greedy_estimate = {greedy} (~10^{})",
        magnitude(&greedy)
    )?;
    writeln!(
        out,
        "bfs_standard_subsets = {standard} (sum of C(N,S) for S in [K, min(N, max_chains)])"
    )?;
    let saturating = bfs_subset_count(n, k, m);
    if saturating < u128::MAX && m <= n {
        debug_assert_eq!(num_bigint::BigUint::from(saturating), standard);
    }
    if dry_run {
        if k > n {
            return Err(config_error(Error::Config(format!(
                "{k} users exceed {n} antennas"
            ))));
        }
        let dry_budget = CircuitBudget::new(cfg.p_max, cfg.p_c).map_err(config_error)?;
        let params = cfg.point_params(None).map_err(config_error)?;
        let mut rng = trial_rng(cfg.master_seed, 0);
        let drop = draw_drop(&params.drop, &mut rng)?;
        let res = greedy_select(
            &drop.channel,
            &dry_budget,
            &GreedyOptions {
                init: cfg.init_strategy,
                keep_best: cfg.keep_best,
            },
        )?;
        let last = res.trajectory.last().map_or(k, |p| p.0);
        let expected = greedy_candidate_count(n, k, last);
        let c = &res.counters;
        writeln!(
            out,
            "dry_run: seed = {}, selected S = {}, last visited S = {last}",
            cfg.master_seed, res.chains
        )?;
        writeln!(
            out,
            "measured candidate_evaluations = {}",
            c.candidate_evaluations
        )?;
        writeln!(
            out,
            "expected sum(N-S+1) for S in [K+1, {last}] = {expected}"
        )?;
        writeln!(
            out,
            "gram_builds = {}, rank1_updates = {}, inversions = {}, subsets_enumerated = {}",
            c.gram_builds, c.rank1_updates, c.inversions, c.subsets_enumerated
        )?;
        writeln!(out, "match = {}", c.candidate_evaluations == expected)?;
    }
    Ok(())
}

/// Fixed-point with at most 9 decimals and no trailing zeros.
fn fmt_fixed(x: f64) -> String {
    let s = format!("{x:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Decimal exponent of a positive integer (number of digits minus one).
fn magnitude(x: &num_bigint::BigUint) -> usize {
    x.to_string().len().saturating_sub(1)
}
