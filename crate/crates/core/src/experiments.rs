//! Monte-Carlo trials and parameter sweeps.
//!
//! Each trial draws one user drop and channel from the substream
//! `(master_seed, trial_index)` and evaluates every requested algorithm on that
//! same realization. Per-trial records are folded into [`AggregateStats`] in
//! trial order, so the output does not depend on how many threads ran the
//! trials.

use std::collections::BTreeMap;
use std::io::Write;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::{
    average_sum_rate_closed_form, optimal_rf_count_analytic, CircuitBudget, EqualPowerVariant,
};
use crate::channel::{draw_drop, trial_rng, DropParams, TrialRng};
use crate::error::{Error, Result};
use crate::selection::{
    bfs_curve, bfs_select, greedy_curve, greedy_select, random_curve, AllocationRule, CurvePoint,
    GreedyOptions, InitStrategy, BFS_ENUMERATION_CAP,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Greedy antenna addition with the first-decrease stop.
    Greedy,
    /// Exhaustive subset search.
    Bfs,
    /// Uniformly random subsets with water-filling.
    Random,
    /// Uniformly random subsets with equal received power.
    RandomErp,
    /// Closed-form average rate at the analytic optimum.
    Analytic,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Self::Greedy,
        Self::Bfs,
        Self::Random,
        Self::RandomErp,
        Self::Analytic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Greedy => "greedy",
            Self::Bfs => "bfs",
            Self::Random => "random",
            Self::RandomErp => "random_erp",
            Self::Analytic => "analytic",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Antennas,
    RfChains,
    PMax,
    Users,
    #[default]
    None,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            Self::Antennas => "antennas",
            Self::RfChains => "rf_chains",
            Self::PMax => "p_max",
            Self::Users => "users",
            Self::None => "none",
        }
    }

    fn is_integral(self) -> bool {
        matches!(self, Self::Antennas | Self::RfChains | Self::Users)
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Self::Antennas,
            Self::RfChains,
            Self::PMax,
            Self::Users,
            Self::None,
        ]
        .into_iter()
        .find(|a| a.name() == s)
        .ok_or_else(|| Error::Config(format!("unknown sweep axis '{s}'")))
    }
}

/// Sweep definition. Defaults follow the reference system parameters
/// (K = 10, N = 256, p_c = 0.05, alpha = 3.7, 500 m cell).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub users: usize,
    pub antennas: usize,
    pub p_max: f64,
    pub p_c: f64,
    pub alpha: f64,
    pub cell_radius: f64,
    pub min_distance: f64,
    pub trials: u64,
    pub master_seed: u64,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub equal_power_variant: EqualPowerVariant,
    pub init_strategy: InitStrategy,
    pub keep_best: bool,
    pub bfs_cap: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            users: 10,
            antennas: 256,
            p_max: 1.0,
            p_c: 0.05,
            alpha: 3.7,
            cell_radius: 500.0,
            min_distance: 35.0,
            trials: 200,
            master_seed: 1,
            sweep_axis: SweepAxis::None,
            sweep_values: Vec::new(),
            algorithms: vec![Algorithm::Greedy, Algorithm::Random],
            equal_power_variant: EqualPowerVariant::Paper,
            init_strategy: InitStrategy::Auto,
            keep_best: false,
            bfs_cap: BFS_ENUMERATION_CAP as u64,
        }
    }
}

/// Parameters of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointParams {
    pub drop: DropParams,
    pub budget: CircuitBudget,
    /// Fixed chain count on the `rf_chains` axis.
    pub chains: Option<usize>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            return bad("at least one algorithm is required".into());
        }
        if self.sweep_axis != SweepAxis::None && self.sweep_values.is_empty() {
            return bad(format!(
                "sweep axis {} needs at least one value",
                self.sweep_axis
            ));
        }
        for v in &self.sweep_values {
            if !(v.is_finite() && *v > 0.0) {
                return bad(format!("sweep value {v} must be positive"));
            }
            if self.sweep_axis.is_integral() && v.fract() != 0.0 {
                return bad(format!(
                    "sweep value {v} must be an integer on axis {}",
                    self.sweep_axis
                ));
            }
        }
        if self.users == 0 || self.antennas == 0 {
            return bad("users and antennas must be positive".into());
        }
        if !(self.alpha > 0.0 && self.cell_radius > 0.0 && self.min_distance > 0.0) {
            return bad("alpha, cell_radius and min_distance must be positive".into());
        }
        if self.min_distance > self.cell_radius {
            return bad("min_distance exceeds cell_radius".into());
        }
        CircuitBudget::new(self.p_max, self.p_c).map_err(|e| Error::Config(e.to_string()))?;
        for value in self.points() {
            self.point_params(value)
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Sweep values, or a single `None` point when there is no sweep axis.
    pub fn points(&self) -> Vec<Option<f64>> {
        if self.sweep_axis == SweepAxis::None {
            vec![None]
        } else {
            self.sweep_values.iter().copied().map(Some).collect()
        }
    }

    pub fn point_params(&self, value: Option<f64>) -> Result<PointParams> {
        let mut drop = DropParams {
            users: self.users,
            antennas: self.antennas,
            alpha: self.alpha,
            cell_radius: self.cell_radius,
            min_distance: self.min_distance,
        };
        let mut p_max = self.p_max;
        let mut chains = None;
        if let Some(v) = value {
            match self.sweep_axis {
                SweepAxis::Antennas => drop.antennas = v as usize,
                SweepAxis::Users => drop.users = v as usize,
                SweepAxis::PMax => p_max = v,
                SweepAxis::RfChains => chains = Some(v as usize),
                SweepAxis::None => {}
            }
        }
        if drop.users > drop.antennas {
            return Err(Error::Parameter(format!(
                "{} users exceed {} antennas",
                drop.users, drop.antennas
            )));
        }
        let budget = CircuitBudget::new(p_max, self.p_c)?;
        Ok(PointParams {
            drop,
            budget,
            chains,
        })
    }

    fn greedy_options(&self) -> GreedyOptions {
        GreedyOptions {
            init: self.init_strategy,
            keep_best: self.keep_best,
        }
    }

    fn schema(&self) -> Schema {
        Schema {
            axis: self.sweep_axis,
            values: self.points().iter().map(|v| v.map(f64::to_bits)).collect(),
            algorithms: self.algorithms.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// One operating point chosen by the algorithm.
    Sample(CurvePoint),
    /// Rate at every chain count, reduced to the argmax of the mean curve.
    Curve(Vec<CurvePoint>),
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub point: usize,
    pub trial: u64,
    pub algorithm: Algorithm,
    pub outcome: Outcome,
}

fn skipped(e: &Error) -> Outcome {
    Outcome::Skipped(e.to_string())
}

/// Records of every algorithm at sweep point `point` for one trial.
pub fn run_trial(
    cfg: &ExperimentConfig,
    point: usize,
    trial_index: u64,
) -> Result<Vec<TrialRecord>> {
    let points = cfg.points();
    if point >= points.len() {
        return Err(Error::Parameter(format!(
            "sweep point {point} out of range"
        )));
    }
    Ok(trial_records(cfg, trial_index)?
        .into_iter()
        .filter(|r| r.point == point)
        .collect())
}

/// Records of every algorithm at every sweep point for one trial.
pub fn trial_records(cfg: &ExperimentConfig, trial_index: u64) -> Result<Vec<TrialRecord>> {
    if cfg.sweep_axis == SweepAxis::RfChains {
        return fixed_chain_records(cfg, trial_index);
    }
    let mut out = Vec::new();
    for (point, value) in cfg.points().into_iter().enumerate() {
        let params = cfg.point_params(value)?;
        let mut rng = trial_rng(cfg.master_seed, trial_index);
        let drop = draw_drop(&params.drop, &mut rng);
        for &algorithm in &cfg.algorithms {
            let outcome = match &drop {
                Ok(d) => evaluate_point(cfg, &params, &d.channel, algorithm, &rng),
                Err(e) => skipped(e),
            };
            out.push(TrialRecord {
                point,
                trial: trial_index,
                algorithm,
                outcome,
            });
        }
    }
    Ok(out)
}

fn evaluate_point(
    cfg: &ExperimentConfig,
    params: &PointParams,
    channel: &crate::channel::ChannelRealization,
    algorithm: Algorithm,
    rng: &TrialRng,
) -> Outcome {
    let budget = &params.budget;
    let users = params.drop.users;
    let result = match algorithm {
        Algorithm::Greedy => greedy_select(channel, budget, &cfg.greedy_options()).map(|r| {
            Outcome::Sample(CurvePoint {
                chains: r.chains,
                rate: r.rate,
                p_out: r.p_out(),
            })
        }),
        Algorithm::Bfs => bfs_select(channel, budget, cfg.bfs_cap as u128).map(|r| {
            Outcome::Sample(CurvePoint {
                chains: r.chains,
                rate: r.rate,
                p_out: r.p_out(),
            })
        }),
        Algorithm::Random => random_curve(
            channel,
            budget,
            AllocationRule::WaterFilling,
            &mut rng.clone(),
        )
        .map(Outcome::Curve),
        Algorithm::RandomErp => random_curve(
            channel,
            budget,
            AllocationRule::EqualReceived(cfg.equal_power_variant),
            &mut rng.clone(),
        )
        .map(Outcome::Curve),
        Algorithm::Analytic => optimal_rf_count_analytic(users, budget).and_then(|s| {
            Ok(Outcome::Sample(CurvePoint {
                chains: s,
                rate: average_sum_rate_closed_form(s, users, budget)?,
                p_out: budget.transmit_budget(s),
            }))
        }),
    };
    result.unwrap_or_else(|e| skipped(&e))
}

fn analytic_curve(users: usize, budget: &CircuitBudget) -> Result<Vec<CurvePoint>> {
    budget.check_feasible(users)?;
    (users..=budget.max_chains())
        .map(|s| {
            Ok(CurvePoint {
                chains: s,
                rate: average_sum_rate_closed_form(s, users, budget)?,
                p_out: budget.transmit_budget(s),
            })
        })
        .collect()
}

/// Fixed chain count sweep: one drop per trial, each algorithm's whole rate
/// curve computed once and read off at every requested chain count.
fn fixed_chain_records(cfg: &ExperimentConfig, trial_index: u64) -> Result<Vec<TrialRecord>> {
    let params = cfg.point_params(None)?;
    let budget = &params.budget;
    let mut rng = trial_rng(cfg.master_seed, trial_index);
    let drop = draw_drop(&params.drop, &mut rng);
    let curves: Vec<(Algorithm, Result<Vec<CurvePoint>>)> = cfg
        .algorithms
        .iter()
        .map(|&algorithm| {
            let curve = drop.as_ref().map_err(Clone::clone).and_then(|d| {
                let ch = &d.channel;
                match algorithm {
                    Algorithm::Greedy => {
                        greedy_curve(ch, budget, cfg.init_strategy).map(|(c, _)| c)
                    }
                    Algorithm::Bfs => bfs_curve(ch, budget, cfg.bfs_cap as u128),
                    Algorithm::Random => {
                        random_curve(ch, budget, AllocationRule::WaterFilling, &mut rng.clone())
                    }
                    Algorithm::RandomErp => random_curve(
                        ch,
                        budget,
                        AllocationRule::EqualReceived(cfg.equal_power_variant),
                        &mut rng.clone(),
                    ),
                    Algorithm::Analytic => analytic_curve(params.drop.users, budget),
                }
            });
            (algorithm, curve)
        })
        .collect();

    let mut out = Vec::new();
    for (point, value) in cfg.points().into_iter().enumerate() {
        let chains = value.map(|v| v as usize).unwrap_or(0);
        for (algorithm, curve) in &curves {
            let outcome = match curve {
                Ok(c) => match c.iter().find(|p| p.chains == chains) {
                    Some(p) => Outcome::Sample(*p),
                    None => Outcome::Skipped(format!(
                        "{chains} chains outside [{}, {}]",
                        params.drop.users,
                        c.last().map_or(0, |p| p.chains)
                    )),
                },
                Err(e) => skipped(e),
            };
            out.push(TrialRecord {
                point,
                trial: trial_index,
                algorithm: *algorithm,
                outcome,
            });
        }
    }
    Ok(out)
}

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Pairwise combination of two partial moments; symmetric in its arguments.
    pub fn merge(&self, other: &Moments) -> Moments {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        Moments {
            count: self.count + other.count,
            mean: (na * self.mean + nb * other.mean) / n,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n,
        }
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.mean
        }
    }

    /// Sample standard deviation over the square root of the count.
    pub fn std_error(&self) -> f64 {
        match self.count {
            0 => f64::NAN,
            1 => 0.0,
            n => (self.m2 / (n - 1) as f64).sqrt() / (n as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Cell {
    pub rate: Moments,
    pub chains: Moments,
    pub p_out: Moments,
}

impl Cell {
    fn push(&mut self, p: &CurvePoint) {
        self.rate.push(p.rate);
        self.chains.push(p.chains as f64);
        self.p_out.push(p.p_out);
    }

    fn merge(&self, other: &Cell) -> Cell {
        Cell {
            rate: self.rate.merge(&other.rate),
            chains: self.chains.merge(&other.chains),
            p_out: self.p_out.merge(&other.p_out),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct CellKey {
    point: usize,
    algorithm: Algorithm,
    /// Chain count for curve outcomes.
    chains: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Schema {
    axis: SweepAxis,
    values: Vec<Option<u64>>,
    algorithms: Vec<Algorithm>,
}

/// Merged Monte-Carlo statistics per sweep point and algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateStats {
    schema: Schema,
    cells: BTreeMap<CellKey, Cell>,
    skips: BTreeMap<(usize, Algorithm), BTreeMap<String, u64>>,
}

/// One output row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: Option<f64>,
    pub algorithm: Algorithm,
    pub mean_rate: f64,
    pub stderr_rate: f64,
    pub mean_chains: f64,
    pub mean_p_out: f64,
    pub trials: u64,
    pub skipped: u64,
}

impl AggregateStats {
    pub fn empty(cfg: &ExperimentConfig) -> Self {
        Self {
            schema: cfg.schema(),
            cells: BTreeMap::new(),
            skips: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, record: &TrialRecord) {
        let key = |chains| CellKey {
            point: record.point,
            algorithm: record.algorithm,
            chains,
        };
        match &record.outcome {
            Outcome::Sample(p) => self.cells.entry(key(None)).or_default().push(p),
            Outcome::Curve(curve) => {
                for p in curve {
                    self.cells.entry(key(Some(p.chains))).or_default().push(p);
                }
            }
            Outcome::Skipped(reason) => {
                *self
                    .skips
                    .entry((record.point, record.algorithm))
                    .or_default()
                    .entry(reason.clone())
                    .or_default() += 1;
            }
        }
    }

    /// Count-weighted merge of two aggregates over the same sweep.
    pub fn merge(&self, other: &AggregateStats) -> Result<AggregateStats> {
        if self.schema != other.schema {
            return Err(Error::Merge("aggregates describe different sweeps".into()));
        }
        let mut cells = self.cells.clone();
        for (key, cell) in &other.cells {
            let merged = cells.get(key).map_or(*cell, |c| c.merge(cell));
            cells.insert(*key, merged);
        }
        let mut skips = self.skips.clone();
        for (key, reasons) in &other.skips {
            let entry = skips.entry(*key).or_default();
            for (reason, n) in reasons {
                *entry.entry(reason.clone()).or_default() += n;
            }
        }
        Ok(AggregateStats {
            schema: self.schema.clone(),
            cells,
            skips,
        })
    }

    pub fn skipped(&self, point: usize, algorithm: Algorithm) -> u64 {
        self.skips
            .get(&(point, algorithm))
            .map_or(0, |r| r.values().sum())
    }

    /// Skip reasons with their counts.
    pub fn skip_reasons(&self, point: usize, algorithm: Algorithm) -> Vec<(String, u64)> {
        self.skips
            .get(&(point, algorithm))
            .map(|r| r.iter().map(|(k, v)| (k.clone(), *v)).collect())
            .unwrap_or_default()
    }

    /// Mean-rate curve of a curve-valued algorithm at `point`, by chain count.
    pub fn mean_curve(&self, point: usize, algorithm: Algorithm) -> Vec<(usize, Cell)> {
        self.cells
            .iter()
            .filter(|(k, _)| k.point == point && k.algorithm == algorithm)
            .filter_map(|(k, c)| k.chains.map(|s| (s, *c)))
            .collect()
    }

    pub fn rows(&self) -> Vec<SweepRow> {
        let mut rows = Vec::new();
        for (point, value) in self.schema.values.iter().enumerate() {
            for &algorithm in &self.schema.algorithms {
                let direct = self.cells.get(&CellKey {
                    point,
                    algorithm,
                    chains: None,
                });
                let cell = direct.copied().or_else(|| {
                    // Argmax of the mean curve; ties go to the smaller chain count.
                    self.mean_curve(point, algorithm).into_iter().fold(
                        None::<Cell>,
                        |best, (_, c)| match best {
                            Some(b) if b.rate.mean >= c.rate.mean => Some(b),
                            _ => Some(c),
                        },
                    )
                });
                let cell = cell.unwrap_or_default();
                rows.push(SweepRow {
                    axis_value: value.map(f64::from_bits),
                    algorithm,
                    mean_rate: cell.rate.mean(),
                    stderr_rate: cell.rate.std_error(),
                    mean_chains: cell.chains.mean(),
                    mean_p_out: cell.p_out.mean(),
                    trials: cell.rate.count,
                    skipped: self.skipped(point, algorithm),
                });
            }
        }
        rows
    }

    /// Number of successful trial evaluations across all rows.
    pub fn total_trials(&self) -> u64 {
        self.rows().iter().map(|r| r.trials).sum()
    }
}

/// Runs `trials` of the sweep (in parallel on the current rayon pool) and
/// folds their records in trial order.
pub fn run_trials(cfg: &ExperimentConfig, trials: Range<u64>) -> Result<AggregateStats> {
    cfg.validate()?;
    let records: Vec<Result<Vec<TrialRecord>>> = trials
        .into_par_iter()
        .map(|t| trial_records(cfg, t))
        .collect();
    let mut stats = AggregateStats::empty(cfg);
    for batch in records {
        for record in &batch? {
            stats.push(record);
        }
    }
    Ok(stats)
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<AggregateStats> {
    run_trials(cfg, 0..cfg.trials)
}

pub const CSV_HEADER: &str =
    "axis_value,algorithm,mean_rate,stderr_rate,mean_S,mean_pout,trials,skipped";

/// Float with 9 significant digits, independent of locale.
pub fn fmt_sig9(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.8e}")
    }
}

fn fmt_axis(axis: SweepAxis, value: Option<f64>) -> String {
    match value {
        None => "NA".into(),
        Some(v) if axis.is_integral() => format!("{}", v as u64),
        Some(v) => fmt_sig9(v),
    }
}

pub fn write_csv<W: Write>(out: &mut W, axis: SweepAxis, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_axis(axis, r.axis_value),
            r.algorithm,
            fmt_sig9(r.mean_rate),
            fmt_sig9(r.stderr_rate),
            fmt_sig9(r.mean_chains),
            fmt_sig9(r.mean_p_out),
            r.trials,
            r.skipped
        )?;
    }
    Ok(())
}
