//! Joint choice of the RF-chain count and the active antenna subset.
//!
//! * [`greedy_select`] grows the subset one antenna at a time, always adding
//!   the antenna with the largest `eta^2` decrement, water-fills the remaining
//!   budget and stops as soon as the sum-rate drops.
//! * [`bfs_select`] enumerates every subset of every feasible size.
//! * [`random_select`] draws a uniform subset of a fixed size.
//!
//! Ties are broken towards the lowest antenna index or the lexicographically
//! smallest subset.

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_complex::Complex64;
use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::allocation::{
    effective_gains, equal_received_power, waterfill, CircuitBudget, EqualPowerVariant,
    PowerAllocation,
};
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::precoder::{build_gram, sum_rate, GramState};
use serde::{Deserialize, Serialize};

/// Largest `C(N, K)` for which the initial subset is found by enumeration.
pub const INIT_ENUMERATION_CAP: u128 = 1_000_000;
/// Default limit on the total number of subsets [`bfs_select`] may enumerate.
pub const BFS_ENUMERATION_CAP: u128 = 10_000_000;
/// Redraws allowed when a random subset has a singular Gram matrix.
pub const RANDOM_MAX_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounters {
    pub gram_builds: u64,
    pub rank1_updates: u64,
    pub inversions: u64,
    pub subsets_enumerated: u64,
    pub candidate_evaluations: u64,
}

impl OpCounters {
    fn absorb_state(&mut self, state: &GramState) {
        self.rank1_updates += state.rank1_updates();
        self.inversions += state.dense_inversions();
    }

    fn count_build(&mut self) {
        self.gram_builds += 1;
    }
}

impl std::ops::AddAssign for OpCounters {
    fn add_assign(&mut self, rhs: Self) {
        self.gram_builds += rhs.gram_builds;
        self.rank1_updates += rhs.rank1_updates;
        self.inversions += rhs.inversions;
        self.subsets_enumerated += rhs.subsets_enumerated;
        self.candidate_evaluations += rhs.candidate_evaluations;
    }
}

/// How the first `K` antennas of the greedy path are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitStrategy {
    /// Minimum-`eta^2` K-subset by full enumeration.
    ExactBfs,
    /// Pivoted Gram-Schmidt: repeatedly take the column with the largest
    /// residual norm, which greedily maximizes the Gram determinant.
    GreedyVolume,
    /// Exact enumeration while `C(N, K)` is within [`INIT_ENUMERATION_CAP`], greedy-volume beyond.
    #[default]
    Auto,
}

impl std::fmt::Display for InitStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ExactBfs => "exact-bfs",
            Self::GreedyVolume => "greedy-volume",
            Self::Auto => "auto",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Greedy,
    Bfs,
    Random,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Greedy => "greedy",
            Self::Bfs => "bfs",
            Self::Random => "random",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub method: Method,
    /// Selected antennas in ascending order.
    pub subset: Vec<usize>,
    pub chains: usize,
    pub eta_sq: f64,
    pub allocation: PowerAllocation,
    pub rate: f64,
    /// `(S, rate)` for every chain count visited, including a rejected final step.
    pub trajectory: Vec<(usize, f64)>,
    pub counters: OpCounters,
    /// Strategy actually used for the first `K` antennas (greedy only).
    pub init_strategy: Option<InitStrategy>,
}

impl SelectionResult {
    pub fn p_out(&self) -> f64 {
        self.allocation.total()
    }
}

/// One point of a rate-versus-chains curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub chains: usize,
    pub rate: f64,
    pub p_out: f64,
}

/// Power allocation applied on a fixed subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationRule {
    WaterFilling,
    EqualReceived(EqualPowerVariant),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreedyOptions {
    pub init: InitStrategy,
    /// Return the best visited point when it beats the first-decrease stop.
    pub keep_best: bool,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        Self {
            init: InitStrategy::Auto,
            keep_best: false,
        }
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication.
        match acc.checked_mul((n - i) as u128) {
            Some(v) => acc = v / (i as u128 + 1),
            None => return u128::MAX,
        }
    }
    acc
}

/// Lexicographic iterator over the `k`-subsets of `0..n`.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        let current = (k <= n).then(|| (0..k).collect());
        Self { n, current }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

fn column(h: &DMatrix<Complex64>, n: usize) -> Vec<Complex64> {
    h.column(n).iter().copied().collect()
}

fn check_channel(channel: &ChannelRealization) -> Result<(usize, usize)> {
    let (k, n) = (channel.users(), channel.antennas());
    if k > n {
        return Err(Error::InfeasibleSubset { size: n, users: k });
    }
    Ok((k, n))
}

/// Picks the first `K` antennas, returning the subset (ascending) and the strategy used.
pub fn initial_k_subset(
    h: &DMatrix<Complex64>,
    users: usize,
    strategy: InitStrategy,
    counters: &mut OpCounters,
) -> Result<(Vec<usize>, InitStrategy)> {
    let n = h.ncols();
    if users == 0 || users > n || h.nrows() != users {
        return Err(Error::Parameter(format!(
            "cannot pick {users} antennas from a {}x{n} channel",
            h.nrows()
        )));
    }
    let combos = binomial(n, users);
    let resolved = match strategy {
        InitStrategy::Auto if combos <= INIT_ENUMERATION_CAP => InitStrategy::ExactBfs,
        InitStrategy::Auto => InitStrategy::GreedyVolume,
        InitStrategy::ExactBfs if combos > INIT_ENUMERATION_CAP => {
            return Err(Error::Capacity {
                required: combos,
                cap: INIT_ENUMERATION_CAP,
            })
        }
        s => s,
    };
    let subset = match resolved {
        InitStrategy::ExactBfs => min_eta_subset(h, users, counters)?,
        _ => greedy_volume(h, users)?,
    };
    Ok((subset, resolved))
}

fn min_eta_subset(
    h: &DMatrix<Complex64>,
    users: usize,
    counters: &mut OpCounters,
) -> Result<Vec<usize>> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut last_err = None;
    for subset in Combinations::new(h.ncols(), users) {
        counters.subsets_enumerated += 1;
        counters.count_build();
        counters.inversions += 1;
        match build_gram(h, &subset) {
            Ok(state) => {
                if best.as_ref().is_none_or(|(eta, _)| state.eta_sq() < *eta) {
                    best = Some((state.eta_sq(), subset));
                }
            }
            Err(e @ Error::Singular { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    best.map(|(_, s)| s).ok_or_else(|| {
        last_err.unwrap_or(Error::Singular {
            condition: f64::INFINITY,
        })
    })
}

fn greedy_volume(h: &DMatrix<Complex64>, users: usize) -> Result<Vec<usize>> {
    let n = h.ncols();
    let mut residual: Vec<Vec<Complex64>> = (0..n).map(|j| column(h, j)).collect();
    let scale = residual
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut chosen = Vec::with_capacity(users);
    for _ in 0..users {
        let mut pick: Option<(usize, f64)> = None;
        for (j, r) in residual.iter().enumerate() {
            if chosen.contains(&j) {
                continue;
            }
            let norm_sq: f64 = r.iter().map(|z| z.norm_sqr()).sum();
            if pick.is_none_or(|(_, best)| norm_sq > best) {
                pick = Some((j, norm_sq));
            }
        }
        let (j, norm_sq) = pick.expect("users <= antennas");
        if norm_sq.is_nan() || norm_sq <= 1e-12 * scale || scale == 0.0 {
            return Err(Error::Singular {
                condition: f64::INFINITY,
            });
        }
        let inv_norm = 1.0 / norm_sq.sqrt();
        let q: Vec<Complex64> = residual[j].iter().map(|z| z * inv_norm).collect();
        chosen.push(j);
        for (i, r) in residual.iter_mut().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let proj: Complex64 = q.iter().zip(r.iter()).map(|(a, b)| a.conj() * b).sum();
            for (x, qa) in r.iter_mut().zip(&q) {
                *x -= qa * proj;
            }
        }
    }
    chosen.sort_unstable();
    Ok(chosen)
}

fn allocate(
    channel: &ChannelRealization,
    budget_cfg: &CircuitBudget,
    eta_sq: f64,
    chains: usize,
    rule: AllocationRule,
) -> Result<(PowerAllocation, f64)> {
    let ls = &channel.large_scale;
    let allocation = match rule {
        AllocationRule::WaterFilling => waterfill(
            &effective_gains(ls, eta_sq),
            budget_cfg.transmit_budget(chains),
        )?,
        AllocationRule::EqualReceived(variant) => {
            equal_received_power(chains, budget_cfg, ls.users(), ls, variant)?
        }
    };
    let rate = sum_rate(ls, eta_sq, &allocation.powers);
    Ok((allocation, rate))
}

struct WalkStep<'a> {
    chains: usize,
    state: &'a GramState,
    allocation: PowerAllocation,
    rate: f64,
}

/// Walks the greedy path from `K` to `min(N, max_chains)` chains, calling
/// `visit` after each water-filled step until it returns `false`.
fn greedy_walk(
    channel: &ChannelRealization,
    budget_cfg: &CircuitBudget,
    init: InitStrategy,
    counters: &mut OpCounters,
    mut visit: impl FnMut(WalkStep<'_>) -> bool,
) -> Result<InitStrategy> {
    let (k, n) = check_channel(channel)?;
    budget_cfg.check_feasible(k)?;
    let h = &channel.h;
    let (start, resolved) = initial_k_subset(h, k, init, counters)?;
    let mut state = build_gram(h, &start)?;
    counters.count_build();
    let last = n.min(budget_cfg.max_chains());

    let walk = (|| {
        let (allocation, rate) = allocate(
            channel,
            budget_cfg,
            state.eta_sq(),
            k,
            AllocationRule::WaterFilling,
        )?;
        if !visit(WalkStep {
            chains: k,
            state: &state,
            allocation,
            rate,
        }) {
            return Ok(());
        }
        for chains in k + 1..=last {
            let mut best: Option<(usize, f64)> = None;
            for cand in (0..n).filter(|c| !state.contains(*c)) {
                counters.candidate_evaluations += 1;
                let delta = state.delta_eta_add(&column(h, cand));
                if best.is_none_or(|(_, d)| delta > d) {
                    best = Some((cand, delta));
                }
            }
            let Some((pick, _)) = best else { break };
            state.add_antenna(pick, &column(h, pick))?;
            let (allocation, rate) = allocate(
                channel,
                budget_cfg,
                state.eta_sq(),
                chains,
                AllocationRule::WaterFilling,
            )?;
            if !visit(WalkStep {
                chains,
                state: &state,
                allocation,
                rate,
            }) {
                break;
            }
        }
        Ok(())
    })();
    counters.absorb_state(&state);
    walk.map(|_| resolved)
}

#[derive(Clone)]
struct Snapshot {
    subset: Vec<usize>,
    eta_sq: f64,
    allocation: PowerAllocation,
    rate: f64,
}

impl Snapshot {
    fn take(step: &WalkStep<'_>) -> Self {
        let mut subset = step.state.selected().to_vec();
        subset.sort_unstable();
        Self {
            subset,
            eta_sq: step.state.eta_sq(),
            allocation: step.allocation.clone(),
            rate: step.rate,
        }
    }
}

/// Greedy RF-chain count and antenna selection with the first-decrease stop.
pub fn greedy_select(
    channel: &ChannelRealization,
    budget_cfg: &CircuitBudget,
    options: &GreedyOptions,
) -> Result<SelectionResult> {
    let mut counters = OpCounters::default();
    let mut trajectory = Vec::new();
    let mut current: Option<Snapshot> = None;
    let mut best: Option<Snapshot> = None;
    let resolved = greedy_walk(channel, budget_cfg, options.init, &mut counters, |step| {
        trajectory.push((step.chains, step.rate));
        if let Some(prev) = &current {
            if step.rate < prev.rate {
                return false;
            }
        }
        let snap = Snapshot::take(&step);
        if options.keep_best && best.as_ref().is_none_or(|b| snap.rate > b.rate) {
            best = Some(snap.clone());
        }
        current = Some(snap);
        true
    })?;
    let mut chosen = current.expect("greedy walk visits S = K");
    if let Some(b) = best {
        if b.rate > chosen.rate {
            chosen = b;
        }
    }
    // Report the chosen subset from a dense factorization so results do not
    // carry rank-1 rounding and compare exactly with enumeration.
    let state = build_gram(&channel.h, &chosen.subset)?;
    counters.count_build();
    counters.inversions += 1;
    let (allocation, rate) = allocate(
        channel,
        budget_cfg,
        state.eta_sq(),
        chosen.subset.len(),
        AllocationRule::WaterFilling,
    )?;
    chosen.eta_sq = state.eta_sq();
    chosen.allocation = allocation;
    chosen.rate = rate;
    Ok(SelectionResult {
        method: Method::Greedy,
        chains: chosen.subset.len(),
        subset: chosen.subset,
        eta_sq: chosen.eta_sq,
        allocation: chosen.allocation,
        rate: chosen.rate,
        trajectory,
        counters,
        init_strategy: Some(resolved),
    })
}

/// Water-filled rate of the greedy path at every chain count from `K` to
/// `min(N, max_chains)`, without stopping.
pub fn greedy_curve(
    channel: &ChannelRealization,
    budget_cfg: &CircuitBudget,
    init: InitStrategy,
) -> Result<(Vec<CurvePoint>, OpCounters)> {
    let mut counters = OpCounters::default();
    let mut curve = Vec::new();
    greedy_walk(channel, budget_cfg, init, &mut counters, |step| {
        curve.push(CurvePoint {
            chains: step.chains,
            rate: step.rate,
            p_out: step.allocation.total(),
        });
        true
    })?;
    Ok((curve, counters))
}

/// Number of subsets [`bfs_select`] enumerates: `sum_{S=K}^{min(N, max_chains)} C(N, S)`.
pub fn bfs_subset_count(antennas: usize, users: usize, max_chains: usize) -> u128 {
    (users..=antennas.min(max_chains))
        .map(|s| binomial(antennas, s))
        .fold(0u128, |acc, c| acc.saturating_add(c))
}

/// Exhaustive search over every subset of every feasible size, each water-filled.
pub fn bfs_select(
    channel: &ChannelRealization,
    budget_cfg: &CircuitBudget,
    cap: u128,
) -> Result<SelectionResult> {
    bfs_enumerate(channel, budget_cfg, cap).map(|(result, _)| result)
}

/// Best water-filled rate of each chain count from `K` to `min(N, max_chains)`
/// by exhaustive search.
pub fn bfs_curve(
    channel: &ChannelRealization,
    budget_cfg: &CircuitBudget,
    cap: u128,
) -> Result<Vec<CurvePoint>> {
    bfs_enumerate(channel, budget_cfg, cap).map(|(_, curve)| curve)
}

fn bfs_enumerate(
    channel: &ChannelRealization,
    budget_cfg: &CircuitBudget,
    cap: u128,
) -> Result<(SelectionResult, Vec<CurvePoint>)> {
    let (k, n) = check_channel(channel)?;
    budget_cfg.check_feasible(k)?;
    let last = n.min(budget_cfg.max_chains());
    let required = bfs_subset_count(n, k, budget_cfg.max_chains());
    if required > cap {
        return Err(Error::Capacity { required, cap });
    }

    let mut counters = OpCounters::default();
    let mut curve = Vec::new();
    let mut best: Option<(f64, Vec<usize>, f64, PowerAllocation)> = None;
    let mut last_err = None;
    for chains in k..=last {
        let mut best_here: Option<CurvePoint> = None;
        for subset in Combinations::new(n, chains) {
            counters.subsets_enumerated += 1;
            counters.count_build();
            counters.inversions += 1;
            let state = match build_gram(&channel.h, &subset) {
                Ok(s) => s,
                Err(e @ Error::Singular { .. }) => {
                    last_err = Some(e);
                    continue;
                }
                Err(e) => return Err(e),
            };
            let (allocation, rate) = allocate(
                channel,
                budget_cfg,
                state.eta_sq(),
                chains,
                AllocationRule::WaterFilling,
            )?;
            if best_here.is_none_or(|p| rate > p.rate) {
                best_here = Some(CurvePoint {
                    chains,
                    rate,
                    p_out: allocation.total(),
                });
            }
            let better = match &best {
                None => true,
                Some((r, s, _, _)) => rate > *r || (rate == *r && subset < *s),
            };
            if better {
                best = Some((rate, subset, state.eta_sq(), allocation));
            }
        }
        curve.extend(best_here);
    }
    let (rate, subset, eta_sq, allocation) = best.ok_or_else(|| {
        last_err.unwrap_or(Error::Singular {
            condition: f64::INFINITY,
        })
    })?;
    let result = SelectionResult {
        method: Method::Bfs,
        chains: subset.len(),
        subset,
        eta_sq,
        allocation,
        rate,
        trajectory: curve.iter().map(|p| (p.chains, p.rate)).collect(),
        counters,
        init_strategy: None,
    };
    Ok((result, curve))
}

fn check_fixed_chains(k: usize, n: usize, chains: usize, budget_cfg: &CircuitBudget) -> Result<()> {
    if chains < k {
        return Err(Error::InfeasibleSubset {
            size: chains,
            users: k,
        });
    }
    if chains > n {
        return Err(Error::Parameter(format!(
            "{chains} chains requested from {n} antennas"
        )));
    }
    if chains > budget_cfg.max_chains() {
        return Err(Error::Infeasible(format!(
            "{chains} chains exceed the circuit budget of {} chains",
            budget_cfg.max_chains()
        )));
    }
    Ok(())
}

/// Uniformly random subset of `chains` antennas with water-filling.
pub fn random_select<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    budget_cfg: &CircuitBudget,
    chains: usize,
    rng: &mut R,
) -> Result<SelectionResult> {
    let (k, n) = check_channel(channel)?;
    check_fixed_chains(k, n, chains, budget_cfg)?;
    let mut counters = OpCounters::default();
    let mut last_err = Error::Singular {
        condition: f64::INFINITY,
    };
    for _ in 0..RANDOM_MAX_ATTEMPTS {
        let mut subset = index::sample(rng, n, chains).into_vec();
        subset.sort_unstable();
        counters.count_build();
        counters.inversions += 1;
        counters.subsets_enumerated += 1;
        match build_gram(&channel.h, &subset) {
            Ok(state) => {
                let (allocation, rate) = allocate(
                    channel,
                    budget_cfg,
                    state.eta_sq(),
                    chains,
                    AllocationRule::WaterFilling,
                )?;
                return Ok(SelectionResult {
                    method: Method::Random,
                    chains,
                    subset,
                    eta_sq: state.eta_sq(),
                    allocation,
                    rate,
                    trajectory: vec![(chains, rate)],
                    counters,
                    init_strategy: None,
                });
            }
            Err(e @ Error::Singular { .. }) => last_err = e,
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}

/// Rates of the nested prefixes of one uniformly random antenna ordering,
/// for every chain count from `K` to `min(N, max_chains)`.
///
/// Each prefix is a uniform random subset of its size, so a single ordering
/// serves every chain count of a sweep.
pub fn random_curve<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    budget_cfg: &CircuitBudget,
    rule: AllocationRule,
    rng: &mut R,
) -> Result<Vec<CurvePoint>> {
    let (k, n) = check_channel(channel)?;
    budget_cfg.check_feasible(k)?;
    let last = n.min(budget_cfg.max_chains());
    let h = &channel.h;
    let mut order: Vec<usize> = (0..n).collect();
    let mut attempt = 0;
    let mut state = loop {
        order.shuffle(rng);
        match build_gram(h, &order[..k]) {
            Ok(s) => break s,
            Err(e @ Error::Singular { .. }) => {
                attempt += 1;
                if attempt >= RANDOM_MAX_ATTEMPTS {
                    return Err(e);
                }
            }
            Err(e) => return Err(e),
        }
    };
    let mut curve = Vec::with_capacity(last + 1 - k);
    for chains in k..=last {
        if chains > k {
            let n_add = order[chains - 1];
            state.add_antenna(n_add, &column(h, n_add))?;
        }
        let (allocation, rate) = allocate(channel, budget_cfg, state.eta_sq(), chains, rule)?;
        curve.push(CurvePoint {
            chains,
            rate,
            p_out: allocation.total(),
        });
    }
    Ok(curve)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplexityAlgo {
    Bfs,
    Greedy,
}

/// Operation-count estimate of the exhaustive or greedy search,
///
/// * bfs: `sum_{S=1}^{M} C(N-S+1, S) (S K^2 + K^3)`
/// * greedy: `sum_{S=1}^{M} (N-S+1) (S K^2 + K^3)`
///
/// with `M = max_chains`. Terms with `N - S + 1 < 0` contribute nothing.
pub fn complexity_estimate(
    antennas: usize,
    users: usize,
    max_chains: usize,
    algo: ComplexityAlgo,
) -> BigUint {
    let k = BigUint::from(users);
    let k2 = &k * &k;
    let k3 = &k2 * &k;
    let mut total = BigUint::from(0u32);
    for s in 1..=max_chains {
        if s > antennas + 1 {
            break;
        }
        let remaining = antennas + 1 - s;
        let sets = match algo {
            ComplexityAlgo::Bfs => binomial_big(remaining, s),
            ComplexityAlgo::Greedy => BigUint::from(remaining),
        };
        total += sets * (BigUint::from(s) * &k2 + &k3);
    }
    total
}

/// Exact binomial coefficient as a big integer.
pub fn binomial_big(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// Candidate evaluations the greedy path performs when it visits chain counts
/// `K+1..=last`: `sum (N - S + 1)`.
pub fn greedy_candidate_count(antennas: usize, users: usize, last: usize) -> u64 {
    (users + 1..=last).map(|s| (antennas + 1 - s) as u64).sum()
}
