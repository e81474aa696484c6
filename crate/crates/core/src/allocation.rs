//! Power allocation among users and the average-rate analysis of the RF-chain count.
//!
//! All powers are normalized by the noise power. The circuit budget charges
//! `p_c` per active RF chain, so `S` chains leave `p_max - S * p_c` for
//! transmission.

use crate::channel::LargeScale;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Relative slack used when comparing closed-form rates and snapping `p_max / p_c`.
const TIE_TOLERANCE: f64 = 1e-12;

/// Absolute tolerance on the budget residual for [`waterfill_bisection`].
pub const BISECTION_TOLERANCE: f64 = 1e-12;
pub const BISECTION_MAX_ITER: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub powers: Vec<f64>,
    /// Common water level `1/(ln2 * mu)`; `None` for allocations that are not water-filled.
    pub water_level: Option<f64>,
    /// Transmit budget the allocation was computed for.
    pub budget: f64,
}

impl PowerAllocation {
    pub fn total(&self) -> f64 {
        self.powers.iter().sum()
    }
}

/// Maximum transmit power and per-chain circuit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitBudget {
    p_max: f64,
    p_c: f64,
    max_chains: usize,
}

impl CircuitBudget {
    pub fn new(p_max: f64, p_c: f64) -> Result<Self> {
        if !(p_max.is_finite() && p_max > 0.0) {
            return Err(Error::Parameter(format!("p_max {p_max} must be positive")));
        }
        if !(p_c.is_finite() && p_c > 0.0) {
            return Err(Error::Parameter(format!("p_c {p_c} must be positive")));
        }
        // 0.3 / 0.05 evaluates to 5.999..., which must still count as 6 chains.
        let ratio = p_max / p_c;
        let max_chains = (ratio * (1.0 + TIE_TOLERANCE)).floor();
        if max_chains > u32::MAX as f64 {
            return Err(Error::Parameter(format!(
                "p_max / p_c = {ratio} is too large"
            )));
        }
        Ok(Self {
            p_max,
            p_c,
            max_chains: max_chains as usize,
        })
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn p_c(&self) -> f64 {
        self.p_c
    }

    /// `floor(p_max / p_c)`, the chain count that leaves no transmit power.
    pub fn max_chains(&self) -> usize {
        self.max_chains
    }

    /// Transmit budget `p_max - S * p_c`, clamped at zero.
    pub fn transmit_budget(&self, chains: usize) -> f64 {
        let left = self.p_max - chains as f64 * self.p_c;
        if left <= TIE_TOLERANCE * self.p_max {
            0.0
        } else {
            left
        }
    }

    /// Requires that `users` chains still leave positive transmit power.
    pub fn check_feasible(&self, users: usize) -> Result<()> {
        if self.p_max <= users as f64 * self.p_c * (1.0 + TIE_TOLERANCE) {
            return Err(Error::Infeasible(format!(
                "p_max = {} does not exceed K * p_c = {} * {}",
                self.p_max, users, self.p_c
            )));
        }
        Ok(())
    }

    fn check_chains(&self, chains: usize, users: usize) -> Result<()> {
        if chains < users {
            return Err(Error::InfeasibleSubset {
                size: chains,
                users,
            });
        }
        if chains > self.max_chains {
            return Err(Error::Infeasible(format!(
                "{chains} chains exceed the circuit budget of {} chains",
                self.max_chains
            )));
        }
        Ok(())
    }
}

/// Effective per-user gains `g_k / (sigma^2 eta^2)` seen by the water-filler.
pub fn effective_gains(large_scale: &LargeScale, eta_sq: f64) -> Vec<f64> {
    let scale = large_scale.sigma_sq * eta_sq;
    large_scale.gains.iter().map(|g| g / scale).collect()
}

fn check_waterfill_input(gains_eff: &[f64], budget: f64) -> Result<()> {
    if gains_eff.is_empty() {
        return Err(Error::Parameter(
            "water-filling needs at least one user".into(),
        ));
    }
    if let Some(g) = gains_eff.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(Error::Domain(format!(
            "effective gain {g} must be positive"
        )));
    }
    if !(budget.is_finite() && budget >= 0.0) {
        return Err(Error::Parameter(format!(
            "budget {budget} must be non-negative"
        )));
    }
    Ok(())
}

/// Exact water-filling by sorting inverse gains and growing the active set.
///
/// `p_k = (L - 1/g_k)^+` with `sum p_k = budget`.
pub fn waterfill(gains_eff: &[f64], budget: f64) -> Result<PowerAllocation> {
    check_waterfill_input(gains_eff, budget)?;
    let mut inv: Vec<f64> = gains_eff.iter().map(|g| 1.0 / g).collect();
    inv.sort_by(f64::total_cmp);
    let floor = inv[0];
    if budget == 0.0 {
        return Ok(PowerAllocation {
            powers: vec![0.0; gains_eff.len()],
            water_level: Some(floor),
            budget,
        });
    }

    let mut level = floor + budget;
    let mut prefix = 0.0;
    for (m, &noise) in inv.iter().enumerate() {
        if m > 0 && noise >= level {
            break;
        }
        prefix += noise;
        level = (budget + prefix) / (m + 1) as f64;
    }
    let powers = gains_eff
        .iter()
        .map(|g| (level - 1.0 / g).max(0.0))
        .collect();
    Ok(PowerAllocation {
        powers,
        water_level: Some(level),
        budget,
    })
}

/// Water-filling by bisection on the water level.
///
/// Stops once the budget residual is within [`BISECTION_TOLERANCE`], the
/// bracket stops shrinking, or [`BISECTION_MAX_ITER`] iterations have run.
pub fn waterfill_bisection(gains_eff: &[f64], budget: f64) -> Result<PowerAllocation> {
    check_waterfill_input(gains_eff, budget)?;
    let inv: Vec<f64> = gains_eff.iter().map(|g| 1.0 / g).collect();
    let poured = |level: f64| inv.iter().map(|n| (level - n).max(0.0)).sum::<f64>();

    let mut lo = inv.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = lo + budget;
    let mut level = if budget == 0.0 { lo } else { 0.5 * (lo + hi) };
    for _ in 0..BISECTION_MAX_ITER {
        if budget == 0.0 {
            break;
        }
        let residual = poured(level) - budget;
        if residual.abs() <= BISECTION_TOLERANCE {
            break;
        }
        if residual > 0.0 {
            hi = level;
        } else {
            lo = level;
        }
        let next = 0.5 * (lo + hi);
        if next == level {
            break;
        }
        level = next;
    }
    let powers = inv.iter().map(|n| (level - n).max(0.0)).collect();
    Ok(PowerAllocation {
        powers,
        water_level: Some(level),
        budget,
    })
}

/// Which form of the equal-received-power allocation to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EqualPowerVariant {
    /// `p_k = (budget / K) * sigma^2 / g_k`; may spend more than the budget.
    #[default]
    Paper,
    /// Same profile scaled so that the powers sum to the budget.
    Feasible,
}

impl std::str::FromStr for EqualPowerVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Self::Paper),
            "feasible" => Ok(Self::Feasible),
            other => Err(Error::Config(format!(
                "unknown equal-power variant '{other}'"
            ))),
        }
    }
}

impl std::fmt::Display for EqualPowerVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Paper => "paper",
            Self::Feasible => "feasible",
        })
    }
}

/// Allocation that gives every user the same received SINR.
pub fn equal_received_power(
    chains: usize,
    budget_cfg: &CircuitBudget,
    users: usize,
    large_scale: &LargeScale,
    variant: EqualPowerVariant,
) -> Result<PowerAllocation> {
    if large_scale.users() != users {
        return Err(Error::Parameter(format!(
            "{} large-scale gains for {users} users",
            large_scale.users()
        )));
    }
    budget_cfg.check_chains(chains, users)?;
    let budget = budget_cfg.transmit_budget(chains);
    let per_user = budget / users as f64;
    let mut powers: Vec<f64> = large_scale
        .gains
        .iter()
        .map(|g| per_user * large_scale.sigma_sq / g)
        .collect();
    if variant == EqualPowerVariant::Feasible {
        let total: f64 = powers.iter().sum();
        if total > 0.0 {
            let scale = budget / total;
            powers.iter_mut().for_each(|p| *p *= scale);
        }
    }
    Ok(PowerAllocation {
        powers,
        water_level: None,
        budget,
    })
}

/// Average sum-rate under equal received power, `K log2(1 + (p_max - S p_c)(S - K) / K^2)`.
pub fn average_sum_rate_closed_form(
    chains: usize,
    users: usize,
    budget_cfg: &CircuitBudget,
) -> Result<f64> {
    if users == 0 {
        return Err(Error::Parameter("at least one user is required".into()));
    }
    budget_cfg.check_chains(chains, users)?;
    let k = users as f64;
    let snr = budget_cfg.transmit_budget(chains) * (chains - users) as f64 / (k * k);
    Ok(k * snr.ln_1p() / std::f64::consts::LN_2)
}

/// Stationary point `phi = (p_max + K p_c) / (2 p_c)` of the closed-form rate.
pub fn phi(users: usize, budget_cfg: &CircuitBudget) -> f64 {
    let raw = (budget_cfg.p_max() + users as f64 * budget_cfg.p_c()) / (2.0 * budget_cfg.p_c());
    let nearest = raw.round();
    if (raw - nearest).abs() <= 1e-9 * raw.max(1.0) {
        nearest
    } else {
        raw
    }
}

/// True when `a` exceeds `b` by more than rounding noise.
pub(crate) fn strictly_greater(a: f64, b: f64) -> bool {
    a - b > TIE_TOLERANCE * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Chain count maximizing the closed-form average sum-rate.
///
/// The floor of `phi` wins only when its rate is strictly larger or it is
/// already the budget limit; otherwise the ceiling is taken. The result is
/// clamped to `[K, max_chains]`.
pub fn optimal_rf_count_analytic(users: usize, budget_cfg: &CircuitBudget) -> Result<usize> {
    if users == 0 {
        return Err(Error::Parameter("at least one user is required".into()));
    }
    budget_cfg.check_feasible(users)?;
    let max_chains = budget_cfg.max_chains();
    let phi = phi(users, budget_cfg);
    let lower = (phi.floor() as usize).clamp(users, max_chains);
    let upper = (phi.ceil() as usize).clamp(users, max_chains);
    if lower == upper || lower == max_chains {
        return Ok(lower);
    }
    let r_lower = average_sum_rate_closed_form(lower, users, budget_cfg)?;
    let r_upper = average_sum_rate_closed_form(upper, users, budget_cfg)?;
    Ok(if strictly_greater(r_lower, r_upper) {
        lower
    } else {
        upper
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget(p_max: f64, p_c: f64) -> CircuitBudget {
        CircuitBudget::new(p_max, p_c).unwrap()
    }

    #[test]
    fn max_chains_brackets_ratio() {
        for (p_max, p_c, expected) in [
            (1.0, 0.05, 20),
            (0.3, 0.05, 6),
            (4.0, 0.05, 80),
            (1.0, 0.3, 3),
        ] {
            let b = budget(p_max, p_c);
            assert_eq!(b.max_chains(), expected, "{p_max}/{p_c}");
            assert!((b.max_chains() + 1) as f64 * p_c > p_max);
        }
        assert!(CircuitBudget::new(0.0, 0.1).is_err());
        assert!(CircuitBudget::new(1.0, -0.1).is_err());
        assert_eq!(budget(0.3, 0.05).transmit_budget(6), 0.0);
    }

    #[test]
    fn waterfill_examples() {
        let wf = waterfill(&[2.0, 2.0, 2.0], 0.9).unwrap();
        for p in &wf.powers {
            assert!((p - 0.3).abs() < 1e-15);
        }
        let wf = waterfill(&[0.37], 1.7).unwrap();
        assert!((wf.powers[0] - 1.7).abs() < 1e-15);

        // Inverse gains [1, 9]: pouring 2 reaches level 3 < 9, so user 2 stays dry.
        let wf = waterfill(&[1.0, 1.0 / 9.0], 2.0).unwrap();
        assert!((wf.powers[0] - 2.0).abs() < 1e-15);
        assert_eq!(wf.powers[1], 0.0);
        assert!((wf.water_level.unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn waterfill_zero_budget_and_errors() {
        let wf = waterfill(&[1.0, 2.0], 0.0).unwrap();
        assert_eq!(wf.powers, vec![0.0, 0.0]);
        assert!(matches!(waterfill(&[1.0, 0.0], 1.0), Err(Error::Domain(_))));
        assert!(matches!(
            waterfill(&[1.0, -2.0], 1.0),
            Err(Error::Domain(_))
        ));
        assert!(waterfill(&[], 1.0).is_err());
        assert_eq!(
            waterfill_bisection(&[1.0, 2.0], 0.0).unwrap().powers,
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn bisection_agrees_on_examples() {
        for (gains, b) in [(vec![1.0, 1.0 / 9.0], 2.0), (vec![3.0, 0.5, 1.2, 8.0], 0.7)] {
            let exact = waterfill(&gains, b).unwrap();
            let bis = waterfill_bisection(&gains, b).unwrap();
            for (x, y) in exact.powers.iter().zip(&bis.powers) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn equal_received_power_examples() {
        let ls = LargeScale::from_gains(vec![0.3, 0.3], 1.0).unwrap();
        let a =
            equal_received_power(4, &budget(1.0, 0.05), 2, &ls, EqualPowerVariant::Paper).unwrap();
        assert!(a.powers.iter().all(|p| (p - 0.4).abs() < 1e-12));

        // Budget 0.8: p_max = 1, p_c = 0.05, S = 4.
        let ls = LargeScale::from_gains(vec![0.5, 1.5], 1.0).unwrap();
        assert_eq!(ls.sigma_sq, 1.0);
        let b = budget(1.0, 0.05);
        let paper = equal_received_power(4, &b, 2, &ls, EqualPowerVariant::Paper).unwrap();
        assert!((paper.powers[0] - 0.8).abs() < 1e-12);
        assert!((paper.powers[1] - 0.8 / 3.0).abs() < 1e-12);
        assert!(paper.total() > paper.budget);
        let feasible = equal_received_power(4, &b, 2, &ls, EqualPowerVariant::Feasible).unwrap();
        assert!((feasible.powers[0] - 0.6).abs() < 1e-12);
        assert!((feasible.powers[1] - 0.2).abs() < 1e-12);
        assert!((feasible.total() - 0.8).abs() < 1e-12);

        assert!(matches!(
            equal_received_power(21, &b, 2, &ls, EqualPowerVariant::Paper),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn closed_form_examples() {
        let b = budget(1.0, 0.05);
        assert_eq!(average_sum_rate_closed_form(3, 3, &b).unwrap(), 0.0);
        assert_eq!(average_sum_rate_closed_form(20, 3, &b).unwrap(), 0.0);
        let r = average_sum_rate_closed_form(45, 10, &budget(4.0, 0.05)).unwrap();
        assert!((r - 10.0 * 1.6125f64.log2()).abs() < 1e-9);
        assert!((r - 6.893).abs() < 1e-3);
    }

    #[test]
    fn analytic_optimum_examples() {
        let b = budget(1.0, 0.05);
        assert!((phi(3, &b) - 11.5).abs() < 1e-12);
        let r11 = average_sum_rate_closed_form(11, 3, &b).unwrap();
        let r12 = average_sum_rate_closed_form(12, 3, &b).unwrap();
        assert!((r11 - 3.0 * 1.4f64.log2()).abs() < 1e-12);
        assert!((r12 - 3.0 * 1.4f64.log2()).abs() < 1e-12);
        assert_eq!(optimal_rf_count_analytic(3, &b).unwrap(), 12);

        let b = budget(4.0, 0.05);
        assert_eq!(phi(10, &b), 45.0);
        assert_eq!(optimal_rf_count_analytic(10, &b).unwrap(), 45);

        let b = budget(0.3, 0.05);
        assert_eq!(phi(2, &b), 4.0);
        assert_eq!(b.max_chains(), 6);
        assert_eq!(optimal_rf_count_analytic(2, &b).unwrap(), 4);

        assert!(matches!(
            optimal_rf_count_analytic(10, &budget(0.1, 0.05)),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            optimal_rf_count_analytic(2, &budget(0.1, 0.05)),
            Err(Error::Infeasible(_))
        ));
    }
}
