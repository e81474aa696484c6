//! Zero-forcing Gram state and the normalization factor `eta^2 = Tr{(H_S H_S^H)^-1}`.
//!
//! [`GramState`] keeps `A = H_S H_S^H` and its inverse for the active antenna
//! set. Adding an antenna is a Sherman-Morrison rank-1 update; scoring a
//! candidate only needs the trace decrement, which costs `O(K^2)`.

use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex64;

use crate::channel::LargeScale;
use crate::error::{Error, Result};

/// Condition estimates above this reject the Gram matrix as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Rank-1 updates applied before the inverse is refreshed from a dense factorization.
pub const REFRESH_INTERVAL: usize = 64;

#[derive(Debug, Clone)]
pub struct GramState {
    selected: Vec<usize>,
    gram: DMatrix<Complex64>,
    gram_inv: DMatrix<Complex64>,
    eta_sq: f64,
    since_refresh: usize,
    rank1_updates: u64,
    dense_inversions: u64,
}

impl GramState {
    /// Antenna indices in insertion order.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn gram(&self) -> &DMatrix<Complex64> {
        &self.gram
    }

    pub fn gram_inv(&self) -> &DMatrix<Complex64> {
        &self.gram_inv
    }

    pub fn eta_sq(&self) -> f64 {
        self.eta_sq
    }

    pub fn users(&self) -> usize {
        self.gram.nrows()
    }

    pub fn chains(&self) -> usize {
        self.selected.len()
    }

    pub fn contains(&self, n: usize) -> bool {
        self.selected.contains(&n)
    }

    /// Rank-1 updates applied since construction.
    pub fn rank1_updates(&self) -> u64 {
        self.rank1_updates
    }

    /// Dense inversions performed since construction, including refreshes.
    pub fn dense_inversions(&self) -> u64 {
        self.dense_inversions
    }

    /// Decrease of `eta^2` if column `g` were added, `|A^-1 g|^2 / (1 + g^H A^-1 g)`.
    pub fn delta_eta_add(&self, g: &[Complex64]) -> f64 {
        let v = mul_vec(&self.gram_inv, g);
        let quad = dot_conj(g, &v).re;
        let norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        (norm_sq / (1.0 + quad)).max(0.0)
    }

    /// Adds antenna `n` with channel column `g` through a rank-1 update.
    pub fn add_antenna(&mut self, n: usize, g: &[Complex64]) -> Result<()> {
        if self.contains(n) {
            return Err(Error::Parameter(format!("antenna {n} is already selected")));
        }
        if g.len() != self.users() {
            return Err(Error::Parameter(format!(
                "column has {} entries for {} users",
                g.len(),
                self.users()
            )));
        }
        let k = self.users();
        let v = mul_vec(&self.gram_inv, g);
        let denom = 1.0 + dot_conj(g, &v).re;
        for i in 0..k {
            for j in 0..k {
                self.gram[(i, j)] += g[i] * g[j].conj();
                self.gram_inv[(i, j)] -= v[i] * v[j].conj() / denom;
            }
        }
        self.selected.push(n);
        self.rank1_updates += 1;
        self.since_refresh += 1;
        if self.since_refresh >= REFRESH_INTERVAL {
            self.refresh()?;
        } else {
            self.eta_sq = trace_re(&self.gram_inv);
        }
        Ok(())
    }

    /// Consuming variant of [`GramState::add_antenna`].
    pub fn with_antenna(mut self, n: usize, g: &[Complex64]) -> Result<Self> {
        self.add_antenna(n, g)?;
        Ok(self)
    }

    /// Recomputes the inverse and `eta^2` from the maintained Gram matrix.
    pub fn refresh(&mut self) -> Result<()> {
        self.gram_inv = invert_hermitian(&self.gram)?;
        self.eta_sq = trace_re(&self.gram_inv);
        self.since_refresh = 0;
        self.dense_inversions += 1;
        Ok(())
    }
}

/// Dense construction of the Gram state for the columns `subset` of `h`.
pub fn build_gram(h: &DMatrix<Complex64>, subset: &[usize]) -> Result<GramState> {
    let k = h.nrows();
    if subset.len() < k {
        return Err(Error::InfeasibleSubset {
            size: subset.len(),
            users: k,
        });
    }
    for (i, &n) in subset.iter().enumerate() {
        if n >= h.ncols() {
            return Err(Error::Parameter(format!(
                "antenna index {n} out of range 0..{}",
                h.ncols()
            )));
        }
        if subset[..i].contains(&n) {
            return Err(Error::Parameter(format!("antenna {n} listed twice")));
        }
    }
    let mut gram = DMatrix::<Complex64>::zeros(k, k);
    for &n in subset {
        let col = h.column(n);
        for i in 0..k {
            for j in 0..k {
                gram[(i, j)] += col[i] * col[j].conj();
            }
        }
    }
    let gram_inv = invert_hermitian(&gram)?;
    let eta_sq = trace_re(&gram_inv);
    Ok(GramState {
        selected: subset.to_vec(),
        gram,
        gram_inv,
        eta_sq,
        since_refresh: 0,
        rank1_updates: 0,
        dense_inversions: 1,
    })
}

/// Normalized zero-forcing precoder `W = H^H (H H^H)^-1 / eta` for a `K x S` channel.
pub fn zf_weights(h_s: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let k = h_s.nrows();
    if h_s.ncols() < k {
        return Err(Error::InfeasibleSubset {
            size: h_s.ncols(),
            users: k,
        });
    }
    let gram = h_s * h_s.adjoint();
    let inv = invert_hermitian(&gram)?;
    let eta = trace_re(&inv).sqrt();
    Ok(h_s.adjoint() * inv / Complex64::new(eta, 0.0))
}

/// Sum-rate in bits/s/Hz, `sum_k log2(1 + g_k p_k / (sigma^2 eta^2))`.
pub fn sum_rate(large_scale: &LargeScale, eta_sq: f64, powers: &[f64]) -> f64 {
    let scale = large_scale.sigma_sq * eta_sq;
    large_scale
        .gains
        .iter()
        .zip(powers)
        .map(|(g, p)| (g * p / scale).ln_1p() / std::f64::consts::LN_2)
        .sum()
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky, with a
/// 1-norm condition check.
pub(crate) fn invert_hermitian(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let chol: Cholesky<Complex64, Dyn> = Cholesky::new(a.clone()).ok_or(Error::Singular {
        condition: f64::INFINITY,
    })?;
    let inv = chol.inverse();
    let condition = norm1(a) * norm1(&inv);
    if !(condition.is_finite() && condition <= MAX_CONDITION) {
        return Err(Error::Singular { condition });
    }
    Ok(inv)
}

fn norm1(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn trace_re(a: &DMatrix<Complex64>) -> f64 {
    (0..a.nrows()).map(|i| a[(i, i)].re).sum()
}

fn mul_vec(a: &DMatrix<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}

/// `x^H y`
fn dot_conj(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_small_scale, trial_rng};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_h(k: usize, n: usize, seed: u64) -> DMatrix<Complex64> {
        draw_small_scale(k, n, &mut trial_rng(seed, 0)).unwrap().h
    }

    #[test]
    fn identity_channel() {
        let h = DMatrix::<Complex64>::identity(2, 2);
        let st = build_gram(&h, &[0, 1]).unwrap();
        assert_eq!(st.gram(), &DMatrix::identity(2, 2));
        assert!((st.eta_sq() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn scalar_inverse() {
        let h = DMatrix::from_row_slice(1, 1, &[c(2.0)]);
        let st = build_gram(&h, &[0]).unwrap();
        assert!((st.eta_sq() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn eta_matches_direct_inverse() {
        let h = random_h(2, 3, 1);
        let st = build_gram(&h, &[0, 1, 2]).unwrap();
        // Independent route: LU inverse of the Gram matrix computed by nalgebra.
        let a = &h * h.adjoint();
        let inv = a.clone().try_inverse().unwrap();
        let tr = inv[(0, 0)].re + inv[(1, 1)].re;
        assert!((st.eta_sq() - tr).abs() / tr < 1e-12);
        assert!((st.gram() - a).norm() < 1e-12);
    }

    #[test]
    fn subset_errors() {
        let h = random_h(3, 5, 2);
        assert!(matches!(
            build_gram(&h, &[0, 1]),
            Err(Error::InfeasibleSubset { size: 2, users: 3 })
        ));
        assert!(matches!(
            build_gram(&h, &[0, 1, 1]),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            build_gram(&h, &[0, 1, 9]),
            Err(Error::Parameter(_))
        ));

        let mut z = h.clone();
        z.column_mut(1).fill(Complex64::new(0.0, 0.0));
        z.column_mut(2).fill(Complex64::new(0.0, 0.0));
        assert!(matches!(
            build_gram(&z, &[0, 1, 2]),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn scalar_rank1_update() {
        let h = DMatrix::from_row_slice(1, 2, &[c(1.0), c(1.0)]);
        let st = build_gram(&h, &[0]).unwrap();
        assert!((st.delta_eta_add(&[c(1.0)]) - 0.5).abs() < 1e-15);
        assert_eq!(st.delta_eta_add(&[c(0.0)]), 0.0);
        let st = st.with_antenna(1, &[c(1.0)]).unwrap();
        assert!((st.eta_sq() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn delta_matches_dense_recomputation() {
        let h = random_h(3, 6, 3);
        let st = build_gram(&h, &[0, 1, 2, 3]).unwrap();
        let g: Vec<_> = h.column(4).iter().copied().collect();
        let dense = build_gram(&h, &[0, 1, 2, 3, 4]).unwrap();
        let delta = st.delta_eta_add(&g);
        assert!((st.eta_sq() - delta - dense.eta_sq()).abs() < 1e-9 * dense.eta_sq());
        assert!(delta >= 0.0);
    }

    #[test]
    fn add_antenna_matches_dense_and_rejects_duplicates() {
        let h = random_h(3, 12, 4);
        let mut st = build_gram(&h, &[0, 1, 2]).unwrap();
        for n in 3..12 {
            let g: Vec<_> = h.column(n).iter().copied().collect();
            st.add_antenna(n, &g).unwrap();
            let dense = build_gram(&h, &(0..=n).collect::<Vec<_>>()).unwrap();
            assert!((st.eta_sq() - dense.eta_sq()).abs() < 1e-9 * dense.eta_sq());
            let residual = st.gram() * st.gram_inv() - DMatrix::<Complex64>::identity(3, 3);
            assert!(residual.iter().all(|z| z.norm() < 1e-8));
        }
        let g: Vec<_> = h.column(5).iter().copied().collect();
        assert!(matches!(st.add_antenna(5, &g), Err(Error::Parameter(_))));
        assert_eq!(st.rank1_updates(), 9);
    }

    #[test]
    fn long_sequences_refresh() {
        let h = random_h(4, 4 + 2 * REFRESH_INTERVAL, 5);
        let mut st = build_gram(&h, &[0, 1, 2, 3]).unwrap();
        for n in 4..h.ncols() {
            let g: Vec<_> = h.column(n).iter().copied().collect();
            st.add_antenna(n, &g).unwrap();
        }
        assert_eq!(st.dense_inversions(), 3);
        let dense = build_gram(&h, &(0..h.ncols()).collect::<Vec<_>>()).unwrap();
        assert!((st.eta_sq() - dense.eta_sq()).abs() < 1e-9 * dense.eta_sq());
    }

    #[test]
    fn zf_identity() {
        let h = DMatrix::<Complex64>::identity(2, 2);
        let w = zf_weights(&h).unwrap();
        let expected = DMatrix::<Complex64>::identity(2, 2) / c(2f64.sqrt());
        assert!((w.clone() - expected).norm() < 1e-15);
        assert!((w.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zf_properties() {
        let h = random_h(2, 4, 6);
        let w = zf_weights(&h).unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-9);
        let hw = &h * &w;
        let eta = build_gram(&h, &[0, 1, 2, 3]).unwrap().eta_sq().sqrt();
        for i in 0..2 {
            for j in 0..2 {
                if i == j {
                    assert!((hw[(i, j)] - c(1.0 / eta)).norm() < 1e-9);
                } else {
                    assert!(hw[(i, j)].norm() < 1e-8);
                }
            }
        }
        let wide = random_h(2, 3, 0);
        assert!(matches!(
            zf_weights(&wide.transpose()),
            Err(Error::InfeasibleSubset { .. })
        ));
    }

    #[test]
    fn sum_rate_examples() {
        let unit = LargeScale::unit(1);
        assert_eq!(sum_rate(&LargeScale::unit(3), 1.0, &[0.0; 3]), 0.0);
        assert!((sum_rate(&unit, 1.0, &[1.0]) - 1.0).abs() < 1e-15);
        assert!((sum_rate(&LargeScale::unit(2), 0.5, &[0.5, 0.5]) - 2.0).abs() < 1e-15);
    }
}
