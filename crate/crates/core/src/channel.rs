//! User drops, distance path loss and i.i.d. Rayleigh small-scale fading.
//!
//! Every random quantity is drawn from a [`TrialRng`], a ChaCha8 stream keyed
//! by `(master_seed, trial_index)`. Trials therefore do not depend on the
//! order in which they are executed.
//!
//! Gaussian variates come from `rand_distr::StandardNormal` (ziggurat), each
//! complex entry taking its real part first and its imaginary part second,
//! both scaled by `1/sqrt(2)`. The matrix is filled row by row (user-major).
//! This ordering is part of the reproducibility contract.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::FRAC_1_SQRT_2;
use std::io::Write;

use crate::error::{Error, Result};

/// Random stream for one Monte-Carlo trial.
pub type TrialRng = ChaCha8Rng;

/// Derives the substream for `trial_index` from `master_seed`.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserGeometry {
    /// Distance of each user to the base station, meters.
    pub distances: Vec<f64>,
    pub cell_radius: f64,
    pub min_distance: f64,
}

impl UserGeometry {
    pub fn users(&self) -> usize {
        self.distances.len()
    }
}

/// Path-loss gains `d_k^-alpha` and their mean `sigma^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LargeScale {
    pub gains: Vec<f64>,
    pub path_loss_exponent: f64,
    pub sigma_sq: f64,
}

impl LargeScale {
    /// Builds a large-scale profile from explicit gains; `sigma_sq` is their mean.
    pub fn from_gains(gains: Vec<f64>, path_loss_exponent: f64) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::Parameter(
                "at least one user gain is required".into(),
            ));
        }
        if let Some(g) = gains.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(Error::Domain(format!(
                "large-scale gain {g} is not positive"
            )));
        }
        let sigma_sq = gains.iter().sum::<f64>() / gains.len() as f64;
        Ok(Self {
            gains,
            path_loss_exponent,
            sigma_sq,
        })
    }

    /// Unit gains for `users` users, i.e. no path loss.
    pub fn unit(users: usize) -> Self {
        Self {
            gains: vec![1.0; users],
            path_loss_exponent: 0.0,
            sigma_sq: 1.0,
        }
    }

    pub fn users(&self) -> usize {
        self.gains.len()
    }
}

/// Small-scale fading matrix (`K` users by `N` antennas) plus the large-scale profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: DMatrix<Complex64>,
    pub large_scale: LargeScale,
    pub seed_tag: u64,
}

impl ChannelRealization {
    pub fn new(h: DMatrix<Complex64>, large_scale: LargeScale, seed_tag: u64) -> Result<Self> {
        if h.nrows() == 0 || h.nrows() > h.ncols() {
            return Err(Error::Parameter(format!(
                "channel must have 1 <= K <= N, got K={} N={}",
                h.nrows(),
                h.ncols()
            )));
        }
        if large_scale.users() != h.nrows() {
            return Err(Error::Parameter(format!(
                "{} large-scale gains for {} users",
                large_scale.users(),
                h.nrows()
            )));
        }
        Ok(Self {
            h,
            large_scale,
            seed_tag,
        })
    }

    pub fn users(&self) -> usize {
        self.h.nrows()
    }

    pub fn antennas(&self) -> usize {
        self.h.ncols()
    }

    /// Column of antenna `n` (the channel from antenna `n` to every user).
    pub fn column(&self, n: usize) -> Vec<Complex64> {
        self.h.column(n).iter().copied().collect()
    }

    pub fn with_large_scale(mut self, large_scale: LargeScale) -> Result<Self> {
        if large_scale.users() != self.users() {
            return Err(Error::Parameter(format!(
                "{} large-scale gains for {} users",
                large_scale.users(),
                self.users()
            )));
        }
        self.large_scale = large_scale;
        Ok(self)
    }
}

/// Draws `users` distances uniformly over the annulus `[min_distance, cell_radius]`.
///
/// The radius is sampled by inverting its CDF,
/// `F(r) = (r^2 - r0^2) / (R^2 - r0^2)`.
pub fn draw_user_positions<R: Rng + ?Sized>(
    users: usize,
    cell_radius: f64,
    min_distance: f64,
    rng: &mut R,
) -> Result<UserGeometry> {
    if users == 0 {
        return Err(Error::Parameter("at least one user is required".into()));
    }
    if !(cell_radius.is_finite() && cell_radius > 0.0) {
        return Err(Error::Parameter(format!(
            "cell radius {cell_radius} must be positive"
        )));
    }
    if !(min_distance >= 0.0 && min_distance <= cell_radius) {
        return Err(Error::Parameter(format!(
            "minimum distance {min_distance} must lie in [0, {cell_radius}]"
        )));
    }
    let inner = min_distance * min_distance;
    let span = cell_radius * cell_radius - inner;
    let distances = (0..users)
        .map(|_| {
            let u: f64 = rng.random();
            (inner + u * span).sqrt().clamp(min_distance, cell_radius)
        })
        .collect();
    Ok(UserGeometry {
        distances,
        cell_radius,
        min_distance,
    })
}

pub fn path_loss(geometry: &UserGeometry, alpha: f64) -> Result<LargeScale> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Parameter(format!(
            "path loss exponent {alpha} must be positive"
        )));
    }
    if let Some(d) = geometry.distances.iter().find(|d| d.is_nan() || **d <= 0.0) {
        return Err(Error::Domain(format!("user distance {d} must be positive")));
    }
    let gains = geometry.distances.iter().map(|d| d.powf(-alpha)).collect();
    LargeScale::from_gains(gains, alpha)
}

/// Draws a `users x antennas` matrix of unit-variance circularly-symmetric
/// complex Gaussians. The large-scale profile is left at unit gains.
pub fn draw_small_scale<R: Rng + ?Sized>(
    users: usize,
    antennas: usize,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if users == 0 || users > antennas {
        return Err(Error::Parameter(format!(
            "channel must have 1 <= K <= N, got K={users} N={antennas}"
        )));
    }
    let h = draw_gaussian_matrix(users, antennas, rng);
    ChannelRealization::new(h, LargeScale::unit(users), 0)
}

pub(crate) fn draw_gaussian_matrix<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> DMatrix<Complex64> {
    let mut values = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        values.push(Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2));
    }
    DMatrix::from_row_slice(rows, cols, &values)
}

/// Geometry and channel drop used by one Monte-Carlo trial.
#[derive(Debug, Clone)]
pub struct Drop {
    pub geometry: UserGeometry,
    pub channel: ChannelRealization,
}

/// Parameters of a single drop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropParams {
    pub users: usize,
    pub antennas: usize,
    pub alpha: f64,
    pub cell_radius: f64,
    pub min_distance: f64,
}

/// Draws geometry first, then the fading matrix, from the same stream.
pub fn draw_drop(params: &DropParams, rng: &mut TrialRng) -> Result<Drop> {
    let geometry = draw_user_positions(params.users, params.cell_radius, params.min_distance, rng)?;
    let large_scale = path_loss(&geometry, params.alpha)?;
    let seed_tag = rng.get_stream();
    let mut channel = draw_small_scale(params.users, params.antennas, rng)?;
    channel.seed_tag = seed_tag;
    let channel = channel.with_large_scale(large_scale)?;
    Ok(Drop { geometry, channel })
}

/// Writes `trial,user,distance,gain` rows for auditing drops.
pub fn write_geometry_csv<W: Write>(
    out: &mut W,
    rows: &[(u64, &UserGeometry, &LargeScale)],
) -> std::io::Result<()> {
    writeln!(out, "trial,user,distance,gain")?;
    for (trial, geometry, large_scale) in rows {
        for (k, (d, g)) in geometry
            .distances
            .iter()
            .zip(&large_scale.gains)
            .enumerate()
        {
            writeln!(out, "{trial},{k},{d:.9e},{g:.9e}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_stay_inside_annulus_and_repeat() {
        let a = draw_user_positions(3, 500.0, 35.0, &mut trial_rng(7, 0)).unwrap();
        let b = draw_user_positions(3, 500.0, 35.0, &mut trial_rng(7, 0)).unwrap();
        assert_eq!(a, b);
        assert!(a.distances.iter().all(|d| (35.0..=500.0).contains(d)));
    }

    #[test]
    fn degenerate_annulus() {
        let g = draw_user_positions(4, 500.0, 500.0, &mut trial_rng(1, 2)).unwrap();
        assert!(g.distances.iter().all(|&d| d == 500.0));
    }

    #[test]
    fn radius_second_moment_matches_uniform_disk() {
        // For a uniform disk of radius R, E[r^2] = R^2 / 2.
        let mut rng = trial_rng(11, 0);
        let g = draw_user_positions(100_000, 500.0, 0.0, &mut rng).unwrap();
        let mean_sq = g.distances.iter().map(|d| d * d).sum::<f64>() / 1e5;
        let expected = 500.0 * 500.0 / 2.0;
        assert!((mean_sq / expected - 1.0).abs() < 0.02, "{mean_sq}");
    }

    #[test]
    fn bad_radii_rejected() {
        let mut rng = trial_rng(0, 0);
        assert!(matches!(
            draw_user_positions(2, 100.0, 200.0, &mut rng),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            draw_user_positions(0, 100.0, 20.0, &mut rng),
            Err(Error::Parameter(_))
        ));
        assert!(draw_user_positions(2, -1.0, 0.0, &mut rng).is_err());
    }

    fn geometry(distances: &[f64]) -> UserGeometry {
        UserGeometry {
            distances: distances.to_vec(),
            cell_radius: 500.0,
            min_distance: 0.0,
        }
    }

    #[test]
    fn path_loss_examples() {
        let ls = path_loss(&geometry(&[1.0, 1.0]), 3.7).unwrap();
        assert_eq!(ls.gains, vec![1.0, 1.0]);
        assert_eq!(ls.sigma_sq, 1.0);

        let ls = path_loss(&geometry(&[2.0]), 2.0).unwrap();
        assert_eq!(ls.gains, vec![0.25]);
        assert_eq!(ls.sigma_sq, 0.25);

        let ls = path_loss(&geometry(&[1.0, 2.0, 4.0]), 1.0).unwrap();
        assert_eq!(ls.gains, vec![1.0, 0.5, 0.25]);
        assert!((ls.sigma_sq - 1.75 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_distance_is_domain_error() {
        assert!(matches!(
            path_loss(&geometry(&[0.0, 3.0]), 2.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn small_scale_is_deterministic_and_sized() {
        let a = draw_small_scale(2, 4, &mut trial_rng(5, 9)).unwrap();
        let b = draw_small_scale(2, 4, &mut trial_rng(5, 9)).unwrap();
        assert_eq!(a.h, b.h);
        let c = draw_small_scale(10, 256, &mut trial_rng(5, 9)).unwrap();
        assert_eq!((c.users(), c.antennas()), (10, 256));
        assert!(matches!(
            draw_small_scale(5, 4, &mut trial_rng(0, 0)),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn small_scale_moments() {
        let ch = draw_small_scale(1000, 1000, &mut trial_rng(3, 1)).unwrap();
        let n = ch.h.len() as f64;
        let power = ch.h.iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
        assert!((power - 1.0).abs() < 0.01, "{power}");

        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for z in ch.h.iter() {
            sxy += z.re * z.im;
            sxx += z.re * z.re;
            syy += z.im * z.im;
        }
        let corr = sxy / (sxx * syy).sqrt();
        assert!(corr.abs() < 0.01, "{corr}");
        assert!((sxx / n - 0.5).abs() < 0.01);
    }

    #[test]
    fn drop_repeats_for_same_trial_and_differs_across_trials() {
        let params = DropParams {
            users: 3,
            antennas: 8,
            alpha: 3.7,
            cell_radius: 500.0,
            min_distance: 35.0,
        };
        let a = draw_drop(&params, &mut trial_rng(42, 3)).unwrap();
        let b = draw_drop(&params, &mut trial_rng(42, 3)).unwrap();
        let c = draw_drop(&params, &mut trial_rng(42, 4)).unwrap();
        assert_eq!(a.channel, b.channel);
        assert_eq!(a.geometry, b.geometry);
        assert_ne!(a.channel.h, c.channel.h);
        assert_eq!(a.channel.seed_tag, 3);
        assert!(a.channel.large_scale.gains.iter().all(|g| *g > 0.0));
    }

    #[test]
    fn geometry_csv_rows() {
        let g = geometry(&[1.0, 2.0]);
        let ls = path_loss(&g, 2.0).unwrap();
        let mut out = Vec::new();
        write_geometry_csv(&mut out, &[(4, &g, &ls)]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("trial,user,distance,gain\n4,0,"));
    }
}
