//! Two-photon quantum interference between two independent emitters:
//! cross- and co-polarized coincidence correlations, the long-delay
//! normalization constant R, visibility, and ensemble averaging over a
//! stochastic mutual detuning.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::curve::{CorrelationCurve, CurveKind, TauGrid};
use crate::emitter::EmitterParams;
use crate::error::{Error, Result};
use crate::tls;

/// Mutual detuning between the two emitters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Detuning {
    /// Fixed detuning in radians per second (0 for fully resonant emitters).
    Fixed(f64),
    /// Zero-mean Gaussian distribution of width sigma (radians per second),
    /// modeling uncorrelated slow spectral diffusion of the pair.
    GaussianEnsemble(f64),
}

/// Configuration of the two-emitter interference measurement.
#[derive(Clone, Copy, Debug)]
pub struct HomConfig {
    pub emitter_a: EmitterParams,
    pub emitter_b: EmitterParams,
    weight_a: f64,
    weight_b: f64,
    g2zero_a: f64,
    g2zero_b: f64,
    /// Interference-term normalization; solved from the long-delay condition
    /// when absent.
    pub r_constant: Option<f64>,
    pub detuning: Detuning,
}

impl HomConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        emitter_a: EmitterParams,
        emitter_b: EmitterParams,
        weight_a: f64,
        weight_b: f64,
        g2zero_a: f64,
        g2zero_b: f64,
        r_constant: Option<f64>,
        detuning: Detuning,
    ) -> Result<Self> {
        if weight_a < 0.0 || weight_b < 0.0 || (weight_a + weight_b - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParam(format!(
                "intensity weights must be non-negative and sum to 1, got {weight_a} + {weight_b}"
            )));
        }
        for (name, v) in [("g2zero_a", g2zero_a), ("g2zero_b", g2zero_b)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::InvalidParam(format!(
                    "{name} must be in [0, 1), got {v}"
                )));
            }
        }
        if let Some(r) = r_constant {
            if !(r > 0.0) {
                return Err(Error::InvalidParam(format!("R must be > 0, got {r}")));
            }
        }
        if let Detuning::GaussianEnsemble(s) = detuning {
            if !(s >= 0.0) {
                return Err(Error::InvalidParam(format!(
                    "ensemble sigma must be >= 0, got {s}"
                )));
            }
        }
        Ok(HomConfig {
            emitter_a,
            emitter_b,
            weight_a,
            weight_b,
            g2zero_a,
            g2zero_b,
            r_constant,
            detuning,
        })
    }

    pub fn weight_a(&self) -> f64 {
        self.weight_a
    }

    pub fn weight_b(&self) -> f64 {
        self.weight_b
    }

    pub fn g2zero_a(&self) -> f64 {
        self.g2zero_a
    }

    pub fn g2zero_b(&self) -> f64 {
        self.g2zero_b
    }

    /// Single-photon purity factors `zeta_n = sqrt(1 - g2_n(0))`.
    pub fn zeta(&self) -> (f64, f64) {
        (
            (1.0 - self.g2zero_a).sqrt(),
            (1.0 - self.g2zero_b).sqrt(),
        )
    }

    /// The R used by the parallel correlation: explicit if supplied,
    /// otherwise solved from the long-delay condition.
    pub fn effective_r(&self) -> Result<f64> {
        match self.r_constant {
            Some(r) => Ok(r),
            None => solve_r(self),
        }
    }

    /// Swap the roles of emitters A and B (weights and purities included).
    pub fn swapped(&self) -> HomConfig {
        HomConfig {
            emitter_a: self.emitter_b,
            emitter_b: self.emitter_a,
            weight_a: self.weight_b,
            weight_b: self.weight_a,
            g2zero_a: self.g2zero_b,
            g2zero_b: self.g2zero_a,
            r_constant: self.r_constant,
            detuning: self.detuning,
        }
    }
}

/// Single-emitter g2 with a measured zero-delay floor mixed in:
/// `(1 - g2zero) g2_ideal + g2zero`. Produces a curve whose tau = 0 value is
/// exactly `g2zero`, matching how measured antibunching depths enter the
/// two-emitter correlations.
pub fn floored_g2_curve(
    params: &EmitterParams,
    grid: TauGrid,
    g2zero: f64,
) -> Result<CorrelationCurve> {
    if !(0.0..1.0).contains(&g2zero) {
        return Err(Error::InvalidParam(format!(
            "g2zero must be in [0, 1), got {g2zero}"
        )));
    }
    let s = 1.0 - g2zero;
    let values = grid
        .taus()
        .map(|t| s * tls::g2_tls(params, t) + g2zero)
        .collect();
    CorrelationCurve::new(grid, CurveKind::G2, values)
}

/// Combine two single-emitter diffusion widths into the mutual-detuning
/// width: `sigma = sqrt(sigma_a^2 + sigma_b^2)`.
pub fn combined_detuning_sigma(sigma_a: f64, sigma_b: f64) -> f64 {
    (sigma_a * sigma_a + sigma_b * sigma_b).sqrt()
}

fn check_grids(curves: &[&CorrelationCurve]) -> Result<()> {
    let g0 = curves[0].grid();
    for c in &curves[1..] {
        if !c.grid().same_as(&g0) {
            return Err(Error::GridMismatch(
                "input curves must share one grid".into(),
            ));
        }
    }
    Ok(())
}

/// Cross-polarized (fully distinguishable) coincidence correlation:
/// `c_A^2 g2_A + c_B^2 g2_B + 2 c_A c_B`.
pub fn g2_cross(
    config: &HomConfig,
    g2_a: &CorrelationCurve,
    g2_b: &CorrelationCurve,
) -> Result<CorrelationCurve> {
    check_grids(&[g2_a, g2_b])?;
    let (ca, cb) = (config.weight_a, config.weight_b);
    let values = g2_a
        .values
        .iter()
        .zip(&g2_b.values)
        .map(|(a, b)| ca * ca * a + cb * cb * b + 2.0 * ca * cb)
        .collect();
    CorrelationCurve::new(g2_a.grid(), CurveKind::G2Cross, values)
}

enum CosFactor {
    Fixed(f64),
    Gaussian(f64),
}

fn g2_parallel_inner(
    config: &HomConfig,
    g2_a: &CorrelationCurve,
    g2_b: &CorrelationCurve,
    g1_a: &CorrelationCurve,
    g1_b: &CorrelationCurve,
    cos_factor: CosFactor,
) -> Result<CorrelationCurve> {
    check_grids(&[g2_a, g2_b, g1_a, g1_b])?;
    let (ca, cb) = (config.weight_a, config.weight_b);
    let (za, zb) = config.zeta();
    let r = config.effective_r()?;
    let grid = g2_a.grid();
    let values = (0..grid.n)
        .map(|i| {
            let tau = grid.tau(i);
            let cosv = match cos_factor {
                CosFactor::Fixed(dw) => (dw * tau).cos(),
                // E[cos(dw tau)] over dw ~ N(0, sigma^2)
                CosFactor::Gaussian(sigma) => (-0.5 * sigma * sigma * tau * tau).exp(),
            };
            let interference =
                1.0 - za * zb * g1_a.values[i] * g1_b.values[i] * cosv;
            ca * ca * g2_a.values[i] + cb * cb * g2_b.values[i]
                + 2.0 * r * ca * cb * interference
        })
        .collect();
    CorrelationCurve::new(grid, CurveKind::G2Parallel, values)
}

/// Co-polarized (interfering) coincidence correlation at fixed mutual
/// detuning `delta_omega`:
/// `c_A^2 g2_A + c_B^2 g2_B + 2 R c_A c_B [1 - zeta_A zeta_B |g1_A||g1_B| cos(dw tau)]`.
pub fn g2_parallel(
    config: &HomConfig,
    g2_a: &CorrelationCurve,
    g2_b: &CorrelationCurve,
    g1_a: &CorrelationCurve,
    g1_b: &CorrelationCurve,
    delta_omega: f64,
) -> Result<CorrelationCurve> {
    g2_parallel_inner(config, g2_a, g2_b, g1_a, g1_b, CosFactor::Fixed(delta_omega))
}

/// Solve R from the long-delay normalization `lim g2_par(tau) = 1` at zero
/// detuning: `R = 1 / (1 - zeta_A zeta_B g1_A(inf) g1_B(inf))` with the
/// elastic pedestals `g1_n(inf) = gamma_n^2 / (gamma_n^2 + 2 omega_n^2)`.
pub fn solve_r(config: &HomConfig) -> Result<f64> {
    let (za, zb) = config.zeta();
    let pedestal = za
        * zb
        * tls::g1_infinity(&config.emitter_a)
        * tls::g1_infinity(&config.emitter_b);
    let denom = 1.0 - pedestal;
    if denom <= 1e-12 {
        return Err(Error::DegenerateNormalization);
    }
    Ok(1.0 / denom)
}

/// Analytic ensemble average of the co-polarized correlation over
/// `delta_omega ~ N(0, sigma^2)`: only the cosine depends on the detuning,
/// so it is replaced by its Gaussian characteristic function
/// `exp(-sigma^2 tau^2 / 2)`.
pub fn ensemble_average_parallel(
    config: &HomConfig,
    g2_a: &CorrelationCurve,
    g2_b: &CorrelationCurve,
    g1_a: &CorrelationCurve,
    g1_b: &CorrelationCurve,
    sigma: f64,
) -> Result<CorrelationCurve> {
    if !(sigma >= 0.0) {
        return Err(Error::InvalidParam(format!(
            "ensemble sigma must be >= 0, got {sigma}"
        )));
    }
    g2_parallel_inner(config, g2_a, g2_b, g1_a, g1_b, CosFactor::Gaussian(sigma))
}

/// Brute-force Monte Carlo ensemble average: draw `n_samples` detunings from
/// `N(0, sigma^2)` with a seeded generator and average the full parallel
/// correlation. Cross-check for [`ensemble_average_parallel`].
#[allow(clippy::too_many_arguments)]
pub fn ensemble_average_parallel_mc(
    config: &HomConfig,
    g2_a: &CorrelationCurve,
    g2_b: &CorrelationCurve,
    g1_a: &CorrelationCurve,
    g1_b: &CorrelationCurve,
    sigma: f64,
    n_samples: usize,
    seed: u64,
) -> Result<CorrelationCurve> {
    check_grids(&[g2_a, g2_b, g1_a, g1_b])?;
    if n_samples == 0 {
        return Err(Error::InvalidParam("n_samples must be > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma.max(0.0))
        .map_err(|e| Error::InvalidParam(format!("bad ensemble sigma: {e}")))?;
    let grid = g2_a.grid();
    let mut acc = vec![0.0; grid.n];
    for _ in 0..n_samples {
        let dw = normal.sample(&mut rng);
        let sample = g2_parallel(config, g2_a, g2_b, g1_a, g1_b, dw)?;
        for (a, v) in acc.iter_mut().zip(&sample.values) {
            *a += v;
        }
    }
    for a in acc.iter_mut() {
        *a /= n_samples as f64;
    }
    CorrelationCurve::new(grid, CurveKind::G2Parallel, acc)
}

/// Interference visibility `V(tau) = 1 - g2_par(tau) / g2_cross(tau)`.
pub fn visibility(
    parallel: &CorrelationCurve,
    cross: &CorrelationCurve,
) -> Result<CorrelationCurve> {
    check_grids(&[parallel, cross])?;
    let grid = parallel.grid();
    let mut values = Vec::with_capacity(grid.n);
    for i in 0..grid.n {
        let denom = cross.values[i];
        if denom == 0.0 {
            return Err(Error::DivisionByZero {
                index: i,
                tau: grid.tau(i),
            });
        }
        values.push(1.0 - parallel.values[i] / denom);
    }
    CorrelationCurve::new(grid, CurveKind::Visibility, values)
}

/// FWHM of the central visibility peak, by linear interpolation of the
/// half-maximum crossings on either side of tau = 0.
pub fn peak_fwhm(curve: &CorrelationCurve) -> Option<f64> {
    let grid = curve.grid();
    let c = grid.center_index()?;
    let peak = curve.values[c];
    if peak <= 0.0 {
        return None;
    }
    let half = peak / 2.0;
    let cross = |mut i: usize, dir: i64| -> Option<f64> {
        loop {
            let j = (i as i64 + dir).try_into().ok()?;
            if j >= curve.values.len() {
                return None;
            }
            if curve.values[j] <= half {
                let f = (curve.values[i] - half) / (curve.values[i] - curve.values[j]);
                return Some(grid.tau(i) + f * dir as f64 * grid.step);
            }
            i = j;
        }
    };
    let right = cross(c, 1)?;
    let left = cross(c, -1)?;
    Some(right - left)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::TauGrid;
    use crate::units::mhz_to_angular;

    fn paper_config(r: Option<f64>) -> HomConfig {
        let a = EmitterParams::from_linewidth_mhz(233.0, 0.48).unwrap();
        let b = EmitterParams::from_linewidth_mhz(167.0, 0.34).unwrap();
        HomConfig::new(a, b, 0.59, 0.41, 0.13, 0.04, r, Detuning::Fixed(0.0)).unwrap()
    }

    /// Measured-style g2 curves whose zero-delay values match the quoted
    /// g2_n(0), built by impurity mixing of the ideal dip.
    fn paper_curves(
        config: &HomConfig,
        grid: TauGrid,
    ) -> (
        CorrelationCurve,
        CorrelationCurve,
        CorrelationCurve,
        CorrelationCurve,
    ) {
        let mix = |p: &EmitterParams, g2zero: f64| {
            let s = 1.0 - g2zero;
            let values = grid
                .taus()
                .map(|t| s * crate::tls::g2_tls(p, t) + (1.0 - s))
                .collect();
            CorrelationCurve::new(grid, CurveKind::G2, values).unwrap()
        };
        let g2a = mix(&config.emitter_a, config.g2zero_a());
        let g2b = mix(&config.emitter_b, config.g2zero_b());
        let g1a = crate::tls::g1_curve(&config.emitter_a, grid).unwrap();
        let g1b = crate::tls::g1_curve(&config.emitter_b, grid).unwrap();
        (g2a, g2b, g1a, g1b)
    }

    #[test]
    fn solve_r_reproduces_paper_value() {
        let r = solve_r(&paper_config(None)).unwrap();
        assert!((2.00..=2.06).contains(&r), "R = {r}");
        assert!((r - 2.02).abs() / 2.02 < 0.01);
    }

    #[test]
    fn solve_r_limits() {
        // strong drive kills the elastic pedestal -> R -> 1
        let a = EmitterParams::from_linewidth_mhz(233.0, 50.0).unwrap();
        let b = EmitterParams::from_linewidth_mhz(167.0, 50.0).unwrap();
        let c = HomConfig::new(a, b, 0.5, 0.5, 0.0, 0.0, None, Detuning::Fixed(0.0)).unwrap();
        assert!((solve_r(&c).unwrap() - 1.0).abs() < 1e-3);
        // zeta = 0 -> R = 1 exactly
        let a = EmitterParams::from_linewidth_mhz(233.0, 0.48).unwrap();
        let c = HomConfig::new(a, a, 0.5, 0.5, 1.0 - 1e-15, 0.0, None, Detuning::Fixed(0.0))
            .unwrap();
        assert!((solve_r(&c).unwrap() - 1.0).abs() < 1e-6);
        // undriven emitters degenerate
        let dark = EmitterParams::new(1e9, 0.0).unwrap();
        let c = HomConfig::new(dark, dark, 0.5, 0.5, 0.0, 0.0, None, Detuning::Fixed(0.0))
            .unwrap();
        assert!(matches!(solve_r(&c), Err(Error::DegenerateNormalization)));
    }

    #[test]
    fn cross_single_source_limit() {
        let config = {
            let a = EmitterParams::from_linewidth_mhz(233.0, 0.48).unwrap();
            let b = EmitterParams::from_linewidth_mhz(167.0, 0.34).unwrap();
            HomConfig::new(a, b, 1.0, 0.0, 0.13, 0.04, None, Detuning::Fixed(0.0)).unwrap()
        };
        let grid = TauGrid::symmetric(20e-9, 50e-12).unwrap();
        let (g2a, g2b, _, _) = paper_curves(&config, grid);
        let cross = g2_cross(&config, &g2a, &g2b).unwrap();
        for (c, a) in cross.values.iter().zip(&g2a.values) {
            assert!((c - a).abs() < 1e-12);
        }
    }

    #[test]
    fn cross_zero_delay_arithmetic() {
        let config = paper_config(None);
        let grid = TauGrid::symmetric(20e-9, 50e-12).unwrap();
        let (g2a, g2b, _, _) = paper_curves(&config, grid);
        let cross = g2_cross(&config, &g2a, &g2b).unwrap();
        let v0 = cross.value_at_zero().unwrap();
        let expected = 0.59f64.powi(2) * 0.13 + 0.41f64.powi(2) * 0.04 + 2.0 * 0.59 * 0.41;
        assert!((v0 - expected).abs() < 1e-12);
        assert!((v0 - 0.536).abs() < 1e-3);
        // long delay -> 1
        let far = cross.values[0];
        assert!((far - 1.0).abs() < 1e-6);
    }

    #[test]
    fn parallel_perfect_interference_vanishes_at_zero() {
        let p = EmitterParams::from_linewidth_mhz(233.0, 0.48).unwrap();
        let config =
            HomConfig::new(p, p, 0.5, 0.5, 0.0, 0.0, Some(1.0), Detuning::Fixed(0.0)).unwrap();
        let grid = TauGrid::symmetric(20e-9, 50e-12).unwrap();
        let g2 = crate::tls::g2_curve(&p, grid).unwrap();
        let g1 = crate::tls::g1_curve(&p, grid).unwrap();
        let par = g2_parallel(&config, &g2, &g2, &g1, &g1, 0.0).unwrap();
        assert!(par.value_at_zero().unwrap().abs() < 1e-12);
    }

    #[test]
    fn parallel_paper_zero_delay() {
        let config = paper_config(None);
        let grid = TauGrid::symmetric(20e-9, 50e-12).unwrap();
        let (g2a, g2b, g1a, g1b) = paper_curves(&config, grid);
        let par = g2_parallel(&config, &g2a, &g2b, &g1a, &g1b, 0.0).unwrap();
        let v0 = par.value_at_zero().unwrap();
        assert!((v0 - 0.136).abs() < 2e-3, "g2_par(0) = {v0}");
        // normalization at long delay with solved R
        let gamma_min = config.emitter_a.gamma().min(config.emitter_b.gamma());
        let far_grid = TauGrid::symmetric(100.0 / gamma_min, 50e-12).unwrap();
        let (g2a, g2b, g1a, g1b) = paper_curves(&config, far_grid);
        let par = g2_parallel(&config, &g2a, &g2b, &g1a, &g1b, 0.0).unwrap();
        assert!((par.values[0] - 1.0).abs() <= 1e-3);
    }

    #[test]
    fn distinguishable_emitters_no_visibility() {
        // zeta_A = zeta_B = 0: parallel equals cross pointwise, V = 0
        let a = EmitterParams::from_linewidth_mhz(233.0, 0.48).unwrap();
        let b = EmitterParams::from_linewidth_mhz(167.0, 0.34).unwrap();
        let config = HomConfig::new(
            a,
            b,
            0.59,
            0.41,
            1.0 - 1e-15,
            1.0 - 1e-15,
            None,
            Detuning::Fixed(0.0),
        )
        .unwrap();
        let grid = TauGrid::symmetric(20e-9, 50e-12).unwrap();
        let (g2a, g2b, g1a, g1b) = paper_curves(&config, grid);
        let par = g2_parallel(&config, &g2a, &g2b, &g1a, &g1b, 0.0).unwrap();
        let cross = g2_cross(&config, &g2a, &g2b).unwrap();
        for (p, c) in par.values.iter().zip(&cross.values) {
            assert!((p - c).abs() < 1e-6);
        }
        let vis = visibility(&par, &cross).unwrap();
        for v in vis.values {
            assert!(v.abs() < 1e-6);
        }
    }

    #[test]
    fn visibility_paper_peak() {
        let config = paper_config(None);
        let grid = TauGrid::symmetric(20e-9, 50e-12).unwrap();
        let (g2a, g2b, g1a, g1b) = paper_curves(&config, grid);
        let par = g2_parallel(&config, &g2a, &g2b, &g1a, &g1b, 0.0).unwrap();
        let cross = g2_cross(&config, &g2a, &g2b).unwrap();
        let vis = visibility(&par, &cross).unwrap();
        let v0 = vis.value_at_zero().unwrap();
        assert!((0.71..=0.87).contains(&v0), "V(0) = {v0}");
        assert!((v0 - 0.79).abs() <= 0.08);
        assert!(vis.max_asymmetry() < 1e-12);
    }

    #[test]
    fn visibility_identical_ideal_emitters_is_unity() {
        let p = EmitterParams::from_linewidth_mhz(233.0, 0.48).unwrap();
        let config =
            HomConfig::new(p, p, 0.5, 0.5, 0.0, 0.0, None, Detuning::Fixed(0.0)).unwrap();
        let grid = TauGrid::symmetric(20e-9, 50e-12).unwrap();
        let g2 = crate::tls::g2_curve(&p, grid).unwrap();
        let g1 = crate::tls::g1_curve(&p, grid).unwrap();
        let par = g2_parallel(&config, &g2, &g2, &g1, &g1, 0.0).unwrap();
        let cross = g2_cross(&config, &g2, &g2).unwrap();
        let vis = visibility(&par, &cross).unwrap();
        assert!((vis.value_at_zero().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn swapping_emitters_leaves_outputs_unchanged() {
        let config = paper_config(None);
        let grid = TauGrid::symmetric(20e-9, 50e-12).unwrap();
        let (g2a, g2b, g1a, g1b) = paper_curves(&config, grid);
        let par = g2_parallel(&config, &g2a, &g2b, &g1a, &g1b, 0.0).unwrap();
        let cross = g2_cross(&config, &g2a, &g2b).unwrap();
        let sw = config.swapped();
        let par_sw = g2_parallel(&sw, &g2b, &g2a, &g1b, &g1a, 0.0).unwrap();
        let cross_sw = g2_cross(&sw, &g2b, &g2a).unwrap();
        for (x, y) in par.values.iter().zip(&par_sw.values) {
            assert!((x - y).abs() < 1e-12);
        }
        for (x, y) in cross.values.iter().zip(&cross_sw.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn combined_sigma_paper_value() {
        let s = combined_detuning_sigma(68.0, 163.0);
        assert!((s - 176.6).abs() < 0.1);
        assert_eq!(s.round(), 177.0);
    }

    #[test]
    fn ensemble_zero_sigma_matches_fixed_zero_detuning() {
        let config = paper_config(None);
        let grid = TauGrid::symmetric(20e-9, 50e-12).unwrap();
        let (g2a, g2b, g1a, g1b) = paper_curves(&config, grid);
        let fixed = g2_parallel(&config, &g2a, &g2b, &g1a, &g1b, 0.0).unwrap();
        let ens = ensemble_average_parallel(&config, &g2a, &g2b, &g1a, &g1b, 0.0).unwrap();
        assert_eq!(fixed.values, ens.values);
    }

    #[test]
    fn monte_carlo_matches_analytic_within_standard_error() {
        let config = paper_config(None);
        let grid = TauGrid::symmetric(10e-9, 200e-12).unwrap();
        let (g2a, g2b, g1a, g1b) = paper_curves(&config, grid);
        let sigma = mhz_to_angular(177.0);
        let n = 100_000;
        let analytic =
            ensemble_average_parallel(&config, &g2a, &g2b, &g1a, &g1b, sigma).unwrap();
        let mc = ensemble_average_parallel_mc(
            &config, &g2a, &g2b, &g1a, &g1b, sigma, n, 0xC0FFEE,
        )
        .unwrap();
        // the MC spread of each sample is bounded by the cos term amplitude;
        // Var[cos(dw tau)] <= 1/2, scaled by the interference prefactor
        let (za, zb) = config.zeta();
        let r = config.effective_r().unwrap();
        let prefactor = 2.0 * r * config.weight_a() * config.weight_b() * za * zb;
        for i in 0..grid.n {
            let se = prefactor * (0.5f64 / n as f64).sqrt()
                * g1a.values[i]
                * g1b.values[i];
            let diff = (analytic.values[i] - mc.values[i]).abs();
            assert!(
                diff <= 3.0 * se.max(1e-6),
                "tau index {i}: diff {diff:.3e} vs 3 SE {:.3e}",
                3.0 * se
            );
        }
    }

    #[test]
    fn ensemble_monotonicity_in_sigma() {
        let config = paper_config(None);
        let grid = TauGrid::symmetric(20e-9, 25e-12).unwrap();
        let (g2a, g2b, g1a, g1b) = paper_curves(&config, grid);
        let cross = g2_cross(&config, &g2a, &g2b).unwrap();
        let mut prev_v0 = f64::INFINITY;
        for sigma_mhz in [0.0, 50.0, 177.0, 500.0] {
            let sigma = mhz_to_angular(sigma_mhz);
            let par =
                ensemble_average_parallel(&config, &g2a, &g2b, &g1a, &g1b, sigma).unwrap();
            let vis = visibility(&par, &cross).unwrap();
            let v0 = vis.value_at_zero().unwrap();
            // the Gaussian factor is 1 at tau = 0, so with a fixed R the peak
            // value cannot grow with sigma; the peak width is not constrained
            // (averaging only suppresses interference away from tau = 0)
            assert!(v0 <= prev_v0 + 1e-12, "V(0) grew with sigma");
            assert!(peak_fwhm(&vis).unwrap() > 0.0);
            prev_v0 = v0;
        }
    }

    #[test]
    fn division_by_zero_reports_index() {
        let grid = TauGrid::symmetric(1e-9, 0.5e-9).unwrap();
        let par = CorrelationCurve::new(grid, CurveKind::G2Parallel, vec![1.0; grid.n]).unwrap();
        let cross = CorrelationCurve::new(grid, CurveKind::G2Cross, vec![1.0, 0.0, 1.0, 1.0, 1.0])
            .unwrap();
        match visibility(&par, &cross) {
            Err(Error::DivisionByZero { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected DivisionByZero, got {other:?}"),
        }
    }
}
