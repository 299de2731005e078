//! Gaussian detector-jitter (instrument response) modeling.

use serde::{Deserialize, Serialize};

use crate::curve::{CorrelationCurve, TauGrid};
use crate::emitter::EmitterParams;
use crate::error::{Error, Result};
use crate::tls;

const FWHM_TO_SIGMA: f64 = 2.354_820_045_030_949_3; // 2 sqrt(2 ln 2)

/// Detector timing-jitter kernel: a Gaussian characterized by its FWHM.
/// `fwhm = 0` disables convolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrfParams {
    fwhm: f64,
}

impl IrfParams {
    pub fn new(fwhm: f64) -> Result<Self> {
        if !(fwhm >= 0.0) || !fwhm.is_finite() {
            return Err(Error::InvalidParam(format!(
                "irf fwhm must be >= 0, got {fwhm}"
            )));
        }
        Ok(IrfParams { fwhm })
    }

    pub fn from_fwhm_ps(fwhm_ps: f64) -> Result<Self> {
        Self::new(fwhm_ps * 1e-12)
    }

    pub fn none() -> Self {
        IrfParams { fwhm: 0.0 }
    }

    pub fn fwhm(&self) -> f64 {
        self.fwhm
    }

    pub fn sigma(&self) -> f64 {
        self.fwhm / FWHM_TO_SIGMA
    }
}

/// Unit-mass Gaussian kernel sampled on the curve grid, truncated at
/// +-5 sigma and renormalized.
pub(crate) fn kernel(step: f64, sigma: f64) -> Vec<f64> {
    let half = (5.0 * sigma / step).ceil() as i64;
    let mut k: Vec<f64> = (-half..=half)
        .map(|i| {
            let t = i as f64 * step;
            (-t * t / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = k.iter().sum();
    for v in k.iter_mut() {
        *v /= sum;
    }
    k
}

/// Convolve a sampled curve with the IRF kernel. Edges are handled by
/// extending the boundary value; the output grid equals the input grid.
pub fn convolve_irf(curve: &CorrelationCurve, irf: &IrfParams) -> Result<CorrelationCurve> {
    if irf.fwhm == 0.0 {
        return Ok(curve.clone());
    }
    let step = curve.tau_step;
    if step > irf.fwhm / 4.0 {
        return Err(Error::GridTooCoarse {
            step,
            limit: irf.fwhm / 4.0,
        });
    }
    let values = convolve_values(&curve.values, step, irf.sigma());
    CorrelationCurve::new(curve.grid(), curve.kind, values)
}

pub(crate) fn convolve_values(values: &[f64], step: f64, sigma: f64) -> Vec<f64> {
    let k = kernel(step, sigma);
    let half = (k.len() / 2) as i64;
    let n = values.len() as i64;
    (0..n)
        .map(|i| {
            k.iter()
                .enumerate()
                .map(|(j, w)| {
                    let idx = (i + j as i64 - half).clamp(0, n - 1) as usize;
                    w * values[idx]
                })
                .sum()
        })
        .collect()
}

/// Best achievable g2(0) for an ideal emitter limited only by detector time
/// jitter: build the ideal antibunching dip at `omega = omega_ratio * gamma`,
/// convolve with the IRF, and read off the zero-delay value.
pub fn jitter_limited_g2zero(gamma: f64, irf: &IrfParams, omega_ratio: f64) -> Result<f64> {
    let params = EmitterParams::new(gamma, omega_ratio * gamma)?;
    if irf.fwhm == 0.0 {
        return Ok(0.0);
    }
    // grid fine relative to both the dip and the kernel, wide enough for both
    let step = (irf.fwhm / 8.0).min(0.02 / gamma);
    let tau_max = (20.0 / gamma).max(8.0 * irf.fwhm);
    let grid = TauGrid::symmetric(tau_max, step)?;
    let curve = tls::g2_curve(&params, grid)?;
    let conv = convolve_irf(&curve, irf)?;
    conv.value_at_zero()
}

/// The jitter-limited g2(0) as a function of decay rate, for the sweep CSV
/// (`gamma_mhz_over_2pi,g2_zero`).
pub fn jitter_sweep(
    gamma_axis_mhz: &[f64],
    irf: &IrfParams,
    omega_ratio: f64,
) -> Result<Vec<(f64, f64)>> {
    gamma_axis_mhz
        .iter()
        .map(|&mhz| {
            let gamma = crate::units::mhz_to_angular(mhz);
            Ok((mhz, jitter_limited_g2zero(gamma, irf, omega_ratio)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveKind;
    use crate::units::mhz_to_angular;

    #[test]
    fn kernel_mass_is_unity() {
        let k = kernel(10e-12, 96e-12);
        let sum: f64 = k.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_fwhm_is_identity() {
        let grid = TauGrid::symmetric(1e-9, 50e-12).unwrap();
        let c = CorrelationCurve::new(grid, CurveKind::G2, vec![0.5; grid.n]).unwrap();
        let out = convolve_irf(&c, &IrfParams::none()).unwrap();
        assert_eq!(out.values, c.values);
    }

    #[test]
    fn constant_curve_unchanged() {
        let grid = TauGrid::symmetric(2e-9, 20e-12).unwrap();
        let c = CorrelationCurve::new(grid, CurveKind::G2, vec![0.7; grid.n]).unwrap();
        let out = convolve_irf(&c, &IrfParams::from_fwhm_ps(226.0).unwrap()).unwrap();
        for v in out.values {
            assert!((v - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn smoothing_reduces_dip_depth() {
        let grid = TauGrid::symmetric(2e-9, 20e-12).unwrap();
        let mut values = vec![1.0; grid.n];
        let c = grid.center_index().unwrap();
        values[c] = 0.0;
        let curve = CorrelationCurve::new(grid, CurveKind::G2, values).unwrap();
        let out = convolve_irf(&curve, &IrfParams::from_fwhm_ps(226.0).unwrap()).unwrap();
        assert!(out.values[c] > 0.5);
        assert!(out.values[c] < 1.0);
    }

    #[test]
    fn coarse_grid_rejected() {
        let grid = TauGrid::symmetric(2e-9, 100e-12).unwrap();
        let c = CorrelationCurve::new(grid, CurveKind::G2, vec![1.0; grid.n]).unwrap();
        let err = convolve_irf(&c, &IrfParams::from_fwhm_ps(226.0).unwrap());
        assert!(matches!(err, Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn jitter_g2zero_monotone_lattice() {
        let irf_values = [0.0, 100e-12, 226e-12, 500e-12];
        let gammas = [100.0, 167.0, 233.0, 350.0, 500.0];
        let mut prev_rows: Option<Vec<f64>> = None;
        for fwhm in irf_values {
            let irf = IrfParams::new(fwhm).unwrap();
            let row: Vec<f64> = gammas
                .iter()
                .map(|&mhz| jitter_limited_g2zero(mhz_to_angular(mhz), &irf, 0.3).unwrap())
                .collect();
            for w in row.windows(2) {
                assert!(w[1] >= w[0], "not monotone in gamma: {row:?}");
            }
            if let Some(prev) = prev_rows {
                for (a, b) in prev.iter().zip(row.iter()) {
                    assert!(b >= a, "not monotone in fwhm");
                }
            }
            prev_rows = Some(row);
        }
    }

    #[test]
    fn convolution_preserves_even_symmetry() {
        let grid = TauGrid::symmetric(2e-9, 20e-12).unwrap();
        let p = EmitterParams::from_linewidth_mhz(233.0, 0.48).unwrap();
        let c = tls::g2_curve(&p, grid).unwrap();
        let out = convolve_irf(&c, &IrfParams::from_fwhm_ps(226.0).unwrap()).unwrap();
        assert!(out.max_asymmetry() < 1e-12);
    }
}
