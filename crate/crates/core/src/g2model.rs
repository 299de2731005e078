//! Measurement-level second-order correlation: ideal antibunching dressed
//! with a bunching envelope, laser-impurity floor and detector response.

use serde::{Deserialize, Serialize};

use crate::curve::{CorrelationCurve, CurveKind, TauGrid};
use crate::emitter::EmitterParams;
use crate::error::{Error, Result};
use crate::irf::{self, IrfParams};
use crate::tls;

/// Exponential bunching envelope `1 + B exp(-|tau| / tau_b)` multiplying the
/// ideal g2 at short delay.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BunchingEnvelope {
    amplitude: f64,
    timescale: f64,
}

impl BunchingEnvelope {
    pub fn new(amplitude: f64, timescale: f64) -> Result<Self> {
        if !(amplitude >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "bunching amplitude must be >= 0, got {amplitude}"
            )));
        }
        if !(timescale > 0.0) {
            return Err(Error::InvalidParam(format!(
                "bunching timescale must be > 0, got {timescale}"
            )));
        }
        Ok(BunchingEnvelope { amplitude, timescale })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn timescale(&self) -> f64 {
        self.timescale
    }

    pub fn envelope(&self, tau: f64) -> f64 {
        1.0 + self.amplitude * (-tau.abs() / self.timescale).exp()
    }
}

/// The fitted g2 model: ideal emitter, optional bunching envelope, laser
/// impurity taken from the emitter parameters, and IRF convolution.
#[derive(Clone, Copy, Debug)]
pub struct MeasuredG2Model {
    pub emitter: EmitterParams,
    pub bunching: Option<BunchingEnvelope>,
    pub irf: IrfParams,
}

/// Zero-delay correlation of laser leakage mixed with ideal single photons:
/// `g2(0) = 2 xi - xi^2`.
pub fn impurity_to_g2zero(xi: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&xi) {
        return Err(Error::InvalidParam(format!(
            "impurity must be in [0, 1), got {xi}"
        )));
    }
    Ok(2.0 * xi - xi * xi)
}

/// Pointwise impurity mixing: a signal fraction `1 - xi` interferes, the
/// Poissonian laser floor fills in the rest, so
/// `g2_mixed = (1 - xi)^2 g2 + (1 - (1 - xi)^2)`.
fn mix_impurity(g2: f64, xi: f64) -> f64 {
    let s = (1.0 - xi) * (1.0 - xi);
    s * g2 + (1.0 - s)
}

/// Evaluate the measured-model g2 on a symmetric grid: bunching multiplies
/// the ideal curve, then the impurity floor is mixed in, then the result is
/// convolved with the IRF.
pub fn g2_measured(model: &MeasuredG2Model, grid: TauGrid) -> Result<CorrelationCurve> {
    if !grid.is_symmetric() {
        return Err(Error::GridMismatch(
            "g2_measured requires a grid symmetric about tau = 0".into(),
        ));
    }
    let xi = model.emitter.impurity();
    let values: Vec<f64> = grid
        .taus()
        .map(|tau| {
            let mut v = tls::g2_tls(&model.emitter, tau);
            if let Some(b) = &model.bunching {
                v *= b.envelope(tau);
            }
            mix_impurity(v, xi)
        })
        .collect();
    let curve = CorrelationCurve::new(grid, CurveKind::G2, values)?;
    irf::convolve_irf(&curve, &model.irf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn impurity_relation_paper_values() {
        assert_eq!(impurity_to_g2zero(0.0).unwrap(), 0.0);
        let a = impurity_to_g2zero(0.033).unwrap();
        assert!((a - 0.064911).abs() < 1e-6);
        assert_eq!((a * 100.0).round() / 100.0, 0.06);
        let b = impurity_to_g2zero(0.017).unwrap();
        assert!((b - 0.033711).abs() < 1e-6);
        assert_eq!((b * 100.0).round() / 100.0, 0.03);
        assert!(impurity_to_g2zero(1.0).is_err());
        assert!(impurity_to_g2zero(-0.1).is_err());
    }

    #[test]
    fn all_dressings_off_reduces_to_ideal() {
        let p = EmitterParams::from_linewidth_mhz(233.0, 0.48).unwrap();
        let model = MeasuredG2Model {
            emitter: p,
            bunching: None,
            irf: IrfParams::none(),
        };
        let grid = TauGrid::symmetric(10e-9, 50e-12).unwrap();
        let curve = g2_measured(&model, grid).unwrap();
        for (i, tau) in grid.taus().enumerate() {
            assert!((curve.values[i] - tls::g2_tls(&p, tau)).abs() < 1e-12);
        }
    }

    #[test]
    fn paper_point_brackets_measured_g2zero() {
        // QD_B operating point: dip value must land in [0.02, 0.08],
        // bracketing the measured 0.04 +- 0.02
        let p = EmitterParams::from_linewidth_mhz(167.0, 0.34)
            .unwrap()
            .with_impurity(0.017)
            .unwrap();
        let model = MeasuredG2Model {
            emitter: p,
            bunching: None,
            irf: IrfParams::from_fwhm_ps(226.0).unwrap(),
        };
        let grid = TauGrid::symmetric(20e-9, 25e-12).unwrap();
        let curve = g2_measured(&model, grid).unwrap();
        let v0 = curve.value_at_zero().unwrap();
        assert!((0.02..=0.08).contains(&v0), "g2(0) = {v0}");
        // minimum of the curve sits at tau = 0
        let min = curve.values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((v0 - min).abs() < 1e-12);
    }

    #[test]
    fn curve_is_even() {
        let p = EmitterParams::from_linewidth_mhz(167.0, 0.34)
            .unwrap()
            .with_impurity(0.017)
            .unwrap();
        let model = MeasuredG2Model {
            emitter: p,
            bunching: Some(BunchingEnvelope::new(0.1, 30e-9).unwrap()),
            irf: IrfParams::from_fwhm_ps(226.0).unwrap(),
        };
        let grid = TauGrid::symmetric(50e-9, 25e-12).unwrap();
        let curve = g2_measured(&model, grid).unwrap();
        assert!(curve.max_asymmetry() < 1e-12);
    }

    #[test]
    fn impurity_raises_floor() {
        let grid = TauGrid::symmetric(20e-9, 25e-12).unwrap();
        let clean = EmitterParams::from_linewidth_mhz(167.0, 0.34).unwrap();
        let dirty = clean.with_impurity(0.05).unwrap();
        let irf = IrfParams::from_fwhm_ps(226.0).unwrap();
        let v_clean = g2_measured(
            &MeasuredG2Model { emitter: clean, bunching: None, irf },
            grid,
        )
        .unwrap()
        .value_at_zero()
        .unwrap();
        let v_dirty = g2_measured(
            &MeasuredG2Model { emitter: dirty, bunching: None, irf },
            grid,
        )
        .unwrap()
        .value_at_zero()
        .unwrap();
        assert!(v_dirty >= v_clean);
    }

    #[test]
    fn irf_broadening_never_deepens_dip() {
        let p = EmitterParams::from_linewidth_mhz(167.0, 0.34).unwrap();
        let grid = TauGrid::symmetric(20e-9, 25e-12).unwrap();
        let mut prev = -1.0;
        for fwhm_ps in [0.0, 100.0, 226.0, 500.0] {
            let model = MeasuredG2Model {
                emitter: p,
                bunching: None,
                irf: IrfParams::from_fwhm_ps(fwhm_ps).unwrap(),
            };
            let v0 = g2_measured(&model, grid).unwrap().value_at_zero().unwrap();
            assert!(v0 >= prev, "fwhm {fwhm_ps} ps: {v0} < {prev}");
            prev = v0;
        }
    }

    #[test]
    fn long_delay_approaches_unity() {
        let p = EmitterParams::from_linewidth_mhz(233.0, 0.48)
            .unwrap()
            .with_impurity(0.033)
            .unwrap();
        let tau_b = 5e-9;
        let model = MeasuredG2Model {
            emitter: p,
            bunching: Some(BunchingEnvelope::new(0.08, tau_b).unwrap()),
            irf: IrfParams::from_fwhm_ps(226.0).unwrap(),
        };
        let far = 50.0 * (1.0 / p.gamma()).max(tau_b);
        let grid = TauGrid::symmetric(far, 50e-12).unwrap();
        let curve = g2_measured(&model, grid).unwrap();
        // at 50x the slowest timescale: the mixed normalization target is
        // (1-xi)^2 * 1 + (1 - (1-xi)^2) = 1
        let edge = curve.values[0];
        assert!((edge - 1.0).abs() < 1e-3, "edge value {edge}");
    }
}
