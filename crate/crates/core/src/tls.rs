//! Closed-form coherence functions of a resonantly driven two-level system.
//!
//! The first-order coherence follows the continuous-wave resonance
//! fluorescence result with dephasing neglected; the second-order correlation
//! is the standard damped-Rabi antibunching curve. Both are validated against
//! the Bloch-equation oracle in [`crate::bloch`].

use crate::curve::{CorrelationCurve, CurveKind, TauGrid};
use crate::emitter::EmitterParams;
use crate::error::Result;

/// The generalized Rabi frequency `mu = sqrt(omega^2 - gamma^2/16)`.
///
/// Stored as `mu^2` so that the overdamped branch (`omega <= gamma/4`, where
/// `mu^2 < 0`) is handled by analytic continuation: `cos(mu tau)` becomes
/// `cosh(|mu| tau)` and `sin(mu tau)/mu` becomes `sinh(|mu| tau)/|mu|`. At
/// the branch point `mu = 0` the sinc factor degenerates to `tau`.
#[derive(Clone, Copy, Debug)]
pub struct GeneralizedRabi {
    mu_sq: f64,
}

impl GeneralizedRabi {
    pub fn new(params: &EmitterParams) -> Self {
        let g = params.gamma();
        GeneralizedRabi {
            mu_sq: params.omega().powi(2) - g * g / 16.0,
        }
    }

    /// |mu|: the oscillation (or relaxation) frequency in radians per second.
    pub fn magnitude(&self) -> f64 {
        self.mu_sq.abs().sqrt()
    }

    /// True on the underdamped side (`omega > gamma/4`).
    pub fn is_oscillatory(&self) -> bool {
        self.mu_sq > 0.0
    }

    /// `cos(mu tau)` continued across the branch point.
    pub fn cos_factor(&self, tau: f64) -> f64 {
        let z = self.mu_sq * tau * tau;
        if z.abs() < 1e-8 {
            // series in mu^2 tau^2, valid on both branches
            1.0 - z / 2.0 + z * z / 24.0
        } else if self.mu_sq > 0.0 {
            (self.magnitude() * tau).cos()
        } else {
            (self.magnitude() * tau).cosh()
        }
    }

    /// `sin(mu tau)/mu` continued across the branch point; equals `tau` at
    /// `mu = 0`.
    pub fn sinc_factor(&self, tau: f64) -> f64 {
        let z = self.mu_sq * tau * tau;
        if z.abs() < 1e-8 {
            tau * (1.0 - z / 6.0 + z * z / 120.0)
        } else if self.mu_sq > 0.0 {
            let m = self.magnitude();
            (m * tau).sin() / m
        } else {
            let m = self.magnitude();
            (m * tau).sinh() / m
        }
    }
}

/// `mu = sqrt(omega^2 - gamma^2/16)` as a branch-aware value.
pub fn generalized_rabi(params: &EmitterParams) -> GeneralizedRabi {
    GeneralizedRabi::new(params)
}

/// Steady-state excited population `omega^2 / (gamma^2 + 2 omega^2)`; this is
/// also the raw first-order coherence at tau = 0.
pub fn steady_state_population(params: &EmitterParams) -> f64 {
    let g2 = params.gamma().powi(2);
    let o2 = params.omega().powi(2);
    o2 / (g2 + 2.0 * o2)
}

/// Long-delay limit of the normalized first-order coherence: the elastic
/// fraction `gamma^2 / (gamma^2 + 2 omega^2)`.
pub fn g1_infinity(params: &EmitterParams) -> f64 {
    let g2 = params.gamma().powi(2);
    let o2 = params.omega().powi(2);
    g2 / (g2 + 2.0 * o2)
}

/// Normalized first-order coherence magnitude |g1(tau)| of the driven
/// two-level system, dephasing neglected. Evaluated at |tau|; g1(0) = 1.
pub fn g1_normalized(params: &EmitterParams, tau: f64) -> f64 {
    let tau = tau.abs();
    let g = params.gamma();
    let o2 = params.omega().powi(2);
    let d = g * g + 2.0 * o2;
    let mu = GeneralizedRabi::new(params);
    let bracket = g * g / d
        + 0.5 * (-g * tau / 2.0).exp()
        + (-3.0 * g * tau / 4.0).exp()
            * (mu.cos_factor(tau) * 0.5 * (2.0 * o2 - g * g) / d
                - mu.sinc_factor(tau) * 0.25 * (-5.0 * g * o2 + g.powi(3) / 2.0) / d);
    bracket.abs()
}

/// Ideal second-order correlation of the driven two-level system:
/// `g2(tau) = 1 - exp(-3 gamma |tau| / 4) [cos(mu tau) + (3 gamma / 4 mu) sin(mu tau)]`.
pub fn g2_tls(params: &EmitterParams, tau: f64) -> f64 {
    let tau = tau.abs();
    let g = params.gamma();
    let mu = GeneralizedRabi::new(params);
    let v = 1.0
        - (-3.0 * g * tau / 4.0).exp()
            * (mu.cos_factor(tau) + 0.75 * g * mu.sinc_factor(tau));
    v.max(0.0)
}

/// Sample |g1| on a grid.
pub fn g1_curve(params: &EmitterParams, grid: TauGrid) -> Result<CorrelationCurve> {
    let values = grid.taus().map(|t| g1_normalized(params, t)).collect();
    CorrelationCurve::new(grid, CurveKind::G1Normalized, values)
}

/// Sample the ideal g2 on a grid.
pub fn g2_curve(params: &EmitterParams, grid: TauGrid) -> Result<CorrelationCurve> {
    let values = grid.taus().map(|t| g2_tls(params, t)).collect();
    CorrelationCurve::new(grid, CurveKind::G2, values)
}
