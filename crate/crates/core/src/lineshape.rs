//! Spectral and power-domain models: Lorentzian/Gaussian/Voigt lineshapes,
//! saturation, power broadening, Rabi-from-power mapping, and the
//! time-resolved decay model with fine-structure beating.
//!
//! Lineshapes are peak-normalized: the value at the center frequency is
//! `amplitude + offset`, which keeps the Lorentzian, Gaussian and Voigt
//! limits mutually consistent and makes fit amplitudes directly comparable
//! to count rates.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::irf::{self, IrfParams};
use crate::units;

/// Peak-normalized lineshape parameters. Frequencies and widths share one
/// unit (MHz in this crate's usage); `lorentz_fwhm` and `gauss_sigma` may
/// each be zero but not both.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineshapeParams {
    pub center: f64,
    pub lorentz_fwhm: f64,
    pub gauss_sigma: f64,
    pub amplitude: f64,
    pub offset: f64,
}

impl LineshapeParams {
    pub fn validate(&self) -> Result<()> {
        if self.lorentz_fwhm < 0.0 || self.gauss_sigma < 0.0 {
            return Err(Error::InvalidParam(
                "lineshape widths must be >= 0".into(),
            ));
        }
        if self.lorentz_fwhm == 0.0 && self.gauss_sigma == 0.0 {
            return Err(Error::InvalidParam(
                "lorentz_fwhm and gauss_sigma cannot both be zero".into(),
            ));
        }
        Ok(())
    }
}

/// Peak-normalized Lorentzian: `amplitude * hwhm^2 / ((nu-c)^2 + hwhm^2) + offset`.
pub fn lorentzian(nu: f64, p: &LineshapeParams) -> f64 {
    let hwhm = p.lorentz_fwhm / 2.0;
    let d = nu - p.center;
    p.amplitude * hwhm * hwhm / (d * d + hwhm * hwhm) + p.offset
}

/// Peak-normalized Gaussian: `amplitude * exp(-(nu-c)^2 / 2 sigma^2) + offset`.
pub fn gaussian(nu: f64, p: &LineshapeParams) -> f64 {
    let d = nu - p.center;
    p.amplitude * (-d * d / (2.0 * p.gauss_sigma * p.gauss_sigma)).exp() + p.offset
}

// --- Faddeeva function -----------------------------------------------------

// Weideman's rational approximation of w(z) = exp(-z^2) erfc(-iz) on the
// upper half plane. N polynomial terms; coefficients are a cosine transform
// of the weight function, computed once.
const WEIDEMAN_N: usize = 40;

fn weideman_coeffs() -> &'static (f64, Vec<f64>) {
    static COEFFS: OnceLock<(f64, Vec<f64>)> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let n = WEIDEMAN_N;
        let m = 2 * n;
        let m2 = 2 * m;
        let l = (n as f64 / std::f64::consts::SQRT_2).sqrt();
        let f = |k: usize| -> f64 {
            let theta = k as f64 * std::f64::consts::PI / m as f64;
            let t = l * (theta / 2.0).tan();
            (-t * t).exp() * (l * l + t * t)
        };
        // f_k is even in k, so the DFT reduces to a cosine sum
        let mut a = vec![0.0; n + 1];
        for (idx, coeff) in a.iter_mut().enumerate() {
            let mut s = f(0);
            for k in 1..m {
                s += 2.0 * f(k) * (std::f64::consts::PI * idx as f64 * k as f64 / m as f64).cos();
            }
            *coeff = s / m2 as f64;
        }
        (l, a)
    })
}

/// Faddeeva function `w(z)` for `Im(z) >= 0`.
pub fn faddeeva_w(z: Complex64) -> Complex64 {
    let (l, a) = weideman_coeffs();
    let l = Complex64::new(*l, 0.0);
    let iz = Complex64::new(0.0, 1.0) * z;
    let denom = l - iz;
    let big_z = (l + iz) / denom;
    // Horner over a[N] .. a[1]
    let mut p = Complex64::new(a[WEIDEMAN_N], 0.0);
    for k in (1..WEIDEMAN_N).rev() {
        p = p * big_z + a[k];
    }
    2.0 * p / (denom * denom) + std::f64::consts::FRAC_1_PI.sqrt() / denom
}

fn voigt_shape(x: f64, hwhm: f64, sigma: f64) -> f64 {
    let s = sigma * std::f64::consts::SQRT_2;
    faddeeva_w(Complex64::new(x / s, hwhm / s)).re
}

/// Peak-normalized Voigt profile via the real part of the scaled complex
/// error function. Degenerates to the pure Lorentzian or Gaussian when the
/// other width vanishes.
pub fn voigt(nu: f64, p: &LineshapeParams) -> f64 {
    if p.gauss_sigma == 0.0 {
        return lorentzian(nu, p);
    }
    if p.lorentz_fwhm == 0.0 {
        return gaussian(nu, p);
    }
    let hwhm = p.lorentz_fwhm / 2.0;
    let peak = voigt_shape(0.0, hwhm, p.gauss_sigma);
    p.amplitude * voigt_shape(nu - p.center, hwhm, p.gauss_sigma) / peak + p.offset
}

/// Independent route for the Voigt profile: direct Simpson quadrature of the
/// Lorentzian-Gaussian convolution integral. Used to cross-check [`voigt`].
pub fn voigt_by_quadrature(nu: f64, p: &LineshapeParams) -> f64 {
    if p.gauss_sigma == 0.0 {
        return lorentzian(nu, p);
    }
    if p.lorentz_fwhm == 0.0 {
        return gaussian(nu, p);
    }
    let hwhm = p.lorentz_fwhm / 2.0;
    let sigma = p.gauss_sigma;
    let shape = |x: f64| -> f64 {
        // integrate L(x - s) G(s) ds over +-12 sigma
        let half_range = 12.0 * sigma;
        let n = 16_000; // even
        let h = 2.0 * half_range / n as f64;
        let f = |s: f64| {
            let d = x - s;
            (hwhm * hwhm / (d * d + hwhm * hwhm)) * (-s * s / (2.0 * sigma * sigma)).exp()
        };
        let mut acc = f(-half_range) + f(half_range);
        for i in 1..n {
            let s = -half_range + i as f64 * h;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(s);
        }
        acc * h / 3.0
    };
    let peak = shape(0.0);
    p.amplitude * shape(nu - p.center) / peak + p.offset
}

// --- Saturation and power broadening --------------------------------------

/// Saturation curve parameters: asymptotic intensity, saturation power, and
/// the additive linewidth constant `b` (MHz) of the power-broadening law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationParams {
    pub i_inf: f64,
    pub p_sat: f64,
    pub b_offset: f64,
}

impl SaturationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.i_inf > 0.0) || !(self.p_sat > 0.0) || self.b_offset < 0.0 {
            return Err(Error::InvalidParam(
                "saturation needs i_inf > 0, p_sat > 0, b >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// `I(P) = I_inf / (1 + P_sat / P)`.
pub fn saturation_intensity(power: f64, p: &SaturationParams) -> Result<f64> {
    if !(power > 0.0) {
        return Err(Error::InvalidParam(format!(
            "power must be > 0, got {power}"
        )));
    }
    Ok(p.i_inf / (1.0 + p.p_sat / power))
}

/// Rabi frequency from drive power: `Omega(P) = (gamma / sqrt 2) sqrt(P / P_sat)`.
/// `gamma` in radians per second; returns radians per second.
pub fn rabi_from_power(power: f64, p_sat: f64, gamma: f64) -> Result<f64> {
    if power < 0.0 || !(p_sat > 0.0) {
        return Err(Error::InvalidParam(format!(
            "need power >= 0 and p_sat > 0, got {power}, {p_sat}"
        )));
    }
    Ok(gamma / std::f64::consts::SQRT_2 * (power / p_sat).sqrt())
}

/// Power-broadened RF linewidth: `sqrt(Gamma^2 + 2 Omega^2) + b`, computed in
/// angular units and reported in MHz. `omega` in radians per second,
/// `gamma_fwhm` and `b` in MHz.
pub fn power_broadened_fwhm(omega: f64, gamma_fwhm_mhz: f64, b_mhz: f64) -> f64 {
    let gamma = units::mhz_to_angular(gamma_fwhm_mhz);
    units::angular_to_mhz((gamma * gamma + 2.0 * omega * omega).sqrt()) + b_mhz
}

// --- Time-resolved decay with fine-structure beating -----------------------

/// Double-exponential decay with an optional beating term on the fast
/// component, IRF-convolved. Rates in ns^-1, times in ns, beat frequency in
/// GHz (`Delta_FSS / 2pi`).
#[derive(Clone, Copy, Debug)]
pub struct DecayModelParams {
    pub gamma_fast_ns_inv: f64,
    pub gamma_slow_ns_inv: f64,
    pub amp_fast: f64,
    pub amp_slow: f64,
    pub fss_ghz: Option<f64>,
    pub beat_visibility: f64,
    pub beat_phase: f64,
    pub irf: IrfParams,
    pub t0_ns: f64,
}

impl DecayModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_fast_ns_inv > 0.0) || !(self.gamma_slow_ns_inv > 0.0) {
            return Err(Error::InvalidParam("decay rates must be > 0".into()));
        }
        if self.gamma_slow_ns_inv >= self.gamma_fast_ns_inv {
            return Err(Error::InvalidParam(
                "gamma_slow must be < gamma_fast".into(),
            ));
        }
        if self.fss_ghz.is_none() && (self.beat_visibility != 0.0 || self.beat_phase != 0.0) {
            return Err(Error::InvalidParam(
                "beat terms require fss_ghz to be set".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.beat_visibility) {
            return Err(Error::InvalidParam(
                "beat_visibility must be in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Pointwise decay intensity before IRF convolution, `t` in ns.
pub fn decay_intensity(t_ns: f64, p: &DecayModelParams) -> f64 {
    let dt = t_ns - p.t0_ns;
    if dt < 0.0 {
        return 0.0;
    }
    let mut fast = p.amp_fast * (-p.gamma_fast_ns_inv * dt).exp();
    if let Some(fss) = p.fss_ghz {
        // beat period 1/fss ns for fss in GHz
        let phase = 2.0 * std::f64::consts::PI * fss * dt + p.beat_phase;
        fast *= 1.0 + p.beat_visibility * phase.cos();
    }
    fast + p.amp_slow * (-p.gamma_slow_ns_inv * dt).exp()
}

/// Decay curve on a uniform grid (seconds, to match [`IrfParams`]),
/// convolved with the IRF.
pub fn decay_curve(
    p: &DecayModelParams,
    grid: crate::curve::TauGrid,
) -> Result<crate::curve::CorrelationCurve> {
    p.validate()?;
    let values: Vec<f64> = grid.taus().map(|t| decay_intensity(t * 1e9, p)).collect();
    let curve = crate::curve::CorrelationCurve::new(
        grid,
        crate::curve::CurveKind::IntensityDecay,
        values,
    )?;
    irf::convolve_irf(&curve, &p.irf)
}
