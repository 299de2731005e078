//! Parameters of a single resonantly driven two-level emitter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units;

/// A driven two-level emitter: radiative decay rate, Rabi frequency, slow
/// spectral-diffusion width and laser impurity.
///
/// All frequencies are angular (radians per second). Use the `from_*`
/// constructors to feed in lab conventions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmitterParams {
    gamma: f64,
    omega: f64,
    sigma_diffusion: f64,
    impurity: f64,
}

impl EmitterParams {
    /// Build from angular frequencies (radians per second).
    pub fn new(gamma: f64, omega: f64) -> Result<Self> {
        let p = EmitterParams {
            gamma,
            omega,
            sigma_diffusion: 0.0,
            impurity: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Build from a linewidth `gamma/2pi` in MHz and a Rabi frequency given
    /// as a multiple of `gamma`.
    pub fn from_linewidth_mhz(gamma_over_2pi_mhz: f64, omega_ratio: f64) -> Result<Self> {
        let gamma = units::mhz_to_angular(gamma_over_2pi_mhz);
        Self::new(gamma, omega_ratio * gamma)
    }

    /// Build from a decay rate in ns^-1 and a Rabi frequency as a multiple of
    /// `gamma`.
    pub fn from_decay_ns_inv(gamma_ns_inv: f64, omega_ratio: f64) -> Result<Self> {
        let gamma = units::per_ns_to_angular(gamma_ns_inv);
        Self::new(gamma, omega_ratio * gamma)
    }

    /// Set the slow spectral-diffusion standard deviation from `sigma/2pi` in
    /// MHz.
    pub fn with_diffusion_mhz(mut self, sigma_mhz: f64) -> Result<Self> {
        self.sigma_diffusion = units::mhz_to_angular(sigma_mhz);
        self.validate()?;
        Ok(self)
    }

    /// Set the laser impurity `xi` (fraction of detected light that is
    /// leaked laser).
    pub fn with_impurity(mut self, xi: f64) -> Result<Self> {
        self.impurity = xi;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidParam(format!(
                "gamma must be > 0, got {}",
                self.gamma
            )));
        }
        if !(self.omega >= 0.0) || !self.omega.is_finite() {
            return Err(Error::InvalidParam(format!(
                "omega must be >= 0, got {}",
                self.omega
            )));
        }
        if !(self.sigma_diffusion >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "sigma_diffusion must be >= 0, got {}",
                self.sigma_diffusion
            )));
        }
        if !(0.0..1.0).contains(&self.impurity) {
            return Err(Error::InvalidParam(format!(
                "impurity must be in [0, 1), got {}",
                self.impurity
            )));
        }
        Ok(())
    }

    /// Radiative decay rate, radians per second.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Rabi frequency, radians per second.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Slow spectral-diffusion standard deviation, radians per second.
    pub fn sigma_diffusion(&self) -> f64 {
        self.sigma_diffusion
    }

    /// Laser impurity `xi` in [0, 1).
    pub fn impurity(&self) -> f64 {
        self.impurity
    }
}
