//! Frequency-convention helpers.
//!
//! Everything downstream works in angular frequency (radians per second).
//! Lab values come in two conventions: linewidths quoted as `nu = omega/2pi`
//! in MHz, and decay rates quoted in inverse nanoseconds. These helpers make
//! the conversion explicit at every call site.

use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

/// `nu/2pi` in MHz -> radians per second.
pub fn mhz_to_angular(mhz: f64) -> f64 {
    mhz * 1e6 * TWO_PI
}

/// Radians per second -> `nu/2pi` in MHz.
pub fn angular_to_mhz(omega: f64) -> f64 {
    omega / (1e6 * TWO_PI)
}

/// Rate in ns^-1 -> s^-1 (already angular for decay rates).
pub fn per_ns_to_angular(rate: f64) -> f64 {
    rate * 1e9
}

/// s^-1 -> ns^-1.
pub fn angular_to_per_ns(rate: f64) -> f64 {
    rate * 1e-9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decay_rate_conventions_agree() {
        // gamma = 1.46 ns^-1 corresponds to gamma/2pi = 232.4 MHz
        let gamma = per_ns_to_angular(1.46);
        assert!((angular_to_mhz(gamma) - 232.35).abs() < 0.1);
        // round trip
        assert!((angular_to_mhz(mhz_to_angular(233.0)) - 233.0).abs() < 1e-12);
    }
}
