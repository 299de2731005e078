//! Resonant-pair yield estimation: probability of two emitters falling
//! within a tuning range, and expected pair counts over a
//! (tuning range, density) grid.

use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};

/// How the total number of candidate pairs scales with emitter count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairConvention {
    /// `(A * rho)^2`, the literal product form.
    #[default]
    SquaredTotal,
    /// `N (N - 1) / 2` distinct unordered pairs.
    Binomial,
}

/// Yield-planning configuration. Wavelengths in nm, areas in um^2, densities
/// in um^-2.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct YieldConfig {
    /// Inhomogeneous wavelength standard deviation (nm).
    pub sigma_nm: f64,
    /// Central wavelength (nm); informational only.
    pub center_nm: f64,
    /// Device area (um^2).
    pub area_um2: f64,
    /// Emitter density (um^-2).
    pub density_per_um2: f64,
    /// Multiplicative penalty in (0, 1] on the pair count.
    pub penalty: f64,
    #[serde(default)]
    pub convention: PairConvention,
}

impl Default for YieldConfig {
    fn default() -> Self {
        YieldConfig {
            sigma_nm: 15.0,
            center_nm: 930.0,
            area_um2: 8.0,
            density_per_um2: 10.0,
            penalty: 0.5,
            convention: PairConvention::SquaredTotal,
        }
    }
}

impl YieldConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_nm > 0.0)
            || !(self.center_nm > 0.0)
            || !(self.area_um2 > 0.0)
            || self.density_per_um2 < 0.0
        {
            return Err(Error::InvalidParam(
                "yield config values must be positive (density >= 0)".into(),
            ));
        }
        if !(self.penalty > 0.0 && self.penalty <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "penalty must be in (0, 1], got {}",
                self.penalty
            )));
        }
        Ok(())
    }
}

/// Probability that two emitters drawn from the Gaussian inhomogeneous
/// distribution differ by at most `delta_lambda`: the half-normal integral,
/// in closed form `erf(delta_lambda / (sigma sqrt 2))`.
pub fn pair_probability(delta_lambda_nm: f64, sigma_nm: f64) -> Result<f64> {
    if delta_lambda_nm < 0.0 || !(sigma_nm > 0.0) {
        return Err(Error::InvalidParam(format!(
            "need delta_lambda >= 0 and sigma > 0, got {delta_lambda_nm}, {sigma_nm}"
        )));
    }
    Ok(erf(delta_lambda_nm / (sigma_nm * std::f64::consts::SQRT_2)))
}

/// Expected resonant pair count: `penalty * P(delta_lambda) * pairs`.
pub fn expected_pairs(config: &YieldConfig, delta_lambda_nm: f64) -> Result<f64> {
    config.validate()?;
    let n_total = config.area_um2 * config.density_per_um2;
    let pairs = match config.convention {
        PairConvention::SquaredTotal => n_total * n_total,
        PairConvention::Binomial => n_total * (n_total - 1.0) / 2.0,
    };
    Ok(config.penalty * pair_probability(delta_lambda_nm, config.sigma_nm)? * pairs.max(0.0))
}

/// A 2D map of expected pair counts over (tuning range, density).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct YieldGrid {
    pub delta_lambda_nm: Vec<f64>,
    pub density_per_um2: Vec<f64>,
    /// `counts[i][j]` for tuning range i, density j.
    pub counts: Vec<Vec<f64>>,
}

impl YieldGrid {
    /// CSV rows `delta_lambda_nm,density_per_um2,expected_pairs`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "delta_lambda_nm,density_per_um2,expected_pairs")?;
        for (i, dl) in self.delta_lambda_nm.iter().enumerate() {
            for (j, rho) in self.density_per_um2.iter().enumerate() {
                writeln!(w, "{dl},{rho},{:.6e}", self.counts[i][j])?;
            }
        }
        Ok(())
    }
}

/// Evaluate [`expected_pairs`] over strictly increasing axes.
pub fn yield_map(
    config: &YieldConfig,
    delta_lambda_axis: &[f64],
    density_axis: &[f64],
) -> Result<YieldGrid> {
    config.validate()?;
    for axis in [delta_lambda_axis, density_axis] {
        if axis.is_empty() || axis.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParam(
                "yield-map axes must be non-empty and strictly increasing".into(),
            ));
        }
    }
    let counts = delta_lambda_axis
        .iter()
        .map(|&dl| {
            density_axis
                .iter()
                .map(|&rho| {
                    let cell = YieldConfig {
                        density_per_um2: rho,
                        ..*config
                    };
                    expected_pairs(&cell, dl)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(YieldGrid {
        delta_lambda_nm: delta_lambda_axis.to_vec(),
        density_per_um2: density_axis.to_vec(),
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probability_limits() {
        assert_eq!(pair_probability(0.0, 15.0).unwrap(), 0.0);
        assert!((pair_probability(1e6, 15.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(pair_probability(-1.0, 15.0).is_err());
        assert!(pair_probability(1.0, 0.0).is_err());
    }

    #[test]
    fn small_argument_expansion() {
        // delta = 0.1 nm, sigma = 15 nm: P ~ sqrt(2/pi) delta/sigma
        let p = pair_probability(0.1, 15.0).unwrap();
        let approx = (2.0 / std::f64::consts::PI).sqrt() * 0.1 / 15.0;
        assert!((p - 5.32e-3).abs() < 1e-5, "{p}");
        assert!((p - approx).abs() / p < 1e-4);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        // Simpson quadrature of the printed integrand
        // (1/sigma) sqrt(2/pi) exp(-l^2 / 2 sigma^2) over [0, dl]
        let sigma = 15.0;
        for dl in [0.05, 0.1, 1.0, 10.0, 40.0] {
            let n = 20_000;
            let h = dl / n as f64;
            let f = |l: f64| {
                (2.0 / std::f64::consts::PI).sqrt() / sigma
                    * (-l * l / (2.0 * sigma * sigma)).exp()
            };
            let mut acc = f(0.0) + f(dl);
            for i in 1..n {
                acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
            }
            let quad = acc * h / 3.0;
            let closed = pair_probability(dl, sigma).unwrap();
            assert!((quad - closed).abs() <= 1e-10, "dl {dl}: {quad} vs {closed}");
        }
    }

    #[test]
    fn probability_monotone_concave_bounded() {
        let mut prev = 0.0;
        let mut prev_slope = f64::INFINITY;
        for i in 1..200 {
            let dl = i as f64 * 0.25;
            let p = pair_probability(dl, 15.0).unwrap();
            assert!(p > prev && p <= 1.0);
            let slope = p - prev;
            assert!(slope < prev_slope);
            prev = p;
            prev_slope = slope;
        }
    }

    #[test]
    fn paper_cell_value() {
        // dl = 0.1 nm, rho = 10 um^-2, A = 8 um^2, penalty 0.5 -> ~17 pairs
        let config = YieldConfig::default();
        let n = expected_pairs(&config, 0.1).unwrap();
        assert!((n - 17.0).abs() < 0.2, "{n}");
        // within a factor of 2 of the quoted ~25
        assert!((12.5..=50.0).contains(&n));
    }

    #[test]
    fn quadratic_scaling_in_density_and_area() {
        let config = YieldConfig::default();
        let base = expected_pairs(&config, 0.1).unwrap();
        let double_rho = YieldConfig {
            density_per_um2: 20.0,
            ..config
        };
        assert!((expected_pairs(&double_rho, 0.1).unwrap() / base - 4.0).abs() < 1e-12);
        let double_area = YieldConfig {
            area_um2: 16.0,
            ..config
        };
        assert!((expected_pairs(&double_area, 0.1).unwrap() / base - 4.0).abs() < 1e-12);
        let empty = YieldConfig {
            density_per_um2: 0.0,
            ..config
        };
        assert_eq!(expected_pairs(&empty, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn linear_regime_at_small_tuning_range() {
        // dl = 1 nm is still << sigma, so counts scale ~10x the 0.1 nm cell
        let config = YieldConfig::default();
        let small = expected_pairs(&config, 0.1).unwrap();
        let large = expected_pairs(&config, 1.0).unwrap();
        assert!((large / small - 10.0).abs() < 0.05, "{}", large / small);
    }

    #[test]
    fn map_monotone_and_consistent() {
        let config = YieldConfig::default();
        let dl_axis = [0.05, 0.1, 0.5, 1.0, 5.0];
        let rho_axis = [1.0, 5.0, 10.0, 20.0];
        let grid = yield_map(&config, &dl_axis, &rho_axis).unwrap();
        // single-cell equality
        let single = yield_map(&config, &[0.1], &[10.0]).unwrap();
        assert_eq!(single.counts[0][0], expected_pairs(&config, 0.1).unwrap());
        // monotone along both axes
        for i in 0..dl_axis.len() {
            for j in 0..rho_axis.len() {
                if i > 0 {
                    assert!(grid.counts[i][j] >= grid.counts[i - 1][j]);
                }
                if j > 0 {
                    assert!(grid.counts[i][j] >= grid.counts[i][j - 1]);
                }
            }
        }
        assert!(yield_map(&config, &[0.2, 0.1], &rho_axis).is_err());
    }

    #[test]
    fn binomial_convention_available() {
        let config = YieldConfig {
            convention: PairConvention::Binomial,
            ..YieldConfig::default()
        };
        let squared = expected_pairs(&YieldConfig::default(), 0.1).unwrap();
        let binom = expected_pairs(&config, 0.1).unwrap();
        // N(N-1)/2 vs N^2 with N = 80
        assert!((binom / squared - (80.0 * 79.0 / 2.0) / 6400.0).abs() < 1e-12);
    }
}
