//! Sampled correlation curves on uniform time-delay grids.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What a curve's samples represent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveKind {
    #[serde(rename = "G1_raw")]
    G1Raw,
    #[serde(rename = "g1_normalized")]
    G1Normalized,
    #[serde(rename = "g2")]
    G2,
    #[serde(rename = "g2_cross")]
    G2Cross,
    #[serde(rename = "g2_parallel")]
    G2Parallel,
    #[serde(rename = "visibility")]
    Visibility,
    #[serde(rename = "intensity_decay")]
    IntensityDecay,
}

impl CurveKind {
    fn is_g2_family(self) -> bool {
        matches!(self, CurveKind::G2 | CurveKind::G2Cross | CurveKind::G2Parallel)
    }
}

/// A uniform time-delay grid: `tau_i = start + i * step`, `i in 0..n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TauGrid {
    pub start: f64,
    pub step: f64,
    pub n: usize,
}

impl TauGrid {
    /// Grid from 0 to `tau_max` inclusive-ish with the given step.
    pub fn from_zero(tau_max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(tau_max > 0.0) {
            return Err(Error::InvalidParam(format!(
                "grid needs tau_max > 0 and step > 0, got {tau_max}, {step}"
            )));
        }
        let n = (tau_max / step).round() as usize + 1;
        Ok(TauGrid { start: 0.0, step, n })
    }

    /// Symmetric grid centered on tau = 0, spanning [-tau_max, tau_max].
    /// Always has an odd number of points so that tau = 0 is sampled.
    pub fn symmetric(tau_max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(tau_max > 0.0) {
            return Err(Error::InvalidParam(format!(
                "grid needs tau_max > 0 and step > 0, got {tau_max}, {step}"
            )));
        }
        let half = (tau_max / step).round() as usize;
        Ok(TauGrid {
            start: -(half as f64) * step,
            step,
            n: 2 * half + 1,
        })
    }

    pub fn tau(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn taus(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.tau(i))
    }

    /// Index of the tau = 0 sample, if the grid contains one.
    pub fn center_index(&self) -> Option<usize> {
        let i = (-self.start / self.step).round();
        if i < 0.0 {
            return None;
        }
        let i = i as usize;
        (i < self.n && self.tau(i).abs() < 1e-9 * self.step.max(1e-300)).then_some(i)
    }

    /// True when the grid is symmetric about tau = 0.
    pub fn is_symmetric(&self) -> bool {
        self.n % 2 == 1
            && (self.start + (self.n as f64 - 1.0) / 2.0 * self.step).abs()
                < 1e-9 * self.step
    }

    pub fn same_as(&self, other: &TauGrid) -> bool {
        self.n == other.n
            && (self.start - other.start).abs() <= 1e-9 * self.step
            && (self.step - other.step).abs() <= 1e-12 * self.step
    }
}

/// A correlation (or intensity) curve sampled on a uniform delay grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCurve {
    pub tau_start: f64,
    pub tau_step: f64,
    pub kind: CurveKind,
    pub values: Vec<f64>,
}

impl CorrelationCurve {
    pub fn new(grid: TauGrid, kind: CurveKind, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParam("curve values must be non-empty".into()));
        }
        if values.len() != grid.n {
            return Err(Error::GridMismatch(format!(
                "grid has {} points but {} values supplied",
                grid.n,
                values.len()
            )));
        }
        if !(grid.step > 0.0) {
            return Err(Error::InvalidParam("tau_step must be > 0".into()));
        }
        let mut values = values;
        // clamp sub-epsilon range violations from roundoff, reject real ones
        for v in values.iter_mut() {
            if kind.is_g2_family() {
                if *v < -1e-9 {
                    return Err(Error::InvalidParam(format!(
                        "g2-family value {v} is negative"
                    )));
                }
                *v = v.max(0.0);
            } else if kind == CurveKind::G1Normalized {
                if *v < -1e-9 || *v > 1.0 + 1e-9 {
                    return Err(Error::InvalidParam(format!(
                        "|g1| value {v} outside [0, 1]"
                    )));
                }
                *v = v.clamp(0.0, 1.0);
            }
        }
        Ok(CorrelationCurve {
            tau_start: grid.start,
            tau_step: grid.step,
            kind,
            values,
        })
    }

    pub fn grid(&self) -> TauGrid {
        TauGrid {
            start: self.tau_start,
            step: self.tau_step,
            n: self.values.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn tau(&self, i: usize) -> f64 {
        self.tau_start + i as f64 * self.tau_step
    }

    /// Value at tau = 0; requires the grid to contain that sample.
    pub fn value_at_zero(&self) -> Result<f64> {
        let i = self
            .grid()
            .center_index()
            .ok_or_else(|| Error::GridMismatch("grid has no tau = 0 sample".into()))?;
        Ok(self.values[i])
    }

    /// Write as two-column CSV with header `tau_s,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "tau_s,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{:.12e},{:.12e}", self.tau(i), v)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    /// Maximum absolute asymmetry |v(-tau) - v(+tau)| over a symmetric grid.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.values.len();
        (0..n / 2)
            .map(|i| (self.values[i] - self.values[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }
}
