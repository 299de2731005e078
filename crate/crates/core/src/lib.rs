//! Photon-statistics toolkit for pairs of independently tuned, resonantly
//! driven two-level emitters.
//!
//! The crate models the quantities measured in a two-emitter Hong-Ou-Mandel
//! experiment under continuous-wave resonant excitation:
//!
//! - first- and second-order coherence of a driven two-level system
//!   ([`tls`]), with an independent Bloch-equation oracle ([`bloch`]);
//! - measurement-level g2 curves with bunching, laser impurity and detector
//!   response ([`g2model`], [`irf`]);
//! - cross/co-polarized coincidence correlations, visibility and ensemble
//!   averaging over stochastic mutual detuning ([`hom`]);
//! - spectral and power-domain models: Lorentzian/Gaussian/Voigt lineshapes,
//!   saturation, power broadening, time-resolved decay with fine-structure
//!   beating ([`lineshape`]);
//! - a weighted nonlinear least-squares engine ([`fitting`]);
//! - resonant-pair yield planning over tuning range and emitter density
//!   ([`pair_yield`]).
//!
//! All frequencies are stored internally in radians per second; constructors
//! accept the common lab conventions (linewidths as `nu/2pi` in MHz, decay
//! rates in inverse nanoseconds) and convert.

// `!(x > 0.0)`-style checks are used on purpose: they reject NaN along with
// out-of-range values, which `x <= 0.0` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bloch;
pub mod curve;
pub mod emitter;
pub mod error;
pub mod fitting;
pub mod g2model;
pub mod hom;
pub mod irf;
pub mod lineshape;
pub mod pair_yield;
pub mod tls;
pub mod units;

pub use curve::{CorrelationCurve, CurveKind, TauGrid};
pub use emitter::EmitterParams;
pub use error::{Error, Result};
pub use fitting::{FitProblem, FitResult};
pub use g2model::{impurity_to_g2zero, BunchingEnvelope, MeasuredG2Model};
pub use hom::{Detuning, HomConfig};
pub use irf::IrfParams;
