//! Optical-Bloch-equation oracle for the closed-form coherence functions.
//!
//! Integrates the resonant two-level master equation with a fixed-step RK4
//! scheme, finds the steady state, and applies the quantum regression theorem
//! to produce first- and second-order correlation functions. This path shares
//! no algebra with [`crate::tls`] and is used to validate it.

use num_complex::Complex64;

use crate::curve::{CorrelationCurve, CurveKind, TauGrid};
use crate::emitter::EmitterParams;
use crate::error::{Error, Result};

type C = Complex64;

/// 2x2 complex matrix in the {|g>, |e>} basis, row-major.
#[derive(Clone, Copy, Debug)]
struct M2([C; 4]);

impl M2 {
    fn zero() -> Self {
        M2([C::new(0.0, 0.0); 4])
    }

    fn mul(&self, other: &M2) -> M2 {
        let a = &self.0;
        let b = &other.0;
        M2([
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ])
    }

    fn add(&self, other: &M2) -> M2 {
        let mut r = M2::zero();
        for i in 0..4 {
            r.0[i] = self.0[i] + other.0[i];
        }
        r
    }

    fn scale(&self, s: C) -> M2 {
        let mut r = M2::zero();
        for i in 0..4 {
            r.0[i] = self.0[i] * s;
        }
        r
    }

    fn trace(&self) -> C {
        self.0[0] + self.0[3]
    }

    fn max_abs_diff(&self, other: &M2) -> f64 {
        (0..4)
            .map(|i| (self.0[i] - other.0[i]).norm())
            .fold(0.0, f64::max)
    }
}

fn sigma_minus() -> M2 {
    // |g><e|
    let mut m = M2::zero();
    m.0[1] = C::new(1.0, 0.0);
    m
}

fn sigma_plus() -> M2 {
    // |e><g|
    let mut m = M2::zero();
    m.0[2] = C::new(1.0, 0.0);
    m
}

fn ground_projector() -> M2 {
    let mut m = M2::zero();
    m.0[0] = C::new(1.0, 0.0);
    m
}

/// Right-hand side of the master equation in the rotating frame at resonance:
/// `dm/dt = -i [H, m] + gamma (s- m s+ - 1/2 {s+ s-, m})`, H = (omega/2)(s+ + s-).
fn master_rhs(gamma: f64, omega: f64, m: &M2) -> M2 {
    let half = C::new(omega / 2.0, 0.0);
    let mut h = M2::zero();
    h.0[1] = half;
    h.0[2] = half;

    let comm = h.mul(m).add(&m.mul(&h).scale(C::new(-1.0, 0.0)));
    let mut out = comm.scale(C::new(0.0, -1.0));

    let sp = sigma_plus();
    let sm = sigma_minus();
    let jump = sm.mul(m).mul(&sp);
    let num = sp.mul(&sm); // |e><e|
    let anti = num.mul(m).add(&m.mul(&num));
    out = out.add(&jump.scale(C::new(gamma, 0.0)));
    out = out.add(&anti.scale(C::new(-gamma / 2.0, 0.0)));
    out
}

fn rk4_step(gamma: f64, omega: f64, m: &M2, h: f64) -> M2 {
    let k1 = master_rhs(gamma, omega, m);
    let k2 = master_rhs(gamma, omega, &m.add(&k1.scale(C::new(h / 2.0, 0.0))));
    let k3 = master_rhs(gamma, omega, &m.add(&k2.scale(C::new(h / 2.0, 0.0))));
    let k4 = master_rhs(gamma, omega, &m.add(&k3.scale(C::new(h, 0.0))));
    let incr = k1
        .add(&k2.scale(C::new(2.0, 0.0)))
        .add(&k3.scale(C::new(2.0, 0.0)))
        .add(&k4)
        .scale(C::new(h / 6.0, 0.0));
    m.add(&incr)
}

/// Maximum RK4 step for the given drive: 1/200 of the fastest timescale.
fn max_step(params: &EmitterParams) -> f64 {
    let gamma = params.gamma();
    let omega = params.omega();
    let t_fast = if omega > 0.0 {
        (1.0 / gamma).min(1.0 / omega)
    } else {
        1.0 / gamma
    };
    t_fast / 200.0
}

/// Integrate from the ground state until the density matrix stops moving.
fn steady_state(params: &EmitterParams) -> Result<M2> {
    let gamma = params.gamma();
    let omega = params.omega();
    let h = max_step(params);
    let mut rho = ground_projector();
    let block = 200usize;
    let max_blocks = ((2000.0 / gamma) / (h * block as f64)).ceil() as usize;
    let mut prev = rho;
    for b in 0..max_blocks.max(1) {
        for _ in 0..block {
            rho = rk4_step(gamma, omega, &rho, h);
        }
        if rho.max_abs_diff(&prev) < 1e-13 && b > 0 {
            return Ok(rho);
        }
        prev = rho;
    }
    Err(Error::SteadyState(format!(
        "no convergence after t = {:.3e} s with step {:.3e} s (residual {:.3e})",
        2000.0 / gamma,
        h,
        rho.max_abs_diff(&prev)
    )))
}

/// Evolve an initial regression matrix over the grid, recording
/// `Tr[observable * X(tau)]` at every grid point.
fn regress(
    params: &EmitterParams,
    grid: TauGrid,
    x0: M2,
    observable: &M2,
) -> Result<Vec<C>> {
    if grid.start != 0.0 {
        return Err(Error::GridMismatch(
            "oracle grid must start at tau = 0".into(),
        ));
    }
    let gamma = params.gamma();
    let omega = params.omega();
    let h_max = max_step(params);
    let substeps = (grid.step / h_max).ceil().max(1.0) as usize;
    let h = grid.step / substeps as f64;

    let mut x = x0;
    let mut out = Vec::with_capacity(grid.n);
    out.push(observable.mul(&x).trace());
    for _ in 1..grid.n {
        for _ in 0..substeps {
            x = rk4_step(gamma, omega, &x, h);
        }
        out.push(observable.mul(&x).trace());
    }
    Ok(out)
}

/// First- and second-order correlation functions from the quantum regression
/// theorem, normalized so that `g1(0) = 1` and `g2(infinity) -> 1`.
///
/// Returns `(g1, g2)` on the given grid (which must start at tau = 0).
/// Also checks the analytic steady-state population on the way out.
pub fn bloch_oracle(
    params: &EmitterParams,
    grid: TauGrid,
) -> Result<(CorrelationCurve, CorrelationCurve)> {
    let rho = steady_state(params)?;
    let pop = rho.0[3].re; // <e|rho|e>
    if params.omega() > 0.0 && pop <= 0.0 {
        return Err(Error::SteadyState(format!(
            "steady-state population {pop} is not positive"
        )));
    }

    let sp = sigma_plus();
    let sm = sigma_minus();

    // G1(tau) = Tr[s+ X(tau)], X(0) = s- rho_ss
    let g1_raw = regress(params, grid, sm.mul(&rho), &sp)?;
    // G2(tau) = Tr[s+ s- X(tau)], X(0) = s- rho_ss s+
    let g2_raw = regress(params, grid, sm.mul(&rho).mul(&sp), &sp.mul(&sm))?;

    let g1_values: Vec<f64> = g1_raw.iter().map(|v| (v / pop).norm()).collect();
    let g2_values: Vec<f64> = g2_raw.iter().map(|v| (v.re / (pop * pop)).max(0.0)).collect();

    let g1 = CorrelationCurve::new(grid, CurveKind::G1Normalized, g1_values)?;
    let g2 = CorrelationCurve::new(grid, CurveKind::G2, g2_values)?;
    Ok((g1, g2))
}

/// Steady-state excited population from the integrator (for diagnostics and
/// cross-checks against the analytic value).
pub fn oracle_steady_population(params: &EmitterParams) -> Result<f64> {
    Ok(steady_state(params)?.0[3].re)
}
