//! Master-equation propagation and state metrics.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::{devectorize, vectorize, CoherenceVector};
use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigenvalues, sqrt_psd, CMatrix, CVector};
use crate::liouvillian::LindbladModel;
use crate::ode::{integrate, OdeOptions};
use crate::schedule::{uniform_grid, Schedule};

/// Eigenvalues below this are rejected; eigenvalues in `[-PSD_TOL, 0)` count as zero.
pub const PSD_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Schedule points `s`; physical time is `τ s`.
    pub times: Vec<f64>,
    pub states: Vec<CMatrix>,
    pub tau: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &CMatrix {
        self.states.last().expect("trajectory is non-empty")
    }
}

fn check_density(rho: &CMatrix, dim: usize) -> Result<()> {
    if rho.shape() != (dim, dim) {
        return Err(Error::Shape { expected: format!("{dim}x{dim}"), got: format!("{}x{}", rho.nrows(), rho.ncols()) });
    }
    let tr = rho.trace();
    if (tr - c(1.0, 0.0)).norm() > 1e-8 {
        return Err(Error::Trace(tr.re));
    }
    if !crate::linalg::is_hermitian(rho, 1e-8) {
        return Err(Error::InvalidState("matrix is not Hermitian".into()));
    }
    let min = hermitian_eigenvalues(rho).min();
    if min < -PSD_TOL {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
    }
    Ok(())
}

fn pack(v: &CVector) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn unpack(y: &[f64]) -> CVector {
    CVector::from_iterator(y.len() / 2, y.chunks(2).map(|p| c(p[0], p[1])))
}

fn propagate(
    model: &LindbladModel,
    schedule: &Schedule,
    tau: f64,
    rho0: &CMatrix,
    grid: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<CMatrix>> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    check_density(rho0, model.dim())?;
    let v0 = vectorize(rho0, model.basis())?;
    let n = v0.coefficients.len();
    let y0 = pack(&v0.coefficients);
    let (ys, _) = integrate(
        |s, y, d| {
            let q = schedule.drives(s)?;
            let l = model.full_matrix(&q)? * c(tau, 0.0);
            let v = unpack(y);
            let dv = l * v;
            for k in 0..n {
                d[2 * k] = dv[k].re;
                d[2 * k + 1] = dv[k].im;
            }
            Ok(())
        },
        0.0,
        &y0,
        grid,
        opts,
    )?;
    ys.iter().map(|y| devectorize(&CoherenceVector { coefficients: unpack(y) }, model.basis())).collect()
}

fn propagation_options() -> OdeOptions {
    OdeOptions { rtol: 1e-9, atol: 1e-12, ..Default::default() }
}

/// Propagates `ρ₀` with `dϱ/ds = τ 𝕃(q(s)) ϱ` and stores `n_steps + 1` states.
pub fn integrate_master_equation(
    model: &LindbladModel,
    schedule: &Schedule,
    tau: f64,
    rho0: &CMatrix,
    n_steps: usize,
) -> Result<Trajectory> {
    let times = uniform_grid(n_steps.max(1) + 1);
    let states = propagate(model, schedule, tau, rho0, &times, &propagation_options())?;
    Ok(Trajectory { times, states, tau })
}

/// State at `s = 1` only.
pub fn final_state(model: &LindbladModel, schedule: &Schedule, tau: f64, rho0: &CMatrix) -> Result<CMatrix> {
    let mut out = propagate(model, schedule, tau, rho0, &[1.0], &propagation_options())?;
    Ok(out.pop().expect("one output"))
}

fn psd_sqrt(rho: &CMatrix) -> Result<CMatrix> {
    sqrt_psd(rho, PSD_TOL)
}

/// `1 − tr √(√ρ_f ρ √ρ_f)`.
pub fn infidelity(rho_f: &CMatrix, rho: &CMatrix) -> Result<f64> {
    if rho_f.shape() != rho.shape() {
        return Err(Error::Shape {
            expected: format!("{}x{}", rho_f.nrows(), rho_f.ncols()),
            got: format!("{}x{}", rho.nrows(), rho.ncols()),
        });
    }
    check_density(rho_f, rho_f.nrows())?;
    check_density(rho, rho.nrows())?;
    let r = psd_sqrt(rho_f)?;
    let inner = &r * rho * &r;
    let f: f64 = hermitian_eigenvalues(&inner).iter().map(|e| e.max(0.0).sqrt()).sum();
    Ok((1.0 - f).clamp(0.0, 1.0))
}

/// `½ Σ` singular values of `ρ₁ − ρ₂`.
pub fn trace_distance(rho1: &CMatrix, rho2: &CMatrix) -> Result<f64> {
    if rho1.shape() != rho2.shape() {
        return Err(Error::Shape {
            expected: format!("{}x{}", rho1.nrows(), rho1.ncols()),
            got: format!("{}x{}", rho2.nrows(), rho2.ncols()),
        });
    }
    Ok(0.5 * (rho1 - rho2).singular_values().sum())
}

/// Target state, possibly depending on the total time.
pub trait TargetState: Sync {
    fn at(&self, tau: f64) -> Result<CMatrix>;
}

impl TargetState for CMatrix {
    fn at(&self, _tau: f64) -> Result<CMatrix> {
        Ok(self.clone())
    }
}

impl<F> TargetState for F
where
    F: Fn(f64) -> Result<CMatrix> + Sync,
{
    fn at(&self, tau: f64) -> Result<CMatrix> {
        self(tau)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TauScan {
    pub tau_min: f64,
    pub tau_max: f64,
    pub points: usize,
    /// Relative width at which bisection stops.
    pub rel_tol: f64,
}

impl Default for TauScan {
    fn default() -> Self {
        Self { tau_min: 1.0, tau_max: 200.0, points: 160, rel_tol: 1e-3 }
    }
}

fn log_grid(scan: &TauScan) -> Vec<f64> {
    let n = scan.points.max(2);
    let (a, b) = (scan.tau_min.ln(), scan.tau_max.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Infidelity of the propagated endpoint against the target, for one `τ`.
pub fn infidelity_at(
    model: &LindbladModel,
    schedule: &Schedule,
    rho0: &CMatrix,
    target: &dyn TargetState,
    tau: f64,
) -> Result<f64> {
    let rho = final_state(model, schedule, tau, rho0)?;
    infidelity(&target.at(tau)?, &rho)
}

/// First `τ` on a log scan at which the infidelity drops below `target_inf`,
/// refined by bisection.
pub fn time_to_infidelity(
    model: &LindbladModel,
    schedule: &Schedule,
    rho0: &CMatrix,
    target: &dyn TargetState,
    target_inf: f64,
    scan: &TauScan,
) -> Result<f64> {
    if !(target_inf > 0.0) {
        return Err(Error::InvalidParameter(format!("target infidelity must be positive, got {target_inf}")));
    }
    if target_inf >= 1.0 {
        return Ok(0.0);
    }
    if !(scan.tau_min > 0.0 && scan.tau_max > scan.tau_min) {
        return Err(Error::InvalidParameter("tau scan needs 0 < tau_min < tau_max".into()));
    }
    let taus = log_grid(scan);
    let values: Vec<f64> =
        taus.par_iter().map(|&t| infidelity_at(model, schedule, rho0, target, t)).collect::<Result<_>>()?;
    let Some(k) = values.iter().position(|&v| v < target_inf) else {
        return Err(Error::Unreachable { target: target_inf, tau_max: scan.tau_max });
    };
    if k == 0 {
        return Ok(taus[0]);
    }
    let (mut lo, mut hi) = (taus[k - 1], taus[k]);
    while (hi - lo) > scan.rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if infidelity_at(model, schedule, rho0, target, mid)? < target_inf {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `τ_B / τ_A − 1` with `A` the candidate and `B` the baseline.
#[allow(clippy::too_many_arguments)]
pub fn gain(
    model: &LindbladModel,
    candidate: &Schedule,
    baseline: &Schedule,
    rho0: &CMatrix,
    target_a: &dyn TargetState,
    target_b: &dyn TargetState,
    target_inf: f64,
    scan: &TauScan,
) -> Result<f64> {
    let ta = time_to_infidelity(model, candidate, rho0, target_a, target_inf, scan)?;
    let tb = time_to_infidelity(model, baseline, rho0, target_b, target_inf, scan)?;
    Ok(tb / ta - 1.0)
}

/// Pure-state projector `|ψ⟩⟨ψ|` (normalized).
pub fn projector(psi: &CVector) -> CMatrix {
    let n = psi.norm();
    let v = psi / Complex64::new(n, 0.0);
    &v * v.adjoint()
}

pub fn basis_projector(dim: usize, k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(k, k)] = c(1.0, 0.0);
    m
}
