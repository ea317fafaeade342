//! Euler-Lagrange equations of `L̃ = Q(p) V(p, p')` and their shooting solution.
//!
//! In reduced coordinates `p` (with `q = φ(p)`, Jacobian `J`) the kinetic part
//! is `V = p'ᵀ M p'`, `M = Jᵀ G J`, where `G_jk = Re tr(∂_j𝕃† ∂_k𝕃)`. The
//! equations are linear in `p''`:
//!
//! `2M p'' = ∇ln Q · V + [p'ᵀ ∂_n M p']_n − 2(∇ln Q · p') M p' − 2(Σ_k p'_k ∂_k M) p' − (4/τ) Re 𝒢 · M p'`
//!
//! The last term comes from the exponential factor and is evaluated locally
//! (the running integral `∫ Re 𝒢` is not varied).

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lagrangian::{check_condition1, gap_at_drives, LagrangianConfig};
use crate::linalg::{frobenius, RMatrix, RVector};
use crate::liouvillian::{Form, LindbladModel};
use crate::ode::{integrate, OdeOptions};
use crate::schedule::{uniform_grid, Curve, HermiteCurve, Parametrization, Schedule};
use crate::spectral::GapSelector;

/// Relative finite-difference step for `∂Q/∂p`.
const Q_STEP: f64 = 1e-6;

/// Right-hand side of the Euler-Lagrange system for one model and constraint.
#[derive(Debug, Clone)]
pub struct ElSystem {
    model: LindbladModel,
    param: Parametrization,
    selector: GapSelector,
    form: Form,
    vanish_tol: f64,
    tau: f64,
    drop_exp: bool,
    q_scale: f64,
}

impl ElSystem {
    pub fn new(
        model: LindbladModel,
        param: Parametrization,
        selector: GapSelector,
        form: Form,
        vanish_tol: f64,
        tau: f64,
        drop_exp: bool,
    ) -> Result<Self> {
        param.validate()?;
        if param.full_dim() != model.arity() {
            return Err(Error::Shape {
                expected: format!("{} drives", model.arity()),
                got: param.full_dim().to_string(),
            });
        }
        Ok(Self { model, param, selector, form, vanish_tol, tau, drop_exp, q_scale: 1.0 })
    }

    /// Multiplies `Q` by a constant (the equations are invariant under this).
    pub fn with_q_scale(mut self, q_scale: f64) -> Self {
        self.q_scale = q_scale;
        self
    }

    pub fn model(&self) -> &LindbladModel {
        &self.model
    }

    pub fn gap(&self, p: &RVector, s: f64) -> Result<Complex64> {
        let q = self.param.map(p);
        match gap_at_drives(&self.model, q.as_slice(), self.form, &self.selector, s)? {
            Some(g) if g.norm() > self.vanish_tol => Ok(g),
            _ => Err(Error::SingularPath { s }),
        }
    }

    /// Gap part of `Q`: `q_scale / |𝒢|⁴`.
    pub fn q_gap(&self, p: &RVector, s: f64) -> Result<f64> {
        let g2 = self.gap(p, s)?.norm_sqr();
        Ok(self.q_scale / (g2 * g2))
    }

    fn gram(&self, p: &RVector) -> Result<RMatrix> {
        let q = self.param.map(p);
        self.model.drive_metric(q.as_slice())
    }

    /// `M = Jᵀ G J`.
    pub fn metric(&self, p: &RVector) -> Result<RMatrix> {
        let j = self.param.jacobian(p);
        Ok(j.transpose() * self.gram(p)? * j)
    }

    /// `∂M/∂p_k` for every `k`; `None` when all vanish.
    fn metric_derivatives(&self, p: &RVector) -> Result<Option<Vec<RMatrix>>> {
        let m = p.len();
        let linear_param = !matches!(self.param, Parametrization::Polar { .. });
        if self.model.is_affine() && linear_param {
            return Ok(None);
        }
        let j = self.param.jacobian(p);
        let g = self.gram(p)?;
        let mut out = Vec::with_capacity(m);
        for k in 0..m {
            let mut dm = RMatrix::zeros(m, m);
            if let Some(dj) = self.param.jacobian_derivative(p, k) {
                let a = dj.transpose() * &g * &j;
                dm += &a + a.transpose();
            }
            if !self.model.is_affine() {
                let h = Q_STEP * p[k].abs().max(1.0);
                let mut pp = p.clone();
                let mut pm = p.clone();
                pp[k] += h;
                pm[k] -= h;
                let dg = (self.gram(&pp)? - self.gram(&pm)?) / (2.0 * h);
                dm += j.transpose() * dg * &j;
            }
            out.push(dm);
        }
        Ok(Some(out))
    }

    /// `p''` at `(p, p')`; `s` is only used for error reports and reference-pair lookup.
    pub fn acceleration(&self, p: &RVector, dp: &RVector, s: f64) -> Result<RVector> {
        let m = p.len();
        let gap = self.gap(p, s)?;
        let q0 = self.q_gap(p, s)?;
        let mut dlnq = RVector::zeros(m);
        for k in 0..m {
            let h = Q_STEP * p[k].abs().max(1.0);
            let mut pp = p.clone();
            let mut pm = p.clone();
            pp[k] += h;
            pm[k] -= h;
            dlnq[k] = (self.q_gap(&pp, s)? - self.q_gap(&pm, s)?) / (2.0 * h * q0);
        }
        let mm = self.metric(p)?;
        let mdp = &mm * dp;
        let v = dp.dot(&mdp);
        let mut rhs = &dlnq * v - &mdp * (2.0 * dlnq.dot(dp));
        if let Some(dm) = self.metric_derivatives(p)? {
            let mut mix = RVector::zeros(m);
            for k in 0..m {
                rhs[k] += dp.dot(&(&dm[k] * dp));
                mix += &dm[k] * dp * dp[k];
            }
            rhs -= mix * 2.0;
        }
        if !self.drop_exp {
            rhs -= &mdp * (4.0 * gap.re / self.tau);
        }
        let trace = mm.trace();
        let chol = (trace > 0.0).then(|| mm.clone().cholesky()).flatten().ok_or(Error::DegenerateDrive)?;
        let min_eig = mm.clone().symmetric_eigenvalues().min();
        if min_eig <= 1e-12 * trace {
            return Err(Error::DegenerateDrive);
        }
        Ok(chol.solve(&rhs) / 2.0)
    }
}

/// `p''` for a model, constraint and Lagrangian configuration at one point.
pub fn assemble_el_rhs(
    model: &LindbladModel,
    config: &LagrangianConfig,
    param: &Parametrization,
    p: &RVector,
    dp: &RVector,
    s: f64,
) -> Result<RVector> {
    config.validate()?;
    let trial = Schedule::from_fn(param.clone(), {
        let (p, dp) = (p.clone(), dp.clone());
        move |_| (p.clone(), dp.clone())
    })?;
    let selector = config.gap.resolve(model, &trial, config.form)?;
    let q = param.map(p);
    let scale = frobenius(&model.superoperator(q.as_slice(), config.form)?.matrix);
    let tol = config.vanish_tol.unwrap_or(1e-9 * scale.max(f64::MIN_POSITIVE));
    let drop = config.drop_exponential.unwrap_or(false);
    ElSystem::new(model.clone(), param.clone(), selector, config.form, tol, config.tau, drop)?.acceleration(p, dp, s)
}

/// Smallest ratio `min |G| / max |G|` on the linear ramp accepted by the shooter.
pub const GAP_CONDITION: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct BvpOptions {
    pub grid_points: usize,
    /// Relative boundary miss accepted as converged.
    pub tol: f64,
    pub max_iter: usize,
    pub ode: OdeOptions,
    /// Constant multiplying `Q`.
    pub q_scale: f64,
    /// Solve the closed counterpart when Condition 1 holds on the linear ramp.
    pub use_condition1: bool,
    pub initial_slope: Option<RVector>,
}

impl Default for BvpOptions {
    fn default() -> Self {
        Self {
            grid_points: 1001,
            tol: 1e-8,
            max_iter: 60,
            ode: OdeOptions::default(),
            q_scale: 1.0,
            use_condition1: true,
            initial_slope: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BvpSolution {
    pub schedule: Schedule,
    /// Relative boundary miss `|p(1) − p₁| / |p₁ − p₀|` of the final shot.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Whether the closed-system counterpart was solved instead.
    pub closed_system: bool,
    pub initial_slope: RVector,
}

impl BvpSolution {
    /// Reduced-coordinate samples on the output grid.
    pub fn samples(&self) -> Vec<(f64, RVector)> {
        match self.schedule.curve() {
            Curve::Hermite(h) => h.grid().iter().copied().zip(h.values().iter().cloned()).collect(),
            Curve::Function(_) => Vec::new(),
        }
    }
}

struct Shooter<'a> {
    sys: &'a ElSystem,
    p0: RVector,
    ode: OdeOptions,
    /// Shots that wander farther than this from `p0` are abandoned.
    bound: f64,
}

impl Shooter<'_> {
    fn run(&self, v0: &RVector, t_out: &[f64]) -> Result<Vec<Vec<f64>>> {
        let m = self.p0.len();
        let mut y0 = self.p0.as_slice().to_vec();
        y0.extend_from_slice(v0.as_slice());
        let sys = self.sys;
        let (ys, _) = integrate(
            |s, y, d| {
                let p = RVector::from_column_slice(&y[..m]);
                if y.iter().any(|x| !x.is_finite()) || (&p - &self.p0).norm() > self.bound {
                    return Err(Error::SingularPath { s });
                }
                let dp = RVector::from_column_slice(&y[m..]);
                let acc = sys.acceleration(&p, &dp, s)?;
                d[..m].copy_from_slice(&y[m..]);
                d[m..].copy_from_slice(acc.as_slice());
                Ok(())
            },
            0.0,
            &y0,
            t_out,
            &self.ode,
        )?;
        Ok(ys)
    }

    fn endpoint(&self, v0: &RVector) -> Result<RVector> {
        let ys = self.run(v0, &[1.0])?;
        Ok(RVector::from_column_slice(&ys[0][..self.p0.len()]))
    }
}

fn is_recoverable(e: &Error) -> bool {
    matches!(
        e,
        Error::SingularPath { .. } | Error::Stiffness { .. } | Error::DegenerateDrive | Error::GapCollapse { .. }
    )
}

/// Shooting solution of the Dirichlet problem `p(0) = p0`, `p(1) = p1` in the
/// reduced coordinates of `param`.
pub fn solve_bvp(
    model: &LindbladModel,
    config: &LagrangianConfig,
    boundary: (&RVector, &RVector),
    param: &Parametrization,
    opts: &BvpOptions,
) -> Result<BvpSolution> {
    config.validate()?;
    param.validate()?;
    let (p0, p1) = (boundary.0.clone(), boundary.1.clone());
    let m = param.reduced_dim();
    if p0.len() != m || p1.len() != m {
        return Err(Error::Shape {
            expected: format!("{m} reduced coordinates"),
            got: format!("{} and {}", p0.len(), p1.len()),
        });
    }
    if model.arity() != param.full_dim() {
        return Err(Error::Shape { expected: format!("{} drives", model.arity()), got: param.full_dim().to_string() });
    }
    if opts.grid_points < 3 {
        return Err(Error::InvalidParameter("output grid needs at least 3 points".into()));
    }
    let span = (&p1 - &p0).norm();
    if span == 0.0 {
        return Err(Error::InvalidParameter("boundary values coincide".into()));
    }
    let trial = Schedule::linear(param.clone(), p0.clone(), p1.clone())?;

    let mut closed_system = false;
    let mut work_model = model.clone();
    if opts.use_condition1 && !model.dissipators().is_empty() {
        if let Ok(c1) = check_condition1(model, &trial, &config.gap, config.form, 1e-9) {
            if c1.holds {
                work_model = model.closed_counterpart()?;
                closed_system = true;
            }
        }
    }

    // selector, gap threshold and exponential handling from the linear ramp
    let probe_cfg = LagrangianConfig { grid_points: 101, ..config.clone() };
    let probe = crate::lagrangian::Lagrangian::new(&work_model, &trial, &probe_cfg).map_err(|e| match e {
        Error::GapCollapse { s, .. } => Error::SingularPath { s },
        e => e,
    })?;
    // a gap this small puts Q = |G|^-4 beyond what the shooting ODE can resolve
    let gaps = probe.grid_gaps();
    let max_gap = gaps.iter().map(|g| g.norm()).fold(0.0, f64::max);
    if let Some((k, _)) = gaps.iter().enumerate().find(|(_, g)| g.norm() < GAP_CONDITION * max_gap) {
        return Err(Error::SingularPath { s: probe.grid()[k] });
    }
    let sys = ElSystem::new(
        work_model.clone(),
        param.clone(),
        probe.selector().clone(),
        config.form,
        probe.vanish_tol(),
        config.tau,
        probe.drops_exponential(),
    )?
    .with_q_scale(opts.q_scale);

    let shooter = Shooter { sys: &sys, p0: p0.clone(), ode: opts.ode, bound: 1e3 * span };
    let miss = |v: &RVector| -> Result<RVector> { Ok(shooter.endpoint(v)? - &p1) };
    let rel = |r: &RVector| r.norm() / span;

    let mut v = opts.initial_slope.clone().unwrap_or_else(|| &p1 - &p0);
    let mut f = miss(&v)?;
    let mut iterations = 0;
    let mut prev: Option<(RVector, RVector)> = None;
    while rel(&f) > opts.tol && iterations < opts.max_iter {
        iterations += 1;
        let step = if m == 1 {
            match &prev {
                Some((vp, fp)) if (f[0] - fp[0]).abs() > 0.0 => {
                    RVector::from_element(1, -f[0] * (v[0] - vp[0]) / (f[0] - fp[0]))
                }
                _ => {
                    let h = 1e-4 * v[0].abs().max(span);
                    let fh = miss(&RVector::from_element(1, v[0] + h))?;
                    let d = (fh[0] - f[0]) / h;
                    if d == 0.0 {
                        return Err(Error::NoConvergence { iterations, residual: rel(&f) });
                    }
                    RVector::from_element(1, -f[0] / d)
                }
            }
        } else {
            let mut jac = RMatrix::zeros(m, m);
            for k in 0..m {
                let h = 1e-6 * v[k].abs().max(span);
                let mut vh = v.clone();
                vh[k] += h;
                let fh = miss(&vh)?;
                jac.set_column(k, &((fh - &f) / h));
            }
            jac.lu().solve(&(-&f)).ok_or(Error::NoConvergence { iterations, residual: rel(&f) })?
        };
        // damped update: halve until the shot succeeds and the miss does not blow up
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let cand = &v + &step * lambda;
            match miss(&cand) {
                Ok(fc) if m == 1 || rel(&fc) < rel(&f) * (1.0 - 1e-4 * lambda) || lambda < 1e-3 => {
                    accepted = Some((cand, fc));
                    break;
                }
                Ok(_) => lambda *= 0.5,
                Err(e) if is_recoverable(&e) => lambda *= 0.5,
                Err(e) => return Err(e),
            }
        }
        let Some((vn, fnew)) = accepted else {
            return Err(Error::NoConvergence { iterations, residual: rel(&f) });
        };
        prev = Some((v, f));
        v = vn;
        f = fnew;
    }
    let residual = rel(&f);
    let converged = residual <= opts.tol;
    if !converged {
        return Err(Error::NoConvergence { iterations, residual });
    }

    let grid = uniform_grid(opts.grid_points);
    let ys = shooter.run(&v, &grid)?;
    let mut values: Vec<RVector> = ys.iter().map(|y| RVector::from_column_slice(&y[..m])).collect();
    let slopes: Vec<RVector> = ys.iter().map(|y| RVector::from_column_slice(&y[m..])).collect();
    values[0] = p0;
    *values.last_mut().expect("grid is non-empty") = p1;
    let curve = HermiteCurve::new(grid, values, slopes)?;
    Ok(BvpSolution {
        schedule: Schedule::new(Curve::Hermite(curve), param.clone())?,
        residual,
        iterations,
        converged,
        closed_system,
        initial_slope: v,
    })
}

/// Closed-form brachistochrone of the dephasing qubit under `Ω_x + Ω_y = Ω_0`,
/// parametrized by `Ω_y`.
pub fn analytic_qubit_sum_constraint(omega0: f64, gamma: f64) -> Result<Schedule> {
    if !(omega0 > 0.0) || !(gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!("need omega0 > 0 and gamma >= 0, got {omega0}, {gamma}")));
    }
    let a = omega0 * omega0 - 2.0 * gamma * gamma;
    if a.abs() <= 1e-12 * omega0 * omega0 {
        return Err(Error::SingularParameter("omega0^2 = 2 gamma^2".into()));
    }
    let w = a.abs().sqrt();
    let param = Parametrization::sum_second(omega0);
    if a > 0.0 {
        let theta = (omega0 / w).atan();
        Schedule::from_fn(param, move |s| {
            let x = (1.0 - 2.0 * s) * theta;
            let t = x.tan();
            let p = 0.5 * omega0 - 0.5 * w * t;
            let dp = w * theta * (1.0 + t * t);
            (RVector::from_element(1, p), RVector::from_element(1, dp))
        })
    } else {
        // below the exceptional line the geodesic is the hyperbolic continuation
        if omega0 >= w {
            return Err(Error::SingularParameter("schedule crosses the exceptional point".into()));
        }
        let theta = (omega0 / w).atanh();
        Schedule::from_fn(param, move |s| {
            let x = (1.0 - 2.0 * s) * theta;
            let t = x.tanh();
            let p = 0.5 * omega0 - 0.5 * w * t;
            let dp = w * theta * (1.0 - t * t);
            (RVector::from_element(1, p), RVector::from_element(1, dp))
        })
    }
}

/// `Ω_x = Ω_0 cos(πs/2)`, `Ω_y = Ω_0 sin(πs/2)`, on the polar constraint.
pub fn analytic_constant_power(omega0: f64) -> Result<Schedule> {
    if !(omega0 > 0.0) {
        return Err(Error::InvalidParameter(format!("omega0 must be positive, got {omega0}")));
    }
    Schedule::from_fn(Parametrization::Polar { radius: omega0 }, |s| {
        (RVector::from_element(1, FRAC_PI_2 * s), RVector::from_element(1, FRAC_PI_2))
    })
}
