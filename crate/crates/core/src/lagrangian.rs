//! Adiabatic speed and the brachistochrone Lagrangian.
//!
//! `L_os = ‖𝕃'‖ / |𝒢|² · exp((1/τ) ∫₀^s Re 𝒢)` and its square `L̃ = Q·V` with
//! `V = ‖𝕃'‖²` and `Q = exp((2/τ) ∫ Re 𝒢) / |𝒢|⁴`. Norms are Frobenius norms
//! in the basis representation.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{frobenius, hermitian_eigenvalues};
use crate::liouvillian::{superoperator_derivative, Form, LindbladModel};
use crate::schedule::{uniform_grid, Schedule};
use crate::spectral::{eigenvalues, GapRule, GapSelector};

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianConfig {
    pub tau: f64,
    pub epsilon: f64,
    pub gap: GapRule,
    pub form: Form,
    /// `None`: drop the exponential when `Re 𝒢` vanishes on the grid.
    pub drop_exponential: Option<bool>,
    /// Grid for the cached `∫ Re 𝒢` and for the functional time.
    pub grid_points: usize,
    /// Absolute gap threshold; `None` means `1e-9 · max_s ‖𝕃(s)‖`.
    pub vanish_tol: Option<f64>,
}

impl Default for LagrangianConfig {
    fn default() -> Self {
        Self {
            tau: 1.0,
            epsilon: 1.0,
            gap: GapRule::WidestConjugatePair,
            form: Form::Auto,
            drop_exponential: None,
            grid_points: 1001,
            vanish_tol: None,
        }
    }
}

impl LagrangianConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.grid_points < 3 {
            return Err(Error::InvalidParameter("Lagrangian grid needs at least 3 points".into()));
        }
        if let Some(t) = self.vanish_tol {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter("vanish_tol must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangianValue {
    /// `‖𝕃'‖²`
    pub v: f64,
    /// `exp((2/τ)∫Re 𝒢) / |𝒢|⁴`
    pub q: f64,
    pub l_os: f64,
    /// `Q·V`
    pub l_tilde: f64,
    pub gap: Complex64,
}

/// Gap of `𝕃(q)` under a resolved selector.
pub fn gap_at_drives(
    model: &LindbladModel,
    q: &[f64],
    form: Form,
    selector: &GapSelector,
    s: f64,
) -> Result<Option<Complex64>> {
    let sup = model.superoperator(q, form)?;
    let ev = eigenvalues(&sup)?;
    Ok(selector.select(&ev, s))
}

/// Prepared evaluator: selector resolved, `∫ Re 𝒢` cached on the grid.
#[derive(Debug, Clone)]
pub struct Lagrangian<'a> {
    model: &'a LindbladModel,
    schedule: &'a Schedule,
    config: LagrangianConfig,
    selector: GapSelector,
    vanish_tol: f64,
    drop_exp: bool,
    grid: Vec<f64>,
    gaps: Vec<Complex64>,
    re_integral: Vec<f64>,
}

impl<'a> Lagrangian<'a> {
    pub fn new(model: &'a LindbladModel, schedule: &'a Schedule, config: &LagrangianConfig) -> Result<Self> {
        config.validate()?;
        if schedule.full_dim() != model.arity() {
            return Err(Error::Shape {
                expected: format!("{} drives", model.arity()),
                got: schedule.full_dim().to_string(),
            });
        }
        let selector = config.gap.resolve(model, schedule, config.form)?;
        let grid = uniform_grid(config.grid_points);
        let samples: Vec<(Option<Complex64>, f64)> = grid
            .par_iter()
            .map(|&s| {
                let q = schedule.drives(s)?;
                let sup = model.superoperator(&q, config.form)?;
                let ev = eigenvalues(&sup)?;
                Ok((selector.select(&ev, s), frobenius(&sup.matrix)))
            })
            .collect::<Result<_>>()?;
        let scale = samples.iter().map(|x| x.1).fold(0.0, f64::max);
        let vanish_tol = config.vanish_tol.unwrap_or(1e-9 * scale.max(f64::MIN_POSITIVE));
        let mut gaps = Vec::with_capacity(grid.len());
        for (&s, (g, _)) in grid.iter().zip(&samples) {
            match g {
                Some(g) if g.norm() > vanish_tol => gaps.push(*g),
                Some(g) => return Err(Error::GapCollapse { s, gap: g.norm() }),
                None => return Err(Error::GapCollapse { s, gap: 0.0 }),
            }
        }
        let max_gap = gaps.iter().map(|g| g.norm()).fold(0.0, f64::max);
        let max_re = gaps.iter().map(|g| g.re.abs()).fold(0.0, f64::max);
        let drop_exp = config.drop_exponential.unwrap_or(max_re <= 1e-10 * max_gap);
        let mut re_integral = vec![0.0; grid.len()];
        for i in 1..grid.len() {
            re_integral[i] = re_integral[i - 1] + 0.5 * (grid[i] - grid[i - 1]) * (gaps[i].re + gaps[i - 1].re);
        }
        Ok(Self { model, schedule, config: config.clone(), selector, vanish_tol, drop_exp, grid, gaps, re_integral })
    }

    pub fn selector(&self) -> &GapSelector {
        &self.selector
    }

    pub fn vanish_tol(&self) -> f64 {
        self.vanish_tol
    }

    pub fn drops_exponential(&self) -> bool {
        self.drop_exp
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Gap values on the cached grid.
    pub fn grid_gaps(&self) -> &[Complex64] {
        &self.gaps
    }

    pub fn gap_at(&self, s: f64) -> Result<Complex64> {
        let q = self.schedule.drives(s)?;
        match gap_at_drives(self.model, &q, self.config.form, &self.selector, s)? {
            Some(g) if g.norm() > self.vanish_tol => Ok(g),
            g => Err(Error::GapCollapse { s, gap: g.map_or(0.0, |g| g.norm()) }),
        }
    }

    /// `(1/τ) ∫₀^s Re 𝒢`, linearly interpolated from the grid.
    pub fn exponent_at(&self, s: f64) -> f64 {
        if self.drop_exp {
            return 0.0;
        }
        let n = self.grid.len();
        let i = self.grid.partition_point(|&g| g <= s).clamp(1, n - 1) - 1;
        let t = ((s - self.grid[i]) / (self.grid[i + 1] - self.grid[i])).clamp(0.0, 1.0);
        (self.re_integral[i] * (1.0 - t) + self.re_integral[i + 1] * t) / self.config.tau
    }

    pub fn derivative_norm(&self, s: f64) -> Result<f64> {
        Ok(frobenius(&superoperator_derivative(self.model, self.schedule, s, self.config.form)?.matrix))
    }

    fn value_with_gap(&self, s: f64, gap: Complex64) -> Result<LagrangianValue> {
        let dn = self.derivative_norm(s)?;
        let e = self.exponent_at(s);
        let g2 = gap.norm_sqr();
        let q = (2.0 * e).exp() / (g2 * g2);
        let v = dn * dn;
        Ok(LagrangianValue { v, q, l_os: dn * e.exp() / g2, l_tilde: q * v, gap })
    }

    pub fn value(&self, s: f64) -> Result<LagrangianValue> {
        let g = self.gap_at(s)?;
        self.value_with_gap(s, g)
    }

    pub fn speed(&self, s: f64) -> Result<f64> {
        let val = self.value(s)?;
        if val.l_os == 0.0 {
            return Err(Error::InfiniteSpeed(s));
        }
        Ok(self.config.epsilon / val.l_os)
    }

    /// Trapezoidal `∫₀¹ ds / v`.
    pub fn functional_time(&self) -> Result<f64> {
        let inv: Vec<f64> = self
            .grid
            .par_iter()
            .zip(&self.gaps)
            .map(|(&s, &g)| {
                let val = self.value_with_gap(s, g)?;
                if val.l_os == 0.0 {
                    return Err(Error::InfiniteSpeed(s));
                }
                Ok(val.l_os / self.config.epsilon)
            })
            .collect::<Result<_>>()?;
        Ok(self.grid.windows(2).zip(inv.windows(2)).map(|(s, f)| 0.5 * (s[1] - s[0]) * (f[0] + f[1])).sum())
    }
}

pub fn adiabatic_speed(model: &LindbladModel, schedule: &Schedule, s: f64, config: &LagrangianConfig) -> Result<f64> {
    Lagrangian::new(model, schedule, config)?.speed(s)
}

pub fn lagrangian(
    model: &LindbladModel,
    schedule: &Schedule,
    s: f64,
    config: &LagrangianConfig,
) -> Result<LagrangianValue> {
    Lagrangian::new(model, schedule, config)?.value(s)
}

pub fn functional_time(model: &LindbladModel, schedule: &Schedule, config: &LagrangianConfig) -> Result<f64> {
    Lagrangian::new(model, schedule, config)?.functional_time()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition1 {
    pub holds: bool,
    pub rates_constant: bool,
    /// `max |𝒢(s) − 𝒢̄| / |𝒢̄|`
    pub gap_variation: f64,
    /// `max |Re 𝒢| / |𝒢|`
    pub real_part: f64,
    /// Mean of `L_os / L_cs` when the condition holds.
    pub ratio: Option<f64>,
    /// Relative standard deviation of that ratio over `s`.
    pub ratio_spread: Option<f64>,
}

/// Smallest non-zero level spacing of a Hermitian matrix.
fn hamiltonian_gap(h: &crate::linalg::CMatrix) -> f64 {
    let mut e: Vec<f64> = hermitian_eigenvalues(h).iter().copied().collect();
    e.sort_by(f64::total_cmp);
    let span = (e[e.len() - 1] - e[0]).abs().max(f64::MIN_POSITIVE);
    e.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 1e-9 * span).fold(f64::INFINITY, f64::min)
}

/// Constant rates, constant and purely imaginary gap: then the open and
/// closed Lagrangians differ by a constant factor, reported as `ratio`.
pub fn check_condition1(
    model: &LindbladModel,
    schedule: &Schedule,
    rule: &GapRule,
    form: Form,
    tol: f64,
) -> Result<Condition1> {
    let config = LagrangianConfig { gap: rule.clone(), form, grid_points: 201, ..Default::default() };
    let lag = Lagrangian::new(model, schedule, &config)?;
    let gaps = lag.grid_gaps();
    let n = gaps.len() as f64;
    let mean: Complex64 = gaps.iter().sum::<Complex64>() / n;
    let gap_variation = gaps.iter().map(|g| (g - mean).norm()).fold(0.0, f64::max) / mean.norm();
    let real_part = gaps.iter().map(|g| g.re.abs() / g.norm()).fold(0.0, f64::max);
    // rates are stored as constants in every model
    let rates_constant = true;
    let holds = rates_constant && gap_variation < tol && real_part < tol;
    if !holds {
        return Ok(Condition1 { holds, rates_constant, gap_variation, real_part, ratio: None, ratio_spread: None });
    }
    let mut ratios = Vec::new();
    for (&s, &g) in lag.grid().iter().zip(gaps) {
        let (q, dq) = schedule.drives_at(s)?;
        let h = model.hamiltonian_at(q.as_slice())?;
        let grad = model.hamiltonian().gradient(q.as_slice());
        let mut hp = crate::linalg::CMatrix::zeros(model.dim(), model.dim());
        for (gj, &x) in grad.iter().zip(dq.iter()) {
            hp += gj * Complex64::new(x, 0.0);
        }
        let hn = frobenius(&hp);
        if hn == 0.0 {
            continue;
        }
        let gcs = hamiltonian_gap(&h);
        let l_cs = hn / (gcs * gcs);
        let l_os = lag.value_with_gap(s, g)?.l_os;
        ratios.push(l_os / l_cs);
    }
    if ratios.is_empty() {
        return Err(Error::InfiniteSpeed(0.0));
    }
    let m = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let var = ratios.iter().map(|r| (r - m).powi(2)).sum::<f64>() / ratios.len() as f64;
    Ok(Condition1 {
        holds,
        rates_constant,
        gap_variation,
        real_part,
        ratio: Some(m),
        ratio_spread: Some(var.sqrt() / m.abs()),
    })
}
