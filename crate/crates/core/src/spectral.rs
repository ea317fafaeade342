//! Eigenvalue branches of `𝕃(s)` and gap selection.
//!
//! Branch indices follow the lexicographic `(Re, Im)` order of the eigenvalues
//! at the first grid point; later points are attached by minimum-cost matching.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, frobenius, RMatrix};
use crate::liouvillian::{Form, LindbladModel, Superoperator};
use crate::schedule::{uniform_grid, Schedule};

/// Eigenvalues of a superoperator, checked against its trace.
pub fn eigenvalues(sup: &Superoperator) -> Result<Vec<Complex64>> {
    let ev = linalg::eigenvalues(&sup.matrix)?;
    let sum: Complex64 = ev.iter().sum();
    let tr = sup.matrix.trace();
    let scale = frobenius(&sup.matrix).max(1.0) * sup.side() as f64;
    if (sum - tr).norm() > 1e-9 * scale.max(1.0) {
        return Err(Error::Eigen(format!(
            "eigenvalue sum {sum} differs from trace {tr} (condition {:e})",
            linalg::condition_number(&sup.matrix)
        )));
    }
    Ok(ev)
}

pub fn sorted_eigenvalues(sup: &Superoperator) -> Result<Vec<Complex64>> {
    let mut ev = eigenvalues(sup)?;
    linalg::sort_complex(&mut ev);
    Ok(ev)
}

#[derive(Debug, Clone)]
pub struct SpectralBranches {
    pub grid: Vec<f64>,
    /// `branches[α][i] = λ_α(s_i)`.
    pub branches: Vec<Vec<Complex64>>,
    /// Size of the degenerate cluster each branch belongs to at `s_0`.
    pub multiplicities: Vec<usize>,
    /// `max_s ‖𝕃(s)‖_F`.
    pub scale: f64,
}

impl SpectralBranches {
    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn pair(&self, alpha: usize, beta: usize) -> Vec<Complex64> {
        self.branches[alpha].iter().zip(&self.branches[beta]).map(|(a, b)| a - b).collect()
    }

    pub fn default_vanish_tol(&self) -> f64 {
        1e-9 * self.scale.max(f64::MIN_POSITIVE)
    }
}

fn cluster_sizes(ev: &[Complex64], tol: f64) -> Vec<usize> {
    ev.iter().map(|a| ev.iter().filter(|b| (*a - **b).norm() <= tol).count()).collect()
}

/// Diagonalizes `𝕃(q(s))` on every grid point (in parallel) and links the
/// eigenvalues into continuous branches.
pub fn track_branches(
    model: &LindbladModel,
    schedule: &Schedule,
    grid: &[f64],
    form: Form,
) -> Result<SpectralBranches> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("grid must be non-empty and strictly increasing".into()));
    }
    let points: Vec<(Vec<Complex64>, f64)> = grid
        .par_iter()
        .map(|&s| {
            let q = schedule.drives(s)?;
            let sup = model.superoperator(&q, form)?;
            let ev = eigenvalues(&sup)?;
            Ok((ev, frobenius(&sup.matrix)))
        })
        .collect::<Result<_>>()?;
    let scale = points.iter().map(|p| p.1).fold(0.0, f64::max);
    let degen_tol = 1e-6 * scale.max(f64::MIN_POSITIVE);

    let mut first = points[0].0.clone();
    linalg::sort_complex(&mut first);
    let n = first.len();
    let multiplicities = cluster_sizes(&first, degen_tol);
    let mut branches: Vec<Vec<Complex64>> = first.iter().map(|&l| vec![l]).collect();

    for (i, (ev, _)) in points.iter().enumerate().skip(1) {
        let prev: Vec<Complex64> = branches.iter().map(|b| b[i - 1]).collect();
        let cost = RMatrix::from_fn(n, n, |a, b| (prev[a] - ev[b]).norm());
        let assign = linalg::hungarian(&cost);
        let max_move = assign.iter().enumerate().map(|(a, &b)| cost[(a, b)]).fold(0.0, f64::max);
        let mut min_sep = f64::INFINITY;
        for a in 0..n {
            for b in (a + 1)..n {
                let d = (ev[a] - ev[b]).norm();
                if d > degen_tol {
                    min_sep = min_sep.min(d);
                }
            }
        }
        if max_move > degen_tol && max_move >= 0.5 * min_sep {
            return Err(Error::Resolution { s: grid[i] });
        }
        for (a, &b) in assign.iter().enumerate() {
            branches[a].push(ev[b]);
        }
    }
    Ok(SpectralBranches { grid: grid.to_vec(), branches, multiplicities, scale })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapMode {
    Automatic,
    /// Branch indices `(α, β)`; the gap is `λ_α − λ_β`.
    Explicit(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapPolicy {
    /// Absolute threshold; `None` means `1e-9 · max_s ‖𝕃(s)‖`.
    pub vanish_tol: Option<f64>,
    pub mode: GapMode,
    pub grid_points: usize,
}

impl Default for GapPolicy {
    fn default() -> Self {
        Self { vanish_tol: None, mode: GapMode::Automatic, grid_points: 201 }
    }
}

#[derive(Debug, Clone)]
pub struct GapCurve {
    pub alpha: usize,
    pub beta: usize,
    pub grid: Vec<f64>,
    pub values: Vec<Complex64>,
}

/// Picks one branch pair for the whole schedule.
pub fn min_nonvanishing_gap(branches: &SpectralBranches, policy: &GapPolicy) -> Result<GapCurve> {
    let tol = policy.vanish_tol.unwrap_or_else(|| branches.default_vanish_tol());
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("vanish_tol must be positive".into()));
    }
    let n = branches.len();
    let (alpha, beta) = match policy.mode {
        GapMode::Explicit(a, b) => {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidParameter(format!("gap pair ({a}, {b}) invalid for {n} branches")));
            }
            if branches.pair(a, b).iter().any(|g| g.norm() <= tol) {
                return Err(Error::NoValidGap);
            }
            (a, b)
        }
        GapMode::Automatic => {
            let mut best: Option<(usize, usize, f64, f64)> = None;
            for a in 0..n {
                for b in (a + 1)..n {
                    let g = branches.pair(a, b);
                    let (k, min) = g
                        .iter()
                        .enumerate()
                        .map(|(k, z)| (k, z.norm()))
                        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
                    if min <= tol {
                        continue;
                    }
                    let re = g[k].re.abs();
                    let better = match best {
                        None => true,
                        Some((_, _, bmin, bre)) => {
                            let tie = (min - bmin).abs() <= 1e-9 * bmin;
                            (!tie && min < bmin) || (tie && re > bre + 1e-9 * bmin)
                        }
                    };
                    if better {
                        best = Some((a, b, min, re));
                    }
                }
            }
            let (a, b, _, _) = best.ok_or(Error::NoValidGap)?;
            // orient so that the gap points into the upper half plane at s_0
            let g0 = branches.branches[a][0] - branches.branches[b][0];
            if g0.im < 0.0 || (g0.im == 0.0 && g0.re < 0.0) {
                (b, a)
            } else {
                (a, b)
            }
        }
    };
    Ok(GapCurve { alpha, beta, grid: branches.grid.clone(), values: branches.pair(alpha, beta) })
}

/// How the gap is chosen for Lagrangian evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum GapRule {
    /// Pointwise: the eigenvalue with the largest imaginary part minus the
    /// eigenvalue closest to its conjugate.
    WidestConjugatePair,
    /// A branch pair fixed over the schedule by tracking.
    Tracked(GapPolicy),
}

/// Resolved, pointwise gap evaluator.
#[derive(Debug, Clone)]
pub enum GapSelector {
    WidestConjugatePair,
    Reference(GapCurveReference),
}

/// Branch values of the selected pair, used to pick eigenvalues at new points.
#[derive(Debug, Clone)]
pub struct GapCurveReference {
    pub grid: Vec<f64>,
    pub alpha: Vec<Complex64>,
    pub beta: Vec<Complex64>,
}

fn interp(grid: &[f64], vals: &[Complex64], s: f64) -> Complex64 {
    let n = grid.len();
    if n == 1 {
        return vals[0];
    }
    let i = grid.partition_point(|&g| g <= s).clamp(1, n - 1) - 1;
    let t = ((s - grid[i]) / (grid[i + 1] - grid[i])).clamp(0.0, 1.0);
    vals[i] * (1.0 - t) + vals[i + 1] * t
}

fn nearest(ev: &[Complex64], target: Complex64, skip: Option<usize>) -> Option<usize> {
    ev.iter()
        .enumerate()
        .filter(|(k, _)| Some(*k) != skip)
        .min_by(|a, b| (a.1 - target).norm().total_cmp(&(b.1 - target).norm()))
        .map(|(k, _)| k)
}

impl GapSelector {
    /// Gap for a given eigenvalue list; `None` when no conjugate pair exists.
    pub fn select(&self, ev: &[Complex64], s: f64) -> Option<Complex64> {
        match self {
            GapSelector::WidestConjugatePair => {
                let top = ev.iter().enumerate().max_by(|a, b| a.1.im.total_cmp(&b.1.im).then(b.0.cmp(&a.0)))?.0;
                if ev[top].im <= 0.0 {
                    return None;
                }
                let partner = nearest(ev, ev[top].conj(), Some(top))?;
                Some(ev[top] - ev[partner])
            }
            GapSelector::Reference(r) => {
                let a = nearest(ev, interp(&r.grid, &r.alpha, s), None)?;
                let b = nearest(ev, interp(&r.grid, &r.beta, s), Some(a))?;
                Some(ev[a] - ev[b])
            }
        }
    }
}

impl GapRule {
    pub fn resolve(&self, model: &LindbladModel, schedule: &Schedule, form: Form) -> Result<GapSelector> {
        match self {
            GapRule::WidestConjugatePair => Ok(GapSelector::WidestConjugatePair),
            GapRule::Tracked(policy) => {
                let grid = uniform_grid(policy.grid_points.max(2));
                let br = track_branches(model, schedule, &grid, form)?;
                let g = min_nonvanishing_gap(&br, policy)?;
                Ok(GapSelector::Reference(GapCurveReference {
                    grid,
                    alpha: br.branches[g.alpha].clone(),
                    beta: br.branches[g.beta].clone(),
                }))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalizabilityReport {
    /// 2-norm condition number of the unit-column eigenvector matrix.
    pub condition: f64,
    pub defective: bool,
}

pub fn detect_jordan(sup: &Superoperator, tol: f64) -> Result<DiagonalizabilityReport> {
    let (_, mut vecs) = linalg::eigen(&sup.matrix)?;
    for mut col in vecs.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col.unscale_mut(n);
        }
    }
    let condition = linalg::condition_number(&vecs);
    let condition = if condition.is_finite() { condition } else { f64::INFINITY };
    Ok(DiagonalizabilityReport { condition, defective: condition > 1.0 / tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, CMatrix};

    fn sup(m: CMatrix) -> Superoperator {
        Superoperator { matrix: m, s: None, reduced: false }
    }

    #[test]
    fn zero_matrix_spectrum() {
        let ev = eigenvalues(&sup(CMatrix::zeros(5, 5))).unwrap();
        assert!(ev.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn widest_pair_on_list() {
        let ev = [c(0.0, 0.0), c(-0.2, 0.0), c(-0.1, 0.99), c(-0.1, -0.99)];
        let g = GapSelector::WidestConjugatePair.select(&ev, 0.0).unwrap();
        assert!((g - c(0.0, 1.98)).norm() < 1e-15);
        assert!(GapSelector::WidestConjugatePair.select(&[c(-1.0, 0.0), c(0.0, 0.0)], 0.0).is_none());
    }

    #[test]
    fn jordan_block_is_flagged() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(detect_jordan(&sup(m), 1e-6).unwrap().defective);
        let d = CMatrix::from_diagonal(&crate::linalg::CVector::from_fn(9, |i, _| c(i as f64, 0.5 * i as f64)));
        let r = detect_jordan(&sup(d), 1e-6).unwrap();
        assert!(!r.defective && r.condition < 1.0 + 1e-12);
    }
}
