//! Closed-form adiabatic solution of the balanced loss-gain three-level problem.
//!
//! Works in the reduced 8-component coherence vector of the qutrit basis. The
//! generator is block diagonal; the initial state `|0⟩⟨0|` lives entirely in
//! the block spanned by components `{1, 2, 4, 5, 8}`, where the relevant modes
//! are `λ₀ = −3Γ/2` and `λ± = −2Γ ± √(Γ² − 4Ω₀² f₊)` with
//! `f± = f_p² ± f_s²` and `f_{p,s} = Ω_{p,s} / Ω₀`.
//!
//! `ρ_ad(s) = Σ_n c_n exp(τ ∫₀^s λ_n − ∫₀^s ϑ_n) D_n(s)` with `ϑ_n = ⟨E_n|D_n'⟩`.

use num_complex::Complex64;

use crate::basis::{devectorize, CoherenceVector, OperatorBasis};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, I};
use crate::schedule::Schedule;

/// Reduced indices of the block containing the initial state.
pub const BLOCK: [usize; 5] = [0, 1, 3, 4, 7];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StirapAdiabatic {
    gamma: f64,
    omega0: f64,
}

fn csqrt(x: f64) -> Complex64 {
    c(x, 0.0).sqrt()
}

impl StirapAdiabatic {
    pub fn new(gamma: f64, omega0: f64) -> Result<Self> {
        if !(gamma > 0.0) || !(omega0 > 0.0) {
            return Err(Error::InvalidParameter(format!("need gamma > 0 and omega0 > 0, got {gamma}, {omega0}")));
        }
        let (g2, w2) = (gamma * gamma, omega0 * omega0);
        if (16.0 * w2 - 3.0 * g2).abs() <= 1e-12 * (16.0 * w2) {
            return Err(Error::SingularParameter("16 omega0^2 = 3 gamma^2".into()));
        }
        if (g2 - 4.0 * w2).abs() <= 1e-12 * (4.0 * w2) {
            return Err(Error::SingularParameter("gamma^2 = 4 omega0^2".into()));
        }
        Ok(Self { gamma, omega0 })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    fn root(&self, fplus: f64) -> Complex64 {
        csqrt(self.gamma * self.gamma - 4.0 * self.omega0 * self.omega0 * fplus)
    }

    /// `[λ₀, λ₊, λ₋]` for normalized drives.
    pub fn eigenvalues(&self, fp: f64, fs: f64) -> [Complex64; 3] {
        let g = self.gamma;
        let r = self.root(fp * fp + fs * fs);
        [c(-1.5 * g, 0.0), c(-2.0 * g, 0.0) + r, c(-2.0 * g, 0.0) - r]
    }

    /// Right eigenvectors `[D₀, D₊, D₋]` (8 reduced components), scaled so the
    /// eighth component equals `f_s` and the fourth equals `−f_p`.
    pub fn eigenvectors(&self, fp: f64, fs: f64) -> [CVector; 3] {
        let (g, w) = (self.gamma, self.omega0);
        let fm = fp * fp - fs * fs;
        let fpl = fp * fp + fs * fs;
        let s3 = 3f64.sqrt();
        let r = self.root(fpl);
        let mut d0 = CVector::zeros(8);
        d0[0] = I * (2.0 * w * fm / g);
        d0[1] = -I * (2.0 * w * fpl / (s3 * g));
        d0[3] = c(-fp, 0.0);
        d0[4] = I * (4.0 * w * fp * fs / g);
        d0[7] = c(fs, 0.0);
        let mode = |gg: Complex64| {
            let mut d = CVector::zeros(8);
            d[0] = I * (w * fm) / gg;
            d[1] = -I * (s3 * gg / (4.0 * w));
            d[3] = c(-fp, 0.0);
            d[4] = I * (2.0 * w * fp * fs) / gg;
            d[7] = c(fs, 0.0);
            d
        };
        let gminus = c(g, 0.0) - r;
        let gplus = c(g, 0.0) + r;
        [d0, mode(gminus), mode(gplus)]
    }

    /// `[c₀, c₊, c₋]` for `ρ(0) = |0⟩⟨0|` with `f_p(0) = 0`, `f_s(0) = 1`.
    pub fn constants(&self) -> [Complex64; 3] {
        let (g, w) = (self.gamma, self.omega0);
        let den = 16.0 * w * w - 3.0 * g * g;
        let ratio = c(g, 0.0) / csqrt(g * g - 4.0 * w * w);
        let base = -I * (2.0 * g * w / den);
        [I * (8.0 * g * w / den), base * (c(2.0, 0.0) + ratio), base * (c(2.0, 0.0) - ratio)]
    }

    /// Geometric terms `[ϑ₀, ϑ₊, ϑ₋]`; `f₊' = 2(f_p f_p' + f_s f_s')`.
    pub fn phases(&self, fp: f64, fs: f64, dfp: f64, dfs: f64) -> [Complex64; 3] {
        let (g2, w2) = (self.gamma * self.gamma, self.omega0 * self.omega0);
        let fpl = fp * fp + fs * fs;
        let dfpl = 2.0 * (fp * dfp + fs * dfs);
        let r = self.root(fpl);
        let t0 = dfpl * (32.0 * w2 * fpl - 3.0 * g2) / (2.0 * fpl * (16.0 * w2 * fpl - 3.0 * g2));
        let den = (g2 - 4.0 * w2 * fpl) * (3.0 * g2 - 16.0 * w2 * fpl);
        let a = c(32.0 * w2 * fpl - 7.0 * g2, 0.0);
        let b = r * (2.0 * self.gamma);
        [c(t0, 0.0), (a - b) * (w2 * dfpl / den), (a + b) * (w2 * dfpl / den)]
    }

    /// The 5×5 block of the generator at drives `(Ω_p, Ω_s)`, on [`BLOCK`].
    pub fn block_matrix(&self, omega_p: f64, omega_s: f64) -> CMatrix {
        let g = self.gamma;
        let s3 = 3f64.sqrt();
        let (p, s) = (omega_p, omega_s);
        let z = c(0.0, 0.0);
        #[rustfmt::skip]
        let m = CMatrix::from_row_slice(5, 5, &[
            c(-g, 0.0),    z,               I * p,        z,            I * s,
            z,             c(-3.0 * g, 0.0), I * (s3 * p), z,            -I * (s3 * s),
            I * p,         I * (s3 * p),    c(-1.5 * g, 0.0), I * s,    z,
            z,             z,               I * s,        c(-g, 0.0),   -I * p,
            I * s,         -I * (s3 * s),   z,            -I * p,       c(-1.5 * g, 0.0),
        ]);
        m
    }

    /// Left duals `[E₀, E₊, E₋]` with `⟨E_m|D_n⟩ = δ_mn`, as 8-vectors.
    pub fn left_duals(&self, fp: f64, fs: f64) -> Result<[CVector; 3]> {
        let right = self.eigenvectors(fp, fs);
        let blk = self.block_matrix(self.omega0 * fp, self.omega0 * fs);
        let (vals, vecs) = linalg::eigen(&blk)?;
        let lam = self.eigenvalues(fp, fs);
        // the two block eigenvalues not among λ₀, λ±
        let mut others: Vec<usize> = (0..5).collect();
        for l in lam {
            let k = *others
                .iter()
                .min_by(|&&a, &&b| (vals[a] - l).norm().total_cmp(&(vals[b] - l).norm()))
                .expect("five eigenvalues");
            others.retain(|&x| x != k);
        }
        let mut w = CMatrix::zeros(5, 5);
        for (n, d) in right.iter().enumerate() {
            for (i, &b) in BLOCK.iter().enumerate() {
                w[(i, n)] = d[b];
            }
        }
        for (col, &k) in others.iter().enumerate() {
            w.set_column(3 + col, &vecs.column(k));
        }
        let inv = w.try_inverse().ok_or(Error::Defective(f64::INFINITY))?;
        let dual = |n: usize| {
            let mut e = CVector::zeros(8);
            for (i, &b) in BLOCK.iter().enumerate() {
                // ⟨E|x⟩ = Σ conj(E_i) x_i
                e[b] = inv[(n, i)].conj();
            }
            e
        };
        Ok([dual(0), dual(1), dual(2)])
    }

    fn normalized(&self, schedule: &Schedule, s: f64) -> Result<(f64, f64, f64, f64)> {
        let (q, dq) = schedule.drives_at(s)?;
        if q.len() != 2 {
            return Err(Error::Shape { expected: "2 drives (pump, Stokes)".into(), got: q.len().to_string() });
        }
        let w = self.omega0;
        Ok((q[0] / w, q[1] / w, dq[0] / w, dq[1] / w))
    }

    /// `∫₀^s λ_n` and `∫₀^s ϑ_n` by composite Gauss-Legendre quadrature.
    pub fn integrals(&self, schedule: &Schedule, s: f64) -> Result<([Complex64; 3], [Complex64; 3])> {
        const NODES: [f64; 5] =
            [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
        const WEIGHTS: [f64; 5] = [
            0.236_926_885_056_189_1,
            0.478_628_670_499_366_5,
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
        ];
        let panels = ((s * 400.0).ceil() as usize).max(1);
        let h = s / panels as f64;
        let mut lam = [c(0.0, 0.0); 3];
        let mut th = [c(0.0, 0.0); 3];
        for k in 0..panels {
            let mid = (k as f64 + 0.5) * h;
            for (x, wt) in NODES.iter().zip(WEIGHTS) {
                let t = mid + 0.5 * h * x;
                let (fp, fs, dfp, dfs) = self.normalized(schedule, t)?;
                let l = self.eigenvalues(fp, fs);
                let p = self.phases(fp, fs, dfp, dfs);
                for n in 0..3 {
                    lam[n] += l[n] * (0.5 * h * wt);
                    th[n] += p[n] * (0.5 * h * wt);
                }
            }
        }
        Ok((lam, th))
    }

    /// Reduced coherence vector of `ρ_ad(s)`.
    pub fn coherence(&self, schedule: &Schedule, tau: f64, s: f64) -> Result<CVector> {
        let (fp, fs, _, _) = self.normalized(schedule, s)?;
        let d = self.eigenvectors(fp, fs);
        let cn = self.constants();
        let (lam, th) = self.integrals(schedule, s)?;
        let mut v = CVector::zeros(8);
        for n in 0..3 {
            v += &d[n] * (cn[n] * (lam[n] * tau - th[n]).exp());
        }
        Ok(v)
    }

    /// `ρ_ad(s)` as a density matrix.
    pub fn state(&self, basis: &OperatorBasis, schedule: &Schedule, tau: f64, s: f64) -> Result<CMatrix> {
        if basis.dim() != 3 {
            return Err(Error::Shape { expected: "qutrit basis".into(), got: format!("dimension {}", basis.dim()) });
        }
        let v = self.coherence(schedule, tau, s)?;
        devectorize(&CoherenceVector::from_reduced(&v), basis)
    }

    /// Eigenvectors, duals and phases sampled on `grid`.
    pub fn solution(&self, schedule: &Schedule, tau: f64, grid: &[f64]) -> Result<AdiabaticSolution> {
        let mut out = AdiabaticSolution {
            constants: self.constants(),
            grid: grid.to_vec(),
            eigenvalues: Vec::new(),
            right: Vec::new(),
            left: Vec::new(),
            geometric: Vec::new(),
            phases: Vec::new(),
        };
        for &s in grid {
            let (fp, fs, dfp, dfs) = self.normalized(schedule, s)?;
            let lam = self.eigenvalues(fp, fs);
            let th = self.phases(fp, fs, dfp, dfs);
            out.eigenvalues.push(lam);
            out.right.push(self.eigenvectors(fp, fs));
            out.left.push(self.left_duals(fp, fs)?);
            out.geometric.push(th);
            out.phases.push([lam[0] - th[0] / tau, lam[1] - th[1] / tau, lam[2] - th[2] / tau]);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct AdiabaticSolution {
    pub constants: [Complex64; 3],
    pub grid: Vec<f64>,
    pub eigenvalues: Vec<[Complex64; 3]>,
    pub right: Vec<[CVector; 3]>,
    pub left: Vec<[CVector; 3]>,
    /// `ϑ_n(s)`
    pub geometric: Vec<[Complex64; 3]>,
    /// `Θ_n(s) = λ_n − ϑ_n / τ`
    pub phases: Vec<[Complex64; 3]>,
}

impl AdiabaticSolution {
    /// `max |⟨E_m|D_n⟩ − δ_mn|` over the grid.
    pub fn biorthogonality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (l, r) in self.left.iter().zip(&self.right) {
            for (m, lm) in l.iter().enumerate() {
                for (n, rn) in r.iter().enumerate() {
                    let v = lm.dotc(rn);
                    let target = if m == n { 1.0 } else { 0.0 };
                    worst = worst.max((v - c(target, 0.0)).norm());
                }
            }
        }
        worst
    }
}
