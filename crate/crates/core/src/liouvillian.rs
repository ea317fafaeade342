//! Lindblad models and their superoperator matrices in an operator basis.
//!
//! Entries follow `𝕃_kl = tr(σ_k† 𝓛[σ_l]) / tr(σ_l σ_l†)`, which is the `1/d`
//! convention for traceless columns and makes `𝕃 ϱ` the coefficient vector of `𝓛[ρ]`.
//! Matrices are assembled in row-major vec space first, where
//! `vec(A X B) = (A ⊗ Bᵀ) vec(X)`, and then projected onto the basis.

use std::fmt;
use std::sync::Arc;

use crate::basis::OperatorBasis;
use crate::error::{Error, Result};
use crate::linalg::{anticommutator, c, commutator, dagger, frobenius, is_hermitian, kron, CMatrix, I};

pub type MatrixFn = Arc<dyn Fn(&[f64]) -> CMatrix + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&[f64]) -> Vec<CMatrix> + Send + Sync>;

/// Finite-difference step for Hamiltonians without an analytic gradient.
pub const FD_STEP: f64 = 1e-6;

#[derive(Clone)]
pub enum Hamiltonian {
    /// `H(q) = H_c + Σ_j q_j H_j`.
    Affine { constant: CMatrix, terms: Vec<CMatrix> },
    /// Arbitrary smooth map with optional gradient `[∂H/∂q_j]`.
    Smooth { arity: usize, value: MatrixFn, gradient: Option<GradientFn> },
}

impl fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hamiltonian::Affine { terms, .. } => write!(f, "Affine({} terms)", terms.len()),
            Hamiltonian::Smooth { arity, gradient, .. } => {
                write!(f, "Smooth(arity {arity}, gradient: {})", gradient.is_some())
            }
        }
    }
}

impl Hamiltonian {
    pub fn arity(&self) -> usize {
        match self {
            Hamiltonian::Affine { terms, .. } => terms.len(),
            Hamiltonian::Smooth { arity, .. } => *arity,
        }
    }

    pub fn at(&self, q: &[f64]) -> CMatrix {
        match self {
            Hamiltonian::Affine { constant, terms } => {
                let mut h = constant.clone();
                for (t, &x) in terms.iter().zip(q) {
                    h += t * c(x, 0.0);
                }
                h
            }
            Hamiltonian::Smooth { value, .. } => value(q),
        }
    }

    pub fn gradient(&self, q: &[f64]) -> Vec<CMatrix> {
        match self {
            Hamiltonian::Affine { terms, .. } => terms.clone(),
            Hamiltonian::Smooth { gradient: Some(g), .. } => g(q),
            Hamiltonian::Smooth { arity, value, .. } => (0..*arity)
                .map(|j| {
                    let h = FD_STEP * q[j].abs().max(1.0);
                    let mut qp = q.to_vec();
                    let mut qm = q.to_vec();
                    qp[j] += h;
                    qm[j] -= h;
                    (value(&qp) - value(&qm)) / c(2.0 * h, 0.0)
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dissipator {
    pub rate: f64,
    pub operator: CMatrix,
}

impl Dissipator {
    pub fn new(rate: f64, operator: CMatrix) -> Self {
        Self { rate, operator }
    }
}

/// Which representation to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    /// Side `D²`, identity row and column kept.
    Full,
    /// Side `D²−1`; requires `𝓛[𝟙] = 0`.
    Reduced,
    /// Reduced when the generator is unital, full otherwise.
    Auto,
}

#[derive(Debug, Clone)]
pub struct Superoperator {
    pub matrix: CMatrix,
    pub s: Option<f64>,
    pub reduced: bool,
}

impl Superoperator {
    pub fn side(&self) -> usize {
        self.matrix.nrows()
    }
}

#[derive(Debug, Clone)]
pub struct LindbladModel {
    dim: usize,
    hamiltonian: Hamiltonian,
    dissipators: Vec<Dissipator>,
    basis: Arc<OperatorBasis>,
    /// Dissipative part in basis coordinates, plus the constant Hamiltonian for affine models.
    fixed: CMatrix,
    /// `∂𝕃/∂q_j` for affine models.
    terms: Vec<CMatrix>,
}

fn vec_commutator(h: &CMatrix) -> CMatrix {
    let id = CMatrix::identity(h.nrows(), h.ncols());
    (kron(h, &id) - kron(&id, &h.transpose())) * (-I)
}

fn vec_dissipator(d: &Dissipator) -> CMatrix {
    let l = &d.operator;
    let n = l.nrows();
    let id = CMatrix::identity(n, n);
    let ll = dagger(l) * l;
    (kron(l, &l.conjugate()) - (kron(&ll, &id) + kron(&id, &ll.transpose())) * c(0.5, 0.0)) * c(d.rate, 0.0)
}

impl LindbladModel {
    pub fn new(hamiltonian: Hamiltonian, dissipators: Vec<Dissipator>, basis: OperatorBasis) -> Result<Self> {
        Self::with_shared_basis(hamiltonian, dissipators, Arc::new(basis))
    }

    pub fn with_shared_basis(
        hamiltonian: Hamiltonian,
        dissipators: Vec<Dissipator>,
        basis: Arc<OperatorBasis>,
    ) -> Result<Self> {
        let dim = basis.dim();
        let shape_err = |m: &CMatrix| Error::Shape {
            expected: format!("{dim}x{dim}"),
            got: format!("{}x{}", m.nrows(), m.ncols()),
        };
        for d in &dissipators {
            if d.operator.shape() != (dim, dim) {
                return Err(shape_err(&d.operator));
            }
            if !(d.rate >= 0.0) || !d.rate.is_finite() {
                return Err(Error::InvalidParameter(format!("dissipator rate must be >= 0, got {}", d.rate)));
            }
        }
        let mut fixed_vec = CMatrix::zeros(dim * dim, dim * dim);
        for d in &dissipators {
            fixed_vec += vec_dissipator(d);
        }
        let mut terms = Vec::new();
        match &hamiltonian {
            Hamiltonian::Affine { constant, terms: hs } => {
                for h in std::iter::once(constant).chain(hs.iter()) {
                    if h.shape() != (dim, dim) {
                        return Err(shape_err(h));
                    }
                    if !is_hermitian(h, 1e-12 * frobenius(h).max(1.0)) {
                        return Err(Error::InvalidParameter("Hamiltonian term is not Hermitian".into()));
                    }
                }
                fixed_vec += vec_commutator(constant);
                terms = hs.iter().map(|h| to_basis(&basis, &vec_commutator(h))).collect();
            }
            Hamiltonian::Smooth { arity, value, .. } => {
                let h = value(&vec![0.0; *arity]);
                if h.shape() != (dim, dim) {
                    return Err(shape_err(&h));
                }
            }
        }
        let fixed = to_basis(&basis, &fixed_vec);
        Ok(Self { dim, hamiltonian, dissipators, basis, fixed, terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn arity(&self) -> usize {
        self.hamiltonian.arity()
    }

    pub fn basis(&self) -> &OperatorBasis {
        &self.basis
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn dissipators(&self) -> &[Dissipator] {
        &self.dissipators
    }

    pub fn is_affine(&self) -> bool {
        matches!(self.hamiltonian, Hamiltonian::Affine { .. })
    }

    /// Same Hamiltonian with every dissipator removed.
    pub fn closed_counterpart(&self) -> Result<Self> {
        Self::with_shared_basis(self.hamiltonian.clone(), Vec::new(), self.basis.clone())
    }

    fn check_q(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.arity() {
            return Err(Error::Shape { expected: format!("{} drives", self.arity()), got: q.len().to_string() });
        }
        Ok(())
    }

    pub fn hamiltonian_at(&self, q: &[f64]) -> Result<CMatrix> {
        self.check_q(q)?;
        Ok(self.hamiltonian.at(q))
    }

    /// `−i[H(q), ρ] + Σ γ (L ρ L† − ½{L†L, ρ})`.
    pub fn apply_generator(&self, q: &[f64], rho: &CMatrix) -> Result<CMatrix> {
        self.check_q(q)?;
        if rho.shape() != (self.dim, self.dim) {
            return Err(Error::Shape {
                expected: format!("{0}x{0}", self.dim),
                got: format!("{}x{}", rho.nrows(), rho.ncols()),
            });
        }
        let h = self.hamiltonian.at(q);
        let mut out = commutator(&h, rho) * (-I);
        for d in &self.dissipators {
            let l = &d.operator;
            let ll = dagger(l) * l;
            out += (l * rho * dagger(l) - anticommutator(&ll, rho) * c(0.5, 0.0)) * c(d.rate, 0.0);
        }
        Ok(out)
    }

    /// Full `D²` matrix at drive vector `q`.
    pub fn full_matrix(&self, q: &[f64]) -> Result<CMatrix> {
        self.check_q(q)?;
        Ok(match &self.hamiltonian {
            Hamiltonian::Affine { .. } => {
                let mut m = self.fixed.clone();
                for (t, &x) in self.terms.iter().zip(q) {
                    m += t * c(x, 0.0);
                }
                m
            }
            Hamiltonian::Smooth { value, .. } => &self.fixed + to_basis(&self.basis, &vec_commutator(&value(q))),
        })
    }

    pub fn superoperator(&self, q: &[f64], form: Form) -> Result<Superoperator> {
        let full = self.full_matrix(q)?;
        reduce(full, form, None)
    }

    /// `∂𝕃/∂q_j` in the full basis representation (Hamiltonian part only).
    pub fn drive_derivatives(&self, q: &[f64]) -> Result<Vec<CMatrix>> {
        self.check_q(q)?;
        Ok(match &self.hamiltonian {
            Hamiltonian::Affine { .. } => self.terms.clone(),
            h => h.gradient(q).iter().map(|g| to_basis(&self.basis, &vec_commutator(g))).collect(),
        })
    }

    /// Directional derivative `Σ_j dq_j ∂𝕃/∂q_j`, full form.
    pub fn directional_derivative(&self, q: &[f64], dq: &[f64]) -> Result<CMatrix> {
        self.check_q(dq)?;
        let n = self.dim * self.dim;
        let mut out = CMatrix::zeros(n, n);
        match &self.hamiltonian {
            Hamiltonian::Affine { .. } => {
                for (t, &x) in self.terms.iter().zip(dq) {
                    out += t * c(x, 0.0);
                }
            }
            h => {
                self.check_q(q)?;
                let grad = h.gradient(q);
                let mut hp = CMatrix::zeros(self.dim, self.dim);
                for (g, &x) in grad.iter().zip(dq) {
                    hp += g * c(x, 0.0);
                }
                out = to_basis(&self.basis, &vec_commutator(&hp));
            }
        }
        Ok(out)
    }

    /// Norm of `𝓛[𝟙]` at `q`.
    pub fn unitality_defect(&self, q: &[f64]) -> Result<f64> {
        let m = self.full_matrix(q)?;
        Ok(m.column(0).norm())
    }

    /// Hilbert-Schmidt Gram matrix `G_jk = Re tr(∂_j𝕃† ∂_k𝕃)`.
    pub fn drive_metric(&self, q: &[f64]) -> Result<crate::linalg::RMatrix> {
        let d = self.drive_derivatives(q)?;
        let m = d.len();
        Ok(crate::linalg::RMatrix::from_fn(m, m, |j, k| crate::linalg::hs_inner(&d[j], &d[k]).re))
    }
}

/// `d𝕃/ds` along a schedule: `Σ_j q_j'(s) ∂𝕃/∂q_j` (rates are constant).
pub fn superoperator_derivative(
    model: &LindbladModel,
    schedule: &crate::schedule::Schedule,
    s: f64,
    form: Form,
) -> Result<Superoperator> {
    let (q, dq) = schedule.drives_at(s)?;
    let d = model.directional_derivative(q.as_slice(), dq.as_slice())?;
    let matrix = match form {
        Form::Full => d,
        Form::Reduced | Form::Auto => {
            let n = d.nrows() - 1;
            d.view((1, 1), (n, n)).into_owned()
        }
    };
    let reduced = form != Form::Full;
    Ok(Superoperator { matrix, s: Some(s), reduced })
}

/// Projects a vec-space operator onto the basis: `S† 𝕃_vec S diag(1/‖σ_l‖²)`.
fn to_basis(basis: &OperatorBasis, lvec: &CMatrix) -> CMatrix {
    let s = basis.vec_matrix();
    let mut m = s.ad_mul(&(lvec * s));
    for l in 0..m.ncols() {
        let n = basis.element_norm(l);
        m.column_mut(l).scale_mut(1.0 / n);
    }
    m
}

/// Drops the identity row/column when requested and allowed.
pub fn reduce(full: CMatrix, form: Form, s: Option<f64>) -> Result<Superoperator> {
    let scale = frobenius(&full).max(1.0);
    let defect = full.column(0).norm();
    let unital = defect <= 1e-12 * scale;
    let reduced = match form {
        Form::Full => false,
        Form::Reduced if !unital => return Err(Error::NonUnital(defect)),
        Form::Reduced => true,
        Form::Auto => unital,
    };
    let matrix = if reduced {
        let n = full.nrows() - 1;
        full.view((1, 1), (n, n)).into_owned()
    } else {
        full
    };
    Ok(Superoperator { matrix, s, reduced })
}
