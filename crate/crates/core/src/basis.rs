//! Orthogonal operator bases and coherence vectors.
//!
//! A basis holds the identity `σ_0` plus `D²−1` traceless elements with
//! `tr(σ_n σ_m†) = d δ_nm`. Coherence vectors carry all `D²` coefficients
//! `ϱ_n = tr(ρ σ_n†)`, so `ϱ_0 = tr ρ`.

use crate::error::{Error, Result};
use crate::linalg::{c, hs_inner, kron, vec_row_major, CMatrix, CVector};

#[derive(Debug, Clone)]
pub struct OperatorBasis {
    dim: usize,
    norm: f64,
    /// `σ_0 = 𝟙` followed by the traceless elements.
    elements: Vec<CMatrix>,
    /// Columns are row-major `vec(σ_l)`.
    vec_matrix: CMatrix,
}

fn unit(dim: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(i, j)] = c(1.0, 0.0);
    m
}

fn pauli() -> [CMatrix; 3] {
    let o = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        CMatrix::from_row_slice(2, 2, &[o, one, one, o]),
        CMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        CMatrix::from_row_slice(2, 2, &[one, o, o, -one]),
    ]
}

/// Three-level layout used for the balanced loss-gain problem: two diagonal
/// elements, then for each pair (0,1), (0,2), (1,2) the symmetric and the
/// antisymmetric (anti-Hermitian) combination.
fn qutrit_elements() -> Vec<CMatrix> {
    let s3 = 3f64.sqrt();
    let mut out = vec![
        CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])),
        CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0 / s3, 0.0), c(-2.0 / s3, 0.0), c(1.0 / s3, 0.0)])),
    ];
    for (j, k) in [(0, 1), (0, 2), (1, 2)] {
        out.push(unit(3, j, k) + unit(3, k, j));
        out.push(unit(3, j, k) - unit(3, k, j));
    }
    out
}

/// Generalized Gell-Mann matrices (norm 2): symmetric and antisymmetric pairs, then diagonals.
pub fn gell_mann(dim: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(dim * dim - 1);
    for j in 0..dim {
        for k in (j + 1)..dim {
            out.push(unit(dim, j, k) + unit(dim, k, j));
            out.push((unit(dim, j, k) - unit(dim, k, j)) * c(0.0, -1.0));
        }
    }
    for l in 1..dim {
        let f = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(dim, dim);
        for j in 0..l {
            m[(j, j)] = c(f, 0.0);
        }
        m[(l, l)] = c(-(l as f64) * f, 0.0);
        out.push(m);
    }
    out
}

impl OperatorBasis {
    /// Default basis of side `dim`: Pauli order (x, y, z) for a qubit, the
    /// symmetric/antisymmetric qutrit layout for `D = 3`, Gell-Mann otherwise.
    pub fn new(dim: usize, norm: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidParameter(format!("basis norm must be positive, got {norm}")));
        }
        let raw = match dim {
            2 => pauli().to_vec(),
            3 => qutrit_elements(),
            _ => gell_mann(dim),
        };
        let scale = c((norm / 2.0).sqrt(), 0.0);
        Self::from_elements(dim, raw.into_iter().map(|m| m * scale).collect())
    }

    /// `{𝟙, X, Y, Z}^{⊗n}` without the all-identity product; norm `2^n`.
    pub fn pauli_product(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidDimension(1));
        }
        let single: Vec<CMatrix> = std::iter::once(CMatrix::identity(2, 2)).chain(pauli()).collect();
        let mut products = vec![CMatrix::identity(1, 1)];
        for _ in 0..n_qubits {
            products = products.iter().flat_map(|p| single.iter().map(move |s| kron(p, s))).collect();
        }
        Self::from_elements(1 << n_qubits, products.into_iter().skip(1).collect())
    }

    /// Validates trace, orthogonality and common norm of the supplied traceless elements.
    pub fn from_elements(dim: usize, traceless: Vec<CMatrix>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if traceless.len() != dim * dim - 1 {
            return Err(Error::Shape {
                expected: format!("{} basis elements", dim * dim - 1),
                got: traceless.len().to_string(),
            });
        }
        for m in &traceless {
            if m.shape() != (dim, dim) {
                return Err(Error::Shape {
                    expected: format!("{dim}x{dim}"),
                    got: format!("{}x{}", m.nrows(), m.ncols()),
                });
            }
        }
        let norm = hs_inner(&traceless[0], &traceless[0]).re;
        let tol = 1e-12 * norm.max(1.0);
        for (n, a) in traceless.iter().enumerate() {
            if a.trace().norm() > tol {
                return Err(Error::InvalidParameter(format!("basis element {} is not traceless", n + 1)));
            }
            for (m, b) in traceless.iter().enumerate().skip(n) {
                let expect = if n == m { norm } else { 0.0 };
                if (hs_inner(b, a) - c(expect, 0.0)).norm() > tol {
                    return Err(Error::InvalidParameter(format!(
                        "basis elements {} and {} are not orthogonal with common norm",
                        n + 1,
                        m + 1
                    )));
                }
            }
        }
        let mut elements = Vec::with_capacity(dim * dim);
        elements.push(CMatrix::identity(dim, dim));
        elements.extend(traceless);
        let mut vec_matrix = CMatrix::zeros(dim * dim, dim * dim);
        for (l, e) in elements.iter().enumerate() {
            vec_matrix.set_column(l, &vec_row_major(e));
        }
        Ok(Self { dim, norm, elements, vec_matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Number of coefficients including the identity, `D²`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Element `n`; `n = 0` is the identity.
    pub fn element(&self, n: usize) -> &CMatrix {
        &self.elements[n]
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    /// `tr(σ_n σ_n†)`: `D` for the identity, `d` otherwise.
    pub fn element_norm(&self, n: usize) -> f64 {
        if n == 0 {
            self.dim as f64
        } else {
            self.norm
        }
    }

    pub(crate) fn vec_matrix(&self) -> &CMatrix {
        &self.vec_matrix
    }

    /// Coefficients `tr(X σ_n†)` of an arbitrary operator.
    pub fn coefficients(&self, x: &CMatrix) -> Result<CVector> {
        self.check_square(x)?;
        Ok(self.vec_matrix.ad_mul(&vec_row_major(x)))
    }

    /// `X = Σ ϱ_n σ_n / tr(σ_n σ_n†)`.
    pub fn reconstruct(&self, v: &CVector) -> Result<CMatrix> {
        if v.len() != self.len() {
            return Err(Error::Shape { expected: self.len().to_string(), got: v.len().to_string() });
        }
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (n, e) in self.elements.iter().enumerate() {
            out += e * (v[n] / self.element_norm(n));
        }
        Ok(out)
    }

    fn check_square(&self, x: &CMatrix) -> Result<()> {
        if x.shape() != (self.dim, self.dim) {
            return Err(Error::Shape {
                expected: format!("{0}x{0}", self.dim),
                got: format!("{}x{}", x.nrows(), x.ncols()),
            });
        }
        Ok(())
    }
}

/// Expansion coefficients of a density matrix; entry 0 is the identity coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceVector {
    pub coefficients: CVector,
}

impl CoherenceVector {
    /// Traceless part only (entries `1..D²`).
    pub fn reduced(&self) -> CVector {
        self.coefficients.rows(1, self.coefficients.len() - 1).into_owned()
    }

    /// Rebuilds a full vector from its traceless part with unit trace.
    pub fn from_reduced(reduced: &CVector) -> Self {
        let mut v = CVector::zeros(reduced.len() + 1);
        v[0] = c(1.0, 0.0);
        v.rows_mut(1, reduced.len()).copy_from(reduced);
        Self { coefficients: v }
    }
}

pub fn vectorize(rho: &CMatrix, basis: &OperatorBasis) -> Result<CoherenceVector> {
    basis.check_square(rho)?;
    let tr = rho.trace();
    if (tr - c(1.0, 0.0)).norm() > 1e-10 {
        return Err(Error::Trace(tr.re));
    }
    if !crate::linalg::is_hermitian(rho, 1e-10) {
        return Err(Error::InvalidState("density matrix is not Hermitian".into()));
    }
    Ok(CoherenceVector { coefficients: basis.coefficients(rho)? })
}

pub fn devectorize(v: &CoherenceVector, basis: &OperatorBasis) -> Result<CMatrix> {
    basis.reconstruct(&v.coefficients)
}
