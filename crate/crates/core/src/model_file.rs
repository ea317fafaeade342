//! JSON model documents.
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "drive_arity": 2,
//!   "basis_norm": 2.0,
//!   "hamiltonian_terms": [
//!     {"coefficient": 0, "matrix": [[0,0],[0.5,0],[0.5,0],[0,0]]},
//!     {"coefficient": "constant", "matrix": [[1,0],[0,0],[0,0],[-1,0]]}
//!   ],
//!   "dissipators": [{"rate": 0.1, "matrix": [[1,0],[0,0],[0,0],[-1,0]]}]
//! }
//! ```
//! Matrices are row-major lists of `[re, im]` pairs. `basis_norm` is optional.

use serde::{Deserialize, Serialize};

use crate::basis::OperatorBasis;
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};
use crate::liouvillian::{Dissipator, Hamiltonian, LindbladModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Drive(usize),
    Constant(ConstantTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantTag {
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub coefficient: Coefficient,
    pub matrix: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissipatorSpec {
    pub rate: f64,
    pub matrix: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub dimension: usize,
    pub drive_arity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_norm: Option<f64>,
    pub hamiltonian_terms: Vec<TermSpec>,
    #[serde(default)]
    pub dissipators: Vec<DissipatorSpec>,
}

fn matrix_from_pairs(dim: usize, pairs: &[[f64; 2]], what: &str) -> Result<CMatrix> {
    if pairs.len() != dim * dim {
        return Err(Error::ModelFile(format!("{what}: expected {} entries, got {}", dim * dim, pairs.len())));
    }
    Ok(CMatrix::from_row_iterator(dim, dim, pairs.iter().map(|p| c(p[0], p[1]))))
}

pub fn matrix_to_pairs(m: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ModelFile(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model spec serializes")
    }

    pub fn build(&self) -> Result<LindbladModel> {
        let d = self.dimension;
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        let basis = OperatorBasis::new(d, self.basis_norm.unwrap_or(2.0))?;
        let mut constant = CMatrix::zeros(d, d);
        let mut terms = vec![CMatrix::zeros(d, d); self.drive_arity];
        for (n, t) in self.hamiltonian_terms.iter().enumerate() {
            let m = matrix_from_pairs(d, &t.matrix, &format!("hamiltonian term {n}"))?;
            match t.coefficient {
                Coefficient::Drive(j) if j < self.drive_arity => terms[j] += m,
                Coefficient::Drive(j) => {
                    return Err(Error::ModelFile(format!(
                        "hamiltonian term {n} uses drive {j} but drive_arity is {}",
                        self.drive_arity
                    )))
                }
                Coefficient::Constant(_) => constant += m,
            }
        }
        let dissipators = self
            .dissipators
            .iter()
            .enumerate()
            .map(|(n, s)| Ok(Dissipator::new(s.rate, matrix_from_pairs(d, &s.matrix, &format!("dissipator {n}"))?)))
            .collect::<Result<Vec<_>>>()?;
        LindbladModel::new(Hamiltonian::Affine { constant, terms }, dissipators, basis)
    }

    /// Document for an affine model; `None` for smooth Hamiltonians.
    pub fn from_model(model: &LindbladModel) -> Option<Self> {
        let Hamiltonian::Affine { constant, terms } = model.hamiltonian() else {
            return None;
        };
        let mut hamiltonian_terms: Vec<TermSpec> = terms
            .iter()
            .enumerate()
            .map(|(j, m)| TermSpec { coefficient: Coefficient::Drive(j), matrix: matrix_to_pairs(m) })
            .collect();
        if constant.norm() > 0.0 {
            hamiltonian_terms.push(TermSpec {
                coefficient: Coefficient::Constant(ConstantTag::Constant),
                matrix: matrix_to_pairs(constant),
            });
        }
        Some(Self {
            dimension: model.dim(),
            drive_arity: model.arity(),
            basis_norm: Some(model.basis().norm()),
            hamiltonian_terms,
            dissipators: model
                .dissipators()
                .iter()
                .map(|d| DissipatorSpec { rate: d.rate, matrix: matrix_to_pairs(&d.operator) })
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUBIT: &str = r#"{
        "dimension": 2,
        "drive_arity": 2,
        "hamiltonian_terms": [
            {"coefficient": 0, "matrix": [[0,0],[0.5,0],[0.5,0],[0,0]]},
            {"coefficient": 1, "matrix": [[0,0],[0,-0.5],[0,0.5],[0,0]]}
        ],
        "dissipators": [{"rate": 0.1, "matrix": [[1,0],[0,0],[0,0],[-1,0]]}]
    }"#;

    #[test]
    fn parses_and_builds() {
        let spec = ModelSpec::from_json(QUBIT).unwrap();
        let m = spec.build().unwrap();
        let l = m.full_matrix(&[1.0, 0.0]).unwrap();
        assert!((l[(1, 1)] - c(-0.2, 0.0)).norm() < 1e-15);
        assert!((l[(3, 2)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn round_trips_through_json() {
        let spec = ModelSpec::from_json(QUBIT).unwrap();
        let again = ModelSpec::from_model(&spec.build().unwrap()).unwrap();
        let m1 = spec.build().unwrap().full_matrix(&[0.3, 0.9]).unwrap();
        let m2 = ModelSpec::from_json(&again.to_json()).unwrap().build().unwrap().full_matrix(&[0.3, 0.9]).unwrap();
        assert!((m1 - m2).norm() < 1e-15);
    }

    #[test]
    fn constant_tag() {
        let text = r#"{"dimension": 2, "drive_arity": 0,
            "hamiltonian_terms": [{"coefficient": "constant", "matrix": [[1,0],[0,0],[0,0],[-1,0]]}]}"#;
        let m = ModelSpec::from_json(text).unwrap().build().unwrap();
        assert_eq!(m.arity(), 0);
        assert!(ModelSpec::from_json(&text.replace("constant", "bogus")).is_err());
    }

    #[test]
    fn bad_drive_index() {
        let text = QUBIT.replace("\"coefficient\": 1", "\"coefficient\": 5");
        assert!(matches!(ModelSpec::from_json(&text).unwrap().build(), Err(Error::ModelFile(_))));
    }
}
