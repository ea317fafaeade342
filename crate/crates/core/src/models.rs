//! Preset models with their constraint and boundary values.

use std::sync::Arc;

use num_complex::Complex64;

use crate::basis::OperatorBasis;
use crate::dynamics::{basis_projector, projector};
use crate::error::{Error, Result};
use crate::linalg::{c, commutator, kron, CMatrix, CVector, RVector, I};
use crate::liouvillian::{Dissipator, Form, Hamiltonian, LindbladModel};
use crate::schedule::Parametrization;
use crate::spectral::GapRule;

/// Which closed-form references exist for a preset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Capabilities {
    pub spectrum: bool,
    pub lagrangian: bool,
    pub brachistochrone: bool,
}

#[derive(Clone)]
pub struct ModelPreset {
    pub name: String,
    pub model: LindbladModel,
    /// Default constraint `q = φ(p)`.
    pub parametrization: Parametrization,
    /// Reduced coordinates at `s = 0` and `s = 1`.
    pub boundary: (RVector, RVector),
    pub gap_rule: GapRule,
    pub form: Form,
    pub capabilities: Capabilities,
    pub initial_state: CMatrix,
    /// Nominal target at `s = 1`.
    pub target_state: CMatrix,
}

impl std::fmt::Debug for ModelPreset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelPreset")
            .field("name", &self.name)
            .field("dim", &self.model.dim())
            .field("parametrization", &self.parametrization)
            .field("boundary", &self.boundary)
            .finish()
    }
}

fn pauli() -> [CMatrix; 3] {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    [
        CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        CMatrix::from_row_slice(2, 2, &[z, -I, I, z]),
        CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

fn ket_bra(dim: usize, j: usize, k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(j, k)] = c(1.0, 0.0);
    m
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")))
    }
}

fn check_rate(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be non-negative, got {x}")))
    }
}

/// Three-level ladder Hamiltonian terms `|0⟩⟨1| + h.c.` and `|1⟩⟨2| + h.c.`.
fn ladder_terms(scale: f64) -> Vec<CMatrix> {
    let x01 = (ket_bra(3, 0, 1) + ket_bra(3, 1, 0)) * c(scale, 0.0);
    let x12 = (ket_bra(3, 1, 2) + ket_bra(3, 2, 1)) * c(scale, 0.0);
    vec![x01, x12]
}

/// Driven qubit `H = ½(Ω_x X + Ω_y Y)` with dephasing `γ(ZρZ − ρ)`.
///
/// Constraint `Ω_x + Ω_y = Ω₀`, reduced coordinate `Ω_y` from 0 to `Ω₀`.
pub fn qubit_dephasing(omega0: f64, gamma: f64) -> Result<ModelPreset> {
    check_positive("omega0", omega0)?;
    check_rate("gamma", gamma)?;
    let [x, y, z] = pauli();
    let h = Hamiltonian::Affine { constant: CMatrix::zeros(2, 2), terms: vec![x * c(0.5, 0.0), y * c(0.5, 0.0)] };
    let diss = if gamma > 0.0 { vec![Dissipator::new(gamma, z)] } else { vec![] };
    let model = LindbladModel::new(h, diss, OperatorBasis::new(2, 2.0)?)?;
    let minus = CVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]);
    let minus_i = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, -1.0)]);
    Ok(ModelPreset {
        name: "qubit-dephasing".into(),
        model,
        parametrization: Parametrization::sum_second(omega0),
        boundary: (RVector::from_vec(vec![0.0]), RVector::from_vec(vec![omega0])),
        gap_rule: GapRule::WidestConjugatePair,
        form: Form::Full,
        capabilities: Capabilities { spectrum: true, lagrangian: true, brachistochrone: true },
        initial_state: projector(&minus),
        target_state: projector(&minus_i),
    })
}

/// Ladder qutrit with pump `Ω_p` and Stokes `Ω_s` and balanced loss-gain at rate `Γ`.
///
/// Constraint `Ω_p + Ω_s = Ω₀`, reduced coordinate `Ω_p` from 0 to `Ω₀`.
pub fn stirap_balanced(omega0: f64, gamma: f64) -> Result<ModelPreset> {
    check_positive("omega0", omega0)?;
    check_rate("gamma", gamma)?;
    let h = Hamiltonian::Affine { constant: CMatrix::zeros(3, 3), terms: ladder_terms(1.0) };
    let mut diss = Vec::new();
    if gamma > 0.0 {
        for n in 1..3 {
            diss.push(Dissipator::new(gamma, ket_bra(3, n - 1, n)));
            diss.push(Dissipator::new(gamma, ket_bra(3, n, n - 1)));
        }
    }
    let model = LindbladModel::new(h, diss, OperatorBasis::new(3, 2.0)?)?;
    Ok(ModelPreset {
        name: "stirap-balanced".into(),
        model,
        parametrization: Parametrization::sum_first(omega0),
        boundary: (RVector::from_vec(vec![0.0]), RVector::from_vec(vec![omega0])),
        gap_rule: GapRule::WidestConjugatePair,
        form: Form::Reduced,
        capabilities: Capabilities { spectrum: true, lagrangian: true, brachistochrone: true },
        initial_state: basis_projector(3, 0),
        target_state: basis_projector(3, 2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleClass {
    Constant,
    Balanced,
    Neither,
}

pub fn classify_oracle(table: &[bool]) -> OracleClass {
    let ones = table.iter().filter(|&&b| b).count();
    if ones == 0 || ones == table.len() {
        OracleClass::Constant
    } else if 2 * ones == table.len() {
        OracleClass::Balanced
    } else {
        OracleClass::Neither
    }
}

/// Adiabatic Deutsch-Jozsa on `n` qubits: `H(r) = U(r) H₀ U(r)†` with
/// `H₀ = −ω Σ X_i`, `U(r) = exp(iπ r 𝒪 / 2)` and local dephasing at rate `γ`.
///
/// `table[j] = f(j)`. A function that is neither constant nor balanced is
/// accepted with a warning.
pub fn deutsch_jozsa(n: usize, omega: f64, gamma: f64, table: &[bool]) -> Result<ModelPreset> {
    if n == 0 || n > 10 {
        return Err(Error::InvalidParameter(format!("need 1 <= N <= 10 qubits, got {n}")));
    }
    check_positive("omega", omega)?;
    check_rate("gamma", gamma)?;
    let dim = 1usize << n;
    if table.len() != dim {
        return Err(Error::Shape { expected: format!("truth table of length {dim}"), got: table.len().to_string() });
    }
    if classify_oracle(table) == OracleClass::Neither {
        log::warn!("oracle is neither constant nor balanced; proceeding anyway");
    }
    let [x, _, z] = pauli();
    let id = CMatrix::identity(2, 2);
    let local = |op: &CMatrix, k: usize| {
        (0..n).fold(CMatrix::identity(1, 1), |acc, j| kron(&acc, if j == k { op } else { &id }))
    };
    let mut h0 = CMatrix::zeros(dim, dim);
    for k in 0..n {
        h0 -= local(&x, k) * c(omega, 0.0);
    }
    let signs: Vec<f64> = table.iter().map(|&b| if b { -1.0 } else { 1.0 }).collect();
    let oracle = CMatrix::from_diagonal(&CVector::from_iterator(dim, signs.iter().map(|&o| c(o, 0.0))));

    let rotate = {
        let h0 = h0.clone();
        let signs = signs.clone();
        move |r: f64| {
            let phase: Vec<Complex64> =
                signs.iter().map(|&o| (I * (std::f64::consts::FRAC_PI_2 * r * o)).exp()).collect();
            CMatrix::from_fn(dim, dim, |j, k| phase[j] * h0[(j, k)] * phase[k].conj())
        }
    };
    let value = {
        let rotate = rotate.clone();
        Arc::new(move |q: &[f64]| rotate(q[0]))
    };
    let gradient = {
        let oracle = oracle.clone();
        Arc::new(move |q: &[f64]| vec![commutator(&oracle, &rotate(q[0])) * (I * std::f64::consts::FRAC_PI_2)])
    };
    let h = Hamiltonian::Smooth { arity: 1, value, gradient: Some(gradient) };
    let diss = if gamma > 0.0 { (0..n).map(|k| Dissipator::new(gamma, local(&z, k))).collect() } else { vec![] };
    let model = LindbladModel::new(h, diss, OperatorBasis::pauli_product(n)?)?;

    let amp = 1.0 / (dim as f64).sqrt();
    let plus = CVector::from_element(dim, c(amp, 0.0));
    let target = &oracle * &plus;
    Ok(ModelPreset {
        name: "deutsch-jozsa".into(),
        model,
        parametrization: Parametrization::Identity(1),
        boundary: (RVector::from_vec(vec![0.0]), RVector::from_vec(vec![1.0])),
        gap_rule: GapRule::WidestConjugatePair,
        form: Form::Full,
        capabilities: Capabilities { spectrum: n == 2, lagrangian: true, brachistochrone: true },
        initial_state: projector(&plus),
        target_state: projector(&target),
    })
}

/// Relaxation and dephasing rates of the transmon qutrit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmonRates {
    /// `Γ_kj` for the jump `|k⟩⟨j|`; must be symmetric. Diagonal is ignored.
    pub relaxation: [[f64; 3]; 3],
    /// Pure dephasing of levels `|1⟩` and `|2⟩`.
    pub dephasing: [f64; 2],
}

impl TransmonRates {
    pub fn validate(&self) -> Result<()> {
        for j in 0..3 {
            for k in 0..3 {
                if j != k {
                    check_rate("relaxation rate", self.relaxation[j][k])?;
                    let (a, b) = (self.relaxation[j][k], self.relaxation[k][j]);
                    if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                        return Err(Error::InvalidParameter(format!(
                            "relaxation rates must be symmetric: Gamma[{j}][{k}] = {a}, Gamma[{k}][{j}] = {b}"
                        )));
                    }
                }
            }
        }
        for &g in &self.dephasing {
            check_rate("dephasing rate", g)?;
        }
        Ok(())
    }
}

/// Transmon qutrit: ladder Hamiltonian `Ω₀(q₁ X₀₁ + q₂ X₁₂)` with relaxation
/// `Γ_kj` and level dephasing `γ_j`.
///
/// Constraint `q₁ + q₂ = 1`, reduced coordinate `q₁` from 1 to 0; population
/// moves from `|2⟩` to `|0⟩`.
pub fn transmon_qutrit(omega0: f64, rates: &TransmonRates) -> Result<ModelPreset> {
    check_positive("omega0", omega0)?;
    rates.validate()?;
    let h = Hamiltonian::Affine { constant: CMatrix::zeros(3, 3), terms: ladder_terms(omega0) };
    let mut diss = Vec::new();
    for k in 0..3 {
        for j in 0..3 {
            if j != k && rates.relaxation[k][j] > 0.0 {
                diss.push(Dissipator::new(rates.relaxation[k][j], ket_bra(3, k, j)));
            }
        }
    }
    for (j, &g) in rates.dephasing.iter().enumerate() {
        if g > 0.0 {
            diss.push(Dissipator::new(g, ket_bra(3, j + 1, j + 1)));
        }
    }
    let model = LindbladModel::new(h, diss, OperatorBasis::new(3, 2.0)?)?;
    Ok(ModelPreset {
        name: "transmon-qutrit".into(),
        model,
        parametrization: Parametrization::sum_first(1.0),
        boundary: (RVector::from_vec(vec![1.0]), RVector::from_vec(vec![0.0])),
        gap_rule: GapRule::WidestConjugatePair,
        form: Form::Auto,
        capabilities: Capabilities::default(),
        initial_state: basis_projector(3, 2),
        target_state: basis_projector(3, 0),
    })
}

/// Closed-form spectrum of the dephasing qubit: `0, −2γ, −γ ± iΔ`, `Δ² = Ω_x² + Ω_y² − γ²`.
pub fn qubit_spectrum(omega_x: f64, omega_y: f64, gamma: f64) -> Vec<Complex64> {
    let d = c(omega_x * omega_x + omega_y * omega_y - gamma * gamma, 0.0).sqrt();
    vec![c(0.0, 0.0), c(-2.0 * gamma, 0.0), c(-gamma, 0.0) + I * d, c(-gamma, 0.0) - I * d]
}

/// Closed-form reduced (8-value) spectrum of the balanced loss-gain ladder.
pub fn stirap_spectrum(omega_p: f64, omega_s: f64, gamma: f64) -> Vec<Complex64> {
    let rms2 = omega_p * omega_p + omega_s * omega_s;
    let d1 = c(16.0 * rms2 - gamma * gamma, 0.0).sqrt();
    let d2 = c(4.0 * rms2 - gamma * gamma, 0.0).sqrt();
    let l0 = c(-1.5 * gamma, 0.0);
    let l1p = (c(-5.0 * gamma, 0.0) + I * d1) / 4.0;
    let l1m = (c(-5.0 * gamma, 0.0) - I * d1) / 4.0;
    let l2p = c(-2.0 * gamma, 0.0) + I * d2;
    let l2m = c(-2.0 * gamma, 0.0) - I * d2;
    vec![l0, l0, l1p, l1p, l1m, l1m, l2p, l2m]
}

/// Closed-form two-qubit Deutsch-Jozsa spectrum (16 values, drive independent).
///
/// With `H₀ = −ω Σ X_i` and dephasing `γ(ZρZ − ρ)` the generator spectrum is
/// twice the list `0, −2γ, −γ (×4), (−3γ ± iγ̄)/2 (×2), (−γ ± iγ̄)/2 (×2), −γ ± iγ̄`
/// with `γ̄² = 4ω² − γ²`.
pub fn deutsch_jozsa2_spectrum(omega: f64, gamma: f64) -> Vec<Complex64> {
    let gb = c(4.0 * omega * omega - gamma * gamma, 0.0).sqrt();
    let g = c(gamma, 0.0);
    let mut base = vec![c(0.0, 0.0), -g * 2.0];
    base.extend([-g; 4]);
    for sign in [1.0, -1.0] {
        let l3 = (-g * 3.0 + I * gb * sign) / 2.0;
        let l4 = (-g + I * gb * sign) / 2.0;
        base.extend([l3, l3, l4, l4]);
        base.push(-g + I * gb * sign);
    }
    base.into_iter().map(|z| z * 2.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sort_complex;

    fn close(mut a: Vec<Complex64>, mut b: Vec<Complex64>, tol: f64) -> bool {
        sort_complex(&mut a);
        sort_complex(&mut b);
        a.iter().zip(&b).all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn qubit_matrix() {
        let p = qubit_dephasing(1.0, 0.1).unwrap();
        let l = p.model.full_matrix(&[0.3, 0.7]).unwrap();
        let (ox, oy, g) = (0.3, 0.7, 0.1);
        #[rustfmt::skip]
        let expect = [
            [0.0, 0.0, 0.0, 0.0],
            [0.0, -2.0 * g, 0.0, oy],
            [0.0, 0.0, -2.0 * g, -ox],
            [0.0, -oy, ox, 0.0],
        ];
        for j in 0..4 {
            for k in 0..4 {
                assert!((l[(j, k)] - c(expect[j][k], 0.0)).norm() < 1e-14, "{j},{k}");
            }
        }
    }

    #[test]
    fn stirap_spectrum_matches() {
        let p = stirap_balanced(1.0, 0.17).unwrap();
        let sup = p.model.superoperator(&[0.4, 0.9], Form::Reduced).unwrap();
        let ev = crate::linalg::eigenvalues(&sup.matrix).unwrap();
        assert!(close(ev, stirap_spectrum(0.4, 0.9, 0.17), 1e-9));
    }

    #[test]
    fn dj_spectrum_is_constant() {
        let p = deutsch_jozsa(2, 1.0, 0.3, &[false, true, false, true]).unwrap();
        for r in [0.0, 0.37, 1.0] {
            let ev = crate::linalg::eigenvalues(&p.model.full_matrix(&[r]).unwrap()).unwrap();
            assert!(close(ev, deutsch_jozsa2_spectrum(1.0, 0.3), 1e-9));
        }
    }

    #[test]
    fn transmon_rejects_asymmetry() {
        let mut r =
            TransmonRates { relaxation: [[0.0, 0.01, 0.0], [0.01, 0.0, 0.01], [0.0, 0.01, 0.0]], dephasing: [0.0; 2] };
        r.relaxation[0][1] = 0.5;
        assert!(matches!(transmon_qutrit(1.0, &r), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn oracle_classes() {
        assert_eq!(classify_oracle(&[true, true]), OracleClass::Constant);
        assert_eq!(classify_oracle(&[true, false]), OracleClass::Balanced);
        assert_eq!(classify_oracle(&[true, false, false, false]), OracleClass::Neither);
    }
}
