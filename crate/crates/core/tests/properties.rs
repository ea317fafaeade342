use proptest::prelude::*;
use proptest::test_runner::RngSeed;

use qab_core::basis::{devectorize, vectorize, OperatorBasis};
use qab_core::dynamics::{infidelity, integrate_master_equation, trace_distance};
use qab_core::el_solver::{solve_bvp, BvpOptions, ElSystem};
use qab_core::lagrangian::LagrangianConfig;
use qab_core::linalg::{c, hermitian_eigenvalues, sort_complex, CMatrix, RVector};
use qab_core::models::{qubit_dephasing, stirap_balanced, transmon_qutrit, ModelPreset, TransmonRates};
use qab_core::schedule::{uniform_grid, Schedule};
use qab_core::spectral::{eigenvalues, GapSelector};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(0x9ab5), failure_persistence: None, ..ProptestConfig::default() }
}

fn matrix(dim: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec(-1.0f64..1.0, 2 * dim * dim)
        .prop_map(move |v| CMatrix::from_fn(dim, dim, |i, j| c(v[2 * (i * dim + j)], v[2 * (i * dim + j) + 1])))
}

/// `A A† / tr(A A†)`, full rank almost surely.
fn density(dim: usize) -> impl Strategy<Value = CMatrix> {
    matrix(dim).prop_map(|a| {
        let m = &a * a.adjoint();
        let t = m.trace();
        m / t
    })
}

fn rates() -> impl Strategy<Value = TransmonRates> {
    prop::array::uniform5(0.0f64..0.1).prop_map(|r| {
        let mut relaxation = [[0.0; 3]; 3];
        for (j, k, g) in [(0, 1, r[0]), (1, 2, r[1]), (0, 2, r[2])] {
            relaxation[j][k] = g;
            relaxation[k][j] = g;
        }
        TransmonRates { relaxation, dephasing: [r[3], r[4]] }
    })
}

fn preset(kind: u8, gamma: f64, rates: &TransmonRates) -> ModelPreset {
    match kind {
        0 => qubit_dephasing(1.0, gamma).unwrap(),
        1 => stirap_balanced(1.0, gamma).unwrap(),
        _ => transmon_qutrit(1.0, rates).unwrap(),
    }
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn coherence_vector_round_trip((dim, rho) in (2usize..=4).prop_flat_map(|d| (Just(d), density(d)))) {
        let basis = OperatorBasis::new(dim, 2.0).unwrap();
        let back = devectorize(&vectorize(&rho, &basis).unwrap(), &basis).unwrap();
        prop_assert!((back - &rho).camax() < 1e-12);
    }

    #[test]
    fn arbitrary_operators_round_trip(a in matrix(3)) {
        let basis = OperatorBasis::new(3, 2.0).unwrap();
        let back = basis.reconstruct(&basis.coefficients(&a).unwrap()).unwrap();
        prop_assert!((back - &a).camax() < 1e-12);
    }

    #[test]
    fn superoperator_commutes_with_generator(
        kind in 0u8..3,
        gamma in 0.0f64..0.5,
        r in rates(),
        q in prop::array::uniform2(-2.0f64..2.0),
        x in matrix(3),
    ) {
        let p = preset(kind, gamma, &r);
        let d = p.model.dim();
        let x = x.view((0, 0), (d, d)).into_owned();
        let basis = p.model.basis();
        let lv = p.model.full_matrix(&q).unwrap() * basis.coefficients(&x).unwrap();
        let direct = basis.coefficients(&p.model.apply_generator(&q, &x).unwrap()).unwrap();
        prop_assert!((lv - direct).camax() < 1e-12);
    }

    #[test]
    fn spectrum_is_stable_and_conjugate_closed(
        kind in 0u8..3,
        gamma in 0.0f64..0.5,
        r in rates(),
        q in prop::array::uniform2(-2.0f64..2.0),
    ) {
        let p = preset(kind, gamma, &r);
        let sup = p.model.superoperator(&q, p.form).unwrap();
        let mut ev = eigenvalues(&sup).unwrap();
        prop_assert!(ev.iter().all(|l| l.re <= 1e-10));
        let mut conj: Vec<_> = ev.iter().map(|l| l.conj()).collect();
        sort_complex(&mut ev);
        sort_complex(&mut conj);
        for (a, b) in ev.iter().zip(&conj) {
            prop_assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn metrics_obey_fuchs_van_de_graaf(a in density(3), b in density(3)) {
        let d = trace_distance(&a, &b).unwrap();
        let inf = infidelity(&a, &b).unwrap();
        let f = 1.0 - inf;
        prop_assert!((d - trace_distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!((inf - infidelity(&b, &a).unwrap()).abs() < 1e-8);
        prop_assert!(inf <= d + 1e-9);
        prop_assert!(d <= (1.0 - f * f).max(0.0).sqrt() + 1e-9);
    }

    #[test]
    fn el_equations_ignore_constant_scaling_of_q(
        kind in 0u8..2,
        gamma in 0.01f64..0.3,
        p0 in 0.05f64..0.95,
        dp in 0.1f64..3.0,
        log_k in -6.0f64..6.0,
    ) {
        let pr = preset(kind, gamma, &TransmonRates { relaxation: [[0.0; 3]; 3], dephasing: [0.0; 2] });
        let sys = |k: f64| {
            ElSystem::new(pr.model.clone(), pr.parametrization.clone(), GapSelector::WidestConjugatePair, pr.form, 1e-12, 1.0, true)
                .unwrap()
                .with_q_scale(k)
        };
        let (p, v) = (RVector::from_element(1, p0), RVector::from_element(1, dp));
        let a = sys(1.0).acceleration(&p, &v, 0.5).unwrap();
        let b = sys(10f64.powf(log_k)).acceleration(&p, &v, 0.5).unwrap();
        prop_assert!((a[0] - b[0]).abs() <= 1e-7 * a[0].abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn propagation_preserves_trace_and_positivity(
        kind in 0u8..3,
        gamma in 0.0f64..0.5,
        r in rates(),
        tau in 0.5f64..30.0,
        rho in density(3),
    ) {
        let p = preset(kind, gamma, &r);
        let d = p.model.dim();
        let rho = rho.view((0, 0), (d, d)).into_owned();
        let rho = &rho / rho.trace();
        let sch = Schedule::linear(p.parametrization.clone(), p.boundary.0.clone(), p.boundary.1.clone()).unwrap();
        let traj = integrate_master_equation(&p.model, &sch, tau, &rho, 40).unwrap();
        for st in &traj.states {
            prop_assert!((st.trace() - c(1.0, 0.0)).norm() < 1e-8);
            prop_assert!((st - st.adjoint()).camax() < 1e-10);
            prop_assert!(hermitian_eigenvalues(st).min() > -1e-8);
        }
    }

    #[test]
    fn qubit_brachistochrone_is_time_reversal_symmetric(ratio in 0.0f64..0.5, omega0 in 0.5f64..2.0) {
        let gamma = ratio * omega0;
        let p = qubit_dephasing(omega0, gamma).unwrap();
        let cfg = LagrangianConfig { form: p.form, ..Default::default() };
        let sol = solve_bvp(&p.model, &cfg, (&p.boundary.0, &p.boundary.1), &p.parametrization, &BvpOptions::default())
            .unwrap();
        for s in uniform_grid(101) {
            let a = sol.schedule.reduced_at(s).unwrap().0[0];
            let b = sol.schedule.reduced_at(1.0 - s).unwrap().0[0];
            prop_assert!((a + b - omega0).abs() < 1e-6 * omega0, "s = {s}: {a} + {b}");
        }
    }
}
