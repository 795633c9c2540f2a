//! Cross-module properties of the curve, constraint and reduction pipeline.

use monopole_core::es_solver;
use monopole_core::linalg;
use monopole_core::reduction;
use monopole_core::scalar_special::{rho, ToleranceConfig};
use monopole_core::trigonal_curve;
use proptest::prelude::*;

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn period_structure_for_random_b(b in -12.0f64..12.0) {
        let p = trigonal_curve::periods_symmetric(b, &cfg()).unwrap();
        prop_assert!(p.structure_residual() < 1e-9, "structure {:.2e}", p.structure_residual());
        let t = p.tau_b.matrix();
        prop_assert!(linalg::max_abs(&(t - t.transpose())) < 1e-10);
        prop_assert!(p.tau_b.min_imag_eigenvalue() > 0.0);
        let w = rho();
        prop_assert!((p.x[1] - w * p.x[0]).norm() < 1e-9 * (1.0 + p.x[0].norm()));
        prop_assert!((p.x[2] - w * w * p.x[0]).norm() < 1e-9 * (1.0 + p.x[0].norm()));
    }

    #[test]
    fn ratio_symmetry(t in 0.001f64..0.999) {
        let f = es_solver::es_ratio(t, &cfg()).unwrap();
        let g = es_solver::es_ratio(1.0 - t, &cfg()).unwrap();
        prop_assert!((f * g - 1.0).abs() < 1e-12, "f(t) f(1-t) = {}", f * g);
    }

    #[test]
    fn hopf_identity_in_integers(n1 in -40i64..40, m1 in -40i64..40) {
        prop_assume!(es_solver::admissible(n1, m1));
        let (n, m) = es_solver::extend_vectors(n1, m1);
        prop_assert_eq!(es_solver::hopf_pairing(&n, &m), 2 * (m1 + n1) * (m1 - 2 * n1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn solved_pairs_satisfy_constraints_and_reduce(n1 in -4i64..=4, m1 in -4i64..=4) {
        prop_assume!(es_solver::admissible(n1, m1));
        let es = es_solver::solve(n1, m1, &cfg()).unwrap();
        let p = trigonal_curve::periods_of(&es.curve(), &cfg()).unwrap();
        let r = es_solver::verify_es(&p, &es);
        prop_assert!(r.max() < 1e-9, "ES residual {:?}", r);
        let rf = reduction::reduce(&p.tau_b, &es, &cfg()).unwrap();
        let s = rf.sigma.matrix();
        let j = linalg::symplectic_j(4);
        prop_assert_eq!(s * &j * s.transpose(), j);
        prop_assert!(reduction::es_image(&rf.sigma, &es.n, &es.m).is_canonical());
        prop_assert!(rf.shape_residual() < 1e-9);
    }
}

#[test]
fn solve_is_deterministic() {
    let a = es_solver::solve(5, -2, &cfg()).unwrap();
    let b = es_solver::solve(5, -2, &cfg()).unwrap();
    assert_eq!(a.t.to_bits(), b.t.to_bits());
    assert_eq!(a.chi.to_bits(), b.chi.to_bits());
}
