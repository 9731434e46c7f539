use isocubic::algebra::{
    commutator, hermitian_eigenvalues, lu_factor, random_normalized, random_unit_spins,
    triple_product, AlgebraElement, BlockShape,
};
use isocubic::bench::format_sci;
use isocubic::integrator::{hamiltonian, step};
use isocubic::operators::{
    DriftAlfvenOperator, EulerSphereOperator, LinearOperator, SpinChainOperator,
};
use isocubic::riccati::{congruence, solve_su2_branches, Su2Vector};
use isocubic::solvers::{linear_update, solve, SolverConfig, SolverKind};
use proptest::prelude::*;

fn shape_strategy() -> impl Strategy<Value = BlockShape> {
    prop::collection::vec(2usize..6, 1..4).prop_map(|s| BlockShape::new(s).unwrap())
}

fn model_operator(kind: u8, n: usize) -> Box<dyn LinearOperator> {
    match kind % 3 {
        0 => Box::new(EulerSphereOperator::new(n).unwrap()),
        1 => Box::new(DriftAlfvenOperator::new(n, 5.0).unwrap()),
        _ => Box::new(SpinChainOperator::new(n).unwrap()),
    }
}

fn sorted_spectrum(a: &AlgebraElement) -> Vec<Vec<f64>> {
    hermitian_eigenvalues(a).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn commutator_stays_in_the_algebra(shape in shape_strategy(), s1: u64, s2: u64) {
        let a = random_normalized(&shape, s1);
        let b = random_normalized(&shape, s2);
        let c = commutator(&a, &b).unwrap();
        prop_assert!(c.skew_defect() < 1e-13);
        prop_assert!(c.trace_defect() < 1e-13);
        prop_assert!((&c + &commutator(&b, &a).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn triple_product_stays_skew(shape in shape_strategy(), s1: u64, s2: u64, h in -1.0f64..1.0) {
        let p = random_normalized(&shape, s1);
        let x = random_normalized(&shape, s2);
        prop_assert!(triple_product(&p, &x, h).unwrap().skew_defect() < 1e-13);
    }

    #[test]
    fn triple_product_is_a_congruence(n in 2usize..7, s1: u64, s2: u64, h in 0.0f64..2.0) {
        // (I − hP) is normal with eigenvalues 1 − hλ, so the spectrum of
        // i·X is not preserved but its inertia (sign pattern) is.
        let shape = BlockShape::single(n).unwrap();
        let p = random_normalized(&shape, s1);
        let x = random_normalized(&shape, s2);
        let y = triple_product(&p, &x, h).unwrap();
        let sx = sorted_spectrum(&x);
        let sy = sorted_spectrum(&y);
        let count = |v: &[f64]| v.iter().filter(|&&e| e > 1e-9).count();
        prop_assert_eq!(count(&sx[0]), count(&sy[0]));
    }

    #[test]
    fn operators_are_linear_and_self_adjoint(kind in 0u8..3, n in 3usize..8, s1: u64, s2: u64, a in -3.0f64..3.0) {
        let op = model_operator(kind, n);
        let x = random_normalized(op.shape(), s1);
        let z = random_normalized(op.shape(), s2);
        let lhs = op.apply(&x.axpy(a, &z).unwrap()).unwrap();
        let rhs = op.apply(&x).unwrap().axpy(a, &op.apply(&z).unwrap()).unwrap();
        prop_assert!((&lhs - &rhs).norm() < 1e-12);
        let xlz = x.inner(&op.apply(&z).unwrap()).unwrap();
        let lxz = op.apply(&x).unwrap().inner(&z).unwrap();
        prop_assert!((xlz - lxz).abs() < 1e-12);
    }

    #[test]
    fn lu_sandwich_matches_definition(shape in shape_strategy(), s1: u64, s2: u64, h in 0.0f64..2.0) {
        let p = random_normalized(&shape, s1);
        let y = random_normalized(&shape, s2);
        let s = lu_factor(&p, h).unwrap().sandwich(&y).unwrap();
        // (I − hP) S (I + hP) = Y
        prop_assert!((&triple_product(&p, &s, h).unwrap() - &y).norm() < 1e-12);
    }

    #[test]
    fn step_preserves_spectrum_and_trace(kind in 0u8..3, n in 3usize..7, seed: u64) {
        let op = model_operator(kind, n);
        let y = random_normalized(op.shape(), seed);
        let out = step(&y, op.as_ref(), SolverKind::Linear, &SolverConfig::with_h(0.2)).unwrap();
        let before = sorted_spectrum(&y);
        let after = sorted_spectrum(&out.y_next);
        for (a, b) in before.iter().zip(&after) {
            for (u, v) in a.iter().zip(b) {
                prop_assert!((u - v).abs() < 1e-9);
            }
        }
        prop_assert!(out.y_next.trace_defect() < 1e-12);
        prop_assert!(out.y_next.skew_defect() < 1e-12);
    }

    #[test]
    fn solution_is_a_fixed_point_of_the_linear_map(kind in 0u8..3, n in 3usize..7, seed: u64) {
        let op = model_operator(kind, n);
        let y = random_normalized(op.shape(), seed);
        let (x, rep) = solve(SolverKind::Newton, &y, op.as_ref(), &SolverConfig::with_h(0.2)).unwrap();
        prop_assert!(rep.converged);
        let s = linear_update(&x, &y, op.as_ref(), 0.2).unwrap();
        prop_assert!((&s - &x).norm() < 1e-9);
    }

    #[test]
    fn riccati_branches_solve_random_admissible_problems(s1: u64, s2: u64, h in 0.05f64..1.5, scale in 0.1f64..4.0) {
        let shape = BlockShape::single(2).unwrap();
        let x = Su2Vector::from_element(&random_normalized(&shape, s1)).unwrap();
        let p0 = scale * Su2Vector::from_element(&random_normalized(&shape, s2)).unwrap();
        let y = congruence(p0, x, h);
        let br = solve_su2_branches(x, y, h).unwrap();
        prop_assert!(br.plus.residual < 1e-11 && br.minus.residual < 1e-11);
        let closest = (br.plus.p() - p0).norm().min((br.minus.p() - p0).norm());
        prop_assert!(closest < 1e-9 * (1.0 + p0.norm()));
    }

    #[test]
    fn sci_format_round_trips(v in -1e200f64..1e200) {
        let s = format_sci(v);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - v).abs() <= 1e-9 * v.abs());
        let exp = s.split('e').nth(1).unwrap();
        prop_assert!(exp.starts_with('+') || exp.starts_with('-'));
        prop_assert!(exp.len() >= 3);
    }

    #[test]
    fn unit_spins_have_unit_vectors(n in 3usize..40, seed: u64) {
        let s = random_unit_spins(n, seed).unwrap();
        for b in s.blocks() {
            let v = Su2Vector::from_block(b).unwrap();
            prop_assert!((v.norm() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn hamiltonian_is_quadratic(kind in 0u8..3, n in 3usize..7, seed: u64, a in -3.0f64..3.0) {
        let op = model_operator(kind, n);
        let y = random_normalized(op.shape(), seed);
        let h1 = hamiltonian(&y, op.as_ref()).unwrap();
        let ha = hamiltonian(&y.scale(a), op.as_ref()).unwrap();
        prop_assert!((ha - a * a * h1).abs() < 1e-12);
    }
}
