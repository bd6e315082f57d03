//! Randomized invariants checked with proptest.

use nalgebra::DMatrix;
use proptest::prelude::*;

use riesz_ergodic::matrix_core::{
    all_ones, c, hs_norm, schur_product, spectral_norm, trace_norm, CMatrix,
};
use riesz_ergodic::superop::{StochasticMatrix, SuperOperator};
use riesz_ergodic::weights::WeightSequence;

fn complex_matrix(d: usize) -> impl Strategy<Value = CMatrix> {
    proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), d * d).prop_map(move |entries| {
        CMatrix::from_iterator(d, d, entries.into_iter().map(|(re, im)| c(re, im)))
    })
}

fn stochastic_matrix(d: usize) -> impl Strategy<Value = StochasticMatrix> {
    proptest::collection::vec(1e-3f64..1.0, d * d).prop_map(move |raw| {
        let mut rows = Vec::with_capacity(d);
        for i in 0..d {
            let mut row: Vec<f64> = raw[i * d..(i + 1) * d].to_vec();
            let s: f64 = row.iter().sum();
            for v in row.iter_mut() {
                *v /= s;
            }
            let correction: f64 = 1.0 - row.iter().sum::<f64>();
            row[d - 1] += correction;
            rows.push(row);
        }
        StochasticMatrix::from_rows(&rows).unwrap()
    })
}

fn weight_list() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(1e-3f64..100.0, 1..32)
}

proptest! {
    #[test]
    fn schur_product_is_commutative(a in complex_matrix(3), b in complex_matrix(3)) {
        let ab = schur_product(&a, &b).unwrap();
        let ba = schur_product(&b, &a).unwrap();
        prop_assert!(spectral_norm(&(ab - ba)) < 1e-12);
    }

    #[test]
    fn schur_product_is_associative(
        a in complex_matrix(3),
        b in complex_matrix(3),
        c_ in complex_matrix(3),
    ) {
        let left = schur_product(&schur_product(&a, &b).unwrap(), &c_).unwrap();
        let right = schur_product(&a, &schur_product(&b, &c_).unwrap()).unwrap();
        prop_assert!(spectral_norm(&(left - right)) < 1e-9);
    }

    #[test]
    fn all_ones_is_schur_unit(a in complex_matrix(4)) {
        let j = all_ones(4);
        let prod = schur_product(&j, &a).unwrap();
        prop_assert!(spectral_norm(&(prod - &a)) < 1e-12);
    }

    #[test]
    fn norm_chain(a in complex_matrix(3)) {
        let sp = spectral_norm(&a);
        let tr = trace_norm(&a);
        let hs = hs_norm(&a);
        prop_assert!(sp <= tr + 1e-9 * tr.max(1.0));
        prop_assert!(tr <= 3.0 * sp + 1e-9 * sp.max(1.0));
        prop_assert!(sp <= hs + 1e-9 * hs.max(1.0));
        prop_assert!(hs <= tr + 1e-9 * tr.max(1.0));
    }

    #[test]
    fn explicit_weights_satisfy_p_identity(ps in weight_list()) {
        let w = WeightSequence::explicit(ps.clone()).unwrap();
        for n in 1..=ps.len() {
            // P(n) S_n = p_1 + sum |p_k - p_{k-1}| + p_n, always in [2 p_n, 2 V_n]
            let v = w.variation_sum(n);
            let lhs = w.p_condition_value(n) * w.prefix_sum(n);
            prop_assert!((lhs - v).abs() <= 1e-9 * v.max(1.0));
            prop_assert!(v + 1e-12 >= 2.0 * w.weight(n).min(w.weight(1)));
        }
    }

    #[test]
    fn non_increasing_weights_have_telescoping_variation(mut ps in weight_list()) {
        ps.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let w = WeightSequence::explicit(ps.clone()).unwrap();
        for n in 1..=ps.len() {
            let expect = 2.0 * w.weight(1);
            let got = w.variation_sum(n);
            prop_assert!((got - expect).abs() <= 1e-9 * expect);
        }
    }

    #[test]
    fn superoperator_apply_is_linear(
        a in complex_matrix(3),
        b in complex_matrix(3),
        s in -5.0f64..5.0,
        pi in stochastic_matrix(3),
    ) {
        let psi = SuperOperator::entangled_psi(&pi);
        let lhs = psi.apply(&(a.scale(s) + &b)).unwrap();
        let rhs = psi.apply(&a).unwrap().scale(s) + psi.apply(&b).unwrap();
        prop_assert!(spectral_norm(&(lhs - rhs)) < 1e-8);
    }

    #[test]
    fn entangled_psi_is_unital_and_preserves_hermiticity(
        pi in stochastic_matrix(3),
        a in complex_matrix(3),
    ) {
        let psi = SuperOperator::entangled_psi(&pi);
        let id = CMatrix::identity(3, 3);
        prop_assert!(spectral_norm(&(psi.apply(&id).unwrap() - &id)) < 1e-10);
        let herm = (&a + &a.adjoint()).scale(0.5);
        let out = psi.apply(&herm).unwrap();
        prop_assert!(spectral_norm(&(&out - out.adjoint())) < 1e-9);
    }

    #[test]
    fn adjoint_satisfies_hs_pairing(
        a in complex_matrix(2),
        b in complex_matrix(2),
        pi in stochastic_matrix(2),
    ) {
        let psi = SuperOperator::entangled_psi(&pi);
        let lhs = riesz_ergodic::matrix_core::hs_inner(&psi.apply(&a).unwrap(), &b).unwrap();
        let rhs =
            riesz_ergodic::matrix_core::hs_inner(&a, &psi.adjoint().apply(&b).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-8);
    }

    #[test]
    fn transpose_map_is_an_isometry_for_hs(a in complex_matrix(4)) {
        let t = SuperOperator::transpose_map(4);
        let ta = t.apply(&a).unwrap();
        prop_assert!((hs_norm(&ta) - hs_norm(&a)).abs() < 1e-10);
        // involution
        let back = t.apply(&ta).unwrap();
        prop_assert!(spectral_norm(&(back - &a)) < 1e-12);
    }

    #[test]
    fn stochastic_rows_sum_to_one(pi in stochastic_matrix(4)) {
        let e = pi.entries();
        for i in 0..4 {
            let s: f64 = (0..4).map(|j| e[(i, j)]).sum();
            prop_assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn riesz_mean_is_a_contraction_for_entangled_psi(
        pi in stochastic_matrix(2),
        a in complex_matrix(2),
        n in 1usize..64,
    ) {
        let psi = SuperOperator::entangled_psi(&pi);
        let w = WeightSequence::constant(1.0).unwrap();
        let herm = (&a + &a.adjoint()).scale(0.5);
        let m = riesz_ergodic::ergodic::riesz_mean(&psi, &herm, &w, n).unwrap();
        // Psi is positive and unital, hence contractive on Hermitian elements;
        // so are its convex averages
        prop_assert!(spectral_norm(&m) <= spectral_norm(&herm) * (1.0 + 1e-8) + 1e-10);
    }

    #[test]
    fn fixed_space_is_actually_fixed(pi in stochastic_matrix(3)) {
        let psi = SuperOperator::entangled_psi(&pi);
        let f = riesz_ergodic::fixed_points::fixed_space(&psi, 1e-9);
        for b in &f.basis {
            prop_assert!(spectral_norm(&(psi.apply(b).unwrap() - b)) < 1e-7);
        }
    }

    #[test]
    fn et_projection_is_idempotent_when_it_exists(pi in stochastic_matrix(2)) {
        let psi = SuperOperator::entangled_psi(&pi);
        let report = riesz_ergodic::ergodic::unique_ergodicity_check(&psi, 1e-9, 0);
        prop_assume!(report.uniquely_ergodic_relative);
        let e = report.projection.unwrap();
        let idem = spectral_norm(&(e.compose(&e).rep() - e.rep()));
        prop_assert!(idem < 1e-7);
        let comm = spectral_norm(&(&(psi.rep() * e.rep()) - e.rep()));
        prop_assert!(comm < 1e-7, "T E_T = E_T");
    }
}

#[test]
fn real_matrix_helper_roundtrip() {
    // DMatrix<f64> -> StochasticMatrix keeps entries exactly
    let m = DMatrix::from_row_slice(2, 2, &[0.25, 0.75, 0.5, 0.5]);
    let pi = StochasticMatrix::new(m.clone()).unwrap();
    assert_eq!(pi.entries(), &m);
}
