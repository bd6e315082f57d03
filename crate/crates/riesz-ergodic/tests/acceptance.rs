//! End-to-end acceptance suite. Each test prints one pass line on success
//! (run with `cargo test --test acceptance -- --nocapture` to see them).

use std::process::Command;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use riesz_ergodic::ergodic::{
    et_projection, is_conditional_expectation, jordan_block_map, jordan_decompose, riesz_mean,
    symmetrizer, unique_ergodicity_check, verify_estimate, CondExpWitness, HermitianFunctional,
};
use riesz_ergodic::fixed_points::{self, projector_distance, verify_lemma_fixed};
use riesz_ergodic::matrix_core::{
    hermitian_eigenvalues, is_psd, matrix_unit, spectral_norm, vec_mat, CMatrix, CVector,
};
use riesz_ergodic::superop::{random_matrix, StochasticMatrix, SuperOperator};
use riesz_ergodic::weights::WeightSequence;

fn pi_example(u: f64) -> StochasticMatrix {
    StochasticMatrix::from_rows(&[
        vec![1.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![0.0, u, 1.0 - u],
    ])
    .unwrap()
}

fn random_stochastic(d: usize, rng: &mut impl Rng) -> StochasticMatrix {
    let mut rows = Vec::new();
    for _ in 0..d {
        let mut row: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..1.0) + 1e-3).collect();
        let s: f64 = row.iter().sum();
        for v in row.iter_mut() {
            *v /= s;
        }
        let correction: f64 = 1.0 - row.iter().sum::<f64>();
        row[d - 1] += correction;
        rows.push(row);
    }
    StochasticMatrix::from_rows(&rows).unwrap()
}

fn unit_norm_matrix(d: usize, seed: u64) -> CMatrix {
    let x = random_matrix(d, &mut ChaCha8Rng::seed_from_u64(seed));
    let n = spectral_norm(&x);
    x.unscale(n)
}

#[test]
fn criterion_01_transpose_projection_is_symmetrizer() {
    for d in [2usize, 3, 4] {
        let e = et_projection(&SuperOperator::transpose_map(d), 1e-9).unwrap();
        let dist = spectral_norm(&(e.rep() - symmetrizer(d).rep()));
        assert!(dist <= 1e-10, "d = {}: rep distance {}", d, dist);
    }
    println!("criterion 1: PASS (E_T of the transpose map is x -> (x + x^t)/2 for d = 2, 3, 4)");
}

#[test]
fn criterion_02_estimate_transpose_d3() {
    let s = SuperOperator::transpose_map(3);
    let checkpoints: Vec<usize> = (0..=12).map(|k| 1usize << k).collect();
    let constant = WeightSequence::constant(1.0).unwrap();
    let power_half = WeightSequence::power(0.5).unwrap();
    for seed in 0..20u64 {
        let x = unit_norm_matrix(3, seed);
        for row in verify_estimate(&s, &x, &constant, &checkpoints, 1e-8).unwrap() {
            assert!(
                row.err <= 2.0 / row.n as f64 + 1e-8,
                "constant weights, seed {}, n {}: err {}",
                seed,
                row.n,
                row.err
            );
        }
        for row in verify_estimate(&s, &x, &power_half, &checkpoints, 1e-8).unwrap() {
            assert!(
                row.ok,
                "power(0.5), seed {}, n {}: err {} > bound {}",
                seed,
                row.n,
                row.err,
                row.bound
            );
        }
    }
    println!("criterion 2: PASS (P(n) estimate for the transpose map, constant and power(0.5) weights)");
}

#[test]
fn criterion_03_entangled_example() {
    for u in [0.25, 0.5, 0.9] {
        let s = SuperOperator::entangled_psi(&pi_example(u));
        let report = unique_ergodicity_check(&s, 1e-9, 0);
        assert_eq!(report.dim_fixed, 2, "u = {}", u);
        assert!(report.uniquely_ergodic_relative, "u = {}", u);
        assert!(!report.ergodic, "u = {}", u);

        let f = fixed_points::fixed_space(&s, 1e-9);
        let left: Vec<CVector> = f.basis.iter().map(vec_mat).collect();
        let b1 = matrix_unit(3, 0, 0);
        let b2 = (matrix_unit(3, 1, 1) + matrix_unit(3, 2, 2)).unscale(2.0f64.sqrt());
        let right = vec![vec_mat(&b1), vec_mat(&b2)];
        let dist = projector_distance(9, &left, &right);
        assert!(dist <= 1e-10, "u = {}: projector distance {}", u, dist);
    }
    println!("criterion 3: PASS (entangled example: dim 2 fixed space, uniquely ergodic, not ergodic)");
}

#[test]
fn criterion_04_lemma_fixed_at_scale() {
    for d in [2usize, 3, 4] {
        let mut rng = ChaCha8Rng::seed_from_u64(4000 + d as u64);
        for trial in 0..100 {
            let pi = random_stochastic(d, &mut rng);
            let check = verify_lemma_fixed(&pi, 1e-8);
            assert!(
                check.holds,
                "d = {}, trial {}: distance {}",
                d, trial, check.distance
            );
        }
    }
    println!("criterion 4: PASS (fixed space of Psi = diagonal embedding of Fix(Pi), 300 random stochastic matrices)");
}

#[test]
fn criterion_05_complete_positivity_facts() {
    let t = SuperOperator::transpose_map(2);
    let min_t = hermitian_eigenvalues(&t.choi().unwrap())[0];
    assert!((min_t + 1.0).abs() <= 1e-10, "transpose Choi min eigenvalue {}", min_t);
    assert!(!t.is_completely_positive(1e-10).unwrap());

    let e = symmetrizer(2);
    let min_e = hermitian_eigenvalues(&e.choi().unwrap())[0];
    assert!((min_e + 0.5).abs() <= 1e-10, "symmetrizer Choi min eigenvalue {}", min_e);
    assert!(!e.is_completely_positive(1e-10).unwrap());

    assert!(SuperOperator::identity_map(2).is_completely_positive(1e-10).unwrap());
    println!("criterion 5: PASS (Choi eigenvalues -1 and -1/2; CP verdicts as expected)");
}

#[test]
fn criterion_06_symmetrizer_not_conditional_expectation() {
    let e = symmetrizer(3);
    let f = fixed_points::fixed_space(&SuperOperator::transpose_map(3), 1e-9);
    let check = is_conditional_expectation(&e, &f, 200, 0, 1e-8).unwrap();
    assert!(!check.holds);
    let witness = check.witness.expect("failure must carry a witness");
    match witness {
        CondExpWitness::NotSubalgebra(a, b) => {
            // reproducible witness: symmetric pair with a non-symmetric product
            assert!(spectral_norm(&(&a - a.transpose())) < 1e-9);
            assert!(spectral_norm(&(&b - b.transpose())) < 1e-9);
            let prod = &a * &b;
            assert!(spectral_norm(&(&prod - prod.transpose())) > 1e-8);
        }
        CondExpWitness::Bimodule(..) => panic!("expected a subalgebra witness"),
    }
    println!("criterion 6: PASS (the symmetrizing projection is not a conditional expectation)");
}

#[test]
fn criterion_07_jordan_decomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..100 {
        let z = random_matrix(4, &mut rng);
        let herm = (&z + &z.adjoint()).scale(0.5);
        let h = HermitianFunctional::new(herm, 1e-10).unwrap();
        let (hp, hm) = jordan_decompose(&h);
        assert!(is_psd(hp.rep(), 1e-10), "trial {}", trial);
        assert!(is_psd(hm.rep(), 1e-10), "trial {}", trial);
        let gap = (h.dual_norm() - hp.dual_norm() - hm.dual_norm()).abs();
        assert!(gap <= 1e-10, "trial {}: trace norm gap {}", trial, gap);
        let cross = spectral_norm(&(hp.rep() * hm.rep()));
        assert!(cross <= 1e-10, "trial {}: h+ h- = {}", trial, cross);
    }
    println!("criterion 7: PASS (Jordan decomposition laws on 100 random Hermitian functionals)");
}

#[test]
fn criterion_08_weight_laws() {
    let constant = WeightSequence::constant(1.0).unwrap();
    for n in 1..=10_000usize {
        let expect = 2.0 / n as f64;
        let rel = (constant.p_condition_value(n) - expect).abs() / expect;
        assert!(rel <= 1e-14, "n = {}: relative error {}", n, rel);
    }
    for alpha in [0.5, 1.0, 2.0] {
        let w = WeightSequence::power(alpha).unwrap();
        for n in [1usize, 2, 10, 100, 1000] {
            let expect = 2.0 * w.weight(n) / w.prefix_sum(n);
            let rel = (w.p_condition_value(n) - expect).abs() / expect;
            assert!(rel <= 1e-12, "alpha {}, n {}: relative error {}", alpha, n, rel);
        }
    }
    // one-way implication, through the CLI: power(0.5) fails Cesaro
    // domination yet passes the P(n) condition
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("w.toml");
    std::fs::write(
        &config_path,
        r#"
[operator]
kind = "identity"
dim = 2

[weights]
kind = "power"
alpha = 0.5

[run]
n_max = 10000
"#,
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_riesz-ergodic"))
        .args(["validate-weights", "--config"])
        .arg(&config_path)
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("cesaro domination") && stdout.contains("fail"), "{}", stdout);
    assert!(stdout.contains("P(n) -> 0:                     pass"), "{}", stdout);
    assert_eq!(out.status.code(), Some(3), "a failing check exits 3");
    println!("criterion 8: PASS (P(n) closed forms; one-way implication visible in validate-weights)");
}

#[test]
fn criterion_09_jordan_block_negative_control() {
    let s = jordan_block_map(2);
    let report = unique_ergodicity_check(&s, 1e-9, 0);
    assert!(!report.uniquely_ergodic_relative);
    assert!(report.intersection_dim >= 1);

    let dir = tempfile::tempdir().unwrap();
    let op_path = dir.path().join("jordan.txt");
    std::fs::write(&op_path, riesz_ergodic::matrix_core::format_matrix(s.rep())).unwrap();
    let config_path = dir.path().join("c.toml");
    std::fs::write(
        &config_path,
        format!(
            r#"
[operator]
kind = "file"
path = "{}"

[weights]
kind = "constant"

[run]
n_max = 64
"#,
            op_path.display()
        ),
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_riesz-ergodic"))
        .args(["converge", "--config"])
        .arg(&config_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    println!("criterion 9: PASS (Jordan-block map rejected; converge exits 2)");
}

/// Batched Riesz mean over columns: an iteration oracle independent of the
/// algebraic projection it cross-checks.
fn batched_cesaro_mean(s: &SuperOperator, xs: &[CMatrix], n: usize) -> Vec<CMatrix> {
    let d = s.dim();
    let d2 = d * d;
    let mut orbit = CMatrix::zeros(d2, xs.len());
    for (k, x) in xs.iter().enumerate() {
        orbit.set_column(k, &vec_mat(x));
    }
    let mut sum = CMatrix::zeros(d2, xs.len());
    for _ in 0..n {
        orbit = s.rep() * orbit;
        sum += &orbit;
    }
    (0..xs.len())
        .map(|k| {
            riesz_ergodic::matrix_core::unvec(d, &sum.column(k).unscale(n as f64).into_owned())
        })
        .collect()
}

#[test]
fn criterion_10_oracle_cross_check() {
    let uniform = StochasticMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
    let cases: Vec<(&str, SuperOperator)> = vec![
        ("transpose d=3", SuperOperator::transpose_map(3)),
        ("entangled psi", SuperOperator::entangled_psi(&pi_example(0.5))),
        ("uniform 2x2 psi", SuperOperator::entangled_psi(&uniform)),
    ];
    let n = 100_000usize;
    let bound_coeff = 2e-5; // P(10^5) for constant weights
    for (name, s) in cases {
        let e = et_projection(&s, 1e-9).unwrap();
        let xs: Vec<CMatrix> = (0..10)
            .map(|seed| random_matrix(s.dim(), &mut ChaCha8Rng::seed_from_u64(1000 + seed)))
            .collect();
        let means = batched_cesaro_mean(&s, &xs, n);
        for (x, m) in xs.iter().zip(means.iter()) {
            let err = spectral_norm(&(m - e.apply(x).unwrap()));
            let bound = bound_coeff * spectral_norm(x) + 1e-8;
            assert!(err <= bound, "{}: err {} > bound {}", name, err, bound);
        }
    }
    println!("criterion 10: PASS (iterated means at n = 10^5 match the algebraic projection)");
}

#[test]
fn single_step_mean_consistency_with_oracle() {
    // the incremental accumulator agrees with the batched oracle
    let s = SuperOperator::entangled_psi(&pi_example(0.5));
    let w = WeightSequence::constant(1.0).unwrap();
    let x = unit_norm_matrix(3, 3);
    let m1 = riesz_mean(&s, &x, &w, 257).unwrap();
    let m2 = &batched_cesaro_mean(&s, std::slice::from_ref(&x), 257)[0];
    assert!(spectral_norm(&(m1 - m2)) < 1e-12);
}
