//! Riesz means of operator orbits and the unique-ergodicity machinery: the
//! checker for "fixed space plus coboundaries spans everything", the
//! invariant projection E_T onto the fixed space, the P(n) error estimate,
//! Jordan decomposition of Hermitian functionals, invariant functionals,
//! state extension through E_T*, and the conditional-expectation test.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fixed_points::{self, FixedSpace};
use crate::matrix_core::{
    self, c, matrix_unit, range_space, spectral_norm, trace_norm, unvec, vec_mat, CMatrix,
    CVector, C64,
};
use crate::superop::{random_matrix, random_unit_vector, MarkovReport, SuperOperator};
use crate::weights::WeightSequence;

/// Incremental Riesz mean M_n(x) = (1/S_n) sum_{k=1..n} p_k T^k x.
///
/// The sum starts at k = 1: the first accumulated term is p_1 T x.
pub struct RieszMeanAccumulator<'a> {
    superop: &'a SuperOperator,
    weights: &'a WeightSequence,
    n: usize,
    orbit: CVector,
    weighted_sum: CVector,
}

impl<'a> RieszMeanAccumulator<'a> {
    pub fn new(
        superop: &'a SuperOperator,
        x: &CMatrix,
        weights: &'a WeightSequence,
    ) -> Result<Self> {
        if x.nrows() != superop.dim() || x.ncols() != superop.dim() {
            return Err(Error::DimensionMismatch(format!(
                "accumulator: operator on M_{}, input {}x{}",
                superop.dim(),
                x.nrows(),
                x.ncols()
            )));
        }
        let v = vec_mat(x);
        Ok(Self {
            superop,
            weights,
            n: 0,
            weighted_sum: CVector::zeros(v.len()),
            orbit: v,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn step(&mut self) {
        self.n += 1;
        self.orbit = self.superop.rep() * &self.orbit;
        let p = self.weights.weight(self.n);
        self.weighted_sum.axpy(c(p, 0.0), &self.orbit, c(1.0, 0.0));
    }

    pub fn advance_to(&mut self, n: usize) {
        while self.n < n {
            self.step();
        }
    }

    pub fn mean(&self) -> CMatrix {
        assert!(self.n >= 1, "mean undefined before the first step");
        let s = self.weights.prefix_sum(self.n);
        unvec(self.superop.dim(), &self.weighted_sum.unscale(s))
    }
}

pub fn riesz_mean(
    superop: &SuperOperator,
    x: &CMatrix,
    weights: &WeightSequence,
    n: usize,
) -> Result<CMatrix> {
    assert!(n >= 1);
    let mut acc = RieszMeanAccumulator::new(superop, x, weights)?;
    acc.advance_to(n);
    Ok(acc.mean())
}

#[derive(Debug, Clone)]
pub struct ErgodicityReport {
    pub markov: MarkovReport,
    pub dim_fixed: usize,
    /// dim ker(T - I) + rank(T - I) = d^2 and the stacked bases have full rank.
    pub sum_spans_all: bool,
    pub intersection_dim: usize,
    pub uniquely_ergodic_relative: bool,
    /// Fixed space is one-dimensional on top of relative unique ergodicity.
    pub ergodic: bool,
    pub projection: Option<SuperOperator>,
}

/// Decide whether ker(T - I) (+) Ran(T - I) = M_d(C), the finite-dimensional
/// form of the spanning condition, and build E_T when it does. Non-Markov
/// maps are accepted; the Markov report flags them.
pub fn unique_ergodicity_check(s: &SuperOperator, tol: f64, seed: u64) -> ErgodicityReport {
    let d2 = s.dim() * s.dim();
    let markov = s.check_markov(200, seed, tol.max(1e-10));
    let fixed = fixed_points::fixed_space(s, tol);
    let m = s.rep() - CMatrix::identity(d2, d2);
    let range = range_space(&m, tol);
    let dim_fixed = fixed.dimension();
    let r = range.len();

    let mut stacked = CMatrix::zeros(d2, dim_fixed + r);
    for (k, b) in fixed.basis.iter().enumerate() {
        stacked.set_column(k, &vec_mat(b));
    }
    for (k, v) in range.iter().enumerate() {
        stacked.set_column(dim_fixed + k, v);
    }
    let stacked_rank = if dim_fixed + r == 0 {
        0
    } else {
        matrix_core::rank(&stacked, tol)
    };
    let sum_spans_all = dim_fixed + r == d2 && stacked_rank == d2;
    let intersection_dim = dim_fixed + r - stacked_rank;
    let uniquely_ergodic_relative = sum_spans_all;
    let ergodic = uniquely_ergodic_relative && dim_fixed == 1;
    let projection = if sum_spans_all {
        et_projection(s, tol).ok()
    } else {
        None
    };
    ErgodicityReport {
        markov,
        dim_fixed,
        sum_spans_all,
        intersection_dim,
        uniquely_ergodic_relative,
        ergodic,
        projection,
    }
}

/// The projection onto ker(T - I) along Ran(T - I), as a superoperator.
///
/// Built from the block basis [F | R]: E = B D B^{-1} with D selecting the
/// fixed-space columns. Fails when the sum is not direct.
pub fn et_projection(s: &SuperOperator, tol: f64) -> Result<SuperOperator> {
    let d2 = s.dim() * s.dim();
    let fixed = fixed_points::fixed_space(s, tol);
    let m = s.rep() - CMatrix::identity(d2, d2);
    let range = range_space(&m, tol);
    if fixed.dimension() + range.len() != d2 {
        return Err(Error::SumNotDirect(format!(
            "dim ker = {}, rank = {}, ambient = {}",
            fixed.dimension(),
            range.len(),
            d2
        )));
    }
    let mut basis = CMatrix::zeros(d2, d2);
    for (k, b) in fixed.basis.iter().enumerate() {
        basis.set_column(k, &vec_mat(b));
    }
    for (k, v) in range.iter().enumerate() {
        basis.set_column(fixed.dimension() + k, v);
    }
    let inv = basis.clone().try_inverse().ok_or_else(|| {
        Error::SumNotDirect("fixed space and coboundary range overlap numerically".into())
    })?;
    let mut selector = CMatrix::zeros(d2, d2);
    for k in 0..fixed.dimension() {
        selector[(k, k)] = c(1.0, 0.0);
    }
    SuperOperator::from_rep(basis * selector * inv)
}

/// Split x = x_fix + (y - T y) with x_fix = E_T x and y the minimum-norm
/// least-squares solution of (I - T) y = x - x_fix.
pub fn decompose(s: &SuperOperator, x: &CMatrix, tol: f64) -> Result<(CMatrix, CMatrix)> {
    let d = s.dim();
    let d2 = d * d;
    let e = et_projection(s, tol)?;
    let x_fix = e.apply(x)?;
    let rhs = x - &x_fix;
    let m = CMatrix::identity(d2, d2) - s.rep();
    let svd = m.svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let y_vec = svd
        .solve(&vec_mat(&rhs), tol * sigma_max.max(1.0))
        .map_err(|e| Error::SumNotDirect(e.to_string()))?;
    let y = unvec(d, &y_vec);
    let residual = spectral_norm(&(&x_fix + (&y - s.apply(&y)?) - x));
    if residual > tol.max(1e-12) * spectral_norm(x).max(1.0) * 1e3 {
        return Err(Error::SumNotDirect(format!(
            "reconstruction residual {} too large",
            residual
        )));
    }
    Ok((x_fix, y))
}

#[derive(Debug, Clone)]
pub struct EstimateRow {
    pub n: usize,
    pub p_n: f64,
    pub s_n: f64,
    pub p_condition: f64,
    pub err: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Check the convergence estimate ||M_n(x) - E_T x|| <= P(n) ||x|| at each
/// checkpoint.
pub fn verify_estimate(
    s: &SuperOperator,
    x: &CMatrix,
    weights: &WeightSequence,
    checkpoints: &[usize],
    tol: f64,
) -> Result<Vec<EstimateRow>> {
    assert!(checkpoints.windows(2).all(|w| w[0] < w[1]), "checkpoints must ascend");
    let e = et_projection(s, tol)?;
    let target = e.apply(x)?;
    let norm_x = spectral_norm(x);
    let mut acc = RieszMeanAccumulator::new(s, x, weights)?;
    let mut rows = Vec::with_capacity(checkpoints.len());
    for &n in checkpoints {
        assert!(n >= 1);
        acc.advance_to(n);
        let err = spectral_norm(&(acc.mean() - &target));
        let p_condition = weights.p_condition_value(n);
        let bound = p_condition * norm_x;
        rows.push(EstimateRow {
            n,
            p_n: weights.weight(n),
            s_n: weights.prefix_sum(n),
            p_condition,
            err,
            bound,
            ok: err <= bound + tol,
        });
    }
    Ok(rows)
}

/// A Hermitian functional x -> trace(rho x), represented by its Hermitian
/// matrix rho.
#[derive(Debug, Clone)]
pub struct HermitianFunctional {
    rep: CMatrix,
}

impl HermitianFunctional {
    pub fn new(rep: CMatrix, tol: f64) -> Result<Self> {
        let res = matrix_core::hermiticity_residual(&rep);
        if res > tol {
            return Err(Error::NotHermitian(format!(
                "representing matrix deviates by {} in spectral norm",
                res
            )));
        }
        Ok(Self { rep })
    }

    pub fn rep(&self) -> &CMatrix {
        &self.rep
    }

    pub fn value(&self, x: &CMatrix) -> Result<C64> {
        if x.nrows() != self.rep.nrows() || x.ncols() != self.rep.ncols() {
            return Err(Error::DimensionMismatch("functional value".into()));
        }
        Ok((&self.rep * x).trace())
    }

    /// Dual norm of the functional: the trace norm of rho.
    pub fn dual_norm(&self) -> f64 {
        trace_norm(&self.rep)
    }
}

/// Spectral split h = h_plus - h_minus with both parts PSD, h_plus h_minus = 0
/// and additive trace norms.
pub fn jordan_decompose(
    h: &HermitianFunctional,
) -> (HermitianFunctional, HermitianFunctional) {
    let herm = (h.rep() + h.rep().adjoint()).scale(0.5);
    let d = herm.nrows();
    let eig = herm.symmetric_eigen();
    let mut plus = CMatrix::zeros(d, d);
    let mut minus = CMatrix::zeros(d, d);
    for k in 0..eig.eigenvalues.len() {
        let lambda = eig.eigenvalues[k];
        let v = eig.eigenvectors.column(k);
        let proj = v * v.adjoint();
        if lambda > 0.0 {
            plus += proj.map(|z| z * c(lambda, 0.0));
        } else if lambda < 0.0 {
            minus += proj.map(|z| z * c(-lambda, 0.0));
        }
    }
    (
        HermitianFunctional { rep: plus },
        HermitianFunctional { rep: minus },
    )
}

/// Orthonormal basis of Hermitian matrices under the HS inner product:
/// e_ii, (e_ij + e_ji)/sqrt(2), i(e_ij - e_ji)/sqrt(2).
pub fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(d * d);
    for i in 0..d {
        basis.push(matrix_unit(d, i, i));
    }
    let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
    for i in 0..d {
        for j in (i + 1)..d {
            basis.push((matrix_unit(d, i, j) + matrix_unit(d, j, i)).scale(inv_sqrt2));
            let mut m = CMatrix::zeros(d, d);
            m[(i, j)] = c(0.0, inv_sqrt2);
            m[(j, i)] = c(0.0, -inv_sqrt2);
            basis.push(m);
        }
    }
    basis
}

fn real_null_space(m: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let tau = tol * sigma_max.max(1.0);
    let mut basis = Vec::new();
    for (k, &sv) in svd.singular_values.iter().enumerate() {
        if sv <= tau {
            basis.push(v_t.row(k).transpose());
        }
    }
    basis
}

/// Hermitian basis of the T-invariant Hermitian functionals, i.e. the real
/// solution space of T*(rho) = rho with rho = rho*.
pub fn invariant_functionals(s: &SuperOperator, tol: f64) -> Vec<HermitianFunctional> {
    let d = s.dim();
    let d2 = d * d;
    let adj = s.adjoint();
    let basis = hermitian_basis(d);
    // real-linear system over Hermitian coordinates: one complex (2 real)
    // constraint row per vec entry
    let mut system = DMatrix::<f64>::zeros(2 * d2, d2);
    for (a, h) in basis.iter().enumerate() {
        let w = vec_mat(&(adj.apply(h).unwrap() - h));
        for k in 0..d2 {
            system[(k, a)] = w[k].re;
            system[(d2 + k, a)] = w[k].im;
        }
    }
    real_null_space(&system, tol)
        .into_iter()
        .map(|coeffs| {
            let mut rho = CMatrix::zeros(d, d);
            for (a, h) in basis.iter().enumerate() {
                rho += h.scale(coeffs[a]);
            }
            HermitianFunctional { rep: rho }
        })
        .collect()
}

/// Extend a state psi on the fixed space (given by its values on the
/// orthonormal basis of `fixed_space(s)`) to the T-invariant density matrix
/// adjoint(E_T)(rho_0).
pub fn extend_state(
    s: &SuperOperator,
    psi_coeffs: &[C64],
    tol: f64,
) -> Result<HermitianFunctional> {
    let fixed = fixed_points::fixed_space(s, tol);
    if psi_coeffs.len() != fixed.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for a fixed space of dimension {}",
            psi_coeffs.len(),
            fixed.dimension()
        )));
    }
    let e = et_projection(s, tol)?;
    let d = s.dim();

    // rho_0 reproduces psi on the basis: trace(rho_0 b_j) = psi_j
    let mut rho0 = CMatrix::zeros(d, d);
    for (j, b) in fixed.basis.iter().enumerate() {
        rho0 += b.adjoint().map(|z| z * psi_coeffs[j]);
    }

    let check_tol = tol.max(1e-8);
    let at_identity = rho0.trace();
    if (at_identity - c(1.0, 0.0)).norm() > check_tol {
        return Err(Error::NotAState(format!(
            "value at the identity is {}, expected 1",
            at_identity
        )));
    }
    // positivity sampled on PSD elements of the fixed space
    let mut rng = ChaCha8Rng::seed_from_u64(0xE57A7E);
    for _ in 0..64 {
        let z = random_matrix(d, &mut rng);
        let herm = (fixed.project(&z)? + fixed.project(&z)?.adjoint()).scale(0.5);
        let cand = fixed.project(&herm)?;
        if matrix_core::spectral_norm(&(&cand - &herm)) > check_tol {
            continue; // Hermitian part left the space; skip the sample
        }
        if !matrix_core::is_psd(&cand, check_tol) {
            continue;
        }
        let val = (&rho0 * &cand).trace();
        if val.re < -check_tol || val.im.abs() > check_tol * cand.norm() {
            return Err(Error::NotAState(format!(
                "negative on a PSD fixed-space element: value {}",
                val
            )));
        }
    }

    let rho = e.adjoint().apply(&rho0)?;
    // hermitize away rounding before wrapping
    let rho = (rho.clone() + rho.adjoint()).scale(0.5);
    let functional = HermitianFunctional::new(rho, check_tol)?;
    let invariance = spectral_norm(&(s.adjoint().apply(functional.rep())? - functional.rep()));
    if invariance > check_tol {
        return Err(Error::NotAState(format!(
            "extension is not invariant: residual {}",
            invariance
        )));
    }
    Ok(functional)
}

#[derive(Debug, Clone)]
pub enum CondExpWitness {
    /// Fixed-space basis pair whose product leaves the span.
    NotSubalgebra(CMatrix, CMatrix),
    /// (a, x, b) with E(a x b) != a E(x) b.
    Bimodule(CMatrix, CMatrix, CMatrix, f64),
}

#[derive(Debug, Clone)]
pub struct CondExpCheck {
    pub holds: bool,
    pub witness: Option<CondExpWitness>,
}

/// Conditional-expectation test for a projection E onto the span F: F must be
/// a subalgebra and E(a x b) = a E(x) b for sampled a, b in F and random x.
pub fn is_conditional_expectation(
    e: &SuperOperator,
    f: &FixedSpace,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<CondExpCheck> {
    // precondition: E is a projection acting as the identity on F
    let idem = spectral_norm(&(e.compose(e).rep() - e.rep()));
    if idem > tol.max(1e-8) {
        return Err(Error::Config(format!("E is not idempotent: residual {}", idem)));
    }
    for b in &f.basis {
        let res = spectral_norm(&(e.apply(b)? - b));
        if res > tol.max(1e-8) {
            return Err(Error::Config(format!(
                "E does not fix the target space: residual {}",
                res
            )));
        }
    }

    let alg = fixed_points::is_subalgebra(f, tol.max(1e-8))?;
    if !alg.closed {
        let (a, b, _) = alg.witness.unwrap();
        return Ok(CondExpCheck {
            holds: false,
            witness: Some(CondExpWitness::NotSubalgebra(a, b)),
        });
    }

    let d = e.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_samples {
        let mut a = CMatrix::zeros(d, d);
        let mut b = CMatrix::zeros(d, d);
        let coeffs_a = random_unit_vector(f.basis.len().max(1), &mut rng);
        let coeffs_b = random_unit_vector(f.basis.len().max(1), &mut rng);
        for (k, base) in f.basis.iter().enumerate() {
            a += base.map(|z| z * coeffs_a[k]);
            b += base.map(|z| z * coeffs_b[k]);
        }
        let x = random_matrix(d, &mut rng);
        let x = x.unscale(spectral_norm(&x).max(1e-12));
        let lhs = e.apply(&(&a * &x * &b))?;
        let rhs = &a * e.apply(&x)? * &b;
        let residual = spectral_norm(&(lhs - rhs));
        if residual > tol.max(1e-8) {
            return Ok(CondExpCheck {
                holds: false,
                witness: Some(CondExpWitness::Bimodule(a, x, b, residual)),
            });
        }
    }
    Ok(CondExpCheck {
        holds: true,
        witness: None,
    })
}

/// The averaging projection (x + x^t)/2 of the transpose map, used across
/// tests and the CLI report.
pub fn symmetrizer(d: usize) -> SuperOperator {
    let t = SuperOperator::transpose_map(d);
    let rep = (SuperOperator::identity_map(d).rep() + t.rep()).scale(0.5);
    SuperOperator::from_rep(rep).expect("well-formed rep")
}

/// Jordan-block linear map: not Markov, fixed space meets the coboundary
/// range. The negative control for the spanning condition.
pub fn jordan_block_map(d: usize) -> SuperOperator {
    let d2 = d * d;
    assert!(d2 >= 2);
    let mut rep = CMatrix::identity(d2, d2);
    rep[(0, 1)] = c(1.0, 0.0);
    SuperOperator::from_rep(rep).expect("well-formed rep")
}
