//! Linear maps on M_d(C) as d^2 x d^2 superoperators over column-stacked
//! vectorizations, rep * vec(x) = vec(T(x)).
//!
//! Builders cover the identity, the transpose map, and the entangled maps
//! P(x)_{ij} = sum_{k,l} sqrt(p_ik p_jl) x_kl and Psi(x) = 1 (.) P(x) coming
//! from a stochastic matrix. Property tests: unitality plus sampled
//! positivity (Markov), Schur-identity preservation, entanglement, complete
//! positivity via the Choi matrix, and the Hilbert-Schmidt adjoint.

use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix_core::{
    self, c, hermitian_eigenvalues, hermiticity_residual, identity, is_psd, matrix_unit,
    spectral_norm, unvec, vec_mat, CMatrix, CVector,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    dim: usize,
    rep: CMatrix,
}

/// Row-stochastic real matrix: entries >= 0, rows summing to 1 within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    dim: usize,
    entries: DMatrix<f64>,
}

/// Result of the sampled Markov test: exact unitality residual plus
/// positivity on random rank-one PSD inputs and the diagonal matrix units.
#[derive(Debug, Clone)]
pub struct MarkovReport {
    pub unital: bool,
    pub unital_residual: f64,
    pub positivity_samples: usize,
    pub positivity_violations: usize,
    pub worst_negative_eigenvalue: f64,
}

impl MarkovReport {
    pub fn passes(&self) -> bool {
        self.unital && self.positivity_violations == 0
    }
}

impl StochasticMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::InvalidStochastic(format!(
                "must be square and nonempty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let d = entries.nrows();
        for i in 0..d {
            let mut row_sum = 0.0;
            for j in 0..d {
                let p = entries[(i, j)];
                if !(p >= 0.0) || !p.is_finite() {
                    return Err(Error::InvalidStochastic(format!(
                        "entry ({}, {}) = {} is negative or non-finite",
                        i, j, p
                    )));
                }
                row_sum += p;
            }
            if (row_sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidStochastic(format!(
                    "row {} sums to {}, not 1",
                    i, row_sum
                )));
            }
        }
        Ok(Self { dim: d, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidStochastic("rows must form a square matrix".into()));
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    /// Parse from the shared matrix text format; imaginary parts must vanish.
    pub fn from_file(path: &Path) -> Result<Self> {
        let m = matrix_core::read_matrix(path)?;
        let d = m.nrows();
        for z in m.iter() {
            if z.im.abs() > 1e-12 {
                return Err(Error::InvalidStochastic(
                    "stochastic matrix must have real entries".into(),
                ));
            }
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| m[(i, j)].re))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Complex copy, for null-space computations.
    pub fn to_complex(&self) -> CMatrix {
        CMatrix::from_fn(self.dim, self.dim, |i, j| c(self.entries[(i, j)], 0.0))
    }
}

/// Complex standard Gaussian vector, normalized; the sampling distribution
/// behind every seeded positivity check.
pub fn random_unit_vector(d: usize, rng: &mut impl Rng) -> CVector {
    loop {
        let v = CVector::from_fn(d, |_, _| {
            // Box-Muller pairs
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            let r = (-2.0 * u1.ln()).sqrt();
            c(r * (2.0 * std::f64::consts::PI * u2).cos(), {
                let u3: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                let u4: f64 = rng.gen_range(0.0..1.0);
                (-2.0 * u3.ln()).sqrt() * (2.0 * std::f64::consts::PI * u4).sin()
            })
        });
        let n = v.norm();
        if n > 1e-8 {
            return v.unscale(n);
        }
    }
}

/// Random matrix with complex Gaussian entries (unnormalized).
pub fn random_matrix(d: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        c(r * theta.cos(), r * theta.sin())
    })
}

impl SuperOperator {
    /// Wrap a raw d^2 x d^2 representation.
    pub fn from_rep(rep: CMatrix) -> Result<Self> {
        if rep.nrows() != rep.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "superoperator rep must be square, got {}x{}",
                rep.nrows(),
                rep.ncols()
            )));
        }
        let n = rep.nrows();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n || d == 0 {
            return Err(Error::DimensionMismatch(format!(
                "rep size {} is not the square of a matrix dimension",
                n
            )));
        }
        if !matrix_core::all_finite(&rep) {
            return Err(Error::Parse("superoperator rep has non-finite entries".into()));
        }
        Ok(Self { dim: d, rep })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_rep(matrix_core::read_matrix(path)?)
    }

    pub fn identity_map(d: usize) -> Self {
        Self {
            dim: d,
            rep: CMatrix::identity(d * d, d * d),
        }
    }

    /// x -> x^t. An involution, positive but not completely positive for d >= 2.
    pub fn transpose_map(d: usize) -> Self {
        let mut rep = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                // T(e_ij) = e_ji: vec index (i, j) -> (j, i)
                rep[(j + i * d, i + j * d)] = c(1.0, 0.0);
            }
        }
        Self { dim: d, rep }
    }

    /// Schur multiplication by the identity: x -> 1 (.) x, keeping the diagonal.
    pub fn diagonal_mask(d: usize) -> Self {
        let mut rep = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            rep[(i + i * d, i + i * d)] = c(1.0, 0.0);
        }
        Self { dim: d, rep }
    }

    /// Entangled operator of a stochastic matrix:
    /// P(x)_{ij} = sum_{k,l} sqrt(p_ik p_jl) x_kl.
    pub fn entangled_p(pi: &StochasticMatrix) -> Self {
        let d = pi.dim();
        let p = pi.entries();
        let mut rep = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        rep[(i + j * d, k + l * d)] = c((p[(i, k)] * p[(j, l)]).sqrt(), 0.0);
                    }
                }
            }
        }
        Self { dim: d, rep }
    }

    /// Psi(x) = 1 (.) P(x), the diagonal restriction of the entangled operator.
    pub fn entangled_psi(pi: &StochasticMatrix) -> Self {
        Self::diagonal_mask(pi.dim()).compose(&Self::entangled_p(pi))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rep(&self) -> &CMatrix {
        &self.rep
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "apply: operator on M_{}, input {}x{}",
                self.dim,
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(unvec(self.dim, &(&self.rep * vec_mat(x))))
    }

    /// self after other: (self . other)(x) = self(other(x)).
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "compose: dimension mismatch");
        Self {
            dim: self.dim,
            rep: &self.rep * &other.rep,
        }
    }

    /// Hilbert-Schmidt adjoint: hs_inner(S x, y) = hs_inner(x, S* y).
    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            rep: self.rep.adjoint(),
        }
    }

    /// Choi matrix sum_{ij} e_ij (x) T(e_ij), unnormalized.
    pub fn choi(&self) -> Result<CMatrix> {
        let d = self.dim;
        let mut choi = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let t = self.apply(&matrix_unit(d, i, j))?;
                for a in 0..d {
                    for b in 0..d {
                        choi[(i * d + a, j * d + b)] = t[(a, b)];
                    }
                }
            }
        }
        Ok(choi)
    }

    /// CP iff the Choi matrix is PSD.
    pub fn is_completely_positive(&self, tol: f64) -> Result<bool> {
        Ok(is_psd(&self.choi()?, tol))
    }

    /// Unitality exactly, positivity on seeded rank-one samples vv* plus the
    /// diagonal matrix units. A sampled verdict, not a certificate.
    pub fn check_markov(&self, n_samples: usize, seed: u64, tol: f64) -> MarkovReport {
        assert!(n_samples >= 1);
        let d = self.dim;
        let one = identity(d);
        let unital_residual = spectral_norm(&(self.apply(&one).unwrap() - &one));

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut inputs: Vec<CMatrix> = Vec::with_capacity(n_samples + d);
        for _ in 0..n_samples {
            let v = random_unit_vector(d, &mut rng);
            inputs.push(&v * v.adjoint());
        }
        for i in 0..d {
            inputs.push(matrix_unit(d, i, i));
        }

        let mut violations = 0usize;
        let mut worst = 0.0f64;
        for x in &inputs {
            let y = self.apply(x).unwrap();
            let herm_res = hermiticity_residual(&y);
            let min_ev = hermitian_eigenvalues(&y)[0];
            worst = worst.min(min_ev);
            if min_ev < -tol || herm_res > tol {
                violations += 1;
            }
        }
        MarkovReport {
            unital: unital_residual <= tol,
            unital_residual,
            positivity_samples: inputs.len(),
            positivity_violations: violations,
            worst_negative_eigenvalue: worst,
        }
    }

    /// 1 (.) S(1) = 1 within tol.
    pub fn is_schur_identity_preserving(&self, tol: f64) -> bool {
        let one = identity(self.dim);
        let masked = matrix_core::schur_product(&one, &self.apply(&one).unwrap()).unwrap();
        spectral_norm(&(masked - &one)) <= tol
    }

    /// Schur-identity-preserving with S(1) != 1.
    pub fn is_entangled(&self, tol: f64) -> bool {
        let one = identity(self.dim);
        self.is_schur_identity_preserving(tol)
            && spectral_norm(&(self.apply(&one).unwrap() - &one)) > tol
    }
}

#[cfg(test)]
pub(crate) fn pi_example(u: f64) -> StochasticMatrix {
    StochasticMatrix::from_rows(&[
        vec![1.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![0.0, u, 1.0 - u],
    ])
    .unwrap()
}
