//! Fixed-point subspaces: A^T = ker(T - I) inside M_d(C), fixed vectors of
//! stochastic matrices, the diagonal-embedding identity between the two, and
//! the subalgebra test.

use crate::error::{Error, Result};
use crate::matrix_core::{
    self, diag_embed, hs_inner, identity, null_space, projector_from_vectors, spectral_norm,
    unvec, vec_mat, CMatrix, CVector,
};
use crate::superop::{StochasticMatrix, SuperOperator};

/// Orthonormal (Hilbert-Schmidt) basis of a subspace of M_d(C).
#[derive(Debug, Clone)]
pub struct FixedSpace {
    pub dim: usize,
    pub basis: Vec<CMatrix>,
}

/// Orthonormal basis of a subspace of C^d.
#[derive(Debug, Clone)]
pub struct VectorFixedSpace {
    pub dim: usize,
    pub basis: Vec<CVector>,
}

impl FixedSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Orthogonal projector on the vectorized algebra, sum vec(b) vec(b)*.
    pub fn projector(&self) -> CMatrix {
        let vecs: Vec<CVector> = self.basis.iter().map(vec_mat).collect();
        projector_from_vectors(self.dim * self.dim, &vecs)
    }

    /// Orthogonal projection of x onto the span of the basis.
    pub fn project(&self, x: &CMatrix) -> Result<CMatrix> {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for b in &self.basis {
            let coeff = hs_inner(b, x)?;
            out += b.map(|z| z * coeff);
        }
        Ok(out)
    }
}

impl VectorFixedSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

/// A^T = ker(rep - I), returned as an HS-orthonormal matrix basis.
pub fn fixed_space(s: &SuperOperator, tol: f64) -> FixedSpace {
    let d = s.dim();
    let n = d * d;
    let m = s.rep() - CMatrix::identity(n, n);
    let basis = null_space(&m, tol)
        .into_iter()
        .map(|v| unvec(d, &v))
        .collect();
    FixedSpace { dim: d, basis }
}

/// Fix(Pi) = ker(Pi - I): right fixed vectors Pi psi = psi.
pub fn fix_stochastic(pi: &StochasticMatrix, tol: f64) -> VectorFixedSpace {
    let d = pi.dim();
    let m = pi.to_complex() - identity(d);
    VectorFixedSpace {
        dim: d,
        basis: null_space(&m, tol),
    }
}

/// Spectral-norm distance of the orthogonal projectors of two subspaces given
/// by orthonormal bases of vectorized matrices.
pub fn projector_distance(dim2: usize, a: &[CVector], b: &[CVector]) -> f64 {
    let pa = projector_from_vectors(dim2, a);
    let pb = projector_from_vectors(dim2, b);
    spectral_norm(&(pa - pb))
}

#[derive(Debug, Clone)]
pub struct LemmaFixedCheck {
    pub holds: bool,
    pub distance: f64,
    pub dim_operator_side: usize,
    pub dim_vector_side: usize,
}

/// The fixed space of Psi equals the diagonal embeddings of Fix(Pi), compared
/// as orthogonal projectors in spectral norm.
pub fn verify_lemma_fixed(pi: &StochasticMatrix, tol: f64) -> LemmaFixedCheck {
    let d = pi.dim();
    let psi = SuperOperator::entangled_psi(pi);
    let left = fixed_space(&psi, matrix_core::DEFAULT_TOL);
    let right = fix_stochastic(pi, matrix_core::DEFAULT_TOL);
    // Fix(Pi) basis vectors are orthonormal in C^d; their diagonal embeddings
    // stay orthonormal under the HS inner product.
    let left_vecs: Vec<CVector> = left.basis.iter().map(vec_mat).collect();
    let right_vecs: Vec<CVector> = right.basis.iter().map(|v| vec_mat(&diag_embed(v))).collect();
    let distance = projector_distance(d * d, &left_vecs, &right_vecs);
    LemmaFixedCheck {
        holds: distance <= tol,
        distance,
        dim_operator_side: left.dimension(),
        dim_vector_side: right.dimension(),
    }
}

#[derive(Debug, Clone)]
pub struct SubalgebraCheck {
    pub closed: bool,
    /// Basis pair whose product leaves the span, with its residual.
    pub witness: Option<(CMatrix, CMatrix, f64)>,
}

/// Is the span of the basis closed under matrix multiplication?
pub fn is_subalgebra(f: &FixedSpace, tol: f64) -> Result<SubalgebraCheck> {
    for bi in &f.basis {
        for bj in &f.basis {
            let prod = bi * bj;
            let residual = spectral_norm(&(&prod - f.project(&prod)?));
            if residual > tol {
                return Ok(SubalgebraCheck {
                    closed: false,
                    witness: Some((bi.clone(), bj.clone(), residual)),
                });
            }
        }
    }
    Ok(SubalgebraCheck {
        closed: true,
        witness: None,
    })
}

/// Ambient-span helper for tests: orthonormal space from arbitrary matrices.
pub fn span_of(dim: usize, mats: &[CMatrix]) -> Result<FixedSpace> {
    if mats.is_empty() {
        return Ok(FixedSpace { dim, basis: vec![] });
    }
    let n = dim * dim;
    let mut stack = CMatrix::zeros(n, mats.len());
    for (k, m) in mats.iter().enumerate() {
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch("span_of: mixed dimensions".into()));
        }
        stack.set_column(k, &vec_mat(m));
    }
    let basis = matrix_core::range_space(&stack, matrix_core::DEFAULT_TOL)
        .into_iter()
        .map(|v| unvec(dim, &v))
        .collect();
    Ok(FixedSpace { dim, basis })
}
