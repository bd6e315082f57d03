//! Complex dense matrices: norms, Hilbert-Schmidt pairing, Schur products,
//! PSD tests, null spaces, and the text file format shared by the CLI.

use std::path::Path;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default relative threshold for rank decisions, see [`null_space`].
pub const DEFAULT_TOL: f64 = 1e-9;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Matrix unit e_ij (0-based indices).
pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = c(1.0, 0.0);
    m
}

/// All-ones matrix, the unit of Schur multiplication.
pub fn all_ones(d: usize) -> CMatrix {
    CMatrix::from_element(d, d, c(1.0, 0.0))
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn all_finite(x: &CMatrix) -> bool {
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Entrywise (Schur) product of two matrices of the same dimension.
pub fn schur_product(x: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
    if x.nrows() != y.nrows() || x.ncols() != y.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "schur_product: {}x{} vs {}x{}",
            x.nrows(),
            x.ncols(),
            y.nrows(),
            y.ncols()
        )));
    }
    Ok(x.component_mul(y))
}

/// Diagonal matrix with the given vector on the diagonal.
pub fn diag_embed(a: &CVector) -> CMatrix {
    let d = a.len();
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = a[i];
    }
    m
}

/// Largest singular value.
pub fn spectral_norm(x: &CMatrix) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.clone().singular_values().max()
}

/// Sum of singular values.
pub fn trace_norm(x: &CMatrix) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.clone().singular_values().sum()
}

/// Hilbert-Schmidt inner product trace(x* y).
pub fn hs_inner(x: &CMatrix, y: &CMatrix) -> Result<C64> {
    if x.nrows() != y.nrows() || x.ncols() != y.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "hs_inner: {}x{} vs {}x{}",
            x.nrows(),
            x.ncols(),
            y.nrows(),
            y.ncols()
        )));
    }
    let mut acc = c(0.0, 0.0);
    for (a, b) in x.iter().zip(y.iter()) {
        acc += a.conj() * b;
    }
    Ok(acc)
}

pub fn hs_norm(x: &CMatrix) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn hermiticity_residual(x: &CMatrix) -> f64 {
    spectral_norm(&(x - x.adjoint()))
}

/// Eigenvalues of the Hermitian part (x + x*)/2, ascending.
pub fn hermitian_eigenvalues(x: &CMatrix) -> Vec<f64> {
    let h = (x + x.adjoint()).scale(0.5);
    let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Hermitian within `tol` in spectral norm and min eigenvalue >= -tol.
pub fn is_psd(x: &CMatrix, tol: f64) -> bool {
    if hermiticity_residual(x) > tol {
        return false;
    }
    let ev = hermitian_eigenvalues(x);
    ev.first().map(|&l| l >= -tol).unwrap_or(true)
}

/// Column-stacked vectorization: vec(x)[i + j*d] = x[(i, j)].
pub fn vec_mat(x: &CMatrix) -> CVector {
    let d = x.nrows();
    let n = x.ncols();
    CVector::from_fn(d * n, |k, _| x[(k % d, k / d)])
}

pub fn unvec(d: usize, v: &CVector) -> CMatrix {
    assert_eq!(v.len(), d * d, "unvec: length {} != {}^2", v.len(), d);
    CMatrix::from_fn(d, d, |i, j| v[i + j * d])
}

/// Orthonormal basis of the numerical null space of `m`.
///
/// Singular values below tau = tol * max(sigma_max, 1) count as zero.
pub fn null_space(m: &CMatrix, tol: f64) -> Vec<CVector> {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let tau = tol * sigma_max.max(1.0);
    let mut basis = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= tau {
            basis.push(v_t.row(k).adjoint());
        }
    }
    // thin SVD yields min(nrows, ncols) singular triples; for wide matrices the
    // remaining right-singular directions are null as well
    debug_assert!(v_t.nrows() == n || m.nrows() >= n);
    basis
}

/// Orthonormal basis of the numerical column space of `m`, same threshold
/// policy as [`null_space`].
pub fn range_space(m: &CMatrix, tol: f64) -> Vec<CVector> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("svd requested u");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let tau = tol * sigma_max.max(1.0);
    let mut basis = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > tau {
            basis.push(u.column(k).into_owned());
        }
    }
    basis
}

pub fn rank(m: &CMatrix, tol: f64) -> usize {
    let sv = m.clone().singular_values();
    let sigma_max = sv.iter().cloned().fold(0.0f64, f64::max);
    let tau = tol * sigma_max.max(1.0);
    sv.iter().filter(|&&s| s > tau).count()
}

/// Orthogonal projector sum_k v_k v_k* for an orthonormal family.
pub fn projector_from_vectors(dim: usize, basis: &[CVector]) -> CMatrix {
    let mut p = CMatrix::zeros(dim, dim);
    for v in basis {
        p += v * v.adjoint();
    }
    p
}

fn parse_complex_row(line: &str, d: usize, row: usize) -> Result<Vec<C64>> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() != 2 * d {
        return Err(Error::Parse(format!(
            "row {}: expected {} numbers, found {}",
            row + 1,
            2 * d,
            toks.len()
        )));
    }
    let mut out = Vec::with_capacity(d);
    for j in 0..d {
        let re: f64 = toks[2 * j]
            .parse()
            .map_err(|_| Error::Parse(format!("row {}: bad number {:?}", row + 1, toks[2 * j])))?;
        let im: f64 = toks[2 * j + 1].parse().map_err(|_| {
            Error::Parse(format!("row {}: bad number {:?}", row + 1, toks[2 * j + 1]))
        })?;
        out.push(c(re, im));
    }
    Ok(out)
}

/// Parse the shared matrix text format: line 1 holds the dimension d, each of
/// the d following lines holds 2d decimals re im re im ...
pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let dim_line = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let d: usize = dim_line
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad dimension line {:?}", dim_line.trim())))?;
    if d == 0 {
        return Err(Error::Parse("dimension must be positive".into()));
    }
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing row {} of {}", i + 1, d)))?;
        for (j, z) in parse_complex_row(line, d, i)?.into_iter().enumerate() {
            m[(i, j)] = z;
        }
    }
    if lines.next().is_some() {
        return Err(Error::Parse(format!("trailing data after {} rows", d)));
    }
    if !all_finite(&m) {
        return Err(Error::Parse("matrix contains non-finite entries".into()));
    }
    Ok(m)
}

pub fn read_matrix(path: &Path) -> Result<CMatrix> {
    let text = std::fs::read_to_string(path)?;
    parse_matrix(&text)
}

pub fn format_matrix(m: &CMatrix) -> String {
    let d = m.nrows();
    let mut out = format!("{}\n", d);
    for i in 0..d {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:.16e} {:.16e}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
