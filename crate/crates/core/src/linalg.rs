//! Thin helpers over nalgebra for the small dense complex matrices used
//! throughout the crate.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Singular values together with the matching left singular vectors,
/// sorted by decreasing singular value.
pub struct SortedSvd {
    pub values: Vec<f64>,
    pub left: CMat,
}

pub fn sorted_svd(m: &CMat) -> SortedSvd {
    if m.nrows() == 0 || m.ncols() == 0 {
        return SortedSvd { values: Vec::new(), left: CMat::zeros(m.nrows(), 0) };
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values = order.iter().map(|&k| svd.singular_values[k]).collect();
    let left = CMat::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    SortedSvd { values, left }
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Smallest singular value of a (possibly rectangular) matrix; for a tall
/// matrix this is the lower frame bound of its columns.
pub fn sigma_min(m: &CMat) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

pub fn op_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn condition_number(m: &CMat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let h = hermitian_part(m);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).map(|z| z * 0.5)
}

pub fn inverse(m: &CMat) -> Option<CMat> {
    m.clone().try_inverse()
}

/// Inverse guarded by a condition-number ceiling.
pub fn guarded_inverse(m: &CMat, max_condition: f64) -> Result<CMat> {
    let condition = condition_number(m);
    if !(condition <= max_condition) {
        return Err(Error::MetricDegeneracy { condition });
    }
    inverse(m).ok_or(Error::MetricDegeneracy { condition })
}

/// `G^{1/2}` and `G^{-1/2}` of a Hermitian positive definite matrix.
pub fn hermitian_sqrt_pair(g: &CMat) -> Result<(CMat, CMat)> {
    let eig = hermitian_part(g).symmetric_eigen();
    let n = g.nrows();
    let mut root = CMat::zeros(n, n);
    let mut inv_root = CMat::zeros(n, n);
    for k in 0..n {
        let lambda = eig.eigenvalues[k];
        if !(lambda > 0.0) {
            return Err(Error::MetricDegeneracy { condition: f64::INFINITY });
        }
        let v = eig.eigenvectors.column(k);
        let outer = &v * v.adjoint();
        root += outer.map(|z| z * lambda.sqrt());
        inv_root += outer.map(|z| z / lambda.sqrt());
    }
    Ok((root, inv_root))
}

/// Orthonormal basis (as columns) of the range of `m`, keeping singular
/// values above `rel_tol * sigma_max`.
pub fn range_basis(m: &CMat, rel_tol: f64) -> CMat {
    let svd = sorted_svd(m);
    let cutoff = rel_tol * svd.values.first().copied().unwrap_or(0.0);
    let rank = svd.values.iter().take_while(|&&s| s > cutoff && s > 0.0).count();
    svd.left.columns(0, rank).into_owned()
}

/// Orthonormal basis of the orthogonal complement of the column span of an
/// orthonormal `basis` inside `C^dim`.
pub fn orthogonal_complement(basis: &CMat, dim: usize) -> CMat {
    let projector = basis * basis.adjoint();
    let residual = CMat::identity(dim, dim) - projector;
    range_basis(&residual, 0.5)
}

/// Numerical rank with an honesty band: singular values below
/// `rel_threshold * sigma_max` count as zero, and any value within a factor
/// of `band` of the threshold makes the decision indeterminate.
pub fn numerical_rank(singular: &[f64], rel_threshold: f64, band: f64) -> Result<usize> {
    let top = singular.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0);
    }
    let threshold = rel_threshold * top;
    for &s in singular {
        if s > threshold / band && s < threshold * band {
            return Err(Error::IndeterminateRank { value: s, threshold });
        }
    }
    Ok(singular.iter().filter(|&&s| s >= threshold).count())
}

/// Cosines of the principal angles between the spans of two orthonormal
/// column bases, largest first.
pub fn principal_cosines(a: &CMat, b: &CMat) -> Vec<f64> {
    singular_values(&(a.adjoint() * b))
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(m: &CMat) -> Complex64 {
    (0..m.nrows().min(m.ncols())).map(|k| m[(k, k)]).sum()
}
