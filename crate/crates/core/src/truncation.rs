//! Degree-`N` matrix models of the disk modules and their quotients.
//!
//! Vectors of `H (x) C^q` are stored component-major: entry
//! `i * (N + 1) + k` is the coefficient of `e_k` in component `i`, where
//! `e_k = z^k / beta_k` is the orthonormalized monomial basis.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DVector;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::bundle::{delta_theta, GramFunction};
use crate::error::{Error, Result};
use crate::kernel::{KernelFamily, KernelSpec, Point};
use crate::linalg::{self, CMat, ZERO};
use crate::multiplier::MatrixMultiplier;
use crate::poly::PolyC;

pub type CVec = DVector<Complex64>;

pub const MIN_DEGREE: usize = 4;
pub const DEFAULT_DEGREE: usize = 48;
/// Largest `|w|` at which the oracle is trusted.
pub const MAX_ORACLE_RADIUS: f64 = 0.6;
pub const RANK_THRESHOLD: f64 = 1e-8;
pub const RANK_BAND: f64 = 100.0;
/// Smallest singular value of the similarity map still read as invertible.
pub const INVERTIBILITY_FLOOR: f64 = 1e-10;

fn inner(x: &CVec, y: &CVec) -> Complex64 {
    y.dotc(x)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedModule {
    kernel: KernelSpec,
    weights: Vec<f64>,
    shift: CMat,
}

/// Norms `beta_k = ||z^k||` for `k = 0..=n`, from `K = sum (z wbar)^k / beta_k^2`.
fn monomial_norms(kernel: &KernelSpec, n: usize) -> Result<Vec<f64>> {
    let supported = matches!(
        kernel.family(),
        KernelFamily::Szego | KernelFamily::Bergman | KernelFamily::WeightedBergman { .. } | KernelFamily::DruryArveson
    );
    if kernel.dim() != 1 || !supported {
        return Err(Error::Unsupported(format!("no matrix model for the {kernel} kernel")));
    }
    let s = kernel.exponent();
    let mut sq = 1.0;
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    for k in 1..=n {
        sq *= k as f64 / (k as f64 + s - 1.0);
        out.push(sq.sqrt());
    }
    Ok(out)
}

pub fn build_truncated_module(kernel: &KernelSpec, n: usize) -> Result<TruncatedModule> {
    if n < MIN_DEGREE {
        return Err(Error::Input(format!("truncation degree must be at least {MIN_DEGREE}, got {n}")));
    }
    let weights = monomial_norms(kernel, n)?;
    let mut shift = CMat::zeros(n + 1, n + 1);
    for k in 0..n {
        shift[(k + 1, k)] = Complex64::new(weights[k + 1] / weights[k], 0.0);
    }
    Ok(TruncatedModule { kernel: kernel.clone(), weights, shift })
}

impl TruncatedModule {
    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn degree(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn shift(&self) -> &CMat {
        &self.shift
    }

    /// Coordinates of a polynomial of degree at most `N`.
    pub fn coordinates(&self, p: &PolyC) -> Result<CVec> {
        let coeffs = p.univariate_coeffs()?;
        let mut v = CVec::zeros(self.dim());
        for (k, c) in coeffs.iter().enumerate() {
            if k >= self.dim() {
                if *c != ZERO {
                    return Err(Error::Input(format!("polynomial degree exceeds the truncation degree {}", self.degree())));
                }
                continue;
            }
            v[k] = c * self.weights[k];
        }
        Ok(v)
    }

    /// Truncated reproducing kernel at `w`.
    pub fn kernel_vector(&self, w: Complex64) -> CVec {
        let mut power = Complex64::new(1.0, 0.0);
        CVec::from_iterator(
            self.dim(),
            self.weights.iter().map(|b| {
                let v = power.conj() / b;
                power *= w;
                v
            }),
        )
    }

    /// `||S^* k_w - wbar k_w|| / ||k_w||`.
    pub fn eigen_residual(&self, w: Complex64) -> f64 {
        let k = self.kernel_vector(w);
        (self.shift.adjoint() * &k - &k * w.conj()).norm() / k.norm()
    }

    /// Compression of `M_f`; equals `f(S)` because the shift is lower
    /// triangular.
    pub fn multiplication(&self, f: &PolyC) -> Result<CMat> {
        let coeffs = f.univariate_coeffs()?;
        let d = self.dim();
        let mut m = CMat::zeros(d, d);
        for (i, c) in coeffs.iter().enumerate().filter(|(_, c)| **c != ZERO) {
            for k in 0..d.saturating_sub(i) {
                m[(i + k, k)] = c * (self.weights[i + k] / self.weights[k]);
            }
        }
        Ok(m)
    }

    /// Block compression of a matrix multiplier, `rows(N+1) x cols(N+1)`.
    pub fn block_multiplication(&self, theta: &MatrixMultiplier) -> Result<CMat> {
        if theta.nvars() != 1 {
            return Err(Error::Unsupported("matrix models exist in one variable only".into()));
        }
        let d = self.dim();
        let mut out = CMat::zeros(theta.rows() * d, theta.cols() * d);
        for i in 0..theta.rows() {
            for j in 0..theta.cols() {
                out.view_mut((i * d, j * d), (d, d)).copy_from(&self.multiplication(theta.entry(i, j))?);
            }
        }
        Ok(out)
    }

    /// The shift acting on each of `q` components.
    pub fn block_shift(&self, q: usize) -> CMat {
        let d = self.dim();
        let mut out = CMat::zeros(q * d, q * d);
        for i in 0..q {
            out.view_mut((i * d, i * d), (d, d)).copy_from(&self.shift);
        }
        out
    }

    /// `k_w (x) conj Delta(w)`, orthogonal to `ran M_Theta` up to truncation.
    pub fn quotient_kernel_vector(&self, theta: &MatrixMultiplier, w: Complex64) -> Result<CVec> {
        let delta = delta_theta(theta)?.eval(&Point::disk(w));
        let k = self.kernel_vector(w);
        let d = self.dim();
        let mut out = CVec::zeros(delta.len() * d);
        for (i, c) in delta.iter().enumerate() {
            out.rows_mut(i * d, d).copy_from(&(&k * c.conj()));
        }
        Ok(out)
    }
}

fn rank_of(m: &CMat) -> Result<(usize, linalg::SortedSvd)> {
    let svd = linalg::sorted_svd(m);
    Ok((linalg::numerical_rank(&svd.values, RANK_THRESHOLD, RANK_BAND)?, svd))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedQuotient {
    module: TruncatedModule,
    theta: MatrixMultiplier,
    range: CMat,
    complement: CMat,
    action: CMat,
}

pub fn build_truncated_quotient(module: &TruncatedModule, theta: &MatrixMultiplier) -> Result<TruncatedQuotient> {
    theta.check_symbol_shape()?;
    let m_theta = module.block_multiplication(theta)?;
    let (rank, svd) = rank_of(&m_theta)?;
    let ambient = theta.rows() * module.dim();
    let range = svd.left.columns(0, rank).into_owned();
    let complement = linalg::orthogonal_complement(&range, ambient);
    let action = complement.adjoint() * module.block_shift(theta.rows()) * &complement;
    Ok(TruncatedQuotient { module: module.clone(), theta: theta.clone(), range, complement, action })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenvectorCheck {
    /// `||S^* g - wbar g|| / ||g||` for the projected kernel vector `g`.
    pub eigen_residual: f64,
    /// `||P_ran gamma_w|| / ||gamma_w||`.
    pub orthogonality_residual: f64,
}

fn check_oracle_point(w: Complex64) -> Result<()> {
    if !(w.norm() <= MAX_ORACLE_RADIUS) {
        return Err(Error::Domain {
            point: alloc::vec![(w.re, w.im)],
            reason: format!("oracle points need |w| <= {MAX_ORACLE_RADIUS}"),
        });
    }
    Ok(())
}

impl TruncatedQuotient {
    pub fn module(&self) -> &TruncatedModule {
        &self.module
    }

    pub fn ambient_dim(&self) -> usize {
        self.theta.rows() * self.module.dim()
    }

    pub fn range_rank(&self) -> usize {
        self.range.ncols()
    }

    pub fn range_basis(&self) -> &CMat {
        &self.range
    }

    pub fn complement(&self) -> &CMat {
        &self.complement
    }

    pub fn complement_dim(&self) -> usize {
        self.complement.ncols()
    }

    /// Compressed module action of `z` on the complement basis.
    pub fn action(&self) -> &CMat {
        &self.action
    }

    fn project_range(&self, v: &CVec) -> CVec {
        &self.range * (self.range.adjoint() * v)
    }

    fn project_complement(&self, v: &CVec) -> CVec {
        &self.complement * (self.complement.adjoint() * v)
    }

    pub fn eigenvector_check(&self, w: Complex64) -> Result<EigenvectorCheck> {
        check_oracle_point(w)?;
        let gamma = self.module.quotient_kernel_vector(&self.theta, w)?;
        let norm = gamma.norm();
        if !(norm > 1e-12) {
            return Err(Error::Degenerate(format!("kernel vector vanishes at {w}: Theta(w) drops rank")));
        }
        let orthogonality_residual = self.project_range(&gamma).norm() / norm;
        let g = self.project_complement(&gamma);
        let shift = self.module.block_shift(self.theta.rows());
        let eigen_residual = (shift.adjoint() * &g - &g * w.conj()).norm() / g.norm();
        Ok(EigenvectorCheck { eigen_residual, orthogonality_residual })
    }

    /// `dim H_Theta / (z - w) H_Theta` in the matrix model.
    pub fn localized_dimension(&self, w: Complex64) -> Result<usize> {
        check_oracle_point(w)?;
        let d = self.complement_dim();
        let shifted = &self.action - CMat::identity(d, d) * w;
        Ok(d - rank_of(&shifted)?.0)
    }

    /// Numerical rank of the projected kernel vectors at `points`.
    pub fn spanning_rank(&self, points: &[Complex64]) -> Result<usize> {
        let mut cols = Vec::with_capacity(points.len());
        for &w in points {
            check_oracle_point(w)?;
            cols.push(self.project_complement(&self.module.quotient_kernel_vector(&self.theta, w)?));
        }
        Ok(rank_of(&CMat::from_columns(&cols))?.0)
    }
}

pub fn quotient_eigenvector_check(
    kernel: &KernelSpec,
    theta: &MatrixMultiplier,
    w: Complex64,
    n: usize,
) -> Result<EigenvectorCheck> {
    check_oracle_point(w)?;
    build_truncated_quotient(&build_truncated_module(kernel, n)?, theta)?.eigenvector_check(w)
}

pub fn localized_dimension(kernel: &KernelSpec, theta: &MatrixMultiplier, w: Complex64, n: usize) -> Result<usize> {
    check_oracle_point(w)?;
    build_truncated_quotient(&build_truncated_module(kernel, n)?, theta)?.localized_dimension(w)
}

/// Relative deviation of `<gamma_w, gamma_z>` from the analytic Gram kernel.
pub fn oracle_gram_check(kernel: &KernelSpec, theta: &MatrixMultiplier, z: Complex64, w: Complex64, n: usize) -> Result<f64> {
    check_oracle_point(z)?;
    check_oracle_point(w)?;
    let module = build_truncated_module(kernel, n)?;
    let truncated = inner(&module.quotient_kernel_vector(theta, w)?, &module.quotient_kernel_vector(theta, z)?);
    let gram = GramFunction::new(Some(kernel.clone()), delta_theta(theta)?)?;
    let exact = gram.eval(&Point::disk(z), &Point::disk(w))?[(0, 0)];
    if exact == ZERO {
        return Err(Error::Degenerate(format!("Gram kernel vanishes at ({z}, {w})")));
    }
    Ok((truncated - exact).norm() / exact.norm())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMapReport {
    pub degree: usize,
    pub condition: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// `||X A_quot - A_ker X|| / ||X||`.
    pub module_map_residual: f64,
    /// Set when `sigma_min` falls below the invertibility floor.
    pub non_invertible: bool,
}

/// Condition number of the compression of `M_Q`, `Q = I - Theta Psi`,
/// from the quotient complement onto `ker R_Psi`.
pub fn similarity_map_condition(
    kernel: &KernelSpec,
    theta: &MatrixMultiplier,
    psi: &MatrixMultiplier,
    n: usize,
) -> Result<SimilarityMapReport> {
    let q_symbol = crate::similarity::build_idempotent(theta, psi)?;
    let module = build_truncated_module(kernel, n)?;
    let quotient = build_truncated_quotient(&module, theta)?;
    let q = theta.rows();

    let m_psi = module.block_multiplication(psi)?;
    let (rank, _) = rank_of(&m_psi)?;
    let row_space = linalg::sorted_svd(&m_psi.adjoint()).left.columns(0, rank).into_owned();
    let kernel_basis = linalg::orthogonal_complement(&row_space, q * module.dim());

    let m_q = module.block_multiplication(q_symbol.matrix())?;
    let x = kernel_basis.adjoint() * m_q * quotient.complement();
    let singular = linalg::singular_values(&x);
    let sigma_max = singular.first().copied().unwrap_or(0.0);
    let sigma_min = if x.nrows() == x.ncols() { singular.last().copied().unwrap_or(0.0) } else { 0.0 };

    let shift = module.block_shift(q);
    let a_ker = kernel_basis.adjoint() * &shift * &kernel_basis;
    let module_map_residual = linalg::op_norm(&(&x * quotient.action() - a_ker * &x)) / sigma_max;
    Ok(SimilarityMapReport {
        degree: n,
        condition: sigma_max / sigma_min,
        sigma_min,
        sigma_max,
        module_map_residual,
        non_invertible: !(sigma_min >= INVERTIBILITY_FLOOR),
    })
}
