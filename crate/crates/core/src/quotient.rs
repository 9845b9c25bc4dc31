//! Curvature of quotient modules, the additivity identity
//! `K_quot = K_kernel (x) I + I (x) K_twist`, and the curvature test for
//! isomorphism of quotients.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::bundle::{cokernel_frame, delta_theta, CurvatureMatrix, DeltaFrame, GramFunction, JetMethod};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kernel::{KernelSpec, Point};
use crate::multiplier::{verify_left_inverse, LeftInverseCertificate, MatrixMultiplier};

/// Default tolerance on curvature deviations for the isomorphism verdict.
pub const DEFAULT_ISO_TOLERANCE: f64 = 1e-5;

/// The quotient of `H (x) C^q` by `Theta (H (x) C^p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuotientSpec {
    kernel: KernelSpec,
    theta: MatrixMultiplier,
    psi: Option<MatrixMultiplier>,
}

impl QuotientSpec {
    pub fn new(kernel: KernelSpec, theta: MatrixMultiplier, psi: Option<MatrixMultiplier>) -> Result<Self> {
        theta.check_symbol_shape()?;
        if theta.nvars() != kernel.dim() {
            return Err(Error::Shape(format!(
                "multiplier in {} variables over a {}-dimensional kernel",
                theta.nvars(),
                kernel.dim()
            )));
        }
        if let Some(psi) = &psi {
            if psi.rows() != theta.cols() || psi.cols() != theta.rows() || psi.nvars() != theta.nvars() {
                return Err(Error::Shape(format!(
                    "left inverse is {}x{} for a {}x{} symbol",
                    psi.rows(),
                    psi.cols(),
                    theta.rows(),
                    theta.cols()
                )));
            }
        }
        Ok(QuotientSpec { kernel, theta, psi })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn theta(&self) -> &MatrixMultiplier {
        &self.theta
    }

    pub fn psi(&self) -> Option<&MatrixMultiplier> {
        self.psi.as_ref()
    }

    /// Rank `q - p` of the quotient bundle.
    pub fn rank(&self) -> usize {
        self.theta.rows() - self.theta.cols()
    }

    pub fn with_kernel(&self, kernel: KernelSpec) -> Result<Self> {
        QuotientSpec::new(kernel, self.theta.clone(), self.psi.clone())
    }

    /// Checks the attached left inverse on `grid`; `None` when there is none.
    pub fn certify(&self, grid: &[Point], tolerance: f64) -> Result<Option<LeftInverseCertificate>> {
        let Some(psi) = &self.psi else { return Ok(None) };
        let cert = verify_left_inverse(&self.theta, psi, grid)?;
        if !cert.is_valid(tolerance) {
            return Err(Error::Certificate { residual: cert.residual });
        }
        Ok(Some(cert))
    }

    /// Gram function of the quotient bundle on the chart centered at `z`.
    pub fn gram_at(&self, z: &Point) -> Result<GramFunction> {
        GramFunction::new(Some(self.kernel.clone()), cokernel_frame(&self.theta, z)?)
    }
}

pub fn quotient_curvature(spec: &QuotientSpec, z: &Point) -> Result<CurvatureMatrix> {
    spec.gram_at(z)?.curvature(z, &JetMethod::default())
}

/// Curvature of the kernel line bundle `K(w, w)`.
pub fn kernel_curvature(kernel: &KernelSpec, z: &Point) -> Result<CurvatureMatrix> {
    GramFunction::of_kernel(kernel).curvature(z, &JetMethod::default())
}

/// Curvature of the cokernel bundle from the untwisted frame Gramian. No
/// kernel is evaluated, so the result depends on `theta` alone.
pub fn twist_curvature(theta: &MatrixMultiplier, z: &Point) -> Result<CurvatureMatrix> {
    GramFunction::new(None, cokernel_frame(theta, z)?)?.curvature(z, &JetMethod::default())
}

/// What to do when a grid point fails.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ErrorPolicy {
    #[default]
    Abort,
    Skip,
}

#[derive(Clone, Debug)]
pub struct PointAdditivity {
    pub point: Point,
    pub residual: f64,
    pub quotient: CurvatureMatrix,
    pub kernel: CurvatureMatrix,
    pub twist: CurvatureMatrix,
}

#[derive(Clone, Debug)]
pub struct AdditivityReport {
    pub max_residual: f64,
    /// First grid point attaining the maximum.
    pub witness: Point,
    pub points: Vec<PointAdditivity>,
    pub skipped: Vec<(Point, Error)>,
}

pub fn additivity_at(spec: &QuotientSpec, z: &Point) -> Result<PointAdditivity> {
    let quotient = quotient_curvature(spec, z)?;
    let kernel = kernel_curvature(&spec.kernel, z)?;
    let twist = twist_curvature(&spec.theta, z)?;
    let residual = quotient.minus_scalar(&kernel)?.max_deviation(&twist)?;
    Ok(PointAdditivity { point: z.clone(), residual, quotient, kernel, twist })
}

pub fn verify_additivity(spec: &QuotientSpec, grid: &GridSpec, policy: ErrorPolicy) -> Result<AdditivityReport> {
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for z in grid.points()? {
        match additivity_at(spec, &z) {
            Ok(p) => points.push(p),
            Err(e) if policy == ErrorPolicy::Skip => skipped.push((z, e)),
            Err(e) => return Err(e),
        }
    }
    summarize_additivity(points, skipped)
}

/// Builds the report from per-point results in grid order.
pub fn summarize_additivity(points: Vec<PointAdditivity>, skipped: Vec<(Point, Error)>) -> Result<AdditivityReport> {
    let Some(first) = points.first() else {
        return Err(Error::Input("no grid point could be evaluated".into()));
    };
    let mut witness = first.point.clone();
    let mut max_residual = first.residual;
    for p in &points[1..] {
        if p.residual > max_residual {
            max_residual = p.residual;
            witness = p.point.clone();
        }
    }
    Ok(AdditivityReport { max_residual, witness, points, skipped })
}

/// Verdict of the curvature test for isomorphism. Always a numerical
/// judgement on a finite grid.
#[derive(Clone, Debug)]
pub struct IsoVerdict {
    pub isomorphic: bool,
    pub max_deviation: f64,
    pub witness_point: Point,
    pub tolerance: f64,
    pub per_point: Vec<(Point, f64)>,
}

impl IsoVerdict {
    fn from_deviations(per_point: Vec<(Point, f64)>, tolerance: f64) -> Result<Self> {
        let Some((first, d0)) = per_point.first() else {
            return Err(Error::Input("empty grid".into()));
        };
        let (mut witness_point, mut max_deviation) = (first.clone(), *d0);
        for (p, d) in &per_point[1..] {
            if *d > max_deviation {
                max_deviation = *d;
                witness_point = p.clone();
            }
        }
        Ok(IsoVerdict { isomorphic: max_deviation <= tolerance, max_deviation, witness_point, tolerance, per_point })
    }
}

/// `[d_i dbar_j log ||Delta(z)||^2]` from exact polynomial derivatives.
pub fn log_norm_hessian(delta: &DeltaFrame, z: &Point) -> Result<Vec<Vec<Complex64>>> {
    let n = z.dim();
    let v = delta.eval(z);
    let g: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    let scale = delta.components().iter().map(|p| p.max_coeff()).fold(0.0, f64::max);
    if !(g > (1e-10 * scale).powi(2)) {
        return Err(Error::Degenerate(format!("formal determinant vanishes at {:?}", z.to_pairs())));
    }
    let dv: Vec<Vec<Complex64>> = (0..n)
        .map(|i| delta.components().iter().map(|p| p.derivative(i).eval(z.coords())).collect())
        .collect();
    let inner = |a: &[Complex64], b: &[Complex64]| -> Complex64 { a.iter().zip(b).map(|(x, y)| x * y.conj()).sum() };
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| inner(&dv[i], &dv[j]) / g - inner(&dv[i], &v) * inner(&v, &dv[j]) / (g * g))
                .collect()
        })
        .collect())
}

/// Twist invariants compared by the rank > 1 isomorphism test, from the
/// untwisted Gramian with exact derivatives.
fn exact_twist_invariants(theta: &MatrixMultiplier, z: &Point) -> Result<Vec<f64>> {
    let gram = GramFunction::new(None, cokernel_frame(theta, z)?)?;
    Ok(gram.curvature(z, &JetMethod::Analytic)?.unitary_invariants())
}

fn check_pair(theta1: &MatrixMultiplier, theta2: &MatrixMultiplier) -> Result<usize> {
    theta1.check_symbol_shape()?;
    theta2.check_symbol_shape()?;
    let (m1, m2) = (theta1.rows() - theta1.cols(), theta2.rows() - theta2.cols());
    if m1 != m2 || theta1.nvars() != theta2.nvars() {
        return Err(Error::Shape(format!(
            "quotients of rank {m1} and {m2} (in {} and {} variables) are never isomorphic",
            theta1.nvars(),
            theta2.nvars()
        )));
    }
    Ok(m1)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Compares `d dbar log ||Delta||^2` of the two symbols over the grid (the
/// full twist curvature when `q - p > 1`).
pub fn iso_test(theta1: &MatrixMultiplier, theta2: &MatrixMultiplier, grid: &GridSpec, tol: f64) -> Result<IsoVerdict> {
    let m = check_pair(theta1, theta2)?;
    let points = grid.points()?;
    let mut per_point = Vec::with_capacity(points.len());
    if m == 1 {
        let (d1, d2) = (delta_theta(theta1)?, delta_theta(theta2)?);
        for z in points {
            let (h1, h2) = (log_norm_hessian(&d1, &z)?, log_norm_hessian(&d2, &z)?);
            let dev = h1.iter().flatten().zip(h2.iter().flatten()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            per_point.push((z, dev));
        }
    } else {
        for z in points {
            let dev = max_abs_diff(&exact_twist_invariants(theta1, &z)?, &exact_twist_invariants(theta2, &z)?);
            per_point.push((z, dev));
        }
    }
    IsoVerdict::from_deviations(per_point, tol)
}

/// Twist curvature recovered through the kernel: `K_quot - K_kernel (x) I`.
pub fn twist_via_kernel(kernel: &KernelSpec, theta: &MatrixMultiplier, z: &Point) -> Result<CurvatureMatrix> {
    let spec = QuotientSpec::new(kernel.clone(), theta.clone(), None)?;
    quotient_curvature(&spec, z)?.minus_scalar(&kernel_curvature(kernel, z)?)
}

fn curvature_distance(a: &CurvatureMatrix, b: &CurvatureMatrix) -> Result<f64> {
    if a.m() == 1 {
        a.max_deviation(b)
    } else {
        Ok(max_abs_diff(&a.unitary_invariants(), &b.unitary_invariants()))
    }
}

/// The isomorphism test run through the full quotient pipeline of one
/// building block rather than through the formal determinant.
pub fn iso_test_via_kernel(
    kernel: &KernelSpec,
    theta1: &MatrixMultiplier,
    theta2: &MatrixMultiplier,
    grid: &GridSpec,
    tol: f64,
) -> Result<IsoVerdict> {
    check_pair(theta1, theta2)?;
    let mut per_point = Vec::new();
    for z in grid.points()? {
        let a = twist_via_kernel(kernel, theta1, &z)?;
        let b = twist_via_kernel(kernel, theta2, &z)?;
        per_point.push((z, curvature_distance(&a, &b)?));
    }
    IsoVerdict::from_deviations(per_point, tol)
}

#[derive(Clone, Debug)]
pub struct CrossKernelReport {
    pub verdict_a: IsoVerdict,
    pub verdict_b: IsoVerdict,
    /// Largest difference between the twist curvatures recovered through
    /// building block A and through building block B.
    pub max_twist_discrepancy: f64,
    /// Whether the kernel-free twist curvatures inside the two additivity
    /// runs agree bit for bit.
    pub twist_bitwise_identical: bool,
    pub consistent: bool,
}

/// Tolerance on the twist curvature recovered through two building blocks.
pub const CROSS_KERNEL_TOLERANCE: f64 = 1e-6;

pub fn cross_kernel_check(
    kernel_a: &KernelSpec,
    kernel_b: &KernelSpec,
    theta1: &MatrixMultiplier,
    theta2: &MatrixMultiplier,
    grid: &GridSpec,
    tol: f64,
) -> Result<CrossKernelReport> {
    let verdict_a = iso_test_via_kernel(kernel_a, theta1, theta2, grid, tol)?;
    let verdict_b = iso_test_via_kernel(kernel_b, theta1, theta2, grid, tol)?;
    let mut discrepancy: f64 = 0.0;
    let mut bitwise = true;
    for theta in [theta1, theta2] {
        let run_a = verify_additivity(&QuotientSpec::new(kernel_a.clone(), theta.clone(), None)?, grid, ErrorPolicy::Abort)?;
        let run_b = verify_additivity(&QuotientSpec::new(kernel_b.clone(), theta.clone(), None)?, grid, ErrorPolicy::Abort)?;
        for (pa, pb) in run_a.points.iter().zip(&run_b.points) {
            bitwise &= pa.twist == pb.twist;
            let ta = pa.quotient.minus_scalar(&pa.kernel)?;
            let tb = pb.quotient.minus_scalar(&pb.kernel)?;
            discrepancy = discrepancy.max(curvature_distance(&ta, &tb)?);
        }
    }
    let consistent = verdict_a.isomorphic == verdict_b.isomorphic && discrepancy <= CROSS_KERNEL_TOLERANCE && bitwise;
    Ok(CrossKernelReport { verdict_a, verdict_b, max_twist_discrepancy: discrepancy, twist_bitwise_identical: bitwise, consistent })
}
