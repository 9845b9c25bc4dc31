//! Frames of the cokernel bundle of a multiplier, their two-variable Gram
//! kernels, and Chern curvature of hermitian metrics.
//!
//! Frames are holomorphic sections of `ker Theta(z)^T` with polynomial
//! entries; the bundle fibers are their pointwise conjugates. Curvature is
//! reported in the dw_i ^ dwbar_j basis with the sign making the Szego
//! line bundle negatively curved, `-1/(1-|z|^2)^2`.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::kernel::{Domain, KernelSpec, Point};
use crate::linalg::{self, CMat};
use crate::multiplier::{poly_det, MatrixMultiplier};
use crate::poly::PolyC;
use crate::wirtinger::{second_jet, sesqui_jet, Contour, SesquiJet, Stencil};

/// Condition-number ceiling for metrics handed to the curvature routines.
pub const MAX_METRIC_CONDITION: f64 = 1e12;

/// Pivot charts are valid where `|det P(z)| >= CHART_FRACTION |det P(z0)|`.
pub const CHART_FRACTION: f64 = 0.1;

/// Signed maximal minors of a `(p+1) x p` multiplier.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaFrame {
    components: Vec<PolyC>,
}

impl DeltaFrame {
    pub fn components(&self) -> &[PolyC] {
        &self.components
    }

    pub fn eval(&self, z: &Point) -> Vec<Complex64> {
        self.components.iter().map(|p| p.eval(z.coords())).collect()
    }

    pub fn norm_sqr(&self, z: &Point) -> f64 {
        self.eval(z).iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn as_column(&self) -> MatrixMultiplier {
        MatrixMultiplier::column(self.components.clone()).expect("non-empty")
    }
}

/// Component `i` is `(-1)^i det(Theta without row i)`, rows counted from 0.
pub fn delta_theta(theta: &MatrixMultiplier) -> Result<DeltaFrame> {
    let (q, p) = (theta.rows(), theta.cols());
    if q != p + 1 {
        return Err(Error::Shape(format!("formal determinant needs q = p + 1, got {q}x{p}; use a cokernel frame")));
    }
    let all: Vec<usize> = (0..q).collect();
    let components = (0..q)
        .map(|i| {
            let rows: Vec<usize> = all.iter().copied().filter(|&r| r != i).collect();
            let minor = poly_det(&theta.row_minor(&rows), theta.nvars());
            if i % 2 == 0 {
                minor
            } else {
                -&minor
            }
        })
        .collect();
    Ok(DeltaFrame { components })
}

/// Cramer-rule frame of `ker Theta(z)^T` on a pivot chart.
#[derive(Clone, Debug, PartialEq)]
pub struct CokernelFrame {
    pivot_rows: Vec<usize>,
    pivot_det: PolyC,
    floor: f64,
    columns: MatrixMultiplier,
}

impl CokernelFrame {
    /// Pivot rows (0-based, ascending).
    pub fn pivot_rows(&self) -> &[usize] {
        &self.pivot_rows
    }

    pub fn pivot_det(&self) -> &PolyC {
        &self.pivot_det
    }

    /// `q x (q-p)` polynomial frame; column `k` belongs to the `k`-th
    /// non-pivot row.
    pub fn columns(&self) -> &MatrixMultiplier {
        &self.columns
    }

    pub fn rank(&self) -> usize {
        self.columns.cols()
    }

    pub fn check_chart(&self, z: &Point) -> Result<()> {
        let det = self.pivot_det.eval(z.coords()).norm();
        if !(det >= self.floor) {
            return Err(Error::Chart { point: z.to_pairs(), det, floor: self.floor });
        }
        Ok(())
    }

    pub fn eval(&self, z: &Point) -> Result<CMat> {
        self.check_chart(z)?;
        self.columns.eval(z)
    }
}

fn combinations(q: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, q: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for r in start..q {
            cur.push(r);
            rec(r + 1, q, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, q, p, &mut Vec::with_capacity(p), &mut out);
    out
}

pub fn cokernel_frame(theta: &MatrixMultiplier, z0: &Point) -> Result<CokernelFrame> {
    theta.check_symbol_shape()?;
    let (q, p) = (theta.rows(), theta.cols());
    let value = theta.eval(z0)?;
    if linalg::sigma_min(&value) <= 1e-12 * linalg::op_norm(&value).max(1.0) {
        return Err(Error::SingularPoint { point: z0.to_pairs() });
    }

    // largest pivot minor at z0, first in lexicographic order on ties
    let mut best: Option<(Vec<usize>, f64)> = None;
    for rows in combinations(q, p) {
        let sub = CMat::from_fn(p, p, |a, b| value[(rows[a], b)]);
        let det = sub.determinant().norm();
        if best.as_ref().map_or(true, |(_, d)| det > *d) {
            best = Some((rows, det));
        }
    }
    let (pivot_rows, det0) = best.expect("at least one subset");
    if !(det0 > 0.0) {
        return Err(Error::SingularPoint { point: z0.to_pairs() });
    }

    let nv = theta.nvars();
    let pivot_minor = theta.row_minor(&pivot_rows);
    let pivot_det = poly_det(&pivot_minor, nv);
    let free: Vec<usize> = (0..q).filter(|r| !pivot_rows.contains(r)).collect();
    let mut entries = alloc::vec![PolyC::zero(nv); q * free.len()];
    for (col, &j0) in free.iter().enumerate() {
        entries[j0 * free.len() + col] = -&pivot_det;
        for (k, &row) in pivot_rows.iter().enumerate() {
            let mut replaced = pivot_minor.clone();
            replaced[k] = (0..p).map(|b| theta.entry(j0, b).clone()).collect();
            entries[row * free.len() + col] = poly_det(&replaced, nv);
        }
    }
    let columns = MatrixMultiplier::new(q, free.len(), nv, entries)?;
    Ok(CokernelFrame { pivot_rows, pivot_det, floor: CHART_FRACTION * det0, columns })
}

/// A polynomial frame with its first derivatives and optional pivot chart.
#[derive(Clone, Debug)]
pub struct Frame {
    columns: MatrixMultiplier,
    derivatives: Vec<MatrixMultiplier>,
    chart: Option<(PolyC, f64)>,
}

impl Frame {
    pub fn polynomial(columns: MatrixMultiplier) -> Self {
        let derivatives = (0..columns.nvars()).map(|i| columns.derivative(i)).collect();
        Frame { columns, derivatives, chart: None }
    }

    /// The constant frame `[1]` of the kernel line bundle itself.
    pub fn unit(nvars: usize) -> Self {
        Frame::polynomial(MatrixMultiplier::identity(1, nvars))
    }

    pub fn columns(&self) -> &MatrixMultiplier {
        &self.columns
    }

    pub fn rank(&self) -> usize {
        self.columns.cols()
    }

    pub fn nvars(&self) -> usize {
        self.columns.nvars()
    }

    pub fn check_chart(&self, z: &Point) -> Result<()> {
        if let Some((det, floor)) = &self.chart {
            let d = det.eval(z.coords()).norm();
            if !(d >= *floor) {
                return Err(Error::Chart { point: z.to_pairs(), det: d, floor: *floor });
            }
        }
        Ok(())
    }

    pub fn eval(&self, z: &Point) -> Result<CMat> {
        self.check_chart(z)?;
        self.columns.eval(z)
    }

    pub fn eval_derivative(&self, i: usize, z: &Point) -> Result<CMat> {
        self.derivatives[i].eval(z)
    }
}

impl From<DeltaFrame> for Frame {
    fn from(delta: DeltaFrame) -> Self {
        Frame::polynomial(delta.as_column())
    }
}

impl From<CokernelFrame> for Frame {
    fn from(frame: CokernelFrame) -> Self {
        let mut out = Frame::polynomial(frame.columns);
        out.chart = Some((frame.pivot_det, frame.floor));
        out
    }
}

/// How to differentiate a Gram kernel on the diagonal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum JetMethod {
    /// Trapezoidal Cauchy integrals of the sampled kernel.
    Contour(Contour),
    /// Closed-form kernel derivatives and exact polynomial derivatives.
    Analytic,
}

impl Default for JetMethod {
    fn default() -> Self {
        JetMethod::Contour(Contour::default())
    }
}

/// `G_ij(z, w) = K(z, w) <f_i(z), f_j(w)>`, or the untwisted
/// `<f_i(z), f_j(w)>` when no kernel is attached.
#[derive(Clone, Debug)]
pub struct GramFunction {
    kernel: Option<KernelSpec>,
    frame: Frame,
}

impl GramFunction {
    pub fn new(kernel: Option<KernelSpec>, frame: impl Into<Frame>) -> Result<Self> {
        let frame = frame.into();
        if let Some(k) = &kernel {
            if k.dim() != frame.nvars() {
                return Err(Error::Shape(format!(
                    "frame in {} variables over a {}-dimensional kernel",
                    frame.nvars(),
                    k.dim()
                )));
            }
        }
        Ok(GramFunction { kernel, frame })
    }

    /// The kernel line bundle itself.
    pub fn of_kernel(kernel: &KernelSpec) -> Self {
        GramFunction { kernel: Some(kernel.clone()), frame: Frame::unit(kernel.dim()) }
    }

    pub fn kernel(&self) -> Option<&KernelSpec> {
        self.kernel.as_ref()
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn rank(&self) -> usize {
        self.frame.rank()
    }

    pub fn nvars(&self) -> usize {
        self.frame.nvars()
    }

    pub fn domain(&self) -> Option<Domain> {
        self.kernel.as_ref().map(KernelSpec::domain)
    }

    pub fn eval(&self, z: &Point, w: &Point) -> Result<CMat> {
        let fz = self.frame.eval(z)?;
        let fw = self.frame.eval(w)?;
        let gram = fz.transpose() * fw.conjugate();
        match &self.kernel {
            Some(k) => {
                let kzw = k.eval(z, w)?;
                Ok(gram.map(|x| x * kzw))
            }
            None => Ok(gram),
        }
    }

    /// The metric `G(z, z)`, symmetrized.
    pub fn metric(&self, z: &Point) -> Result<CMat> {
        Ok(linalg::hermitian_part(&self.eval(z, z)?))
    }

    pub fn jet(&self, z: &Point, method: &JetMethod) -> Result<SesquiJet<CMat>> {
        match method {
            JetMethod::Contour(contour) => {
                let domain = self.domain();
                let mut jet = sesqui_jet(|a: &Point, b: &Point| self.eval(a, b), z, contour, domain.as_ref())?;
                jet.value = linalg::hermitian_part(&jet.value);
                Ok(jet)
            }
            JetMethod::Analytic => self.analytic_jet(z),
        }
    }

    fn analytic_jet(&self, z: &Point) -> Result<SesquiJet<CMat>> {
        let n = self.nvars();
        let f = self.frame.eval(z)?;
        let df: Vec<CMat> = (0..n).map(|i| self.frame.eval_derivative(i, z)).collect::<Result<_>>()?;
        let fc = f.conjugate();
        let h = f.transpose() * &fc;
        let hz: Vec<CMat> = df.iter().map(|d| d.transpose() * &fc).collect();
        let hw: Vec<CMat> = df.iter().map(|d| f.transpose() * d.conjugate()).collect();
        let hzw: Vec<Vec<CMat>> =
            df.iter().map(|a| df.iter().map(|b| a.transpose() * b.conjugate()).collect()).collect();
        let Some(kernel) = &self.kernel else {
            return Ok(SesquiJet { value: linalg::hermitian_part(&h), dz: hz, dwbar: hw, mixed: hzw });
        };
        let kj = kernel.diagonal_jet(z)?;
        let k = kj.value;
        let scale = |m: &CMat, c: Complex64| m.map(|x| x * c);
        let value = linalg::hermitian_part(&scale(&h, k));
        let dz = (0..n).map(|i| scale(&h, kj.dz[i]) + scale(&hz[i], k)).collect();
        let dwbar = (0..n).map(|j| scale(&h, kj.dwbar[j]) + scale(&hw[j], k)).collect();
        let mixed = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        scale(&h, kj.mixed[i][j])
                            + scale(&hw[j], kj.dz[i])
                            + scale(&hz[i], kj.dwbar[j])
                            + scale(&hzw[i][j], k)
                    })
                    .collect()
            })
            .collect();
        Ok(SesquiJet { value, dz, dwbar, mixed })
    }

    /// The bundle metric `H_ij = <f_j, f_i>` (times `K`), i.e. `G(z, z)^T`.
    /// Under a holomorphic change of frame `F -> F A` it transforms as
    /// `A^* H A`, which is what the Chern formula expects.
    pub fn bundle_metric(&self, z: &Point) -> Result<CMat> {
        Ok(self.metric(z)?.transpose())
    }

    /// Chern curvature of the bundle metric from the diagonal jet.
    pub fn curvature(&self, z: &Point, method: &JetMethod) -> Result<CurvatureMatrix> {
        let jet = self.jet(z, method)?;
        let t = |v: &[CMat]| -> Vec<CMat> { v.iter().map(|m| m.transpose()).collect() };
        let mixed: Vec<Vec<CMat>> = jet.mixed.iter().map(|row| t(row)).collect();
        curvature_from_derivatives(&jet.value.transpose(), &t(&jet.dz), &t(&jet.dwbar), &mixed)
    }
}

/// `n x n` array of `m x m` blocks, block `(i, j)` the coefficient of
/// `dw_i ^ dwbar_j`, expressed in an orthonormal frame of the fiber.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureMatrix {
    n: usize,
    m: usize,
    blocks: Vec<Vec<CMat>>,
}

impl CurvatureMatrix {
    pub fn new(blocks: Vec<Vec<CMat>>) -> Result<Self> {
        let n = blocks.len();
        if n == 0 || blocks.iter().any(|row| row.len() != n) {
            return Err(Error::Shape("curvature needs a square, non-empty block array".into()));
        }
        let m = blocks[0][0].nrows();
        if blocks.iter().flatten().any(|b| b.nrows() != m || b.ncols() != m) {
            return Err(Error::Shape("curvature blocks of unequal size".into()));
        }
        Ok(CurvatureMatrix { n, m, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn block(&self, i: usize, j: usize) -> &CMat {
        &self.blocks[i][j]
    }

    pub fn blocks(&self) -> &[Vec<CMat>] {
        &self.blocks
    }

    /// For line bundles: the scalar coefficient of `dw_i ^ dwbar_j`.
    pub fn scalar(&self, i: usize, j: usize) -> Complex64 {
        self.blocks[i][j][(0, 0)]
    }

    /// Largest entry modulus.
    pub fn scale(&self) -> f64 {
        self.blocks.iter().flatten().map(linalg::max_abs).fold(0.0, f64::max)
    }

    /// `max |blocks[i][j] - blocks[j][i]^*|` entrywise.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                worst = worst.max(linalg::max_abs(&(&self.blocks[i][j] - self.blocks[j][i].adjoint())));
            }
        }
        worst
    }

    /// `max |self - other|` entrywise over all blocks.
    pub fn max_deviation(&self, other: &CurvatureMatrix) -> Result<f64> {
        if self.n != other.n || self.m != other.m {
            return Err(Error::Shape("curvature matrices of different shape".into()));
        }
        Ok(self
            .blocks
            .iter()
            .flatten()
            .zip(other.blocks.iter().flatten())
            .map(|(a, b)| linalg::max_abs(&(a - b)))
            .fold(0.0, f64::max))
    }

    /// `self - scalar (x) I_m` where `scalar` is a line-bundle curvature.
    pub fn minus_scalar(&self, line: &CurvatureMatrix) -> Result<CurvatureMatrix> {
        if line.m != 1 || line.n != self.n {
            return Err(Error::Shape("expected a line-bundle curvature of the same dimension".into()));
        }
        let blocks = (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| &self.blocks[i][j] - CMat::identity(self.m, self.m).map(|x| x * line.scalar(i, j)))
                    .collect()
            })
            .collect();
        CurvatureMatrix::new(blocks)
    }

    /// Eigenvalues of the Hermitian combinations `K_ii`, `K_ij + K_ji` and
    /// `i(K_ij - K_ji)` for `i < j`. These do not depend on the choice of
    /// orthonormal frame, so they compare curvatures of different charts.
    pub fn unitary_invariants(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let i_unit = Complex64::new(0.0, 1.0);
        for i in 0..self.n {
            out.extend(linalg::hermitian_eigenvalues(&self.blocks[i][i]));
            for j in i + 1..self.n {
                let (a, b) = (&self.blocks[i][j], &self.blocks[j][i]);
                out.extend(linalg::hermitian_eigenvalues(&(a + b)));
                out.extend(linalg::hermitian_eigenvalues(&(a - b).map(|x| x * i_unit)));
            }
        }
        out
    }

    fn assert_hermitian(self) -> Result<Self> {
        let defect = self.hermiticity_defect();
        if !(defect <= 1e-6 * self.scale().max(1.0)) {
            return Err(Error::NonHermitian { defect });
        }
        Ok(self)
    }
}

/// Chern curvature from `G`, `d_i G`, `dbar_j G` and `d_i dbar_j G`:
/// block `(i, j) = -dbar_j (G^{-1} d_i G)`, conjugated into an orthonormal
/// frame by `G^{1/2}`.
pub fn curvature_from_derivatives(
    g: &CMat,
    d: &[CMat],
    dbar: &[CMat],
    mixed: &[Vec<CMat>],
) -> Result<CurvatureMatrix> {
    let n = d.len();
    let ginv = linalg::guarded_inverse(g, MAX_METRIC_CONDITION)?;
    let (root, inv_root) = if g.nrows() == 1 {
        (CMat::identity(1, 1), CMat::identity(1, 1))
    } else {
        linalg::hermitian_sqrt_pair(g)?
    };
    let mut blocks = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let raw = &ginv * (&dbar[j] * &ginv * &d[i] - &mixed[i][j]);
            row.push(if g.nrows() == 1 { raw } else { &root * raw * &inv_root });
        }
        blocks.push(row);
    }
    CurvatureMatrix::new(blocks)?.assert_hermitian()
}

/// Curvature of an arbitrary matrix metric by finite differences.
pub fn curvature_from_gram<F>(metric: F, z: &Point, stencil: &Stencil, domain: Option<&Domain>) -> Result<CurvatureMatrix>
where
    F: Fn(&Point) -> Result<CMat>,
{
    let jet = second_jet(metric, z, stencil, domain)?;
    let n = z.dim();
    let d: Vec<CMat> = (0..n).map(|i| jet.holo(i)).collect();
    let dbar: Vec<CMat> = (0..n).map(|j| jet.anti(j)).collect();
    let mixed: Vec<Vec<CMat>> = (0..n).map(|i| (0..n).map(|j| jet.holo_anti(i, j)).collect()).collect();
    curvature_from_derivatives(&linalg::hermitian_part(&jet.value), &d, &dbar, &mixed)
}

/// Line-bundle curvature `-d_i dbar_j log g` by finite differences.
pub fn line_curvature<F>(metric: F, z: &Point, stencil: &Stencil, domain: Option<&Domain>) -> Result<CurvatureMatrix>
where
    F: Fn(&Point) -> Result<f64>,
{
    let log_metric = |p: &Point| -> Result<Complex64> {
        let g = metric(p)?;
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::Domain { point: p.to_pairs(), reason: format!("metric value {g} is not positive") });
        }
        Ok(Complex64::new(Float::ln(g), 0.0))
    };
    let jet = second_jet(log_metric, z, stencil, domain)?;
    let n = z.dim();
    let blocks = (0..n)
        .map(|i| (0..n).map(|j| CMat::from_element(1, 1, -jet.holo_anti(i, j))).collect())
        .collect();
    CurvatureMatrix::new(blocks)?.assert_hermitian()
}
