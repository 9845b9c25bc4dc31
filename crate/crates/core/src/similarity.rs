//! Symbol-level similarity machinery: the idempotent `Q = I - Theta Psi`,
//! splitting angles, the Hilbert-Schmidt norm of the derivative of the
//! fiber projection, and dyadic Carleson-box diagnostics on the disk.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::bundle::{delta_theta, GramFunction, JetMethod, MAX_METRIC_CONDITION};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kernel::Point;
use crate::linalg::{self, CMat};
use crate::multiplier::MatrixMultiplier;
use crate::poly::PolyC;
use crate::quotient::QuotientSpec;

/// Coefficient-level tolerance for the idempotent identities.
pub const EXACTNESS_TOLERANCE: f64 = 1e-12;

/// Principal angles below this count as a collapsed decomposition.
pub const MIN_SPLITTING_ANGLE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdempotentResiduals {
    /// Largest coefficient of `Q^2 - Q`.
    pub square: f64,
    /// Largest coefficient of `Q Theta`.
    pub annihilation: f64,
    /// Largest coefficient of `trace Q - (q - p)`.
    pub trace: f64,
}

impl IdempotentResiduals {
    pub fn max(&self) -> f64 {
        self.square.max(self.annihilation).max(self.trace)
    }
}

/// Symbol of the module idempotent onto `ker R_Psi` along `ran M_Theta`.
#[derive(Clone, Debug, PartialEq)]
pub struct IdempotentSymbol {
    q: MatrixMultiplier,
    rank: usize,
    residuals: IdempotentResiduals,
}

impl IdempotentSymbol {
    pub fn matrix(&self) -> &MatrixMultiplier {
        &self.q
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn residuals(&self) -> IdempotentResiduals {
        self.residuals
    }

    pub fn eval(&self, z: &Point) -> Result<CMat> {
        self.q.eval(z)
    }
}

pub fn build_idempotent(theta: &MatrixMultiplier, psi: &MatrixMultiplier) -> Result<IdempotentSymbol> {
    theta.check_symbol_shape()?;
    let (q, p, nv) = (theta.rows(), theta.cols(), theta.nvars());
    let left = psi.mul(theta)?;
    let defect = left.sub(&MatrixMultiplier::identity(p, nv))?.max_coeff();
    if !(defect <= EXACTNESS_TOLERANCE) {
        return Err(Error::Certificate { residual: defect });
    }
    let qm = MatrixMultiplier::identity(q, nv).sub(&theta.mul(psi)?)?;
    let rank = q - p;
    let square = qm.mul(&qm)?.sub(&qm)?.max_coeff();
    let annihilation = qm.mul(theta)?.max_coeff();
    let trace = (&qm.trace()? - &PolyC::constant(nv, Complex64::new(rank as f64, 0.0))).max_coeff();
    let residuals = IdempotentResiduals { square, annihilation, trace };
    if !(residuals.max() <= EXACTNESS_TOLERANCE) {
        return Err(Error::Certificate { residual: residuals.max() });
    }
    Ok(IdempotentSymbol { q: qm, rank, residuals })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplittingReport {
    /// Smallest principal angle between `ran Theta(z)` and `ran Q(z)`.
    pub min_angle: f64,
    /// Largest condition number of `[Theta-basis | Q-basis]`.
    pub max_condition: f64,
    pub witness: Point,
}

/// Orthonormal basis of the leading `k` left singular directions.
fn leading_basis(m: &CMat, k: usize) -> CMat {
    linalg::sorted_svd(m).left.columns(0, k).into_owned()
}

pub fn splitting_angle_at(theta: &MatrixMultiplier, q: &IdempotentSymbol, z: &Point) -> Result<(f64, f64)> {
    let u1 = leading_basis(&theta.eval(z)?, theta.cols());
    let u2 = leading_basis(&q.eval(z)?, q.rank());
    let cos = linalg::principal_cosines(&u1, &u2).first().copied().unwrap_or(0.0);
    let angle = cos.min(1.0).acos();
    if !(angle >= MIN_SPLITTING_ANGLE) {
        return Err(Error::DecompositionDegeneracy { point: z.to_pairs(), angle });
    }
    let mut joined = CMat::zeros(u1.nrows(), u1.ncols() + u2.ncols());
    joined.columns_mut(0, u1.ncols()).copy_from(&u1);
    joined.columns_mut(u1.ncols(), u2.ncols()).copy_from(&u2);
    Ok((angle, linalg::condition_number(&joined)))
}

/// Grid extremes of the splitting `C^q = ran Theta(z) + ran Q(z)`. No
/// kernel enters.
pub fn splitting_angle(theta: &MatrixMultiplier, q: &IdempotentSymbol, grid: &GridSpec) -> Result<SplittingReport> {
    if q.matrix().rows() != theta.rows() {
        return Err(Error::Shape("idempotent and symbol act on different spaces".into()));
    }
    let mut report: Option<SplittingReport> = None;
    for z in grid.points()? {
        let (angle, condition) = splitting_angle_at(theta, q, &z)?;
        match report.as_mut() {
            None => report = Some(SplittingReport { min_angle: angle, max_condition: condition, witness: z }),
            Some(r) => {
                if angle < r.min_angle {
                    r.min_angle = angle;
                    r.witness = z;
                }
                r.max_condition = r.max_condition.max(condition);
            }
        }
    }
    report.ok_or_else(|| Error::Input("empty grid".into()))
}

/// `||d Pi / dz||_2^2` for the projection onto the span of the
/// anti-holomorphic frame whose Gram kernel is `gram`.
pub fn hs_projection_derivative(gram: &GramFunction, z: &Point, method: &JetMethod) -> Result<f64> {
    if gram.nvars() != 1 {
        return Err(Error::Unsupported("the projection derivative is implemented on the disk only".into()));
    }
    let jet = gram.jet(z, method)?;
    let g = &jet.value;
    let m = g.nrows();
    let ginv = linalg::guarded_inverse(g, MAX_METRIC_CONDITION)?;
    let a = -(&ginv * &jet.dz[0] * &ginv);
    let mut c = CMat::zeros(m, 2 * m);
    c.columns_mut(0, m).copy_from(&a);
    c.columns_mut(m, m).copy_from(&ginv);
    let mut gy = CMat::zeros(2 * m, 2 * m);
    gy.view_mut((0, 0), (m, m)).copy_from(g);
    gy.view_mut((0, m), (m, m)).copy_from(&jet.dwbar[0]);
    gy.view_mut((m, 0), (m, m)).copy_from(&jet.dz[0]);
    gy.view_mut((m, m), (m, m)).copy_from(&jet.mixed[0][0]);
    Ok(linalg::trace(&(&c * gy * c.adjoint() * g)).re)
}

/// One sample of the similarity defect.
#[derive(Clone, Debug, PartialEq)]
pub struct DefectSample {
    pub point: Point,
    pub h: f64,
}

/// `h(z) = ||d Pi / dz||^2 - m / (1 - |z|^2)^2` on the quotient bundle.
pub fn defect_at(spec: &QuotientSpec, z: &Point, method: &JetMethod) -> Result<f64> {
    if spec.kernel().dim() != 1 {
        return Err(Error::Unsupported("the similarity defect is defined on the disk".into()));
    }
    let hs = hs_projection_derivative(&spec.gram_at(z)?, z, method)?;
    let t = 1.0 - z.norm() * z.norm();
    Ok(hs - spec.rank() as f64 / (t * t))
}

pub fn similarity_defect(spec: &QuotientSpec, z: &Point) -> Result<f64> {
    defect_at(spec, z, &JetMethod::default())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DefectProfile {
    pub m: usize,
    pub samples: Vec<DefectSample>,
    /// The comparison term is the Hardy-space one; set when the building
    /// block is not the Szego kernel.
    pub non_szego_warning: bool,
}

impl DefectProfile {
    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|s| s.h.abs()).fold(0.0, f64::max)
    }
}

pub fn defect_profile(spec: &QuotientSpec, grid: &GridSpec) -> Result<DefectProfile> {
    let samples = grid
        .points()?
        .into_iter()
        .map(|z| similarity_defect(spec, &z).map(|h| DefectSample { point: z, h }))
        .collect::<Result<_>>()?;
    Ok(DefectProfile { m: spec.rank(), samples, non_szego_warning: !spec.kernel().is_szego() })
}

/// Polar midpoint quadrature of the disk `|z| < r_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CarlesonQuadrature {
    pub r_max: f64,
    pub radial: usize,
    pub angular: usize,
}

impl Default for CarlesonQuadrature {
    fn default() -> Self {
        CarlesonQuadrature { r_max: 0.9, radial: 256, angular: 512 }
    }
}

/// A quadrature cell: midpoint, radius, angular index and area.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub center: Point,
    pub radius: f64,
    pub angle_index: usize,
    pub area: f64,
}

pub const MAX_CARLESON_LEVELS: u32 = 10;

impl CarlesonQuadrature {
    pub fn validate(&self, levels: u32) -> Result<()> {
        if levels > MAX_CARLESON_LEVELS {
            return Err(Error::Input(format!("at most {MAX_CARLESON_LEVELS} dyadic levels, got {levels}")));
        }
        GridSpec::disk(self.r_max, 1, 1).validate()?;
        if self.radial == 0 || !self.angular.is_power_of_two() || self.angular < (1 << levels) {
            return Err(Error::Input(format!(
                "quadrature needs radial > 0 and a power-of-two angular count >= 2^{levels}"
            )));
        }
        Ok(())
    }

    /// Cells ordered radius-major.
    pub fn cells(&self) -> Vec<Cell> {
        let dr = self.r_max / self.radial as f64;
        let dt = 2.0 * PI / self.angular as f64;
        let mut out = Vec::with_capacity(self.radial * self.angular);
        for i in 0..self.radial {
            let r = (i as f64 + 0.5) * dr;
            for j in 0..self.angular {
                let t = (j as f64 + 0.5) * dt;
                out.push(Cell { center: Point::disk(Complex64::from_polar(r, t)), radius: r, angle_index: j, area: r * dr * dt });
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CarlesonReport {
    pub levels: u32,
    /// `max mu(Q(I)) / l(I)` over all boxes of levels `0..=levels`.
    pub sup_ratio: f64,
    /// `sup (1 - |z|) sqrt(max(h, 0))` over the cell midpoints.
    pub pointwise_constant: f64,
    /// Largest box ratio at each level.
    pub level_ratios: Vec<f64>,
    /// Cells where `h` is negative beyond rounding.
    pub negative_cells: usize,
    pub r_max: f64,
}

/// `h` at every cell midpoint, in cell order.
pub fn carleson_samples(spec: &QuotientSpec, quad: &CarlesonQuadrature) -> Result<Vec<f64>> {
    quad.cells().iter().map(|cell| defect_at(spec, &cell.center, &JetMethod::Analytic)).collect()
}

/// Sums `h (1 - |z|) dA` over dyadic Carleson boxes; `l(I)` is the arc
/// length normalized to 1 for the whole circle.
pub fn assemble_carleson(quad: &CarlesonQuadrature, h: &[f64], levels: u32, m: usize) -> Result<CarlesonReport> {
    quad.validate(levels)?;
    let cells = quad.cells();
    if h.len() != cells.len() {
        return Err(Error::Shape(format!("{} samples for {} cells", h.len(), cells.len())));
    }
    let mut pointwise: f64 = 0.0;
    let mut negative_cells = 0;
    for (cell, &hv) in cells.iter().zip(h) {
        pointwise = pointwise.max((1.0 - cell.radius) * hv.max(0.0).sqrt());
        let t = 1.0 - cell.radius * cell.radius;
        if hv < -1e-9 * (1.0 + m as f64 / (t * t)) {
            negative_cells += 1;
        }
    }
    let mut level_ratios = Vec::with_capacity(levels as usize + 1);
    for level in 0..=levels {
        let arcs = 1usize << level;
        let ell = 1.0 / arcs as f64;
        let per_arc = quad.angular / arcs;
        let mut mass = alloc::vec![0.0f64; arcs];
        for (cell, &hv) in cells.iter().zip(h) {
            if cell.radius >= 1.0 - ell {
                mass[cell.angle_index / per_arc] += hv * (1.0 - cell.radius) * cell.area;
            }
        }
        level_ratios.push(mass.iter().map(|m| m / ell).fold(f64::NEG_INFINITY, f64::max));
    }
    let sup_ratio = level_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(CarlesonReport { levels, sup_ratio, pointwise_constant: pointwise, level_ratios, negative_cells, r_max: quad.r_max })
}

pub fn carleson_diagnostic(spec: &QuotientSpec, levels: u32, quad: &CarlesonQuadrature) -> Result<CarlesonReport> {
    quad.validate(levels)?;
    if spec.kernel().dim() != 1 {
        return Err(Error::Unsupported("Carleson boxes are defined on the disk".into()));
    }
    let h = carleson_samples(spec, quad)?;
    assemble_carleson(quad, &h, levels, spec.rank())
}

/// Grid extremes of `||Delta(z)||`, the norm of the fiber map between the
/// building block and the quotient line bundle.
pub fn uniform_equivalence_diagnostic(theta: &MatrixMultiplier, grid: &GridSpec) -> Result<(f64, f64)> {
    let delta = delta_theta(theta)?;
    let mut inf = f64::INFINITY;
    let mut sup: f64 = 0.0;
    for z in grid.points()? {
        let norm = delta.norm_sqr(&z).sqrt();
        inf = inf.min(norm);
        sup = sup.max(norm);
    }
    Ok((inf, sup))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::cokernel_frame;
    use crate::kernel::KernelSpec;
    use crate::multiplier::{bezout_left_inverse, tests::{c, k, z}};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn col(entries: Vec<PolyC>) -> MatrixMultiplier {
        MatrixMultiplier::column(entries).unwrap()
    }

    fn row(entries: Vec<PolyC>) -> MatrixMultiplier {
        MatrixMultiplier::from_rows(1, alloc::vec![entries]).unwrap()
    }

    fn z_one_minus_z() -> (MatrixMultiplier, MatrixMultiplier) {
        let (p1, p2) = bezout_left_inverse(&z(), &(&k(1.0) - &z())).unwrap();
        (col(alloc::vec![z(), &k(1.0) - &z()]), row(alloc::vec![p1, p2]))
    }

    #[test]
    fn idempotent_examples() {
        let (theta, psi) = z_one_minus_z();
        let q = build_idempotent(&theta, &psi).unwrap();
        let expected = [&k(1.0) - &z(), -&z(), &z() - &k(1.0), z()];
        for (idx, e) in expected.iter().enumerate() {
            assert_eq!(q.matrix().entry(idx / 2, idx % 2), e);
        }
        assert_eq!(q.residuals().max(), 0.0);
        assert_eq!(q.rank(), 1);

        let q = build_idempotent(&col(alloc::vec![k(1.0), k(0.0)]), &row(alloc::vec![k(1.0), k(0.0)])).unwrap();
        assert_eq!(q.eval(&Point::real(0.3)).unwrap(), CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]));

        let q = build_idempotent(&col(alloc::vec![k(1.0), z()]), &row(alloc::vec![k(1.0), k(0.0)])).unwrap();
        assert!(q.matrix().entry(0, 0).is_zero() && q.matrix().entry(0, 1).is_zero());
        assert_eq!(q.matrix().entry(1, 0), &-&z());
        assert_eq!(q.matrix().entry(1, 1), &k(1.0));
    }

    #[test]
    fn idempotent_rejects_a_non_inverse() {
        let theta = col(alloc::vec![k(1.0), z()]);
        let err = build_idempotent(&theta, &row(alloc::vec![k(0.0), k(1.0)])).unwrap_err();
        assert!(matches!(err, Error::Certificate { .. }));
    }

    #[test]
    fn splitting_examples() {
        let grid = GridSpec::default();
        let theta = col(alloc::vec![k(1.0), k(0.0)]);
        let q = build_idempotent(&theta, &row(alloc::vec![k(1.0), k(0.0)])).unwrap();
        let r = splitting_angle(&theta, &q, &grid).unwrap();
        assert_relative_eq!(r.min_angle, PI / 2.0, epsilon = 1e-12);
        assert_relative_eq!(r.max_condition, 1.0, epsilon = 1e-12);

        // ran Q(z) = ker Psi = span(1, -1), so the angle has a closed form
        let (theta, psi) = z_one_minus_z();
        let q = build_idempotent(&theta, &psi).unwrap();
        let r = splitting_angle(&theta, &q, &grid).unwrap();
        let mut min_angle = f64::INFINITY;
        let mut max_condition: f64 = 0.0;
        for p in grid.points().unwrap() {
            let w = p.z();
            let cos = (2.0 * w - 1.0).norm() / (2.0f64.sqrt() * (w.norm_sqr() + (1.0 - w).norm_sqr()).sqrt());
            min_angle = min_angle.min(cos.acos());
            max_condition = max_condition.max(((1.0 + cos) / (1.0 - cos)).sqrt());
        }
        assert_relative_eq!(r.min_angle, min_angle, max_relative = 1e-10);
        assert_relative_eq!(r.max_condition, max_condition, max_relative = 1e-10);
        assert!(r.min_angle > 0.3 && r.max_condition.is_finite());

        let theta = col(alloc::vec![k(1.0), z()]);
        let q = build_idempotent(&theta, &row(alloc::vec![k(1.0), k(0.0)])).unwrap();
        assert!(splitting_angle(&theta, &q, &grid).unwrap().min_angle > 0.0);
    }

    fn szego_gram(theta: &MatrixMultiplier, z: &Point) -> GramFunction {
        GramFunction::new(Some(KernelSpec::szego()), cokernel_frame(theta, z).unwrap()).unwrap()
    }

    #[test]
    fn hs_examples() {
        let method = JetMethod::default();
        let gram = GramFunction::of_kernel(&KernelSpec::szego());
        for x in [0.0, 0.5] {
            let got = hs_projection_derivative(&gram, &Point::real(x), &method).unwrap();
            assert_relative_eq!(got, 1.0 / (1.0 - x * x).powi(2), max_relative = 1e-10);
        }
        let flat = GramFunction::new(None, crate::bundle::Frame::unit(1)).unwrap();
        assert_eq!(hs_projection_derivative(&flat, &Point::real(0.2), &JetMethod::Analytic).unwrap(), 0.0);
        // contour nodes only see rounding of a constant
        assert!(hs_projection_derivative(&flat, &Point::real(0.2), &method).unwrap().abs() <= 1e-10);
        let theta = col(alloc::vec![k(1.0), z()]);
        let got = hs_projection_derivative(&szego_gram(&theta, &Point::real(0.0)), &Point::real(0.0), &method).unwrap();
        assert_relative_eq!(got, 2.0, max_relative = 1e-10);
    }

    #[test]
    fn hs_matches_log_metric_for_lines() {
        let thetas = [col(alloc::vec![k(1.0), z()]), z_one_minus_z().0, col(alloc::vec![&z() - &k(0.5), &z() * &z() + k(1.0)])];
        for theta in &thetas {
            for zp in [c(0.0, 0.0), c(0.4, 0.3), c(-0.6, 0.5)] {
                let p = Point::disk(zp);
                let gram = szego_gram(theta, &p);
                let hs = hs_projection_derivative(&gram, &p, &JetMethod::default()).unwrap();
                // independent path: d dbar log of the diagonal by finite differences
                let line = crate::bundle::line_curvature(
                    |q: &Point| Ok(gram.metric(q)?[(0, 0)].re),
                    &p,
                    &crate::wirtinger::Stencil::default(),
                    None,
                )
                .unwrap();
                assert_relative_eq!(hs, -line.scalar(0, 0).re, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn hs_is_additive_over_the_twist() {
        let theta = z_one_minus_z().0;
        for zp in [c(0.1, 0.0), c(0.5, -0.5)] {
            let p = Point::disk(zp);
            let total = hs_projection_derivative(&szego_gram(&theta, &p), &p, &JetMethod::default()).unwrap();
            let base = hs_projection_derivative(&GramFunction::of_kernel(&KernelSpec::szego()), &p, &JetMethod::default()).unwrap();
            let twist = GramFunction::new(None, cokernel_frame(&theta, &p).unwrap()).unwrap();
            let twist = hs_projection_derivative(&twist, &p, &JetMethod::default()).unwrap();
            assert_relative_eq!(total, base + twist, max_relative = 1e-6);
        }
    }

    #[test]
    fn hs_rank_two_is_nonnegative_and_matches_the_analytic_jet() {
        let theta = col(alloc::vec![k(1.0), z(), &z() * &z()]);
        let p = Point::disk(c(0.3, -0.2));
        let gram = szego_gram(&theta, &p);
        let a = hs_projection_derivative(&gram, &p, &JetMethod::default()).unwrap();
        let b = hs_projection_derivative(&gram, &p, &JetMethod::Analytic).unwrap();
        assert!(a > 0.0);
        assert_relative_eq!(a, b, max_relative = 1e-9);
    }

    #[test]
    fn defect_examples() {
        let trivial = QuotientSpec::new(KernelSpec::szego(), col(alloc::vec![k(1.0), k(0.0)]), None).unwrap();
        let profile = defect_profile(&trivial, &GridSpec::disk(0.8, 8, 16)).unwrap();
        assert!(profile.max_abs() <= 1e-8, "{}", profile.max_abs());
        assert!(!profile.non_szego_warning);

        let spec = QuotientSpec::new(KernelSpec::szego(), col(alloc::vec![k(1.0), z()]), None).unwrap();
        assert_relative_eq!(similarity_defect(&spec, &Point::real(0.0)).unwrap(), 1.0, epsilon = 1e-9);
        for zp in [c(0.8, 0.0), c(0.0, -0.8), c(0.4, 0.4)] {
            let r2 = zp.norm_sqr();
            let h = similarity_defect(&spec, &Point::disk(zp)).unwrap();
            assert_relative_eq!(h, 1.0 / (1.0 + r2).powi(2), max_relative = 1e-8);
        }
        let bergman = spec.with_kernel(KernelSpec::bergman()).unwrap();
        assert!(defect_profile(&bergman, &GridSpec::disk(0.5, 1, 4)).unwrap().non_szego_warning);
    }

    #[test]
    fn carleson_examples() {
        let quad = CarlesonQuadrature { r_max: 0.9, radial: 64, angular: 128 };
        let trivial = QuotientSpec::new(KernelSpec::szego(), col(alloc::vec![k(1.0), k(0.0)]), None).unwrap();
        let r = carleson_diagnostic(&trivial, 6, &quad).unwrap();
        assert!(r.sup_ratio.abs() <= 1e-9 && r.pointwise_constant <= 1e-6, "{r:?}");

        let spec = QuotientSpec::new(KernelSpec::szego(), col(alloc::vec![k(1.0), z()]), None).unwrap();
        let h = carleson_samples(&spec, &quad).unwrap();
        let r6 = assemble_carleson(&quad, &h, 6, 1).unwrap();
        let r7 = assemble_carleson(&quad, &h, 7, 1).unwrap();
        assert!(r6.pointwise_constant <= 1.0 + 1e-3 && r6.pointwise_constant > 0.99);
        assert_eq!(r6.negative_cells, 0);
        assert!((r6.sup_ratio - r7.sup_ratio).abs() <= 0.05 * r6.sup_ratio);

        // level 0 box is the whole disk: mass = 2 pi int_0^R r (1-r)/(1+r^2)^2 dr
        let exact = {
            let f = |r: f64| r * (1.0 - r) / (1.0 + r * r).powi(2);
            let n = 20000;
            let dr = 0.9 / n as f64;
            2.0 * PI * (0..n).map(|i| f((i as f64 + 0.5) * dr)).sum::<f64>() * dr
        };
        assert_relative_eq!(r6.level_ratios[0], exact, max_relative = 1e-3);
    }

    #[test]
    fn carleson_rejects_bad_quadrature() {
        let spec = QuotientSpec::new(KernelSpec::szego(), col(alloc::vec![k(1.0), z()]), None).unwrap();
        let quad = CarlesonQuadrature { r_max: 0.9, radial: 4, angular: 8 };
        assert!(carleson_diagnostic(&spec, 4, &quad).is_err());
        assert!(carleson_diagnostic(&spec, 11, &CarlesonQuadrature::default()).is_err());
    }

    #[test]
    fn uniform_equivalence_examples() {
        let grid = GridSpec::default();
        let (inf, sup) = uniform_equivalence_diagnostic(&col(alloc::vec![k(1.0), z()]), &grid).unwrap();
        assert_relative_eq!(inf, 1.0, epsilon = 1e-15);
        assert_relative_eq!(sup, (1.0f64 + 0.64).sqrt(), max_relative = 1e-14);
        let (inf, sup) = uniform_equivalence_diagnostic(&col(alloc::vec![k(1.0), k(0.0)]), &grid).unwrap();
        assert_eq!((inf, sup), (1.0, 1.0));
        let theta = col(alloc::vec![z(), &z() - &k(2.0)]);
        let (inf, sup) = uniform_equivalence_diagnostic(&theta, &grid).unwrap();
        let norms: Vec<f64> = grid
            .points()
            .unwrap()
            .iter()
            .map(|p| (p.z().norm_sqr() + (p.z() - 2.0).norm_sqr()).sqrt())
            .collect();
        assert_relative_eq!(inf, norms.iter().copied().fold(f64::INFINITY, f64::min), max_relative = 1e-14);
        assert_relative_eq!(sup, norms.iter().copied().fold(0.0, f64::max), max_relative = 1e-14);
        assert!(inf >= 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn bezout_idempotents_are_exact(a in -0.9f64..0.9, b in -0.9f64..0.9) {
            // theta = (z - a, z - b + 2), coprime since the roots differ
            let theta = col(alloc::vec![&z() - &k(a), &z() - &k(b - 2.0)]);
            let (p1, p2) = bezout_left_inverse(theta.entry(0, 0), theta.entry(1, 0)).unwrap();
            let q = build_idempotent(&theta, &row(alloc::vec![p1, p2])).unwrap();
            prop_assert!(q.residuals().max() <= EXACTNESS_TOLERANCE);
        }
    }
}
