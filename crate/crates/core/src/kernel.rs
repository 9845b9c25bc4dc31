//! Scalar reproducing kernels of the classical Hilbert modules over the
//! disk, the ball and the polydisk.
//!
//! Every kernel here has the closed form `(1 - <z, w>)^{-s}` on the ball
//! (or a product of one-variable factors on the polydisk), so evaluation is
//! exact up to rounding and never goes through a series.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Minimum boundary distance for kernel evaluation points.
pub const DEFAULT_MARGIN: f64 = 0.05;

/// A point of `C^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(Vec<Complex64>);

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Point(coords)
    }

    pub fn disk(z: Complex64) -> Self {
        Point(alloc::vec![z])
    }

    pub fn real(x: f64) -> Self {
        Point::disk(Complex64::new(x, 0.0))
    }

    pub fn origin(n: usize) -> Self {
        Point(alloc::vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// First coordinate; the one-variable routines work with this.
    pub fn z(&self) -> Complex64 {
        self.0[0]
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self, other> = sum_i self_i conj(other_i)`.
    pub fn inner(&self, other: &Point) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn with_coord(&self, index: usize, value: Complex64) -> Point {
        let mut coords = self.0.clone();
        coords[index] = value;
        Point(coords)
    }

    pub fn shifted(&self, index: usize, delta: Complex64) -> Point {
        self.with_coord(index, self.0[index] + delta)
    }

    pub fn to_pairs(&self) -> Vec<(f64, f64)> {
        self.0.iter().map(|c| (c.re, c.im)).collect()
    }

    /// Interleaved `[re, im, re, im, ...]` layout used by reports.
    pub fn to_flat(&self) -> Vec<f64> {
        self.0.iter().flat_map(|c| [c.re, c.im]).collect()
    }
}

impl From<Complex64> for Point {
    fn from(z: Complex64) -> Self {
        Point::disk(z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainShape {
    UnitDisk,
    UnitBall,
    Polydisk,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Domain {
    shape: DomainShape,
    dim: usize,
}

impl Domain {
    pub fn new(shape: DomainShape, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("domain dimension must be at least 1".into()));
        }
        if shape == DomainShape::UnitDisk && dim != 1 {
            return Err(Error::Parameter(format!("the unit disk has dimension 1, got {dim}")));
        }
        Ok(Domain { shape, dim })
    }

    pub fn disk() -> Self {
        Domain { shape: DomainShape::UnitDisk, dim: 1 }
    }

    pub fn ball(dim: usize) -> Result<Self> {
        if dim == 1 {
            return Ok(Domain::disk());
        }
        Domain::new(DomainShape::UnitBall, dim)
    }

    pub fn polydisk(dim: usize) -> Result<Self> {
        if dim == 1 {
            return Ok(Domain::disk());
        }
        Domain::new(DomainShape::Polydisk, dim)
    }

    pub fn shape(&self) -> DomainShape {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Euclidean distance from `z` to the boundary (negative outside).
    pub fn boundary_distance(&self, z: &Point) -> f64 {
        match self.shape {
            DomainShape::UnitDisk | DomainShape::UnitBall => 1.0 - z.norm(),
            DomainShape::Polydisk => {
                z.coords().iter().map(|c| 1.0 - c.norm()).fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn check(&self, z: &Point, margin: f64) -> Result<()> {
        if z.dim() != self.dim {
            return Err(Error::Shape(format!(
                "point has {} coordinates, domain dimension is {}",
                z.dim(),
                self.dim
            )));
        }
        let dist = self.boundary_distance(z);
        if !(dist >= margin) {
            return Err(Error::Domain {
                point: z.to_pairs(),
                reason: format!("boundary distance {dist:.6} < margin {margin}"),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum KernelFamily {
    Szego,
    Bergman,
    /// `(1 - z conj(w))^{-(alpha + 2)}` on the disk, `alpha > -1`.
    WeightedBergman { alpha: f64 },
    DruryArveson,
    /// Product of one-variable kernels on the polydisk.
    Product(Vec<KernelSpec>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    domain: Domain,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, domain: Domain) -> Result<Self> {
        match &family {
            KernelFamily::WeightedBergman { alpha } if !(*alpha > -1.0) => {
                return Err(Error::Parameter(format!("weighted Bergman needs alpha > -1, got {alpha}")));
            }
            KernelFamily::DruryArveson if domain.shape == DomainShape::Polydisk => {
                return Err(Error::Parameter("the Drury-Arveson kernel lives on the ball".into()));
            }
            KernelFamily::Product(factors) => {
                if domain.shape == DomainShape::UnitBall {
                    return Err(Error::Parameter("product kernels live on the polydisk".into()));
                }
                if factors.len() != domain.dim {
                    return Err(Error::Parameter(format!(
                        "product of {} factors on a {}-dimensional polydisk",
                        factors.len(),
                        domain.dim
                    )));
                }
                if factors.iter().any(|f| f.domain != Domain::disk()) {
                    return Err(Error::Parameter("product factors must be disk kernels".into()));
                }
            }
            _ => {}
        }
        Ok(KernelSpec { family, domain })
    }

    pub fn szego() -> Self {
        KernelSpec { family: KernelFamily::Szego, domain: Domain::disk() }
    }

    pub fn bergman() -> Self {
        KernelSpec { family: KernelFamily::Bergman, domain: Domain::disk() }
    }

    pub fn weighted_bergman(alpha: f64) -> Result<Self> {
        KernelSpec::new(KernelFamily::WeightedBergman { alpha }, Domain::disk())
    }

    pub fn drury_arveson(dim: usize) -> Result<Self> {
        KernelSpec::new(KernelFamily::DruryArveson, Domain::ball(dim)?)
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim
    }

    pub fn is_szego(&self) -> bool {
        matches!(self.family, KernelFamily::Szego)
            || (self.family == KernelFamily::DruryArveson && self.domain.dim == 1)
    }

    /// Exponent `s` in `(1 - <z, w>)^{-s}` for the ball-type families; on
    /// the polydisk this is the per-coordinate exponent.
    pub(crate) fn exponent(&self) -> f64 {
        let n = match self.domain.shape {
            DomainShape::Polydisk => 1.0,
            _ => self.domain.dim as f64,
        };
        match self.family {
            KernelFamily::Szego => n,
            KernelFamily::Bergman => n + 1.0,
            KernelFamily::WeightedBergman { alpha } => n + 1.0 + alpha,
            KernelFamily::DruryArveson => 1.0,
            KernelFamily::Product(_) => f64::NAN,
        }
    }

    pub fn eval(&self, z: &Point, w: &Point) -> Result<Complex64> {
        self.eval_with_margin(z, w, DEFAULT_MARGIN)
    }

    pub fn eval_with_margin(&self, z: &Point, w: &Point, margin: f64) -> Result<Complex64> {
        self.domain.check(z, margin)?;
        self.domain.check(w, margin)?;
        Ok(self.eval_unchecked(z, w))
    }

    /// Diagonal value `K(z, z) = ||k_z||^2`.
    pub fn diag(&self, z: &Point) -> Result<f64> {
        self.eval(z, z).map(|k| k.re)
    }

    /// Closed-form derivatives of `K(z, w)` on the diagonal `z = w = p`.
    pub fn diagonal_jet(&self, p: &Point) -> Result<KernelJet> {
        self.domain.check(p, DEFAULT_MARGIN)?;
        let n = p.dim();
        let k = self.eval_unchecked(p, p);
        // derivatives of log K: a = d_z, b = d_wbar, c = d_z d_wbar
        let mut a = alloc::vec![Complex64::new(0.0, 0.0); n];
        let mut b = a.clone();
        let mut c = alloc::vec![alloc::vec![Complex64::new(0.0, 0.0); n]; n];
        match self.domain.shape {
            DomainShape::Polydisk => {
                for i in 0..n {
                    let s = match &self.family {
                        KernelFamily::Product(factors) => factors[i].exponent(),
                        _ => self.exponent(),
                    };
                    let zi = p.coords()[i];
                    let t = 1.0 - zi.norm_sqr();
                    a[i] = zi.conj() * (s / t);
                    b[i] = zi * (s / t);
                    c[i][i] = Complex64::new(s / (t * t), 0.0);
                }
            }
            _ => {
                let s = self.exponent();
                let t = 1.0 - p.norm() * p.norm();
                for i in 0..n {
                    let zi = p.coords()[i];
                    a[i] = zi.conj() * (s / t);
                    b[i] = zi * (s / t);
                    for j in 0..n {
                        let delta = if i == j { s / t } else { 0.0 };
                        c[i][j] = zi.conj() * p.coords()[j] * (s / (t * t)) + delta;
                    }
                }
            }
        }
        let dz = a.iter().map(|x| k * x).collect();
        let dwbar = b.iter().map(|x| k * x).collect();
        let mixed = (0..n).map(|i| (0..n).map(|j| k * (a[i] * b[j] + c[i][j])).collect()).collect();
        Ok(KernelJet { value: k, dz, dwbar, mixed })
    }

    pub(crate) fn eval_unchecked(&self, z: &Point, w: &Point) -> Complex64 {
        match (&self.family, self.domain.shape) {
            (KernelFamily::Product(factors), _) => factors
                .iter()
                .zip(z.coords().iter().zip(w.coords()))
                .map(|(f, (a, b))| f.eval_unchecked(&Point::disk(*a), &Point::disk(*b)))
                .product(),
            (_, DomainShape::Polydisk) => {
                let s = self.exponent();
                z.coords()
                    .iter()
                    .zip(w.coords())
                    .map(|(a, b)| neg_power(Complex64::new(1.0, 0.0) - a * b.conj(), s))
                    .product()
            }
            _ => neg_power(Complex64::new(1.0, 0.0) - z.inner(w), self.exponent()),
        }
    }
}

/// `K`, `d_z K`, `d_wbar K` and `d_z d_wbar K` at a diagonal point.
#[derive(Clone, Debug)]
pub struct KernelJet {
    pub value: Complex64,
    pub dz: Vec<Complex64>,
    pub dwbar: Vec<Complex64>,
    pub mixed: Vec<Vec<Complex64>>,
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            KernelFamily::Szego => write!(f, "szego"),
            KernelFamily::Bergman => write!(f, "bergman"),
            KernelFamily::WeightedBergman { alpha } => write!(f, "weighted_bergman(alpha={alpha})"),
            KernelFamily::DruryArveson => write!(f, "drury_arveson"),
            KernelFamily::Product(factors) => {
                write!(f, "product(")?;
                for (k, factor) in factors.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{factor}")?;
                }
                write!(f, ")")
            }
        }?;
        write!(f, " on {:?}^{}", self.domain.shape, self.domain.dim)
    }
}

/// `u^{-s}` on the principal branch; integer exponents use repeated
/// multiplication so that `K(w, z) = conj(K(z, w))` holds bit for bit.
fn neg_power(u: Complex64, s: f64) -> Complex64 {
    if s.fract() == 0.0 && s.abs() < 64.0 {
        u.powi(-(s as i32))
    } else {
        u.powf(-s)
    }
}

/// Smallest eigenvalue of the Hermitian matrix `[K(z_i, z_j)]`.
pub fn gram_psd_check(spec: &KernelSpec, points: &[Point]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Input("gram_psd_check needs at least one point".into()));
    }
    for (i, a) in points.iter().enumerate() {
        for b in &points[..i] {
            let gap = a.coords().iter().zip(b.coords()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            if gap == 0.0 {
                return Err(Error::Degenerate(format!("duplicate point {:?}", a.to_pairs())));
            }
        }
    }
    let n = points.len();
    let mut gram = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gram[(i, j)] = spec.eval(&points[i], &points[j])?;
        }
    }
    Ok(linalg::hermitian_eigenvalues(&gram)[0])
}
