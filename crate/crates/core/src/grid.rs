//! Deterministic sample grids adapted to the domain shape.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{Domain, DomainShape, Point, DEFAULT_MARGIN};

pub const DEFAULT_R_MAX: f64 = 0.8;
pub const DEFAULT_RADIAL: usize = 24;
pub const DEFAULT_ANGULAR: usize = 48;
pub const DEFAULT_PER_AXIS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum GridSpec {
    /// The center plus `radial` circles of `angular` points, radii evenly
    /// spaced up to `r_max`.
    Disk { r_max: f64, radial: usize, angular: usize },
    /// Tensor grid with `per_axis` evenly spaced values on each real axis
    /// of `C^dim`, filtered to `|z| <= r_max`.
    Ball { dim: usize, r_max: f64, per_axis: usize },
    /// Tensor grid filtered to `max_i |z_i| <= r_max`.
    Polydisk { dim: usize, r_max: f64, per_axis: usize },
    /// Explicit points, used as given.
    Points(Vec<Point>),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Disk { r_max: DEFAULT_R_MAX, radial: DEFAULT_RADIAL, angular: DEFAULT_ANGULAR }
    }
}

impl GridSpec {
    pub fn disk(r_max: f64, radial: usize, angular: usize) -> Self {
        GridSpec::Disk { r_max, radial, angular }
    }

    /// Default grid for a domain.
    pub fn for_domain(domain: &Domain) -> Self {
        match domain.shape() {
            DomainShape::UnitDisk => GridSpec::default(),
            DomainShape::UnitBall => {
                GridSpec::Ball { dim: domain.dim(), r_max: DEFAULT_R_MAX, per_axis: DEFAULT_PER_AXIS }
            }
            DomainShape::Polydisk => {
                GridSpec::Polydisk { dim: domain.dim(), r_max: DEFAULT_R_MAX, per_axis: DEFAULT_PER_AXIS }
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            GridSpec::Disk { .. } => 1,
            GridSpec::Ball { dim, .. } | GridSpec::Polydisk { dim, .. } => *dim,
            GridSpec::Points(points) => points.first().map_or(1, Point::dim),
        }
    }

    pub fn r_max(&self) -> f64 {
        match self {
            GridSpec::Disk { r_max, .. } | GridSpec::Ball { r_max, .. } | GridSpec::Polydisk { r_max, .. } => *r_max,
            GridSpec::Points(points) => points.iter().map(Point::norm).fold(0.0, f64::max),
        }
    }

    /// Same shape with a different outer radius (explicit point lists are
    /// left alone).
    pub fn with_r_max(&self, r: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            GridSpec::Disk { r_max, .. } | GridSpec::Ball { r_max, .. } | GridSpec::Polydisk { r_max, .. } => *r_max = r,
            GridSpec::Points(_) => {}
        }
        out
    }

    /// Same shape with a different resolution: the radial count on the
    /// disk (angular count doubles it), the per-axis count otherwise.
    pub fn with_resolution(&self, k: usize) -> Self {
        let mut out = self.clone();
        match &mut out {
            GridSpec::Disk { radial, angular, .. } => {
                *radial = k;
                *angular = 2 * k;
            }
            GridSpec::Ball { per_axis, .. } | GridSpec::Polydisk { per_axis, .. } => *per_axis = k,
            GridSpec::Points(_) => {}
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let limit = 1.0 - DEFAULT_MARGIN;
        match self {
            GridSpec::Disk { r_max, radial, angular } => {
                check_radius(*r_max, limit)?;
                if *radial == 0 || *angular == 0 {
                    return Err(Error::Input("disk grid needs positive radial and angular counts".into()));
                }
            }
            GridSpec::Ball { dim, r_max, per_axis } | GridSpec::Polydisk { dim, r_max, per_axis } => {
                check_radius(*r_max, limit)?;
                if *dim == 0 || *per_axis < 2 {
                    return Err(Error::Input("tensor grid needs dim >= 1 and at least 2 points per axis".into()));
                }
            }
            GridSpec::Points(points) => {
                if points.is_empty() {
                    return Err(Error::Input("empty point list".into()));
                }
                let d = points[0].dim();
                if points.iter().any(|p| p.dim() != d) {
                    return Err(Error::Shape("points of mixed dimension".into()));
                }
            }
        }
        Ok(())
    }

    /// The sample points in a fixed order.
    pub fn points(&self) -> Result<Vec<Point>> {
        self.validate()?;
        Ok(match self {
            GridSpec::Disk { r_max, radial, angular } => {
                let mut pts = Vec::with_capacity(1 + radial * angular);
                pts.push(Point::real(0.0));
                for i in 1..=*radial {
                    let r = r_max * i as f64 / *radial as f64;
                    for j in 0..*angular {
                        let t = 2.0 * PI * j as f64 / *angular as f64;
                        pts.push(Point::disk(Complex64::from_polar(r, t)));
                    }
                }
                pts
            }
            GridSpec::Ball { dim, r_max, per_axis } => {
                tensor_points(*dim, *r_max, *per_axis, |p| p.norm() <= *r_max)
            }
            GridSpec::Polydisk { dim, r_max, per_axis } => {
                tensor_points(*dim, *r_max, *per_axis, |p| p.coords().iter().all(|c| c.norm() <= *r_max))
            }
            GridSpec::Points(points) => points.clone(),
        })
    }
}

fn check_radius(r_max: f64, limit: f64) -> Result<()> {
    if !(r_max > 0.0 && r_max < limit) {
        return Err(Error::Input(format!("grid radius {r_max} must lie in (0, {limit})")));
    }
    Ok(())
}

fn tensor_points(dim: usize, r_max: f64, per_axis: usize, keep: impl Fn(&Point) -> bool) -> Vec<Point> {
    let axis: Vec<f64> =
        (0..per_axis).map(|k| -r_max + 2.0 * r_max * k as f64 / (per_axis - 1) as f64).collect();
    let real_dims = 2 * dim;
    let total = per_axis.pow(real_dims as u32);
    let mut pts = Vec::new();
    for mut index in 0..total {
        let mut coords = Vec::with_capacity(dim);
        let mut parts = [0.0f64; 2];
        for a in 0..real_dims {
            parts[a % 2] = axis[index % per_axis];
            index /= per_axis;
            if a % 2 == 1 {
                coords.push(Complex64::new(parts[0], parts[1]));
            }
        }
        let p = Point::new(coords);
        if keep(&p) {
            pts.push(p);
        }
    }
    pts
}
