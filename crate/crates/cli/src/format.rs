//! JSON encodings of kernels, multipliers and grids.

use anyhow::{bail, ensure, Context, Result};
use curvlab_core::grid::GridSpec;
use curvlab_core::kernel::{Domain, DomainShape, KernelFamily, KernelSpec, Point};
use curvlab_core::multiplier::MatrixMultiplier;
use curvlab_core::poly::PolyC;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Szego,
    Bergman,
    WeightedBergman,
    DruryArveson,
    Product,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainName {
    Disk,
    Ball,
    Polydisk,
}

/// `{"family", "alpha", "dim", "domain", "factors"}`; only `family` is
/// required. `dim` defaults to 1, and `domain` to the disk in dimension 1
/// and the ball above it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelJson {
    pub family: FamilyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<KernelJson>>,
}

impl KernelJson {
    pub fn to_spec(&self) -> Result<KernelSpec> {
        if self.alpha.is_some() && self.family != FamilyName::WeightedBergman {
            bail!("\"alpha\" only applies to weighted_bergman");
        }
        if self.factors.is_some() != (self.family == FamilyName::Product) {
            bail!("\"factors\" is required for product kernels and rejected otherwise");
        }
        let factors = match &self.factors {
            Some(f) => f.iter().map(KernelJson::to_spec).collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        let dim = self.dim.unwrap_or(if factors.is_empty() { 1 } else { factors.len() });
        let shape = match self.domain {
            Some(DomainName::Disk) => DomainShape::UnitDisk,
            Some(DomainName::Ball) => DomainShape::UnitBall,
            Some(DomainName::Polydisk) => DomainShape::Polydisk,
            None if self.family == FamilyName::Product => DomainShape::Polydisk,
            None if dim == 1 => DomainShape::UnitDisk,
            None => DomainShape::UnitBall,
        };
        let domain = match shape {
            DomainShape::UnitDisk => Domain::new(shape, dim)?,
            DomainShape::UnitBall => Domain::ball(dim)?,
            DomainShape::Polydisk if self.family == FamilyName::Product => Domain::new(shape, dim)?,
            DomainShape::Polydisk => Domain::polydisk(dim)?,
        };
        let family = match self.family {
            FamilyName::Szego => KernelFamily::Szego,
            FamilyName::Bergman => KernelFamily::Bergman,
            FamilyName::WeightedBergman => {
                KernelFamily::WeightedBergman { alpha: self.alpha.context("weighted_bergman needs \"alpha\"")? }
            }
            FamilyName::DruryArveson => KernelFamily::DruryArveson,
            FamilyName::Product => KernelFamily::Product(factors),
        };
        Ok(KernelSpec::new(family, domain)?)
    }

    pub fn from_spec(spec: &KernelSpec) -> Self {
        let (family, alpha, factors) = match spec.family() {
            KernelFamily::Szego => (FamilyName::Szego, None, None),
            KernelFamily::Bergman => (FamilyName::Bergman, None, None),
            KernelFamily::WeightedBergman { alpha } => (FamilyName::WeightedBergman, Some(*alpha), None),
            KernelFamily::DruryArveson => (FamilyName::DruryArveson, None, None),
            KernelFamily::Product(f) => (FamilyName::Product, None, Some(f.iter().map(KernelJson::from_spec).collect())),
        };
        let domain = match spec.domain().shape() {
            DomainShape::UnitDisk => DomainName::Disk,
            DomainShape::UnitBall => DomainName::Ball,
            DomainShape::Polydisk => DomainName::Polydisk,
        };
        KernelJson { family, alpha, dim: Some(spec.dim()), domain: Some(domain), factors }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialJson {
    pub exp: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

/// `entries[i][j]` lists the monomials of the `(i, j)` entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplierJson {
    pub rows: usize,
    pub cols: usize,
    pub nvars: usize,
    pub entries: Vec<Vec<Vec<MonomialJson>>>,
}

impl MultiplierJson {
    pub fn to_multiplier(&self) -> Result<MatrixMultiplier> {
        ensure!(self.entries.len() == self.rows, "\"entries\" has {} rows, expected {}", self.entries.len(), self.rows);
        let mut polys = Vec::with_capacity(self.rows * self.cols);
        for (i, row) in self.entries.iter().enumerate() {
            ensure!(row.len() == self.cols, "row {i} of \"entries\" has {} columns, expected {}", row.len(), self.cols);
            for (j, monomials) in row.iter().enumerate() {
                let terms = monomials.iter().map(|m| (m.exp.clone(), Complex64::new(m.re, m.im)));
                polys.push(PolyC::from_terms(self.nvars, terms).with_context(|| format!("entry ({i}, {j})"))?);
            }
        }
        Ok(MatrixMultiplier::new(self.rows, self.cols, self.nvars, polys)?)
    }

    pub fn from_multiplier(m: &MatrixMultiplier) -> Self {
        let entries = (0..m.rows())
            .map(|i| {
                (0..m.cols())
                    .map(|j| {
                        m.entry(i, j)
                            .terms()
                            .map(|(exp, c)| MonomialJson { exp: exp.clone(), re: c.re, im: c.im })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        MultiplierJson { rows: m.rows(), cols: m.cols(), nvars: m.nvars(), entries }
    }
}

fn default_r_max() -> f64 {
    curvlab_core::grid::DEFAULT_R_MAX
}

fn default_radial() -> usize {
    curvlab_core::grid::DEFAULT_RADIAL
}

fn default_angular() -> usize {
    curvlab_core::grid::DEFAULT_ANGULAR
}

fn default_per_axis() -> usize {
    curvlab_core::grid::DEFAULT_PER_AXIS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridJson {
    Disk {
        #[serde(default = "default_r_max")]
        r_max: f64,
        #[serde(default = "default_radial")]
        radial: usize,
        #[serde(default = "default_angular")]
        angular: usize,
    },
    Ball {
        dim: usize,
        #[serde(default = "default_r_max")]
        r_max: f64,
        #[serde(default = "default_per_axis")]
        per_axis: usize,
    },
    Polydisk {
        dim: usize,
        #[serde(default = "default_r_max")]
        r_max: f64,
        #[serde(default = "default_per_axis")]
        per_axis: usize,
    },
    /// Each point is `[re_1, im_1, re_2, im_2, ...]`.
    Points { points: Vec<Vec<f64>> },
}

pub fn point_from_flat(flat: &[f64]) -> Result<Point> {
    ensure!(!flat.is_empty() && flat.len() % 2 == 0, "a point is a non-empty [re, im, ...] list, got {flat:?}");
    Ok(Point::new(flat.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()))
}

impl GridJson {
    pub fn to_spec(&self) -> Result<GridSpec> {
        let spec = match self {
            GridJson::Disk { r_max, radial, angular } => GridSpec::Disk { r_max: *r_max, radial: *radial, angular: *angular },
            GridJson::Ball { dim, r_max, per_axis } => GridSpec::Ball { dim: *dim, r_max: *r_max, per_axis: *per_axis },
            GridJson::Polydisk { dim, r_max, per_axis } => {
                GridSpec::Polydisk { dim: *dim, r_max: *r_max, per_axis: *per_axis }
            }
            GridJson::Points { points } => {
                GridSpec::Points(points.iter().map(|p| point_from_flat(p)).collect::<Result<_>>()?)
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_spec(spec: &GridSpec) -> Self {
        match spec {
            GridSpec::Disk { r_max, radial, angular } => GridJson::Disk { r_max: *r_max, radial: *radial, angular: *angular },
            GridSpec::Ball { dim, r_max, per_axis } => GridJson::Ball { dim: *dim, r_max: *r_max, per_axis: *per_axis },
            GridSpec::Polydisk { dim, r_max, per_axis } => {
                GridJson::Polydisk { dim: *dim, r_max: *r_max, per_axis: *per_axis }
            }
            GridSpec::Points(points) => GridJson::Points { points: points.iter().map(Point::to_flat).collect() },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use curvlab_core::poly::PolyC;
    use proptest::prelude::*;

    #[test]
    fn kernel_defaults() {
        let k: KernelJson = serde_json::from_str(r#"{"family": "szego"}"#).unwrap();
        assert_eq!(k.to_spec().unwrap(), KernelSpec::szego());
        let k: KernelJson = serde_json::from_str(r#"{"family": "drury_arveson", "dim": 3}"#).unwrap();
        assert_eq!(k.to_spec().unwrap(), KernelSpec::drury_arveson(3).unwrap());
        let k: KernelJson = serde_json::from_str(r#"{"family": "weighted_bergman", "alpha": 1.5}"#).unwrap();
        assert_eq!(k.to_spec().unwrap(), KernelSpec::weighted_bergman(1.5).unwrap());
    }

    #[test]
    fn kernel_rejections() {
        for bad in [
            r#"{"family": "weighted_bergman"}"#,
            r#"{"family": "szego", "alpha": 1.0}"#,
            r#"{"family": "weighted_bergman", "alpha": -2.0}"#,
            r#"{"family": "drury_arveson", "dim": 2, "domain": "polydisk"}"#,
            r#"{"family": "product"}"#,
        ] {
            let k: KernelJson = serde_json::from_str(bad).unwrap();
            assert!(k.to_spec().is_err(), "{bad}");
        }
        assert!(serde_json::from_str::<KernelJson>(r#"{"family": "szego", "colour": 1}"#).is_err());
        assert!(serde_json::from_str::<KernelJson>(r#"{"family": "hardy"}"#).is_err());
    }

    #[test]
    fn product_kernel_round_trip() {
        let json = r#"{"family": "product", "factors": [{"family": "szego"}, {"family": "bergman"}]}"#;
        let spec = serde_json::from_str::<KernelJson>(json).unwrap().to_spec().unwrap();
        assert_eq!(spec.dim(), 2);
        assert_eq!(KernelJson::from_spec(&spec).to_spec().unwrap(), spec);
    }

    #[test]
    fn multiplier_parse() {
        let json = r#"{"rows": 2, "cols": 1, "nvars": 1,
            "entries": [[[{"exp": [0], "re": 1, "im": 0}]], [[{"exp": [1], "re": 0, "im": 2}]]]}"#;
        let m = serde_json::from_str::<MultiplierJson>(json).unwrap().to_multiplier().unwrap();
        assert_eq!(m.entry(1, 0), &PolyC::from_coeffs(&[Complex64::new(0.0, 0.0), Complex64::new(0.0, 2.0)]));
        let bad = r#"{"rows": 2, "cols": 1, "nvars": 1, "entries": [[[{"exp": [0, 1], "re": 1, "im": 0}]], [[]]]}"#;
        assert!(serde_json::from_str::<MultiplierJson>(bad).unwrap().to_multiplier().is_err());
        let short = r#"{"rows": 2, "cols": 1, "nvars": 1, "entries": [[[]]]}"#;
        assert!(serde_json::from_str::<MultiplierJson>(short).unwrap().to_multiplier().is_err());
    }

    #[test]
    fn grid_parse() {
        let g: GridJson = serde_json::from_str(r#"{"shape": "disk"}"#).unwrap();
        assert_eq!(g.to_spec().unwrap(), GridSpec::default());
        let g: GridJson = serde_json::from_str(r#"{"shape": "points", "points": [[0.1, 0.2], [0, 0]]}"#).unwrap();
        assert_eq!(g.to_spec().unwrap().points().unwrap().len(), 2);
        assert!(serde_json::from_str::<GridJson>(r#"{"shape": "disk", "rmax": 0.5}"#).is_err());
        let g: GridJson = serde_json::from_str(r#"{"shape": "disk", "r_max": 0.99}"#).unwrap();
        assert!(g.to_spec().is_err());
    }

    fn kernel_strategy() -> impl Strategy<Value = KernelSpec> {
        prop_oneof![
            Just(KernelSpec::szego()),
            Just(KernelSpec::bergman()),
            (-0.9f64..5.0).prop_map(|a| KernelSpec::weighted_bergman(a).unwrap()),
            (1usize..4).prop_map(|n| KernelSpec::drury_arveson(n).unwrap()),
            (2usize..4).prop_map(|n| KernelSpec::new(KernelFamily::Bergman, Domain::polydisk(n).unwrap()).unwrap()),
        ]
    }

    fn multiplier_strategy() -> impl Strategy<Value = MatrixMultiplier> {
        (1usize..3, 1usize..3, 1usize..3).prop_flat_map(|(q, p, n)| {
            let term = (proptest::collection::vec(0u32..3, n), -5.0f64..5.0, -5.0f64..5.0);
            proptest::collection::vec(proptest::collection::vec(term, 0..4), q * p).prop_map(move |entries| {
                let polys = entries
                    .into_iter()
                    .map(|terms| PolyC::from_terms(n, terms.into_iter().map(|(e, a, b)| (e, Complex64::new(a, b)))).unwrap())
                    .collect();
                MatrixMultiplier::new(q, p, n, polys).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn kernels_round_trip(spec in kernel_strategy()) {
            let text = serde_json::to_string(&KernelJson::from_spec(&spec)).unwrap();
            let back = serde_json::from_str::<KernelJson>(&text).unwrap().to_spec().unwrap();
            prop_assert_eq!(back, spec);
        }

        #[test]
        fn multipliers_round_trip(m in multiplier_strategy()) {
            let text = serde_json::to_string(&MultiplierJson::from_multiplier(&m)).unwrap();
            let back = serde_json::from_str::<MultiplierJson>(&text).unwrap().to_multiplier().unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
