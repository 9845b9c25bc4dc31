//! Numerical Wirtinger calculus.
//!
//! Two engines live here. [`second_jet`] differentiates an arbitrary smooth
//! field on `C^n` by central differences in the `2n` real coordinates with
//! one level of Richardson extrapolation. [`sesqui_jet`] differentiates a
//! two-variable function that is holomorphic in its first argument and
//! anti-holomorphic in its second (a Gram kernel) by trapezoidal Cauchy
//! integrals, which is spectrally accurate and is what the projection
//! derivative needs.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{Domain, Point, DEFAULT_MARGIN};
use crate::linalg::CMat;

/// Values that can be differentiated: scalars and matrices.
pub trait FieldValue: Clone {
    fn scaled(&self, a: Complex64) -> Self;
    fn axpy(&mut self, a: Complex64, x: &Self);
}

impl FieldValue for Complex64 {
    fn scaled(&self, a: Complex64) -> Self {
        self * a
    }
    fn axpy(&mut self, a: Complex64, x: &Self) {
        *self += a * x;
    }
}

impl FieldValue for CMat {
    fn scaled(&self, a: Complex64) -> Self {
        self.map(|z| z * a)
    }
    fn axpy(&mut self, a: Complex64, x: &Self) {
        self.zip_apply(x, |s, v| *s += a * v);
    }
}

fn linear_combination<V: FieldValue>(terms: &[(f64, &V)]) -> V {
    let mut acc = terms[0].1.scaled(Complex64::new(terms[0].0, 0.0));
    for (c, v) in &terms[1..] {
        acc.axpy(Complex64::new(*c, 0.0), v);
    }
    acc
}

/// Step-size policy for the finite-difference engine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stencil {
    /// Base step; the actual step is `base_step * max(1, |z|)`.
    pub base_step: f64,
    /// Required boundary distance of every stencil node.
    pub margin: f64,
}

impl Default for Stencil {
    fn default() -> Self {
        Stencil { base_step: 1e-4, margin: DEFAULT_MARGIN }
    }
}

impl Stencil {
    pub fn step_at(&self, z: &Point) -> f64 {
        self.base_step * z.norm().max(1.0)
    }

    /// Rejects `z` when a stencil of radius `4h` would leave the margin.
    pub fn check(&self, domain: Option<&Domain>, z: &Point) -> Result<f64> {
        let h = self.step_at(z);
        if let Some(domain) = domain {
            if domain.dim() != z.dim() {
                return Err(Error::Shape(alloc::format!(
                    "point has {} coordinates, domain dimension is {}",
                    z.dim(),
                    domain.dim()
                )));
            }
            if !(domain.boundary_distance(z) >= self.margin + 4.0 * h) {
                return Err(Error::StepSize { point: z.to_pairs(), step: h });
            }
        }
        Ok(h)
    }
}

/// Multi-index pair selecting `prod d_i^{holo_i} prod dbar_j^{anti_j}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WirtingerOrder {
    pub holo: Vec<u8>,
    pub anti: Vec<u8>,
}

impl WirtingerOrder {
    pub fn new(holo: Vec<u8>, anti: Vec<u8>) -> Result<Self> {
        if holo.len() != anti.len() {
            return Err(Error::Shape("holomorphic and anti-holomorphic multi-indices differ in length".into()));
        }
        let total: u32 = holo.iter().chain(&anti).map(|&k| k as u32).sum();
        if total > 2 {
            return Err(Error::Unsupported(alloc::format!("Wirtinger order {total} > 2")));
        }
        Ok(WirtingerOrder { holo, anti })
    }

    /// `d/dz_i`.
    pub fn holo(n: usize, i: usize) -> Self {
        let mut holo = alloc::vec![0; n];
        holo[i] = 1;
        WirtingerOrder { holo, anti: alloc::vec![0; n] }
    }

    /// `d/dzbar_j`.
    pub fn anti(n: usize, j: usize) -> Self {
        let mut anti = alloc::vec![0; n];
        anti[j] = 1;
        WirtingerOrder { holo: alloc::vec![0; n], anti }
    }

    /// `d/dz_i d/dzbar_j`.
    pub fn mixed(n: usize, i: usize, j: usize) -> Self {
        let mut order = WirtingerOrder::holo(n, i);
        order.anti[j] = 1;
        order
    }

    pub fn total(&self) -> u32 {
        self.holo.iter().chain(&self.anti).map(|&k| k as u32).sum()
    }

    /// Expands the operator into real partials: a list of (coefficient,
    /// real coordinate indices). Coordinate `2i` is `x_i`, `2i + 1` is `y_i`.
    fn real_expansion(&self) -> Vec<(Complex64, Vec<usize>)> {
        let half = Complex64::new(0.5, 0.0);
        let i_unit = Complex64::new(0.0, 1.0);
        let mut factors: Vec<[(Complex64, usize); 2]> = Vec::new();
        for (k, (&h, &a)) in self.holo.iter().zip(&self.anti).enumerate() {
            for _ in 0..h {
                factors.push([(half, 2 * k), (-half * i_unit, 2 * k + 1)]);
            }
            for _ in 0..a {
                factors.push([(half, 2 * k), (half * i_unit, 2 * k + 1)]);
            }
        }
        let mut terms = alloc::vec![(Complex64::new(1.0, 0.0), Vec::new())];
        for factor in factors {
            let mut next = Vec::with_capacity(terms.len() * 2);
            for (c, idx) in &terms {
                for (fc, axis) in factor {
                    let mut idx = idx.clone();
                    idx.push(axis);
                    next.push((c * fc, idx));
                }
            }
            terms = next;
        }
        terms
    }
}

fn real_shift(z: &Point, axis: usize, t: f64) -> Point {
    let delta = if axis % 2 == 0 { Complex64::new(t, 0.0) } else { Complex64::new(0.0, t) };
    z.shifted(axis / 2, delta)
}

/// Central-difference derivative data at a point: value, all first real
/// partials and all second real partials, each Richardson-extrapolated.
#[derive(Clone, Debug)]
pub struct Jet<V> {
    pub value: V,
    pub first: Vec<V>,
    pub second: Vec<Vec<V>>,
}

impl<V: FieldValue> Jet<V> {
    fn real_dims(&self) -> usize {
        self.first.len()
    }

    /// `d/dz_i`.
    pub fn holo(&self, i: usize) -> V {
        let mut out = self.first[2 * i].scaled(Complex64::new(0.5, 0.0));
        out.axpy(Complex64::new(0.0, -0.5), &self.first[2 * i + 1]);
        out
    }

    /// `d/dzbar_j`.
    pub fn anti(&self, j: usize) -> V {
        let mut out = self.first[2 * j].scaled(Complex64::new(0.5, 0.0));
        out.axpy(Complex64::new(0.0, 0.5), &self.first[2 * j + 1]);
        out
    }

    /// `d/dz_i d/dzbar_j`.
    pub fn holo_anti(&self, i: usize, j: usize) -> V {
        self.apply(&WirtingerOrder::mixed(self.real_dims() / 2, i, j))
    }

    pub fn apply(&self, order: &WirtingerOrder) -> V {
        if order.total() == 0 {
            return self.value.clone();
        }
        let mut acc: Option<V> = None;
        for (c, axes) in order.real_expansion() {
            let term = match axes.as_slice() {
                [a] => &self.first[*a],
                [a, b] => &self.second[*a][*b],
                _ => unreachable!("order validated to be at most 2"),
            };
            match acc.as_mut() {
                Some(acc) => acc.axpy(c, term),
                None => acc = Some(term.scaled(c)),
            }
        }
        acc.expect("non-empty expansion")
    }
}

/// Richardson-extrapolated first and second real partials of `f` at `z`.
pub fn second_jet<V, F>(f: F, z: &Point, stencil: &Stencil, domain: Option<&Domain>) -> Result<Jet<V>>
where
    V: FieldValue,
    F: Fn(&Point) -> Result<V>,
{
    let h = stencil.check(domain, z)?;
    let dims = 2 * z.dim();
    let center = f(z)?;

    // axis samples at -2h, -h, +h, +2h
    let mut axis = Vec::with_capacity(dims);
    for a in 0..dims {
        let mut s = Vec::with_capacity(4);
        for t in [-2.0 * h, -h, h, 2.0 * h] {
            s.push(f(&real_shift(z, a, t))?);
        }
        axis.push(s);
    }

    let mut first = Vec::with_capacity(dims);
    let mut second: Vec<Vec<V>> = Vec::with_capacity(dims);
    for a in 0..dims {
        let s = &axis[a];
        let d_h = linear_combination(&[(0.5 / h, &s[2]), (-0.5 / h, &s[1])]);
        let d_2h = linear_combination(&[(0.25 / h, &s[3]), (-0.25 / h, &s[0])]);
        first.push(linear_combination(&[(4.0 / 3.0, &d_h), (-1.0 / 3.0, &d_2h)]));
        second.push(Vec::with_capacity(dims));
    }

    for a in 0..dims {
        for b in 0..dims {
            let value = if a == b {
                let s = &axis[a];
                let h2 = h * h;
                let d_h = linear_combination(&[(1.0 / h2, &s[2]), (-2.0 / h2, &center), (1.0 / h2, &s[1])]);
                let d_2h = linear_combination(&[
                    (0.25 / h2, &s[3]),
                    (-0.5 / h2, &center),
                    (0.25 / h2, &s[0]),
                ]);
                linear_combination(&[(4.0 / 3.0, &d_h), (-1.0 / 3.0, &d_2h)])
            } else if b < a {
                second[b][a].clone()
            } else {
                let cross = |t: f64| -> Result<V> {
                    let pp = f(&real_shift(&real_shift(z, a, t), b, t))?;
                    let pm = f(&real_shift(&real_shift(z, a, t), b, -t))?;
                    let mp = f(&real_shift(&real_shift(z, a, -t), b, t))?;
                    let mm = f(&real_shift(&real_shift(z, a, -t), b, -t))?;
                    let w = 0.25 / (t * t);
                    Ok(linear_combination(&[(w, &pp), (-w, &pm), (-w, &mp), (w, &mm)]))
                };
                let d_h = cross(h)?;
                let d_2h = cross(2.0 * h)?;
                linear_combination(&[(4.0 / 3.0, &d_h), (-1.0 / 3.0, &d_2h)])
            };
            second[a].push(value);
        }
    }

    Ok(Jet { value: center, first, second })
}

/// Applies a single Wirtinger operator of total order at most 2.
pub fn wirtinger_derivative<V, F>(
    f: F,
    z: &Point,
    order: &WirtingerOrder,
    stencil: &Stencil,
    domain: Option<&Domain>,
) -> Result<V>
where
    V: FieldValue,
    F: Fn(&Point) -> Result<V>,
{
    if order.holo.len() != z.dim() {
        return Err(Error::Shape("order multi-index length differs from the point dimension".into()));
    }
    if order.total() > 2 {
        return Err(Error::Unsupported("Wirtinger order above 2".into()));
    }
    Ok(second_jet(f, z, stencil, domain)?.apply(order))
}

/// Derivatives of a sesqui-holomorphic kernel `G(z, w)` on the diagonal.
#[derive(Clone, Debug)]
pub struct SesquiJet<V> {
    /// `G(p, p)`.
    pub value: V,
    /// `d/dz_i G(z, w)` at `z = w = p`.
    pub dz: Vec<V>,
    /// `d/dwbar_j G(z, w)` at `z = w = p`.
    pub dwbar: Vec<V>,
    /// `d/dz_i d/dwbar_j G(z, w)` at `z = w = p`.
    pub mixed: Vec<Vec<V>>,
}

/// Contour parameters for [`sesqui_jet`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contour {
    pub nodes: usize,
    pub max_radius: f64,
    pub margin: f64,
}

impl Default for Contour {
    fn default() -> Self {
        Contour { nodes: 16, max_radius: 0.02, margin: DEFAULT_MARGIN }
    }
}

impl Contour {
    /// Circle radius used at `p`: at most a quarter of the slack between
    /// the boundary distance and the margin.
    pub fn radius_at(&self, domain: Option<&Domain>, p: &Point) -> Result<f64> {
        match domain {
            None => Ok(self.max_radius),
            Some(d) => {
                let slack = d.boundary_distance(p) - self.margin;
                if !(slack > 0.0) {
                    return Err(Error::StepSize { point: p.to_pairs(), step: self.max_radius });
                }
                Ok(self.max_radius.min(0.25 * slack))
            }
        }
    }
}

/// Trapezoidal Cauchy-integral derivatives of `g(z, w)`, holomorphic in `z`
/// and anti-holomorphic in `w`, at the diagonal point `p`.
pub fn sesqui_jet<V, G>(g: G, p: &Point, contour: &Contour, domain: Option<&Domain>) -> Result<SesquiJet<V>>
where
    V: FieldValue,
    G: Fn(&Point, &Point) -> Result<V>,
{
    let n = p.dim();
    let m = contour.nodes.max(4);
    let rho = contour.radius_at(domain, p)?;
    let roots: Vec<Complex64> = (0..m)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * (k as f64) / (m as f64)))
        .collect();
    let value = g(p, p)?;

    let weight = |k: usize| roots[k].conj() / (rho * m as f64);
    let mut dz = Vec::with_capacity(n);
    let mut dwbar = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc_z: Option<V> = None;
        let mut acc_w: Option<V> = None;
        for k in 0..m {
            let zk = p.shifted(i, roots[k] * rho);
            let wk = p.shifted(i, roots[k].conj() * rho);
            accumulate(&mut acc_z, weight(k), &g(&zk, p)?);
            accumulate(&mut acc_w, weight(k), &g(p, &wk)?);
        }
        dz.push(acc_z.expect("nodes"));
        dwbar.push(acc_w.expect("nodes"));
    }

    let mut mixed = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc: Option<V> = None;
            for a in 0..m {
                let za = p.shifted(i, roots[a] * rho);
                for b in 0..m {
                    let wb = p.shifted(j, roots[b].conj() * rho);
                    accumulate(&mut acc, weight(a) * weight(b), &g(&za, &wb)?);
                }
            }
            row.push(acc.expect("nodes"));
        }
        mixed.push(row);
    }

    Ok(SesquiJet { value, dz, dwbar, mixed })
}

fn accumulate<V: FieldValue>(acc: &mut Option<V>, c: Complex64, v: &V) {
    match acc.as_mut() {
        Some(acc) => acc.axpy(c, v),
        None => *acc = Some(v.scaled(c)),
    }
}
