//! Matrix-valued polynomial multipliers, the corona bound, Bezout left
//! inverses in one variable, and left-inverse certificates.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::Point;
use crate::linalg::{self, CMat};
use crate::poly::PolyC;

/// Coefficients at or below this fraction of the leading scale are zero in
/// the Euclidean remainder chain.
pub const EUCLID_FLOOR: f64 = 1e-12;

/// A `rows x cols` matrix of polynomials in `nvars` variables.
///
/// The symbol of a quotient module is `q x p` with `p < q`; left inverses
/// are `p x q`. Shape requirements are checked by the operations that care.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixMultiplier {
    rows: usize,
    cols: usize,
    nvars: usize,
    entries: Vec<PolyC>,
}

impl MatrixMultiplier {
    /// Builds from row-major entries.
    pub fn new(rows: usize, cols: usize, nvars: usize, entries: Vec<PolyC>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape("multiplier must have at least one row and one column".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!("{} entries for a {rows}x{cols} multiplier", entries.len())));
        }
        if let Some(bad) = entries.iter().find(|p| p.nvars() != nvars) {
            return Err(Error::Shape(format!("entry in {} variables, expected {nvars}", bad.nvars())));
        }
        Ok(MatrixMultiplier { rows, cols, nvars, entries })
    }

    pub fn from_rows(nvars: usize, rows: Vec<Vec<PolyC>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        MatrixMultiplier::new(r, c, nvars, rows.into_iter().flatten().collect())
    }

    /// A column multiplier `[theta_1, ..., theta_q]^T`.
    pub fn column(entries: Vec<PolyC>) -> Result<Self> {
        let nvars = entries.first().map_or(1, PolyC::nvars);
        let q = entries.len();
        MatrixMultiplier::new(q, 1, nvars, entries)
    }

    pub fn identity(n: usize, nvars: usize) -> Self {
        let entries = (0..n * n)
            .map(|k| if k / n == k % n { PolyC::one(nvars) } else { PolyC::zero(nvars) })
            .collect();
        MatrixMultiplier { rows: n, cols: n, nvars, entries }
    }

    /// Constant multiplier from a complex matrix.
    pub fn constant(m: &CMat, nvars: usize) -> Self {
        let entries = (0..m.nrows() * m.ncols())
            .map(|k| PolyC::constant(nvars, m[(k / m.ncols(), k % m.ncols())]))
            .collect();
        MatrixMultiplier { rows: m.nrows(), cols: m.ncols(), nvars, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn entry(&self, i: usize, j: usize) -> &PolyC {
        &self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[PolyC] {
        &self.entries
    }

    /// Largest total degree among the entries (0 when all are constant).
    pub fn degree(&self) -> u32 {
        self.entries.iter().filter_map(PolyC::degree).max().unwrap_or(0)
    }

    /// Requires `1 <= p < q`, the shape of a quotient-module symbol.
    pub fn check_symbol_shape(&self) -> Result<()> {
        if !(self.cols >= 1 && self.cols < self.rows) {
            return Err(Error::Shape(format!(
                "symbol must be q x p with 1 <= p < q, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(())
    }

    pub fn eval(&self, z: &Point) -> Result<CMat> {
        if z.dim() != self.nvars {
            return Err(Error::Shape(format!("point in C^{} for a multiplier in {} variables", z.dim(), self.nvars)));
        }
        let m = CMat::from_fn(self.rows, self.cols, |i, j| self.entry(i, j).eval(z.coords()));
        if m.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Input(format!("multiplier overflows at {:?}", z.to_pairs())));
        }
        Ok(m)
    }

    pub fn transpose(&self) -> Self {
        let entries = (0..self.cols * self.rows)
            .map(|k| self.entry(k % self.rows, k / self.rows).clone())
            .collect();
        MatrixMultiplier { rows: self.cols, cols: self.rows, nvars: self.nvars, entries }
    }

    /// Entrywise `d/dz_i`.
    pub fn derivative(&self, i: usize) -> Self {
        MatrixMultiplier {
            rows: self.rows,
            cols: self.cols,
            nvars: self.nvars,
            entries: self.entries.iter().map(|p| p.derivative(i)).collect(),
        }
    }

    pub fn mul(&self, rhs: &MatrixMultiplier) -> Result<Self> {
        if self.cols != rhs.rows || self.nvars != rhs.nvars {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut entries = Vec::with_capacity(self.rows * rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = PolyC::zero(self.nvars);
                for k in 0..self.cols {
                    acc = &acc + &(self.entry(i, k) * rhs.entry(k, j));
                }
                entries.push(acc);
            }
        }
        MatrixMultiplier::new(self.rows, rhs.cols, self.nvars, entries)
    }

    pub fn sub(&self, rhs: &MatrixMultiplier) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Shape("cannot subtract multipliers of different shapes".into()));
        }
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect();
        MatrixMultiplier::new(self.rows, self.cols, self.nvars, entries)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        MatrixMultiplier {
            entries: self.entries.iter().map(|p| p.scale(c)).collect(),
            ..self.clone()
        }
    }

    /// Largest coefficient modulus over all entries.
    pub fn max_coeff(&self) -> f64 {
        self.entries.iter().map(PolyC::max_coeff).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Result<PolyC> {
        if self.rows != self.cols {
            return Err(Error::Shape("trace of a non-square multiplier".into()));
        }
        Ok((0..self.rows).fold(PolyC::zero(self.nvars), |acc, k| &acc + self.entry(k, k)))
    }

    /// Square submatrix on the given rows (all columns).
    pub fn row_minor(&self, rows: &[usize]) -> Vec<Vec<PolyC>> {
        rows.iter().map(|&i| (0..self.cols).map(|j| self.entry(i, j).clone()).collect()).collect()
    }
}

/// Determinant of a square polynomial matrix by cofactor expansion along
/// the first column. Sizes here are at most 8.
pub fn poly_det(m: &[Vec<PolyC>], nvars: usize) -> PolyC {
    let n = m.len();
    match n {
        0 => PolyC::one(nvars),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        _ => {
            let mut acc = PolyC::zero(nvars);
            for i in 0..n {
                if m[i][0].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<PolyC>> =
                    (0..n).filter(|&r| r != i).map(|r| m[r][1..].to_vec()).collect();
                let term = &m[i][0] * &poly_det(&minor, nvars);
                acc = if i % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

/// Minimum over the grid of the smallest singular value of `theta(z)`.
pub fn corona_bound(theta: &MatrixMultiplier, grid: &[Point]) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::Input("corona bound over an empty grid".into()));
    }
    let mut bound = f64::INFINITY;
    for z in grid {
        bound = bound.min(linalg::sigma_min(&theta.eval(z)?));
    }
    Ok(bound)
}

/// Solves `theta1 psi1 + theta2 psi2 = 1` over `C[z]` by the extended
/// Euclidean algorithm.
pub fn bezout_left_inverse(theta1: &PolyC, theta2: &PolyC) -> Result<(PolyC, PolyC)> {
    if theta1.nvars() != 1 || theta2.nvars() != 1 {
        return Err(Error::Unsupported("Bezout construction needs one variable; supply psi explicitly".into()));
    }
    if theta1.is_zero() && theta2.is_zero() {
        return Err(Error::NoLeftInverse("both entries vanish identically".into()));
    }
    // invariant: r_k = theta1 s_k + theta2 t_k
    let (mut r0, mut r1) = (theta1.clone(), theta2.clone());
    let (mut s0, mut s1) = (PolyC::one(1), PolyC::zero(1));
    let (mut t0, mut t1) = (PolyC::zero(1), PolyC::one(1));
    while !r1.is_zero() {
        let (q, r) = r0.div_rem(&r1, EUCLID_FLOOR)?;
        let s = &s0 - &(&q * &s1);
        let t = &t0 - &(&q * &t1);
        r0 = core::mem::replace(&mut r1, r);
        s0 = core::mem::replace(&mut s1, s);
        t0 = core::mem::replace(&mut t1, t);
    }
    match r0.degree() {
        Some(0) => {
            let g = r0.coeff(&[0]);
            let inv = Complex64::new(1.0, 0.0) / g;
            Ok((s0.scale(inv), t0.scale(inv)))
        }
        Some(d) => Err(Error::NoLeftInverse(format!("entries share a common factor of degree {d}"))),
        None => Err(Error::NoLeftInverse("degenerate remainder chain".into())),
    }
}

/// Outcome of checking `psi(z) theta(z) = I_p` on a grid.
#[derive(Clone, Debug)]
pub struct LeftInverseCertificate {
    pub psi: MatrixMultiplier,
    /// `max_z || psi(z) theta(z) - I_p ||` (operator norm).
    pub residual: f64,
    /// `sup_z || psi(z) ||`, a proxy for the multiplier norm.
    pub sup_psi_norm: f64,
    pub grid: Vec<Point>,
}

impl LeftInverseCertificate {
    pub fn is_valid(&self, tolerance: f64) -> bool {
        self.residual <= tolerance
    }
}

pub fn verify_left_inverse(
    theta: &MatrixMultiplier,
    psi: &MatrixMultiplier,
    grid: &[Point],
) -> Result<LeftInverseCertificate> {
    if psi.rows() != theta.cols() || psi.cols() != theta.rows() {
        return Err(Error::Shape(format!(
            "psi is {}x{} but theta is {}x{}",
            psi.rows(),
            psi.cols(),
            theta.rows(),
            theta.cols()
        )));
    }
    if grid.is_empty() {
        return Err(Error::Input("left-inverse check over an empty grid".into()));
    }
    let p = theta.cols();
    let mut residual: f64 = 0.0;
    let mut sup_psi_norm: f64 = 0.0;
    for z in grid {
        let psi_z = psi.eval(z)?;
        let defect = &psi_z * theta.eval(z)? - CMat::identity(p, p);
        residual = residual.max(linalg::op_norm(&defect));
        sup_psi_norm = sup_psi_norm.max(linalg::op_norm(&psi_z));
    }
    Ok(LeftInverseCertificate { psi: psi.clone(), residual, sup_psi_norm, grid: grid.to_vec() })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    pub(crate) fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn z() -> PolyC {
        PolyC::var(1, 0)
    }

    pub(crate) fn k(v: f64) -> PolyC {
        PolyC::constant(1, c(v, 0.0))
    }

    fn disk_grid(r_max: f64, radial: usize, angular: usize) -> Vec<Point> {
        let mut pts = alloc::vec![Point::real(0.0)];
        for i in 1..=radial {
            let r = r_max * i as f64 / radial as f64;
            for j in 0..angular {
                let t = 2.0 * core::f64::consts::PI * j as f64 / angular as f64;
                pts.push(Point::disk(Complex64::from_polar(r, t)));
            }
        }
        pts
    }

    #[test]
    fn evaluation_examples() {
        let theta = MatrixMultiplier::column(alloc::vec![k(1.0), z()]).unwrap();
        let at0 = theta.eval(&Point::real(0.0)).unwrap();
        assert_eq!(at0[(0, 0)], c(1.0, 0.0));
        assert_eq!(at0[(1, 0)], c(0.0, 0.0));
        assert_eq!(theta.eval(&Point::real(0.5)).unwrap()[(1, 0)], c(0.5, 0.0));
        let theta = MatrixMultiplier::column(alloc::vec![z(), &k(1.0) - &z()]).unwrap();
        let v = theta.eval(&Point::real(0.25)).unwrap();
        assert_eq!((v[(0, 0)], v[(1, 0)]), (c(0.25, 0.0), c(0.75, 0.0)));
    }

    #[test]
    fn corona_examples() {
        let grid = disk_grid(0.95, 40, 64);
        let theta = MatrixMultiplier::column(alloc::vec![k(1.0), z()]).unwrap();
        assert_relative_eq!(corona_bound(&theta, &grid).unwrap(), 1.0, epsilon = 1e-14);

        // |z|^2 + |1 - z|^2 = 2|z - 1/2|^2 + 1/2, minimum 1/2 at z = 1/2
        let theta = MatrixMultiplier::column(alloc::vec![z(), &k(1.0) - &z()]).unwrap();
        let mut grid = disk_grid(0.999, 200, 64);
        grid.push(Point::real(0.5));
        assert_relative_eq!(corona_bound(&theta, &grid).unwrap(), 0.5f64.sqrt(), epsilon = 1e-12);

        let theta = MatrixMultiplier::column(alloc::vec![z(), &z() * &z()]).unwrap();
        assert_eq!(corona_bound(&theta, &disk_grid(0.8, 4, 8)).unwrap(), 0.0);
        assert!(matches!(corona_bound(&theta, &[]), Err(Error::Input(_))));
    }

    #[test]
    fn corona_is_monotone_under_refinement() {
        let theta = MatrixMultiplier::column(alloc::vec![&z() - &k(0.3), &z() * &z() + k(0.2)]).unwrap();
        let coarse = disk_grid(0.9, 6, 12);
        let mut fine = coarse.clone();
        fine.extend(disk_grid(0.9, 17, 31));
        assert!(corona_bound(&theta, &fine).unwrap() <= corona_bound(&theta, &coarse).unwrap());
    }

    #[test]
    fn bezout_examples() {
        let (p1, p2) = bezout_left_inverse(&z(), &(&k(1.0) - &z())).unwrap();
        assert_eq!((p1, p2), (k(1.0), k(1.0)));
        let (p1, p2) = bezout_left_inverse(&k(1.0), &z()).unwrap();
        assert_eq!(p1, k(1.0));
        assert!(p2.is_zero());
        assert!(matches!(bezout_left_inverse(&z(), &(&z() * &z())), Err(Error::NoLeftInverse(_))));
        let two_vars = PolyC::var(2, 0);
        assert!(matches!(bezout_left_inverse(&two_vars, &two_vars), Err(Error::Unsupported(_))));
    }

    #[test]
    fn bezout_identity_holds_for_higher_degree() {
        // theta1 = (z - 0.5)(z + 0.25i), theta2 = z^3 + 2: coprime
        let t1 = &(&z() - &k(0.5)) * &(&z() + &PolyC::constant(1, c(0.0, 0.25)));
        let t2 = &(&(&z() * &z()) * &z()) + &k(2.0);
        let (p1, p2) = bezout_left_inverse(&t1, &t2).unwrap();
        let identity = &(&(&t1 * &p1) + &(&t2 * &p2)) - &k(1.0);
        assert!(identity.max_coeff() <= 1e-12, "{}", identity.max_coeff());
        let theta = MatrixMultiplier::column(alloc::vec![t1, t2]).unwrap();
        let psi = MatrixMultiplier::from_rows(1, alloc::vec![alloc::vec![p1, p2]]).unwrap();
        let cert = verify_left_inverse(&theta, &psi, &disk_grid(0.9, 10, 24)).unwrap();
        assert!(cert.residual <= 1e-12);
    }

    #[test]
    fn left_inverse_certificates() {
        let grid = disk_grid(0.8, 8, 16);
        let theta = MatrixMultiplier::column(alloc::vec![z(), &k(1.0) - &z()]).unwrap();
        let psi = MatrixMultiplier::from_rows(1, alloc::vec![alloc::vec![k(1.0), k(1.0)]]).unwrap();
        let cert = verify_left_inverse(&theta, &psi, &grid).unwrap();
        assert!(cert.residual <= 1e-15);
        assert!(cert.is_valid(1e-12));
        assert_relative_eq!(cert.sup_psi_norm, 2.0f64.sqrt(), epsilon = 1e-14);

        let theta = MatrixMultiplier::column(alloc::vec![k(1.0), z()]).unwrap();
        let good = MatrixMultiplier::from_rows(1, alloc::vec![alloc::vec![k(1.0), k(0.0)]]).unwrap();
        assert_eq!(verify_left_inverse(&theta, &good, &grid).unwrap().residual, 0.0);
        let bad = MatrixMultiplier::from_rows(1, alloc::vec![alloc::vec![k(0.0), k(1.0)]]).unwrap();
        let expected = grid.iter().map(|p| (p.z() - c(1.0, 0.0)).norm()).fold(0.0, f64::max);
        assert_relative_eq!(verify_left_inverse(&theta, &bad, &grid).unwrap().residual, expected, epsilon = 1e-15);
        assert!(matches!(verify_left_inverse(&theta, &theta, &grid), Err(Error::Shape(_))));
    }

    #[test]
    fn polynomial_determinant() {
        let m = alloc::vec![
            alloc::vec![k(2.0), z(), k(0.0)],
            alloc::vec![k(1.0), k(1.0), z()],
            alloc::vec![k(0.0), k(3.0), k(1.0)],
        ];
        // 2(1 - 3z) - z(1 - 0) + 0 = 2 - 7z
        let d = poly_det(&m, 1);
        assert_eq!(d, &k(2.0) - &z().scale(c(7.0, 0.0)));
    }

    proptest! {
        #[test]
        fn certified_points_have_full_rank(a in -0.9f64..0.9, b in -0.9f64..0.9) {
            let theta = MatrixMultiplier::column(alloc::vec![z(), &k(1.0) - &z()]).unwrap();
            let s = linalg::sigma_min(&theta.eval(&Point::disk(c(a, b))).unwrap());
            prop_assert!(s > 0.0);
        }

        #[test]
        fn gauge_covariance(a in 0.2f64..3.0, x in -0.8f64..0.8, y in -0.5f64..0.5) {
            // p = 2 symbol and constant invertible A
            let theta = MatrixMultiplier::from_rows(1, alloc::vec![
                alloc::vec![k(1.0), k(0.0)],
                alloc::vec![k(0.0), k(1.0)],
                alloc::vec![z(), &z() * &z()],
            ]).unwrap();
            let amat = CMat::from_row_slice(2, 2, &[c(a, 0.0), c(0.3, 0.1), c(0.0, 0.0), c(1.0 / a, 0.2)]);
            let gauged = theta.mul(&MatrixMultiplier::constant(&amat, 1)).unwrap();
            let grid = [Point::disk(c(x, y)), Point::real(0.0)];
            let lhs = corona_bound(&gauged, &grid).unwrap();
            let rhs = corona_bound(&theta, &grid).unwrap() * linalg::sigma_min(&amat);
            prop_assert!(lhs >= rhs * (1.0 - 1e-12));
        }
    }
}
