//! Sparse complex polynomials in `n` commuting variables.

use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Exponent = Vec<u32>;

/// A polynomial `sum c_k z^k` with no stored zero coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyC {
    nvars: usize,
    terms: BTreeMap<Exponent, Complex64>,
}

impl PolyC {
    pub fn zero(nvars: usize) -> Self {
        PolyC { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        PolyC::monomial(nvars, alloc::vec![0; nvars], c)
    }

    pub fn one(nvars: usize) -> Self {
        PolyC::constant(nvars, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(nvars: usize, exp: Exponent, c: Complex64) -> Self {
        let mut p = PolyC::zero(nvars);
        p.add_term(exp, c);
        p
    }

    /// The coordinate function `z_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut exp = alloc::vec![0; nvars];
        exp[i] = 1;
        PolyC::monomial(nvars, exp, Complex64::new(1.0, 0.0))
    }

    /// Builds from (exponent, coefficient) pairs; repeated exponents add up.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, Complex64)>,
    {
        let mut p = PolyC::zero(nvars);
        for (exp, c) in terms {
            if exp.len() != nvars {
                return Err(Error::Shape(alloc::format!(
                    "exponent {exp:?} has {} entries, expected {nvars}",
                    exp.len()
                )));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::Input(alloc::format!("non-finite coefficient for {exp:?}")));
            }
            p.add_term(exp, c);
        }
        Ok(p)
    }

    /// One-variable polynomial from ascending coefficients.
    pub fn from_coeffs(coeffs: &[Complex64]) -> Self {
        let mut p = PolyC::zero(1);
        for (k, &c) in coeffs.iter().enumerate() {
            p.add_term(alloc::vec![k as u32], c);
        }
        p
    }

    fn add_term(&mut self, exp: Exponent, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        match self.terms.entry(exp) {
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if *slot.get() == Complex64::new(0.0, 0.0) {
                    slot.remove();
                }
            }
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Complex64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn coeff(&self, exp: &[u32]) -> Complex64 {
        self.terms.get(exp).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Largest coefficient modulus (0 for the zero polynomial).
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut p = PolyC::zero(self.nvars);
        for (e, v) in &self.terms {
            p.add_term(e.clone(), v * c);
        }
        p
    }

    /// Drops coefficients with modulus at most `tol`.
    pub fn trimmed(&self, tol: f64) -> Self {
        PolyC {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(_, c)| c.norm() > tol).map(|(e, c)| (e.clone(), *c)).collect(),
        }
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        debug_assert_eq!(z.len(), self.nvars);
        if self.terms.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        // power table per variable, then one product per monomial
        let max_exp: Vec<u32> =
            (0..self.nvars).map(|i| self.terms.keys().map(|e| e[i]).max().unwrap_or(0)).collect();
        let powers: Vec<Vec<Complex64>> = (0..self.nvars)
            .map(|i| {
                let mut row = Vec::with_capacity(max_exp[i] as usize + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                for _ in 0..=max_exp[i] {
                    row.push(acc);
                    acc *= z[i];
                }
                row
            })
            .collect();
        self.terms
            .iter()
            .map(|(e, c)| e.iter().enumerate().fold(*c, |acc, (i, &k)| acc * powers[i][k as usize]))
            .sum()
    }

    /// Partial derivative `d/dz_i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut p = PolyC::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                p.add_term(e2, c * e[i] as f64);
            }
        }
        p
    }

    /// Dense ascending coefficients of a one-variable polynomial.
    pub fn univariate_coeffs(&self) -> Result<Vec<Complex64>> {
        if self.nvars != 1 {
            return Err(Error::Unsupported("univariate operation on a multivariate polynomial".into()));
        }
        let deg = self.degree().unwrap_or(0) as usize;
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); deg + 1];
        for (e, c) in &self.terms {
            out[e[0] as usize] = *c;
        }
        Ok(out)
    }

    /// One-variable division with remainder. Remainder coefficients of
    /// modulus at most `floor * scale` are dropped, where `scale` is the
    /// largest coefficient of the dividend.
    pub fn div_rem(&self, divisor: &PolyC, floor: f64) -> Result<(PolyC, PolyC)> {
        let b = divisor.univariate_coeffs()?;
        if divisor.is_zero() {
            return Err(Error::Input("division by the zero polynomial".into()));
        }
        let mut r = self.univariate_coeffs()?;
        let scale = self.max_coeff().max(divisor.max_coeff());
        let db = b.len() - 1;
        let lead = b[db];
        let mut q = alloc::vec![Complex64::new(0.0, 0.0); r.len().saturating_sub(db).max(1)];
        while r.len() > db && !r.is_empty() {
            let k = r.len() - 1;
            let t = r[k] / lead;
            q[k - db] = t;
            for (j, bj) in b.iter().enumerate() {
                r[k - db + j] -= t * bj;
            }
            r.pop();
            while r.last().is_some_and(|c| c.norm() <= floor * scale) {
                r.pop();
            }
        }
        let rem = PolyC::from_coeffs(&r).trimmed(floor * scale);
        Ok((PolyC::from_coeffs(&q), rem))
    }

    fn check_compatible(&self, other: &PolyC) {
        assert_eq!(self.nvars, other.nvars, "polynomials in different numbers of variables");
    }
}

impl Add for &PolyC {
    type Output = PolyC;
    fn add(self, rhs: &PolyC) -> PolyC {
        self.check_compatible(rhs);
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), *c);
        }
        p
    }
}

impl Sub for &PolyC {
    type Output = PolyC;
    fn sub(self, rhs: &PolyC) -> PolyC {
        self + &(-rhs)
    }
}

impl Neg for &PolyC {
    type Output = PolyC;
    fn neg(self) -> PolyC {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &PolyC {
    type Output = PolyC;
    fn mul(self, rhs: &PolyC) -> PolyC {
        self.check_compatible(rhs);
        let mut p = PolyC::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Exponent = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                p.add_term(e, ca * cb);
            }
        }
        p
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for PolyC {
            type Output = PolyC;
            fn $m(self, rhs: PolyC) -> PolyC {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
