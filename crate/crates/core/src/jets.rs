//! Univariate Taylor-jet arithmetic over complex scalars.
//!
//! A [`Jet`] holds the coefficients `c_h = ∂^h f / h!` of a function of one
//! local variable, truncated at a fixed order. Products, reciprocals and
//! polynomial composition propagate jets exactly coefficient-by-coefficient,
//! so derivatives of closed-form expressions come out to rounding error
//! rather than finite-difference error.
//!
//! The scalar type is generic: [`Dual`] carries a first-order derivative in a
//! second direction through the same formulas, which is how mixed
//! `∂_t ∂_z^h` derivatives are obtained from a `z`-jet computation.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

/// Scalar admissible as a jet coefficient.
pub trait JetScalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn from_c64(x: Complex64) -> Self;
    fn inv(self) -> Self;
    fn exp(self) -> Self;
    /// Magnitude used for singularity thresholds.
    fn abs(self) -> f64;
}

impl JetScalar for Complex64 {
    fn zero() -> Self {
        Complex64::ZERO
    }
    fn one() -> Self {
        Complex64::ONE
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn from_c64(x: Complex64) -> Self {
        x
    }
    fn inv(self) -> Self {
        1.0 / self
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    fn abs(self) -> f64 {
        self.norm()
    }
}

/// First-order dual number over `Complex64`: value plus one directional
/// derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub v: Complex64,
    pub d: Complex64,
}

impl Dual {
    pub fn new(v: Complex64, d: Complex64) -> Self {
        Dual { v, d }
    }

    /// Constant in the dual direction.
    pub fn constant(v: Complex64) -> Self {
        Dual { v, d: Complex64::ZERO }
    }

    /// Seed of the differentiation variable.
    pub fn variable(v: Complex64) -> Self {
        Dual { v, d: Complex64::ONE }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.v * o.v, self.v * o.d + self.d * o.v)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.v, -self.d)
    }
}

impl JetScalar for Dual {
    fn zero() -> Self {
        Dual::constant(Complex64::ZERO)
    }
    fn one() -> Self {
        Dual::constant(Complex64::ONE)
    }
    fn from_f64(x: f64) -> Self {
        Dual::constant(Complex64::new(x, 0.0))
    }
    fn from_c64(x: Complex64) -> Self {
        Dual::constant(x)
    }
    fn inv(self) -> Self {
        let iv = 1.0 / self.v;
        Dual::new(iv, -self.d * iv * iv)
    }
    fn exp(self) -> Self {
        let ev = self.v.exp();
        Dual::new(ev, ev * self.d)
    }
    fn abs(self) -> f64 {
        self.v.norm()
    }
}

/// Truncated univariate Taylor expansion: `c[h] = ∂^h f / h!`, `h <= order`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<S> {
    pub c: Vec<S>,
}

impl<S: JetScalar> Jet<S> {
    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn constant(v: S, order: usize) -> Self {
        let mut c = vec![S::zero(); order + 1];
        c[0] = v;
        Jet { c }
    }

    /// The local variable itself: value `v`, unit first derivative.
    pub fn variable(v: S, order: usize) -> Self {
        let mut j = Self::constant(v, order);
        if order >= 1 {
            j.c[1] = S::one();
        }
        j
    }

    pub fn add(&self, o: &Self) -> Self {
        Jet {
            c: self.c.iter().zip(&o.c).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Jet {
            c: self.c.iter().zip(&o.c).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: S) -> Self {
        Jet {
            c: self.c.iter().map(|&a| a * s).collect(),
        }
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, o: &Self) -> Self {
        let order = self.order().min(o.order());
        let mut c = vec![S::zero(); order + 1];
        for (h, item) in c.iter_mut().enumerate() {
            let mut acc = S::zero();
            for k in 0..=h {
                acc = acc + self.c[k] * o.c[h - k];
            }
            *item = acc;
        }
        Jet { c }
    }

    /// Series reciprocal; requires the constant term away from zero.
    pub fn recip(&self, tol: f64) -> Result<Self> {
        let c0 = self.c[0];
        if c0.abs() < tol {
            return Err(Error::Config(format!(
                "jet reciprocal of series with |constant term| = {:.3e} < {tol:.1e}",
                c0.abs()
            )));
        }
        let inv0 = c0.inv();
        let mut c = vec![S::zero(); self.order() + 1];
        c[0] = inv0;
        for h in 1..=self.order() {
            let mut acc = S::zero();
            for k in 1..=h {
                acc = acc + self.c[k] * c[h - k];
            }
            c[h] = -acc * inv0;
        }
        Ok(Jet { c })
    }

    /// Compose a univariate polynomial (monomial coefficients, ascending)
    /// with this jet: Horner evaluation in jet arithmetic.
    pub fn compose_poly(&self, poly: &[Complex64]) -> Self {
        let order = self.order();
        let mut acc = Jet::constant(S::zero(), order);
        for &coeff in poly.iter().rev() {
            acc = acc.mul(self);
            acc.c[0] = acc.c[0] + S::from_c64(coeff);
        }
        acc
    }

    /// Value at local displacement `dx` (plain polynomial evaluation).
    pub fn eval(&self, dx: S) -> S {
        let mut acc = S::zero();
        for &coeff in self.c.iter().rev() {
            acc = acc * dx + coeff;
        }
        acc
    }
}

/// Evaluate a univariate polynomial at a scalar.
pub fn poly_eval_scalar<S: JetScalar>(poly: &[Complex64], x: S) -> S {
    let mut acc = S::zero();
    for &coeff in poly.iter().rev() {
        acc = acc * x + S::from_c64(coeff);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn geometric_series_reciprocal() {
        // 1/(1 - x) has all jet coefficients 1
        let x = Jet::<Complex64>::variable(Complex64::ZERO, 5);
        let one = Jet::<Complex64>::constant(Complex64::ONE, 5);
        let r = one.sub(&x).recip(1e-12).unwrap();
        for h in 0..=5 {
            assert!((r.c[h] - c(1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn compose_square() {
        // f(y) = y^2 at y = 2 + x: coefficients 4, 4, 1
        let arg = Jet::<Complex64>::variable(c(2.0), 3);
        let f = arg.compose_poly(&[c(0.0), c(0.0), c(1.0)]);
        assert_eq!(f.c[0], c(4.0));
        assert_eq!(f.c[1], c(4.0));
        assert_eq!(f.c[2], c(1.0));
        assert_eq!(f.c[3], c(0.0));
    }

    #[test]
    fn dual_tracks_product_rule() {
        let a = Dual::new(c(2.0), c(3.0));
        let b = Dual::new(c(-1.0), c(0.5));
        let p = a * b;
        assert_eq!(p.v, c(-2.0));
        assert_eq!(p.d, c(2.0) * c(0.5) + c(3.0) * c(-1.0));
        let r = a.inv();
        assert_eq!(r.v, c(0.5));
        assert_eq!(r.d, -c(3.0) * c(0.25));
    }

    #[test]
    fn recip_rejects_singular() {
        let j = Jet::<Complex64>::constant(c(1e-15), 3);
        assert!(j.recip(1e-12).is_err());
    }
}
