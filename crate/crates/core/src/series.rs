//! Order-by-order series in `W` whose coefficients are [`TruncatedPoly`]s.
//!
//! Storage convention: `levels[alpha]` is the plain coefficient of
//! `W^alpha`. A series written in the divided form `Σ P_α W^α/α!` therefore
//! stores `P_α/α!` at slot α; the [`divided_level`](JetSeries::divided_level)
//! accessor converts back. Keeping the scaled form makes `W`-multiplication a
//! plain convolution and keeps coefficient magnitudes tame at high order.
//!
//! Level slots normally hold a polynomial of level ≤ α. The derivative-style
//! operators of the fixed-point module may produce a polynomial of level
//! α + 1 in slot α; integration in `W` re-aligns the offsets.

use crate::error::{Error, Result};
use crate::index::factorial_f64;
use crate::poly::{TruncatedPoly, Var};
use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct JetSeries {
    levels: Vec<TruncatedPoly>,
    degree_cap: usize,
}

impl JetSeries {
    /// Zero series truncated at order `a_order`.
    pub fn zero(a_order: usize, degree_cap: usize) -> Self {
        let levels = (0..=a_order)
            .map(|alpha| TruncatedPoly::zero(alpha, degree_cap))
            .collect();
        JetSeries { levels, degree_cap }
    }

    /// Build from plain `W^alpha` coefficients.
    pub fn from_w_power_levels(levels: Vec<TruncatedPoly>, degree_cap: usize) -> Result<Self> {
        for (alpha, p) in levels.iter().enumerate() {
            if p.degree_cap() != degree_cap {
                return Err(Error::Config(format!(
                    "level {alpha} has degree cap {} instead of {degree_cap}",
                    p.degree_cap()
                )));
            }
            if p.level() > alpha + 1 {
                return Err(Error::Index(format!(
                    "level {alpha} holds a polynomial of level {}",
                    p.level()
                )));
            }
        }
        if levels.is_empty() {
            return Err(Error::Config("series needs at least the order-0 level".into()));
        }
        Ok(JetSeries { levels, degree_cap })
    }

    /// Build from divided coefficients `P_α` of `Σ P_α W^α/α!`.
    pub fn from_divided_levels(levels: Vec<TruncatedPoly>, degree_cap: usize) -> Result<Self> {
        let scaled = levels
            .into_iter()
            .enumerate()
            .map(|(alpha, p)| p.scale(Complex64::new(1.0 / factorial_f64(alpha as u32), 0.0)))
            .collect();
        Self::from_w_power_levels(scaled, degree_cap)
    }

    pub fn a_order(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn degree_cap(&self) -> usize {
        self.degree_cap
    }

    /// Plain `W^alpha` coefficient.
    pub fn level(&self, alpha: usize) -> &TruncatedPoly {
        &self.levels[alpha]
    }

    pub fn level_mut(&mut self, alpha: usize) -> &mut TruncatedPoly {
        &mut self.levels[alpha]
    }

    /// Divided coefficient `P_α = α! * levels[α]`.
    pub fn divided_level(&self, alpha: usize) -> TruncatedPoly {
        self.levels[alpha].scale(Complex64::new(factorial_f64(alpha as u32), 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.levels.iter().all(|p| p.is_zero())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        JetSeries {
            levels: self.levels.iter().map(|p| p.scale(c)).collect(),
            degree_cap: self.degree_cap,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.a_order() != other.a_order() {
            return Err(Error::Config(format!(
                "order mismatch: {} vs {}",
                self.a_order(),
                other.a_order()
            )));
        }
        let levels = self
            .levels
            .iter()
            .zip(&other.levels)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(JetSeries {
            levels,
            degree_cap: self.degree_cap,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Level-wise partial derivative in a space variable.
    pub fn diff_levels(&self, var: Var) -> Result<Self> {
        let levels = self
            .levels
            .iter()
            .map(|p| match var {
                // levels below the variable's home level are constant in it
                Var::U(j) if j > p.level() => Ok(TruncatedPoly::zero(p.level(), self.degree_cap)),
                v => p.diff(v),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(JetSeries {
            levels,
            degree_cap: self.degree_cap,
        })
    }

    /// `W`-convolution truncated at this series' order.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        let a_order = self.a_order();
        let mut out = JetSeries::zero(a_order, self.degree_cap);
        for alpha in 0..=a_order {
            let mut acc = TruncatedPoly::zero(alpha, self.degree_cap);
            for a1 in 0..=alpha.min(self.a_order()) {
                let a2 = alpha - a1;
                if a2 > other.a_order() {
                    continue;
                }
                let prod = self.levels[a1].mul(&other.levels[a2])?;
                acc = acc.add(&prod)?;
            }
            out.levels[alpha] = acc;
        }
        Ok(out)
    }

    /// `m`-fold integration in `W` from 0, truncated at the series order.
    ///
    /// In divided form this shifts `P_α W^α/α!` to `P_α W^{α+m}/(α+m)!`;
    /// the top `m` input levels fall off the truncation and are dropped.
    pub fn integrate_w(&self, m: usize) -> Self {
        if m == 0 {
            return self.clone();
        }
        let a_order = self.a_order();
        let mut out = JetSeries::zero(a_order, self.degree_cap);
        for alpha in m..=a_order {
            let src = alpha - m;
            let mut ratio = 1.0;
            for k in (src + 1)..=alpha {
                ratio /= k as f64;
            }
            let scaled = self.levels[src].scale(Complex64::new(ratio, 0.0));
            // slot α admits level α; re-home so slot and level agree
            out.levels[alpha] = scaled
                .embed(alpha.max(scaled.level()))
                .expect("integration never lowers the level");
        }
        out
    }

    /// Evaluate `Σ levels[α](point_α) w^α` where `point_fn(α)` supplies the
    /// space point for level α.
    pub fn eval_w(
        &self,
        w: Complex64,
        mut point_fn: impl FnMut(usize) -> Vec<Complex64>,
    ) -> Result<Complex64> {
        let mut acc = Complex64::ZERO;
        let mut wp = Complex64::ONE;
        for alpha in 0..=self.a_order() {
            let pt = point_fn(alpha);
            acc += self.levels[alpha].eval(&pt)? * wp;
            wp *= w;
        }
        Ok(acc)
    }

    /// Largest absolute monomial coefficient across all levels.
    pub fn max_abs_coeff(&self) -> f64 {
        self.levels.iter().map(|p| p.max_abs_coeff()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::MultiIndex;
    use num_complex::Complex64 as C;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    #[test]
    fn integrate_shifts_divided_levels() {
        // divided level P_2 = 6 becomes the divided level at slot 3 unchanged
        let mut s = JetSeries::zero(4, 4);
        *s.level_mut(2) = TruncatedPoly::constant(c(6.0 / 2.0), 2, 4); // P_2 = 6
        let t = s.integrate_w(1);
        assert_eq!(t.divided_level(3).coeff(&MultiIndex::zero()), c(6.0));
        assert!(t.level(0).is_zero() && t.level(1).is_zero() && t.level(2).is_zero());
    }

    #[test]
    fn integrate_composes() {
        let mut s = JetSeries::zero(6, 4);
        *s.level_mut(0) = TruncatedPoly::constant(c(1.0), 0, 4);
        *s.level_mut(1) = TruncatedPoly::constant(c(-2.5), 1, 4);
        let twice = s.integrate_w(1).integrate_w(1);
        let direct = s.integrate_w(2);
        assert_eq!(twice, direct);
        for alpha in 0..2 {
            assert!(direct.level(alpha).is_zero());
        }
    }

    #[test]
    fn convolution_is_power_series_product() {
        // (1 + w)(1 - w) = 1 - w^2
        let mut a = JetSeries::zero(3, 4);
        *a.level_mut(0) = TruncatedPoly::constant(c(1.0), 0, 4);
        *a.level_mut(1) = TruncatedPoly::constant(c(1.0), 1, 4);
        let mut b = JetSeries::zero(3, 4);
        *b.level_mut(0) = TruncatedPoly::constant(c(1.0), 0, 4);
        *b.level_mut(1) = TruncatedPoly::constant(c(-1.0), 1, 4);
        let p = a.convolve(&b).unwrap();
        assert_eq!(p.level(0).coeff(&MultiIndex::zero()), c(1.0));
        assert!(p.level(1).is_zero());
        assert_eq!(p.level(2).coeff(&MultiIndex::zero()), c(-1.0));
        assert!(p.level(3).is_zero());
    }
}
