//! Problem instances: the coefficient families `b_{m,k}`, initial data,
//! radii, and the integer shape constraints that gate the whole pipeline.

use crate::error::{Error, Result};
use crate::poly::TruncatedPoly;
use crate::xflow::XSpec;
use num_complex::Complex64;
use std::collections::BTreeMap;

/// `w`-expansion coefficients of the equation coefficients: for each slot
/// `m ∈ {1,2,3}` and shift `k`, a finite list `alpha -> b_{m,k,alpha}` of
/// level-0 polynomials in `(v0, v1, u0)`, polynomial in `u0` of degree
/// `d_{m,k}`. Entries beyond the stored list are zero.
#[derive(Clone, Debug, Default)]
pub struct CoefficientFamily {
    entries: BTreeMap<(usize, usize), Vec<TruncatedPoly>>,
    /// Radius of `w`-convergence metadata carried from the problem file.
    pub w_radius: f64,
}

impl CoefficientFamily {
    pub fn new(w_radius: f64) -> Self {
        CoefficientFamily {
            entries: BTreeMap::new(),
            w_radius,
        }
    }

    pub fn set(&mut self, m: usize, k: usize, alpha: usize, poly: TruncatedPoly) -> Result<()> {
        if !(1..=3).contains(&m) {
            return Err(Error::Config(format!("coefficient slot m = {m} not in 1..=3")));
        }
        if poly.level() != 0 {
            return Err(Error::Config(format!(
                "b_{{{m},{k},{alpha}}} must be a level-0 polynomial in (v0, v1, u0)"
            )));
        }
        let list = self.entries.entry((m, k)).or_default();
        if list.len() <= alpha {
            list.resize(alpha + 1, TruncatedPoly::zero(0, poly.degree_cap()));
        }
        list[alpha] = poly;
        Ok(())
    }

    /// `b_{m,k,alpha}`, or `None` when identically zero.
    pub fn get(&self, m: usize, k: usize, alpha: usize) -> Option<&TruncatedPoly> {
        self.entries
            .get(&(m, k))
            .and_then(|list| list.get(alpha))
            .filter(|p| !p.is_zero())
    }

    /// Largest stored `w`-order for `(m, k)`.
    pub fn w_degree(&self, m: usize, k: usize) -> usize {
        self.entries
            .get(&(m, k))
            .map(|l| l.len().saturating_sub(1))
            .unwrap_or(0)
    }

    pub fn max_w_degree(&self) -> usize {
        self.entries
            .keys()
            .map(|&(m, k)| self.w_degree(m, k))
            .max()
            .unwrap_or(0)
    }

    /// Degree in `u0` across all `w`-orders of `(m, k)`.
    pub fn u0_degree(&self, m: usize, k: usize) -> usize {
        self.entries
            .get(&(m, k))
            .map(|list| list.iter().map(|p| p.degree_in_u(0) as usize).max().unwrap_or(0))
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.values().all(|l| l.iter().all(|p| p.is_zero()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<TruncatedPoly>)> {
        self.entries.iter()
    }
}

/// Full problem instance.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    /// Order `S` of the `w`-derivative on the left-hand side.
    pub s_order: usize,
    /// The shift set: `k < S` for every entry.
    pub ks: Vec<usize>,
    pub coeffs: CoefficientFamily,
    pub x: XSpec,
    /// Initial data `omega_j`, `j = 0..S-1`, bivariate polynomials.
    pub omega: Vec<TruncatedPoly>,
    /// Weight exponent `b > 1` of the norm and constraint machinery.
    pub b_exponent: f64,
    /// Inner radius `R` (grids and norms live inside `D(0, R)^2`).
    pub radius: f64,
    /// Total space-degree cap shared by every polynomial in the pipeline.
    pub degree_cap: usize,
}

impl ProblemSpec {
    /// Structural validation: radii, data levels, `u0` degrees, shift set.
    pub fn validate(&self) -> Result<()> {
        self.x.validate()?;
        if self.s_order == 0 {
            return Err(Error::Config("pde.s_order must be >= 1".into()));
        }
        if self.b_exponent <= 1.0 {
            return Err(Error::Config(format!(
                "norm.b = {} but b > 1 is required",
                self.b_exponent
            )));
        }
        if !(0.0 < self.radius && self.radius < self.x.r_prime) {
            return Err(Error::Config(format!(
                "radii must satisfy 0 < R < R'; got R = {}, R' = {}",
                self.radius, self.x.r_prime
            )));
        }
        for &k in &self.ks {
            if k >= self.s_order {
                return Err(Error::Config(format!(
                    "shift k = {k} must be below s_order = {}",
                    self.s_order
                )));
            }
        }
        if self.omega.len() > self.s_order {
            return Err(Error::Config(format!(
                "{} initial data entries but only j < {} are admissible",
                self.omega.len(),
                self.s_order
            )));
        }
        for (j, w) in self.omega.iter().enumerate() {
            if w.terms().any(|(idx, _)| idx.l_sum() > 0) {
                return Err(Error::Config(format!("omega_{j} depends on a U variable")));
            }
        }
        Ok(())
    }

    /// `omega_j` (zero beyond the stored list, per the `j >= S` convention).
    pub fn omega_j(&self, j: usize) -> TruncatedPoly {
        self.omega
            .get(j)
            .cloned()
            .unwrap_or_else(|| TruncatedPoly::zero(0, self.degree_cap))
    }

    /// `min_k (S - k)`: every application of the order-raising map lifts the
    /// `w`-order by at least this much.
    pub fn min_order_raise(&self) -> usize {
        self.ks
            .iter()
            .map(|&k| self.s_order - k)
            .min()
            .unwrap_or(self.s_order)
    }
}

/// One shift's constraint evaluation: the four lower bounds on `S` and the
/// smallest integer satisfying all of them.
#[derive(Clone, Debug)]
pub struct ConstraintRow {
    pub k: usize,
    /// The four right-hand sides, in display order.
    pub bounds: [f64; 4],
    /// Index (0-based) of the binding constraint.
    pub binding: usize,
    pub minimal_s: usize,
    /// Inequalities violated by the problem's `S` (text, empty when passing).
    pub violations: Vec<String>,
}

/// Result of the constraint gate.
#[derive(Clone, Debug)]
pub struct ConstraintReport {
    pub rows: Vec<ConstraintRow>,
    /// Smallest `S` admissible for every shift simultaneously.
    pub minimal_s: usize,
    pub pass: bool,
}

/// Evaluate the four shape inequalities for every `k`:
///
/// ```text
/// S >= k + 1 + max(b (d1 + 2) + 3, d + 1 + b (d + d1 + 1))
/// S >= k + 3 + b (2 + d2)
/// S >= k + 1 + b max(d1, d2)
/// S >= k + b d3
/// ```
///
/// where `d_m = d_{m,k}` is the `u0`-degree of the `b_{m,k}` family and `d`
/// is the reaction degree of the closed-form problem.
pub fn validate_constraints(p: &ProblemSpec) -> Result<ConstraintReport> {
    let b = p.b_exponent;
    let d = p.x.d as f64;
    let mut rows = Vec::new();
    let mut overall_min = 1usize;
    let mut pass = true;
    for &k in &p.ks {
        let kf = k as f64;
        let d1 = p.coeffs.u0_degree(1, k) as f64;
        let d2 = p.coeffs.u0_degree(2, k) as f64;
        let d3 = p.coeffs.u0_degree(3, k) as f64;
        let bounds = [
            kf + 1.0 + (b * (d1 + 2.0) + 3.0).max(d + 1.0 + b * (d + d1 + 1.0)),
            kf + 3.0 + b * (2.0 + d2),
            kf + 1.0 + b * d1.max(d2),
            kf + b * d3,
        ];
        let texts = [
            format!(
                "S >= k + 1 + max(b(d_{{1,k}}+2)+3, d+1+b(d+d_{{1,k}}+1)) = {:.6}",
                bounds[0]
            ),
            format!("S >= k + 3 + b(2 + d_{{2,k}}) = {:.6}", bounds[1]),
            format!("S >= k + 1 + b max(d_{{1,k}}, d_{{2,k}}) = {:.6}", bounds[2]),
            format!("S >= k + b d_{{3,k}} = {:.6}", bounds[3]),
        ];
        let binding = bounds
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite bounds"))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let minimal_s = (bounds[binding].ceil() as usize).max(k + 1);
        let violations: Vec<String> = bounds
            .iter()
            .zip(&texts)
            .filter(|(&bound, _)| (p.s_order as f64) < bound)
            .map(|(_, text)| format!("k = {k}: {text}"))
            .collect();
        if !violations.is_empty() {
            pass = false;
        }
        overall_min = overall_min.max(minimal_s);
        rows.push(ConstraintRow {
            k,
            bounds,
            binding,
            minimal_s,
            violations,
        });
    }
    Ok(ConstraintReport {
        rows,
        minimal_s: overall_min,
        pass,
    })
}

/// Convenience: zero polynomial constructor shared by fixtures and tests.
pub fn zero_poly(cap: usize) -> TruncatedPoly {
    TruncatedPoly::zero(0, cap)
}

/// Convenience: constant level-0 polynomial.
pub fn const_poly(re: f64, cap: usize) -> TruncatedPoly {
    TruncatedPoly::constant(Complex64::new(re, 0.0), 0, cap)
}
