//! Sparse truncated Taylor polynomials in `V0, V1, U_0..U_level`.
//!
//! Coefficients are stored in monomial form: `P = Σ c_m V0^n0 V1^n1 Π U_h^l_h`.
//! The divided-power coefficient attached to an index `m` is `c_m * m!`
//! (the mixed derivative of `P` at the origin); conversions both ways are
//! provided. Every operation discards monomials above the configured total
//! degree cap, so the class is closed under products and derivatives.

use crate::error::{Error, Result};
use crate::index::MultiIndex;
use num_complex::Complex64;
use std::collections::BTreeMap;

/// A differentiation / evaluation variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    V0,
    V1,
    U(usize),
}

/// Sparse multivariate Taylor polynomial at a given level.
///
/// `level` = α admits the variables `V0, V1, U_0..U_α`. Zero coefficients are
/// never stored explicitly.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedPoly {
    level: usize,
    degree_cap: usize,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl TruncatedPoly {
    pub fn zero(level: usize, degree_cap: usize) -> Self {
        TruncatedPoly {
            level,
            degree_cap,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(c: Complex64, level: usize, degree_cap: usize) -> Self {
        let mut p = Self::zero(level, degree_cap);
        p.add_term(MultiIndex::zero(), c);
        p
    }

    /// Single monomial `c * X^idx`.
    pub fn monomial(idx: MultiIndex, c: Complex64, level: usize, degree_cap: usize) -> Result<Self> {
        if idx.min_level() > level {
            return Err(Error::Index(format!(
                "monomial {idx} uses U_{} above level {level}",
                idx.min_level()
            )));
        }
        let mut p = Self::zero(level, degree_cap);
        p.add_term(idx, c);
        Ok(p)
    }

    /// Build from monomial-form terms, dropping over-cap and zero entries.
    pub fn from_terms<I>(terms: I, level: usize, degree_cap: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut p = Self::zero(level, degree_cap);
        for (idx, c) in terms {
            if idx.min_level() > level {
                return Err(Error::Index(format!(
                    "term {idx} uses U_{} above level {level}",
                    idx.min_level()
                )));
            }
            p.add_term(idx, c);
        }
        Ok(p)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn degree_cap(&self) -> usize {
        self.degree_cap
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Largest total degree present (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(|m| m.total_degree()).max().unwrap_or(0)
    }

    /// Largest exponent of `U_h` present.
    pub fn degree_in_u(&self, h: usize) -> u32 {
        self.coeffs.keys().map(|m| m.l(h)).max().unwrap_or(0)
    }

    /// Monomial coefficient at `idx` (0 if absent).
    pub fn coeff(&self, idx: &MultiIndex) -> Complex64 {
        self.coeffs.get(idx).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    /// Accumulate a term, respecting the degree cap and pruning zeros.
    pub fn add_term(&mut self, idx: MultiIndex, c: Complex64) {
        if c == Complex64::ZERO || idx.total_degree() as usize > self.degree_cap {
            return;
        }
        debug_assert!(idx.min_level() <= self.level, "term above level");
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(idx) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == Complex64::ZERO {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.level, self.degree_cap);
        if c == Complex64::ZERO {
            return out;
        }
        for (idx, v) in &self.coeffs {
            out.add_term(idx.clone(), *v * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.degree_cap != other.degree_cap {
            return Err(Error::Config(format!(
                "degree cap mismatch: {} vs {}",
                self.degree_cap, other.degree_cap
            )));
        }
        let mut out = self.clone();
        out.level = self.level.max(other.level);
        for (idx, v) in &other.coeffs {
            out.add_term(idx.clone(), *v);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Coefficient-wise convolution truncated at the shared degree cap.
    ///
    /// Levels may differ; the result lives at the larger one.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.degree_cap != other.degree_cap {
            return Err(Error::Config(format!(
                "degree cap mismatch: {} vs {}",
                self.degree_cap, other.degree_cap
            )));
        }
        let mut out = Self::zero(self.level.max(other.level), self.degree_cap);
        for (ia, ca) in &self.coeffs {
            let head = ia.total_degree() as usize;
            if head > self.degree_cap {
                continue;
            }
            for (ib, cb) in &other.coeffs {
                if head + ib.total_degree() as usize > self.degree_cap {
                    continue;
                }
                out.add_term(ia.add(ib), *ca * *cb);
            }
        }
        Ok(out)
    }

    /// Formal partial derivative in monomial convention.
    pub fn diff(&self, var: Var) -> Result<Self> {
        if let Var::U(j) = var {
            if j > self.level {
                return Err(Error::Index(format!(
                    "derivative in U_{j} above level {}",
                    self.level
                )));
            }
        }
        let mut out = Self::zero(self.level, self.degree_cap);
        for (idx, c) in &self.coeffs {
            let (e, dropped) = match var {
                Var::V0 => (idx.n0(), idx.with_n0(idx.n0().saturating_sub(1))),
                Var::V1 => (idx.n1(), idx.with_n1(idx.n1().saturating_sub(1))),
                Var::U(j) => (idx.l(j), idx.with_l(j, idx.l(j).saturating_sub(1))),
            };
            if e > 0 {
                out.add_term(dropped, *c * e as f64);
            }
        }
        Ok(out)
    }

    /// View the same coefficients at a higher level.
    ///
    /// All newly admitted variables get exponent 0, which is exactly the
    /// Kronecker padding of lower-level data; the coefficient table is
    /// unchanged because trailing zero exponents are canonical.
    pub fn embed(&self, new_level: usize) -> Result<Self> {
        if new_level < self.level {
            return Err(Error::Index(format!(
                "embed to level {new_level} below current level {}",
                self.level
            )));
        }
        let mut out = self.clone();
        out.level = new_level;
        Ok(out)
    }

    /// Evaluate at `point = (v0, v1, u_0..u_level)`.
    ///
    /// Powers of each coordinate are built once and reused across monomials.
    pub fn eval(&self, point: &[Complex64]) -> Result<Complex64> {
        if point.len() != self.level + 3 {
            return Err(Error::Index(format!(
                "eval point has {} coordinates, level {} needs {}",
                point.len(),
                self.level,
                self.level + 3
            )));
        }
        let dims = point.len();
        let mut max_exp = vec![0u32; dims];
        for idx in self.coeffs.keys() {
            max_exp[0] = max_exp[0].max(idx.n0());
            max_exp[1] = max_exp[1].max(idx.n1());
            for (h, e) in idx.u_support() {
                max_exp[h + 2] = max_exp[h + 2].max(e);
            }
        }
        let pow_tables: Vec<Vec<Complex64>> = point
            .iter()
            .zip(&max_exp)
            .map(|(&x, &m)| {
                let mut t = Vec::with_capacity(m as usize + 1);
                t.push(Complex64::ONE);
                for k in 1..=m as usize {
                    let prev = t[k - 1];
                    t.push(prev * x);
                }
                t
            })
            .collect();
        let mut acc = Complex64::ZERO;
        for (idx, c) in &self.coeffs {
            let mut term = *c;
            term *= pow_tables[0][idx.n0() as usize];
            term *= pow_tables[1][idx.n1() as usize];
            for (h, e) in idx.u_support() {
                term *= pow_tables[h + 2][e as usize];
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Divided-power coefficient table: `idx -> c_idx * idx!`.
    pub fn divided_coeffs(&self) -> BTreeMap<MultiIndex, Complex64> {
        self.coeffs
            .iter()
            .map(|(idx, c)| (idx.clone(), *c * idx.factorial()))
            .collect()
    }

    /// Inverse of [`divided_coeffs`](Self::divided_coeffs).
    pub fn from_divided<I>(table: I, level: usize, degree_cap: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        Self::from_terms(
            table
                .into_iter()
                .map(|(idx, c)| {
                    let f = idx.factorial();
                    (idx, c / f)
                })
                .collect::<Vec<_>>(),
            level,
            degree_cap,
        )
    }

    /// Coefficient-absolute-value sum at nonnegative radii:
    /// `Σ |c_m| rv0^n0 rv1^n1 Π ru(h)^l_h`.
    ///
    /// For a polynomial this bounds the supremum of `|P|` over the closed
    /// polydisc with those radii, and equals the coefficient-absolute-value
    /// majorant evaluated at the radius tuple.
    pub fn abs_eval(&self, rv0: f64, rv1: f64, ru: impl Fn(usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for (idx, c) in &self.coeffs {
            let mut term = c.norm();
            term *= rv0.powi(idx.n0() as i32);
            term *= rv1.powi(idx.n1() as i32);
            for (h, e) in idx.u_support() {
                term *= ru(h).powi(e as i32);
            }
            acc += term;
        }
        acc
    }

    /// Variables the polynomial actually depends on, as evaluation-slot
    /// offsets (0 = V0, 1 = V1, 2 + h = U_h).
    pub fn essential_slots(&self) -> Vec<usize> {
        let mut used = vec![false; self.level + 3];
        for idx in self.coeffs.keys() {
            if idx.n0() > 0 {
                used[0] = true;
            }
            if idx.n1() > 0 {
                used[1] = true;
            }
            for (h, _) in idx.u_support() {
                used[h + 2] = true;
            }
        }
        used.iter()
            .enumerate()
            .filter_map(|(i, &u)| u.then_some(i))
            .collect()
    }

    /// Largest absolute monomial coefficient (0 for the zero polynomial).
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;
    use proptest::prelude::*;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    fn poly(terms: &[(MultiIndex, f64)], level: usize, cap: usize) -> TruncatedPoly {
        TruncatedPoly::from_terms(terms.iter().map(|(i, v)| (i.clone(), c(*v))), level, cap).unwrap()
    }

    #[test]
    fn mul_expands_products() {
        // (V0 + U0) * U0 with cap 2 -> V0*U0 + U0^2
        let p = poly(&[(MultiIndex::v0(1), 1.0), (MultiIndex::u(0, 1), 1.0)], 0, 2);
        let q = poly(&[(MultiIndex::u(0, 1), 1.0)], 0, 2);
        let r = p.mul(&q).unwrap();
        assert_eq!(r.coeff(&MultiIndex::v0(1).add(&MultiIndex::u(0, 1))), c(1.0));
        assert_eq!(r.coeff(&MultiIndex::u(0, 2)), c(1.0));
        assert_eq!(r.num_terms(), 2);
    }

    #[test]
    fn mul_identity() {
        let p = poly(
            &[(MultiIndex::new(1, 1, &[2]), 3.5), (MultiIndex::zero(), -1.0)],
            2,
            6,
        );
        let one = TruncatedPoly::constant(c(1.0), 0, 6);
        assert_eq!(p.mul(&one).unwrap(), p);
    }

    #[test]
    fn mul_cap_mismatch_rejected() {
        let p = TruncatedPoly::constant(c(1.0), 0, 4);
        let q = TruncatedPoly::constant(c(1.0), 0, 6);
        assert!(matches!(p.mul(&q), Err(Error::Config(_))));
    }

    /// Brute-force monomial convolution oracle, independent of `mul`'s
    /// cap-skipping loop: expand every pair, then prune.
    fn mul_oracle(p: &TruncatedPoly, q: &TruncatedPoly) -> Vec<(MultiIndex, C)> {
        let mut table: BTreeMap<MultiIndex, C> = BTreeMap::new();
        for (ia, ca) in p.terms() {
            for (ib, cb) in q.terms() {
                *table.entry(ia.add(ib)).or_insert(C::ZERO) += *ca * *cb;
            }
        }
        table
            .into_iter()
            .filter(|(i, v)| (i.total_degree() as usize) <= p.degree_cap() && *v != C::ZERO)
            .collect()
    }

    #[test]
    fn mul_matches_bruteforce() {
        // random-ish degree <= 2 polys in 3 variables (V0, V1, U0)
        let p = poly(
            &[
                (MultiIndex::zero(), 2.0),
                (MultiIndex::v0(1), -1.5),
                (MultiIndex::new(0, 1, &[1]), 0.5),
                (MultiIndex::u(0, 2), 1.25),
            ],
            0,
            2,
        );
        let q = poly(
            &[
                (MultiIndex::v1(1), 1.0),
                (MultiIndex::new(1, 0, &[1]), -2.0),
                (MultiIndex::zero(), 0.75),
            ],
            0,
            2,
        );
        let r = p.mul(&q).unwrap();
        for (idx, v) in mul_oracle(&p, &q) {
            assert!((r.coeff(&idx) - v).norm() < 1e-12, "mismatch at {idx}");
        }
        assert_eq!(r.num_terms(), mul_oracle(&p, &q).len());
    }

    #[test]
    fn diff_drops_exponent() {
        // d/dU0 (U0^2) = 2 U0
        let p = poly(&[(MultiIndex::u(0, 2), 1.0)], 0, 4);
        let d = p.diff(Var::U(0)).unwrap();
        assert_eq!(d.coeff(&MultiIndex::u(0, 1)), c(2.0));
        // d/dV1 (V0) = 0
        let p = poly(&[(MultiIndex::v0(1), 1.0)], 0, 4);
        assert!(p.diff(Var::V1).unwrap().is_zero());
    }

    #[test]
    fn diff_above_level_rejected() {
        let p = TruncatedPoly::constant(c(1.0), 1, 4);
        assert!(matches!(p.diff(Var::U(2)), Err(Error::Index(_))));
    }

    #[test]
    fn diff_matches_finite_differences() {
        // d/dU1 (V0 * U1^3) = 3 V0 U1^2, checked at a random complex point
        let idx = MultiIndex::v0(1).add(&MultiIndex::u(1, 3));
        let p = poly(&[(idx, 1.0)], 1, 6);
        let d = p.diff(Var::U(1)).unwrap();
        let pt = [
            C::new(0.3, 0.1),
            C::new(-0.2, 0.4),
            C::new(0.5, -0.3),
            C::new(0.7, 0.2),
        ];
        let h = 1e-6;
        let mut hi = pt;
        hi[3] += c(h);
        let mut lo = pt;
        lo[3] -= c(h);
        let fd = (p.eval(&hi).unwrap() - p.eval(&lo).unwrap()) / c(2.0 * h);
        let exact = d.eval(&pt).unwrap();
        assert!((fd - exact).norm() <= 1e-6 * exact.norm().max(1.0));
    }

    #[test]
    fn embed_is_identity_on_coeffs() {
        let p = poly(&[(MultiIndex::u(0, 1), 1.0)], 0, 4);
        let e = p.embed(3).unwrap();
        assert_eq!(e.level(), 3);
        assert_eq!(e.divided_coeffs(), p.divided_coeffs());
        // evaluation ignores the padded coordinates
        let v = e
            .eval(&[c(0.0), c(0.0), c(2.5), c(9.0), c(-3.0), c(7.0)])
            .unwrap();
        assert_eq!(v, c(2.5));
        assert!(p.embed(0).is_ok());
        let q = TruncatedPoly::constant(c(1.0), 2, 4);
        assert!(matches!(q.embed(1), Err(Error::Index(_))));
    }

    #[test]
    fn eval_examples() {
        // V0 * U0 at (2, _, 3) -> 6
        let p = poly(&[(MultiIndex::v0(1).add(&MultiIndex::u(0, 1)), 1.0)], 0, 4);
        assert_eq!(p.eval(&[c(2.0), c(5.0), c(3.0)]).unwrap(), c(6.0));
        let k = TruncatedPoly::constant(c(7.0), 0, 4);
        assert_eq!(k.eval(&[c(1.0), c(2.0), c(3.0)]).unwrap(), c(7.0));
        assert!(k.eval(&[c(1.0)]).is_err());
    }

    #[test]
    fn eval_matches_naive_sum() {
        let p = poly(
            &[
                (MultiIndex::new(2, 1, &[1]), 1.5),
                (MultiIndex::new(0, 3, &[]), -0.25),
                (MultiIndex::new(1, 0, &[0, 2]), 2.0),
                (MultiIndex::zero(), 0.5),
            ],
            1,
            6,
        );
        let pt = [C::new(0.4, -0.2), C::new(-0.6, 0.1), C::new(0.2, 0.7), C::new(0.3, 0.3)];
        // naive oracle: powi per monomial, no shared tables
        let mut naive = C::ZERO;
        for (idx, coeff) in p.terms() {
            let mut t = *coeff;
            t *= pt[0].powi(idx.n0() as i32);
            t *= pt[1].powi(idx.n1() as i32);
            for (h, e) in idx.u_support() {
                t *= pt[h + 2].powi(e as i32);
            }
            naive += t;
        }
        let got = p.eval(&pt).unwrap();
        assert!((got - naive).norm() <= 1e-12 * naive.norm().max(1.0));
    }

    #[test]
    fn divided_roundtrip() {
        let p = poly(
            &[(MultiIndex::new(2, 0, &[3]), 1.7), (MultiIndex::new(0, 1, &[]), -2.0)],
            0,
            6,
        );
        let q = TruncatedPoly::from_divided(p.divided_coeffs(), p.level(), p.degree_cap()).unwrap();
        assert_eq!(p, q);
    }

    proptest! {
        #[test]
        fn prop_mul_commutative(seed in 0u64..200) {
            let (p, q) = random_pair(seed);
            let a = p.mul(&q).unwrap();
            let b = q.mul(&p).unwrap();
            prop_assert_eq!(a.num_terms(), b.num_terms());
            for (idx, v) in a.terms() {
                prop_assert!((v - b.coeff(idx)).norm() <= 1e-12 * v.norm().max(1.0));
            }
        }

        #[test]
        fn prop_mul_associative(seed in 0u64..200) {
            let (p, q) = random_pair(seed);
            let (r, _) = random_pair(seed.wrapping_add(977));
            let a = p.mul(&q).unwrap().mul(&r).unwrap();
            let b = p.mul(&q.mul(&r).unwrap()).unwrap();
            for (idx, v) in a.terms() {
                let w = b.coeff(idx);
                prop_assert!((v - w).norm() <= 1e-12 * v.norm().max(1.0));
            }
            prop_assert_eq!(a.num_terms(), b.num_terms());
        }

        #[test]
        fn prop_mul_distributive(seed in 0u64..200) {
            let (p, q) = random_pair(seed);
            let (r, _) = random_pair(seed.wrapping_add(31));
            let lhs = p.mul(&q.add(&r).unwrap()).unwrap();
            let rhs = p.mul(&q).unwrap().add(&p.mul(&r).unwrap()).unwrap();
            for (idx, v) in lhs.terms() {
                let w = rhs.coeff(idx);
                prop_assert!((v - w).norm() <= 1e-12 * v.norm().max(1.0));
            }
        }

        #[test]
        fn prop_mixed_partials_commute(seed in 0u64..200) {
            let (p, _) = random_pair(seed);
            let a = p.diff(Var::U(0)).unwrap().diff(Var::U(1)).unwrap();
            let b = p.diff(Var::U(1)).unwrap().diff(Var::U(0)).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn prop_eval_multiplicative_under_cap(seed in 0u64..200) {
            let (p, q) = random_pair_low_degree(seed);
            let pt = [C::new(0.3, 0.2), C::new(-0.1, 0.4), C::new(0.5, -0.5), C::new(0.2, 0.1)];
            let lhs = p.mul(&q).unwrap().eval(&pt).unwrap();
            let rhs = p.eval(&pt).unwrap() * q.eval(&pt).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
        }

        #[test]
        fn prop_divided_involution(seed in 0u64..200) {
            let (p, _) = random_pair(seed);
            let q = TruncatedPoly::from_divided(p.divided_coeffs(), p.level(), p.degree_cap()).unwrap();
            for (idx, v) in p.terms() {
                prop_assert!((q.coeff(idx) - v).norm() <= 1e-12 * v.norm().max(1.0));
            }
        }

        #[test]
        fn prop_divided_table_roundtrip(seed in 0u64..200) {
            // table -> monomial -> table is the identity on divided tables
            let (p, _) = random_pair(seed);
            let table = p.divided_coeffs();
            let back = TruncatedPoly::from_divided(table.clone(), p.level(), p.degree_cap())
                .unwrap()
                .divided_coeffs();
            prop_assert_eq!(table.len(), back.len());
            for (idx, v) in &table {
                let w = back.get(idx).copied().unwrap_or(C::ZERO);
                prop_assert!((v - w).norm() <= 1e-12 * v.norm().max(1.0));
            }
        }
    }

    /// Deterministic pseudo-random polynomial pair at level 1, cap 8.
    fn random_pair(seed: u64) -> (TruncatedPoly, TruncatedPoly) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut gen = |cap: usize| {
            let mut p = TruncatedPoly::zero(1, cap);
            for _ in 0..6 {
                let idx = MultiIndex::new(
                    rng.gen_range(0..3),
                    rng.gen_range(0..3),
                    &[rng.gen_range(0..2), rng.gen_range(0..2)],
                );
                p.add_term(idx, C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            }
            p
        };
        (gen(8), gen(8))
    }

    /// Pair whose degrees sum below the cap, so products are exact.
    fn random_pair_low_degree(seed: u64) -> (TruncatedPoly, TruncatedPoly) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
        let mut gen = || {
            let mut p = TruncatedPoly::zero(1, 12);
            for _ in 0..4 {
                let idx = MultiIndex::new(
                    rng.gen_range(0..2),
                    rng.gen_range(0..2),
                    &[rng.gen_range(0..2), rng.gen_range(0..2)],
                );
                p.add_term(idx, C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            }
            p
        };
        (gen(), gen())
    }
}
