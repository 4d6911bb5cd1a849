//! Multi-index bookkeeping for polynomials in `V0, V1, U_0, U_1, ...`.
//!
//! An index records the exponents of the two base variables and of the
//! level-dependent `U_h` family. Trailing zero `U`-exponents are trimmed on
//! construction so that equality and ordering are well defined across levels:
//! the index of `U_0` at level 0 and the same monomial viewed at level 7 are
//! the same value.

use smallvec::SmallVec;
use std::fmt;

/// Exponent vector `(n0, n1, (l_h))` with trailing zeros of `l` trimmed.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiIndex {
    n0: u32,
    n1: u32,
    l: SmallVec<[u32; 4]>,
}

impl MultiIndex {
    pub fn new(n0: u32, n1: u32, l: &[u32]) -> Self {
        let mut l: SmallVec<[u32; 4]> = l.into();
        while l.last() == Some(&0) {
            l.pop();
        }
        MultiIndex { n0, n1, l }
    }

    /// Index of the constant monomial.
    pub fn zero() -> Self {
        Self::default()
    }

    /// The pure `V0^n0` index.
    pub fn v0(n0: u32) -> Self {
        Self::new(n0, 0, &[])
    }

    /// The pure `V1^n1` index.
    pub fn v1(n1: u32) -> Self {
        Self::new(0, n1, &[])
    }

    /// The pure `U_h^e` index.
    pub fn u(h: usize, e: u32) -> Self {
        let mut l = vec![0; h + 1];
        l[h] = e;
        Self::new(0, 0, &l)
    }

    pub fn n0(&self) -> u32 {
        self.n0
    }

    pub fn n1(&self) -> u32 {
        self.n1
    }

    /// Exponent of `U_h` (0 beyond the stored length).
    pub fn l(&self, h: usize) -> u32 {
        self.l.get(h).copied().unwrap_or(0)
    }

    /// Stored (trimmed) length of the `U`-exponent vector.
    pub fn l_len(&self) -> usize {
        self.l.len()
    }

    /// Iterator over `(h, l_h)` pairs with `l_h > 0`.
    pub fn u_support(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.l.iter().copied().enumerate().filter(|&(_, e)| e > 0)
    }

    pub fn l_sum(&self) -> u32 {
        self.l.iter().sum()
    }

    pub fn total_degree(&self) -> u32 {
        self.n0 + self.n1 + self.l_sum()
    }

    /// Smallest level whose variable set contains every `U_h` used here.
    pub fn min_level(&self) -> usize {
        self.l.len().saturating_sub(1)
    }

    /// Componentwise sum.
    pub fn add(&self, other: &Self) -> Self {
        let len = self.l.len().max(other.l.len());
        let mut l = vec![0u32; len];
        for (h, item) in l.iter_mut().enumerate() {
            *item = self.l(h) + other.l(h);
        }
        Self::new(self.n0 + other.n0, self.n1 + other.n1, &l)
    }

    /// Componentwise difference; `None` if any coordinate would go negative.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        if self.n0 < other.n0 || self.n1 < other.n1 {
            return None;
        }
        let len = self.l.len().max(other.l.len());
        let mut l = vec![0u32; len];
        for (h, item) in l.iter_mut().enumerate() {
            let (a, b) = (self.l(h), other.l(h));
            if a < b {
                return None;
            }
            *item = a - b;
        }
        Some(Self::new(self.n0 - other.n0, self.n1 - other.n1, &l))
    }

    /// `self <= other` in every coordinate.
    pub fn le(&self, other: &Self) -> bool {
        other.checked_sub(self).is_some()
    }

    pub fn with_n0(&self, n0: u32) -> Self {
        Self::new(n0, self.n1, &self.l)
    }

    pub fn with_n1(&self, n1: u32) -> Self {
        Self::new(self.n0, n1, &self.l)
    }

    pub fn with_l(&self, h: usize, e: u32) -> Self {
        let mut l: Vec<u32> = self.l.to_vec();
        if l.len() <= h {
            l.resize(h + 1, 0);
        }
        l[h] = e;
        Self::new(self.n0, self.n1, &l)
    }

    /// Product of the coordinate factorials `n0! n1! Π l_h!` as `f64`.
    pub fn factorial(&self) -> f64 {
        let mut acc = factorial_f64(self.n0) * factorial_f64(self.n1);
        for &e in &self.l {
            acc *= factorial_f64(e);
        }
        acc
    }

    /// All componentwise splits `self = a + b`.
    pub fn splits2(&self) -> Vec<(MultiIndex, MultiIndex)> {
        let mut out = Vec::new();
        for_each_sub(self, &mut |a| {
            let b = self.checked_sub(&a).expect("sub-index of self");
            out.push((a, b));
        });
        out
    }

    /// All componentwise splits `self = a + b + c`.
    pub fn splits3(&self) -> Vec<(MultiIndex, MultiIndex, MultiIndex)> {
        let mut out = Vec::new();
        for_each_sub(self, &mut |a| {
            let rest = self.checked_sub(&a).expect("sub-index of self");
            for_each_sub(&rest, &mut |b| {
                let c = rest.checked_sub(&b).expect("sub-index of rest");
                out.push((a.clone(), b, c));
            });
        });
        out
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};{:?})", self.n0, self.n1, self.l.as_slice())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},[", self.n0, self.n1)?;
        for (h, e) in self.l.iter().enumerate() {
            if h > 0 {
                write!(f, " ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "])")
    }
}

/// Visit every index `a` with `a <= idx` componentwise.
fn for_each_sub(idx: &MultiIndex, f: &mut impl FnMut(MultiIndex)) {
    let dims = 2 + idx.l_len();
    let coord = |d: usize| -> u32 {
        match d {
            0 => idx.n0(),
            1 => idx.n1(),
            _ => idx.l(d - 2),
        }
    };
    let mut cur = vec![0u32; dims];
    loop {
        let l: Vec<u32> = cur[2..].to_vec();
        f(MultiIndex::new(cur[0], cur[1], &l));
        let mut d = 0;
        loop {
            if d == dims {
                return;
            }
            if cur[d] < coord(d) {
                cur[d] += 1;
                break;
            }
            cur[d] = 0;
            d += 1;
        }
    }
}

/// `n!` as `f64`; exact through 22!, beyond that correctly rounded.
pub fn factorial_f64(n: u32) -> f64 {
    (1..=n as u64).map(|k| k as f64).product()
}

/// `n!` in exact integer arithmetic (panics past 34!).
pub fn factorial_u128(n: u32) -> u128 {
    (1..=n as u128).product()
}

/// Binomial coefficient in exact integer arithmetic.
pub fn binomial_u128(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Ratio `a! / b!` for `a <= b`, as `f64`.
pub fn factorial_ratio(a: u32, b: u32) -> f64 {
    assert!(a <= b, "factorial_ratio expects a <= b");
    let mut acc = 1.0;
    for k in (a + 1)..=b {
        acc /= k as f64;
    }
    acc
}

/// Exact multinomial weight for a componentwise split of `m` into parts.
///
/// This is the product over coordinates of `m_c! / Π parts_c!`, i.e. the
/// Leibniz weight attached to splitting a mixed derivative of order `m`
/// across the factors of a product. Parts must sum to `m`.
pub fn multinomial_split_weight(m: &MultiIndex, parts: &[&MultiIndex]) -> crate::Result<u128> {
    let mut sum = MultiIndex::zero();
    for p in parts {
        sum = sum.add(p);
    }
    if sum != *m {
        return Err(crate::Error::Invariant(format!(
            "multinomial_split_weight: parts sum to {sum} but m = {m}"
        )));
    }
    let coord_weight = |total: u32, picks: &[u32]| -> u128 {
        let mut acc: u128 = 1;
        let mut rem = total;
        for &p in picks {
            acc *= binomial_u128(rem, p);
            rem -= p;
        }
        acc
    };
    let mut acc: u128 = 1;
    let n0s: Vec<u32> = parts.iter().map(|p| p.n0()).collect();
    acc *= coord_weight(m.n0(), &n0s);
    let n1s: Vec<u32> = parts.iter().map(|p| p.n1()).collect();
    acc *= coord_weight(m.n1(), &n1s);
    for h in 0..m.l_len() {
        let ls: Vec<u32> = parts.iter().map(|p| p.l(h)).collect();
        acc *= coord_weight(m.l(h), &ls);
    }
    Ok(acc)
}

/// All ordered tuples of `parts` nonnegative integers summing to `total`.
pub fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    let mut cur = vec![0u32; parts];
    fn rec(total: u32, pos: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos == cur.len() - 1 {
            cur[pos] = total;
            out.push(cur.clone());
            return;
        }
        for v in 0..=total {
            cur[pos] = v;
            rec(total - v, pos + 1, cur, out);
        }
    }
    rec(total, 0, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trailing_zeros_trimmed() {
        let a = MultiIndex::new(1, 0, &[1, 0, 0]);
        let b = MultiIndex::new(1, 0, &[1]);
        assert_eq!(a, b);
        assert_eq!(a.l_len(), 1);
        assert_eq!(a.l(5), 0);
    }

    #[test]
    fn add_sub_roundtrip() {
        let a = MultiIndex::new(2, 1, &[0, 3]);
        let b = MultiIndex::new(1, 0, &[2, 1, 4]);
        let s = a.add(&b);
        assert_eq!(s.checked_sub(&b), Some(a.clone()));
        assert_eq!(s.checked_sub(&a), Some(b));
        assert_eq!(a.checked_sub(&MultiIndex::new(3, 0, &[])), None);
    }

    #[test]
    fn split_weight_binomial() {
        // split of n0 = 2 into 1 + 1 has weight binom(2, 1) = 2
        let m = MultiIndex::v0(2);
        let p = MultiIndex::v0(1);
        assert_eq!(multinomial_split_weight(&m, &[&p, &p]).unwrap(), 2);
    }

    #[test]
    fn split_weight_trivial() {
        let m = MultiIndex::new(3, 2, &[1, 4]);
        let z = MultiIndex::zero();
        assert_eq!(multinomial_split_weight(&m, &[&m, &z]).unwrap(), 1);
    }

    #[test]
    fn split_weight_mixed() {
        // m = (n0=2, n1=1, l=(2)), parts ((1,0,(1)), (1,1,(1))):
        // binom(2,1) * binom(1,0) * binom(2,1) = 2 * 1 * 2 = 4,
        // equal to the factorial ratio 2!*1!*2! / (1!1! * 0!1! * 1!1!)
        let m = MultiIndex::new(2, 1, &[2]);
        let p1 = MultiIndex::new(1, 0, &[1]);
        let p2 = MultiIndex::new(1, 1, &[1]);
        let w = multinomial_split_weight(&m, &[&p1, &p2]).unwrap();
        assert_eq!(w, 4);
        let ratio = m.factorial() / (p1.factorial() * p2.factorial());
        assert_eq!(w as f64, ratio);
    }

    #[test]
    fn split_weight_rejects_mismatch() {
        let m = MultiIndex::v0(2);
        let p = MultiIndex::v0(2);
        assert!(multinomial_split_weight(&m, &[&p, &p]).is_err());
    }

    #[test]
    fn splits_enumerate_all() {
        let m = MultiIndex::new(1, 1, &[1]);
        assert_eq!(m.splits2().len(), 8); // 2*2*2
        assert_eq!(m.splits3().len(), 27); // 3*3*3
        for (a, b) in m.splits2() {
            assert_eq!(a.add(&b), m);
        }
    }

    #[test]
    fn composition_count() {
        // tuples (j0, j1, j2) with j0+j1+j2 = 2: C(2+2, 2) = 6
        assert_eq!(compositions(2, 3).len(), 6);
        assert_eq!(compositions(0, 1), vec![vec![0]]);
        assert_eq!(compositions(3, 0).len(), 0);
    }

    #[test]
    fn factorial_ratio_small() {
        assert_eq!(factorial_ratio(2, 4), 1.0 / 12.0);
        assert_eq!(factorial_ratio(5, 5), 1.0);
    }
}
