//! Bundled problem instances used by tests, benches and the CLI defaults.

use crate::index::MultiIndex;
use crate::poly::TruncatedPoly;
use crate::problem::{CoefficientFamily, ProblemSpec};
use crate::xflow::{XFamily, XSpec};
use num_complex::Complex64;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn term(n0: u32, n1: u32, l0: u32, v: f64) -> (MultiIndex, Complex64) {
    (MultiIndex::new(n0, n1, &[l0]), c(v))
}

fn poly3(terms: &[(u32, u32, u32, f64)], cap: usize) -> TruncatedPoly {
    TruncatedPoly::from_terms(
        terms.iter().map(|&(n0, n1, l0, v)| term(n0, n1, l0, v)),
        0,
        cap,
    )
    .expect("fixture polynomial")
}

/// The rational-coefficient benchmark instance: shift-family closed form
/// with `f(z) = z`, reaction degree 2, order `S = 10`, single shift `k = 0`.
///
/// The coefficient data is polynomial with total degree at most 4, so with
/// `degree_cap >= 8` the whole coefficient recursion closes without any
/// degree truncation through order 12.
pub fn example1(degree_cap: usize) -> ProblemSpec {
    let x = XSpec {
        family: XFamily::Shift,
        f: vec![c(0.0), c(1.0)],
        a: TruncatedPoly::constant(c(1.0), 0, degree_cap),
        a_p: vec![
            TruncatedPoly::zero(0, degree_cap),
            TruncatedPoly::zero(0, degree_cap),
            TruncatedPoly::constant(c(1.0), 0, degree_cap),
        ],
        d: 2,
        r_prime: 1.0,
    };
    let mut coeffs = CoefficientFamily::new(1.0);
    // d_{1,0} = d_{2,0} = 0, d_{3,0} = 2: minimal admissible S is 10
    coeffs.set(1, 0, 0, poly3(&[(0, 0, 0, 0.4), (1, 0, 0, 0.4)], degree_cap)).unwrap();
    coeffs.set(1, 0, 1, poly3(&[(0, 1, 0, 0.2)], degree_cap)).unwrap();
    coeffs.set(2, 0, 0, poly3(&[(0, 0, 0, 0.3), (0, 1, 0, 0.3)], degree_cap)).unwrap();
    coeffs.set(3, 0, 0, poly3(&[(0, 0, 0, 0.5), (0, 0, 2, 0.5)], degree_cap)).unwrap();
    coeffs.set(3, 0, 1, poly3(&[(0, 0, 0, 0.25)], degree_cap)).unwrap();
    let omega = vec![
        poly3(&[(0, 0, 0, 1.0), (1, 0, 0, 0.5), (0, 2, 0, 0.25)], degree_cap),
        poly3(&[(1, 1, 0, 0.5)], degree_cap),
        poly3(&[(1, 0, 0, 0.25), (0, 1, 0, 0.25)], degree_cap),
        poly3(&[(2, 0, 0, 0.1)], degree_cap),
    ];
    ProblemSpec {
        s_order: 10,
        ks: vec![0],
        coeffs,
        x,
        omega,
        b_exponent: 2.0,
        radius: 0.3,
        degree_cap,
    }
}

/// Base compact for [`example1`]: a square grid well inside `D(0, R)^2` and
/// far from the singular variety `1 = t (t + z)`.
pub fn example1_grid(n: usize) -> Vec<(Complex64, Complex64)> {
    crate::xflow::grid_square(c(0.0), c(0.0), 0.2, n)
}

/// Nested compacts approaching the variety for the growth profile: small
/// squares at `t = 0.9` whose distance to the variety halves with each step.
pub fn example1_profile_grids(count: usize, points_per_axis: usize) -> Vec<Vec<(Complex64, Complex64)>> {
    let z_star = 1.0 / 0.9 - 0.9; // variety crossing at t = 0.9
    (1..=count)
        .map(|i| {
            let delta = 0.4 * 0.5_f64.powi(i as i32);
            crate::xflow::grid_square(
                c(0.9),
                c(z_star + delta),
                0.1 * delta,
                points_per_axis,
            )
        })
        .collect()
}

/// The exponential-family instance: `X = f(e^t z)/(1 - t f(e^t z))` with
/// `f(z) = z`, advection coefficient `a(t, z) = z`, reaction `a_2 = 1`.
///
/// The non-constant `a` makes the `l1 >= 1` derivative terms of the jet
/// transports genuinely nonzero, unlike [`example1`].
pub fn example2(degree_cap: usize) -> ProblemSpec {
    let mut p = example1(degree_cap);
    p.x.family = XFamily::Exponential;
    p.x.a = TruncatedPoly::monomial(MultiIndex::v1(1), c(1.0), 0, degree_cap)
        .expect("fixture polynomial");
    p
}

/// Base compact for [`example2`]: the variety `1 = t e^t z` stays far from
/// this square.
pub fn example2_grid(n: usize) -> Vec<(Complex64, Complex64)> {
    crate::xflow::grid_square(c(0.0), c(0.0), 0.2, n)
}

/// Two-shift instance with complex coefficient data: `S = 13`,
/// shifts `{0, 3}` (the binding admissibility bound comes from `k = 3`),
/// one coefficient and one initial datum carrying imaginary parts.
///
/// Exercises the interplay of different order raises inside one level sum
/// and the complex arithmetic of the whole pipeline.
pub fn multi_shift(degree_cap: usize) -> ProblemSpec {
    let mut p = example1(degree_cap);
    p.s_order = 13;
    p.ks = vec![0, 3];
    let mut coeffs = CoefficientFamily::new(1.0);
    coeffs
        .set(1, 0, 0, poly3(&[(0, 0, 0, 0.3), (1, 0, 0, 0.3)], degree_cap))
        .unwrap();
    coeffs
        .set(3, 0, 0, poly3(&[(0, 0, 0, 0.4), (0, 0, 2, 0.4)], degree_cap))
        .unwrap();
    coeffs
        .set(2, 3, 0, poly3(&[(0, 0, 0, 0.25), (0, 1, 0, 0.25)], degree_cap))
        .unwrap();
    // complex entry: 0.2 i u0
    let mut b33 = TruncatedPoly::zero(0, degree_cap);
    b33.add_term(MultiIndex::new(0, 0, &[1]), Complex64::new(0.0, 0.2));
    coeffs.set(3, 3, 0, b33).unwrap();
    coeffs
        .set(3, 3, 1, poly3(&[(0, 0, 0, 0.15)], degree_cap))
        .unwrap();
    p.coeffs = coeffs;
    // complex initial datum at j = 1
    let mut omega1 = TruncatedPoly::zero(0, degree_cap);
    omega1.add_term(MultiIndex::new(1, 0, &[]), Complex64::new(0.5, 0.25));
    p.omega = vec![
        poly3(&[(0, 0, 0, 1.0), (0, 2, 0, 0.25)], degree_cap),
        omega1,
        poly3(&[(1, 1, 0, 0.2)], degree_cap),
        poly3(&[(2, 0, 0, 0.1)], degree_cap),
    ];
    p
}

/// Same closed form as [`example1`] but with every `b_{m,k}` zero and
/// two nonzero initial data entries: the solution is the polynomial
/// `omega_0 + omega_1 w` and every residual vanishes identically.
pub fn zero_problem(degree_cap: usize) -> ProblemSpec {
    let mut p = example1(degree_cap);
    p.coeffs = CoefficientFamily::new(1.0);
    p.omega = vec![
        poly3(&[(0, 0, 0, 1.0), (1, 0, 0, 1.0)], degree_cap),
        poly3(&[(0, 1, 0, 1.0)], degree_cap),
    ];
    p
}
