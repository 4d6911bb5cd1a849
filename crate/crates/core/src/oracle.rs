//! Independent brute-force solver: the equation read as a straight power
//! series in `w` with bivariate Taylor coefficients around a base point.
//!
//! This module deliberately avoids the level-recursion machinery: it carries
//! its own two-variable jet arithmetic, expands the closed form `X` directly
//! from its defining expression, and extracts each `w`-coefficient of the
//! solution from the equation itself. Cross-validating the assembled
//! solution against this route checks the whole composed pipeline end to
//! end. The only shared ingredients are the problem data and scalar
//! arithmetic.

use crate::error::{Error, Result};
use crate::poly::TruncatedPoly;
use crate::problem::ProblemSpec;
use crate::recursion::PhiFamily;
use crate::xflow::XFamily;
use num_complex::Complex64;

/// Dense bivariate Taylor jet around a base point, truncated at total
/// degree `deg`. `valid` tracks how many leading degrees are still exact
/// after derivative losses.
#[derive(Clone, Debug)]
pub struct BivJet {
    deg: usize,
    valid: isize,
    c: Vec<Complex64>,
}

fn tri_len(deg: usize) -> usize {
    (deg + 1) * (deg + 2) / 2
}

fn tri_idx(i: usize, j: usize) -> usize {
    let g = i + j;
    g * (g + 1) / 2 + i
}

impl BivJet {
    pub fn zero(deg: usize) -> Self {
        BivJet {
            deg,
            valid: deg as isize,
            c: vec![Complex64::ZERO; tri_len(deg)],
        }
    }

    pub fn constant(v: Complex64, deg: usize) -> Self {
        let mut j = Self::zero(deg);
        j.c[0] = v;
        j
    }

    /// `base + Δt`.
    pub fn var_dt(base: Complex64, deg: usize) -> Self {
        let mut j = Self::constant(base, deg);
        if deg >= 1 {
            j.c[tri_idx(1, 0)] = Complex64::ONE;
        }
        j
    }

    /// `base + Δz`.
    pub fn var_dz(base: Complex64, deg: usize) -> Self {
        let mut j = Self::constant(base, deg);
        if deg >= 1 {
            j.c[tri_idx(0, 1)] = Complex64::ONE;
        }
        j
    }

    pub fn valid_degree(&self) -> isize {
        self.valid
    }

    pub fn coeff(&self, i: usize, j: usize) -> Complex64 {
        if i + j > self.deg {
            Complex64::ZERO
        } else {
            self.c[tri_idx(i, j)]
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.c.iter_mut().zip(&o.c) {
            *a += b;
        }
        out.valid = self.valid.min(o.valid);
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for a in out.c.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.deg);
        for g1 in 0..=self.deg {
            for i1 in 0..=g1 {
                let a = self.c[tri_idx(i1, g1 - i1)];
                if a == Complex64::ZERO {
                    continue;
                }
                for g2 in 0..=(self.deg - g1) {
                    for i2 in 0..=g2 {
                        let b = o.c[tri_idx(i2, g2 - i2)];
                        if b == Complex64::ZERO {
                            continue;
                        }
                        out.c[tri_idx(i1 + i2, g1 + g2 - i1 - i2)] += a * b;
                    }
                }
            }
        }
        out.valid = self.valid.min(o.valid);
        out
    }

    /// Series reciprocal by degree induction; the constant term must stay
    /// away from the singular threshold.
    pub fn recip(&self, t: Complex64, z: Complex64) -> Result<Self> {
        let c0 = self.c[0];
        if c0.norm() < crate::xflow::SINGULAR_TOL {
            return Err(Error::SingularPoint {
                t,
                z,
                denom_abs: c0.norm(),
            });
        }
        let inv0 = 1.0 / c0;
        let mut out = Self::zero(self.deg);
        out.c[0] = inv0;
        for g in 1..=self.deg {
            for i in 0..=g {
                let j = g - i;
                // Σ_{(a,b) <= (i,j), (a,b) != 0} f_{a,b} X_{i-a, j-b} = -f_0 X_{i,j}
                let mut acc = Complex64::ZERO;
                for a in 0..=i {
                    for b in 0..=j {
                        if a == 0 && b == 0 {
                            continue;
                        }
                        acc += self.c[tri_idx(a, b)] * out.c[tri_idx(i - a, j - b)];
                    }
                }
                out.c[tri_idx(i, j)] = -acc * inv0;
            }
        }
        out.valid = self.valid;
        Ok(out)
    }

    /// `∂_t` as a jet around the same base (coefficient shift).
    pub fn diff_dt(&self) -> Self {
        let mut out = Self::zero(self.deg);
        for g in 0..self.deg {
            for i in 0..=g {
                out.c[tri_idx(i, g - i)] = self.c[tri_idx(i + 1, g - i)] * (i + 1) as f64;
            }
        }
        out.valid = self.valid - 1;
        out
    }

    pub fn diff_dz(&self) -> Self {
        let mut out = Self::zero(self.deg);
        for g in 0..self.deg {
            for i in 0..=g {
                let j = g - i;
                out.c[tri_idx(i, j)] = self.c[tri_idx(i, j + 1)] * (j + 1) as f64;
            }
        }
        out.valid = self.valid - 1;
        out
    }

    pub fn eval(&self, dt: Complex64, dz: Complex64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for g in (0..=self.deg).rev() {
            let mut row = Complex64::ZERO;
            // Horner in dt within the fixed total degree, factored by dz
            for i in (0..=g).rev() {
                row = row * dt + self.c[tri_idx(i, g - i)] * dz.powi((g - i) as i32);
            }
            acc += row;
        }
        acc
    }
}

/// Horner composition of a univariate polynomial with a jet argument.
fn compose_uni(poly: &[Complex64], arg: &BivJet) -> BivJet {
    let mut acc = BivJet::zero(arg.deg);
    for &coeff in poly.iter().rev() {
        acc = acc.mul(arg);
        acc.c[0] += coeff;
    }
    acc.valid = arg.valid;
    acc
}

/// Jet of `e^{Δt}`.
fn exp_dt(deg: usize) -> BivJet {
    let mut out = BivJet::zero(deg);
    let mut inv_fact = 1.0;
    for i in 0..=deg {
        if i > 0 {
            inv_fact /= i as f64;
        }
        out.c[tri_idx(i, 0)] = Complex64::new(inv_fact, 0.0);
    }
    out
}

/// Jet of the closed form `X` around `(t, z)`, straight from its defining
/// expression.
fn x_jet(problem: &ProblemSpec, t: Complex64, z: Complex64, deg: usize) -> Result<BivJet> {
    let tj = BivJet::var_dt(t, deg);
    let arg = match &problem.x.family {
        XFamily::Shift => tj.add(&BivJet::var_dz(z, deg)),
        XFamily::Exponential => {
            let scale = exp_dt(deg).scale(t.exp());
            scale.mul(&BivJet::var_dz(z, deg))
        }
        XFamily::Custom(_) => {
            return Err(Error::Config(
                "the direct solver supports the built-in closed forms only".into(),
            ))
        }
    };
    let fj = compose_uni(&problem.x.f, &arg);
    let den = BivJet::constant(Complex64::ONE, deg).add(&tj.mul(&fj).scale(-Complex64::ONE));
    Ok(fj.mul(&den.recip(t, z)?))
}

/// Jet of a 3-variable coefficient polynomial with `u0` substituted by the
/// `X` jet.
fn poly3_jet(p: &TruncatedPoly, t: Complex64, z: Complex64, x: &BivJet, deg: usize) -> BivJet {
    let tj = BivJet::var_dt(t, deg);
    let zj = BivJet::var_dz(z, deg);
    // power tables up to the polynomial's degrees
    let table = |base: &BivJet, max: u32| -> Vec<BivJet> {
        let mut v = Vec::with_capacity(max as usize + 1);
        v.push(BivJet::constant(Complex64::ONE, deg));
        for e in 1..=max as usize {
            let prev = v[e - 1].clone();
            v.push(prev.mul(base));
        }
        v
    };
    let mut max_t = 0;
    let mut max_z = 0;
    let mut max_u = 0;
    for (idx, _) in p.terms() {
        max_t = max_t.max(idx.n0());
        max_z = max_z.max(idx.n1());
        max_u = max_u.max(idx.l(0));
    }
    let tp = table(&tj, max_t);
    let zp = table(&zj, max_z);
    let xp = table(x, max_u);
    let mut acc = BivJet::zero(deg);
    for (idx, coeff) in p.terms() {
        let term = tp[idx.n0() as usize]
            .mul(&zp[idx.n1() as usize])
            .mul(&xp[idx.l(0) as usize])
            .scale(*coeff);
        acc = acc.add(&term);
    }
    acc
}

/// The direct power-series solution around a base point: `y[β]` is the jet
/// of `∂_w^β Y(·, ·, 0)`.
#[derive(Clone, Debug)]
pub struct DirectSeries {
    pub base_t: Complex64,
    pub base_z: Complex64,
    pub s_order: usize,
    pub y: Vec<BivJet>,
    /// Worst remaining valid degree across the stored jets.
    pub min_valid: isize,
}

/// Solve the equation order by order in `w` at the base point.
///
/// `Y_{β+S}` is the `β`-th `w`-coefficient of the right-hand side, computed
/// in truncated bivariate jet arithmetic; each `t`- or `z`-derivative costs
/// one valid degree, which is tracked and reported.
pub fn direct_solve(
    problem: &ProblemSpec,
    base_t: Complex64,
    base_z: Complex64,
    a_order: usize,
    d_tz: usize,
) -> Result<DirectSeries> {
    let s = problem.s_order;
    let x = x_jet(problem, base_t, base_z, d_tz)?;
    // coefficient jets per (m, k, alpha)
    let mut coeff_jets: std::collections::BTreeMap<(usize, usize, usize), BivJet> =
        std::collections::BTreeMap::new();
    for (&(m, k), list) in problem.coeffs.iter() {
        for (alpha, poly) in list.iter().enumerate() {
            if poly.is_zero() {
                continue;
            }
            coeff_jets.insert((m, k, alpha), poly3_jet(poly, base_t, base_z, &x, d_tz));
        }
    }
    let mut y: Vec<BivJet> = Vec::with_capacity(a_order + s + 1);
    for j in 0..s {
        let omega = problem.omega_j(j);
        let mut jet = BivJet::zero(d_tz);
        let tj = BivJet::var_dt(base_t, d_tz);
        let zj = BivJet::var_dz(base_z, d_tz);
        for (idx, coeff) in omega.terms() {
            let mut term = BivJet::constant(*coeff, d_tz);
            for _ in 0..idx.n0() {
                term = term.mul(&tj);
            }
            for _ in 0..idx.n1() {
                term = term.mul(&zj);
            }
            jet = jet.add(&term);
        }
        y.push(jet);
    }
    let mut min_valid = d_tz as isize;
    for beta in 0..=a_order {
        let mut acc = BivJet::zero(d_tz);
        for &k in &problem.ks {
            for alpha1 in 0..=beta {
                let alpha2 = beta - alpha1;
                let binom = crate::index::binomial_u128(beta as u32, alpha1 as u32) as f64;
                let source = &y[alpha2 + k];
                for m in 1..=3usize {
                    let Some(cjet) = coeff_jets.get(&(m, k, alpha1)) else {
                        continue;
                    };
                    let block = match m {
                        1 => source.diff_dt(),
                        2 => source.diff_dz(),
                        _ => source.clone(),
                    };
                    acc = acc.add(&cjet.mul(&block).scale(Complex64::new(binom, 0.0)));
                }
            }
        }
        if acc.valid < 0 {
            return Err(Error::BudgetExhausted {
                requested: a_order,
                achievable: beta.saturating_sub(1),
            });
        }
        min_valid = min_valid.min(acc.valid);
        y.push(acc);
    }
    Ok(DirectSeries {
        base_t,
        base_z,
        s_order: s,
        y,
        min_valid,
    })
}

impl DirectSeries {
    /// `w^β` coefficient of the solution at an offset from the base point.
    pub fn w_coeff(&self, beta: usize, dt: Complex64, dz: Complex64) -> Complex64 {
        self.y[beta].eval(dt, dz) / crate::index::factorial_f64(beta as u32)
    }
}

/// Per-order agreement between the two solvers.
#[derive(Clone, Debug)]
pub struct CompareRow {
    pub order: usize,
    /// Deviation normalized by `max(1, |reference|)`.
    pub max_rel_dev: f64,
    /// Deviation normalized by `|reference|` alone (skipping structural
    /// zeros): sensitive to errors in the intrinsically tiny high-order
    /// coefficients that the scale-normalized metric cannot see.
    pub max_strict_dev: f64,
}

#[derive(Clone, Debug)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    pub max_rel_dev: f64,
    pub max_strict_dev: f64,
}

/// Compare the assembled `w`-coefficients against the direct series at
/// sampled offsets around the base point.
pub fn compare(
    direct: &DirectSeries,
    problem: &ProblemSpec,
    phi: &PhiFamily,
    offsets: &[(Complex64, Complex64)],
    order_max: usize,
) -> Result<CompareReport> {
    let mut rows = Vec::with_capacity(order_max + 1);
    let mut per_order = vec![(0.0f64, 0.0f64); order_max + 1];
    for &(dt, dz) in offsets {
        let t = direct.base_t + dt;
        let z = direct.base_z + dz;
        let ps = crate::assembly::point_series(problem, phi, t, z)?;
        for (beta, slot) in per_order.iter_mut().enumerate() {
            let assembled = ps.coeffs[beta];
            let reference = direct.w_coeff(beta, dt, dz);
            let abs_dev = (assembled - reference).norm();
            slot.0 = slot.0.max(abs_dev / reference.norm().max(1.0));
            if reference.norm() > 1e-200 {
                slot.1 = slot.1.max(abs_dev / reference.norm());
            } else {
                // structural zero in the reference: any assembled mass is a
                // hard disagreement
                slot.1 = slot.1.max(if abs_dev > 1e-200 { f64::INFINITY } else { 0.0 });
            }
        }
    }
    let mut overall = 0.0f64;
    let mut strict = 0.0f64;
    for (order, &(dev, strict_dev)) in per_order.iter().enumerate() {
        overall = overall.max(dev);
        strict = strict.max(strict_dev);
        rows.push(CompareRow {
            order,
            max_rel_dev: dev,
            max_strict_dev: strict_dev,
        });
    }
    Ok(CompareReport {
        rows,
        max_rel_dev: overall,
        max_strict_dev: strict,
    })
}

/// Base point selection: the grid point farthest from the variety.
pub fn farthest_base(
    problem: &ProblemSpec,
    grid: &[(Complex64, Complex64)],
) -> Result<(Complex64, Complex64)> {
    grid.iter()
        .map(|&(t, z)| (t, z, problem.x.theta_proximity(t, z)))
        .max_by(|a, b| a.2.partial_cmp(&b.2).expect("finite proximity"))
        .map(|(t, z, _)| (t, z))
        .ok_or_else(|| Error::Config("empty base grid".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::recursion::compute_phi;
    use crate::xflow::calibrate;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn jet_mul_and_eval() {
        // (t0 + dt)(z0 + dz) evaluated at an offset
        let t = BivJet::var_dt(c(2.0), 4);
        let z = BivJet::var_dz(c(3.0), 4);
        let p = t.mul(&z);
        let v = p.eval(c(0.1), c(-0.2));
        assert!((v - c(2.1) * c(2.8)).norm() < 1e-14);
    }

    #[test]
    fn jet_recip_geometric() {
        // 1/(1 - dt): coefficients 1 along the dt row
        let one = BivJet::constant(Complex64::ONE, 5);
        let den = one.add(&BivJet::var_dt(Complex64::ZERO, 5).scale(-Complex64::ONE));
        let r = den.recip(Complex64::ZERO, Complex64::ZERO).unwrap();
        for i in 0..=5 {
            assert!((r.coeff(i, 0) - Complex64::ONE).norm() < 1e-14);
        }
        assert!((r.coeff(1, 1)).norm() < 1e-14);
    }

    #[test]
    fn x_jet_matches_closed_form() {
        let p = fixtures::example1(10);
        let (t0, z0) = (c(0.1), c(0.2));
        let xj = x_jet(&p, t0, z0, 10).unwrap();
        for (dt, dz) in [(0.0, 0.0), (0.03, -0.02), (-0.04, 0.05)] {
            let (dt, dz) = (c(dt), c(dz));
            let truth = p.x.eval_x(t0 + dt, z0 + dz).unwrap();
            let jet_val = xj.eval(dt, dz);
            assert!(
                (jet_val - truth).norm() < 1e-9 * truth.norm().max(1.0),
                "at ({dt}, {dz})"
            );
        }
    }

    #[test]
    fn zero_coefficients_keep_data_only() {
        let p = fixtures::zero_problem(8);
        let d = direct_solve(&p, c(0.05), c(0.05), 6, 12).unwrap();
        for beta in p.s_order..d.y.len() {
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(d.y[beta].coeff(i, j), Complex64::ZERO);
                }
            }
        }
    }

    #[test]
    fn constant_chain_unrolls_by_hand() {
        // S = 10, only b_{3,0,0} = 1, omega_0 = 1: Y_10 = Y_0 = 1, Y_20 = 1
        let mut p = fixtures::example1(8);
        p.coeffs = crate::problem::CoefficientFamily::new(1.0);
        p.coeffs
            .set(3, 0, 0, crate::problem::const_poly(1.0, 8))
            .unwrap();
        p.omega = vec![crate::problem::const_poly(1.0, 8)];
        let d = direct_solve(&p, c(0.0), c(0.0), 10, 8).unwrap();
        assert!((d.y[10].coeff(0, 0) - Complex64::ONE).norm() < 1e-12);
        assert!((d.y[20].coeff(0, 0) - Complex64::ONE).norm() < 1e-12);
        assert_eq!(d.y[5].coeff(0, 0), Complex64::ZERO);
    }

    #[test]
    fn first_step_matches_forcing_structure() {
        // Y_S as produced by one recursion step equals the level-0 forcing
        // evaluated at (t, z, X)
        let p = fixtures::example1(8);
        let (t0, z0) = (c(0.08), c(-0.06));
        let d = direct_solve(&p, t0, z0, 2, 10).unwrap();
        let forcing0 = crate::recursion::data_forcing(0, &p).unwrap();
        let x0 = p.x.eval_x(t0, z0).unwrap();
        let expected = forcing0.eval(&[t0, z0, x0]).unwrap();
        let got = d.y[p.s_order].coeff(0, 0);
        assert!((got - expected).norm() <= 1e-12 * expected.norm().max(1.0));
    }

    #[test]
    fn budget_error_reports_achievable_order() {
        let p = fixtures::example1(8);
        // with d_tz = 1 the very first derivative spends the budget; the
        // solver reaches the first recursion step and no further because
        // orders 10 and 11 reuse data jets, failing at the next band
        match direct_solve(&p, c(0.0), c(0.0), 12, 1) {
            Err(Error::BudgetExhausted { achievable, .. }) => {
                assert!(achievable < 12);
            }
            Ok(d) => panic!("expected budget exhaustion, got valid {}", d.min_valid),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn oracle_agrees_with_assembled_solution() {
        for (p, grid) in [
            (fixtures::example1(8), fixtures::example1_grid(4)),
            (fixtures::example2(8), fixtures::example2_grid(4)),
        ] {
            let a_order = 12;
            let region = calibrate(&p.x, &grid, p.radius, 2.0, a_order + 1).unwrap();
            let phi = compute_phi(&p, region.nu, a_order).unwrap();
            let (bt, bz) = farthest_base(&p, &grid).unwrap();
            let d = direct_solve(&p, bt, bz, a_order, a_order + p.s_order + 4).unwrap();
            assert!(d.min_valid >= 0);
            let offsets: Vec<(Complex64, Complex64)> = vec![
                (c(0.0), c(0.0)),
                (c(0.02), c(0.01)),
                (c(-0.015), c(0.025)),
                (Complex64::new(0.01, 0.01), Complex64::new(-0.01, 0.015)),
            ];
            let report = compare(&d, &p, &phi, &offsets, a_order).unwrap();
            assert!(
                report.max_rel_dev < 1e-9 && report.max_strict_dev < 1e-9,
                "deviations {} / {} (strict) for family {:?}",
                report.max_rel_dev,
                report.max_strict_dev,
                p.x.family
            );
        }
    }
}
