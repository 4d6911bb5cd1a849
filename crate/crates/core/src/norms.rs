//! Weighted norms on truncated series and the classical bounds used by the
//! operator estimates.
//!
//! A level-α polynomial is measured through its divided-power coefficients
//! with exponential damping in `rho`, geometric radius weights, and a
//! factorial division that couples the space order to the level:
//!
//! ```text
//! ||P||_α = Σ |ψ_m| / exp(σ r_b(α) ρ) · V̄0^n0 V̄1^n1 Π Ū_h^l_h / (n0+n1+Σl+α)!
//! ```
//!
//! A full series adds a geometric `W̄^α` sum over levels. All norms here are
//! computed on truncations, where convergence is automatic.

use crate::error::{Error, Result};
use crate::index::factorial_f64;
use crate::poly::TruncatedPoly;
use crate::series::JetSeries;

/// Norm parameters. `delta` is the circle enlargement used by the derivative
/// bounds; it must exceed `delta_bar`, and the base radii must stay below it.
#[derive(Clone, Copy, Debug)]
pub struct NormConfig {
    pub rho: f64,
    pub sigma: f64,
    pub b: f64,
    pub delta_bar: f64,
    pub v0_bar: f64,
    pub v1_bar: f64,
    pub w_bar: f64,
    pub delta: f64,
}

impl NormConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rho <= 1.0 {
            return Err(Error::Config(format!("rho = {} but rho > 1 is required", self.rho)));
        }
        if self.b <= 1.0 {
            return Err(Error::Config(format!("b = {} but b > 1 is required", self.b)));
        }
        if self.sigma <= 0.0 || self.delta_bar <= 0.0 || self.w_bar <= 0.0 {
            return Err(Error::Config("sigma, delta_bar, w_bar must be positive".into()));
        }
        if self.delta <= self.delta_bar {
            return Err(Error::Config(format!(
                "delta = {} must exceed delta_bar = {}",
                self.delta, self.delta_bar
            )));
        }
        // u_bar(0) = delta_bar, so delta > delta_bar covers the U0 radius
        if self.v0_bar >= self.delta || self.v1_bar >= self.delta {
            return Err(Error::Config(format!(
                "base radii v0_bar = {}, v1_bar = {} must stay below delta = {}",
                self.v0_bar, self.v1_bar, self.delta
            )));
        }
        if self.v0_bar <= 0.0 || self.v1_bar <= 0.0 {
            return Err(Error::Config("v0_bar, v1_bar must be positive".into()));
        }
        Ok(())
    }

    /// Radius weight of `U_h`.
    pub fn u_bar(&self, h: usize) -> f64 {
        u_bar(h, self.delta_bar, self.b)
    }
}

/// Partial zeta sum `r_b(α) = Σ_{n=0..α} 1/(n+1)^b`, increasing in α and
/// bounded by `ζ(b)`.
pub fn r_b(alpha: usize, b: f64) -> f64 {
    (0..=alpha).map(|n| ((n + 1) as f64).powf(-b)).sum()
}

/// `ζ(b)` by direct summation with a tail integral estimate.
pub fn zeta(b: f64) -> f64 {
    let n = 100_000usize;
    let head: f64 = (1..=n).map(|k| (k as f64).powf(-b)).sum();
    // ∫_n^∞ x^-b dx = n^(1-b) / (b-1)
    head + (n as f64).powf(1.0 - b) / (b - 1.0)
}

/// Radius sequence `Ū_h = δ̄ / (h^b + 1)`, decreasing, with `Ū_0 = δ̄`.
pub fn u_bar(h: usize, delta_bar: f64, b: f64) -> f64 {
    delta_bar / ((h as f64).powf(b) + 1.0)
}

/// Level-α norm of a polynomial measured in the level-`alpha_norm` space.
///
/// The polynomial may live at a lower level than `alpha_norm`; its absent
/// variables simply contribute no weight (the padded view has the same
/// divided coefficients).
pub fn e_norm_at(p: &TruncatedPoly, alpha_norm: usize, cfg: &NormConfig) -> f64 {
    let damping = (cfg.sigma * r_b(alpha_norm, cfg.b) * cfg.rho).exp();
    let mut acc = 0.0;
    for (idx, coeff) in p.terms() {
        let divided = coeff.norm() * idx.factorial();
        let mut weight = cfg.v0_bar.powi(idx.n0() as i32) * cfg.v1_bar.powi(idx.n1() as i32);
        for (h, e) in idx.u_support() {
            weight *= cfg.u_bar(h).powi(e as i32);
        }
        let order = idx.total_degree() + alpha_norm as u32;
        acc += divided * weight / factorial_f64(order);
    }
    acc / damping
}

/// Level norm at the polynomial's own level.
pub fn e_norm(p: &TruncatedPoly, cfg: &NormConfig) -> f64 {
    e_norm_at(p, p.level(), cfg)
}

/// Series norm `Σ_α ||P_α||_α W̄^α` where `P_α` is the divided level.
pub fn g_norm(s: &JetSeries, cfg: &NormConfig) -> f64 {
    let mut acc = 0.0;
    for alpha in 0..=s.a_order() {
        let scaled = s.level(alpha);
        if scaled.is_zero() {
            continue;
        }
        // divided level = α! * stored level; use norm homogeneity
        acc += factorial_f64(alpha as u32) * e_norm_at(scaled, alpha, cfg) * cfg.w_bar.powi(alpha as i32);
    }
    acc
}

/// A series together with its per-level norms and total under a fixed
/// configuration.
#[derive(Clone, Debug)]
pub struct NormedSeries {
    pub series: JetSeries,
    pub level_norms: Vec<f64>,
    pub total: f64,
}

impl NormedSeries {
    pub fn new(series: JetSeries, cfg: &NormConfig) -> Self {
        let level_norms: Vec<f64> = (0..=series.a_order())
            .map(|alpha| {
                factorial_f64(alpha as u32) * e_norm_at(series.level(alpha), alpha, cfg)
            })
            .collect();
        let total = level_norms
            .iter()
            .enumerate()
            .map(|(alpha, n)| n * cfg.w_bar.powi(alpha as i32))
            .sum();
        NormedSeries {
            series,
            level_norms,
            total,
        }
    }
}

/// Coefficient-absolute-value series of a level polynomial evaluated at the
/// norm radii: `Σ |b_m| V̄0^n0 V̄1^n1 Π Ū_h^l_h / m! · m! = Σ |c_m| ...` in
/// monomial form.
pub fn abs_majorant(p: &TruncatedPoly, cfg: &NormConfig) -> f64 {
    p.abs_eval(cfg.v0_bar, cfg.v1_bar, |h| cfg.u_bar(h))
}

/// Absolute majorant of a `W`-series of 3-variable coefficients evaluated at
/// `(V̄0, V̄1, Ū_0, W̄)`.
pub fn abs_majorant_series(s: &JetSeries, cfg: &NormConfig) -> f64 {
    let mut acc = 0.0;
    for alpha in 0..=s.a_order() {
        acc += abs_majorant(s.level(alpha), cfg) * cfg.w_bar.powi(alpha as i32);
    }
    acc
}

/// Lower bound witness for the infinite product `Π_h (1 - Ū_h / δ)`.
#[derive(Clone, Copy, Debug)]
pub struct KappaBound {
    /// Minimum over `α <= alpha_max` of the partial products.
    pub min_over_range: f64,
    /// Partial product carried far enough to estimate the limit.
    pub limit_estimate: f64,
}

/// Evaluate the partial products `Π_{h=0..α} (1 - Ū_h / δ)`; fails when a
/// factor is not positive (`delta` too small).
pub fn kappa_lower_bound(cfg: &NormConfig, alpha_max: usize) -> Result<KappaBound> {
    let mut product = 1.0;
    let mut min_over_range = f64::INFINITY;
    for h in 0..=alpha_max {
        let factor = 1.0 - cfg.u_bar(h) / cfg.delta;
        if factor <= 0.0 {
            return Err(Error::Config(format!(
                "kappa factor 1 - U_{h}/delta = {factor:.3e} is not positive"
            )));
        }
        product *= factor;
        min_over_range = min_over_range.min(product);
    }
    let mut limit = product;
    for h in (alpha_max + 1)..=100_000 {
        limit *= 1.0 - cfg.u_bar(h) / cfg.delta;
    }
    Ok(KappaBound {
        min_over_range,
        limit_estimate: limit,
    })
}

/// The classical bound `sup_{x>=0} (x+δ)^m1 e^{-m2 x} <= (m1/m2)^m1 e^{-m1} e^{δ m2}`.
pub fn xexp_bound(delta: f64, m1: f64, m2: f64) -> f64 {
    (m1 / m2).powf(m1) * (-m1).exp() * (delta * m2).exp()
}

/// Norm parameters as configured in a problem file; `rho` is supplied by
/// calibration at run time.
#[derive(Clone, Copy, Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormParams {
    pub sigma: f64,
    pub b: f64,
    pub delta_bar: f64,
    pub delta: f64,
    pub v0_bar: f64,
    pub v1_bar: f64,
    pub w_bar: f64,
}

impl NormParams {
    pub fn with_rho(&self, rho: f64) -> NormConfig {
        NormConfig {
            rho,
            sigma: self.sigma,
            b: self.b,
            delta_bar: self.delta_bar,
            v0_bar: self.v0_bar,
            v1_bar: self.v1_bar,
            w_bar: self.w_bar,
            delta: self.delta,
        }
    }
}

// ---------------------------------------------------------------------------
// randomized and exhaustive property checks

/// One verified norm property.
#[derive(Clone, Debug)]
pub struct PropertyOutcome {
    pub name: String,
    pub cases: usize,
    /// Worst `lhs / rhs` ratio observed (<= 1 within tolerance when passing).
    pub worst: f64,
    pub pass: bool,
}

const PROP_TOL: f64 = 1e-12;

fn random_level_poly(
    rng: &mut rand_chacha::ChaCha8Rng,
    level: usize,
    cap: usize,
    u0_only: bool,
) -> TruncatedPoly {
    use rand::Rng;
    let mut p = TruncatedPoly::zero(level, cap);
    for _ in 0..rng.gen_range(2..7) {
        let mut l = vec![0u32; level + 1];
        if u0_only {
            l[0] = rng.gen_range(0..3);
        } else {
            for _ in 0..rng.gen_range(0..3) {
                let h = rng.gen_range(0..=level);
                l[h] += rng.gen_range(0..2);
            }
        }
        let idx = crate::index::MultiIndex::new(rng.gen_range(0..3), rng.gen_range(0..3), &l);
        p.add_term(
            idx,
            num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        );
    }
    p
}

/// Sub-multiplicativity of the level norm against the absolute majorant:
/// `||b Ψ||_α <= |b|(radii) ||Ψ||_α` on random 3-variable `b` and level-α
/// `Ψ`, products exact (no truncation).
pub fn check_product_bound(cfg: &NormConfig, trials: usize, seed: u64) -> PropertyOutcome {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let cap = 24;
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let level = (trial % 4) + 1;
        let b = random_level_poly(&mut rng, 0, cap, true);
        let psi = random_level_poly(&mut rng, level, cap, false);
        let product = b.mul(&psi).expect("shared cap");
        let lhs = e_norm_at(&product, level, cfg);
        let rhs = abs_majorant(&b, cfg) * e_norm_at(&psi, level, cfg);
        if rhs > 0.0 {
            worst = worst.max(lhs / rhs);
        } else {
            worst = worst.max(if lhs > 0.0 { f64::INFINITY } else { 0.0 });
        }
    }
    PropertyOutcome {
        name: "level-product-bound".into(),
        cases: trials,
        worst,
        pass: worst <= 1.0 + PROP_TOL,
    }
}

/// The three level-shift estimates: measuring a level-α' polynomial (or its
/// `U_j` / base-variable derivative) in a higher level-α norm gains the
/// exponential damping and falling-factorial factors.
pub fn check_shift_bounds(cfg: &NormConfig, trials: usize, seed: u64) -> Vec<PropertyOutcome> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 3];
    for _ in 0..trials {
        let level_lo = rng.gen_range(0..3usize);
        let alpha = level_lo + rng.gen_range(2..5usize);
        let psi = random_level_poly(&mut rng, level_lo, 24, false);
        let base = e_norm_at(&psi, level_lo, cfg);
        if base == 0.0 {
            continue;
        }
        let gap = (alpha - level_lo) as f64;
        let damping = (-cfg.sigma * cfg.rho * gap / ((alpha + 1) as f64).powf(cfg.b)).exp();
        let falling_short: f64 = (1..(alpha - level_lo)).map(|l| (alpha - l + 1) as f64).product();
        let falling_full: f64 = (1..=(alpha - level_lo)).map(|l| (alpha - l + 1) as f64).product();
        // U_j derivative
        let j = rng.gen_range(0..=level_lo);
        let du = psi.diff(crate::poly::Var::U(j)).expect("level in range");
        let lhs_u = e_norm_at(&du, alpha, cfg);
        worst[0] = worst[0].max(lhs_u / (damping / (cfg.u_bar(j) * falling_short) * base));
        // base-variable derivative
        let (var, vbar) = if rng.gen_bool(0.5) {
            (crate::poly::Var::V0, cfg.v0_bar)
        } else {
            (crate::poly::Var::V1, cfg.v1_bar)
        };
        let dv = psi.diff(var).expect("base variable");
        let lhs_v = e_norm_at(&dv, alpha, cfg);
        worst[1] = worst[1].max(lhs_v / (damping / (vbar * falling_short) * base));
        // plain re-measurement
        let lhs_p = e_norm_at(&psi, alpha, cfg);
        worst[2] = worst[2].max(lhs_p / (damping / falling_full * base));
    }
    ["shift-u-derivative", "shift-base-derivative", "shift-plain"]
        .into_iter()
        .zip(worst)
        .map(|(name, w)| PropertyOutcome {
            name: name.into(),
            cases: trials,
            worst: w,
            pass: w <= 1.0 + PROP_TOL,
        })
        .collect()
}

/// Series-level sub-multiplicativity: `||b Ψ||_G <= |b|(V̄0,V̄1,Ū0,W̄) ||Ψ||_G`
/// for a `W`-polynomial 3-variable `b` and a random series `Ψ`.
pub fn check_series_product_bound(cfg: &NormConfig, trials: usize, seed: u64) -> PropertyOutcome {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let cap = 24;
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let a_order = rng.gen_range(2..5usize);
        let mut b_levels = Vec::with_capacity(a_order + 1);
        let mut s_levels = Vec::with_capacity(a_order + 1);
        for alpha in 0..=a_order {
            let b_alpha = if alpha <= 1 {
                random_level_poly(&mut rng, 0, cap, true)
            } else {
                TruncatedPoly::zero(0, cap)
            };
            b_levels.push(b_alpha.embed(alpha).expect("level up"));
            s_levels.push(random_level_poly(&mut rng, alpha, cap, false));
        }
        let b = JetSeries::from_w_power_levels(b_levels, cap).expect("series");
        let s = JetSeries::from_w_power_levels(s_levels, cap).expect("series");
        let product = b.convolve(&s).expect("shared cap");
        let lhs = g_norm(&product, cfg);
        let rhs = abs_majorant_series(&b, cfg) * g_norm(&s, cfg);
        if rhs > 0.0 {
            worst = worst.max(lhs / rhs);
        }
    }
    PropertyOutcome {
        name: "series-product-bound".into(),
        cases: trials,
        worst,
        pass: worst <= 1.0 + PROP_TOL,
    }
}

/// Exhaustive exact check of the factorial split inequality
/// `(n0! n1! Π l_h! / (n02! n12! Π l_h2!)) ((n02+n12+Σl2+α)! / (n0+n1+Σl+α)!) <= 1`
/// over all tuples with `n0, n1, Σl <= limit` and `α <= limit`, in integer
/// arithmetic via cross-multiplication.
pub fn check_factorial_inequality(limit: u32) -> PropertyOutcome {
    use crate::index::factorial_u128;
    let mut cases = 0usize;
    let mut worst = 0.0f64;
    let mut pass = true;
    // enumerate l-vectors of length <= alpha+1 with sum <= limit
    fn l_vectors(len: usize, budget: u32) -> Vec<Vec<u32>> {
        if len == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for head in 0..=budget {
            for mut tail in l_vectors(len - 1, budget - head) {
                let mut v = vec![head];
                v.append(&mut tail);
                out.push(v);
            }
        }
        out
    }
    for alpha in 0..=limit {
        for ls in l_vectors(alpha as usize + 1, limit) {
            for n0 in 0..=limit {
                for n1 in 0..=limit {
                    // componentwise sub-splits
                    let full = crate::index::MultiIndex::new(n0, n1, &ls);
                    for (part, _) in full.splits2() {
                        let upper: u32 = full.total_degree() + alpha;
                        let lower: u32 = part.total_degree() + alpha;
                        // n0! n1! Π l! * (lower)! <= n02! n12! Π l2! * (upper)!
                        let lhs = full_factorial_u128(&full) * factorial_u128(lower);
                        let rhs = full_factorial_u128(&part) * factorial_u128(upper);
                        cases += 1;
                        if lhs > rhs {
                            pass = false;
                        }
                        worst = worst.max(lhs as f64 / rhs as f64);
                    }
                }
            }
        }
    }
    PropertyOutcome {
        name: "factorial-split-inequality".into(),
        cases,
        worst,
        pass,
    }
}

fn full_factorial_u128(idx: &crate::index::MultiIndex) -> u128 {
    use crate::index::factorial_u128;
    let mut acc = factorial_u128(idx.n0()) * factorial_u128(idx.n1());
    for h in 0..idx.l_len() {
        acc *= factorial_u128(idx.l(h));
    }
    acc
}

/// Partial zeta sums stay below the full zeta value.
pub fn check_zeta_cap(b: f64, alpha_max: usize) -> PropertyOutcome {
    let cap = zeta(b);
    let mut worst = 0.0f64;
    for alpha in 0..=alpha_max {
        worst = worst.max(r_b(alpha, b) / cap);
    }
    PropertyOutcome {
        name: "partial-zeta-cap".into(),
        cases: alpha_max + 1,
        worst,
        pass: worst <= 1.0 + PROP_TOL,
    }
}

/// Default fixture configuration; `rho` comes from calibration.
pub fn default_config(rho: f64) -> NormConfig {
    NormConfig {
        rho,
        sigma: 1.0,
        b: 2.0,
        delta_bar: 0.25,
        v0_bar: 0.1,
        v1_bar: 0.1,
        w_bar: 0.25,
        delta: 0.5,
    }
}
