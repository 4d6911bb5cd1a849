//! Order-raising operators on coefficient series and the Picard solver.
//!
//! The sup-sequence tables generate nonnegative formal series: per-slot
//! coefficient series in `(V0, V1, U0, W)` and per-variable transport
//! polynomials. Combined with integration in `W`, they define a linear map
//! whose every application raises the `W`-order by at least one, so on a
//! truncation the fixed-point equation is solved exactly by finitely many
//! Picard steps. The solution reproduces the dominating recursion level by
//! level and provides the norm bounds used by the growth profile.

use crate::error::{Error, Result};
use crate::exec;
use crate::index::factorial_f64;
use crate::majorant::{IndexCaps, SupSequence};
use crate::norms::{g_norm, NormConfig};
use crate::poly::{TruncatedPoly, Var};
use crate::series::JetSeries;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Generating series of the sup tables: everything the fixed-point map needs.
#[derive(Clone, Debug)]
pub struct OperatorBundle {
    pub s_order: usize,
    pub ks: Vec<usize>,
    pub a_order: usize,
    pub degree_cap: usize,
    /// `(m, k) -> W-series` of 3-variable coefficient majorants.
    coeff_gen: BTreeMap<(usize, usize), JetSeries>,
    /// Transport majorant polynomial per jet variable.
    transport_t_gen: Vec<TruncatedPoly>,
    transport_z_gen: Vec<TruncatedPoly>,
    /// Forcing majorant series.
    pub forcing: JetSeries,
}

/// Divided-power table to monomial polynomial: coefficient `entry / index!`.
fn poly_from_sup_table(
    table: &BTreeMap<crate::index::MultiIndex, f64>,
    level: usize,
    cap: usize,
) -> Result<TruncatedPoly> {
    TruncatedPoly::from_terms(
        table
            .iter()
            .map(|(idx, v)| (idx.clone(), c(v / idx.factorial()))),
        level,
        cap,
    )
}

impl OperatorBundle {
    pub fn from_sup(
        sup: &SupSequence,
        s_order: usize,
        ks: &[usize],
        a_order: usize,
        degree_cap: usize,
    ) -> Result<Self> {
        if let Some(&k) = ks.iter().find(|&&k| k >= s_order) {
            return Err(Error::Config(format!(
                "shift k = {k} must be below the order {s_order}"
            )));
        }
        let mut coeff_gen = BTreeMap::new();
        for &k in ks {
            for m in 1..=3usize {
                let mut levels = Vec::with_capacity(a_order + 1);
                for alpha in 0..=a_order {
                    let poly = match sup.b_table(m, k, alpha) {
                        Some(table) => poly_from_sup_table(table, 0, degree_cap)?
                            .scale(c(1.0 / factorial_f64(alpha as u32)))
                            .embed(alpha)?,
                        None => TruncatedPoly::zero(alpha, degree_cap),
                    };
                    levels.push(poly);
                }
                coeff_gen.insert((m, k), JetSeries::from_w_power_levels(levels, degree_cap)?);
            }
        }
        let mut transport_t_gen = Vec::with_capacity(a_order + 1);
        let mut transport_z_gen = Vec::with_capacity(a_order + 1);
        for j in 0..=a_order {
            transport_t_gen.push(poly_from_sup_table(
                sup.transport_t_table(j),
                j + 1,
                degree_cap,
            )?);
            transport_z_gen.push(poly_from_sup_table(
                sup.transport_z_table(j),
                j + 1,
                degree_cap,
            )?);
        }
        let mut forcing_levels = Vec::with_capacity(a_order + 1);
        for alpha in 0..=a_order {
            forcing_levels.push(
                poly_from_sup_table(sup.omega_table(alpha), 0, degree_cap)?
                    .scale(c(1.0 / factorial_f64(alpha as u32)))
                    .embed(alpha)?,
            );
        }
        Ok(OperatorBundle {
            s_order,
            ks: ks.to_vec(),
            a_order,
            degree_cap,
            coeff_gen,
            transport_t_gen,
            transport_z_gen,
            forcing: JetSeries::from_w_power_levels(forcing_levels, degree_cap)?,
        })
    }

    pub fn coeff_series(&self, m: usize, k: usize) -> Option<&JetSeries> {
        self.coeff_gen.get(&(m, k))
    }

    /// Scale every coefficient series (linearity probe for tests).
    pub fn scale_coeffs(&mut self, factor: f64) {
        for series in self.coeff_gen.values_mut() {
            *series = series.scale(c(factor));
        }
    }
}

/// Derivative-transport operator in the `t`-slot: level α picks up
/// `Σ_{j ∈ I(α)} A_j ∂_{U_j}`, landing one level higher.
pub fn apply_transport_t(bundle: &OperatorBundle, s: &JetSeries) -> Result<JetSeries> {
    apply_transport(bundle, s, &bundle.transport_t_gen)
}

/// Same with the `z`-slot transports.
pub fn apply_transport_z(bundle: &OperatorBundle, s: &JetSeries) -> Result<JetSeries> {
    apply_transport(bundle, s, &bundle.transport_z_gen)
}

fn apply_transport(
    bundle: &OperatorBundle,
    s: &JetSeries,
    transports: &[TruncatedPoly],
) -> Result<JetSeries> {
    let mut levels = Vec::with_capacity(s.a_order() + 1);
    for alpha in 0..=s.a_order() {
        let p = s.level(alpha);
        let mut acc = TruncatedPoly::zero((alpha + 1).min(p.level() + 1), bundle.degree_cap);
        for j in 0..=alpha.min(p.level()) {
            let dp = p.diff(Var::U(j))?;
            if dp.is_zero() {
                continue;
            }
            let transport = transports.get(j).ok_or_else(|| {
                Error::Config(format!("transport series missing variable index {j}"))
            })?;
            acc = acc.add(&transport.mul(&dp)?)?;
        }
        levels.push(acc);
    }
    JetSeries::from_w_power_levels(levels, bundle.degree_cap)
}

/// The order-raising map: coefficient series times integrated derivative
/// blocks, summed over the shift set and truncated at the series order.
pub fn apply_m(bundle: &OperatorBundle, s: &JetSeries) -> Result<JetSeries> {
    let mut out = JetSeries::zero(s.a_order(), bundle.degree_cap);
    for &k in &bundle.ks {
        let raise = bundle.s_order - k;
        let blocks: [(usize, JetSeries); 3] = [
            (
                1,
                s.diff_levels(Var::V0)?
                    .add(&apply_transport_t(bundle, s)?)?,
            ),
            (
                2,
                s.diff_levels(Var::V1)?
                    .add(&apply_transport_z(bundle, s)?)?,
            ),
            (3, s.clone()),
        ];
        for (m, block) in blocks {
            let Some(coeff) = bundle.coeff_series(m, k) else {
                continue;
            };
            if coeff.is_zero() || block.is_zero() {
                continue;
            }
            let integrated = block.integrate_w(raise);
            out = out.add(&coeff.convolve(&integrated)?)?;
        }
    }
    Ok(out)
}

/// Solve `psi = M(psi) + forcing` by Picard iteration from zero.
///
/// The map raises the `W`-order by `min_k (S - k) >= 1`, so the iteration is
/// stationary after at most `a_order + 1` steps; non-stationarity is an
/// internal invariant violation.
pub fn picard_solve(bundle: &OperatorBundle, forcing: &JetSeries) -> Result<(JetSeries, usize)> {
    let mut current = JetSeries::zero(forcing.a_order(), bundle.degree_cap);
    for iter in 1..=forcing.a_order() + 2 {
        let next = apply_m(bundle, &current)?.add(forcing)?;
        if next == current {
            return Ok((current, iter - 1));
        }
        current = next;
    }
    Err(Error::Invariant(
        "Picard iteration did not stabilize within the truncation bound".into(),
    ))
}

/// Max over random unit-norm series of `||M(s)|| / ||s||`.
pub fn contraction_factor(
    bundle: &OperatorBundle,
    cfg: &NormConfig,
    caps: &IndexCaps,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let series: Vec<JetSeries> = (0..trials)
        .map(|i| random_series(bundle, caps, seed.wrapping_add(i as u64)))
        .collect();
    let factors = exec::map(series, |s| -> Result<f64> {
        let norm = g_norm(&s, cfg);
        if norm == 0.0 {
            return Ok(0.0);
        }
        let image = apply_m(bundle, &s)?;
        Ok(g_norm(&image, cfg) / norm)
    });
    let mut max = 0.0f64;
    for f in factors {
        max = max.max(f?);
    }
    Ok(max)
}

/// Random nonnegative series supported within the caps.
fn random_series(bundle: &OperatorBundle, caps: &IndexCaps, seed: u64) -> JetSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = JetSeries::zero(bundle.a_order, bundle.degree_cap);
    for alpha in 0..=bundle.a_order {
        let terms = rng.gen_range(1..5);
        for _ in 0..terms {
            let n0 = rng.gen_range(0..=caps.n0);
            let n1 = rng.gen_range(0..=caps.n1);
            let mut l = vec![0u32; alpha + 1];
            let mut budget = caps.l_sum;
            for _ in 0..rng.gen_range(0..3) {
                if budget == 0 {
                    break;
                }
                let h = rng.gen_range(0..=alpha);
                let e = rng.gen_range(1..=budget);
                l[h] += e;
                budget -= e;
            }
            let idx = crate::index::MultiIndex::new(n0, n1, &l);
            s.level_mut(alpha).add_term(idx, c(rng.gen_range(0.0..1.0)));
        }
    }
    s
}

/// Outcome of the contraction-radius search.
#[derive(Clone, Copy, Debug)]
pub struct WBarSearch {
    pub w_bar: f64,
    pub factor: f64,
    /// Solution-to-forcing norm ratio at the certified radius (<= 2).
    pub solution_ratio: f64,
    pub evaluations: usize,
}

/// Find a `W`-radius certified by bisection, starting from the
/// coefficient-growth estimate `1 / (2 D̂)`.
///
/// A radius is accepted when the sampled contraction factor stays at or
/// below `target` AND the fixed point itself witnesses the Neumann bound
/// `||solution|| <= 2 ||forcing||` at that radius. The second clause guards
/// the radii where finitely many random trials under-estimate the operator
/// norm.
pub fn search_w_bar(
    bundle: &OperatorBundle,
    cfg_template: &NormConfig,
    caps: &IndexCaps,
    trials: usize,
    seed: u64,
    target: f64,
) -> Result<WBarSearch> {
    // growth rate of the coefficient series' divided majorants
    let mut d_hat = 0.0f64;
    for &k in &bundle.ks {
        for m in 1..=3usize {
            let Some(series) = bundle.coeff_series(m, k) else {
                continue;
            };
            let base = series
                .divided_level(0)
                .abs_eval(cfg_template.v0_bar, cfg_template.v1_bar, |_| cfg_template.u_bar(0));
            if base == 0.0 {
                continue;
            }
            for alpha in 1..=series.a_order() {
                let lvl = series
                    .divided_level(alpha)
                    .abs_eval(cfg_template.v0_bar, cfg_template.v1_bar, |_| cfg_template.u_bar(0));
                if lvl > 0.0 {
                    d_hat = d_hat.max((lvl / base).powf(1.0 / alpha as f64));
                }
            }
        }
    }
    // the fixed point does not depend on the radius; solve once and reuse
    let (solution, _) = picard_solve(bundle, &bundle.forcing)?;
    let mut evaluations = 0;
    // (factor, solution ratio, certified?)
    let mut probe = |w_bar: f64| -> Result<(f64, f64, bool)> {
        let mut cfg = *cfg_template;
        cfg.w_bar = w_bar;
        evaluations += 1;
        let factor = contraction_factor(bundle, &cfg, caps, trials, seed)?;
        let forcing_norm = g_norm(&bundle.forcing, &cfg);
        let ratio = if forcing_norm > 0.0 {
            g_norm(&solution, &cfg) / forcing_norm
        } else {
            0.0
        };
        Ok((factor, ratio, factor <= target && ratio <= 2.0))
    };
    // exponential bracket around the certification boundary, then bisection
    const RADIUS_CAP: f64 = 8.0;
    let start = if d_hat > 0.0 { 1.0 / (2.0 * d_hat) } else { 0.5 };
    let mut lo = start.min(1.0);
    let (mut lo_factor, mut lo_ratio, mut lo_ok) = probe(lo)?;
    let mut hi: Option<f64> = None;
    if !lo_ok {
        let mut shrink_steps = 0;
        while !lo_ok {
            hi = Some(lo);
            lo /= 2.0;
            shrink_steps += 1;
            if shrink_steps > 200 {
                return Err(Error::Config(
                    "contraction-radius search collapsed without meeting the target".into(),
                ));
            }
            (lo_factor, lo_ratio, lo_ok) = probe(lo)?;
        }
    } else {
        while hi.is_none() && lo < RADIUS_CAP {
            let next = (2.0 * lo).min(RADIUS_CAP);
            let (f, r, ok) = probe(next)?;
            if ok {
                (lo, lo_factor, lo_ratio) = (next, f, r);
            } else {
                hi = Some(next);
            }
        }
    }
    if let Some(mut hi) = hi {
        for _ in 0..12 {
            let mid = 0.5 * (lo + hi);
            let (f, r, ok) = probe(mid)?;
            if ok {
                (lo, lo_factor, lo_ratio) = (mid, f, r);
            } else {
                hi = mid;
            }
        }
    }
    Ok(WBarSearch {
        w_bar: lo,
        factor: lo_factor,
        solution_ratio: lo_ratio,
        evaluations,
    })
}
