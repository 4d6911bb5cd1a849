//! Sup-sequence tables and the nonnegative dominating recursion.
//!
//! Every datum entering the level recursion (equation coefficients, jet
//! transports, forcing) is a polynomial here, so the supremum of any of its
//! derivatives over the working polydisc admits an exact upper bound: the
//! coefficient-absolute-value sum of the derivative evaluated at the radii.
//! Those bounds feed a structurally identical recursion with all weights
//! nonnegative, whose output dominates the divided-power coefficients of the
//! solution levels index by index.
//!
//! Boundary sampling (max modulus over product circles) estimates the same
//! suprema from below; the inequality checks pair a sampled left-hand side
//! with bound-assembled right-hand sides and an explicit slack factor.

use crate::error::{Error, Result};
use crate::exec;
use crate::index::{factorial_f64, factorial_ratio, multinomial_split_weight, MultiIndex};
use crate::poly::{TruncatedPoly, Var};
use crate::problem::ProblemSpec;
use crate::recursion::{data_forcing, u_transport_t, u_transport_z, PhiFamily};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// `P_d(j) = (j+d)!/j! = Π_{l=1..d} (j+l)`, degree-`d` with positive
/// coefficients.
pub fn pd_poly(j: u32, d: u32) -> u128 {
    (1..=d as u128).map(|l| j as u128 + l).product()
}

// ---------------------------------------------------------------------------
// boundary sampling

/// Sampling parameters for boundary maxima.
#[derive(Clone, Copy, Debug)]
pub struct SampleCfg {
    /// Points per circle dimension (full product grids when affordable).
    pub per_dim: usize,
    /// Total budget; above it the product grid degenerates to random tuples.
    pub cap_total: usize,
    pub seed: u64,
}

impl Default for SampleCfg {
    fn default() -> Self {
        SampleCfg {
            per_dim: 64,
            cap_total: 1 << 16,
            seed: 0,
        }
    }
}

/// Max of `|f|` over the distinguished boundary (product of circles with the
/// given radii), estimated from below by sampling.
///
/// Dimensions are sampled on equally spaced angles with a seeded phase
/// offset. When the full product grid exceeds the budget, random angle
/// tuples are drawn instead.
pub fn sample_boundary_max(
    f: &(dyn Fn(&[Complex64]) -> Complex64 + Sync),
    radii: &[f64],
    cfg: &SampleCfg,
) -> f64 {
    let dims = radii.len();
    if dims == 0 {
        return f(&[]).norm();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let phases: Vec<f64> = (0..dims).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    let full: Option<usize> = radii.iter().try_fold(1usize, |acc, _| {
        acc.checked_mul(cfg.per_dim).filter(|&n| n <= cfg.cap_total)
    });
    let point = |angles: &[f64]| -> Vec<Complex64> {
        angles
            .iter()
            .zip(radii)
            .zip(&phases)
            .map(|((&a, &r), &p)| Complex64::from_polar(r, a + p))
            .collect()
    };
    if let Some(total) = full {
        let indices: Vec<usize> = (0..total).collect();
        exec::max_f64(indices, |mut flat| {
            let mut angles = vec![0.0; dims];
            for slot in angles.iter_mut() {
                let i = flat % cfg.per_dim;
                flat /= cfg.per_dim;
                *slot = i as f64 * std::f64::consts::TAU / cfg.per_dim as f64;
            }
            f(&point(&angles)).norm()
        })
    } else {
        let draws: Vec<Vec<f64>> = (0..cfg.cap_total)
            .map(|_| (0..dims).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect())
            .collect();
        exec::max_f64(draws, |angles| f(&point(&angles)).norm())
    }
}

/// Upper estimate of `sup |∂^order f|` over the polydisc with the given
/// radii: max of `|f|` on the enlarged boundary (radii + delta) times
/// `order! / delta^{|order|}`.
///
/// The circle max itself is sampled, hence estimated from below; callers
/// compensate with an explicit slack factor.
pub fn cauchy_sup_estimate(
    f: &(dyn Fn(&[Complex64]) -> Complex64 + Sync),
    radii: &[f64],
    order: &MultiIndex,
    delta: f64,
    cfg: &SampleCfg,
) -> Result<f64> {
    if delta <= 0.0 {
        return Err(Error::Config("cauchy_sup_estimate needs delta > 0".into()));
    }
    let enlarged: Vec<f64> = radii.iter().map(|r| r + delta).collect();
    let boundary_max = sample_boundary_max(f, &enlarged, cfg);
    Ok(boundary_max * order.factorial() / delta.powi(order.total_degree() as i32))
}

// ---------------------------------------------------------------------------
// sup-sequence tables

/// Upper bounds `index -> sup |∂^index p|` over the polydisc, for every
/// index in the downward closure of the polynomial's support (entries
/// outside the closure are exactly zero).
pub fn derivative_sup_table(
    p: &TruncatedPoly,
    rv0: f64,
    rv1: f64,
    ru: &dyn Fn(usize) -> f64,
) -> BTreeMap<MultiIndex, f64> {
    use std::collections::BTreeSet;
    let mut closure: BTreeSet<MultiIndex> = BTreeSet::new();
    for (idx, _) in p.terms() {
        for (sub, _) in idx.splits2() {
            closure.insert(sub);
        }
    }
    let mut by_degree: Vec<MultiIndex> = closure.into_iter().collect();
    by_degree.sort_by_key(|i| (i.total_degree(), i.clone()));
    let mut polys: BTreeMap<MultiIndex, TruncatedPoly> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for idx in by_degree {
        let poly = if idx == MultiIndex::zero() {
            p.clone()
        } else {
            // differentiate once from an already-computed predecessor
            let (pred, var) = if idx.n0() > 0 {
                (idx.with_n0(idx.n0() - 1), Var::V0)
            } else if idx.n1() > 0 {
                (idx.with_n1(idx.n1() - 1), Var::V1)
            } else {
                let (h, e) = idx.u_support().next().expect("nonzero index");
                (idx.with_l(h, e - 1), Var::U(h))
            };
            polys
                .get(&pred)
                .expect("predecessor computed first")
                .diff(var)
                .expect("derivative within level")
        };
        let bound = poly.abs_eval(rv0, rv1, ru);
        if bound > 0.0 {
            out.insert(idx.clone(), bound);
        }
        polys.insert(idx, poly);
    }
    out
}

/// Sup-norm tables for all recursion inputs on `D(0,R)^2 × Π D(0,rho)`.
#[derive(Clone, Debug)]
pub struct SupSequence {
    pub r: f64,
    pub rho: f64,
    pub nu: f64,
    /// `(m, k, alpha) -> table`; entries are raw (not factorial-scaled).
    b: BTreeMap<(usize, usize, usize), BTreeMap<MultiIndex, f64>>,
    /// Forcing tables per level, raw.
    omega: Vec<BTreeMap<MultiIndex, f64>>,
    /// Jet-transport tables per variable index `j`.
    transport_t: Vec<BTreeMap<MultiIndex, f64>>,
    transport_z: Vec<BTreeMap<MultiIndex, f64>>,
}

impl SupSequence {
    /// Build every table needed through series order `a_order`.
    pub fn from_problem(problem: &ProblemSpec, r: f64, rho: f64, nu: f64, a_order: usize) -> Result<Self> {
        let ru = |_h: usize| rho;
        let mut b = BTreeMap::new();
        for (&(m, k), list) in problem.coeffs.iter() {
            for (alpha, poly) in list.iter().enumerate() {
                if poly.is_zero() {
                    continue;
                }
                b.insert((m, k, alpha), derivative_sup_table(poly, r, r, &ru));
            }
        }
        let omega = (0..=a_order)
            .map(|alpha| -> Result<_> {
                let f = data_forcing(alpha, problem)?;
                Ok(derivative_sup_table(&f, r, r, &ru))
            })
            .collect::<Result<Vec<_>>>()?;
        let level = a_order + 1;
        let mut transport_t = Vec::with_capacity(a_order + 1);
        let mut transport_z = Vec::with_capacity(a_order + 1);
        for j in 0..=a_order {
            let at = u_transport_t(j, level, &problem.x, nu, problem.degree_cap)?;
            transport_t.push(derivative_sup_table(&at, r, r, &ru));
            let bt = u_transport_z(j, level, nu, problem.degree_cap)?;
            transport_z.push(derivative_sup_table(&bt, r, r, &ru));
        }
        Ok(SupSequence {
            r,
            rho,
            nu,
            b,
            omega,
            transport_t,
            transport_z,
        })
    }

    /// Synthetic instance with every stored scalar equal to 1: single shift
    /// `k = 0`, only the zero-order coefficient slot, constant tables.
    pub fn scalar_constant(a_order: usize) -> Self {
        let one: BTreeMap<MultiIndex, f64> = [(MultiIndex::zero(), 1.0)].into_iter().collect();
        let mut b = BTreeMap::new();
        for alpha in 0..=a_order {
            b.insert((3usize, 0usize, alpha), one.clone());
        }
        SupSequence {
            r: 0.3,
            rho: 2.0,
            nu: 1.0,
            b,
            omega: vec![one; a_order + 1],
            transport_t: vec![BTreeMap::new()],
            transport_z: vec![BTreeMap::new()],
        }
    }

    pub fn b_table(&self, m: usize, k: usize, alpha: usize) -> Option<&BTreeMap<MultiIndex, f64>> {
        self.b.get(&(m, k, alpha))
    }

    pub fn omega_table(&self, alpha: usize) -> &BTreeMap<MultiIndex, f64> {
        static EMPTY: std::sync::OnceLock<BTreeMap<MultiIndex, f64>> = std::sync::OnceLock::new();
        self.omega
            .get(alpha)
            .unwrap_or_else(|| EMPTY.get_or_init(BTreeMap::new))
    }

    pub fn transport_t_table(&self, j: usize) -> &BTreeMap<MultiIndex, f64> {
        static EMPTY: std::sync::OnceLock<BTreeMap<MultiIndex, f64>> = std::sync::OnceLock::new();
        self.transport_t
            .get(j)
            .unwrap_or_else(|| EMPTY.get_or_init(BTreeMap::new))
    }

    pub fn transport_z_table(&self, j: usize) -> &BTreeMap<MultiIndex, f64> {
        static EMPTY: std::sync::OnceLock<BTreeMap<MultiIndex, f64>> = std::sync::OnceLock::new();
        self.transport_z
            .get(j)
            .unwrap_or_else(|| EMPTY.get_or_init(BTreeMap::new))
    }

    /// Scale every stored omega table entry (test hook for monotonicity).
    pub fn scale_omega(&mut self, factor: f64) {
        for table in &mut self.omega {
            for v in table.values_mut() {
                *v *= factor;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// the dominating recursion

/// Index caps for the dominating table. Entries may exceed the report caps
/// by `margin` during shifted bookkeeping; beyond that the computation
/// aborts with a cap-overflow error naming the offending index.
#[derive(Clone, Copy, Debug)]
pub struct IndexCaps {
    pub n0: u32,
    pub n1: u32,
    pub l_sum: u32,
    pub margin: u32,
}

impl Default for IndexCaps {
    fn default() -> Self {
        IndexCaps {
            n0: 4,
            n1: 4,
            l_sum: 4,
            margin: 2,
        }
    }
}

impl IndexCaps {
    fn admits(&self, idx: &MultiIndex) -> bool {
        idx.n0() <= self.n0 + self.margin
            && idx.n1() <= self.n1 + self.margin
            && idx.l_sum() <= self.l_sum + self.margin
    }

    /// Within the report range (no margin).
    pub fn reports(&self, idx: &MultiIndex) -> bool {
        idx.n0() <= self.n0 && idx.n1() <= self.n1 && idx.l_sum() <= self.l_sum
    }
}

/// Nonnegative table `(alpha, index) -> psi_{alpha,index} / alpha!`
/// dominating the scaled solution coefficients.
#[derive(Clone, Debug)]
pub struct MajorantTable {
    levels: Vec<BTreeMap<MultiIndex, f64>>,
    pub caps: IndexCaps,
}

impl MajorantTable {
    pub fn a_order(&self) -> usize {
        self.levels.len() - 1
    }

    /// Scaled entry `psi / alpha!` (0 when absent).
    pub fn scaled_entry(&self, alpha: usize, idx: &MultiIndex) -> f64 {
        self.levels.get(alpha).and_then(|t| t.get(idx)).copied().unwrap_or(0.0)
    }

    /// Raw entry `psi`.
    pub fn raw_entry(&self, alpha: usize, idx: &MultiIndex) -> f64 {
        self.scaled_entry(alpha, idx) * factorial_f64(alpha as u32)
    }

    pub fn level_table(&self, alpha: usize) -> &BTreeMap<MultiIndex, f64> {
        &self.levels[alpha]
    }
}

fn add_entry(
    table: &mut BTreeMap<MultiIndex, f64>,
    alpha: usize,
    caps: &IndexCaps,
    idx: MultiIndex,
    value: f64,
) -> Result<()> {
    if value == 0.0 {
        return Ok(());
    }
    if !caps.admits(&idx) {
        return Err(Error::CapOverflow { level: alpha, index: idx });
    }
    *table.entry(idx).or_insert(0.0) += value;
    Ok(())
}

/// Run the dominating recursion level by level.
///
/// All contributions are nonnegative and iterate over the sparse supports of
/// the stored tables, so the result contains exactly the reachable nonzero
/// entries: an absent entry is a genuine zero.
pub fn compute_psi(
    s_order: usize,
    ks: &[usize],
    sup: &SupSequence,
    a_order: usize,
    caps: IndexCaps,
) -> Result<MajorantTable> {
    if let Some(&k) = ks.iter().find(|&&k| k >= s_order) {
        return Err(Error::Config(format!(
            "shift k = {k} must be below the order {s_order}"
        )));
    }
    let mut levels: Vec<BTreeMap<MultiIndex, f64>> = Vec::with_capacity(a_order + 1);
    for alpha in 0..=a_order {
        let mut table = BTreeMap::new();
        let inv_fact_alpha = 1.0 / factorial_f64(alpha as u32);
        for (idx, v) in sup.omega_table(alpha) {
            add_entry(&mut table, alpha, &caps, idx.clone(), v * inv_fact_alpha)?;
        }
        for &k in ks {
            if s_order - k > alpha {
                continue;
            }
            for alpha2 in (s_order - k)..=alpha {
                let alpha1 = alpha - alpha2;
                let beta = alpha2 + k - s_order;
                let ratio = factorial_ratio(beta as u32, alpha2 as u32);
                let prior = &levels[beta];
                // first slot: base-variable shift in n0, plus t-transports
                if let Some(b1) = sup.b_table(1, k, alpha1) {
                    let inv_a1 = 1.0 / factorial_f64(alpha1 as u32);
                    for (i1, vb) in b1 {
                        for (j_idx, vpsi) in prior {
                            if j_idx.n0() >= 1 {
                                let part = j_idx.with_n0(j_idx.n0() - 1);
                                let target = i1.add(&part);
                                let w = multinomial_split_weight(&target, &[i1, &part])? as f64;
                                add_entry(
                                    &mut table,
                                    alpha,
                                    &caps,
                                    target,
                                    w * vb * inv_a1 * vpsi * ratio,
                                )?;
                            }
                        }
                        for j in 0..=beta {
                            for (i2, va) in sup.transport_t_table(j) {
                                if i2.min_level() > beta + 1 {
                                    continue; // outside the admitted variable set
                                }
                                for (j_idx, vpsi) in prior {
                                    if j_idx.l(j) >= 1 {
                                        let part = j_idx.with_l(j, j_idx.l(j) - 1);
                                        let target = i1.add(i2).add(&part);
                                        let w =
                                            multinomial_split_weight(&target, &[i1, i2, &part])? as f64;
                                        add_entry(
                                            &mut table,
                                            alpha,
                                            &caps,
                                            target,
                                            w * vb * inv_a1 * va * vpsi * ratio,
                                        )?;
                                    }
                                }
                            }
                        }
                    }
                }
                // second slot: shift in n1, plus z-transports
                if let Some(b2) = sup.b_table(2, k, alpha1) {
                    let inv_a1 = 1.0 / factorial_f64(alpha1 as u32);
                    for (i1, vb) in b2 {
                        for (j_idx, vpsi) in prior {
                            if j_idx.n1() >= 1 {
                                let part = j_idx.with_n1(j_idx.n1() - 1);
                                let target = i1.add(&part);
                                let w = multinomial_split_weight(&target, &[i1, &part])? as f64;
                                add_entry(
                                    &mut table,
                                    alpha,
                                    &caps,
                                    target,
                                    w * vb * inv_a1 * vpsi * ratio,
                                )?;
                            }
                        }
                        for j in 0..=beta {
                            for (i2, va) in sup.transport_z_table(j) {
                                if i2.min_level() > beta + 1 {
                                    continue;
                                }
                                for (j_idx, vpsi) in prior {
                                    if j_idx.l(j) >= 1 {
                                        let part = j_idx.with_l(j, j_idx.l(j) - 1);
                                        let target = i1.add(i2).add(&part);
                                        let w =
                                            multinomial_split_weight(&target, &[i1, i2, &part])? as f64;
                                        add_entry(
                                            &mut table,
                                            alpha,
                                            &caps,
                                            target,
                                            w * vb * inv_a1 * va * vpsi * ratio,
                                        )?;
                                    }
                                }
                            }
                        }
                    }
                }
                // third slot: no shift
                if let Some(b3) = sup.b_table(3, k, alpha1) {
                    let inv_a1 = 1.0 / factorial_f64(alpha1 as u32);
                    for (i1, vb) in b3 {
                        for (j_idx, vpsi) in prior {
                            let target = i1.add(j_idx);
                            let w = multinomial_split_weight(&target, &[i1, j_idx])? as f64;
                            add_entry(&mut table, alpha, &caps, target, w * vb * inv_a1 * vpsi * ratio)?;
                        }
                    }
                }
            }
        }
        levels.push(table);
    }
    Ok(MajorantTable { levels, caps })
}

// ---------------------------------------------------------------------------
// domination and inequality reports

#[derive(Clone, Debug)]
pub struct DominationRow {
    pub alpha: usize,
    pub index: MultiIndex,
    /// `|divided coefficient of phi_alpha / alpha!|` at the index.
    pub lhs: f64,
    /// Dominating scaled entry.
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct DominationReport {
    pub rows: Vec<DominationRow>,
    pub max_ratio: f64,
    pub failures: usize,
    pub pass: bool,
}

/// Check `|∂^index phi_alpha(0)| <= psi_{alpha,index}` in scaled form over
/// every stored index within the report caps.
pub fn check_domination(phi: &PhiFamily, psi: &MajorantTable, slack: f64) -> DominationReport {
    let mut rows = Vec::new();
    let mut max_ratio: f64 = 0.0;
    let mut failures = 0;
    let a_order = phi.a_order().min(psi.a_order());
    for alpha in 0..=a_order {
        let divided = phi.scaled_level(alpha).divided_coeffs();
        let mut indices: Vec<MultiIndex> = divided.keys().cloned().collect();
        for idx in psi.level_table(alpha).keys() {
            if !divided.contains_key(idx) {
                indices.push(idx.clone());
            }
        }
        indices.sort();
        for idx in indices {
            if !psi.caps.reports(&idx) {
                continue;
            }
            let lhs = divided.get(&idx).map(|c| c.norm()).unwrap_or(0.0);
            let rhs = psi.scaled_entry(alpha, &idx);
            let ratio = if rhs > 0.0 { lhs / rhs } else if lhs == 0.0 { 0.0 } else { f64::INFINITY };
            if ratio > 1.0 + slack {
                failures += 1;
            }
            max_ratio = max_ratio.max(ratio);
            rows.push(DominationRow {
                alpha,
                index: idx,
                lhs,
                rhs,
                ratio,
            });
        }
    }
    DominationReport {
        rows,
        max_ratio,
        failures,
        pass: failures == 0,
    }
}

#[derive(Clone, Debug)]
pub struct RecursionIneqRow {
    pub alpha: usize,
    pub index: MultiIndex,
    /// Sampled estimate of the derivative sup (scaled by `1/alpha!`).
    pub lhs: f64,
    /// Recursion right-hand side assembled from bound tables and sampled
    /// lower-level estimates.
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct RecursionIneqReport {
    pub rows: Vec<RecursionIneqRow>,
    pub slack: f64,
    pub failures: usize,
    pub pass: bool,
}

/// Verify the derivative-sup inequality: for each stored solution index the
/// sampled `sup |∂^index phi_alpha|` is at most `slack` times the recursion
/// right-hand side.
///
/// Left-hand sides are max-modulus boundary samples (estimates from below);
/// the coefficient and transport factors on the right are exact upper
/// bounds, and lower-level sup factors are sampled like the left side.
#[allow(clippy::too_many_arguments)]
pub fn check_varphi_recursion(
    phi: &PhiFamily,
    sup: &SupSequence,
    s_order: usize,
    ks: &[usize],
    alpha_max: usize,
    caps: &IndexCaps,
    sample: &SampleCfg,
    slack: f64,
) -> Result<RecursionIneqReport> {
    let a_order = phi.a_order().min(alpha_max);
    // memoized sampled sup of |∂^idx (phi_alpha / alpha!)| over the polydisc
    let mut est_cache: BTreeMap<(usize, MultiIndex), f64> = BTreeMap::new();
    let estimate = |alpha: usize, idx: &MultiIndex, cache: &mut BTreeMap<(usize, MultiIndex), f64>| -> Result<f64> {
        if let Some(&v) = cache.get(&(alpha, idx.clone())) {
            return Ok(v);
        }
        let mut d = phi.scaled_level(alpha).clone();
        for _ in 0..idx.n0() {
            d = d.diff(Var::V0)?;
        }
        for _ in 0..idx.n1() {
            d = d.diff(Var::V1)?;
        }
        for (h, e) in idx.u_support() {
            for _ in 0..e {
                d = d.diff(Var::U(h))?;
            }
        }
        let v = if d.is_zero() {
            0.0
        } else {
            let slots = d.essential_slots();
            let radii: Vec<f64> = slots
                .iter()
                .map(|&s| if s < 2 { sup.r } else { sup.rho })
                .collect();
            let full_len = d.level() + 3;
            let f = |pt: &[Complex64]| -> Complex64 {
                let mut full = vec![Complex64::ZERO; full_len];
                for (&slot, &v) in slots.iter().zip(pt) {
                    full[slot] = v;
                }
                d.eval(&full).expect("eval in range")
            };
            sample_boundary_max(&f, &radii, sample)
        };
        cache.insert((alpha, idx.clone()), v);
        Ok(v)
    };

    let mut rows = Vec::new();
    let mut failures = 0;
    for alpha in 0..=a_order {
        let indices: Vec<MultiIndex> = phi
            .scaled_level(alpha)
            .divided_coeffs()
            .keys()
            .filter(|i| caps.reports(i))
            .cloned()
            .collect();
        for idx in indices {
            let lhs = estimate(alpha, &idx, &mut est_cache)?;
            // assemble the right-hand side at this target index
            let mut rhs = sup.omega_table(alpha).get(&idx).copied().unwrap_or(0.0)
                / factorial_f64(alpha as u32);
            for &k in ks {
                if s_order - k > alpha {
                    continue;
                }
                for alpha2 in (s_order - k)..=alpha {
                    let alpha1 = alpha - alpha2;
                    let beta = alpha2 + k - s_order;
                    let inv_a2 = 1.0 / factorial_f64(alpha2 as u32);
                    for (m, shift_n0, shift_n1) in [(1usize, 1u32, 0u32), (2, 0, 1), (3, 0, 0)] {
                        let Some(btab) = sup.b_table(m, k, alpha1) else {
                            continue;
                        };
                        let inv_a1 = 1.0 / factorial_f64(alpha1 as u32);
                        // two-factor split: coefficient times shifted solution sup
                        for (i1, vb) in btab {
                            let Some(rest) = idx.checked_sub(i1) else {
                                continue;
                            };
                            if rest.min_level() > beta {
                                continue;
                            }
                            let shifted =
                                rest.with_n0(rest.n0() + shift_n0).with_n1(rest.n1() + shift_n1);
                            let w = multinomial_split_weight(&idx, &[i1, &rest])? as f64;
                            let phi_sup = estimate(beta, &shifted, &mut est_cache)?
                                * factorial_f64(beta as u32);
                            rhs += w * vb * inv_a1 * phi_sup * inv_a2;
                        }
                        // transport splits only attach to the first two slots
                        if m == 3 {
                            continue;
                        }
                        for j in 0..=beta {
                            let ttab = if m == 1 {
                                sup.transport_t_table(j)
                            } else {
                                sup.transport_z_table(j)
                            };
                            for (i1, vb) in btab {
                                let Some(rest1) = idx.checked_sub(i1) else {
                                    continue;
                                };
                                for (i2, va) in ttab {
                                    if i2.min_level() > beta + 1 {
                                        continue;
                                    }
                                    let Some(rest2) = rest1.checked_sub(i2) else {
                                        continue;
                                    };
                                    if rest2.min_level() > beta {
                                        continue;
                                    }
                                    let shifted = rest2.with_l(j, rest2.l(j) + 1);
                                    let w =
                                        multinomial_split_weight(&idx, &[i1, i2, &rest2])? as f64;
                                    let phi_sup = estimate(beta, &shifted, &mut est_cache)?
                                        * factorial_f64(beta as u32);
                                    rhs += w * vb * inv_a1 * va * phi_sup * inv_a2;
                                }
                            }
                        }
                    }
                }
            }
            if lhs > slack * rhs + 1e-300 {
                failures += 1;
            }
            rows.push(RecursionIneqRow {
                alpha,
                index: idx,
                lhs,
                rhs,
            });
        }
    }
    Ok(RecursionIneqReport {
        rows,
        slack,
        failures,
        pass: failures == 0,
    })
}
