//! The coefficient recursion for the composed series solution.
//!
//! The solution ansatz composes level-α polynomials with the scaled jets of
//! the closed form `X`. Differentiating that composition in `t` or `z` makes
//! each jet variable `u_j` pick up a transport polynomial: the `t`-direction
//! transport is assembled from the coefficient functions `a`, `a_p` of the
//! closed-form problem, the `z`-direction transport is the single monomial
//! `(j+1) nu u_{j+1}`. The recursion then expresses each level-α coefficient
//! through lower levels, the equation coefficients `b_{m,k}`, and a forcing
//! term induced by the initial data.
//!
//! Everything here works with scaled coefficients `phi_α / α!` to keep the
//! factorial bookkeeping in one place.

use crate::error::{Error, Result};
use crate::exec;
use crate::index::{compositions, factorial_f64, factorial_ratio, MultiIndex};
use crate::poly::{TruncatedPoly, Var};
use crate::problem::ProblemSpec;
use crate::xflow::XSpec;
use num_complex::Complex64;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Transport polynomial of the jet variable `u_j` under `∂_t`:
///
/// `Σ_{l1+l2=j} ∂_{v1}^{l1} a / (l1! nu^{l1}) (l2+1) nu u_{l2+1}
///  + Σ_p Σ_{j0+..+jp=j} ∂_{v1}^{j0} a_p / (j0! nu^{j0}) Π_{l=1..p} u_{j_l}`
///
/// evaluated at the jets this equals `∂_t x_j`. The composition tuples are
/// enumerated exhaustively.
pub fn u_transport_t(j: usize, level: usize, x: &XSpec, nu: f64, cap: usize) -> Result<TruncatedPoly> {
    if j + 1 > level {
        return Err(Error::Index(format!(
            "u_transport_t needs U_{} but level is {level}",
            j + 1
        )));
    }
    let mut acc = TruncatedPoly::zero(level, cap);
    // advection part
    for l1 in 0..=j {
        let l2 = j - l1;
        let mut da = x.a.clone();
        for _ in 0..l1 {
            da = da.diff(Var::V1)?;
        }
        if da.is_zero() {
            continue;
        }
        let scale = (l2 + 1) as f64 * nu / (factorial_f64(l1 as u32) * nu.powi(l1 as i32));
        let mono = TruncatedPoly::monomial(MultiIndex::u(l2 + 1, 1), c(scale), level, cap)?;
        acc = acc.add(&da.embed(level)?.mul(&mono)?)?;
    }
    // reaction part
    for (p, ap) in x.a_p.iter().enumerate() {
        if ap.is_zero() {
            continue;
        }
        for tuple in compositions(j as u32, p + 1) {
            let j0 = tuple[0] as usize;
            let mut dap = ap.clone();
            for _ in 0..j0 {
                dap = dap.diff(Var::V1)?;
            }
            if dap.is_zero() {
                continue;
            }
            let scale = 1.0 / (factorial_f64(j0 as u32) * nu.powi(j0 as i32));
            let mut idx = MultiIndex::zero();
            for &jl in &tuple[1..] {
                idx = idx.add(&MultiIndex::u(jl as usize, 1));
            }
            let mono = TruncatedPoly::monomial(idx, c(scale), level, cap)?;
            acc = acc.add(&dap.embed(level)?.mul(&mono)?)?;
        }
    }
    Ok(acc)
}

/// Transport polynomial of `u_j` under `∂_z`: the monomial `(j+1) nu u_{j+1}`.
pub fn u_transport_z(j: usize, level: usize, nu: f64, cap: usize) -> Result<TruncatedPoly> {
    if j + 1 > level {
        return Err(Error::Index(format!(
            "u_transport_z needs U_{} but level is {level}",
            j + 1
        )));
    }
    TruncatedPoly::monomial(MultiIndex::u(j + 1, 1), c((j + 1) as f64 * nu), level, cap)
}

/// Scaled forcing term induced by the initial data (`forcing_α / α!`):
///
/// `Σ_k Σ_{α1+α2=α} [ b_{1,k,α1}/α1! ∂_{v0}ω_{α2+k}/α2!
///                  + b_{2,k,α1}/α1! ∂_{v1}ω_{α2+k}/α2!
///                  + b_{3,k,α1}/α1! ω_{α2+k}/α2! ]`
///
/// with the convention `ω_j = 0` for `j >= S`. A level-0 polynomial.
pub fn data_forcing_scaled(alpha: usize, problem: &ProblemSpec) -> Result<TruncatedPoly> {
    let cap = problem.degree_cap;
    let mut acc = TruncatedPoly::zero(0, cap);
    for &k in &problem.ks {
        for alpha2 in 0..=alpha {
            let alpha1 = alpha - alpha2;
            let j = alpha2 + k;
            if j >= problem.s_order {
                continue; // data vanishes at and above the equation order
            }
            let omega = problem.omega_j(j);
            if omega.is_zero() {
                continue;
            }
            let inv_a2 = c(1.0 / factorial_f64(alpha2 as u32));
            for (m, base) in [
                (1usize, omega.diff(Var::V0)?),
                (2, omega.diff(Var::V1)?),
                (3, omega.clone()),
            ] {
                if let Some(b) = problem.coeffs.get(m, k, alpha1) {
                    let b_hat = b.scale(c(1.0 / factorial_f64(alpha1 as u32)));
                    acc = acc.add(&b_hat.mul(&base.scale(inv_a2))?)?;
                }
            }
        }
    }
    Ok(acc)
}

/// Raw forcing term (`α!` times the scaled one).
pub fn data_forcing(alpha: usize, problem: &ProblemSpec) -> Result<TruncatedPoly> {
    Ok(data_forcing_scaled(alpha, problem)?.scale(c(factorial_f64(alpha as u32))))
}

/// One recorded contribution to a recursion level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProvenanceRow {
    pub alpha: usize,
    pub k: usize,
    pub alpha1: usize,
    pub alpha2: usize,
}

/// The computed coefficient family: `scaled[α] = phi_α / α!` at level α.
#[derive(Clone, Debug)]
pub struct PhiFamily {
    scaled: Vec<TruncatedPoly>,
    pub nu: f64,
    pub provenance: Vec<ProvenanceRow>,
}

impl PhiFamily {
    pub fn a_order(&self) -> usize {
        self.scaled.len() - 1
    }

    /// `phi_α / α!`.
    pub fn scaled_level(&self, alpha: usize) -> &TruncatedPoly {
        &self.scaled[alpha]
    }

    /// `phi_α` itself.
    pub fn raw_level(&self, alpha: usize) -> TruncatedPoly {
        self.scaled[alpha].scale(c(factorial_f64(alpha as u32)))
    }
}

/// Run the level recursion with the forcing induced by the initial data.
pub fn compute_phi(problem: &ProblemSpec, nu: f64, a_order: usize) -> Result<PhiFamily> {
    let forcing: Vec<TruncatedPoly> = (0..=a_order)
        .map(|alpha| data_forcing_scaled(alpha, problem))
        .collect::<Result<_>>()?;
    compute_phi_with_forcing(problem, nu, &forcing)
}

/// Run the level recursion with an explicit scaled forcing sequence
/// (`forcing[α] = forcing_α / α!`, each a polynomial at level <= α).
///
/// Well-founded because every referenced level `α2 + k - S` is strictly
/// below α; levels below `min_k (S - k)` equal the forcing exactly.
pub fn compute_phi_with_forcing(
    problem: &ProblemSpec,
    nu: f64,
    forcing: &[TruncatedPoly],
) -> Result<PhiFamily> {
    let cap = problem.degree_cap;
    let s = problem.s_order;
    let a_order = forcing.len() - 1;
    let mut scaled: Vec<TruncatedPoly> = Vec::with_capacity(a_order + 1);
    let mut provenance = Vec::new();
    for alpha in 0..=a_order {
        let mut contributions: Vec<(usize, usize, usize)> = Vec::new();
        for &k in &problem.ks {
            for alpha2 in (s - k)..=alpha {
                contributions.push((k, alpha - alpha2, alpha2));
            }
        }
        for &(k, a1, a2) in &contributions {
            provenance.push(ProvenanceRow {
                alpha,
                k,
                alpha1: a1,
                alpha2: a2,
            });
        }
        let prior = &scaled;
        let terms = exec::map(contributions, |(k, alpha1, alpha2)| -> Result<TruncatedPoly> {
            let beta = alpha2 + k - s;
            debug_assert!(beta < alpha, "recursion must reference lower levels");
            let phi_b = &prior[beta];
            let ratio = c(factorial_ratio(beta as u32, alpha2 as u32));
            let mut term = TruncatedPoly::zero(alpha, cap);
            // ∂_t route
            if let Some(b1) = problem.coeffs.get(1, k, alpha1) {
                let b_hat = b1.scale(c(1.0 / factorial_f64(alpha1 as u32))).embed(alpha)?;
                let mut core = phi_b.diff(Var::V0)?.embed(alpha)?;
                for j in 0..=beta {
                    let dphi = phi_b.diff(Var::U(j))?;
                    if dphi.is_zero() {
                        continue;
                    }
                    let transport = u_transport_t(j, alpha, &problem.x, nu, cap)?;
                    core = core.add(&transport.mul(&dphi.embed(alpha)?)?)?;
                }
                term = term.add(&b_hat.mul(&core)?.scale(ratio))?;
            }
            // ∂_z route
            if let Some(b2) = problem.coeffs.get(2, k, alpha1) {
                let b_hat = b2.scale(c(1.0 / factorial_f64(alpha1 as u32))).embed(alpha)?;
                let mut core = phi_b.diff(Var::V1)?.embed(alpha)?;
                for j in 0..=beta {
                    let dphi = phi_b.diff(Var::U(j))?;
                    if dphi.is_zero() {
                        continue;
                    }
                    let transport = u_transport_z(j, alpha, nu, cap)?;
                    core = core.add(&transport.mul(&dphi.embed(alpha)?)?)?;
                }
                term = term.add(&b_hat.mul(&core)?.scale(ratio))?;
            }
            // zero-order route
            if let Some(b3) = problem.coeffs.get(3, k, alpha1) {
                let b_hat = b3.scale(c(1.0 / factorial_f64(alpha1 as u32))).embed(alpha)?;
                term = term.add(&b_hat.mul(&phi_b.embed(alpha)?)?.scale(ratio))?;
            }
            Ok(term)
        });
        let mut level = forcing[alpha].embed(alpha)?;
        for t in terms {
            level = level.add(&t?)?;
        }
        scaled.push(level);
    }
    Ok(PhiFamily {
        scaled,
        nu,
        provenance,
    })
}
