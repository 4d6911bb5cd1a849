//! The singular closed-form function `X(t, z)`, its scaled `z`-derivative
//! jets, and calibration of `(rho, nu)` on compact grids away from the
//! singular variety.
//!
//! `X` solves a first-order nonlinear problem
//! `∂_t X = a ∂_z X + Σ_p a_p X^p`, `X(0, z) = f(z)`, and blows up along the
//! zero set of a denominator. Two closed-form families are built in:
//!
//! * shift:       `X = f(t + z) / (1 - t f(t + z))`
//! * exponential: `X = f(e^t z) / (1 - t f(e^t z))`
//!
//! plus a user-supplied closed form behind [`ClosedFormX`]. Jets are obtained
//! by series composition and division of `f`'s jet with the denominator's
//! jet, never by finite differences.

use crate::error::{Error, Result};
use crate::exec;
use crate::jets::{poly_eval_scalar, Dual, Jet, JetScalar};
use crate::poly::TruncatedPoly;
use num_complex::Complex64;
use std::sync::Arc;

/// Denominator magnitude below which a point counts as on the variety.
pub const SINGULAR_TOL: f64 = 1e-12;

/// User-supplied closed form: must deliver scaled jets with their
/// `t`-derivatives and a proximity proxy for the singular variety.
pub trait ClosedFormX: Send + Sync + std::fmt::Debug {
    /// Entry `h` is `(∂_z^h X / h!, ∂_t ∂_z^h X / h!)` at `(t, z)`.
    fn jets_dual(&self, t: Complex64, z: Complex64, order: usize) -> Result<Vec<Dual>>;
    /// `|denominator|`-style distance proxy, 0 on the variety.
    fn theta_proximity(&self, t: Complex64, z: Complex64) -> f64;
}

#[derive(Clone, Debug)]
pub enum XFamily {
    /// `X = f(t+z) / (1 - t f(t+z))`; variety `1 - t f(t+z) = 0`.
    Shift,
    /// `X = f(e^t z) / (1 - t f(e^t z))`; variety `1 - t f(e^t z) = 0`.
    Exponential,
    /// User-supplied closed form.
    Custom(Arc<dyn ClosedFormX>),
}

/// The nonlinear problem instance: family, initial datum `f`, coefficient
/// functions `a`, `a_p` (bivariate Taylor data), degree `d`, outer radius.
#[derive(Clone, Debug)]
pub struct XSpec {
    pub family: XFamily,
    /// Univariate monomial coefficients of `f`, ascending.
    pub f: Vec<Complex64>,
    /// Bivariate `a(v0, v1)` as a level-0 polynomial without `U` dependence.
    pub a: TruncatedPoly,
    /// `a_p(v0, v1)` for `p = 0..=d`.
    pub a_p: Vec<TruncatedPoly>,
    pub d: usize,
    pub r_prime: f64,
}

impl XSpec {
    /// Structural checks: `d >= 2`, `a_p` list length `d + 1`, leading
    /// coefficient not identically zero, no `U` dependence in `a`, `a_p`.
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::Config(format!("x.d = {} but d >= 2 is required", self.d)));
        }
        if self.a_p.len() != self.d + 1 {
            return Err(Error::Config(format!(
                "x.a_p has {} entries, expected d + 1 = {}",
                self.a_p.len(),
                self.d + 1
            )));
        }
        if self.a_p[self.d].is_zero() {
            return Err(Error::Config("x.a_p[d] is identically zero".into()));
        }
        for (label, p) in std::iter::once(("a", &self.a))
            .chain(self.a_p.iter().map(|p| ("a_p", p)))
        {
            if p.terms().any(|(idx, _)| idx.l_sum() > 0) {
                return Err(Error::Config(format!("x.{label} depends on a U variable")));
            }
        }
        if self.r_prime <= 0.0 {
            return Err(Error::Config("x.r_prime must be positive".into()));
        }
        Ok(())
    }

    /// `X(t, z)`; fails with a singular-point error near the variety.
    pub fn eval_x(&self, t: Complex64, z: Complex64) -> Result<Complex64> {
        Ok(self.x_jets(t, z, 0, 1.0)?[0])
    }

    /// `|denominator|` proxy for the distance to the variety.
    pub fn theta_proximity(&self, t: Complex64, z: Complex64) -> f64 {
        match &self.family {
            XFamily::Shift => {
                let g = poly_eval_scalar(&self.f, t + z);
                (Complex64::ONE - t * g).norm()
            }
            XFamily::Exponential => {
                let g = poly_eval_scalar(&self.f, t.exp() * z);
                (Complex64::ONE - t * g).norm()
            }
            XFamily::Custom(c) => c.theta_proximity(t, z),
        }
    }

    /// Unscaled jet of `X` in the local `z` variable: `c[h] = ∂_z^h X / h!`.
    fn raw_jets<S: JetScalar>(&self, t: S, z: S, order: usize) -> Result<Jet<S>> {
        let arg: Jet<S> = match &self.family {
            XFamily::Shift => Jet::variable(t + z, order),
            XFamily::Exponential => {
                let scale = t.exp();
                let mut j = Jet::constant(scale * z, order);
                if order >= 1 {
                    j.c[1] = scale;
                }
                j
            }
            XFamily::Custom(_) => {
                return Err(Error::Config(
                    "custom closed forms provide jets directly".into(),
                ))
            }
        };
        let fj = arg.compose_poly(&self.f);
        let mut den = fj.scale(-t);
        den.c[0] = den.c[0] + S::one();
        if den.c[0].abs() < SINGULAR_TOL {
            return Err(self.singular_error(t, z, den.c[0].abs()));
        }
        Ok(fj.mul(&den.recip(SINGULAR_TOL)?))
    }

    fn singular_error<S: JetScalar>(&self, _t: S, _z: S, denom_abs: f64) -> Error {
        Error::SingularPoint {
            t: Complex64::ZERO,
            z: Complex64::ZERO,
            denom_abs,
        }
    }

    /// Scaled jets `x_h = ∂_z^h X / (h! nu^h)` for `h = 0..=order`.
    pub fn x_jets(&self, t: Complex64, z: Complex64, order: usize, nu: f64) -> Result<Vec<Complex64>> {
        if nu <= 0.0 {
            return Err(Error::Config("nu must be positive".into()));
        }
        let raw = match &self.family {
            XFamily::Custom(c) => Jet {
                c: c.jets_dual(t, z, order)?.into_iter().map(|d| d.v).collect(),
            },
            _ => self
                .raw_jets::<Complex64>(t, z, order)
                .map_err(|e| self.attach_point(e, t, z))?,
        };
        let mut scale = 1.0;
        Ok(raw
            .c
            .into_iter()
            .map(|c| {
                let out = c * scale;
                scale /= nu;
                out
            })
            .collect())
    }

    /// Scaled jets together with their `t`-derivatives:
    /// entry `h` is `(x_h, ∂_t x_h)` with `x_h = ∂_z^h X / (h! nu^h)`.
    pub fn x_jets_dual(&self, t: Complex64, z: Complex64, order: usize, nu: f64) -> Result<Vec<Dual>> {
        if nu <= 0.0 {
            return Err(Error::Config("nu must be positive".into()));
        }
        let raw = match &self.family {
            XFamily::Custom(c) => Jet {
                c: c.jets_dual(t, z, order)?,
            },
            _ => self
                .raw_jets::<Dual>(Dual::variable(t), Dual::constant(z), order)
                .map_err(|e| self.attach_point(e, t, z))?,
        };
        let mut scale = Complex64::ONE;
        Ok(raw
            .c
            .into_iter()
            .map(|c| {
                let out = Dual::new(c.v * scale, c.d * scale);
                scale /= nu;
                out
            })
            .collect())
    }

    /// `t`-derivatives of the scaled jets through the right-hand side of the
    /// defining problem: entry `j` is `∂_t ∂_z^j X / (j! nu^j)` assembled
    /// from the Leibniz expansion of `∂_z^j (a ∂_z X + Σ_p a_p X^p)`.
    ///
    /// Independent of the dual-number route; the two must agree by equality
    /// of mixed partial derivatives.
    pub fn x_dt_jets_pde(&self, t: Complex64, z: Complex64, order: usize, nu: f64) -> Result<Vec<Complex64>> {
        let x = self.x_jets(t, z, order + 1, nu)?;
        let a_jet = bivariate_z_jet(&self.a, t, z, order);
        let ap_jets: Vec<Vec<Complex64>> = self
            .a_p
            .iter()
            .map(|p| bivariate_z_jet(p, t, z, order))
            .collect();
        let mut out = Vec::with_capacity(order + 1);
        for j in 0..=order {
            let mut acc = Complex64::ZERO;
            // a-part: Σ_{l1+l2=j} [∂_z^l1 a / (l1! nu^l1)] (l2+1) nu x_{l2+1}
            for l1 in 0..=j {
                let l2 = j - l1;
                let a_scaled = a_jet[l1] / nu.powi(l1 as i32);
                acc += a_scaled * ((l2 + 1) as f64) * nu * x[l2 + 1];
            }
            // reaction part: Σ_p Σ_{j0+..+jp=j} [∂_z^j0 a_p / (j0! nu^j0)] Π x_{j_l}
            for (p, ap_jet) in ap_jets.iter().enumerate() {
                for tuple in crate::index::compositions(j as u32, p + 1) {
                    let j0 = tuple[0] as usize;
                    let mut term = ap_jet[j0] / nu.powi(j0 as i32);
                    for &jl in &tuple[1..] {
                        term *= x[jl as usize];
                    }
                    acc += term;
                }
            }
            out.push(acc);
        }
        Ok(out)
    }

    fn attach_point(&self, e: Error, t: Complex64, z: Complex64) -> Error {
        match e {
            Error::SingularPoint { denom_abs, .. } => Error::SingularPoint { t, z, denom_abs },
            other => other,
        }
    }
}

/// `z`-jet of a bivariate polynomial at `(t, z)`: entry `l` is
/// `∂_{v1}^l p(t, z) / l!`.
pub fn bivariate_z_jet(p: &TruncatedPoly, t: Complex64, z: Complex64, order: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; order + 1];
    for (idx, c) in p.terms() {
        let tp = t.powi(idx.n0() as i32);
        for l in 0..=order.min(idx.n1() as usize) {
            let n1 = idx.n1();
            let binom = crate::index::binomial_u128(n1, l as u32) as f64;
            out[l] += *c * tp * binom * z.powi((n1 - l as u32) as i32);
        }
    }
    out
}

/// A calibrated compact: sample grid off the variety with the witnessed
/// radius `rho` and jet scale `nu`.
#[derive(Clone, Debug)]
pub struct CompactRegion {
    pub grid: Vec<(Complex64, Complex64)>,
    pub r: f64,
    pub rho: f64,
    pub nu: f64,
    /// `max |X|` over the grid (must stay below `rho / 2`).
    pub sup_x: f64,
    /// `max |x_h| / (rho / 2)` over the grid and jet orders checked.
    pub max_margin: f64,
    /// Orders `h <= jet_order` were checked during calibration.
    pub jet_order: usize,
    /// `min |denominator|` over the grid: proximity proxy to the variety.
    pub theta_distance: f64,
}

/// Find the smallest `nu` on a geometric grid `nu_0 2^k` such that every
/// scaled jet entry stays within `rho / 2` on the grid.
pub fn calibrate(
    spec: &XSpec,
    grid: &[(Complex64, Complex64)],
    r: f64,
    rho: f64,
    jet_order: usize,
) -> Result<CompactRegion> {
    if rho <= 1.0 {
        return Err(Error::Config(format!("rho = {rho} but rho > 1 is required")));
    }
    if grid.is_empty() {
        return Err(Error::Config("calibration grid is empty".into()));
    }
    // raw magnitudes |∂_z^h X| / h! per point, plus the variety proxy
    let rows = exec::map(grid.to_vec(), |(t, z)| -> Result<(Vec<f64>, f64)> {
        let jets = spec.x_jets(t, z, jet_order, 1.0)?;
        Ok((
            jets.into_iter().map(|c| c.norm()).collect(),
            spec.theta_proximity(t, z),
        ))
    });
    let mut raw: Vec<Vec<f64>> = Vec::with_capacity(rows.len());
    let mut theta_distance = f64::INFINITY;
    for row in rows {
        let (mags, prox) = row?;
        theta_distance = theta_distance.min(prox);
        raw.push(mags);
    }
    let sup_x = raw.iter().map(|m| m[0]).fold(0.0, f64::max);
    let rho_half = rho / 2.0;
    if sup_x > rho_half {
        return Err(Error::CalibrationInfeasible { sup_x, rho_half });
    }
    let margin_for = |nu: f64| -> f64 {
        raw.iter()
            .flat_map(|mags| {
                mags.iter()
                    .enumerate()
                    .map(move |(h, m)| m / nu.powi(h as i32) / rho_half)
            })
            .fold(0.0, f64::max)
    };
    let nu0 = 1.0 / 16.0;
    for k in 0..80 {
        let nu = nu0 * 2f64.powi(k);
        let margin = margin_for(nu);
        if margin <= 1.0 {
            return Ok(CompactRegion {
                grid: grid.to_vec(),
                r,
                rho,
                nu,
                sup_x,
                max_margin: margin,
                jet_order,
                theta_distance,
            });
        }
    }
    Err(Error::Config(
        "no nu on the geometric search grid bounds the scaled jets".into(),
    ))
}

/// Square `n x n` grid of `(t, z)` points centered at `(ct, cz)` with the
/// given half-width in both real coordinates.
pub fn grid_square(ct: Complex64, cz: Complex64, half_width: f64, n: usize) -> Vec<(Complex64, Complex64)> {
    let mut out = Vec::with_capacity(n * n);
    let step = if n > 1 { 2.0 * half_width / (n - 1) as f64 } else { 0.0 };
    for i in 0..n {
        for j in 0..n {
            let dt = -half_width + step * i as f64;
            let dz = -half_width + step * j as f64;
            out.push((ct + Complex64::new(dt, 0.0), cz + Complex64::new(dz, 0.0)));
        }
    }
    out
}
