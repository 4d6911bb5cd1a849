//! Problem-file ingestion: a structured-text (TOML) document with nested
//! sections for the equation data, the closed form, radii, norm parameters,
//! initial data, truncation orders and evaluation grids.
//!
//! Loading validates everything: schema, structural invariants, and the
//! integer shape constraints. A constraint failure surfaces the violated
//! inequality verbatim so the fix is obvious from the error alone.

use crate::error::{Error, Result};
use crate::index::MultiIndex;
use crate::norms::NormParams;
use crate::poly::TruncatedPoly;
use crate::problem::{validate_constraints, CoefficientFamily, ProblemSpec};
use crate::xflow::{XFamily, XSpec};
use num_complex::Complex64;
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermEntry {
    /// Exponents: `[n0, n1]` for bivariate data, `[n0, n1, l0]` for
    /// three-variable data.
    e: Vec<u32>,
    /// Coefficient `[re, im]`.
    c: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyEntry {
    terms: Vec<TermEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BEntry {
    m: usize,
    k: usize,
    alpha: usize,
    terms: Vec<TermEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PdeSection {
    s_order: usize,
    ks: Vec<usize>,
    /// `w`-convergence radius metadata for the coefficient data.
    w_radius: f64,
    b: Vec<BEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct XSection {
    family: String,
    /// Univariate coefficients of the initial datum, each `[re, im]`.
    f: Vec<[f64; 2]>,
    d: usize,
    a: PolyEntry,
    a_p: Vec<PolyEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RadiiSection {
    r: f64,
    r_prime: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OmegaEntry {
    j: usize,
    terms: Vec<TermEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DataSection {
    omega: Vec<OmegaEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OrdersSection {
    a_order: usize,
    degree_cap: usize,
    d_tz: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    center_t: [f64; 2],
    center_z: [f64; 2],
    half_width: f64,
    points_per_axis: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    pde: PdeSection,
    x: XSection,
    radii: RadiiSection,
    norm: NormParams,
    data: DataSection,
    orders: OrdersSection,
    grid: GridSection,
    #[serde(default)]
    profile: Vec<GridSection>,
}

/// Truncation orders carried alongside the problem.
#[derive(Clone, Copy, Debug)]
pub struct Orders {
    pub a_order: usize,
    pub degree_cap: usize,
    pub d_tz: usize,
}

/// A fully validated problem plus its evaluation grids and norm template.
#[derive(Clone, Debug)]
pub struct LoadedProblem {
    pub problem: ProblemSpec,
    pub norm: NormParams,
    pub orders: Orders,
    pub base_grid: Vec<(Complex64, Complex64)>,
    pub profile_grids: Vec<Vec<(Complex64, Complex64)>>,
    /// FNV-1a hash of the source bytes, embedded in every report.
    pub source_hash: u64,
}

fn parse_poly(entry: &PolyEntry, path: &str, dims: usize, cap: usize) -> Result<TruncatedPoly> {
    let mut terms = Vec::with_capacity(entry.terms.len());
    for (i, term) in entry.terms.iter().enumerate() {
        if term.e.len() != dims {
            return Err(Error::Schema {
                path: format!("{path}.terms[{i}].e"),
                message: format!("expected {dims} exponents, found {}", term.e.len()),
            });
        }
        let l = if dims == 3 { vec![term.e[2]] } else { vec![] };
        terms.push((
            MultiIndex::new(term.e[0], term.e[1], &l),
            Complex64::new(term.c[0], term.c[1]),
        ));
    }
    TruncatedPoly::from_terms(terms, 0, cap)
}

fn grid_points(section: &GridSection) -> Vec<(Complex64, Complex64)> {
    crate::xflow::grid_square(
        Complex64::new(section.center_t[0], section.center_t[1]),
        Complex64::new(section.center_z[0], section.center_z[1]),
        section.half_width,
        section.points_per_axis,
    )
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Parse, build and validate a problem document.
pub fn load_problem_str(source: &str) -> Result<LoadedProblem> {
    load_problem_str_with(source, None)
}

/// Same with an optional space-degree override (the cap is baked into every
/// polynomial, so it must be applied at parse time).
pub fn load_problem_str_with(source: &str, degree_cap: Option<usize>) -> Result<LoadedProblem> {
    let file: ProblemFile = toml::from_str(source).map_err(|e| Error::Schema {
        path: "document".into(),
        message: e.to_string(),
    })?;
    let cap = degree_cap.unwrap_or(file.orders.degree_cap);
    let family = match file.x.family.as_str() {
        "shift" => XFamily::Shift,
        "exponential" => XFamily::Exponential,
        other => {
            return Err(Error::Schema {
                path: "x.family".into(),
                message: format!("unknown family {other:?} (expected shift or exponential)"),
            })
        }
    };
    let mut a_p = Vec::with_capacity(file.x.a_p.len());
    for (i, entry) in file.x.a_p.iter().enumerate() {
        a_p.push(parse_poly(entry, &format!("x.a_p[{i}]"), 2, cap)?);
    }
    let x = XSpec {
        family,
        f: file.x.f.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
        a: parse_poly(&file.x.a, "x.a", 2, cap)?,
        a_p,
        d: file.x.d,
        r_prime: file.radii.r_prime,
    };
    let mut coeffs = CoefficientFamily::new(file.pde.w_radius);
    for (i, entry) in file.pde.b.iter().enumerate() {
        if !file.pde.ks.contains(&entry.k) {
            return Err(Error::Schema {
                path: format!("pde.b[{i}].k"),
                message: format!("shift {} is not in pde.ks", entry.k),
            });
        }
        let poly = parse_poly(
            &PolyEntry {
                terms: entry.terms.iter().map(|t| TermEntry { e: t.e.clone(), c: t.c }).collect(),
            },
            &format!("pde.b[{i}]"),
            3,
            cap,
        )?;
        coeffs.set(entry.m, entry.k, entry.alpha, poly)?;
    }
    let mut omega_max = 0usize;
    for entry in &file.data.omega {
        omega_max = omega_max.max(entry.j);
    }
    let mut omega = vec![TruncatedPoly::zero(0, cap); omega_max + 1];
    for (i, entry) in file.data.omega.iter().enumerate() {
        omega[entry.j] = parse_poly(
            &PolyEntry {
                terms: entry.terms.iter().map(|t| TermEntry { e: t.e.clone(), c: t.c }).collect(),
            },
            &format!("data.omega[{i}]"),
            2,
            cap,
        )?;
    }
    let problem = ProblemSpec {
        s_order: file.pde.s_order,
        ks: file.pde.ks.clone(),
        coeffs,
        x,
        omega,
        b_exponent: file.norm.b,
        radius: file.radii.r,
        degree_cap: cap,
    };
    problem.validate()?;
    let report = validate_constraints(&problem)?;
    if !report.pass {
        let violations: Vec<String> = report
            .rows
            .iter()
            .flat_map(|r| r.violations.iter().cloned())
            .collect();
        return Err(Error::Constraint(format!(
            "s_order = {} is inadmissible (minimal S = {}): {}",
            problem.s_order,
            report.minimal_s,
            violations.join("; ")
        )));
    }
    Ok(LoadedProblem {
        problem,
        norm: file.norm,
        orders: Orders {
            a_order: file.orders.a_order,
            degree_cap: cap,
            d_tz: file.orders.d_tz,
        },
        base_grid: grid_points(&file.grid),
        profile_grids: file.profile.iter().map(grid_points).collect(),
        source_hash: fnv1a(source.as_bytes()),
    })
}

/// Load a problem document from disk.
pub fn load_problem(path: &Path) -> Result<LoadedProblem> {
    load_problem_with(path, None)
}

/// Load with a space-degree override.
pub fn load_problem_with(path: &Path, degree_cap: Option<usize>) -> Result<LoadedProblem> {
    let source = std::fs::read_to_string(path)?;
    load_problem_str_with(&source, degree_cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture_source() -> String {
        std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/fixtures/example1.problem"
        ))
        .expect("bundled fixture")
    }

    #[test]
    fn bundled_fixture_loads_and_matches_builtin() {
        let loaded = load_problem_str(&fixture_source()).unwrap();
        let builtin = crate::fixtures::example1(loaded.orders.degree_cap);
        assert_eq!(loaded.problem.s_order, builtin.s_order);
        assert_eq!(loaded.problem.ks, builtin.ks);
        assert_eq!(loaded.problem.omega.len(), builtin.omega.len());
        for j in 0..builtin.omega.len() {
            assert_eq!(
                loaded.problem.omega_j(j).divided_coeffs(),
                builtin.omega_j(j).divided_coeffs(),
                "omega_{j} differs"
            );
        }
        for m in 1..=3 {
            for alpha in 0..=1 {
                let a = loaded.problem.coeffs.get(m, 0, alpha).cloned();
                let b = builtin.coeffs.get(m, 0, alpha).cloned();
                assert_eq!(a.is_some(), b.is_some(), "b_{{{m},0,{alpha}}} presence");
                if let (Some(a), Some(b)) = (a, b) {
                    assert_eq!(a.divided_coeffs(), b.divided_coeffs());
                }
            }
        }
        assert_eq!(loaded.base_grid.len(), 16);
        assert_eq!(loaded.profile_grids.len(), 5);
    }

    #[test]
    fn missing_field_names_the_path() {
        let broken = fixture_source().replace("d = 2", "");
        match load_problem_str(&broken) {
            Err(Error::Schema { message, .. }) => {
                assert!(message.contains('d'), "message: {message}");
            }
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn inadmissible_order_cites_the_inequality() {
        let lowered = fixture_source().replace("s_order = 10", "s_order = 9");
        match load_problem_str(&lowered) {
            Err(Error::Constraint(msg)) => {
                assert!(msg.contains("minimal S = 10"), "message: {msg}");
                assert!(msg.contains("k + 1 + max"), "message: {msg}");
            }
            other => panic!("expected constraint error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_family_rejected() {
        let broken = fixture_source().replace("family = \"shift\"", "family = \"spiral\"");
        match load_problem_str(&broken) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "x.family"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn hash_is_stable() {
        let a = load_problem_str(&fixture_source()).unwrap().source_hash;
        let b = load_problem_str(&fixture_source()).unwrap().source_hash;
        assert_eq!(a, b);
        let c = load_problem_str(&fixture_source().replace("0.4", "0.41"))
            .unwrap()
            .source_hash;
        assert_ne!(a, c);
    }
}
