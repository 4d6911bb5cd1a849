//! Truncated holomorphic series solutions of linear PDEs in three complex
//! variables whose coefficients are singular along an analytic variety.
//!
//! The solution `Y(t, z, w)` is assembled from a hierarchy of coefficient
//! polynomials in infinitely many variables (one per `z`-derivative of the
//! singular closed form `X(t, z)`), together with a majorant recursion, a
//! family of weighted series norms, and a nilpotent fixed-point operator that
//! certifies convergence and exponential growth bounds near the variety.
//!
//! Modules:
//! * [`index`], [`poly`], [`series`] — sparse multi-index Taylor algebra;
//! * [`jets`], [`xflow`] — closed-form `X` families, jets, calibration;
//! * [`problem`] — problem instances and the shape constraint gate;
//! * [`recursion`] — the coefficient recursion for the series solution;
//! * [`majorant`] — sup-sequence tables and the dominating recursion;
//! * [`norms`] — weighted series norms and their operator estimates;
//! * [`fixed_point`] — order-raising operators and Picard iteration;
//! * [`assembly`] — solution assembly, residuals, growth profiles;
//! * [`oracle`] — an independent direct power-series solver;
//! * [`config`], [`report`] — problem-file ingestion and CSV export;
//! * [`exec`] — data-parallel map helpers behind the `parallel` feature.
//!
//! ```
//! use pde_series::{assembly, fixtures, recursion::compute_phi, xflow::calibrate, Complex64};
//!
//! let problem = fixtures::example1(8);
//! let region = calibrate(&problem.x, &fixtures::example1_grid(3), problem.radius, 2.0, 13)?;
//! let phi = compute_phi(&problem, region.nu, 12)?;
//! let (t, z, w) = (
//!     Complex64::new(0.1, 0.0),
//!     Complex64::new(0.05, 0.0),
//!     Complex64::new(0.2, 0.0),
//! );
//! let y = assembly::assemble_y(&problem, &phi, t, z, w)?;
//! // at w = 0 the solution reproduces the first initial datum
//! let y0 = assembly::assemble_y(&problem, &phi, t, z, Complex64::ZERO)?;
//! let omega0 = problem.omega_j(0).eval(&[t, z, Complex64::ZERO])?;
//! assert!((y0 - omega0).norm() < 1e-12 && y.norm() > 0.0);
//! # Ok::<(), pde_series::Error>(())
//! ```

// level recursions and jet sums are index-driven; explicit loops read clearer
#![allow(clippy::needless_range_loop)]

pub mod assembly;
pub mod config;
pub mod error;
pub mod exec;
pub mod fixed_point;
pub mod fixtures;
pub mod index;
pub mod jets;
pub mod majorant;
pub mod norms;
pub mod oracle;
pub mod poly;
pub mod problem;
pub mod recursion;
pub mod report;
pub mod series;
pub mod xflow;

pub use error::{Error, Result};
pub use num_complex::Complex64;
