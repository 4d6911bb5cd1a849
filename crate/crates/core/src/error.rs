use crate::index::MultiIndex;

/// Errors produced by the solver pipeline.
///
/// `Config` covers bad problem data and mismatched truncation settings,
/// `Index` covers out-of-range variable or level access, and the remaining
/// variants carry the diagnostic payload named in their message.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("index error: {0}")]
    Index(String),

    #[error("singular point: |denominator| = {denom_abs:.3e} at (t, z) = ({t}, {z})")]
    SingularPoint {
        t: num_complex::Complex64,
        z: num_complex::Complex64,
        denom_abs: f64,
    },

    #[error("calibration infeasible: sup |X| = {sup_x:.6} exceeds rho/2 = {rho_half:.6} on the grid")]
    CalibrationInfeasible { sup_x: f64, rho_half: f64 },

    #[error("index cap exceeded during a shifted lookup at level {level}, index {index}")]
    CapOverflow { level: usize, index: MultiIndex },

    #[error("degree budget exhausted: order {requested} requested, order {achievable} achievable with the current budget")]
    BudgetExhausted { requested: usize, achievable: usize },

    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("constraint violation: {0}")]
    Constraint(String),

    #[error("internal invariant violation: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
