use thiserror::Error;

/// Failure modes of the analysis pipeline.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("resonance at n = {n} is inconsistent (relative defect {defect:.3e})")]
    ResonanceInconsistent { n: usize, defect: f64 },
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("estimated slope {estimate:.6} matches no diagram slope")]
    NoSectorMatch { estimate: f64 },
    #[error("estimated modulus {estimate:.6} matches no characteristic root modulus")]
    NoModulusMatch { estimate: f64 },
    #[error("growth restriction violated: log|y(n)|/n^2 tends to {limit:.6}, not 0")]
    GrowthRestrictionViolated { limit: f64 },
    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),
    #[error("dominant roots do not differ by roots of unity: {0}")]
    UnityHypothesisFailed(String),
    #[error("argument principle counted {found} zeros, expected {expected}")]
    ZeroCountMismatch { found: i64, expected: i64 },
    #[error("zero audit failed on {annulus}: winding {winding}, listed {listed}")]
    AuditMismatch { annulus: String, winding: i64, listed: i64 },
    #[error("no commensuration period up to {l_max}")]
    NoCommensuration { l_max: u32 },
    #[error("{found} progression classes exceed the bound {bound}")]
    ClusterCountExceeded { found: usize, bound: usize },
    #[error("progression residuals do not decay: {0}")]
    NonConvergentResiduals(String),
    #[error("singular step at n = {0}")]
    SingularStep(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
