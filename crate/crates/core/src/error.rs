use num_complex::Complex64;
use thiserror::Error;

/// Failures raised by the pricing layers (characteristic function, SWIFT,
/// reference quadrature).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PricingError {
    /// The characteristic function left the floating-point range.
    #[error("characteristic function overflow at u = {u} (tau = {tau})")]
    Overflow { u: Complex64, tau: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An adaptive parameter search ran into its configured cap.
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T, E = PricingError> = std::result::Result<T, E>;
