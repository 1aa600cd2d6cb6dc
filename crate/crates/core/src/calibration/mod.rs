//! Levenberg–Marquardt calibration of the five Heston parameters to
//! observed prices.
//!
//! The driver ([`calibrate`]) sees the pricing layer only through
//! [`PricingBackend`]: KSWIFT groups quotes by maturity, the plain SWIFT
//! backend evaluates every quote from scratch and the reference backend
//! integrates each quote by Gauss–Legendre quadrature. Parameters and
//! Jacobian columns follow the gradient order `(v0, v_bar, sigma, kappa, rho)`.

mod backend;
mod lm;

use thiserror::Error;

use crate::error::PricingError;
use crate::heston::HestonParams;
use crate::swift::OptionQuote;

pub use backend::{Grouping, KSwiftBackend, PricingBackend, ReferenceBackend, SwiftBackend};
pub use lm::{
    calibrate, damped_step, lm_step, Bounds, CalibrationConfig, CalibrationResult, Damping,
    IterationRecord, StopReason,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error("pricing failed for {quote}: {source}")]
    Pricing {
        quote: String,
        #[source]
        source: PricingError,
    },

    #[error("quote {index} has no observed price")]
    MissingPrice { index: usize },

    /// The damped normal matrix could not be factorised.
    #[error("singular damped system at mu = {mu:e}")]
    SingularSystem { mu: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl CalibrationError {
    /// The underlying pricing failure, if any.
    pub fn pricing_source(&self) -> Option<&PricingError> {
        match self {
            Self::Pricing { source, .. } => Some(source),
            _ => None,
        }
    }
}

fn observed_prices(quotes: &[OptionQuote]) -> Result<Vec<f64>, CalibrationError> {
    quotes
        .iter()
        .enumerate()
        .map(|(index, q)| q.price.ok_or(CalibrationError::MissingPrice { index }))
        .collect()
}

/// `r_i = V(θ; x_i, τ_i) − V*_i` in quote order.
pub fn residuals(
    theta: &HestonParams,
    backend: &dyn PricingBackend,
) -> Result<Vec<f64>, CalibrationError> {
    let observed = observed_prices(backend.quotes())?;
    Ok(backend
        .prices(theta)?
        .into_iter()
        .zip(observed)
        .map(|(p, o)| p - o)
        .collect())
}

/// `½‖r‖²`.
pub fn objective(residuals: &[f64]) -> f64 {
    0.5 * residuals.iter().map(|r| r * r).sum::<f64>()
}

/// Copies of `quotes` carrying the backend's prices at `theta`.
pub fn with_model_prices(
    theta: &HestonParams,
    backend: &dyn PricingBackend,
) -> Result<Vec<OptionQuote>, CalibrationError> {
    Ok(backend
        .quotes()
        .iter()
        .zip(backend.prices(theta)?)
        .map(|(q, p)| q.with_price(p))
        .collect())
}
