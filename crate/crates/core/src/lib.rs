//! Heston model option pricing with the SWIFT Shannon-wavelet method and
//! Levenberg–Marquardt calibration.
//!
//! * [`heston`]: characteristic function (two forms), analytic gradient, cumulants.
//! * [`swift`]: SWIFT parameter selection, coefficients, single / multi-strike /
//!   strike-grid pricers and price Jacobians.
//! * [`reference`]: Gauss–Legendre Fourier-inversion pricer used for cross-checks.
//! * [`calibration`]: LM driver over pluggable pricing backends.
//! * [`harness`]: quote files, fixtures, reports and the experiment commands
//!   behind the `heston-swift` binary.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod error;
pub mod harness;
pub mod heston;
pub mod reference;
pub mod swift;

pub use error::{PricingError, Result};
pub use heston::{ChfEvaluation, ChfForm, HestonParams, MarketContext};
pub use swift::{OptionKind, OptionQuote, SwiftParams};
