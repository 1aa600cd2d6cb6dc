//! SWIFT (Shannon wavelets inverse Fourier technique) pricing.
//!
//! A call price is `K e^{−rτ} Σ_k D*_k(x) U*_k` where `D*_k` are the wavelet
//! coefficients of the log-return density, shifted by the log-moneyness
//! `x = ln(S_0/K)`, and `U*_k` those of the unit-strike payoff. Because the
//! transform factorises as `f̂(u; x) = e^{−iux} f̂(u)`, strikes sharing a
//! maturity reuse one set of transform evaluations
//! ([`MultiStrikePricer`]).
//!
//! The pricers expand the put payoff `(1 − e^y)^+` and return calls through
//! put-call parity. The call payoff grows like `e^y`, so cutting it at
//! `x_high` leaves an error proportional to `e^{x_high}` times the right
//! tail of the density, which is heavy (exponential) for long maturities;
//! the put payoff is bounded by one.

mod coefficients;
mod params;
mod pricer;
mod quote;
mod spline;

pub use coefficients::{
    cosine_node, cosine_sum, cosine_sum_direct, density_area, density_coefficients,
    density_coefficients_direct, density_frequencies, density_gradient_coefficients,
    density_gradient_coefficients_direct, payoff_coefficients, payoff_coefficients_direct,
    payoff_integral, strike_free_payoff, strike_free_payoff_direct, CoefficientSet,
};
pub use params::{
    select_params, select_scale, select_scale_with, select_truncation, select_truncation_with,
    transform_tail, truncation_at_scale, SelectionConfig, SwiftParams,
};
pub use pricer::{
    price_and_gradient_multi_strike, price_multi_strike, price_single, price_strike_grid,
    price_strike_grid_leg, price_strike_grid_otm, strike_grid_point, MultiStrikePricer,
};
pub use quote::{convert_by_parity, parity_gap, OptionKind, OptionQuote};
pub use spline::NaturalCubicSpline;
