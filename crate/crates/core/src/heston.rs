//! Heston model: parameters, the closed-form characteristic function of the
//! log-return in two algebraic forms, its analytic parameter gradient and
//! the first cumulants of the log-return.
//!
//! Sign convention: the transform is `f̂(u) = E[exp(-i u y)]` with
//! `y = ln(S_T / S_0)`, so `f̂(i) = exp((r - q) τ)` and the strike-shifted
//! transform is `f̂(u; x) = exp(-i u x) f̂(u)` with `x = ln(S_0 / K)`.
//!
//! Gradients are always ordered `(v0, v_bar, sigma, kappa, rho)`; see
//! [`GRADIENT_ORDER`]. This differs from the field order of
//! [`HestonParams`], so go through [`HestonParams::to_array`] and
//! [`HestonParams::from_array`] whenever a flat vector is needed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};

/// Parameter names in gradient / Jacobian column order.
pub const GRADIENT_ORDER: [&str; 5] = ["v0", "v_bar", "sigma", "kappa", "rho"];

pub const IDX_V0: usize = 0;
pub const IDX_V_BAR: usize = 1;
pub const IDX_SIGMA: usize = 2;
pub const IDX_KAPPA: usize = 3;
pub const IDX_RHO: usize = 4;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HestonParams {
    /// Mean-reversion speed of the variance.
    pub kappa: f64,
    /// Long-run variance.
    pub v_bar: f64,
    /// Volatility of variance.
    pub sigma: f64,
    /// Correlation between the asset and variance drivers.
    pub rho: f64,
    /// Spot variance.
    pub v0: f64,
}

impl HestonParams {
    pub fn new(kappa: f64, v_bar: f64, sigma: f64, rho: f64, v0: f64) -> Result<Self> {
        let p = Self {
            kappa,
            v_bar,
            sigma,
            rho,
            v0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("kappa", self.kappa),
            ("v_bar", self.v_bar),
            ("sigma", self.sigma),
            ("v0", self.v0),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(PricingError::InvalidInput(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if !(self.rho.is_finite() && (-1.0..=1.0).contains(&self.rho)) {
            return Err(PricingError::InvalidInput(format!(
                "rho must lie in [-1, 1], got {}",
                self.rho
            )));
        }
        Ok(())
    }

    /// Flat vector in gradient order `(v0, v_bar, sigma, kappa, rho)`.
    pub fn to_array(&self) -> [f64; 5] {
        [self.v0, self.v_bar, self.sigma, self.kappa, self.rho]
    }

    /// Inverse of [`to_array`](Self::to_array). Does not validate.
    pub fn from_array(a: [f64; 5]) -> Self {
        Self {
            v0: a[IDX_V0],
            v_bar: a[IDX_V_BAR],
            sigma: a[IDX_SIGMA],
            kappa: a[IDX_KAPPA],
            rho: a[IDX_RHO],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketContext {
    pub spot: f64,
    pub rate: f64,
    #[serde(default)]
    pub dividend: f64,
}

impl MarketContext {
    pub fn new(spot: f64, rate: f64, dividend: f64) -> Result<Self> {
        if !(spot.is_finite() && spot > 0.0) {
            return Err(PricingError::InvalidInput(format!(
                "spot must be positive, got {spot}"
            )));
        }
        if !rate.is_finite() || !dividend.is_finite() {
            return Err(PricingError::InvalidInput(
                "rate and dividend must be finite".into(),
            ));
        }
        Ok(Self {
            spot,
            rate,
            dividend,
        })
    }

    /// Log-moneyness `ln(S_0 / K)`.
    pub fn log_moneyness(&self, strike: f64) -> f64 {
        (self.spot / strike).ln()
    }
}

/// Which closed form of the characteristic function to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChfForm {
    /// Exponential form with hyperbolic intermediates and simple gradients.
    #[default]
    Cui,
    /// The "little trap" form, used as a long-maturity fallback.
    Schoutens,
}

impl ChfForm {
    pub fn eval(
        self,
        u: Complex64,
        tau: f64,
        theta: &HestonParams,
        ctx: &MarketContext,
    ) -> Result<Complex64> {
        match self {
            ChfForm::Cui => chf_cui(u, tau, theta, ctx),
            ChfForm::Schoutens => chf_schoutens(u, tau, theta, ctx),
        }
    }
}

impl std::str::FromStr for ChfForm {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cui" => Ok(ChfForm::Cui),
            "schoutens" => Ok(ChfForm::Schoutens),
            other => Err(format!(
                "unknown ChF form '{other}' (expected cui or schoutens)"
            )),
        }
    }
}

/// How the hyperbolic functions inside the Cui form are evaluated.
///
/// `Naive` evaluates `cosh(dτ/2)` and `sinh(dτ/2)` directly and overflows
/// for long maturities or large frequencies. It exists to reproduce that
/// failure in tests; pricing code always uses `Stabilized`.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    Stabilized,
    Naive,
}

/// `f̂` and optionally its parameter gradient at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChfEvaluation {
    pub value: Complex64,
    /// `h(u) f̂(u)` in [`GRADIENT_ORDER`].
    pub gradient: Option<[Complex64; 5]>,
}

fn check_inputs(tau: f64, theta: &HestonParams) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(PricingError::InvalidInput(format!(
            "maturity must be positive, got {tau}"
        )));
    }
    theta.validate()
}

/// Intermediates of the Cui form. The hyperbolic pair is carried scaled by
/// `exp(-dτ/2)` in stabilized mode; every quantity built from it (`a1`,
/// `a2` and their partials) shares that factor, and it cancels in all the
/// ratios that reach the exponent.
struct CuiTerms {
    iu: Complex64,
    /// `u² - iu`
    w: Complex64,
    xi: Complex64,
    d: Complex64,
    ch: Complex64,
    sh: Complex64,
    a1: Complex64,
    a2: Complex64,
    a: Complex64,
    log_b: Complex64,
}

impl CuiTerms {
    fn new(u: Complex64, tau: f64, theta: &HestonParams, mode: Evaluation) -> Self {
        let HestonParams {
            kappa,
            sigma,
            rho,
            v0,
            ..
        } = *theta;
        let iu = I * u;
        let w = u * u - iu;
        let xi = kappa + sigma * rho * iu;
        let d = (xi * xi + sigma * sigma * w).sqrt();
        let e = (-d * tau).exp();
        let (ch, sh) = match mode {
            Evaluation::Stabilized => ((1.0 + e) * 0.5, (1.0 - e) * 0.5),
            Evaluation::Naive => ((d * tau * 0.5).cosh(), (d * tau * 0.5).sinh()),
        };
        let a1 = w * sh;
        let a2 = (d * ch + xi * sh) / v0;
        let a = a1 / a2;
        let log_b = (d / v0).ln() + (kappa - d) * tau * 0.5
            - ((d + xi) / (2.0 * v0) + (d - xi) / (2.0 * v0) * e).ln();
        Self {
            iu,
            w,
            xi,
            d,
            ch,
            sh,
            a1,
            a2,
            a,
            log_b,
        }
    }

    fn exponent(&self, tau: f64, theta: &HestonParams, ctx: &MarketContext) -> Complex64 {
        let HestonParams {
            kappa,
            v_bar,
            sigma,
            rho,
            ..
        } = *theta;
        -self.iu * (ctx.rate - ctx.dividend) * tau + kappa * v_bar * rho * tau * self.iu / sigma
            - self.a
            + 2.0 * kappa * v_bar / (sigma * sigma) * self.log_b
    }

    /// `h(u)` in gradient order.
    fn h(&self, tau: f64, theta: &HestonParams) -> [Complex64; 5] {
        let HestonParams {
            kappa,
            v_bar,
            sigma,
            rho,
            v0,
        } = *theta;
        let Self {
            iu,
            w,
            xi,
            d,
            ch,
            sh,
            a1,
            a2,
            a,
            log_b,
        } = *self;

        // rho-partials, kept divided by iu so that the kappa partials (which
        // carry 1/(σ i u)) stay finite as u -> 0.
        let d_rho = xi * sigma * iu / d;
        let a1_rho_iu = w * tau * xi * sigma / (2.0 * d) * ch;
        let a2_rho_iu = sigma * (2.0 + xi * tau) / (2.0 * d * v0) * (xi * ch + d * sh);
        let a_rho_iu = (a1_rho_iu - a * a2_rho_iu) / a2;
        let a_rho = iu * a_rho_iu;
        let logb_rho = d_rho / d - iu * a2_rho_iu / a2;

        let a_kappa = a_rho_iu / sigma;
        let logb_kappa = xi / (d * d) - a2_rho_iu / (sigma * a2) + tau * 0.5;

        let d_sigma = (rho * xi * iu + sigma * w) / d;
        let a1_sigma = w * tau * 0.5 * d_sigma * ch;
        let a2_sigma = rho / sigma * iu * a2_rho_iu
            + (2.0 + tau * xi) * w * sigma / (2.0 * d * v0) * ch
            + sigma * tau * a1 / (2.0 * v0);
        let a_sigma = (a1_sigma - a * a2_sigma) / a2;
        let logb_sigma = d_sigma / d - a2_sigma / a2;

        let s2 = sigma * sigma;
        let h_v0 = -a / v0;
        let h_v_bar = 2.0 * kappa / s2 * log_b + kappa * rho * tau * iu / sigma;
        let h_sigma = -a_sigma - 4.0 * kappa * v_bar / (s2 * sigma) * log_b
            + 2.0 * kappa * v_bar / s2 * logb_sigma
            - kappa * v_bar * rho * tau * iu / s2;
        let h_kappa = -a_kappa
            + 2.0 * v_bar / s2 * log_b
            + 2.0 * kappa * v_bar / s2 * logb_kappa
            + v_bar * rho * tau * iu / sigma;
        let h_rho = -a_rho + 2.0 * kappa * v_bar / s2 * logb_rho + kappa * v_bar * tau * iu / sigma;
        [h_v0, h_v_bar, h_sigma, h_kappa, h_rho]
    }
}

fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Cui form of `f̂(u)` (stabilized).
pub fn chf_cui(
    u: Complex64,
    tau: f64,
    theta: &HestonParams,
    ctx: &MarketContext,
) -> Result<Complex64> {
    chf_cui_with(u, tau, theta, ctx, Evaluation::Stabilized)
}

#[doc(hidden)]
pub fn chf_cui_with(
    u: Complex64,
    tau: f64,
    theta: &HestonParams,
    ctx: &MarketContext,
    mode: Evaluation,
) -> Result<Complex64> {
    check_inputs(tau, theta)?;
    if u == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let terms = CuiTerms::new(u, tau, theta, mode);
    let value = terms.exponent(tau, theta, ctx).exp();
    if !finite(value) {
        return Err(PricingError::Overflow { u, tau });
    }
    Ok(value)
}

/// Schoutens ("little trap") form of `f̂(u)`.
pub fn chf_schoutens(
    u: Complex64,
    tau: f64,
    theta: &HestonParams,
    ctx: &MarketContext,
) -> Result<Complex64> {
    check_inputs(tau, theta)?;
    if u == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let HestonParams {
        kappa,
        v_bar,
        sigma,
        rho,
        v0,
    } = *theta;
    // Standard E[exp(i v y)] evaluated at v = -u.
    let v = -u;
    let iv = I * v;
    let xi = kappa - sigma * rho * iv;
    let d = (xi * xi + sigma * sigma * (v * v + iv)).sqrt();
    let g = (xi - d) / (xi + d);
    let e = (-d * tau).exp();
    let s2 = sigma * sigma;
    let c = iv * (ctx.rate - ctx.dividend) * tau
        + kappa * v_bar / s2 * ((xi - d) * tau - 2.0 * ((1.0 - g * e) / (1.0 - g)).ln());
    let dv = (xi - d) / s2 * (1.0 - e) / (1.0 - g * e);
    let value = (c + dv * v0).exp();
    if !finite(value) {
        return Err(PricingError::Overflow { u, tau });
    }
    Ok(value)
}

/// `f̂(u)` together with `∇f̂(u) = h(u) f̂(u)` (Cui form, stabilized).
pub fn chf_gradient(
    u: Complex64,
    tau: f64,
    theta: &HestonParams,
    ctx: &MarketContext,
) -> Result<ChfEvaluation> {
    chf_gradient_with(u, tau, theta, ctx, Evaluation::Stabilized)
}

#[doc(hidden)]
pub fn chf_gradient_with(
    u: Complex64,
    tau: f64,
    theta: &HestonParams,
    ctx: &MarketContext,
    mode: Evaluation,
) -> Result<ChfEvaluation> {
    check_inputs(tau, theta)?;
    let zero = Complex64::new(0.0, 0.0);
    if u == zero {
        return Ok(ChfEvaluation {
            value: Complex64::new(1.0, 0.0),
            gradient: Some([zero; 5]),
        });
    }
    let terms = CuiTerms::new(u, tau, theta, mode);
    let value = terms.exponent(tau, theta, ctx).exp();
    if !finite(value) {
        return Err(PricingError::Overflow { u, tau });
    }
    let h = terms.h(tau, theta);
    let mut gradient = [zero; 5];
    for (g, hi) in gradient.iter_mut().zip(h) {
        *g = hi * value;
        // An underflowed value makes 0 * inf possible in deep tails.
        if !finite(*g) {
            if value == zero {
                *g = zero;
            } else {
                return Err(PricingError::Overflow { u, tau });
            }
        }
    }
    Ok(ChfEvaluation {
        value,
        gradient: Some(gradient),
    })
}

/// First, second and fourth cumulants of `y = ln(S_T / S_0)`.
///
/// `c1` and `c2` are the closed-form Heston expressions; `c4` is reported
/// as zero and the truncation rule relies on the density-area check instead.
pub fn cumulants(theta: &HestonParams, tau: f64, ctx: &MarketContext) -> (f64, f64, f64) {
    let HestonParams {
        kappa,
        v_bar,
        sigma,
        rho,
        v0,
    } = *theta;
    let ekt = (-kappa * tau).exp();
    let c1 = (ctx.rate - ctx.dividend) * tau + (1.0 - ekt) * (v_bar - v0) / (2.0 * kappa)
        - 0.5 * v_bar * tau;
    let k2 = kappa * kappa;
    let s2 = sigma * sigma;
    let c2 = (sigma * tau * kappa * ekt * (v0 - v_bar) * (8.0 * kappa * rho - 4.0 * sigma)
        + kappa * rho * sigma * (1.0 - ekt) * (16.0 * v_bar - 8.0 * v0)
        + 2.0 * v_bar * kappa * tau * (-4.0 * kappa * rho * sigma + s2 + 4.0 * k2)
        + s2 * ((v_bar - 2.0 * v0) * (-2.0 * kappa * tau).exp()
            + v_bar * (4.0 * ekt - 5.0)
            + 2.0 * v0)
        + 8.0 * k2 * (v0 - v_bar) * (1.0 - ekt))
        / (8.0 * k2 * kappa);
    (c1, c2.max(0.0), 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn theta1() -> HestonParams {
        HestonParams::new(3.0, 0.1, 0.25, -0.8, 0.08).unwrap()
    }

    fn flat() -> MarketContext {
        MarketContext::new(100.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn normalization_is_exact() {
        let z = Complex64::new(0.0, 0.0);
        for tau in [0.01, 1.0, 45.0] {
            assert_eq!(
                chf_cui(z, tau, &theta1(), &flat()).unwrap(),
                Complex64::new(1.0, 0.0)
            );
            assert_eq!(
                chf_schoutens(z, tau, &theta1(), &flat()).unwrap(),
                Complex64::new(1.0, 0.0)
            );
        }
    }

    #[test]
    fn martingale_at_i() {
        let ctx = MarketContext::new(1.0, 0.03, 0.01).unwrap();
        for tau in [0.1, 1.0, 10.0] {
            let v = chf_cui(I, tau, &theta1(), &ctx).unwrap();
            assert_relative_eq!(v.re, (0.02 * tau).exp(), max_relative = 1e-10);
            assert!(v.im.abs() < 1e-10);
        }
    }

    #[test]
    fn gradient_vanishes_at_origin() {
        let g = chf_gradient(Complex64::new(0.0, 0.0), 0.5, &theta1(), &flat()).unwrap();
        assert!(g.gradient.unwrap().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn array_order_round_trips() {
        let t = theta1();
        assert_eq!(t.to_array(), [0.08, 0.1, 0.25, 3.0, -0.8]);
        assert_eq!(HestonParams::from_array(t.to_array()), t);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(HestonParams::new(-1.0, 0.1, 0.2, 0.0, 0.1).is_err());
        assert!(HestonParams::new(1.0, 0.1, 0.2, 1.5, 0.1).is_err());
        assert!(MarketContext::new(0.0, 0.0, 0.0).is_err());
        assert!(chf_cui(Complex64::new(1.0, 0.0), 0.0, &theta1(), &flat()).is_err());
    }

    #[test]
    fn naive_form_overflows_for_long_maturity() {
        let u = Complex64::new(400.0, 0.0);
        let err = chf_cui_with(u, 45.0, &theta1(), &flat(), Evaluation::Naive).unwrap_err();
        assert!(matches!(err, PricingError::Overflow { .. }));
        assert!(chf_cui(u, 45.0, &theta1(), &flat()).is_ok());
    }

    #[test]
    fn deterministic_variance_limit_of_c2() {
        let theta = HestonParams::new(1.0, 0.04, 1e-8, 0.0, 0.04).unwrap();
        let (_, c2, c4) = cumulants(&theta, 1.0, &flat());
        assert_relative_eq!(c2, 0.04, max_relative = 1e-6);
        assert_eq!(c4, 0.0);
    }
}
