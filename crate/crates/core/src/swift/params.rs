use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::coefficients::{density_area, density_coefficients};
use crate::error::{PricingError, Result};
use crate::heston::{chf_cui, cumulants, HestonParams, MarketContext};

/// Discretisation of one SWIFT expansion.
///
/// The wavelet index runs over `k = 1 - eta ..= eta` at scale `2^m`, so the
/// expansion covers the log-moneyness interval `[(1 - eta) / 2^m, eta / 2^m]`,
/// which contains `[x_low, x_high]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwiftParams {
    pub m: i32,
    pub eta: usize,
    /// Cosine terms used for the density coefficients (FFT length `2 j_density`).
    pub j_density: usize,
    /// Cosine terms used for the payoff coefficients (FFT length `2 j_payoff`).
    pub j_payoff: usize,
    /// Cumulant half-width around each strike.
    pub c: f64,
    pub x_low: f64,
    pub x_high: f64,
}

impl SwiftParams {
    /// Derives `eta` and a shared `J` from the scale and the interval.
    pub fn from_interval(m: i32, c: f64, x_low: f64, x_high: f64) -> Result<Self> {
        let extent = x_low.abs().max(x_high);
        let eta = ((2f64.powi(m) * extent).ceil() as usize).max(1);
        let j = minimal_cosine_terms(m, extent, eta);
        let sp = Self {
            m,
            eta,
            j_density: j,
            j_payoff: j,
            c,
            x_low,
            x_high,
        };
        sp.validate()?;
        Ok(sp)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(PricingError::InvalidInput(msg));
        if self.eta == 0 {
            return bad("eta must be positive".into());
        }
        for (name, j) in [("j_density", self.j_density), ("j_payoff", self.j_payoff)] {
            if !j.is_power_of_two() {
                return bad(format!("{name} = {j} is not a power of two"));
            }
            if 2 * self.eta >= j {
                return bad(format!(
                    "{name} = {j} must exceed 2 * eta = {}",
                    2 * self.eta
                ));
            }
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return bad(format!("c must be positive, got {}", self.c));
        }
        if !(self.x_low <= 0.0
            && self.x_high >= 0.0
            && self.x_low.is_finite()
            && self.x_high.is_finite())
        {
            return bad(format!(
                "interval [{}, {}] must contain 0",
                self.x_low, self.x_high
            ));
        }
        if !(-30..=30).contains(&self.m) {
            return bad(format!("scale m = {} out of range", self.m));
        }
        Ok(())
    }

    /// `2^m`.
    pub fn scale(&self) -> f64 {
        2f64.powi(self.m)
    }

    pub fn k_min(&self) -> i64 {
        1 - self.eta as i64
    }

    pub fn k_max(&self) -> i64 {
        self.eta as i64
    }

    /// Number of wavelet coefficients, `2 eta`.
    pub fn len(&self) -> usize {
        2 * self.eta
    }

    pub fn is_empty(&self) -> bool {
        self.eta == 0
    }

    /// Replaces `eta` and re-validates.
    pub fn with_eta(mut self, eta: usize) -> Result<Self> {
        self.eta = eta;
        self.validate()?;
        Ok(self)
    }

    /// Sets both `J` values and re-validates.
    pub fn with_j(mut self, j: usize) -> Result<Self> {
        self.j_density = j;
        self.j_payoff = j;
        self.validate()?;
        Ok(self)
    }

    /// Smallest parameters covering both `self` and `other`: the finer scale,
    /// the wider interval and the larger series lengths.
    pub fn union(&self, other: &Self) -> Result<Self> {
        let m = self.m.max(other.m);
        let c = self.c.max(other.c);
        let mut sp = Self::from_interval(
            m,
            c,
            self.x_low.min(other.x_low),
            self.x_high.max(other.x_high),
        )?;
        let grow = |a: usize, b: usize, c: usize| a.max(b).max(c);
        if self.m == m && other.m == m {
            sp.eta = grow(sp.eta, self.eta, other.eta);
        }
        let j = grow(sp.j_density, self.j_density, other.j_density).max(grow(
            sp.j_payoff,
            self.j_payoff,
            other.j_payoff,
        ));
        let j = j.max((2 * sp.eta + 1).next_power_of_two());
        sp.j_density = j;
        sp.j_payoff = j;
        sp.validate()?;
        Ok(sp)
    }
}

/// Smallest power of two with `J > 2 eta` and
/// `J >= (pi / 2) (2^m extent + eta)`.
fn minimal_cosine_terms(m: i32, extent: f64, eta: usize) -> usize {
    let bound = (PI / 2.0 * (2f64.powi(m) * extent + eta as f64)).ceil() as usize;
    let mut j = (2 * eta + 1).next_power_of_two();
    while j < bound {
        j *= 2;
    }
    j
}

/// Tolerances driving the automatic choice of [`SwiftParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Bound on the estimated transform tail mass beyond `2^m pi`.
    pub scale_tol: f64,
    /// Smallest scale tried.
    pub min_scale: i32,
    /// Largest scale tried before giving up.
    pub max_scale: i32,
    /// Width of the truncation interval in cumulant standard deviations (L).
    pub width: f64,
    /// Accepted deviation of the density area from one.
    pub area_tol: f64,
    /// Interval enlargements attempted per scale before moving to `m + 1`.
    pub max_widenings: u32,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            scale_tol: 1e-10,
            min_scale: 0,
            max_scale: 12,
            width: 10.0,
            area_tol: 1e-10,
            max_widenings: 6,
        }
    }
}

/// Tail estimate `(1/pi) \int_{a}^{4a} |f̂(u)| du` with `a = 2^m pi`.
pub fn transform_tail(theta: &HestonParams, tau: f64, ctx: &MarketContext, m: i32) -> Result<f64> {
    const PANELS: usize = 128;
    let a = 2f64.powi(m) * PI;
    let h = 3.0 * a / PANELS as f64;
    let mut sum = 0.0;
    for i in 0..=PANELS {
        let u = a + i as f64 * h;
        let w = if i == 0 || i == PANELS { 0.5 } else { 1.0 };
        sum += w * chf_cui(Complex64::new(u, 0.0), tau, theta, ctx)?.norm();
    }
    Ok(sum * h / PI)
}

/// Smallest scale whose transform tail is below `tol`, capped at 12.
pub fn select_scale(theta: &HestonParams, tau: f64, ctx: &MarketContext, tol: f64) -> Result<i32> {
    let cfg = SelectionConfig {
        scale_tol: tol,
        ..SelectionConfig::default()
    };
    select_scale_with(theta, tau, ctx, &cfg)
}

pub fn select_scale_with(
    theta: &HestonParams,
    tau: f64,
    ctx: &MarketContext,
    cfg: &SelectionConfig,
) -> Result<i32> {
    if !(cfg.scale_tol > 0.0 && cfg.scale_tol < 1.0) {
        return Err(PricingError::InvalidInput(format!(
            "scale tolerance must lie in (0, 1), got {}",
            cfg.scale_tol
        )));
    }
    for m in cfg.min_scale..=cfg.max_scale {
        if transform_tail(theta, tau, ctx, m)? <= cfg.scale_tol {
            return Ok(m);
        }
    }
    Err(PricingError::NoConvergence(format!(
        "transform tail above {:e} at the scale cap m = {}",
        cfg.scale_tol, cfg.max_scale
    )))
}

/// Truncation interval, `eta` and `J` for a set of strikes sharing one
/// maturity, using the default area tolerance.
pub fn select_truncation(
    theta: &HestonParams,
    tau: f64,
    ctx: &MarketContext,
    m: i32,
    strikes: &[f64],
    width: f64,
) -> Result<SwiftParams> {
    let cfg = SelectionConfig {
        width,
        ..SelectionConfig::default()
    };
    select_truncation_with(theta, tau, ctx, m, strikes, &cfg)
}

pub fn select_truncation_with(
    theta: &HestonParams,
    tau: f64,
    ctx: &MarketContext,
    m: i32,
    strikes: &[f64],
    cfg: &SelectionConfig,
) -> Result<SwiftParams> {
    let mut last_deviation = f64::NAN;
    for m in m..=cfg.max_scale.max(m) {
        let (sp, deviation) = truncation_at_scale(theta, tau, ctx, m, strikes, cfg)?;
        if deviation <= cfg.area_tol {
            return Ok(sp);
        }
        last_deviation = deviation;
    }
    Err(PricingError::NoConvergence(format!(
        "density area off by {last_deviation:e} (tolerance {:e}) at the scale cap m = {}",
        cfg.area_tol, cfg.max_scale
    )))
}

/// Interval selection at a fixed scale. The cumulant interval is widened by
/// 1.5 up to `max_widenings` times until the area check passes; returns the
/// accepted (or, failing that, the widest) parameters together with the
/// largest area deviation `|area − 1|` over the extreme strikes.
pub fn truncation_at_scale(
    theta: &HestonParams,
    tau: f64,
    ctx: &MarketContext,
    m: i32,
    strikes: &[f64],
    cfg: &SelectionConfig,
) -> Result<(SwiftParams, f64)> {
    if strikes.is_empty() {
        return Err(PricingError::InvalidInput("no strikes given".into()));
    }
    if let Some(k) = strikes.iter().find(|k| !(k.is_finite() && **k > 0.0)) {
        return Err(PricingError::InvalidInput(format!(
            "strike must be positive, got {k}"
        )));
    }
    let xs: Vec<f64> = strikes.iter().map(|&k| ctx.log_moneyness(k)).collect();
    let x_min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (c1, c2, c4) = cumulants(theta, tau, ctx);
    let mut c = c1.abs() + cfg.width * (c2 + c4.sqrt()).sqrt();

    let mut attempt = 0;
    loop {
        let sp = SwiftParams::from_interval(m, c, (x_min - c).min(0.0), (x_max + c).max(0.0))?;
        let mut deviation: f64 = 0.0;
        for x in [x_min, x_max] {
            let area = density_area(&density_coefficients(theta, tau, ctx, x, &sp)?, &sp);
            deviation = deviation.max((area - 1.0).abs());
            if !(deviation <= cfg.area_tol) {
                break;
            }
        }
        if deviation <= cfg.area_tol || attempt == cfg.max_widenings {
            return Ok((sp, deviation));
        }
        c *= 1.5;
        attempt += 1;
    }
}

/// Scale from [`select_scale_with`] followed by [`select_truncation_with`].
pub fn select_params(
    theta: &HestonParams,
    tau: f64,
    ctx: &MarketContext,
    strikes: &[f64],
    cfg: &SelectionConfig,
) -> Result<SwiftParams> {
    let m = select_scale_with(theta, tau, ctx, cfg)?;
    select_truncation_with(theta, tau, ctx, m, strikes, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_interval_satisfies_both_bounds() {
        let sp = SwiftParams::from_interval(5, 1.0, -1.2, 0.9).unwrap();
        assert_eq!(sp.eta, 39);
        assert!(sp.j_density > 2 * sp.eta);
        assert!(sp.j_density as f64 >= PI / 2.0 * (32.0 * 1.2 + 39.0));
        assert!(sp.j_density.is_power_of_two());
    }

    #[test]
    fn validation_rejects_short_series() {
        let sp = SwiftParams::from_interval(3, 1.0, -1.0, 1.0).unwrap();
        assert!(sp.with_j(8).is_err());
        assert!(sp.with_j(100).is_err());
        assert!(sp.with_eta(sp.j_density).is_err());
    }

    #[test]
    fn union_covers_both() {
        let a = SwiftParams::from_interval(3, 1.0, -1.0, 2.0).unwrap();
        let b = SwiftParams::from_interval(5, 0.5, -3.0, 0.5).unwrap();
        let u = a.union(&b).unwrap();
        assert_eq!(u.m, 5);
        assert_eq!((u.x_low, u.x_high), (-3.0, 2.0));
        assert!(u.j_density >= a.j_density.max(b.j_density));
    }
}
