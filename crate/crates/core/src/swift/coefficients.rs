//! Density and payoff coefficients of the Shannon-wavelet expansion.
//!
//! Both rest on the cosine form of the sinc kernel,
//! `sinc(t) ≈ (1/J) Σ_{j=1}^{J} cos(u_j t)` with `u_j = π(2j − 1)/(2J)`,
//! so every coefficient vector is a real part of
//! `S_k = Σ_j g_j e^{i k u_j}` for `k = 1 − η ..= η`. That sum is one
//! inverse DFT of length `2J`; the `_direct` variants evaluate it term by
//! term and serve as oracles.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::params::SwiftParams;
use super::quote::OptionKind;
use crate::error::Result;
use crate::heston::{chf_cui, chf_gradient, HestonParams, MarketContext};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// In-place unnormalised DFT, `X_n = Σ_k x_k e^{∓2πi kn/N}`.
pub(crate) fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        }
    });
    fft.process(buf);
}

/// Cosine-expansion node `u_j` (1-based `j`).
#[inline]
pub fn cosine_node(j: usize, terms: usize) -> f64 {
    PI * (2 * j - 1) as f64 / (2 * terms) as f64
}

/// `S_k = Σ_{j=1}^{J} g_j e^{i k u_j}` for `k = k_min ..= k_max` via one
/// inverse FFT of length `2J`. Needs `k_max − k_min < 2J`.
pub fn cosine_sum(g: &[Complex64], k_min: i64, k_max: i64) -> Vec<Complex64> {
    let terms = g.len();
    let n = 2 * terms;
    debug_assert!(k_max - k_min < n as i64);
    let mut buf = vec![ZERO; n];
    buf[..terms].copy_from_slice(g);
    fft_in_place(&mut buf, true);
    (k_min..=k_max)
        .map(|k| {
            let shift = Complex64::from_polar(1.0, PI * k as f64 / n as f64);
            buf[k.rem_euclid(n as i64) as usize] * shift
        })
        .collect()
}

/// Term-by-term evaluation of [`cosine_sum`].
pub fn cosine_sum_direct(g: &[Complex64], k_min: i64, k_max: i64) -> Vec<Complex64> {
    let terms = g.len();
    (k_min..=k_max)
        .map(|k| {
            g.iter()
                .enumerate()
                .map(|(i, gj)| {
                    gj * Complex64::from_polar(1.0, k as f64 * cosine_node(i + 1, terms))
                })
                .sum()
        })
        .collect()
}

/// Transform frequencies `ω_j = 2^m u_j`, `j = 1..=J`.
pub fn density_frequencies(sp: &SwiftParams) -> Vec<f64> {
    let scale = sp.scale();
    (1..=sp.j_density)
        .map(|j| scale * cosine_node(j, sp.j_density))
        .collect()
}

fn shifted(value: Complex64, omega: f64, x: f64) -> Complex64 {
    value * Complex64::from_polar(1.0, -omega * x)
}

/// `D*_k(x) = 2^{m/2}/J_d Re Σ_j f̂(ω_j; x) e^{i k u_j}`, `k = 1 − η ..= η`.
pub fn density_coefficients(
    theta: &HestonParams,
    tau: f64,
    ctx: &MarketContext,
    x: f64,
    sp: &SwiftParams,
) -> Result<Vec<f64>> {
    let g = density_frequencies(sp)
        .into_iter()
        .map(|w| {
            Ok(shifted(
                chf_cui(Complex64::new(w, 0.0), tau, theta, ctx)?,
                w,
                x,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let pref = sp.scale().sqrt() / sp.j_density as f64;
    Ok(cosine_sum(&g, sp.k_min(), sp.k_max())
        .into_iter()
        .map(|s| pref * s.re)
        .collect())
}

/// Density coefficients together with their five parameter partials (in
/// gradient order), one FFT per component.
pub fn density_gradient_coefficients(
    theta: &HestonParams,
    tau: f64,
    ctx: &MarketContext,
    x: f64,
    sp: &SwiftParams,
) -> Result<(Vec<f64>, [Vec<f64>; 5])> {
    let omegas = density_frequencies(sp);
    let mut columns: [Vec<Complex64>; 6] = Default::default();
    for w in omegas {
        let ev = chf_gradient(Complex64::new(w, 0.0), tau, theta, ctx)?;
        columns[0].push(shifted(ev.value, w, x));
        for (col, g) in columns[1..]
            .iter_mut()
            .zip(ev.gradient.unwrap_or([ZERO; 5]))
        {
            col.push(shifted(g, w, x));
        }
    }
    let pref = sp.scale().sqrt() / sp.j_density as f64;
    let mut out = columns.map(|g| {
        cosine_sum(&g, sp.k_min(), sp.k_max())
            .into_iter()
            .map(|s| pref * s.re)
            .collect::<Vec<f64>>()
    });
    let density = std::mem::take(&mut out[0]);
    let [_, g0, g1, g2, g3, g4] = out;
    Ok((density, [g0, g1, g2, g3, g4]))
}

/// The defining sum of [`density_coefficients`] evaluated literally: the
/// strike-shifted transform is recomputed for every `(k, j)` term, which
/// costs `2 η J_d` transform evaluations.
pub fn density_coefficients_direct(
    theta: &HestonParams,
    tau: f64,
    ctx: &MarketContext,
    x: f64,
    sp: &SwiftParams,
) -> Result<Vec<f64>> {
    let pref = sp.scale().sqrt() / sp.j_density as f64;
    (sp.k_min()..=sp.k_max())
        .map(|k| {
            let mut acc = 0.0;
            for j in 1..=sp.j_density {
                let u = cosine_node(j, sp.j_density);
                let w = sp.scale() * u;
                let f = shifted(chf_cui(Complex64::new(w, 0.0), tau, theta, ctx)?, w, x);
                acc += (f * Complex64::from_polar(1.0, k as f64 * u)).re;
            }
            Ok(pref * acc)
        })
        .collect()
}

/// Literal evaluation of [`density_gradient_coefficients`], with the same
/// per-term recomputation as [`density_coefficients_direct`].
pub fn density_gradient_coefficients_direct(
    theta: &HestonParams,
    tau: f64,
    ctx: &MarketContext,
    x: f64,
    sp: &SwiftParams,
) -> Result<(Vec<f64>, [Vec<f64>; 5])> {
    let pref = sp.scale().sqrt() / sp.j_density as f64;
    let mut density = Vec::with_capacity(sp.len());
    let mut grads: [Vec<f64>; 5] = Default::default();
    for k in sp.k_min()..=sp.k_max() {
        let mut acc = [0.0; 6];
        for j in 1..=sp.j_density {
            let u = cosine_node(j, sp.j_density);
            let w = sp.scale() * u;
            let ev = chf_gradient(Complex64::new(w, 0.0), tau, theta, ctx)?;
            let rot = Complex64::from_polar(1.0, k as f64 * u - w * x);
            acc[0] += (ev.value * rot).re;
            for (a, g) in acc[1..].iter_mut().zip(ev.gradient.unwrap_or([ZERO; 5])) {
                *a += (g * rot).re;
            }
        }
        density.push(pref * acc[0]);
        for (g, a) in grads.iter_mut().zip(&acc[1..]) {
            g.push(pref * a);
        }
    }
    Ok((density, grads))
}

/// `∫_a^b (e^y − 1) e^{−iωy} dy` in closed form.
fn call_payoff_integral(omega: f64, a: f64, b: f64) -> Complex64 {
    let one_minus = Complex64::new(1.0, -omega);
    let minus_i_w = Complex64::new(0.0, -omega);
    let exp_part = |y: f64| (one_minus * y).exp() / one_minus;
    let osc_part = |y: f64| (minus_i_w * y).exp() / minus_i_w;
    (exp_part(b) - exp_part(a)) - (osc_part(b) - osc_part(a))
}

/// Strike-free payoff integral `I_j` at frequency `ω` for a unit-strike
/// payoff over the relevant half of `[x_low, x_high]`.
pub fn payoff_integral(omega: f64, sp: &SwiftParams, kind: OptionKind) -> Complex64 {
    match kind {
        OptionKind::Call => call_payoff_integral(omega, 0.0, sp.x_high),
        OptionKind::Put => -call_payoff_integral(omega, sp.x_low, 0.0),
    }
}

fn payoff_integrals(sp: &SwiftParams, kind: OptionKind) -> Vec<Complex64> {
    let scale = sp.scale();
    (1..=sp.j_payoff)
        .map(|j| payoff_integral(scale * cosine_node(j, sp.j_payoff), sp, kind))
        .collect()
}

/// `U*_k = 2^{m/2}/J_p Re Σ_j e^{i k u_j} I_j`, `k = 1 − η ..= η`, for a
/// payoff expressed in units of the strike.
pub fn payoff_coefficients(sp: &SwiftParams, kind: OptionKind) -> Vec<f64> {
    let pref = sp.scale().sqrt() / sp.j_payoff as f64;
    cosine_sum(&payoff_integrals(sp, kind), sp.k_min(), sp.k_max())
        .into_iter()
        .map(|s| pref * s.re)
        .collect()
}

pub fn payoff_coefficients_direct(sp: &SwiftParams, kind: OptionKind) -> Vec<f64> {
    let pref = sp.scale().sqrt() / sp.j_payoff as f64;
    cosine_sum_direct(&payoff_integrals(sp, kind), sp.k_min(), sp.k_max())
        .into_iter()
        .map(|s| pref * s.re)
        .collect()
}

/// Trapezoidal mass of the wavelet density,
/// `2^{−m/2} (D_first/2 + Σ D_interior + D_last/2)`.
pub fn density_area(density: &[f64], sp: &SwiftParams) -> f64 {
    let sum = match density {
        [] => 0.0,
        [only] => *only,
        [first, inner @ .., last] => 0.5 * (first + last) + inner.iter().sum::<f64>(),
    };
    sum / sp.scale().sqrt()
}

/// `Ũ_j = Σ_k U_k e^{i k u_j}` at the density nodes `u_j`, `j = 1..=J_d`.
pub fn strike_free_payoff(payoff: &[f64], sp: &SwiftParams) -> Vec<Complex64> {
    let n = 2 * sp.j_density;
    let mut buf = vec![ZERO; n];
    for (k, &u) in (sp.k_min()..=sp.k_max()).zip(payoff) {
        buf[k.rem_euclid(n as i64) as usize] = Complex64::from_polar(u, -PI * k as f64 / n as f64);
    }
    fft_in_place(&mut buf, true);
    buf[1..=sp.j_density].to_vec()
}

pub fn strike_free_payoff_direct(payoff: &[f64], sp: &SwiftParams) -> Vec<Complex64> {
    (1..=sp.j_density)
        .map(|j| {
            let u = cosine_node(j, sp.j_density);
            (sp.k_min()..=sp.k_max())
                .zip(payoff)
                .map(|(k, &p)| Complex64::from_polar(p, k as f64 * u))
                .sum()
        })
        .collect()
}

/// Everything SWIFT needs to price at one log-moneyness.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    /// `D*_k(x)`.
    pub density: Vec<f64>,
    /// `U*_k` of the unit-strike put payoff.
    pub payoff: Vec<f64>,
    /// `Ũ_j`.
    pub u_tilde: Vec<Complex64>,
    /// `F_j = f̂(ω_j)` (strike-free).
    pub f_cached: Vec<Complex64>,
}

impl CoefficientSet {
    pub fn new(
        theta: &HestonParams,
        tau: f64,
        ctx: &MarketContext,
        x: f64,
        sp: &SwiftParams,
    ) -> Result<Self> {
        sp.validate()?;
        let f_cached = density_frequencies(sp)
            .into_iter()
            .map(|w| chf_cui(Complex64::new(w, 0.0), tau, theta, ctx))
            .collect::<Result<Vec<_>>>()?;
        let payoff = payoff_coefficients(sp, OptionKind::Put);
        Ok(Self {
            density: density_coefficients(theta, tau, ctx, x, sp)?,
            u_tilde: strike_free_payoff(&payoff, sp),
            payoff,
            f_cached,
        })
    }

    /// `Σ_k D*_k U*_k`: the undiscounted put value per unit strike.
    pub fn expansion_value(&self) -> f64 {
        self.density
            .iter()
            .zip(&self.payoff)
            .map(|(d, u)| d * u)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_of_zero_density_is_zero() {
        let sp = SwiftParams::from_interval(3, 1.0, -1.0, 1.0).unwrap();
        assert_eq!(density_area(&vec![0.0; sp.len()], &sp), 0.0);
    }

    #[test]
    fn cosine_sum_matches_direct_on_small_input() {
        let g: Vec<Complex64> = (0..16)
            .map(|i| Complex64::new(i as f64 * 0.1, 1.0 - i as f64 * 0.05))
            .collect();
        let a = cosine_sum(&g, -7, 8);
        let b = cosine_sum_direct(&g, -7, 8);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn payoff_integral_matches_midpoint_rule() {
        let sp = SwiftParams::from_interval(2, 1.0, -1.0, 1.0).unwrap();
        let w = 3.7;
        let n = 200_000;
        let h = sp.x_high / n as f64;
        let numeric: Complex64 = (0..n)
            .map(|i| {
                let y = (i as f64 + 0.5) * h;
                (y.exp() - 1.0) * Complex64::from_polar(1.0, -w * y) * h
            })
            .sum();
        assert!((payoff_integral(w, &sp, OptionKind::Call) - numeric).norm() < 1e-9);
    }
}
