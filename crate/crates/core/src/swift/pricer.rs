use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::coefficients::{
    density_coefficients, density_frequencies, fft_in_place, payoff_coefficients,
    strike_free_payoff,
};
use super::params::SwiftParams;
use super::quote::{convert_by_parity, parity_gap, OptionKind, OptionQuote};
use crate::error::{PricingError, Result};
use crate::heston::{chf_cui, chf_gradient, HestonParams, MarketContext};

/// Price of one option from its own density and payoff expansions.
pub fn price_single(
    theta: &HestonParams,
    ctx: &MarketContext,
    quote: &OptionQuote,
    sp: &SwiftParams,
) -> Result<f64> {
    quote.validate()?;
    sp.validate()?;
    let x = ctx.log_moneyness(quote.strike);
    let density = density_coefficients(theta, quote.maturity, ctx, x, sp)?;
    let payoff = payoff_coefficients(sp, OptionKind::Put);
    let expansion: f64 = density.iter().zip(&payoff).map(|(d, u)| d * u).sum();
    let put = quote.strike * (-ctx.rate * quote.maturity).exp() * expansion;
    Ok(convert_by_parity(
        put,
        OptionKind::Put,
        quote.kind,
        quote.strike,
        quote.maturity,
        ctx,
    ))
}

/// Multi-strike pricer for one maturity.
///
/// Holds everything that does not depend on the model parameters: the
/// strike-free payoff transform `Ũ_j` and the per-strike phases
/// `e^{−i ω_j x}`. Each evaluation then costs `J_d` transform evaluations
/// plus one (strikes × `J_d`) matrix product with the weighted transform.
#[derive(Debug, Clone)]
pub struct MultiStrikePricer {
    ctx: MarketContext,
    tau: f64,
    sp: SwiftParams,
    strikes: Vec<f64>,
    omegas: Vec<f64>,
    u_tilde: Vec<Complex64>,
    /// Real and imaginary parts of the phases, one row per strike.
    phase_re: DMatrix<f64>,
    phase_im: DMatrix<f64>,
    /// `K e^{−rτ} 2^{m/2} / J_d` per strike.
    weights: Vec<f64>,
    /// Call minus put per strike.
    gaps: Vec<f64>,
}

impl MultiStrikePricer {
    pub fn new(ctx: &MarketContext, tau: f64, strikes: &[f64], sp: &SwiftParams) -> Result<Self> {
        sp.validate()?;
        if !(tau.is_finite() && tau > 0.0) {
            return Err(PricingError::InvalidInput(format!(
                "maturity must be positive, got {tau}"
            )));
        }
        for &k in strikes {
            OptionQuote::call(k, tau).validate()?;
        }
        let omegas = density_frequencies(sp);
        let u_tilde = strike_free_payoff(&payoff_coefficients(sp, OptionKind::Put), sp);
        let xs: Vec<f64> = strikes.iter().map(|&k| ctx.log_moneyness(k)).collect();
        let phase_re = DMatrix::from_fn(strikes.len(), omegas.len(), |i, j| {
            (omegas[j] * xs[i]).cos()
        });
        let phase_im = DMatrix::from_fn(strikes.len(), omegas.len(), |i, j| {
            -(omegas[j] * xs[i]).sin()
        });
        let pref = sp.scale().sqrt() / sp.j_density as f64 * (-ctx.rate * tau).exp();
        Ok(Self {
            ctx: *ctx,
            tau,
            sp: *sp,
            strikes: strikes.to_vec(),
            omegas,
            u_tilde,
            phase_re,
            phase_im,
            weights: strikes.iter().map(|k| k * pref).collect(),
            gaps: strikes.iter().map(|&k| parity_gap(k, tau, ctx)).collect(),
        })
    }

    pub fn params(&self) -> &SwiftParams {
        &self.sp
    }

    pub fn maturity(&self) -> f64 {
        self.tau
    }

    pub fn strikes(&self) -> &[f64] {
        &self.strikes
    }

    pub fn context(&self) -> &MarketContext {
        &self.ctx
    }

    /// `Re(P G)` for the phase matrix `P` and a `J_d × cols` complex `G`
    /// given by its parts.
    fn project(&self, g_re: &DMatrix<f64>, g_im: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = &self.phase_re * g_re;
        out.gemm(-1.0, &self.phase_im, g_im, 1.0);
        out
    }

    /// Call prices at every strike.
    pub fn prices(&self, theta: &HestonParams) -> Result<Vec<f64>> {
        let j = self.omegas.len();
        let mut g_re = DMatrix::zeros(j, 1);
        let mut g_im = DMatrix::zeros(j, 1);
        for (n, (&w, u)) in self.omegas.iter().zip(&self.u_tilde).enumerate() {
            let fu = chf_cui(Complex64::new(w, 0.0), self.tau, theta, &self.ctx)? * u;
            g_re[n] = fu.re;
            g_im[n] = fu.im;
        }
        let values = self.project(&g_re, &g_im);
        Ok((0..self.strikes.len())
            .map(|i| self.weights[i] * values[i] + self.gaps[i])
            .collect())
    }

    /// Call prices and their parameter Jacobian (rows in strike order,
    /// columns in gradient order). Price and partials share `Ũ_j` and the
    /// phases; only `F_j` is replaced by `∇F_j`. The parity shift does not
    /// depend on the parameters, so call and put share the Jacobian.
    pub fn prices_and_jacobian(&self, theta: &HestonParams) -> Result<(Vec<f64>, Vec<[f64; 5]>)> {
        let j = self.omegas.len();
        // Column 0 carries F_j Ũ_j, columns 1..6 the partials.
        let mut g_re = DMatrix::zeros(j, 6);
        let mut g_im = DMatrix::zeros(j, 6);
        for (n, (&w, u)) in self.omegas.iter().zip(&self.u_tilde).enumerate() {
            let ev = chf_gradient(Complex64::new(w, 0.0), self.tau, theta, &self.ctx)?;
            let grad = ev.gradient.expect("gradient requested");
            for (col, v) in std::iter::once(ev.value).chain(grad).enumerate() {
                let vu = v * u;
                g_re[(n, col)] = vu.re;
                g_im[(n, col)] = vu.im;
            }
        }
        let values = self.project(&g_re, &g_im);
        let prices = (0..self.strikes.len())
            .map(|i| self.weights[i] * values[(i, 0)] + self.gaps[i])
            .collect();
        let jac = (0..self.strikes.len())
            .map(|i| std::array::from_fn(|c| self.weights[i] * values[(i, c + 1)]))
            .collect();
        Ok((prices, jac))
    }
}

/// Call prices for several strikes sharing one maturity.
pub fn price_multi_strike(
    theta: &HestonParams,
    ctx: &MarketContext,
    tau: f64,
    strikes: &[f64],
    sp: &SwiftParams,
) -> Result<Vec<f64>> {
    MultiStrikePricer::new(ctx, tau, strikes, sp)?.prices(theta)
}

pub fn price_and_gradient_multi_strike(
    theta: &HestonParams,
    ctx: &MarketContext,
    tau: f64,
    strikes: &[f64],
    sp: &SwiftParams,
) -> Result<(Vec<f64>, Vec<[f64; 5]>)> {
    MultiStrikePricer::new(ctx, tau, strikes, sp)?.prices_and_jacobian(theta)
}

/// Log-moneyness of grid point `l`: `(2l − J_d) / 2^{m+1}`.
pub fn strike_grid_point(l: usize, sp: &SwiftParams) -> f64 {
    (2.0 * l as f64 - sp.j_density as f64) / (2.0 * sp.scale())
}

/// Call prices on the uniform log-moneyness grid
/// `x_l = (2l − J_d) / 2^{m+1}`, `l = 0..J_d`, from one forward FFT of
/// length `2 J_d`. Returns `(x_l, price)`; the strike is `S_0 e^{−x_l}`.
pub fn price_strike_grid(
    theta: &HestonParams,
    ctx: &MarketContext,
    tau: f64,
    sp: &SwiftParams,
) -> Result<Vec<(f64, f64)>> {
    price_strike_grid_leg(theta, ctx, tau, sp, OptionKind::Put)
}

/// Grid call prices where each point is expanded with the out-of-the-money
/// leg: the call payoff for `x < 0` (`K > S0`), the put payoff otherwise.
///
/// Grid points outside the wavelet range see only one side of their payoff,
/// so a single leg loses the mass at one end of the grid. Costs two DFTs.
pub fn price_strike_grid_otm(
    theta: &HestonParams,
    ctx: &MarketContext,
    tau: f64,
    sp: &SwiftParams,
) -> Result<Vec<(f64, f64)>> {
    let puts = price_strike_grid_leg(theta, ctx, tau, sp, OptionKind::Put)?;
    let calls = price_strike_grid_leg(theta, ctx, tau, sp, OptionKind::Call)?;
    Ok(puts
        .into_iter()
        .zip(calls)
        .map(|(p, c)| if p.0 < 0.0 { c } else { p })
        .collect())
}

/// Grid call prices with the payoff expanded on the given leg; a put leg is
/// turned into calls by parity.
pub fn price_strike_grid_leg(
    theta: &HestonParams,
    ctx: &MarketContext,
    tau: f64,
    sp: &SwiftParams,
    leg: OptionKind,
) -> Result<Vec<(f64, f64)>> {
    sp.validate()?;
    let j = sp.j_density;
    let u_tilde = strike_free_payoff(&payoff_coefficients(sp, leg), sp);
    let mut buf = vec![Complex64::new(0.0, 0.0); 2 * j];
    for (idx, (w, u)) in density_frequencies(sp)
        .into_iter()
        .zip(&u_tilde)
        .enumerate()
    {
        // e^{−iω_j x_l} = e^{iπ(2j−1)/4} e^{−iπl/(2J)} e^{−2πi(j−1)l/(2J)}
        let twist = Complex64::from_polar(1.0, PI * (2 * idx + 1) as f64 / 4.0);
        buf[idx] = chf_cui(Complex64::new(w, 0.0), tau, theta, ctx)? * u * twist;
    }
    fft_in_place(&mut buf, false);
    let pref = sp.scale().sqrt() / j as f64 * (-ctx.rate * tau).exp();
    Ok((0..j)
        .map(|l| {
            let x = strike_grid_point(l, sp);
            let value = (buf[l] * Complex64::from_polar(1.0, -PI * l as f64 / (2 * j) as f64)).re;
            let strike = ctx.spot * (-x).exp();
            let gap = match leg {
                OptionKind::Put => parity_gap(strike, tau, ctx),
                OptionKind::Call => 0.0,
            };
            (x, strike * pref * value + gap)
        })
        .collect())
}
