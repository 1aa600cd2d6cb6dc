use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::PricingError;
use crate::heston::{ChfForm, HestonParams, MarketContext};
use crate::reference::{price_and_gradient_cp, price_cp, QuadratureConfig};
use crate::swift::{
    convert_by_parity, density_coefficients_direct, density_gradient_coefficients_direct,
    payoff_coefficients, select_params, MultiStrikePricer, OptionKind, OptionQuote,
    SelectionConfig, SwiftParams,
};

use super::CalibrationError;

/// Model prices (and their parameter Jacobian, columns in gradient order)
/// for a fixed list of quotes, in quote order.
pub trait PricingBackend: Sync {
    fn name(&self) -> &'static str;

    fn quotes(&self) -> &[OptionQuote];

    fn prices(&self, theta: &HestonParams) -> Result<Vec<f64>, CalibrationError>;

    fn prices_and_jacobian(
        &self,
        theta: &HestonParams,
    ) -> Result<(Vec<f64>, Vec<[f64; 5]>), CalibrationError>;
}

fn pricing_failure(quote: &OptionQuote, source: PricingError) -> CalibrationError {
    CalibrationError::Pricing {
        quote: format!("{} K={} tau={}", quote.kind, quote.strike, quote.maturity),
        source,
    }
}

/// How quotes are split into independently priced groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Grouping {
    /// One multi-strike pricer per distinct maturity.
    #[default]
    ByMaturity,
    /// One pricer per quote: density and payoff data are rebuilt for every
    /// option, as when no two quotes share a maturity.
    PerQuote,
}

#[derive(Debug, Clone)]
struct Group {
    pricer: MultiStrikePricer,
    /// Positions of the group's quotes in the backend's quote list.
    members: Vec<usize>,
}

/// Multi-strike SWIFT backend (KSWIFT).
#[derive(Debug)]
pub struct KSwiftBackend {
    ctx: MarketContext,
    quotes: Vec<OptionQuote>,
    groups: Vec<Group>,
    group_calls: AtomicUsize,
}

impl KSwiftBackend {
    /// Groups the quotes and selects SWIFT parameters for every group at
    /// `reference`. Parameters stay fixed afterwards, so the backend is a
    /// smooth function of θ during a calibration.
    pub fn new(
        quotes: &[OptionQuote],
        ctx: &MarketContext,
        reference: &HestonParams,
        grouping: Grouping,
        cfg: &SelectionConfig,
    ) -> Result<Self, CalibrationError> {
        Self::build(quotes, ctx, grouping, |tau, strikes| {
            select_params(reference, tau, ctx, strikes, cfg)
        })
    }

    /// Uses caller-supplied parameters for each group.
    pub fn with_params<F>(
        quotes: &[OptionQuote],
        ctx: &MarketContext,
        grouping: Grouping,
        params_for: F,
    ) -> Result<Self, CalibrationError>
    where
        F: FnMut(f64, &[f64]) -> crate::Result<SwiftParams>,
    {
        Self::build(quotes, ctx, grouping, params_for)
    }

    fn build<F>(
        quotes: &[OptionQuote],
        ctx: &MarketContext,
        grouping: Grouping,
        mut params_for: F,
    ) -> Result<Self, CalibrationError>
    where
        F: FnMut(f64, &[f64]) -> crate::Result<SwiftParams>,
    {
        for q in quotes {
            q.validate().map_err(|e| pricing_failure(q, e))?;
        }
        let mut members: Vec<Vec<usize>> = Vec::new();
        match grouping {
            Grouping::PerQuote => members.extend((0..quotes.len()).map(|i| vec![i])),
            Grouping::ByMaturity => {
                let mut taus: Vec<f64> = Vec::new();
                for (i, q) in quotes.iter().enumerate() {
                    match taus.iter().position(|&t| t == q.maturity) {
                        Some(g) => members[g].push(i),
                        None => {
                            taus.push(q.maturity);
                            members.push(vec![i]);
                        }
                    }
                }
            }
        }
        let groups = members
            .into_iter()
            .map(|idx| {
                let tau = quotes[idx[0]].maturity;
                let strikes: Vec<f64> = idx.iter().map(|&i| quotes[i].strike).collect();
                let first = &quotes[idx[0]];
                let sp = params_for(tau, &strikes).map_err(|e| pricing_failure(first, e))?;
                let pricer = MultiStrikePricer::new(ctx, tau, &strikes, &sp)
                    .map_err(|e| pricing_failure(first, e))?;
                Ok(Group {
                    pricer,
                    members: idx,
                })
            })
            .collect::<Result<Vec<_>, CalibrationError>>()?;
        Ok(Self {
            ctx: *ctx,
            quotes: quotes.to_vec(),
            groups,
            group_calls: AtomicUsize::new(0),
        })
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// Parameters used by each group, in group order.
    pub fn group_params(&self) -> Vec<(f64, SwiftParams)> {
        self.groups
            .iter()
            .map(|g| (g.pricer.maturity(), *g.pricer.params()))
            .collect()
    }

    /// Number of group evaluations since construction (or the last reset).
    pub fn group_evaluations(&self) -> usize {
        self.group_calls.load(Ordering::Relaxed)
    }

    pub fn reset_counter(&self) {
        self.group_calls.store(0, Ordering::Relaxed);
    }

    fn scatter(&self, group: &Group, calls: Vec<f64>, out: &mut [f64]) {
        for (&i, call) in group.members.iter().zip(calls) {
            let q = &self.quotes[i];
            out[i] = convert_by_parity(
                call,
                OptionKind::Call,
                q.kind,
                q.strike,
                q.maturity,
                &self.ctx,
            );
        }
    }
}

impl PricingBackend for KSwiftBackend {
    fn name(&self) -> &'static str {
        "kswift"
    }

    fn quotes(&self) -> &[OptionQuote] {
        &self.quotes
    }

    fn prices(&self, theta: &HestonParams) -> Result<Vec<f64>, CalibrationError> {
        let mut out = vec![0.0; self.quotes.len()];
        for g in &self.groups {
            self.group_calls.fetch_add(1, Ordering::Relaxed);
            let calls = g
                .pricer
                .prices(theta)
                .map_err(|e| pricing_failure(&self.quotes[g.members[0]], e))?;
            self.scatter(g, calls, &mut out);
        }
        Ok(out)
    }

    fn prices_and_jacobian(
        &self,
        theta: &HestonParams,
    ) -> Result<(Vec<f64>, Vec<[f64; 5]>), CalibrationError> {
        let mut out = vec![0.0; self.quotes.len()];
        let mut jac = vec![[0.0; 5]; self.quotes.len()];
        for g in &self.groups {
            self.group_calls.fetch_add(1, Ordering::Relaxed);
            let (calls, rows) = g
                .pricer
                .prices_and_jacobian(theta)
                .map_err(|e| pricing_failure(&self.quotes[g.members[0]], e))?;
            self.scatter(g, calls, &mut out);
            for (&i, row) in g.members.iter().zip(rows) {
                jac[i] = row;
            }
        }
        Ok((out, jac))
    }
}

/// SWIFT without the multi-strike reformulation: every quote evaluates the
/// defining coefficient sums term by term, `2 η J_d` transform evaluations
/// per option.
#[derive(Debug, Clone)]
pub struct SwiftBackend {
    ctx: MarketContext,
    quotes: Vec<OptionQuote>,
    params: Vec<SwiftParams>,
    /// Unit-strike put payoff coefficients per quote.
    payoffs: Vec<Vec<f64>>,
}

impl SwiftBackend {
    /// Selects parameters per quote at `reference`.
    pub fn new(
        quotes: &[OptionQuote],
        ctx: &MarketContext,
        reference: &HestonParams,
        cfg: &SelectionConfig,
    ) -> Result<Self, CalibrationError> {
        let params = quotes
            .iter()
            .map(|q| {
                q.validate().map_err(|e| pricing_failure(q, e))?;
                select_params(reference, q.maturity, ctx, &[q.strike], cfg)
                    .map_err(|e| pricing_failure(q, e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::with_params(quotes, ctx, params)
    }

    /// Takes one parameter set per quote, e.g. those of a [`KSwiftBackend`]
    /// group so both backends evaluate the same expansion.
    pub fn with_params(
        quotes: &[OptionQuote],
        ctx: &MarketContext,
        params: Vec<SwiftParams>,
    ) -> Result<Self, CalibrationError> {
        if params.len() != quotes.len() {
            return Err(CalibrationError::InvalidInput(format!(
                "{} parameter sets for {} quotes",
                params.len(),
                quotes.len()
            )));
        }
        for (q, sp) in quotes.iter().zip(&params) {
            q.validate()
                .and_then(|_| sp.validate())
                .map_err(|e| pricing_failure(q, e))?;
        }
        let payoffs = params
            .iter()
            .map(|sp| payoff_coefficients(sp, OptionKind::Put))
            .collect();
        Ok(Self {
            ctx: *ctx,
            quotes: quotes.to_vec(),
            params,
            payoffs,
        })
    }

    /// Parameters per quote.
    pub fn params(&self) -> &[SwiftParams] {
        &self.params
    }

    fn assemble(&self, i: usize, put_expansion: f64) -> f64 {
        let q = &self.quotes[i];
        let put = q.strike * (-self.ctx.rate * q.maturity).exp() * put_expansion;
        convert_by_parity(
            put,
            OptionKind::Put,
            q.kind,
            q.strike,
            q.maturity,
            &self.ctx,
        )
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl PricingBackend for SwiftBackend {
    fn name(&self) -> &'static str {
        "swift"
    }

    fn quotes(&self) -> &[OptionQuote] {
        &self.quotes
    }

    fn prices(&self, theta: &HestonParams) -> Result<Vec<f64>, CalibrationError> {
        self.quotes
            .iter()
            .enumerate()
            .map(|(i, q)| {
                let x = self.ctx.log_moneyness(q.strike);
                let d =
                    density_coefficients_direct(theta, q.maturity, &self.ctx, x, &self.params[i])
                        .map_err(|e| pricing_failure(q, e))?;
                Ok(self.assemble(i, dot(&d, &self.payoffs[i])))
            })
            .collect()
    }

    fn prices_and_jacobian(
        &self,
        theta: &HestonParams,
    ) -> Result<(Vec<f64>, Vec<[f64; 5]>), CalibrationError> {
        let mut prices = Vec::with_capacity(self.quotes.len());
        let mut jac = Vec::with_capacity(self.quotes.len());
        for (i, q) in self.quotes.iter().enumerate() {
            let x = self.ctx.log_moneyness(q.strike);
            let (d, grads) = density_gradient_coefficients_direct(
                theta,
                q.maturity,
                &self.ctx,
                x,
                &self.params[i],
            )
            .map_err(|e| pricing_failure(q, e))?;
            let u = &self.payoffs[i];
            prices.push(self.assemble(i, dot(&d, u)));
            let scale = q.strike * (-self.ctx.rate * q.maturity).exp();
            jac.push(grads.map(|g| scale * dot(&g, u)));
        }
        Ok((prices, jac))
    }
}

/// The Gauss–Legendre reference pricer, one quote at a time.
#[derive(Debug, Clone)]
pub struct ReferenceBackend {
    ctx: MarketContext,
    quotes: Vec<OptionQuote>,
    quadrature: QuadratureConfig,
    form: ChfForm,
}

impl ReferenceBackend {
    pub fn new(
        quotes: &[OptionQuote],
        ctx: &MarketContext,
        quadrature: QuadratureConfig,
        form: ChfForm,
    ) -> Result<Self, CalibrationError> {
        quadrature
            .validate()
            .map_err(|e| CalibrationError::InvalidInput(e.to_string()))?;
        for q in quotes {
            q.validate().map_err(|e| pricing_failure(q, e))?;
        }
        Ok(Self {
            ctx: *ctx,
            quotes: quotes.to_vec(),
            quadrature,
            form,
        })
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.quadrature
    }

    pub fn form(&self) -> ChfForm {
        self.form
    }
}

impl PricingBackend for ReferenceBackend {
    fn name(&self) -> &'static str {
        "cp"
    }

    fn quotes(&self) -> &[OptionQuote] {
        &self.quotes
    }

    fn prices(&self, theta: &HestonParams) -> Result<Vec<f64>, CalibrationError> {
        self.quotes
            .iter()
            .map(|q| {
                price_cp(theta, &self.ctx, q, &self.quadrature, self.form)
                    .map_err(|e| pricing_failure(q, e))
            })
            .collect()
    }

    fn prices_and_jacobian(
        &self,
        theta: &HestonParams,
    ) -> Result<(Vec<f64>, Vec<[f64; 5]>), CalibrationError> {
        self.quotes
            .iter()
            .map(|q| {
                price_and_gradient_cp(theta, &self.ctx, q, &self.quadrature, self.form)
                    .map_err(|e| pricing_failure(q, e))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(|v| v.into_iter().unzip())
    }
}
