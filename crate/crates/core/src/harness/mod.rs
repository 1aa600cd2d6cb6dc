//! Experiment plumbing behind the `heston-swift` binary: quote files,
//! bundled fixtures, reports and the `price`, `generate`, `calibrate`,
//! `speed` and `converge` commands.
//!
//! Errors map onto process exit codes through [`HarnessError::exit_code`]:
//! 2 for unusable input, 3 for numerical failure, 4 when a calibration
//! stops short of the residual tolerance.

pub mod cli;
mod commands;
mod fixtures;
mod quote_file;
mod report;

use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::{
    CalibrationError, Grouping, KSwiftBackend, PricingBackend, ReferenceBackend, StopReason,
    SwiftBackend,
};
use crate::error::PricingError;
use crate::heston::{ChfForm, HestonParams, MarketContext};
use crate::reference::QuadratureConfig;
use crate::swift::{select_params, truncation_at_scale, OptionQuote, SelectionConfig, SwiftParams};

pub use commands::{
    cmd_calibrate, cmd_converge, cmd_generate, cmd_price, cmd_speed, converge_selection,
    random_starts, speed_selection, stress_report, stress_u_max, CalibrateArgs, CalibrationOutcome,
    ConvergeArgs, GenerateArgs, GenerateSource, GridSpec, PriceArgs, SpeedArgs,
};
pub use fixtures::{
    named_params, resolve_params, resolve_quotes, QuoteSet, FIXTURE_DIR_VAR, PARAMS_JSON,
    SET1_QUOTES, SET2_QUOTES, STRESS_QUOTES,
};
pub use quote_file::QuoteFile;
pub use report::{Experiment, ExperimentReport};

const OVERFLOW_REMEDIES: &str = "try a lower --u-max, a higher --m, or the other --chf-form";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("{file}{}: {message}", line_suffix(*.line))]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("{0}")]
    Input(String),

    #[error("{0}")]
    Numerical(String),

    #[error(
        "calibration stopped with {reason} at residual norm {residual_norm:e} (eps1 = {eps1:e})"
    )]
    NotConverged {
        reason: StopReason,
        residual_norm: f64,
        eps1: f64,
    },
}

fn line_suffix(line: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!(", line {line}")
    }
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Parse { .. } | HarnessError::Input(_) => 2,
            HarnessError::Numerical(_) => 3,
            HarnessError::NotConverged { .. } => 4,
        }
    }

    /// Attaches a file name to parse errors.
    pub fn in_file(self, path: &Path) -> Self {
        match self {
            HarnessError::Parse { line, message, .. } => HarnessError::Parse {
                file: path.display().to_string(),
                line,
                message,
            },
            other => other,
        }
    }
}

impl From<PricingError> for HarnessError {
    fn from(e: PricingError) -> Self {
        match e {
            PricingError::InvalidInput(_) => HarnessError::Input(e.to_string()),
            PricingError::Overflow { .. } => {
                HarnessError::Numerical(format!("{e}; {OVERFLOW_REMEDIES}"))
            }
            PricingError::NoConvergence(_) => HarnessError::Numerical(e.to_string()),
        }
    }
}

impl From<CalibrationError> for HarnessError {
    fn from(e: CalibrationError) -> Self {
        match &e {
            CalibrationError::Pricing {
                source: PricingError::InvalidInput(_),
                ..
            }
            | CalibrationError::InvalidInput(_)
            | CalibrationError::MissingPrice { .. } => HarnessError::Input(e.to_string()),
            CalibrationError::Pricing {
                source: PricingError::Overflow { .. },
                ..
            } => HarnessError::Numerical(format!("{e}; {OVERFLOW_REMEDIES}")),
            _ => HarnessError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    /// SWIFT evaluated quote by quote, coefficient sums term by term.
    Swift,
    /// Multi-strike SWIFT, one pricer per maturity.
    #[default]
    Kswift,
    /// Gauss–Legendre Fourier-inversion reference pricer.
    Cp,
}

impl std::fmt::Display for BackendKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BackendKind::Swift => "swift",
            BackendKind::Kswift => "kswift",
            BackendKind::Cp => "cp",
        })
    }
}

/// Manual settings that replace the automatic SWIFT parameter choice.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SwiftOverrides {
    /// Fixed scale; the interval is still chosen by the area check at it.
    pub m: Option<i32>,
    pub eta: Option<usize>,
    /// Both series lengths.
    pub j: Option<usize>,
    /// Interval width in cumulant standard deviations.
    pub width: Option<f64>,
}

/// Everything needed to build a pricing backend besides the quotes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricingSetup {
    pub backend: BackendKind,
    pub selection: SelectionConfig,
    pub overrides: SwiftOverrides,
    pub quadrature: QuadratureConfig,
    pub form: ChfForm,
    /// KSWIFT only: price every quote with its own pricer.
    pub per_quote: bool,
}

impl Default for PricingSetup {
    fn default() -> Self {
        Self {
            backend: BackendKind::Kswift,
            selection: SelectionConfig::default(),
            overrides: SwiftOverrides::default(),
            quadrature: QuadratureConfig::default(),
            form: ChfForm::Cui,
            per_quote: false,
        }
    }
}

impl PricingSetup {
    /// SWIFT parameters for strikes sharing `tau`, chosen at `theta`.
    pub fn swift_params(
        &self,
        theta: &HestonParams,
        tau: f64,
        ctx: &MarketContext,
        strikes: &[f64],
    ) -> crate::Result<SwiftParams> {
        let cfg = SelectionConfig {
            width: self.overrides.width.unwrap_or(self.selection.width),
            ..self.selection
        };
        let mut sp = match self.overrides.m {
            Some(m) => truncation_at_scale(theta, tau, ctx, m, strikes, &cfg)?.0,
            None => select_params(theta, tau, ctx, strikes, &cfg)?,
        };
        if let Some(eta) = self.overrides.eta {
            sp.eta = eta;
        }
        if let Some(j) = self.overrides.j {
            sp.j_density = j;
            sp.j_payoff = j;
        }
        sp.validate()?;
        Ok(sp)
    }

    /// Builds the backend, choosing SWIFT parameters at `reference`.
    pub fn build(
        &self,
        quotes: &[OptionQuote],
        ctx: &MarketContext,
        reference: &HestonParams,
    ) -> Result<Backend, HarnessError> {
        if self.backend != BackendKind::Cp && self.form != ChfForm::Cui {
            return Err(HarnessError::Input(
                "the SWIFT backends always use the stabilised cui form; --chf-form applies to --backend cp".into(),
            ));
        }
        Ok(match self.backend {
            BackendKind::Kswift => {
                let grouping = if self.per_quote {
                    Grouping::PerQuote
                } else {
                    Grouping::ByMaturity
                };
                Backend::Kswift(KSwiftBackend::with_params(
                    quotes,
                    ctx,
                    grouping,
                    |tau, strikes| self.swift_params(reference, tau, ctx, strikes),
                )?)
            }
            BackendKind::Swift => {
                let params = quotes
                    .iter()
                    .map(|q| {
                        self.swift_params(reference, q.maturity, ctx, &[q.strike])
                            .map_err(|e| CalibrationError::Pricing {
                                quote: format!("{} K={} tau={}", q.kind, q.strike, q.maturity),
                                source: e,
                            })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Backend::Swift(SwiftBackend::with_params(quotes, ctx, params)?)
            }
            BackendKind::Cp => Backend::Cp(ReferenceBackend::new(
                quotes,
                ctx,
                self.quadrature,
                self.form,
            )?),
        })
    }
}

/// A built backend that still knows its concrete type, so reports can
/// record the parameters it uses.
#[derive(Debug)]
pub enum Backend {
    Swift(SwiftBackend),
    Kswift(KSwiftBackend),
    Cp(ReferenceBackend),
}

impl Backend {
    pub fn as_dyn(&self) -> &dyn PricingBackend {
        match self {
            Backend::Swift(b) => b,
            Backend::Kswift(b) => b,
            Backend::Cp(b) => b,
        }
    }

    /// Configuration record for report metadata.
    pub fn describe(&self) -> serde_json::Value {
        match self {
            Backend::Kswift(b) => serde_json::json!({
                "backend": "kswift",
                "groups": b.group_params().iter().map(|(tau, sp)| serde_json::json!({"maturity": tau, "swift": sp})).collect::<Vec<_>>(),
            }),
            Backend::Swift(b) => serde_json::json!({
                "backend": "swift",
                "per_quote": b.params(),
            }),
            Backend::Cp(b) => serde_json::json!({
                "backend": "cp",
                "quadrature": b.quadrature(),
                "form": b.form(),
            }),
        }
    }
}
