//! Argument parsing for the `heston-swift` binary.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::commands::{
    cmd_calibrate, cmd_converge, cmd_generate, cmd_price, cmd_speed, speed_selection,
    CalibrateArgs, ConvergeArgs, GenerateArgs, GenerateSource, GridSpec, PriceArgs, SpeedArgs,
};
use super::fixtures::{resolve_params, resolve_quotes, QuoteSet, FIXTURE_DIR_VAR};
use super::report::ExperimentReport;
use super::{BackendKind, HarnessError, PricingSetup, SwiftOverrides};
use crate::calibration::{CalibrationConfig, Damping};
use crate::heston::{ChfForm, MarketContext};
use crate::reference::QuadratureConfig;
use crate::swift::SelectionConfig;

#[derive(Debug, Parser)]
#[command(
    name = "heston-swift",
    version,
    about = "Heston pricing and calibration with SWIFT"
)]
#[command(after_help = format!("Named quote sets and parameter sets are read from ${FIXTURE_DIR_VAR} when set, otherwise from the bundled fixtures.\nExit codes: 0 success, 2 input error, 3 numerical failure, 4 calibration did not reach the residual tolerance."))]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Price a quote file.
    Price(PriceCli),
    /// Write synthetic prices for a strike set or a strike grid.
    Generate(GenerateCli),
    /// Calibrate the five model parameters to a quote file.
    Calibrate(CalibrateCli),
    /// Time the calibration protocol per backend.
    Speed(SpeedCli),
    /// Calibrate repeatedly from random starts around a target.
    Converge(ConvergeCli),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormArg {
    Cui,
    Schoutens,
}

impl From<FormArg> for ChfForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::Cui => ChfForm::Cui,
            FormArg::Schoutens => ChfForm::Schoutens,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DampingArg {
    Identity,
    Marquardt,
}

#[derive(Debug, Args)]
pub struct PricingOpts {
    #[arg(long, value_enum, default_value_t = BackendKind::Kswift)]
    pub backend: BackendKind,
    /// Wavelet scale (skips the automatic scale choice).
    #[arg(long)]
    pub m: Option<i32>,
    /// Wavelet series half-width.
    #[arg(long)]
    pub eta: Option<usize>,
    /// Cosine terms for both density and payoff (a power of two).
    #[arg(long)]
    pub j: Option<usize>,
    /// Interval width in cumulant standard deviations.
    #[arg(long = "L")]
    pub width: Option<f64>,
    /// Tolerance for the automatic scale choice.
    #[arg(long)]
    pub scale_tol: Option<f64>,
    /// Reference pricer: upper integration limit.
    #[arg(long)]
    pub u_max: Option<f64>,
    /// Reference pricer: Gauss–Legendre nodes.
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long, value_enum, default_value_t = FormArg::Cui)]
    pub chf_form: FormArg,
}

impl PricingOpts {
    fn setup(&self, selection: SelectionConfig) -> Result<PricingSetup, HarnessError> {
        let defaults = QuadratureConfig::default();
        let quadrature = QuadratureConfig::new(
            self.nodes.unwrap_or(defaults.nodes),
            self.u_max.unwrap_or(defaults.u_max),
        )?;
        let mut selection = selection;
        if let Some(tol) = self.scale_tol {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(HarnessError::Input(format!(
                    "--scale-tol must be positive, got {tol}"
                )));
            }
            selection.scale_tol = tol;
            selection.area_tol = selection.area_tol.max(tol);
        }
        if let Some(w) = self.width {
            if !(w.is_finite() && w > 0.0) {
                return Err(HarnessError::Input(format!(
                    "--L must be positive, got {w}"
                )));
            }
        }
        Ok(PricingSetup {
            backend: self.backend,
            selection,
            overrides: SwiftOverrides {
                m: self.m,
                eta: self.eta,
                j: self.j,
                width: self.width,
            },
            quadrature,
            form: self.chf_form.into(),
            per_quote: false,
        })
    }
}

#[derive(Debug, Args)]
pub struct OutputOpts {
    /// Write the report here (JSON for .json paths, a text table otherwise).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

impl OutputOpts {
    fn emit(&self, report: &ExperimentReport) -> Result<(), HarnessError> {
        if let Some(path) = &self.out {
            report.write(path)?;
        }
        let text = if self.json {
            report.to_json()
        } else {
            report.to_table()
        };
        print_stdout(&text);
        Ok(())
    }
}

fn print_stdout(text: &str) {
    let mut out = std::io::stdout().lock();
    // A closed pipe is not an error worth reporting.
    let _ = out.write_all(text.as_bytes());
    if !text.ends_with('\n') {
        let _ = out.write_all(b"\n");
    }
}

#[derive(Debug, Args)]
pub struct PriceCli {
    /// Parameter set name, JSON file or `kappa,v_bar,sigma,rho,v0`.
    #[arg(long)]
    pub params: String,
    /// Quote set name (set1, set2, stress) or quote file.
    #[arg(long)]
    pub quotes: String,
    /// Replaces the quote file's interest rate.
    #[arg(long)]
    pub rate: Option<f64>,
    #[command(flatten)]
    pub pricing: PricingOpts,
    #[command(flatten)]
    pub output: OutputOpts,
}

#[derive(Debug, Args)]
pub struct GenerateCli {
    #[arg(long)]
    pub params: String,
    /// Quote set name or quote file whose strikes and maturities are priced.
    #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
    pub quotes: Option<String>,
    /// Price the strike grid `x_k = (2k − J)/2^{m+1}` instead (needs --m, --j, --maturity).
    ///
    /// Each point uses its out-of-the-money payoff. Accuracy holds while
    /// `J` covers `2^m (|x_k| + interval half-width)`; raise --j for a wider
    /// accurate window.
    #[arg(long, requires_all = ["maturity"])]
    pub grid: bool,
    #[arg(long)]
    pub maturity: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub spot: f64,
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Standard deviation of additive Gaussian price noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[command(flatten)]
    pub pricing: PricingOpts,
    /// Write the quote file here (JSON for .json paths).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateCli {
    #[arg(long)]
    pub quotes: String,
    /// Initial guess.
    #[arg(long, default_value = "theta2_0")]
    pub initial: String,
    /// Replace observed prices by the backend's own prices at these parameters.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub eps1: Option<f64>,
    #[arg(long)]
    pub eps2: Option<f64>,
    #[arg(long)]
    pub eps3: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, value_enum, default_value_t = DampingArg::Identity)]
    pub damping: DampingArg,
    /// Exit 0 even when the residual tolerance is not reached.
    #[arg(long)]
    pub allow_partial: bool,
    #[command(flatten)]
    pub pricing: PricingOpts,
    #[command(flatten)]
    pub output: OutputOpts,
}

#[derive(Debug, Args)]
pub struct SpeedCli {
    /// set1, set2 or set3.
    #[arg(long, default_value = "set1")]
    pub set: String,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    /// Timed evaluations of the plain SWIFT backend.
    #[arg(long, default_value_t = 1)]
    pub swift_reps: usize,
    /// Backends to time (repeatable); all three by default.
    #[arg(long, value_enum)]
    pub backend: Vec<BackendKind>,
    #[arg(long, default_value = "theta2")]
    pub target: String,
    #[arg(long, default_value = "theta2_0")]
    pub initial: String,
    #[command(flatten)]
    pub output: OutputOpts,
}

#[derive(Debug, Args)]
pub struct ConvergeCli {
    /// fx, ir or eq (or any parameter specification).
    #[arg(long)]
    pub target: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub eps1: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[command(flatten)]
    pub output: OutputOpts,
}

fn calibration_config(
    eps1: Option<f64>,
    eps2: Option<f64>,
    eps3: Option<f64>,
    max_iter: Option<usize>,
    damping: DampingArg,
) -> Result<CalibrationConfig, HarnessError> {
    let d = CalibrationConfig::default();
    let cfg = CalibrationConfig {
        eps1: eps1.unwrap_or(d.eps1),
        eps2: eps2.unwrap_or(d.eps2),
        eps3: eps3.unwrap_or(d.eps3),
        max_iterations: max_iter.unwrap_or(d.max_iterations),
        damping: match damping {
            DampingArg::Identity => Damping::Identity,
            DampingArg::Marquardt => Damping::Marquardt,
        },
        ..d
    };
    cfg.validate()
        .map_err(|e| HarnessError::Input(e.to_string()))?;
    Ok(cfg)
}

fn run_command(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Price(a) => {
            let (quotes, _) = resolve_quotes(&a.quotes)?;
            let report = cmd_price(&PriceArgs {
                params: resolve_params(&a.params)?,
                quotes,
                setup: a.pricing.setup(SelectionConfig::default())?,
                rate: a.rate,
            })?;
            a.output.emit(&report)
        }
        Command::Generate(a) => {
            let params = resolve_params(&a.params)?;
            let setup = a.pricing.setup(SelectionConfig::default())?;
            let source = match &a.quotes {
                Some(spec) => {
                    let (mut file, _) = resolve_quotes(spec)?;
                    if let Some(r) = a.rate {
                        file.context =
                            MarketContext::new(file.context.spot, r, file.context.dividend)?;
                    }
                    GenerateSource::Quotes(file)
                }
                None => {
                    let (Some(m), Some(j), Some(maturity)) = (a.pricing.m, a.pricing.j, a.maturity)
                    else {
                        return Err(HarnessError::Input(
                            "--grid needs --m, --j and --maturity".into(),
                        ));
                    };
                    GenerateSource::Grid(GridSpec {
                        m,
                        j,
                        maturity,
                        context: MarketContext::new(a.spot, a.rate.unwrap_or(0.0), 0.0)?,
                    })
                }
            };
            let file = cmd_generate(&GenerateArgs {
                params,
                source,
                setup,
                seed: a.seed,
                noise: a.noise,
            })?;
            match &a.out {
                Some(path) => file.write(path),
                None => {
                    let header = format!(
                        "# generated at {} with backend {}, seed {}, noise {}\n",
                        a.params, setup.backend, a.seed, a.noise
                    );
                    print_stdout(&(header + &file.to_text()));
                    Ok(())
                }
            }
        }
        Command::Calibrate(a) => {
            let (quotes, _) = resolve_quotes(&a.quotes)?;
            let config = calibration_config(a.eps1, a.eps2, a.eps3, a.max_iter, a.damping)?;
            let outcome = cmd_calibrate(&CalibrateArgs {
                quotes,
                initial: resolve_params(&a.initial)?,
                target: a.target.as_deref().map(resolve_params).transpose()?,
                setup: a.pricing.setup(SelectionConfig::default())?,
                config,
                rate: a.rate,
            })?;
            a.output.emit(&outcome.report)?;
            if !outcome.result.converged() && !a.allow_partial {
                return Err(HarnessError::NotConverged {
                    reason: outcome.result.stop_reason,
                    residual_norm: outcome.result.residual_norm,
                    eps1: config.eps1,
                });
            }
            Ok(())
        }
        Command::Speed(a) => {
            let set: QuoteSet = a.set.parse().map_err(HarnessError::Input)?;
            let mut args = SpeedArgs {
                set,
                reps: a.reps,
                swift_reps: a.swift_reps,
                target: resolve_params(&a.target)?,
                initial: resolve_params(&a.initial)?,
                selection: speed_selection(),
                ..SpeedArgs::default()
            };
            if !a.backend.is_empty() {
                args.backends = a.backend;
            }
            let report = cmd_speed(&args)?;
            a.output.emit(&report)
        }
        Command::Converge(a) => {
            let mut args = ConvergeArgs::new(&a.target, a.trials, a.seed)?;
            args.config = calibration_config(a.eps1, None, None, a.max_iter, DampingArg::Identity)?;
            let report = cmd_converge(&args)?;
            a.output.emit(&report)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run_command(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
