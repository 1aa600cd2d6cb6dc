use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde_json::{json, Value};

use super::fixtures::{resolve_params, QuoteSet};
use super::quote_file::QuoteFile;
use super::report::{Experiment, ExperimentReport};
use super::{Backend, BackendKind, HarnessError, PricingSetup};
use crate::calibration::{
    calibrate, with_model_prices, CalibrationConfig, CalibrationResult, PricingBackend,
};
use crate::heston::{ChfForm, HestonParams, MarketContext};
use crate::reference::{price_cp, QuadratureConfig};
use crate::swift::{
    price_single, price_strike_grid_otm, OptionQuote, SelectionConfig, SwiftParams,
};

fn theta_json(theta: &HestonParams) -> Value {
    serde_json::to_value(theta).expect("parameters serialise")
}

fn swift_label(sp: &SwiftParams) -> String {
    format!(
        "m={} eta={} J={} x=[{:.4}, {:.4}]",
        sp.m, sp.eta, sp.j_density, sp.x_low, sp.x_high
    )
}

/// Per-quote description of the configuration that priced it.
fn quote_configs(backend: &Backend) -> Vec<String> {
    match backend {
        Backend::Kswift(b) => {
            let groups = b.group_params();
            let quotes = b.quotes();
            // Groups are built in order of first appearance, so each quote's
            // group is found by maturity (or position, when per quote).
            if groups.len() == quotes.len() {
                groups.iter().map(|(_, sp)| swift_label(sp)).collect()
            } else {
                quotes
                    .iter()
                    .map(|q| {
                        groups
                            .iter()
                            .find(|(tau, _)| *tau == q.maturity)
                            .map(|(_, sp)| swift_label(sp))
                            .unwrap_or_default()
                    })
                    .collect()
            }
        }
        Backend::Swift(b) => b.params().iter().map(swift_label).collect(),
        Backend::Cp(b) => {
            let label = format!(
                "nodes={} u_max={} form={:?}",
                b.quadrature().nodes,
                b.quadrature().u_max,
                b.form()
            )
            .to_lowercase();
            vec![label; b.quotes().len()]
        }
    }
}

fn with_rate(mut ctx: MarketContext, rate: Option<f64>) -> Result<MarketContext, HarnessError> {
    if let Some(r) = rate {
        ctx = MarketContext::new(ctx.spot, r, ctx.dividend)?;
    }
    Ok(ctx)
}

#[derive(Debug, Clone)]
pub struct PriceArgs {
    pub params: HestonParams,
    pub quotes: QuoteFile,
    pub setup: PricingSetup,
    /// Replaces the quote file's interest rate.
    pub rate: Option<f64>,
}

/// Prices every quote with the chosen backend. SWIFT parameters are chosen
/// at the pricing parameters unless overridden.
pub fn cmd_price(args: &PriceArgs) -> Result<ExperimentReport, HarnessError> {
    let ctx = with_rate(args.quotes.context, args.rate)?;
    let quotes = &args.quotes.quotes;
    let start = Instant::now();
    let backend = args.setup.build(quotes, &ctx, &args.params)?;
    let prices = backend.as_dyn().prices(&args.params)?;
    let wall_time = start.elapsed().as_secs_f64();

    let mut report = ExperimentReport::new(
        Experiment::Price,
        &["kind", "strike", "maturity", "price", "backend", "config"],
    );
    for ((q, p), cfg) in quotes.iter().zip(prices).zip(quote_configs(&backend)) {
        report.push_row(vec![
            json!(q.kind.to_string()),
            json!(q.strike),
            json!(q.maturity),
            json!(p),
            json!(args.setup.backend.to_string()),
            json!(cfg),
        ]);
    }
    report.set_meta("params", theta_json(&args.params));
    report.set_meta("context", ctx);
    report.set_meta("setup", args.setup);
    report.set_meta("wall_time", wall_time);
    Ok(report)
}

/// Uniform log-moneyness grid `x_k = (2k − J_d)/2^{m+1}` at one maturity.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub m: i32,
    pub j: usize,
    pub maturity: f64,
    pub context: MarketContext,
}

#[derive(Debug, Clone)]
pub enum GenerateSource {
    Quotes(QuoteFile),
    Grid(GridSpec),
}

#[derive(Debug, Clone)]
pub struct GenerateArgs {
    pub params: HestonParams,
    pub source: GenerateSource,
    pub setup: PricingSetup,
    pub seed: u64,
    /// Standard deviation of additive Gaussian noise.
    pub noise: f64,
}

/// Synthetic prices at `params`, optionally perturbed by seeded noise.
pub fn cmd_generate(args: &GenerateArgs) -> Result<QuoteFile, HarnessError> {
    if !(args.noise.is_finite() && args.noise >= 0.0) {
        return Err(HarnessError::Input(format!(
            "noise must be nonnegative, got {}",
            args.noise
        )));
    }
    let mut file = match &args.source {
        GenerateSource::Quotes(file) => {
            let backend = args
                .setup
                .build(&file.quotes, &file.context, &args.params)?;
            QuoteFile {
                context: file.context,
                quotes: with_model_prices(&args.params, backend.as_dyn())?,
            }
        }
        GenerateSource::Grid(grid) => {
            let setup = PricingSetup {
                overrides: super::SwiftOverrides {
                    m: Some(grid.m),
                    j: Some(grid.j),
                    ..args.setup.overrides
                },
                ..args.setup
            };
            let ctx = grid.context;
            let sp = setup.swift_params(&args.params, grid.maturity, &ctx, &[ctx.spot])?;
            let quotes = price_strike_grid_otm(&args.params, &ctx, grid.maturity, &sp)?
                .into_iter()
                .map(|(x, price)| {
                    OptionQuote::call(ctx.spot * (-x).exp(), grid.maturity).with_price(price)
                })
                .collect();
            QuoteFile {
                context: ctx,
                quotes,
            }
        }
    };
    if args.noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let normal =
            Normal::new(0.0, args.noise).map_err(|e| HarnessError::Input(e.to_string()))?;
        for q in &mut file.quotes {
            q.price = q.price.map(|p| p + normal.sample(&mut rng));
        }
    }
    file.validate()?;
    Ok(file)
}

#[derive(Debug, Clone)]
pub struct CalibrateArgs {
    pub quotes: QuoteFile,
    pub initial: HestonParams,
    /// When given, observed prices are replaced by the backend's own prices
    /// at these parameters.
    pub target: Option<HestonParams>,
    pub setup: PricingSetup,
    pub config: CalibrationConfig,
    pub rate: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct CalibrationOutcome {
    pub report: ExperimentReport,
    pub result: CalibrationResult,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Backend built at `initial`, with quotes priced at `target` by that same
/// backend when a target is given.
fn calibration_problem(
    quotes: &[OptionQuote],
    ctx: &MarketContext,
    initial: &HestonParams,
    target: Option<&HestonParams>,
    setup: &PricingSetup,
) -> Result<Backend, HarnessError> {
    let backend = setup.build(quotes, ctx, initial)?;
    match target {
        None => Ok(backend),
        Some(t) => {
            let priced = with_model_prices(t, backend.as_dyn())?;
            setup.build(&priced, ctx, initial)
        }
    }
}

const CALIBRATION_COLUMNS: [&str; 12] = [
    "backend",
    "quotes",
    "iterations",
    "stop_reason",
    "final_objective",
    "residual_norm",
    "wall_time",
    "kappa",
    "v_bar",
    "sigma",
    "rho",
    "v0",
];

fn calibration_row(backend: &str, quotes: usize, r: &CalibrationResult) -> Vec<Value> {
    let t = r.theta_hat;
    vec![
        json!(backend),
        json!(quotes),
        json!(r.iterations),
        json!(r.stop_reason.to_string()),
        json!(r.final_objective),
        json!(r.residual_norm),
        json!(r.wall_time),
        json!(t.kappa),
        json!(t.v_bar),
        json!(t.sigma),
        json!(t.rho),
        json!(t.v0),
    ]
}

/// Runs one calibration. The caller decides what a stop other than
/// `ResidualTol` means.
pub fn cmd_calibrate(args: &CalibrateArgs) -> Result<CalibrationOutcome, HarnessError> {
    let ctx = with_rate(args.quotes.context, args.rate)?;
    let backend = calibration_problem(
        &args.quotes.quotes,
        &ctx,
        &args.initial,
        args.target.as_ref(),
        &args.setup,
    )?;
    let b = backend.as_dyn();
    let result = calibrate(b, &args.initial, &args.config)?;

    let observed: Vec<f64> = b.quotes().iter().filter_map(|q| q.price).collect();
    let fitted = b.prices(&result.theta_hat)?;
    let mut report = ExperimentReport::new(Experiment::Calibrate, &CALIBRATION_COLUMNS);
    report.push_row(calibration_row(b.name(), b.quotes().len(), &result));
    report.set_meta("initial", theta_json(&args.initial));
    report.set_meta("target", args.target.as_ref().map(theta_json));
    report.set_meta("context", ctx);
    report.set_meta("config", args.config);
    report.set_meta("pricing", backend.describe());
    report.set_meta("max_repricing_error", max_abs_diff(&fitted, &observed));
    report.set_meta("evaluations", result.evaluations);
    report.set_meta("trace", &result.trace);
    Ok(CalibrationOutcome { report, result })
}

/// Selection used by the speed protocol: tolerances matched to the
/// accuracy the calibration needs rather than to full double precision.
pub fn speed_selection() -> SelectionConfig {
    SelectionConfig {
        scale_tol: 1e-8,
        area_tol: 1e-8,
        ..SelectionConfig::default()
    }
}

/// Selection used by the convergence protocol.
pub fn converge_selection() -> SelectionConfig {
    SelectionConfig {
        scale_tol: 1e-6,
        area_tol: 1e-7,
        ..SelectionConfig::default()
    }
}

#[derive(Debug, Clone)]
pub struct SpeedArgs {
    pub set: QuoteSet,
    pub reps: usize,
    /// Evaluations timed for the plain SWIFT backend, whose single
    /// evaluation can take seconds.
    pub swift_reps: usize,
    pub backends: Vec<BackendKind>,
    pub target: HestonParams,
    pub initial: HestonParams,
    pub selection: SelectionConfig,
    pub quadrature: QuadratureConfig,
    pub config: CalibrationConfig,
}

impl Default for SpeedArgs {
    fn default() -> Self {
        let named = |n: &str| resolve_params(n).expect("bundled parameter set");
        Self {
            set: QuoteSet::Set1,
            reps: 100,
            swift_reps: 1,
            backends: vec![BackendKind::Kswift, BackendKind::Swift, BackendKind::Cp],
            target: named("theta2"),
            initial: named("theta2_0"),
            selection: speed_selection(),
            quadrature: QuadratureConfig::default(),
            config: CalibrationConfig::default(),
        }
    }
}

struct SpeedRow {
    set: QuoteSet,
    backend: BackendKind,
    per_eval: f64,
    calibration_time: f64,
    evaluations: usize,
    /// `None` when the calibration time is projected rather than measured.
    result: Option<CalibrationResult>,
    describe: Value,
}

fn time_evaluations(
    b: &dyn PricingBackend,
    theta: &HestonParams,
    reps: usize,
) -> Result<f64, HarnessError> {
    let reps = reps.max(1);
    let start = Instant::now();
    for _ in 0..reps {
        b.prices_and_jacobian(theta)?;
    }
    Ok(start.elapsed().as_secs_f64() / reps as f64)
}

/// `projected_evals` switches to projection: one calibration of the plain
/// SWIFT backend runs for minutes, so its time is the per-evaluation cost
/// times the evaluation count of the same problem under KSWIFT, which
/// follows the identical iterates.
fn speed_run(
    args: &SpeedArgs,
    set: QuoteSet,
    kind: BackendKind,
    projected_evals: Option<usize>,
) -> Result<SpeedRow, HarnessError> {
    let file = set.load()?;
    let setup = PricingSetup {
        backend: kind,
        selection: args.selection,
        quadrature: args.quadrature,
        per_quote: set.per_quote(),
        ..PricingSetup::default()
    };
    let backend = calibration_problem(
        &file.quotes,
        &file.context,
        &args.initial,
        Some(&args.target),
        &setup,
    )?;
    let b = backend.as_dyn();
    let describe = backend.describe();
    if let Some(evaluations) = projected_evals {
        let per_eval = time_evaluations(b, &args.initial, args.swift_reps)?;
        return Ok(SpeedRow {
            set,
            backend: kind,
            per_eval,
            calibration_time: per_eval * evaluations as f64,
            evaluations,
            result: None,
            describe,
        });
    }
    let reps = if kind == BackendKind::Swift {
        args.swift_reps
    } else {
        args.reps
    }
    .max(1);
    let per_eval = time_evaluations(b, &args.initial, reps)?;
    let mut total = 0.0;
    let mut last = None;
    for _ in 0..reps {
        let r = calibrate(b, &args.initial, &args.config)?;
        total += r.wall_time;
        last = Some(r);
    }
    let result = last.expect("at least one repetition");
    Ok(SpeedRow {
        set,
        backend: kind,
        per_eval,
        calibration_time: total / reps as f64,
        evaluations: result.evaluations,
        result: Some(result),
        describe,
    })
}

/// Timing of the calibration protocol per backend. Each backend prices the
/// quotes at the target itself and calibrates them from the initial guess;
/// times exclude fixture loading and backend construction.
pub fn cmd_speed(args: &SpeedArgs) -> Result<ExperimentReport, HarnessError> {
    if args.set == QuoteSet::Stress {
        return Err(HarnessError::Input(
            "speed runs on set1, set2 or set3".into(),
        ));
    }
    let mut rows = Vec::new();
    if args.set == QuoteSet::Set3 {
        // Only the multi-strike backend changes between sets 2 and 3.
        rows.push(speed_run(args, QuoteSet::Set2, BackendKind::Kswift, None)?);
        rows.push(speed_run(args, QuoteSet::Set3, BackendKind::Kswift, None)?);
    } else {
        let mut order = args.backends.clone();
        order.sort_by_key(|k| *k != BackendKind::Kswift);
        order.dedup();
        let mut kswift_evals = None;
        for kind in order {
            let projected = if kind == BackendKind::Swift {
                kswift_evals
            } else {
                None
            };
            let row = speed_run(args, args.set, kind, projected)?;
            if kind == BackendKind::Kswift {
                kswift_evals = Some(row.evaluations);
            }
            rows.push(row);
        }
    }

    let mut report = ExperimentReport::new(
        Experiment::Speed,
        &[
            "set",
            "backend",
            "time_per_evaluation",
            "calibration_time",
            "timing",
            "evaluations",
            "iterations",
            "stop_reason",
            "residual_norm",
        ],
    );
    for r in &rows {
        report.push_row(vec![
            json!(r.set.name()),
            json!(r.backend.to_string()),
            json!(r.per_eval),
            json!(r.calibration_time),
            json!(if r.result.is_some() {
                "measured"
            } else {
                "projected"
            }),
            json!(r.evaluations),
            r.result
                .as_ref()
                .map_or(Value::Null, |c| json!(c.iterations)),
            r.result
                .as_ref()
                .map_or(Value::Null, |c| json!(c.stop_reason.to_string())),
            r.result
                .as_ref()
                .map_or(Value::Null, |c| json!(c.residual_norm)),
        ]);
    }
    let find =
        |set: QuoteSet, kind: BackendKind| rows.iter().find(|r| r.set == set && r.backend == kind);
    let mut ratios = serde_json::Map::new();
    if let Some(k) = find(args.set, BackendKind::Kswift) {
        for other in [BackendKind::Swift, BackendKind::Cp] {
            if let Some(o) = find(args.set, other) {
                ratios.insert(
                    format!("{other}_over_kswift_per_evaluation"),
                    json!(o.per_eval / k.per_eval),
                );
                ratios.insert(
                    format!("{other}_over_kswift_calibration"),
                    json!(o.calibration_time / k.calibration_time),
                );
            }
        }
    }
    if let (Some(s3), Some(s2)) = (
        find(QuoteSet::Set3, BackendKind::Kswift),
        find(QuoteSet::Set2, BackendKind::Kswift),
    ) {
        ratios.insert(
            "set3_over_set2_per_evaluation".into(),
            json!(s3.per_eval / s2.per_eval),
        );
        ratios.insert(
            "set3_over_set2_calibration".into(),
            json!(s3.calibration_time / s2.calibration_time),
        );
    }
    report.set_meta("ratios", ratios);
    report.set_meta("reps", args.reps);
    report.set_meta("swift_reps", args.swift_reps);
    report.set_meta("target", theta_json(&args.target));
    report.set_meta("initial", theta_json(&args.initial));
    report.set_meta("selection", args.selection);
    report.set_meta("config", args.config);
    report.set_meta(
        "pricing",
        rows.iter()
            .map(|r| json!({"set": r.set.name(), "setup": r.describe}))
            .collect::<Vec<_>>(),
    );
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct ConvergeArgs {
    pub target_name: String,
    pub target: HestonParams,
    pub trials: usize,
    pub seed: u64,
    pub config: CalibrationConfig,
    pub selection: SelectionConfig,
}

impl ConvergeArgs {
    pub fn new(target_name: &str, trials: usize, seed: u64) -> Result<Self, HarnessError> {
        Ok(Self {
            target_name: target_name.to_string(),
            target: resolve_params(target_name)?,
            trials,
            seed,
            config: CalibrationConfig::default(),
            selection: converge_selection(),
        })
    }
}

/// Start points within ±10% of `target`, per component, in trial order.
pub fn random_starts(target: &HestonParams, trials: usize, seed: u64) -> Vec<HestonParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = [
        target.kappa,
        target.v_bar,
        target.sigma,
        target.rho,
        target.v0,
    ];
    (0..trials)
        .map(|_| {
            let p: [f64; 5] =
                std::array::from_fn(|i| base[i] * (1.0 + rng.random_range(-0.1..=0.1)));
            HestonParams {
                kappa: p[0],
                v_bar: p[1],
                sigma: p[2],
                rho: p[3],
                v0: p[4],
            }
        })
        .collect()
}

/// Repeated calibrations on Set 2 quotes generated at the target, from
/// random starts. One KSWIFT backend with parameters chosen at the target
/// generates the quotes and serves every trial.
pub fn cmd_converge(args: &ConvergeArgs) -> Result<ExperimentReport, HarnessError> {
    if args.trials == 0 {
        return Err(HarnessError::Input("at least one trial is needed".into()));
    }
    let file = QuoteSet::Set2.load()?;
    let setup = PricingSetup {
        selection: args.selection,
        ..PricingSetup::default()
    };
    let backend = calibration_problem(
        &file.quotes,
        &file.context,
        &args.target,
        Some(&args.target),
        &setup,
    )?;
    let b = backend.as_dyn();

    let starts: Vec<HestonParams> = random_starts(&args.target, args.trials, args.seed)
        .into_iter()
        .map(|s| HestonParams::from_array(args.config.bounds.project(s.to_array())))
        .collect();
    let results = starts
        .par_iter()
        .map(|s| calibrate(b, s, &args.config))
        .collect::<Result<Vec<_>, _>>()?;

    // Quality of the synthetic quotes against a converged reference pricer.
    let reference = QuadratureConfig::new(128, 400.0)?;
    let cp_prices = b
        .quotes()
        .iter()
        .map(|q| price_cp(&args.target, &file.context, q, &reference, ChfForm::Cui))
        .collect::<crate::Result<Vec<_>>>()?;
    let observed: Vec<f64> = b.quotes().iter().filter_map(|q| q.price).collect();

    let n = results.len() as f64;
    let target = args.target;
    let mean = |f: &dyn Fn(&CalibrationResult) -> f64| results.iter().map(f).sum::<f64>() / n;
    let mut report = ExperimentReport::new(
        Experiment::Converge,
        &[
            "target",
            "trials",
            "converged_fraction",
            "kappa_error",
            "v_bar_error",
            "sigma_error",
            "rho_error",
            "v0_error",
            "mean_iterations",
            "mean_time",
            "mean_residual_norm",
        ],
    );
    report.push_row(vec![
        json!(args.target_name),
        json!(results.len()),
        json!(results.iter().filter(|r| r.converged()).count() as f64 / n),
        json!(mean(&|r| (r.theta_hat.kappa - target.kappa).abs())),
        json!(mean(&|r| (r.theta_hat.v_bar - target.v_bar).abs())),
        json!(mean(&|r| (r.theta_hat.sigma - target.sigma).abs())),
        json!(mean(&|r| (r.theta_hat.rho - target.rho).abs())),
        json!(mean(&|r| (r.theta_hat.v0 - target.v0).abs())),
        json!(mean(&|r| r.iterations as f64)),
        json!(mean(&|r| r.wall_time)),
        json!(mean(&|r| r.residual_norm)),
    ]);
    report.set_meta("seed", args.seed);
    report.set_meta("target", theta_json(&target));
    report.set_meta("selection", args.selection);
    report.set_meta("config", args.config);
    report.set_meta("pricing", backend.describe());
    report.set_meta(
        "quotes",
        "set2 strikes and maturities (the experiment's own maturities are unavailable)",
    );
    report.set_meta(
        "synthetic_vs_reference_max_diff",
        max_abs_diff(&observed, &cp_prices),
    );
    report.set_meta(
        "trials",
        starts
            .iter()
            .zip(&results)
            .map(|(s, r)| {
                json!({
                    "start": theta_json(s),
                    "fitted": theta_json(&r.theta_hat),
                    "iterations": r.iterations,
                    "stop_reason": r.stop_reason.to_string(),
                    "residual_norm": r.residual_norm,
                    "wall_time": r.wall_time,
                })
            })
            .collect::<Vec<_>>(),
    );
    Ok(report)
}

/// Long and short maturity stress prices: SWIFT at scales 3 and 7 and the
/// reference pricer with both transform forms.
pub fn stress_report(
    params: &HestonParams,
    rate: Option<f64>,
) -> Result<ExperimentReport, HarnessError> {
    let file = QuoteSet::Stress.load()?;
    let ctx = with_rate(file.context, rate)?;
    let mut report = ExperimentReport::new(
        Experiment::Stress,
        &[
            "strike",
            "maturity",
            "swift_m3",
            "swift_m7",
            "u_max",
            "cp_cui",
            "cp_schoutens",
        ],
    );
    let mut configs = Vec::new();
    for q in &file.quotes {
        let swift_at = |m: i32| -> Value {
            let setup = PricingSetup {
                overrides: super::SwiftOverrides {
                    m: Some(m),
                    ..Default::default()
                },
                ..PricingSetup::default()
            };
            match setup
                .swift_params(params, q.maturity, &ctx, &[q.strike])
                .and_then(|sp| price_single(params, &ctx, q, &sp).map(|p| (sp, p)))
            {
                Ok((sp, p)) => json!({"price": p, "swift": sp}),
                Err(e) => json!({"error": e.to_string()}),
            }
        };
        let u_max = stress_u_max(q);
        let qc = QuadratureConfig::new(QuadratureConfig::default().nodes, u_max)?;
        let cp = |form: ChfForm| -> Value {
            price_cp(params, &ctx, q, &qc, form)
                .map(|p| json!(p))
                .unwrap_or(Value::Null)
        };
        let (m3, m7) = (swift_at(3), swift_at(7));
        report.push_row(vec![
            json!(q.strike),
            json!(q.maturity),
            m3.get("price").cloned().unwrap_or(Value::Null),
            m7.get("price").cloned().unwrap_or(Value::Null),
            json!(u_max),
            cp(ChfForm::Cui),
            cp(ChfForm::Schoutens),
        ]);
        configs.push(json!({"strike": q.strike, "maturity": q.maturity, "m3": m3, "m7": m7, "quadrature": qc}));
    }
    report.set_meta("params", theta_json(params));
    report.set_meta("context", ctx);
    report.set_meta("rows", configs);
    Ok(report)
}

/// Truncation used for each stress row: 6 at long maturity, 200 at short
/// maturity and 300 for the deep out-of-the-money short option.
pub fn stress_u_max(q: &OptionQuote) -> f64 {
    if q.maturity > 1.0 {
        6.0
    } else if q.strike > 150.0 {
        300.0
    } else {
        200.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_are_seeded_and_within_ten_percent() {
        let t = resolve_params("ir").unwrap();
        let a = random_starts(&t, 5, 7);
        assert_eq!(a, random_starts(&t, 5, 7));
        assert_ne!(a, random_starts(&t, 5, 8));
        for s in a {
            for (x, y) in s.to_array().iter().zip(t.to_array()) {
                assert!((x / y - 1.0).abs() <= 0.1 + 1e-15);
            }
        }
    }
}
