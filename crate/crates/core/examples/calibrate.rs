//! Calibrate to forty synthetic quotes over eight maturities, starting from
//! a guess with the vol-of-vol thirty times too large.

use heston_swift::calibration::CalibrationConfig;
use heston_swift::harness::{cmd_calibrate, resolve_params, CalibrateArgs, PricingSetup, QuoteSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args = CalibrateArgs {
        quotes: QuoteSet::Set2.load()?,
        initial: resolve_params("theta2_0")?,
        target: Some(resolve_params("theta2")?),
        setup: PricingSetup::default(),
        config: CalibrationConfig::default(),
        rate: None,
    };
    let outcome = cmd_calibrate(&args)?;
    let r = &outcome.result;
    println!(
        "{} after {} iterations, |r| = {:.3e}",
        r.stop_reason, r.iterations, r.residual_norm
    );
    println!("fitted: {:?}", r.theta_hat);
    for (i, step) in r.trace.iter().enumerate() {
        println!(
            "  {:>2}  f = {:.3e}  mu = {:.1e}",
            i + 1,
            step.objective,
            step.mu
        );
    }
    Ok(())
}
