//! Random starts within ten percent of a target, each calibrated on quotes
//! generated at the target.

use heston_swift::harness::{cmd_converge, ConvergeArgs};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let target = std::env::args().nth(1).unwrap_or_else(|| "eq".into());
    let report = cmd_converge(&ConvergeArgs::new(&target, 20, 0)?)?;
    for col in [
        "converged_fraction",
        "kappa_error",
        "sigma_error",
        "mean_iterations",
    ] {
        println!(
            "{col:>20}: {:.3e}",
            report.number(0, col).unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
