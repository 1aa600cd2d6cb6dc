//! Calibration timings of the multi-strike backend and the reference
//! pricer on one maturity with forty strikes.

use heston_swift::harness::{cmd_speed, BackendKind, SpeedArgs};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args = SpeedArgs {
        reps: 10,
        backends: vec![BackendKind::Kswift, BackendKind::Cp],
        ..SpeedArgs::default()
    };
    let report = cmd_speed(&args)?;
    for row in 0..report.rows.len() {
        println!(
            "{:>6}: {:.3e} s per evaluation, {} evaluations",
            report.rows[row][1].as_str().unwrap_or("?"),
            report
                .number(row, "time_per_evaluation")
                .unwrap_or(f64::NAN),
            report.number(row, "evaluations").unwrap_or(f64::NAN),
        );
    }
    println!("ratios: {}", report.metadata["ratios"]);
    Ok(())
}
