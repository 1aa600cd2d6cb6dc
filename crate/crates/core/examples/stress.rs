//! Long and short maturity stress prices at S0 = 100: SWIFT at scales 3
//! and 7 next to the reference pricer with both ChF forms.
//!
//! At tau = 45 the coarse scale is already exact. At tau = 0.04 it
//! underprices, and the reference pricer drifts with its truncation point
//! for the deep out-of-the-money strike.

use heston_swift::harness::{resolve_params, stress_report};
use heston_swift::reference::{price_cp, QuadratureConfig};
use heston_swift::{ChfForm, MarketContext, OptionQuote};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let theta = resolve_params("stress")?;
    print!("{}", stress_report(&theta, None)?.to_table());

    println!("\nK=200, tau=0.04, reference pricer against its truncation point:");
    let ctx = MarketContext::new(100.0, 0.0, 0.0)?;
    let quote = OptionQuote::call(200.0, 0.04);
    for u_max in [100.0, 150.0, 200.0, 250.0, 300.0, 350.0, 400.0] {
        let qc = QuadratureConfig::new(64, u_max)?;
        let price = price_cp(&theta, &ctx, &quote, &qc, ChfForm::Schoutens)?;
        println!("  u_max {u_max:>5}: {price:+.6e}");
    }
    Ok(())
}
