//! Analytic ChF gradient and SWIFT price Jacobian against central
//! differences.

use heston_swift::harness::{resolve_params, QuoteSet};
use heston_swift::heston::{chf_cui, chf_gradient, GRADIENT_ORDER};
use heston_swift::swift::{
    price_and_gradient_multi_strike, price_multi_strike, select_params, SelectionConfig,
};
use heston_swift::HestonParams;
use num_complex::Complex64;

fn bumped(theta: &HestonParams, i: usize, h: f64) -> HestonParams {
    let mut a = theta.to_array();
    a[i] += h;
    HestonParams::from_array(a)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let theta = resolve_params("theta1")?;
    let set = QuoteSet::Set2.load()?;
    let ctx = set.context;

    let u = Complex64::new(1.3, 0.0);
    let ev = chf_gradient(u, 0.5, &theta, &ctx)?;
    println!("ChF partials at u = 1.3, tau = 0.5:");
    for (i, g) in ev.gradient.unwrap_or_default().iter().enumerate() {
        let h = 1e-6 * theta.to_array()[i].abs().max(1e-3);
        let fd = (chf_cui(u, 0.5, &bumped(&theta, i, h), &ctx)?
            - chf_cui(u, 0.5, &bumped(&theta, i, -h), &ctx)?)
            / (2.0 * h);
        println!("  {:>5}: {g:.8}  (fd {fd:.8})", GRADIENT_ORDER[i]);
    }

    let tau = set.quotes[0].maturity;
    let strikes: Vec<f64> = set
        .quotes
        .iter()
        .filter(|q| q.maturity == tau)
        .map(|q| q.strike)
        .collect();
    let sp = select_params(&theta, tau, &ctx, &strikes, &SelectionConfig::default())?;
    let (prices, jac) = price_and_gradient_multi_strike(&theta, &ctx, tau, &strikes, &sp)?;
    println!("\nJacobian of {} prices at tau = {tau:.4}:", prices.len());
    for (k, row) in strikes.iter().zip(&jac) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:+.4e}")).collect();
        println!("  K = {k:.3}: {}", cells.join(" "));
    }
    // Five-point stencil; shorter steps drown the small entries in
    // rounding noise.
    let mut worst: f64 = 0.0;
    for i in 0..5 {
        let h = 1e-3 * theta.to_array()[i].abs();
        let at = |k: f64| price_multi_strike(&bumped(&theta, i, k * h), &ctx, tau, &strikes, &sp);
        let (p2, p1, m1, m2) = (at(2.0)?, at(1.0)?, at(-1.0)?, at(-2.0)?);
        for (n, row) in jac.iter().enumerate() {
            let fd = (-p2[n] + 8.0 * p1[n] - 8.0 * m1[n] + m2[n]) / (12.0 * h);
            worst = worst.max((row[i] - fd).abs() / fd.abs());
        }
    }
    println!("max relative deviation from central differences: {worst:.2e}");
    Ok(())
}
