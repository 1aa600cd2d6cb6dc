//! Forty strikes at one maturity: one multi-strike pass against forty
//! single-strike expansions and the reference pricer.

use std::time::Instant;

use heston_swift::harness::{resolve_params, QuoteSet};
use heston_swift::reference::{price_cp, QuadratureConfig};
use heston_swift::swift::{price_multi_strike, price_single, select_params, SelectionConfig};
use heston_swift::ChfForm;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let theta = resolve_params("theta2")?;
    let set = QuoteSet::Set1.load()?;
    let ctx = set.context;
    let tau = set.quotes[0].maturity;
    let strikes: Vec<f64> = set.quotes.iter().map(|q| q.strike).collect();

    let sp = select_params(&theta, tau, &ctx, &strikes, &SelectionConfig::default())?;
    println!("m = {}, eta = {}, J = {}", sp.m, sp.eta, sp.j_density);

    let t = Instant::now();
    let multi = price_multi_strike(&theta, &ctx, tau, &strikes, &sp)?;
    let t_multi = t.elapsed();

    let t = Instant::now();
    let single = set
        .quotes
        .iter()
        .map(|q| price_single(&theta, &ctx, q, &sp))
        .collect::<Result<Vec<_>, _>>()?;
    let t_single = t.elapsed();

    let qc = QuadratureConfig::default();
    let mut worst_single: f64 = 0.0;
    let mut worst_cp: f64 = 0.0;
    for ((q, m), s) in set.quotes.iter().zip(&multi).zip(&single) {
        let cp = price_cp(&theta, &ctx, q, &qc, ChfForm::Cui)?;
        worst_single = worst_single.max((m - s).abs());
        worst_cp = worst_cp.max((m - cp).abs());
    }
    println!("K = {:.3}: {:.10}", strikes[0], multi[0]);
    println!("K = {:.3}: {:.10}", strikes[39], multi[39]);
    println!("max |multi - single| = {worst_single:.2e}");
    println!("max |multi - cp|     = {worst_cp:.2e}");
    println!("multi-strike {t_multi:?}, single-strike loop {t_single:?}");
    Ok(())
}
