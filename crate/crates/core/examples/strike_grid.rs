//! One FFT prices a whole log-moneyness grid; a natural cubic spline then
//! fills in strikes between the grid points.

use heston_swift::harness::resolve_params;
use heston_swift::swift::{
    price_multi_strike, price_strike_grid, truncation_at_scale, NaturalCubicSpline, SelectionConfig,
};
use heston_swift::MarketContext;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let theta = resolve_params("theta2")?;
    let ctx = MarketContext::new(1.0, 0.0, 0.0)?;
    let tau = 1.0;
    // Interval chosen for strikes up to half a unit of log-moneyness away,
    // at scale 5 with a 256-term grid.
    let edge = [0.5f64.exp(), (-0.5f64).exp()];
    let (sp, _) = truncation_at_scale(&theta, tau, &ctx, 5, &edge, &SelectionConfig::default())?;
    let sp = sp.with_j(256)?;
    let grid = price_strike_grid(&theta, &ctx, tau, &sp)?;
    println!(
        "{} grid points, spacing {}, eta {}",
        grid.len(),
        1.0 / (2.0 * sp.scale()),
        sp.eta
    );

    let inner: Vec<(f64, f64)> = grid.into_iter().filter(|(x, _)| x.abs() <= 0.6).collect();
    let xs: Vec<f64> = inner.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = inner.iter().map(|p| p.1).collect();
    let spline = NaturalCubicSpline::new(&xs, &ys)?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (lo, hi) = (-0.5, 0.5);
    let x_test: Vec<f64> = (0..100).map(|_| rng.random_range(lo..hi)).collect();
    let strikes: Vec<f64> = x_test.iter().map(|x| ctx.spot * (-x).exp()).collect();
    let direct = price_multi_strike(&theta, &ctx, tau, &strikes, &sp)?;
    let worst = x_test
        .iter()
        .zip(&direct)
        .map(|(x, d)| (spline.eval(*x) - d).abs())
        .fold(0.0, f64::max);
    println!("spline vs direct pricing at 100 random strikes: max error {worst:.2e}");
    Ok(())
}
