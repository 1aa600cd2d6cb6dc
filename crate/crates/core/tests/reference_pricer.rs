mod common;

use common::*;
use heston_swift::harness::{stress_u_max, QuoteSet};
use heston_swift::reference::{gradient_cp, price_and_gradient_cp, price_cp, QuadratureConfig};
use heston_swift::{ChfForm, HestonParams, MarketContext, OptionQuote};
use statrs::distribution::{ContinuousCDF, Normal};

fn stress_ctx() -> MarketContext {
    MarketContext::new(100.0, 0.0, 0.0).unwrap()
}

fn cp(theta: &HestonParams, ctx: &MarketContext, q: &OptionQuote, nodes: usize, u_max: f64) -> f64 {
    let qc = QuadratureConfig::new(nodes, u_max).unwrap();
    price_cp(theta, ctx, q, &qc, ChfForm::Cui).unwrap()
}

fn black_scholes_call(s: f64, k: f64, tau: f64, r: f64, q: f64, vol: f64) -> f64 {
    let n = Normal::standard();
    let sd = vol * tau.sqrt();
    let d1 = ((s / k).ln() + (r - q + 0.5 * vol * vol) * tau) / sd;
    s * (-q * tau).exp() * n.cdf(d1) - k * (-r * tau).exp() * n.cdf(d1 - sd)
}

#[test]
fn stress_table_values() {
    let theta = params("stress");
    let ctx = stress_ctx();
    for (k, tau, u_max, expected, tol) in [
        (50.0, 45.0, 6.0, 65.565, 1e-3),
        (100.0, 45.0, 6.0, 46.911, 1e-3),
        (200.0, 45.0, 6.0, 27.198, 1e-3),
        (50.0, 0.04, 200.0, 50.000, 1e-3),
        (100.0, 0.04, 200.0, 1.046, 1e-3),
        (200.0, 0.04, 200.0, 1.079e-3, 1e-6),
        (200.0, 0.04, 300.0, -1.174e-5, 1e-8),
    ] {
        let p = cp(&theta, &ctx, &OptionQuote::call(k, tau), 64, u_max);
        assert!(
            (p - expected).abs() <= tol,
            "K = {k}, tau = {tau}, u = {u_max}: {p}"
        );
    }
}

#[test]
fn stress_u_max_rule_matches_table_columns() {
    assert_eq!(stress_u_max(&OptionQuote::call(100.0, 45.0)), 6.0);
    assert_eq!(stress_u_max(&OptionQuote::call(100.0, 0.04)), 200.0);
    assert_eq!(stress_u_max(&OptionQuote::call(200.0, 0.04)), 300.0);
}

#[test]
fn short_expiry_prices_stable_in_node_count() {
    let theta = params("stress");
    let ctx = stress_ctx();
    for k in [50.0, 100.0] {
        let q = OptionQuote::call(k, 0.04);
        let (a, b) = (
            cp(&theta, &ctx, &q, 64, 200.0),
            cp(&theta, &ctx, &q, 128, 200.0),
        );
        assert!((a - b).abs() <= 1e-6, "K = {k}: {a} vs {b}");
    }
}

#[test]
fn deep_otm_short_expiry_depends_on_truncation() {
    let theta = params("stress");
    let ctx = stress_ctx();
    let q = OptionQuote::call(200.0, 0.04);
    let prices: Vec<f64> = (0..=6)
        .map(|i| cp(&theta, &ctx, &q, 64, 100.0 + 50.0 * i as f64))
        .collect();
    let hi = prices.iter().cloned().fold(f64::MIN, f64::max);
    let lo = prices.iter().cloned().fold(f64::MAX, f64::min);
    assert!(hi - lo > 1e-3, "{prices:?}");
    // Some truncations even give negative prices.
    assert!(lo < 0.0);
}

#[test]
fn black_scholes_limit() {
    // Constant variance and a vanishing vol of vol.
    let theta = HestonParams::new(2.0, 0.04, 1e-3, 0.0, 0.04).unwrap();
    let ctx = MarketContext::new(100.0, 0.03, 0.01).unwrap();
    for (k, tau) in [(80.0, 0.25), (100.0, 1.0), (125.0, 2.0)] {
        let p = cp(&theta, &ctx, &OptionQuote::call(k, tau), 128, 200.0);
        let bs = black_scholes_call(100.0, k, tau, 0.03, 0.01, 0.2);
        assert!((p - bs).abs() <= 1e-5, "K = {k}: {p} vs {bs}");
    }
}

#[test]
fn stabilised_and_original_forms_agree_on_short_maturities() {
    let theta = params("theta2");
    let f = set(QuoteSet::Set2);
    let qc = QuadratureConfig::default();
    for q in &f.quotes {
        let a = price_cp(&theta, &f.context, q, &qc, ChfForm::Cui).unwrap();
        let b = price_cp(&theta, &f.context, q, &qc, ChfForm::Schoutens).unwrap();
        assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn puts_follow_parity() {
    let theta = params("theta1");
    let ctx = MarketContext::new(100.0, 0.03, 0.01).unwrap();
    let qc = QuadratureConfig::new(128, 200.0).unwrap();
    for (k, tau) in [(80.0, 0.5), (120.0, 2.0)] {
        let c = price_cp(&theta, &ctx, &OptionQuote::call(k, tau), &qc, ChfForm::Cui).unwrap();
        let p = price_cp(&theta, &ctx, &OptionQuote::put(k, tau), &qc, ChfForm::Cui).unwrap();
        let gap = 100.0 * (-0.01 * tau).exp() - k * (-0.03 * tau).exp();
        assert!((c - p - gap).abs() <= 1e-10);
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let f = set(QuoteSet::Set2);
    let qc = QuadratureConfig::new(128, 200.0).unwrap();
    for name in ["theta2", "theta1"] {
        let theta = params(name);
        for q in f.quotes.iter().step_by(3) {
            let g = gradient_cp(&theta, &f.context, q, &qc, ChfForm::Cui).unwrap();
            for (i, gi) in g.iter().enumerate() {
                let h = 1e-3 * theta.to_array()[i].abs();
                let fd = fd5(&theta, i, h, |t| {
                    vec![price_cp(t, &f.context, q, &qc, ChfForm::Cui).unwrap()]
                });
                assert!(
                    rel_err(*gi, fd[0], 1e-3) <= 1e-5,
                    "{name}, K = {}, tau = {}, column {i}: {} vs {}",
                    q.strike,
                    q.maturity,
                    gi,
                    fd[0]
                );
            }
        }
    }
}

#[test]
fn gradient_price_equals_plain_price() {
    let theta = params("theta2");
    let f = set(QuoteSet::Set2);
    let qc = QuadratureConfig::default();
    for form in [ChfForm::Cui, ChfForm::Schoutens] {
        for q in &f.quotes {
            let (p, _) = price_and_gradient_cp(&theta, &f.context, q, &qc, form).unwrap();
            assert_eq!(p, price_cp(&theta, &f.context, q, &qc, form).unwrap());
        }
    }
}

#[test]
fn correlation_moves_wings_in_opposite_directions() {
    // Raising rho fattens the right tail and thins the left one.
    let theta = params("theta2");
    let ctx = MarketContext::new(1.0, 0.02, 0.0).unwrap();
    let qc = QuadratureConfig::new(128, 200.0).unwrap();
    let rho = |k: f64| {
        gradient_cp(&theta, &ctx, &OptionQuote::call(k, 1.0), &qc, ChfForm::Cui).unwrap()[4]
    };
    assert!(rho(1.5) > 0.0);
    assert!(rho(0.6) < 0.0);
}

#[test]
fn rho_partial_shrinks_with_vol_of_vol() {
    let ctx = MarketContext::new(1.0, 0.02, 0.0).unwrap();
    let qc = QuadratureConfig::new(128, 200.0).unwrap();
    let q = OptionQuote::call(1.2, 1.0);
    let rho = |sigma: f64| {
        let theta = HestonParams::new(1.5, 0.04, sigma, -0.5, 0.04).unwrap();
        gradient_cp(&theta, &ctx, &q, &qc, ChfForm::Cui).unwrap()[4]
    };
    let (a, b) = (rho(1e-2), rho(1e-3));
    assert!(b.abs() <= 0.11 * a.abs(), "{a} then {b}");
}

#[test]
fn invalid_configuration_is_rejected() {
    assert!(QuadratureConfig::new(1, 200.0).is_err());
    assert!(QuadratureConfig::new(64, 0.0).is_err());
    assert!(QuadratureConfig::new(64, f64::NAN).is_err());
    let theta = params("theta2");
    let ctx = MarketContext::new(1.0, 0.02, 0.0).unwrap();
    let bad = OptionQuote::call(-1.0, 1.0);
    assert!(price_cp(
        &theta,
        &ctx,
        &bad,
        &QuadratureConfig::default(),
        ChfForm::Cui
    )
    .is_err());
}
