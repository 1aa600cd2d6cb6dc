mod common;

use common::*;
use heston_swift::calibration::*;
use heston_swift::harness::{speed_selection, QuoteSet};
use heston_swift::reference::QuadratureConfig;
use heston_swift::swift::SelectionConfig;
use heston_swift::{ChfForm, HestonParams, MarketContext, OptionQuote};
use proptest::prelude::*;

/// Solves `(JᵀJ + μ I) x = Jᵀ r` by Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn normal_solve(jac: &[[f64; 5]], r: &[f64], mu: f64) -> [f64; 5] {
    let mut a = [[0.0; 6]; 5];
    for i in 0..5 {
        for j in 0..5 {
            a[i][j] = jac.iter().map(|row| row[i] * row[j]).sum();
        }
        a[i][i] += mu;
        a[i][5] = jac.iter().zip(r).map(|(row, ri)| row[i] * ri).sum();
    }
    for col in 0..5 {
        let pivot = (col..5)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        for row in col + 1..5 {
            let f = a[row][col] / a[col][col];
            for k in col..6 {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut x = [0.0; 5];
    for i in (0..5).rev() {
        let s: f64 = (i + 1..5).map(|k| a[i][k] * x[k]).sum();
        x[i] = (a[i][5] - s) / a[i][i];
    }
    x
}

proptest! {
    #[test]
    fn step_solves_damped_normal_equations(
        rows in prop::collection::vec(prop::array::uniform5(-1.0f64..1.0), 5..30),
        seed_r in prop::collection::vec(-1.0f64..1.0, 30),
        log_mu in -6.0f64..1.0,
    ) {
        let r = &seed_r[..rows.len()];
        let mu = 10f64.powf(log_mu);
        let fast = lm_step(&rows, r, mu).unwrap();
        let slow = normal_solve(&rows, r, mu);
        let scale = slow.iter().map(|v| v.abs()).fold(1.0, f64::max);
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).abs() <= 1e-10 * scale, "{a} vs {b}");
        }
    }
}

#[test]
fn step_rejects_bad_input() {
    let jac = [[1.0, 0.0, 0.0, 0.0, 0.0]];
    assert!(lm_step(&jac, &[1.0, 2.0], 1.0).is_err());
    assert!(lm_step(&jac, &[1.0], 0.0).is_err());
}

#[test]
fn step_limits() {
    let jac: Vec<[f64; 5]> = (0..8)
        .map(|i| {
            let t = i as f64;
            [1.0 + t, t.sin(), t.cos(), 0.5 * t, 1.0 / (1.0 + t)]
        })
        .collect();
    assert_eq!(lm_step(&jac, &[0.0; 8], 1e-2).unwrap(), [0.0; 5]);

    // Huge damping leaves a scaled steepest-descent step.
    let r: Vec<f64> = (0..8).map(|i| 0.1 * i as f64 - 0.3).collect();
    let mu = 1e12;
    let step = lm_step(&jac, &r, mu).unwrap();
    for i in 0..5 {
        let g: f64 = jac.iter().zip(&r).map(|(row, ri)| row[i] * ri).sum();
        assert!((step[i] - g / mu).abs() <= 1e-6 * (g / mu).abs());
    }
}

fn unpriced(quotes: &[OptionQuote]) -> Vec<OptionQuote> {
    quotes
        .iter()
        .map(|q| OptionQuote { price: None, ..*q })
        .collect()
}

/// Prices the quotes at `target` with a KSWIFT backend whose parameters were
/// chosen at `reference`, and returns a backend on the priced quotes.
fn kswift_at(
    quotes: &[OptionQuote],
    ctx: &MarketContext,
    reference: &HestonParams,
    target: &HestonParams,
    cfg: &SelectionConfig,
) -> KSwiftBackend {
    let bare =
        KSwiftBackend::new(&unpriced(quotes), ctx, reference, Grouping::ByMaturity, cfg).unwrap();
    let priced = with_model_prices(target, &bare).unwrap();
    KSwiftBackend::new(&priced, ctx, reference, Grouping::ByMaturity, cfg).unwrap()
}

#[test]
fn residuals_vanish_at_the_generating_parameters() {
    let f = set(QuoteSet::Set2);
    let target = params("theta2");
    let start = params("theta2_0");
    let b = kswift_at(
        &f.quotes,
        &f.context,
        &start,
        &target,
        &SelectionConfig::default(),
    );
    let r = residuals(&target, &b).unwrap();
    assert!(r.iter().all(|v| v.abs() <= 1e-9));
    assert!(objective(&residuals(&start, &b).unwrap()) > 0.0);
}

#[test]
fn one_multi_strike_evaluation_per_maturity() {
    let f = set(QuoteSet::Set2);
    let theta = params("theta2");
    let b = KSwiftBackend::new(
        &f.quotes,
        &f.context,
        &theta,
        Grouping::ByMaturity,
        &SelectionConfig::default(),
    )
    .unwrap();
    assert_eq!(b.group_count(), 8);
    b.reset_counter();
    b.prices(&theta).unwrap();
    assert_eq!(b.group_evaluations(), 8);
    b.reset_counter();
    b.prices_and_jacobian(&theta).unwrap();
    assert_eq!(b.group_evaluations(), 8);

    let per_quote = KSwiftBackend::new(
        &f.quotes,
        &f.context,
        &theta,
        Grouping::PerQuote,
        &SelectionConfig::default(),
    )
    .unwrap();
    assert_eq!(per_quote.group_count(), 40);
}

#[test]
fn set2_calibration_converges_with_monotone_objective() {
    let f = set(QuoteSet::Set2);
    let (start, target) = (params("theta2_0"), params("theta2"));
    let b = kswift_at(
        &f.quotes,
        &f.context,
        &start,
        &target,
        &SelectionConfig::default(),
    );
    let res = calibrate(&b, &start, &CalibrationConfig::default()).unwrap();
    assert_eq!(res.stop_reason, StopReason::ResidualTol);
    assert!(res.iterations <= 30);
    assert!(res.final_objective <= 1e-10);
    for w in res.trace.windows(2) {
        assert!(w[1].objective <= w[0].objective);
    }
    let (fit, want) = (res.theta_hat.to_array(), target.to_array());
    for i in 0..5 {
        assert!(
            (fit[i] - want[i]).abs() <= 1e-4,
            "component {i}: {} vs {}",
            fit[i],
            want[i]
        );
    }

    let again = calibrate(&b, &start, &CalibrationConfig::default()).unwrap();
    assert_eq!(again.theta_hat, res.theta_hat);
    assert_eq!(again.iterations, res.iterations);
}

#[test]
fn starting_at_the_answer_stops_immediately() {
    let f = set(QuoteSet::Set2);
    let target = params("theta2");
    let b = kswift_at(
        &f.quotes,
        &f.context,
        &target,
        &target,
        &SelectionConfig::default(),
    );
    let res = calibrate(&b, &target, &CalibrationConfig::default()).unwrap();
    assert_eq!(res.stop_reason, StopReason::ResidualTol);
    assert!(res.iterations <= 1);
    assert_eq!(res.theta_hat, target);
}

#[test]
fn self_calibration_at_assorted_parameters() {
    let f = set(QuoteSet::Set2);
    for name in ["theta1", "eq", "ir"] {
        let theta = params(name);
        let b = kswift_at(
            &f.quotes,
            &f.context,
            &theta,
            &theta,
            &SelectionConfig::default(),
        );
        let res = calibrate(&b, &theta, &CalibrationConfig::default()).unwrap();
        assert_eq!(res.stop_reason, StopReason::ResidualTol, "{name}");
        assert!(res.iterations <= 1, "{name}");
    }
}

#[test]
fn kswift_and_reference_fits_agree() {
    let f = set(QuoteSet::Set2);
    let (start, target) = (params("theta2_0"), params("theta2"));
    let kswift = kswift_at(
        &f.quotes,
        &f.context,
        &start,
        &target,
        &SelectionConfig::default(),
    );

    let qc = QuadratureConfig::new(128, 200.0).unwrap();
    let bare = ReferenceBackend::new(&unpriced(&f.quotes), &f.context, qc, ChfForm::Cui).unwrap();
    let priced = with_model_prices(&target, &bare).unwrap();
    let cp = ReferenceBackend::new(&priced, &f.context, qc, ChfForm::Cui).unwrap();

    let cfg = CalibrationConfig::default();
    let a = calibrate(&kswift, &start, &cfg).unwrap();
    let b = calibrate(&cp, &start, &cfg).unwrap();
    assert!(a.converged() && b.converged());
    let (x, y) = (a.theta_hat.to_array(), b.theta_hat.to_array());
    for i in 0..5 {
        assert!(
            (x[i] - y[i]).abs() <= 1e-4,
            "component {i}: {} vs {}",
            x[i],
            y[i]
        );
    }
}

#[test]
fn naive_and_multi_strike_backends_follow_the_same_iterates() {
    let f = set(QuoteSet::Set2);
    let quotes: Vec<OptionQuote> = f.quotes.iter().take(5).cloned().collect();
    let (start, target) = (params("theta2_0"), params("theta2"));
    let kswift = kswift_at(&quotes, &f.context, &start, &target, &speed_selection());
    let (_, sp) = kswift.group_params()[0];
    let swift =
        SwiftBackend::with_params(kswift.quotes(), &f.context, vec![sp; quotes.len()]).unwrap();

    let cfg = CalibrationConfig {
        max_iterations: 5,
        ..Default::default()
    };
    let a = calibrate(&kswift, &start, &cfg).unwrap();
    let b = calibrate(&swift, &start, &cfg).unwrap();
    assert_eq!(a.iterations, b.iterations);
    assert_eq!(a.evaluations, b.evaluations);
    let (x, y) = (a.theta_hat.to_array(), b.theta_hat.to_array());
    for i in 0..5 {
        assert!((x[i] - y[i]).abs() <= 1e-9 * x[i].abs().max(1.0));
    }
}

#[test]
fn missing_prices_and_bad_starts_are_input_errors() {
    let f = set(QuoteSet::Set2);
    let theta = params("theta2");
    let bare = KSwiftBackend::new(
        &unpriced(&f.quotes),
        &f.context,
        &theta,
        Grouping::ByMaturity,
        &SelectionConfig::default(),
    )
    .unwrap();
    assert!(matches!(
        calibrate(&bare, &theta, &CalibrationConfig::default()),
        Err(CalibrationError::MissingPrice { index: 0 })
    ));

    let b = KSwiftBackend::new(
        &f.quotes,
        &f.context,
        &theta,
        Grouping::ByMaturity,
        &SelectionConfig::default(),
    )
    .unwrap();
    let outside = HestonParams::new(60.0, 0.04, 0.5, -0.5, 0.04).unwrap();
    assert!(matches!(
        calibrate(&b, &outside, &CalibrationConfig::default()),
        Err(CalibrationError::InvalidInput(_))
    ));
    let cfg = CalibrationConfig {
        eps1: 0.0,
        ..Default::default()
    };
    assert!(calibrate(&b, &theta, &cfg).is_err());
}
