#![allow(dead_code)]

use heston_swift::harness::{resolve_params, QuoteSet};
use heston_swift::{HestonParams, OptionQuote};

pub fn params(name: &str) -> HestonParams {
    resolve_params(name).expect("bundled parameter set")
}

pub fn set(set: QuoteSet) -> heston_swift::harness::QuoteFile {
    set.load().expect("bundled quote set")
}

/// Quotes grouped by maturity, in file order.
pub fn by_maturity(quotes: &[OptionQuote]) -> Vec<(f64, Vec<f64>)> {
    let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
    for q in quotes {
        match out.iter_mut().find(|(t, _)| *t == q.maturity) {
            Some((_, ks)) => ks.push(q.strike),
            None => out.push((q.maturity, vec![q.strike])),
        }
    }
    out
}

pub fn bumped(theta: &HestonParams, i: usize, h: f64) -> HestonParams {
    let mut a = theta.to_array();
    a[i] += h;
    HestonParams::from_array(a)
}

/// Five-point central difference of a vector-valued function of the
/// parameters along gradient-order component `i`.
pub fn fd5<F>(theta: &HestonParams, i: usize, h: f64, f: F) -> Vec<f64>
where
    F: Fn(&HestonParams) -> Vec<f64>,
{
    let at = |k: f64| f(&bumped(theta, i, k * h));
    let (p2, p1, m1, m2) = (at(2.0), at(1.0), at(-1.0), at(-2.0));
    (0..p1.len())
        .map(|n| (-p2[n] + 8.0 * p1[n] - 8.0 * m1[n] + m2[n]) / (12.0 * h))
        .collect()
}

/// Relative error with an absolute floor below which differences are
/// treated as noise.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}
