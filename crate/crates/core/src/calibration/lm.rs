use std::time::Instant;

use nalgebra::{Matrix5, Vector5};
use serde::{Deserialize, Serialize};

use crate::heston::{HestonParams, GRADIENT_ORDER};

use super::backend::PricingBackend;
use super::{observed_prices, CalibrationError};

const MU_MIN: f64 = 1e-12;
const MU_MAX: f64 = 1e12;

/// Box constraints in gradient order `(v0, v_bar, sigma, kappa, rho)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: [f64; 5],
    pub upper: [f64; 5],
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            lower: [1e-6, 1e-6, 1e-4, 1e-4, -0.999],
            upper: [4.0, 4.0, 5.0, 50.0, 0.999],
        }
    }
}

impl Bounds {
    pub fn project(&self, x: [f64; 5]) -> [f64; 5] {
        std::array::from_fn(|i| x[i].clamp(self.lower[i], self.upper[i]))
    }

    /// Name of the first parameter outside its interval.
    pub fn violation(&self, theta: &HestonParams) -> Option<&'static str> {
        let x = theta.to_array();
        (0..5)
            .find(|&i| !(self.lower[i] <= x[i] && x[i] <= self.upper[i]))
            .map(|i| GRADIENT_ORDER[i])
    }
}

/// Matrix added to `JᵀJ`, scaled by `μ`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Damping {
    /// `μI`.
    #[default]
    Identity,
    /// `μ diag(JᵀJ)`, which makes the step invariant to parameter scaling.
    Marquardt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    /// Stop once `‖r‖ ≤ eps1`.
    pub eps1: f64,
    /// Stop once `‖J r‖_∞ ≤ eps2`.
    pub eps2: f64,
    /// Stop once `‖Δθ‖ ≤ eps3 ‖θ‖`.
    pub eps3: f64,
    pub max_iterations: usize,
    /// Initial damping; with [`Damping::Identity`] it is relative to the
    /// largest diagonal entry of `JᵀJ`.
    pub mu0: f64,
    pub bounds: Bounds,
    #[serde(default)]
    pub damping: Damping,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            eps1: 1e-10,
            eps2: 1e-12,
            eps3: 1e-12,
            max_iterations: 100,
            mu0: 1e-3,
            bounds: Bounds::default(),
            damping: Damping::Identity,
        }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<(), CalibrationError> {
        for (name, v) in [
            ("eps1", self.eps1),
            ("eps2", self.eps2),
            ("eps3", self.eps3),
            ("mu0", self.mu0),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CalibrationError::InvalidInput(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.max_iterations == 0 {
            return Err(CalibrationError::InvalidInput(
                "max_iterations must be positive".into(),
            ));
        }
        if (0..5).any(|i| !(self.bounds.lower[i] <= self.bounds.upper[i])) {
            return Err(CalibrationError::InvalidInput(
                "empty parameter interval in bounds".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    ResidualTol,
    FlatGradient,
    StagnantStep,
    MaxIterations,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

/// One accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Objective after the step.
    pub objective: f64,
    /// Damping that produced the step.
    pub mu: f64,
    pub step_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub theta_hat: HestonParams,
    pub iterations: usize,
    pub stop_reason: StopReason,
    /// `½‖r‖²` at `theta_hat`.
    pub final_objective: f64,
    /// `‖r‖` at `theta_hat`.
    pub residual_norm: f64,
    /// Seconds.
    pub wall_time: f64,
    pub trace: Vec<IterationRecord>,
    /// Backend evaluations, including rejected trial points.
    pub evaluations: usize,
}

impl CalibrationResult {
    pub fn converged(&self) -> bool {
        self.stop_reason == StopReason::ResidualTol
    }
}

/// Damped Gauss–Newton step `Δθ = (JᵀJ + μI)⁻¹ Jᵀ r`; the update is
/// `θ − Δθ`. `jacobian` holds one row of five partials per residual.
pub fn lm_step(
    jacobian: &[[f64; 5]],
    residual: &[f64],
    mu: f64,
) -> Result<[f64; 5], CalibrationError> {
    damped_step(jacobian, residual, mu, Damping::Identity)
}

/// [`lm_step`] with a choice of damping matrix.
pub fn damped_step(
    jacobian: &[[f64; 5]],
    residual: &[f64],
    mu: f64,
    damping: Damping,
) -> Result<[f64; 5], CalibrationError> {
    if jacobian.len() != residual.len() {
        return Err(CalibrationError::InvalidInput(format!(
            "{} Jacobian rows for {} residuals",
            jacobian.len(),
            residual.len()
        )));
    }
    if !(mu > 0.0) {
        return Err(CalibrationError::InvalidInput(format!(
            "damping must be positive, got {mu}"
        )));
    }
    let (normal, gradient) = normal_equations(jacobian, residual);
    let mut damped = normal;
    for i in 0..5 {
        damped[(i, i)] += match damping {
            Damping::Identity => mu,
            // Columns that vanish identically still get some damping.
            Damping::Marquardt => mu * normal[(i, i)].max(f64::MIN_POSITIVE),
        };
    }
    let chol = damped
        .cholesky()
        .ok_or(CalibrationError::SingularSystem { mu })?;
    let step = chol.solve(&gradient);
    if step.iter().any(|v| !v.is_finite()) {
        return Err(CalibrationError::SingularSystem { mu });
    }
    Ok(step.into())
}

fn normal_equations(jacobian: &[[f64; 5]], residual: &[f64]) -> (Matrix5<f64>, Vector5<f64>) {
    let mut normal = Matrix5::zeros();
    let mut gradient = Vector5::zeros();
    for (row, &r) in jacobian.iter().zip(residual) {
        let v = Vector5::from(*row);
        normal += v * v.transpose();
        gradient += v * r;
    }
    (normal, gradient)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residuals_from(prices: &[f64], observed: &[f64]) -> Vec<f64> {
    prices.iter().zip(observed).map(|(p, o)| p - o).collect()
}

/// Levenberg–Marquardt on `f(θ) = ½‖V(θ) − V*‖²` over the backend's quotes.
///
/// Each iteration retries with ten times the damping until the objective
/// decreases; accepted steps divide it by ten. Trial points are projected
/// onto the bounds before pricing.
pub fn calibrate(
    backend: &dyn PricingBackend,
    theta0: &HestonParams,
    cfg: &CalibrationConfig,
) -> Result<CalibrationResult, CalibrationError> {
    cfg.validate()?;
    theta0
        .validate()
        .map_err(|e| CalibrationError::InvalidInput(e.to_string()))?;
    if let Some(name) = cfg.bounds.violation(theta0) {
        return Err(CalibrationError::InvalidInput(format!(
            "initial {name} lies outside the bounds"
        )));
    }
    let observed = observed_prices(backend.quotes())?;
    let start = Instant::now();

    let mut x = theta0.to_array();
    let (prices, mut jac) = backend.prices_and_jacobian(theta0)?;
    let mut evaluations = 1;
    let mut r = residuals_from(&prices, &observed);
    let mut objective = 0.5 * norm(&r).powi(2);
    let (normal, _) = normal_equations(&jac, &r);
    let diag_max = (0..5).map(|i| normal[(i, i)]).fold(0.0, f64::max);
    let mu_start = match cfg.damping {
        Damping::Identity => cfg.mu0 * diag_max,
        Damping::Marquardt => cfg.mu0,
    };
    let mut mu = mu_start.clamp(MU_MIN, MU_MAX);
    let mut trace = Vec::new();
    let mut iterations = 0;

    let stop_reason = 'outer: loop {
        if norm(&r) <= cfg.eps1 {
            break StopReason::ResidualTol;
        }
        let (_, gradient) = normal_equations(&jac, &r);
        if gradient.amax() <= cfg.eps2 {
            break StopReason::FlatGradient;
        }
        if iterations >= cfg.max_iterations {
            break StopReason::MaxIterations;
        }
        iterations += 1;
        loop {
            let delta = match damped_step(&jac, &r, mu, cfg.damping) {
                Ok(d) => d,
                Err(CalibrationError::SingularSystem { .. }) if mu < MU_MAX => {
                    mu = (mu * 10.0).min(MU_MAX);
                    continue;
                }
                Err(CalibrationError::SingularSystem { .. }) => {
                    break 'outer StopReason::StagnantStep
                }
                Err(e) => return Err(e),
            };
            let trial = cfg.bounds.project(std::array::from_fn(|i| x[i] - delta[i]));
            let step: Vec<f64> = (0..5).map(|i| trial[i] - x[i]).collect();
            let step_norm = norm(&step);
            if step_norm <= cfg.eps3 * norm(&x) {
                break 'outer StopReason::StagnantStep;
            }
            let (trial_prices, trial_jac) =
                backend.prices_and_jacobian(&HestonParams::from_array(trial))?;
            evaluations += 1;
            let trial_r = residuals_from(&trial_prices, &observed);
            let trial_objective = 0.5 * norm(&trial_r).powi(2);
            if trial_objective < objective {
                trace.push(IterationRecord {
                    objective: trial_objective,
                    mu,
                    step_norm,
                });
                x = trial;
                r = trial_r;
                jac = trial_jac;
                objective = trial_objective;
                mu = (mu / 10.0).max(MU_MIN);
                break;
            }
            if mu >= MU_MAX {
                break 'outer StopReason::StagnantStep;
            }
            mu = (mu * 10.0).min(MU_MAX);
        }
    };

    Ok(CalibrationResult {
        theta_hat: HestonParams::from_array(x),
        iterations,
        stop_reason,
        final_objective: objective,
        residual_norm: norm(&r),
        wall_time: start.elapsed().as_secs_f64(),
        trace,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_residual_gives_zero_step() {
        let jac = vec![[1.0, 2.0, 0.5, -1.0, 0.3]; 7];
        let step = lm_step(&jac, &[0.0; 7], 0.1).unwrap();
        assert_eq!(step, [0.0; 5]);
    }

    #[test]
    fn heavy_damping_is_scaled_gradient() {
        let mu = 1e12;
        let jac: Vec<[f64; 5]> = (0..5)
            .map(|i| std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 }))
            .collect();
        let step = lm_step(&jac, &[1.0; 5], mu).unwrap();
        for s in step {
            assert!((s * mu - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn bounds_projection() {
        let b = Bounds::default();
        let p = b.project([10.0, -1.0, 0.5, 100.0, -2.0]);
        assert_eq!(p, [4.0, 1e-6, 0.5, 50.0, -0.999]);
    }
}
