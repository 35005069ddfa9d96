//! Least-squares fits of decay curves.
//!
//! Rates are fitted by Levenberg-Marquardt over the nonlinear parameters
//! only; for each trial set of rates the amplitudes are the linear
//! least-squares solution (variable projection).

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Result, WgqedError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `P(t) = A exp(-rate t)`.
    SingleExp,
    /// `P(t) - asymptote = A1 exp(-r1 t) + A2 exp(-r2 t)`, two free rates.
    BiExp { asymptote: f64 },
    /// `P(t) - asymptote = A1 exp(-r t / 2) + A2 exp(-r t)`.
    BiExpHalfRate { asymptote: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    /// Fitted rates in `gamma0` units, ascending.
    pub rates: Vec<f64>,
    /// Amplitudes matching `rates`.
    pub amplitudes: Vec<f64>,
    /// RMS residual divided by the peak |data|.
    pub residual: f64,
    pub iterations: usize,
    /// `t_span * slowest rate`; fits covering fewer than 5 e-foldings are loosely constrained.
    pub efoldings: f64,
}

impl FitResult {
    /// The fastest rate, e.g. `gamma'` for a half-rate biexponential.
    pub fn fastest(&self) -> f64 {
        self.rates.last().copied().unwrap_or(0.0)
    }
}

const MAX_ITER: usize = 200;

struct Problem<'a> {
    t: &'a [f64],
    y: DVector<f64>,
    model: FitModel,
}

impl Problem<'_> {
    /// Basis rates for a parameter vector.
    fn rates(&self, theta: &[f64]) -> Vec<f64> {
        match self.model {
            FitModel::SingleExp => vec![theta[0]],
            FitModel::BiExp { .. } => vec![theta[0], theta[1]],
            FitModel::BiExpHalfRate { .. } => vec![0.5 * theta[0], theta[0]],
        }
    }

    fn design(&self, theta: &[f64]) -> DMatrix<f64> {
        let rates = self.rates(theta);
        DMatrix::from_fn(self.t.len(), rates.len(), |r, c| {
            (-rates[c] * self.t[r]).exp()
        })
    }

    fn solve(&self, theta: &[f64]) -> (DVector<f64>, DVector<f64>) {
        let phi = self.design(theta);
        let amps = phi
            .clone()
            .svd(true, true)
            .solve(&self.y, 1e-13)
            .unwrap_or_else(|_| DVector::zeros(phi.ncols()));
        let resid = &self.y - &phi * &amps;
        (amps, resid)
    }

    fn cost(&self, theta: &[f64]) -> f64 {
        self.solve(theta).1.norm_squared()
    }
}

/// Best point of a log-spaced scan over plausible rates; the projected
/// cost has spurious local minima, so LM starts from here.
fn initial_guess(problem: &Problem<'_>) -> Vec<f64> {
    let t = problem.t;
    let span = (t[t.len() - 1] - t[0]).abs().max(f64::MIN_POSITIVE);
    let dt = t
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .filter(|d| *d > 0.0)
        .fold(span, f64::min);
    let (lo, hi) = ((0.01 / span).ln(), (2.0 / dt).ln());
    let scan = |k: usize, n: usize| (lo + (hi - lo) * k as f64 / (n - 1) as f64).exp();
    let mut best = (f64::INFINITY, vec![0.0]);
    let mut consider = |theta: Vec<f64>| {
        let c = problem.cost(&theta);
        if c < best.0 {
            best = (c, theta);
        }
    };
    consider(match problem.model {
        FitModel::BiExp { .. } => vec![0.0, 0.0],
        _ => vec![0.0],
    });
    match problem.model {
        FitModel::BiExp { .. } => {
            let n = 60;
            for i in 0..n {
                for j in i + 1..n {
                    consider(vec![scan(i, n), scan(j, n)]);
                }
            }
        }
        _ => (0..400).for_each(|k| consider(vec![scan(k, 400)])),
    }
    best.1
}

pub fn fit_decay_rate(times: &[f64], values: &[f64], model: FitModel) -> Result<FitResult> {
    if times.len() != values.len() {
        return Err(WgqedError::DimensionMismatch {
            expected: times.len(),
            got: values.len(),
        });
    }
    let min_points = match model {
        FitModel::BiExp { .. } => 4,
        _ => 2,
    };
    if times.len() < min_points {
        return Err(WgqedError::Config(format!(
            "fit needs at least {min_points} samples, got {}",
            times.len()
        )));
    }
    if times.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(WgqedError::NonFinite("fit data"));
    }
    let offset = match model {
        FitModel::SingleExp => 0.0,
        FitModel::BiExp { asymptote } | FitModel::BiExpHalfRate { asymptote } => asymptote,
    };
    let y = DVector::from_iterator(values.len(), values.iter().map(|v| v - offset));
    let peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let problem = Problem { t: times, y, model };
    let mut theta = initial_guess(&problem);

    let mut cost = problem.cost(&theta);
    let mut trace = vec![cost];
    let mut damping = 1e-3;
    let mut iterations = 0;
    let tiny = f64::EPSILON * f64::EPSILON * problem.y.norm_squared().max(f64::MIN_POSITIVE);
    let mut converged = cost <= tiny;
    while !converged && iterations < MAX_ITER {
        iterations += 1;
        let (_, r0) = problem.solve(&theta);
        // Central-difference Jacobian of the projected residual.
        let p = theta.len();
        let mut jac = DMatrix::zeros(r0.len(), p);
        for k in 0..p {
            let h = 1e-6 * theta[k].abs().max(1e-3);
            let mut up = theta.clone();
            let mut dn = theta.clone();
            up[k] += h;
            dn[k] = (dn[k] - h).max(0.0);
            let width = up[k] - dn[k];
            let diff = (problem.solve(&up).1 - problem.solve(&dn).1) / width;
            jac.set_column(k, &diff);
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut lhs = jtj.clone();
            for k in 0..p {
                lhs[(k, k)] += damping * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = lhs.lu().solve(&(-&jtr)) else {
                damping *= 10.0;
                continue;
            };
            let trial: Vec<f64> = theta
                .iter()
                .zip(step.iter())
                .map(|(t, s)| (t + s).max(0.0))
                .collect();
            let trial_cost = problem.cost(&trial);
            if trial_cost < cost {
                let rel_drop = (cost - trial_cost) / cost.max(f64::MIN_POSITIVE);
                let rel_step =
                    step.norm() / theta.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
                theta = trial;
                cost = trial_cost;
                damping = (damping / 3.0).max(1e-12);
                accepted = true;
                if rel_drop < 1e-14 || rel_step < 1e-12 || cost <= tiny {
                    converged = true;
                }
                break;
            }
            damping *= 4.0;
        }
        trace.push(cost);
        if !accepted {
            // No downhill step at any damping: a stationary point.
            converged = true;
        }
    }
    if !converged {
        return Err(WgqedError::FitNotConverged { iterations, trace });
    }

    let (amps, resid) = problem.solve(&theta);
    let rates = problem.rates(&theta);
    let mut pairs: Vec<(f64, f64)> = rates.into_iter().zip(amps.iter().copied()).collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let rms = (resid.norm_squared() / resid.len() as f64).sqrt();
    let span = times.last().unwrap() - times.first().unwrap();
    Ok(FitResult {
        efoldings: span * pairs[0].0,
        rates: pairs.iter().map(|p| p.0).collect(),
        amplitudes: pairs.iter().map(|p| p.1).collect(),
        residual: if peak > 0.0 { rms / peak } else { 0.0 },
        iterations,
    })
}
