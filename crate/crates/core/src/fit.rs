// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Small nonlinear least-squares toolkit: a damped Gauss–Newton
//! (Levenberg–Marquardt) solver with finite-difference Jacobians, and a
//! variable-projection wrapper for models that are linear in most of their
//! coefficients (decaying exponentials, damped tones).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when the relative decrease of the cost falls below this.
    pub ftol: f64,
    /// Stop when the step is this small relative to the parameters.
    pub xtol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            ftol: 1e-15,
            xtol: 1e-13,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// Root-mean-square residual at `params`.
    pub rms: f64,
    pub iterations: usize,
}

fn cost(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn jacobian<F>(f: &F, p: &[f64], r0_len: usize) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut jac = DMatrix::zeros(r0_len, p.len());
    let mut work = p.to_vec();
    for j in 0..p.len() {
        let h = 1e-6 * p[j].abs().max(1e-3);
        work[j] = p[j] + h;
        let up = f(&work);
        work[j] = p[j] - h;
        let down = f(&work);
        work[j] = p[j];
        for i in 0..r0_len {
            jac[(i, j)] = (up[i] - down[i]) / (2.0 * h);
        }
    }
    jac
}

/// Minimises Σ rᵢ(p)² from `p0`.
///
/// Steps are accepted only when they lower the cost. If the iteration budget
/// runs out before a stopping criterion is met, [`Error::FitFailed`] carries
/// the best parameters seen.
pub fn levenberg_marquardt<F>(residuals: F, p0: &[f64], opts: LmOptions) -> Result<LmOutcome>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut p = p0.to_vec();
    let mut r = residuals(&p);
    let n = r.len();
    if n == 0 || r.iter().any(|v| !v.is_finite()) {
        return Err(Error::FitFailed {
            iterations: 0,
            residual: f64::NAN,
            best: p,
        });
    }
    let mut c = cost(&r);
    let mut lambda = -1.0;

    for iteration in 1..=opts.max_iterations {
        let jac = jacobian(&residuals, &p, n);
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * DVector::from_column_slice(&r);
        if lambda < 0.0 {
            let max_diag = (0..p.len()).map(|k| jtj[(k, k)]).fold(0.0f64, f64::max);
            lambda = 1e-3 * max_diag.max(1e-300);
        }

        let mut accepted = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for k in 0..p.len() {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&(-&jtr)) else {
                lambda *= 4.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let r_trial = residuals(&trial);
            let c_trial = cost(&r_trial);
            if c_trial.is_finite() && c_trial <= c {
                let step_norm = step.norm();
                let p_norm = DVector::from_column_slice(&p).norm();
                let decrease = (c - c_trial) / c.max(1e-300);
                p = trial;
                r = r_trial;
                c = c_trial;
                lambda = (lambda / 3.0).max(1e-300);
                accepted = true;
                if decrease < opts.ftol || step_norm <= opts.xtol * (p_norm + opts.xtol) || c == 0.0 {
                    return Ok(LmOutcome {
                        rms: (c / n as f64).sqrt(),
                        params: p,
                        iterations: iteration,
                    });
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // No downhill step at any damping: a (local) minimum.
            return Ok(LmOutcome {
                rms: (c / n as f64).sqrt(),
                params: p,
                iterations: iteration,
            });
        }
    }
    Err(Error::FitFailed {
        iterations: opts.max_iterations,
        residual: (c / n as f64).sqrt(),
        best: p,
    })
}

/// Least-squares coefficients c minimising ‖y − A c‖ for column basis A.
pub fn linear_least_squares(columns: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let rows = y.len();
    let a = DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i]);
    let svd = a.svd(true, true);
    let b = DVector::from_column_slice(y);
    svd.solve(&b, 1e-12).ok().map(|c| c.iter().copied().collect())
}

/// Outcome of a variable-projection fit.
#[derive(Debug, Clone)]
pub struct SeparableFit {
    pub nonlinear: Vec<f64>,
    pub linear: Vec<f64>,
    pub rms: f64,
}

/// Fits y ≈ Σ_k c_k φ_k(θ) where the basis depends on nonlinear θ and the
/// coefficients c are eliminated by linear least squares at every θ.
pub fn separable_fit<B>(basis: B, y: &[f64], theta0: &[f64], opts: LmOptions) -> Result<SeparableFit>
where
    B: Fn(&[f64]) -> Vec<Vec<f64>>,
{
    let project = |theta: &[f64]| -> Vec<f64> {
        let cols = basis(theta);
        match linear_least_squares(&cols, y) {
            Some(c) => (0..y.len())
                .map(|i| y[i] - cols.iter().zip(&c).map(|(col, ck)| col[i] * ck).sum::<f64>())
                .collect(),
            None => vec![f64::NAN; y.len()],
        }
    };
    let out = levenberg_marquardt(project, theta0, opts)?;
    let cols = basis(&out.params);
    let linear = linear_least_squares(&cols, y).ok_or(Error::FitFailed {
        iterations: out.iterations,
        residual: out.rms,
        best: out.params.clone(),
    })?;
    Ok(SeparableFit {
        nonlinear: out.params,
        linear,
        rms: out.rms,
    })
}

/// y ≈ amplitude·exp(−t/τ) + offset.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExponentialFit {
    pub tau: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub rms: f64,
}

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
}

/// Single exponential decay with free offset; τ in the units of `t`.
pub fn fit_exponential(t: &[f64], y: &[f64]) -> Result<ExponentialFit> {
    if t.len() != y.len() || t.len() < 4 {
        return Err(Error::FitFailed {
            iterations: 0,
            residual: f64::NAN,
            best: Vec::new(),
        });
    }
    let span = t.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - t.iter().copied().fold(f64::INFINITY, f64::min);
    let basis = |theta: &[f64]| {
        let tau = theta[0].exp();
        vec![t.iter().map(|&ti| (-ti / tau).exp()).collect(), vec![1.0; t.len()]]
    };
    let residual_at = |tau: f64| {
        let cols = basis(&[tau.ln()]);
        linear_least_squares(&cols, y)
            .map(|c| {
                (0..y.len())
                    .map(|i| (y[i] - c[0] * cols[0][i] - c[1]).powi(2))
                    .sum::<f64>()
            })
            .unwrap_or(f64::INFINITY)
    };
    let seed = log_grid(span / 100.0, span * 100.0, 81)
        .min_by(|a, b| residual_at(*a).total_cmp(&residual_at(*b)))
        .unwrap_or(span);
    let fit = separable_fit(basis, y, &[seed.ln()], LmOptions::default())?;
    Ok(ExponentialFit {
        tau: fit.nonlinear[0].exp(),
        amplitude: fit.linear[0],
        offset: fit.linear[1],
        rms: fit.rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exponential_exactly() {
        let t: Vec<f64> = (0..200).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|x| 0.9 * (-x / 4.72).exp() + 0.02).collect();
        let f = fit_exponential(&t, &y).unwrap();
        assert!((f.tau - 4.72).abs() < 1e-8, "{}", f.tau);
        assert!((f.amplitude - 0.9).abs() < 1e-8);
        assert!((f.offset - 0.02).abs() < 1e-8);
    }

    #[test]
    fn lm_solves_rosenbrock() {
        let out = levenberg_marquardt(
            |p| vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]],
            &[-1.2, 1.0],
            LmOptions::default(),
        )
        .unwrap();
        assert!((out.params[0] - 1.0).abs() < 1e-8);
        assert!((out.params[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn lm_reports_best_so_far_on_budget_exhaustion() {
        let opts = LmOptions {
            max_iterations: 1,
            ftol: 0.0,
            xtol: 0.0,
        };
        let err = levenberg_marquardt(
            |p| vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]],
            &[-1.2, 1.0],
            opts,
        )
        .unwrap_err();
        match err {
            Error::FitFailed { best, residual, .. } => {
                assert_eq!(best.len(), 2);
                assert!(residual.is_finite());
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
