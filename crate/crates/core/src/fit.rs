//! Levenberg-Marquardt least squares with central-difference Jacobians.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    pub lambda0: f64,
    /// Stop when an accepted step changes the cost by less than this fraction.
    pub cost_tol: f64,
    /// Stop when the gradient infinity-norm drops below this.
    pub grad_tol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 200,
            lambda0: 1e-3,
            cost_tol: 1e-12,
            grad_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmReport {
    pub params: Vec<f64>,
    /// Half the sum of squared residuals.
    pub cost: f64,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

impl LmReport {
    pub fn rms(&self) -> f64 {
        if self.residuals.is_empty() {
            return 0.0;
        }
        (self.residuals.iter().map(|r| r * r).sum::<f64>() / self.residuals.len() as f64).sqrt()
    }
}

fn cost_of(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

fn jacobian<F>(f: &F, x: &[f64], m: usize) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = x.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let h = 1e-6 * x[j].abs().max(1e-3);
        xp[j] = x[j] + h;
        let rp = f(&xp);
        xp[j] = x[j] - h;
        let rm = f(&xp);
        xp[j] = x[j];
        for i in 0..m {
            let d = (rp[i] - rm[i]) / (2.0 * h);
            if !d.is_finite() {
                return Err(Error::InvalidArgument("non-finite Jacobian entry".into()));
            }
            jac[(i, j)] = d;
        }
    }
    Ok(jac)
}

/// Minimises `0.5 |r(x)|^2` starting from `x0`.
pub fn levenberg_marquardt<F>(residuals: F, x0: &[f64], opts: &LmOptions) -> Result<LmReport>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut x = x0.to_vec();
    let mut r = residuals(&x);
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "residuals are not finite at the starting point".into(),
        ));
    }
    let m = r.len();
    let n = x.len();
    let mut cost = cost_of(&r);
    let mut lambda = opts.lambda0;
    let fail = |x: &[f64], r: &[f64], it: usize| Error::FitFailure {
        iterations: it,
        rms: (r.iter().map(|v| v * v).sum::<f64>() / r.len().max(1) as f64).sqrt(),
        best: x.to_vec(),
    };
    for it in 1..=opts.max_iterations {
        if cost == 0.0 {
            return Ok(LmReport {
                params: x,
                cost,
                residuals: r,
                iterations: it - 1,
            });
        }
        let jac = jacobian(&residuals, &x, m)?;
        let rv = DVector::from_column_slice(&r);
        let g = jac.transpose() * &rv;
        if g.amax() < opts.grad_tol {
            return Ok(LmReport {
                params: x,
                cost,
                residuals: r,
                iterations: it - 1,
            });
        }
        let jtj = jac.transpose() * &jac;
        loop {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let step = a.lu().solve(&(-&g));
            let accepted = step.and_then(|dx| {
                let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(p, d)| p + d).collect();
                let rt = residuals(&trial);
                if rt.iter().all(|v| v.is_finite()) {
                    let ct = cost_of(&rt);
                    if ct < cost {
                        return Some((trial, rt, ct));
                    }
                }
                None
            });
            match accepted {
                Some((trial, rt, ct)) => {
                    let change = (cost - ct) / cost;
                    x = trial;
                    r = rt;
                    cost = ct;
                    lambda = (lambda / 10.0).max(1e-15);
                    if change < opts.cost_tol {
                        return Ok(LmReport {
                            params: x,
                            cost,
                            residuals: r,
                            iterations: it,
                        });
                    }
                    break;
                }
                None => {
                    lambda *= 10.0;
                    if lambda > 1e16 {
                        // no descent direction left at working precision
                        return Ok(LmReport {
                            params: x,
                            cost,
                            residuals: r,
                            iterations: it,
                        });
                    }
                }
            }
        }
    }
    Err(fail(&x, &r, opts.max_iterations))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_minimum() {
        let f = |p: &[f64]| vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]];
        let rep = levenberg_marquardt(f, &[-1.2, 1.0], &LmOptions::default()).unwrap();
        assert!((rep.params[0] - 1.0).abs() < 1e-8 && (rep.params[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn exponential_fit() {
        let t: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|t| 2.5 * (-1.3 * t).exp()).collect();
        let f = |p: &[f64]| t.iter().zip(&y).map(|(t, y)| p[0] * (-p[1] * t).exp() - y).collect();
        let rep = levenberg_marquardt(f, &[1.0, 0.5], &LmOptions::default()).unwrap();
        assert!((rep.params[0] - 2.5).abs() < 1e-9 && (rep.params[1] - 1.3).abs() < 1e-9);
        assert!(rep.rms() < 1e-10);
    }

    #[test]
    fn iteration_cap_reports_best() {
        let f = |p: &[f64]| vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]];
        let opts = LmOptions {
            max_iterations: 2,
            ..Default::default()
        };
        match levenberg_marquardt(f, &[-1.2, 1.0], &opts) {
            Err(Error::FitFailure { iterations, best, .. }) => {
                assert_eq!(iterations, 2);
                assert_eq!(best.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
