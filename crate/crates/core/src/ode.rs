//! Adaptive Dormand-Prince 5(4) integrator for complex linear and nonlinear
//! systems `y' = f(t, y)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; estimated from the derivative when `None`.
    pub h0: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-8,
            atol: 1e-12,
            h0: None,
            max_steps: 2_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine(y: &[Complex64], h: f64, terms: &[(f64, &[Complex64])], out: &mut [Complex64]) {
    for i in 0..y.len() {
        let mut s = Complex64::new(0.0, 0.0);
        for (c, k) in terms {
            s += *c * k[i];
        }
        out[i] = y[i] + h * s;
    }
}

/// Integrates from `t0` and returns the state at each of `outputs` (ascending,
/// all `>= t0`). The step is clamped so every output time is hit exactly.
pub fn dopri5<F>(mut f: F, t0: f64, y0: &[Complex64], outputs: &[f64], opts: &OdeOptions) -> Result<Vec<Vec<Complex64>>>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.first().is_some_and(|&t| t < t0) {
        return Err(Error::InvalidArgument(
            "output times must be ascending and >= t0".into(),
        ));
    }
    let n = y0.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k: Vec<Vec<Complex64>> = vec![vec![zero; n]; 7];
    let mut tmp = vec![zero; n];
    let mut ynew = vec![zero; n];
    f(t, &y, &mut k[0]);

    let err_norm = |y: &[Complex64], yn: &[Complex64], e: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..y.len() {
            let sc = opts.atol + opts.rtol * y[i].norm().max(yn[i].norm());
            s += (e[i].norm() / sc).powi(2);
        }
        (s / y.len().max(1) as f64).sqrt()
    };

    let mut h = match opts.h0 {
        Some(h) => h,
        None => {
            let d0 = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let d1 = k[0].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if d1 > 0.0 && d0 > 0.0 {
                0.01 * d0 / d1
            } else {
                1e-6
            }
        }
    };
    let span = outputs.last().map_or(0.0, |&te| te - t0);
    if span > 0.0 {
        h = h.min(span);
    }

    let mut result = Vec::with_capacity(outputs.len());
    let mut steps = 0usize;
    for &tout in outputs {
        while t < tout {
            if steps >= opts.max_steps {
                return Err(Error::Stiffness { t, h });
            }
            let last = h >= tout - t;
            let hs = if last { tout - t } else { h };
            if hs < 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::Stiffness { t, h: hs });
            }
            {
                let (k0, rest) = k.split_at_mut(1);
                combine(&y, hs, &[(A21, &k0[0])], &mut tmp);
                f(t + C2 * hs, &tmp, &mut rest[0]);
            }
            combine(&y, hs, &[(A31, &k[0]), (A32, &k[1])], &mut tmp);
            f(t + C3 * hs, &tmp, &mut k[2]);
            combine(&y, hs, &[(A41, &k[0]), (A42, &k[1]), (A43, &k[2])], &mut tmp);
            f(t + C4 * hs, &tmp, &mut k[3]);
            combine(
                &y,
                hs,
                &[(A51, &k[0]), (A52, &k[1]), (A53, &k[2]), (A54, &k[3])],
                &mut tmp,
            );
            f(t + C5 * hs, &tmp, &mut k[4]);
            combine(
                &y,
                hs,
                &[(A61, &k[0]), (A62, &k[1]), (A63, &k[2]), (A64, &k[3]), (A65, &k[4])],
                &mut tmp,
            );
            f(t + hs, &tmp, &mut k[5]);
            combine(
                &y,
                hs,
                &[(B1, &k[0]), (B3, &k[2]), (B4, &k[3]), (B5, &k[4]), (B6, &k[5])],
                &mut ynew,
            );
            f(t + hs, &ynew, &mut k[6]);
            for i in 0..n {
                tmp[i] = hs * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            }
            let err = err_norm(&y, &ynew, &tmp);
            steps += 1;
            if !err.is_finite() {
                h = 0.25 * hs;
                continue;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { tout } else { t + hs };
                std::mem::swap(&mut y, &mut ynew);
                k.swap(0, 6);
                if !last {
                    h = hs * factor;
                }
            } else {
                h = hs * factor.min(1.0);
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Stiffness { t, h });
            }
        }
        result.push(y.clone());
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn damped_oscillator_matches_exact() {
        let lam = Complex64::new(-0.3, -2.0);
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let ys = dopri5(
            |_, y, dy| dy[0] = lam * y[0],
            0.0,
            &[Complex64::new(1.0, 0.5)],
            &times,
            &OdeOptions::default(),
        )
        .unwrap();
        for (t, y) in times.iter().zip(&ys) {
            let exact = Complex64::new(1.0, 0.5) * (lam * t).exp();
            assert!((y[0] - exact).norm() < 1e-7, "t = {t}");
        }
    }

    #[test]
    fn output_at_start_is_initial_state() {
        let ys = dopri5(
            |_, _, dy| dy[0] = Complex64::new(1.0, 0.0),
            1.0,
            &[Complex64::new(2.0, 0.0)],
            &[1.0, 3.0],
            &OdeOptions::default(),
        )
        .unwrap();
        assert_eq!(ys[0][0], Complex64::new(2.0, 0.0));
        assert!((ys[1][0].re - 4.0).abs() < 1e-12);
    }

    #[test]
    fn step_budget_reports_stiffness() {
        let opts = OdeOptions {
            max_steps: 10,
            ..Default::default()
        };
        let r = dopri5(
            |_, y, dy| dy[0] = Complex64::new(0.0, -1e3) * y[0],
            0.0,
            &[Complex64::new(1.0, 0.0)],
            &[100.0],
            &opts,
        );
        assert!(matches!(r, Err(Error::Stiffness { .. })));
    }
}
