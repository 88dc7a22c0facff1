//! Spherical Bessel, Hankel and Riccati-Bessel functions of complex argument.
//!
//! `j_n` is obtained by Miller's downward recurrence normalised against the
//! closed forms of `j_0` or `j_1`; `h_n^(1)` by upward recurrence from its
//! closed forms, which is stable because `y_n` dominates for growing order.
//! Very small arguments, `|z|^2 < 1e-6 (2n + 3)`, use the power series.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Highest order accepted by the Bessel routines.
pub const MAX_ORDER: usize = 200;

const I: Complex64 = Complex64::new(0.0, 1.0);
const RESCALE_ABOVE: f64 = 1e250;

/// Riccati-Bessel functions `psi_n = z j_n`, `zeta_n = z h_n^(1)` and their
/// derivatives at one order and argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiBundle {
    pub psi: Complex64,
    pub dpsi: Complex64,
    pub zeta: Complex64,
    pub dzeta: Complex64,
}

fn check(order: usize, z: Complex64) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::UnsupportedOrder { order, max: MAX_ORDER });
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite argument {z}")));
    }
    Ok(())
}

fn use_series(order: usize, z: Complex64) -> bool {
    z.norm_sqr() < 1e-6 * (2 * order + 3) as f64
}

/// Power series of `j_n(z)`; converges for every `z`, used near the origin.
fn j_series(order: usize, z: Complex64) -> Complex64 {
    // z^n / (2n+1)!! built as a running product to stay in range
    let mut lead = Complex64::new(1.0, 0.0);
    for k in 1..=order {
        lead *= z / (2 * k + 1) as f64;
    }
    let x = -0.5 * z * z;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..60 {
        term *= x / (k as f64 * (2 * order + 2 * k + 1) as f64);
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    lead * sum
}

/// `j_0 .. j_nmax` at `z`.
pub fn spherical_bessel_j_seq(nmax: usize, z: Complex64) -> Result<Vec<Complex64>> {
    check(nmax, z)?;
    if use_series(nmax, z) || z == Complex64::new(0.0, 0.0) {
        return Ok((0..=nmax).map(|n| j_series(n, z)).collect());
    }
    let start = nmax + z.norm().ceil() as usize + 50;
    let mut f = vec![Complex64::new(0.0, 0.0); start + 2];
    f[start] = Complex64::new(1.0, 0.0);
    for k in (1..=start).rev() {
        f[k - 1] = (2 * k + 1) as f64 / z * f[k] - f[k + 1];
        if f[k - 1].norm() > RESCALE_ABOVE {
            let s = 1.0 / f[k - 1].norm();
            for v in f[k - 1..].iter_mut() {
                *v *= s;
            }
        }
    }
    let mut values = f;
    let j0 = z.sin() / z;
    let j1 = z.sin() / (z * z) - z.cos() / z;
    // bring the pivot to unit modulus first; complex division squares the norm
    let pivot = if j0.norm() >= j1.norm() { 0 } else { 1 };
    let m = values[pivot].norm();
    for v in values.iter_mut() {
        *v /= m;
    }
    let scale = if pivot == 0 { j0 / values[0] } else { j1 / values[1] };
    values.truncate(nmax + 1);
    for v in values.iter_mut() {
        *v *= scale;
    }
    // very small orders near the series threshold benefit from the series
    for (n, v) in values.iter_mut().enumerate() {
        if use_series(n, z) {
            *v = j_series(n, z);
        }
    }
    Ok(values)
}

/// Spherical Bessel function of the first kind `j_n(z)`.
pub fn spherical_bessel_j(order: usize, z: Complex64) -> Result<Complex64> {
    check(order, z)?;
    if use_series(order, z) {
        return Ok(j_series(order, z));
    }
    Ok(spherical_bessel_j_seq(order, z)?[order])
}

/// `h^(1)_0 .. h^(1)_nmax` at `z`.
pub fn spherical_hankel1_seq(nmax: usize, z: Complex64) -> Result<Vec<Complex64>> {
    check(nmax, z)?;
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::Singularity {
            function: "spherical_hankel1",
        });
    }
    let e = (I * z).exp();
    let mut values = Vec::with_capacity(nmax + 1);
    values.push(-I * e / z);
    if nmax >= 1 {
        values.push(-e * (z + I) / (z * z));
    }
    for n in 1..nmax {
        let next = (2 * n + 1) as f64 / z * values[n] - values[n - 1];
        values.push(next);
    }
    Ok(values)
}

/// Spherical Hankel function of the first kind `h^(1)_n(z) = j_n + i y_n`.
pub fn spherical_hankel1(order: usize, z: Complex64) -> Result<Complex64> {
    Ok(spherical_hankel1_seq(order, z)?[order])
}

/// Spherical Bessel function of the second kind, `y_n = -i (h_n - j_n)`.
pub fn spherical_bessel_y(order: usize, z: Complex64) -> Result<Complex64> {
    let h = spherical_hankel1(order, z)?;
    let j = spherical_bessel_j(order, z)?;
    Ok(-I * (h - j))
}

/// Riccati-Bessel bundles for orders `0..=nmax`.
pub fn riccati_bundles(nmax: usize, z: Complex64) -> Result<Vec<RiccatiBundle>> {
    let j = spherical_bessel_j_seq(nmax, z)?;
    let h = spherical_hankel1_seq(nmax, z)?;
    // j_{-1} = cos z / z and h_{-1} = e^{iz} / z
    let j_m1 = z.cos() / z;
    let h_m1 = (I * z).exp() / z;
    Ok((0..=nmax)
        .map(|n| {
            let (jp, hp) = if n == 0 { (j_m1, h_m1) } else { (j[n - 1], h[n - 1]) };
            let nf = n as f64;
            RiccatiBundle {
                psi: z * j[n],
                dpsi: z * jp - nf * j[n],
                zeta: z * h[n],
                dzeta: z * hp - nf * h[n],
            }
        })
        .collect())
}

/// Riccati-Bessel bundle `{psi_n, psi_n', zeta_n, zeta_n'}` at order `n`.
pub fn riccati_bundle(order: usize, z: Complex64) -> Result<RiccatiBundle> {
    Ok(riccati_bundles(order, z)?[order])
}

/// `n!!` with `(-1)!! = 0!! = 1`. Exact up to `n = 30`, evaluated in log space above.
pub fn double_factorial(n: i64) -> Result<f64> {
    if n < -1 {
        return Err(Error::InvalidArgument(format!("double factorial of {n} is undefined")));
    }
    if n <= 30 {
        let mut acc = 1.0_f64;
        let mut k = n;
        while k > 1 {
            acc *= k as f64;
            k -= 2;
        }
        return Ok(acc);
    }
    Ok(ln_double_factorial(n)?.exp())
}

/// Natural log of `n!!`.
pub fn ln_double_factorial(n: i64) -> Result<f64> {
    if n < -1 {
        return Err(Error::InvalidArgument(format!("double factorial of {n} is undefined")));
    }
    let mut acc = 0.0;
    let mut k = n;
    while k > 1 {
        acc += (k as f64).ln();
        k -= 2;
    }
    Ok(acc)
}
