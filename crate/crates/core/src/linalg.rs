//! Dense complex eigensolver: Householder reduction to Hessenberg form,
//! single-shift QR to a complex Schur form, eigenvectors by back-substitution.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Eigenvalues and unit-norm right eigenvectors (as columns).
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    pub vectors: CMatrix,
}

/// Reduces `a` to upper Hessenberg form `H = Q^H a Q`; returns `(H, Q)`.
pub fn hessenberg(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.nrows();
    let mut h = a.clone();
    let mut q = CMatrix::identity(n, n);
    for k in 0..n.saturating_sub(2) {
        let norm = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vn;
        }
        // H <- P H with P = I - 2 v v^H acting on rows k+1..n
        for j in 0..n {
            let s: Complex64 = v.iter().enumerate().map(|(r, vr)| vr.conj() * h[(k + 1 + r, j)]).sum();
            for (r, vr) in v.iter().enumerate() {
                h[(k + 1 + r, j)] -= 2.0 * vr * s;
            }
        }
        // H <- H P and Q <- Q P on columns k+1..n
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let s: Complex64 = v.iter().enumerate().map(|(r, vr)| m[(i, k + 1 + r)] * vr).sum();
                for (r, vr) in v.iter().enumerate() {
                    m[(i, k + 1 + r)] -= 2.0 * s * vr.conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

/// Rotation `[[c, s], [-conj(s), c]]` mapping `(x, y)` to `(r, 0)`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let r = ax.hypot(y.norm());
    if r == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, ONE);
    }
    (ax / r, (x / ax) * y.conj() / r)
}

fn rotate_rows(m: &mut CMatrix, k: usize, c: f64, s: Complex64, cols: std::ops::Range<usize>) {
    for j in cols {
        let (u, v) = (m[(k, j)], m[(k + 1, j)]);
        m[(k, j)] = c * u + s * v;
        m[(k + 1, j)] = -s.conj() * u + c * v;
    }
}

fn rotate_cols(m: &mut CMatrix, k: usize, c: f64, s: Complex64, rows: std::ops::Range<usize>) {
    for i in rows {
        let (u, v) = (m[(i, k)], m[(i, k + 1)]);
        m[(i, k)] = c * u + s.conj() * v;
        m[(i, k + 1)] = -s * u + c * v;
    }
}

/// Complex Schur form `a = Z T Z^H`; returns `(T, Z)`. Gives up after
/// `30 n` QR sweeps.
pub fn schur(a: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidArgument("matrix must be square".into()));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let (mut t, mut z) = hessenberg(a);
    if n < 2 {
        return Ok((t, z));
    }
    let cap = 30 * n;
    let mut sweeps = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let off = t[(l, l - 1)].norm();
            let diag = t[(l - 1, l - 1)].norm() + t[(l, l)].norm();
            if off <= f64::EPSILON * diag || off <= 1e-300 * scale {
                t[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        sweeps += 1;
        since_deflation += 1;
        if sweeps > cap {
            return Err(Error::NoConvergence { sweeps: cap });
        }
        let mu = if since_deflation % 11 == 10 {
            // exceptional shift to break cycles
            t[(hi, hi)] + 0.75 * t[(hi, hi - 1)].norm()
        } else {
            let (p, q, r, s) = (t[(hi - 1, hi - 1)], t[(hi - 1, hi)], t[(hi, hi - 1)], t[(hi, hi)]);
            let half = 0.5 * (p - s);
            let disc = (half * half + q * r).sqrt();
            let m1 = 0.5 * (p + s) + disc;
            let m2 = 0.5 * (p + s) - disc;
            if (m1 - s).norm() < (m2 - s).norm() {
                m1
            } else {
                m2
            }
        };
        let mut x = t[(l, l)] - mu;
        let mut y = t[(l + 1, l)];
        for k in l..hi {
            if k > l {
                x = t[(k, k - 1)];
                y = t[(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            let start = if k > l { k - 1 } else { k };
            rotate_rows(&mut t, k, c, s, start..n);
            let stop = (k + 3).min(hi + 1);
            rotate_cols(&mut t, k, c, s, 0..stop);
            rotate_cols(&mut z, k, c, s, 0..n);
            if k > l {
                t[(k + 1, k - 1)] = ZERO;
            }
        }
    }
    Ok((t, z))
}

/// All eigenpairs of a dense complex matrix, sorted by real part of the
/// eigenvalue. Vectors have unit 2-norm.
pub fn eig(a: &CMatrix) -> Result<Eigen> {
    let n = a.nrows();
    let (t, z) = schur(a)?;
    let tnorm = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;
    let mut y = CMatrix::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        y[(k, k)] = ONE;
        for i in (0..k).rev() {
            let s: Complex64 = (i + 1..=k).map(|j| t[(i, j)] * y[(j, k)]).sum();
            let mut d = t[(i, i)] - lam;
            if d.norm() < small {
                d = Complex64::new(small, 0.0);
            }
            y[(i, k)] = -s / d;
        }
    }
    let mut v = &z * &y;
    for k in 0..n {
        let nrm = v.column(k).norm();
        v.column_mut(k).unscale_mut(nrm);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| {
        t[(p, p)]
            .re
            .partial_cmp(&t[(q, q)].re)
            .unwrap()
            .then(t[(p, p)].im.partial_cmp(&t[(q, q)].im).unwrap())
    });
    let values = order.iter().map(|&k| t[(k, k)]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(Eigen { values, vectors })
}

/// Solves `a x = b` by LU with partial pivoting.
pub fn solve(a: &CMatrix, b: &CVector) -> Result<CVector> {
    let lu = a.clone().lu();
    let x = lu
        .solve(b)
        .ok_or_else(|| Error::SingularSystem("LU factorisation".into()))?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularSystem("LU factorisation".into()));
    }
    Ok(x)
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    a.clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularSystem("matrix inverse".into()))
}
