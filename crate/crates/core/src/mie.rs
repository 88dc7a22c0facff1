//! Mie coefficients of a sphere and the radial-radial Green function at a
//! radially oriented emitter, exact and quasi-static.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medium::{radiative_rate, wavenumbers, EmitterSpec, Geometry, MaterialModel, COULOMB, DEBYE, HBAR_C};
use crate::specfun::{double_factorial, spherical_bessel_j_seq, spherical_hankel1_seq};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MieCoefficients {
    pub n: usize,
    pub a: Complex64,
    pub b: Complex64,
    pub hbar_omega: f64,
}

/// Exact `A_n`, `B_n` for order `n >= 1`.
pub fn mie_coefficients(
    n: usize,
    hbar_omega: f64,
    geometry: &Geometry,
    material: &MaterialModel,
) -> Result<MieCoefficients> {
    Ok(mie_coefficients_upto(n, hbar_omega, geometry, material)?.pop().unwrap())
}

/// `A_n`, `B_n` for `n = 1..=nmax`.
pub fn mie_coefficients_upto(
    nmax: usize,
    hbar_omega: f64,
    geometry: &Geometry,
    material: &MaterialModel,
) -> Result<Vec<MieCoefficients>> {
    Ok(mie_series(nmax, hbar_omega, geometry, material, None)?.0)
}

/// `j_n(z) / j_{n-1}(z)` for `n = 1..=nmax` (index 0 unused), by the downward
/// continued fraction.
fn bessel_j_ratios(nmax: usize, z: Complex64) -> Vec<Complex64> {
    let top = nmax + 40 + 2 * z.norm().ceil() as usize;
    let mut r = vec![Complex64::new(0.0, 0.0); nmax + 1];
    let mut next = Complex64::new(0.0, 0.0);
    for n in (1..=top).rev() {
        let cur = 1.0 / ((2 * n + 1) as f64 / z - next);
        if n <= nmax {
            r[n] = cur;
        }
        next = cur;
    }
    r
}

/// `h_n(z) / h_{n-1}(z)` for `n = 1..=nmax` (index 0 unused), upward.
fn hankel_ratios(nmax: usize, z: Complex64) -> Vec<Complex64> {
    let mut r = vec![Complex64::new(0.0, 0.0); nmax + 1];
    if nmax >= 1 {
        r[1] = 1.0 / z - I;
    }
    for n in 2..=nmax {
        r[n] = (2 * n - 1) as f64 / z - 1.0 / r[n - 1];
    }
    r
}

/// Mie coefficients and, when `r_d` is given, the per-order scattered radial
/// Green terms. Everything is assembled from neighbour ratios of the Bessel
/// and Hankel functions so high orders at small arguments neither overflow
/// nor underflow into NaN.
fn mie_series(
    nmax: usize,
    hbar_omega: f64,
    geometry: &Geometry,
    material: &MaterialModel,
    r_d: Option<f64>,
) -> Result<(Vec<MieCoefficients>, Vec<Complex64>)> {
    if nmax < 1 {
        return Err(Error::InvalidArgument("Mie order must be >= 1".into()));
    }
    let k = wavenumbers(geometry, material, hbar_omega)?;
    let kb = Complex64::new(k.kb, 0.0);
    let zb = kb * geometry.radius;
    let zm = k.km * geometry.radius;
    if zm.norm() < 1e-300 || zb.norm() < 1e-300 {
        return Err(Error::Singularity {
            function: "Mie coefficients",
        });
    }
    let (kb2, km2) = (kb * kb, k.km * k.km);
    let jb = bessel_j_ratios(nmax, zb);
    let hb = hankel_ratios(nmax, zb);
    let jm = bessel_j_ratios(nmax, zm);
    let j0 = zb.sin() / zb;
    let h0 = -I * (I * zb).exp() / zb;
    // j_n/h_n and j_n h_n at the sphere surface
    let mut quot = j0 / h0;
    let mut prod = j0 * h0;
    // h_n(k_b r_d) / h_n(k_b R)
    let xd = r_d.map(|r| kb * r);
    let hd = xd.map(|x| hankel_ratios(nmax, x));
    let mut shift = xd.map(|x| (-I * (I * x).exp() / x) / h0);
    let pref = I * kb / (4.0 * PI);

    let mut coeffs = Vec::with_capacity(nmax);
    let mut terms = Vec::with_capacity(if r_d.is_some() { nmax } else { 0 });
    for n in 1..=nmax {
        let nf = n as f64;
        quot *= jb[n] / hb[n];
        prod *= jb[n] * hb[n];
        // logarithmic derivatives psi'/psi and zeta'/zeta
        let lpsi_b = 1.0 / jb[n] - nf / zb;
        let lzeta_b = 1.0 / hb[n] - nf / zb;
        let dm = zm * (1.0 / jm[n] - nf / zm);
        let a_red = (lpsi_b - dm / zb) / (dm / zb - lzeta_b);
        let b_red = (kb2 * dm / zb - km2 * lpsi_b) / (km2 * lzeta_b - kb2 * dm / zb);
        coeffs.push(MieCoefficients {
            n,
            a: quot * a_red,
            b: quot * b_red,
            hbar_omega,
        });
        if let (Some(x), Some(hd), Some(s)) = (xd, hd.as_ref(), shift.as_mut()) {
            *s *= hd[n] / hb[n];
            let w = nf * (nf + 1.0) * (2.0 * nf + 1.0) / (x * x);
            terms.push(pref * w * b_red * prod * *s * *s);
        }
    }
    Ok((coeffs, terms))
}

/// Per-order terms and running sum of the scattered `G_S^rr(r_d, r_d)` (1/nm).
#[derive(Debug, Clone, PartialEq)]
pub struct GreenSum {
    pub terms: Vec<Complex64>,
    pub partial: Vec<Complex64>,
    pub total: Complex64,
    /// False when the last term exceeds 1e-8 of the accumulated modulus.
    pub converged: bool,
}

impl GreenSum {
    fn from_terms(terms: Vec<Complex64>) -> Self {
        let mut acc = Complex64::new(0.0, 0.0);
        let partial: Vec<Complex64> = terms
            .iter()
            .map(|t| {
                acc += t;
                acc
            })
            .collect();
        let last = terms.last().map_or(0.0, |t| t.norm());
        GreenSum {
            converged: last <= 1e-8 * acc.norm(),
            terms,
            partial,
            total: acc,
        }
    }
}

/// `n(n+1)(2n+1) [h_n(x)/x]^2` for `n = 1..=nmax` at `x = k_b r_d`.
fn radial_weights(nmax: usize, x: f64) -> Result<Vec<Complex64>> {
    let xc = Complex64::new(x, 0.0);
    let h = spherical_hankel1_seq(nmax, xc)?;
    Ok((1..=nmax)
        .map(|n| {
            let nf = n as f64;
            nf * (nf + 1.0) * (2.0 * nf + 1.0) * (h[n] / xc).powu(2)
        })
        .collect())
}

/// Scattered radial Green function from supplied `B_n` (index 0 is `n = 1`).
pub fn green_rr_from_coefficients(kb: f64, r_d: f64, b: &[Complex64]) -> Result<GreenSum> {
    if b.is_empty() {
        return Err(Error::InvalidArgument("need at least one Mie order".into()));
    }
    let w = radial_weights(b.len(), kb * r_d)?;
    let pref = I * kb / (4.0 * PI);
    Ok(GreenSum::from_terms(
        b.iter().zip(&w).map(|(bn, wn)| pref * bn * wn).collect(),
    ))
}

pub fn green_rr_scattered(
    hbar_omega: f64,
    geometry: &Geometry,
    material: &MaterialModel,
    n_max: usize,
) -> Result<GreenSum> {
    let (_, terms) = mie_series(n_max, hbar_omega, geometry, material, Some(geometry.r_d))?;
    Ok(GreenSum::from_terms(terms))
}

/// Single order `n` of the scattered radial Green function.
pub fn green_rr_term(n: usize, hbar_omega: f64, geometry: &Geometry, material: &MaterialModel) -> Result<Complex64> {
    let sum = green_rr_scattered(hbar_omega, geometry, material, n)?;
    Ok(sum.terms[n - 1])
}

/// `Im G_0^rr` of the homogeneous background, `k_b / 6 pi`.
pub fn free_green_rr_imag(kb: f64) -> f64 {
    kb / (6.0 * PI)
}

/// Free-space radiative rate split over spherical orders seen by a radial dipole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialDecomposition {
    /// `hbar gamma_0n^rad` (eV) for `n = 1..=n_max`.
    pub rates: Vec<f64>,
    /// `hbar gamma_0^rad` (eV) at the same frequency.
    pub total: f64,
    /// Set when the captured fraction is below 0.999.
    pub truncated: bool,
}

impl RadialDecomposition {
    pub fn captured(&self) -> f64 {
        self.rates.iter().sum::<f64>() / self.total
    }
}

/// Fractions `gamma_0n^rad / gamma_0^rad = 3/2 n(n+1)(2n+1) [j_n(x)/x]^2`.
pub fn radial_fractions(x: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(x > 0.0) {
        return Err(Error::InvalidArgument(format!("k_b r_d must be positive, got {x}")));
    }
    let j = spherical_bessel_j_seq(n_max, Complex64::new(x, 0.0))?;
    Ok((1..=n_max)
        .map(|n| {
            let nf = n as f64;
            1.5 * nf * (nf + 1.0) * (2.0 * nf + 1.0) * (j[n].re / x).powi(2)
        })
        .collect())
}

pub fn gamma0n_radial_decomposition(
    hbar_omega: f64,
    geometry: &Geometry,
    emitter: &EmitterSpec,
    n_max: usize,
) -> Result<RadialDecomposition> {
    let x = geometry.n_b() * hbar_omega / HBAR_C * geometry.r_d;
    let total = radiative_rate(emitter.d_eg, hbar_omega, geometry.eps_b);
    let rates: Vec<f64> = radial_fractions(x, n_max)?.into_iter().map(|f| f * total).collect();
    let captured: f64 = rates.iter().sum();
    Ok(RadialDecomposition {
        truncated: captured < 0.999 * total,
        rates,
        total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarizability {
    /// `alpha_n` (nm^(2n+1)).
    pub alpha: Complex64,
    /// Radiation-corrected `alpha_n^eff`.
    pub alpha_eff: Complex64,
}

/// `(n+1) / (n (2n-1)!! (2n+1)!!)`.
fn radiation_factor(n: usize) -> f64 {
    let nf = n as f64;
    let df = double_factorial(2 * n as i64 - 1).unwrap() * double_factorial(2 * n as i64 + 1).unwrap();
    (nf + 1.0) / (nf * df)
}

/// Quasi-static multipole polarizabilities from explicit permittivities; pass
/// `kb = 0` to switch the radiation correction off.
pub fn polarizability_from_eps(n: usize, eps_m: Complex64, eps_b: f64, radius: f64, kb: f64) -> Result<Polarizability> {
    if n < 1 {
        return Err(Error::InvalidArgument("multipole order must be >= 1".into()));
    }
    let nf = n as f64;
    let den = nf * eps_m + (nf + 1.0) * eps_b;
    if den.norm() < 1e-12 {
        return Err(Error::SingularDenominator("quasi-static polarizability"));
    }
    let alpha = nf * (eps_m - eps_b) * radius.powi(2 * n as i32 + 1) / den;
    let corr = I * radiation_factor(n) * kb.powi(2 * n as i32 + 1) * alpha;
    Ok(Polarizability {
        alpha,
        alpha_eff: alpha / (1.0 - corr),
    })
}

pub fn qs_polarizability(
    n: usize,
    hbar_omega: f64,
    geometry: &Geometry,
    material: &MaterialModel,
) -> Result<Polarizability> {
    let eps_m = material.permittivity(hbar_omega)?;
    let kb = geometry.n_b() * hbar_omega / HBAR_C;
    polarizability_from_eps(n, eps_m, geometry.eps_b, geometry.radius, kb)
}

/// Fully retarded dipole polarizability `3 B_1 / (2 i k_b^3)` (nm^3); the
/// radiation-corrected quasi-static `alpha_1^eff` is its small-size limit.
pub fn dipole_polarizability(hbar_omega: f64, geometry: &Geometry, material: &MaterialModel) -> Result<Complex64> {
    let b1 = mie_coefficients(1, hbar_omega, geometry, material)?.b;
    let kb = geometry.n_b() * hbar_omega / HBAR_C;
    Ok(3.0 * b1 / (2.0 * I * kb.powi(3)))
}

/// Quasi-static B_n: `i (n+1) k_b^(2n+1) alpha_n / (n (2n-1)!! (2n+1)!!)`.
pub fn qs_mie_b(n: usize, hbar_omega: f64, geometry: &Geometry, material: &MaterialModel) -> Result<Complex64> {
    let p = qs_polarizability(n, hbar_omega, geometry, material)?;
    let kb = geometry.n_b() * hbar_omega / HBAR_C;
    Ok(I * radiation_factor(n) * kb.powi(2 * n as i32 + 1) * p.alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiStaticMode {
    pub n: usize,
    pub hbar_omega_n: f64,
    pub hbar_gamma_rad: f64,
    pub hbar_gamma: f64,
    /// `hbar g_n` (eV).
    pub hbar_g: f64,
}

/// Root of `Re(n eps_m + (n+1) eps_b)` on (0.1 eV, hbar omega_p) by bisection.
pub fn qs_resonance(n: usize, eps_b: f64, material: &MaterialModel) -> Result<f64> {
    let wp = material.plasma_energy().ok_or(Error::InvalidParameter {
        field: "material",
        reason: "quasi-static resonances need a Drude model".into(),
    })?;
    let nf = n as f64;
    let f = |w: f64| -> Result<f64> { Ok((nf * material.permittivity(w)? + (nf + 1.0) * eps_b).re) };
    let (mut lo, mut hi) = (0.1, wp);
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo.signum() == fhi.signum() {
        return Err(Error::NoResonance { n, lo, hi });
    }
    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Residue weight `(2n+1) eps_b / (n eps_inf + (n+1) eps_b)` of the Drude
/// polarizability pole; 1 when `eps_inf = eps_b = 1`.
pub fn residue_factor(n: usize, eps_inf: f64, eps_b: f64) -> f64 {
    let nf = n as f64;
    (2.0 * nf + 1.0) * eps_b / (nf * eps_inf + (nf + 1.0) * eps_b)
}

/// `hbar g_n` (eV) of the quasi-static coupling to a radial dipole, with the
/// pole weight `s_n` from [`residue_factor`].
pub fn qs_coupling(n: usize, hbar_omega_n: f64, geometry: &Geometry, d_eg: f64, s_n: f64) -> f64 {
    let nf = n as f64;
    let d = d_eg * DEBYE;
    let (r, rd) = (geometry.radius, geometry.r_d);
    let g2 = s_n * COULOMB * d * d * hbar_omega_n * (nf + 1.0).powi(2) * r.powi(2 * n as i32 + 1)
        / (2.0 * geometry.eps_b * rd.powi(2 * n as i32 + 4));
    g2.sqrt()
}

pub fn qs_mode_params(
    n: usize,
    geometry: &Geometry,
    material: &MaterialModel,
    emitter: &EmitterSpec,
) -> Result<QuasiStaticMode> {
    if n < 1 {
        return Err(Error::InvalidArgument("mode order must be >= 1".into()));
    }
    let wn = qs_resonance(n, geometry.eps_b, material)?;
    let s_n = residue_factor(n, material.eps_inf().unwrap_or(1.0), geometry.eps_b);
    let kb = geometry.n_b() * wn / HBAR_C;
    let gamma_rad = s_n * wn * radiation_factor(n) * (kb * geometry.radius).powi(2 * n as i32 + 1);
    let gamma_p = material.damping().unwrap_or(0.0);
    Ok(QuasiStaticMode {
        n,
        hbar_omega_n: wn,
        hbar_gamma_rad: gamma_rad,
        hbar_gamma: gamma_p + gamma_rad,
        hbar_g: qs_coupling(n, wn, geometry, emitter.d_eg, s_n),
    })
}

/// Single-pole Green function `(hbar g)^2 L(E) / (4 pi C d^2 k0^2)` of one
/// Lorentzian mode, `L = [-(E - E_n) + i Gamma/2] / ((E - E_n)^2 + Gamma^2/4)`.
pub fn lorentzian_green(hbar_omega: f64, hbar_omega_n: f64, hbar_gamma: f64, hbar_g: f64, d_eg: f64) -> Complex64 {
    let d = d_eg * DEBYE;
    let k0 = hbar_omega / HBAR_C;
    let x = hbar_omega - hbar_omega_n;
    let den = x * x + 0.25 * hbar_gamma * hbar_gamma;
    let l = Complex64::new(-x, 0.5 * hbar_gamma) / den;
    hbar_g * hbar_g * l / (4.0 * PI * COULOMB * d * d * k0 * k0)
}

/// Quasi-static first-order-resonance Green function summed over `n = 1..=n_max`.
pub fn green_rr_quasistatic(
    hbar_omega: f64,
    geometry: &Geometry,
    material: &MaterialModel,
    emitter: &EmitterSpec,
    n_max: usize,
) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 1..=n_max {
        let m = qs_mode_params(n, geometry, material, emitter)?;
        acc += lorentzian_green(hbar_omega, m.hbar_omega_n, m.hbar_gamma, m.hbar_g, emitter.d_eg);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn silver_8_2() -> (Geometry, MaterialModel) {
        (Geometry::new(8.0, 2.0, 1.0).unwrap(), MaterialModel::silver())
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn high_orders_stay_finite_at_small_size() {
        let g = Geometry::new(8.0, 5.0, 1.0).unwrap();
        let s80 = green_rr_scattered(1.85, &g, &MaterialModel::silver(), 80).unwrap();
        let s40 = green_rr_scattered(1.85, &g, &MaterialModel::silver(), 40).unwrap();
        assert!(s80.terms.iter().all(|t| t.re.is_finite() && t.im.is_finite()));
        assert!(s80.converged);
        assert!(rel(s80.total, s40.total) < 1e-12);
        // direct products agree with the coefficient route where neither overflows
        let b: Vec<Complex64> = mie_coefficients_upto(10, 1.85, &g, &MaterialModel::silver())
            .unwrap()
            .iter()
            .map(|c| c.b)
            .collect();
        let kb = 1.85 / HBAR_C;
        let via_b = green_rr_from_coefficients(kb, g.r_d, &b).unwrap();
        for (x, y) in via_b.terms.iter().zip(&s80.terms) {
            assert!(rel(*x, *y) < 1e-10);
        }
    }

    #[test]
    fn retarded_dipole_polarizability_small_size_limit() {
        let g = Geometry::new(2.0, 2.0, 1.0).unwrap();
        for w in [2.0, 2.7, 3.2] {
            let exact = dipole_polarizability(w, &g, &MaterialModel::silver()).unwrap();
            let qs = qs_polarizability(1, w, &g, &MaterialModel::silver()).unwrap().alpha_eff;
            assert!(rel(exact, qs) < 5e-3, "{w}: {exact} {qs}");
        }
    }

    #[test]
    fn vanishing_particle() {
        let g = Geometry::new(1e-3, 2.0, 1.0).unwrap();
        let c = mie_coefficients(1, 2.9, &g, &MaterialModel::silver()).unwrap();
        assert!(c.b.norm() < 1e-12, "{}", c.b);
    }

    #[test]
    fn b1_matches_quasi_static_small_sphere() {
        let (g, m) = silver_8_2();
        let exact = mie_coefficients(1, 2.9, &g, &m).unwrap().b;
        let qs = qs_mie_b(1, 2.9, &g, &m).unwrap();
        assert!(rel(exact, qs) < 0.05, "{exact} vs {qs}");
    }

    #[test]
    fn retardation_at_50nm() {
        let g = Geometry::new(50.0, 5.0, 1.0).unwrap();
        let m = MaterialModel::silver();
        let exact = mie_coefficients(1, 2.6, &g, &m).unwrap().b;
        let qs = qs_mie_b(1, 2.6, &g, &m).unwrap();
        assert!((exact - qs).norm() / exact.norm() > 0.2);
    }

    #[test]
    fn dielectric_sphere_b_is_lossless() {
        // a real-index sphere conserves energy: |2 B_n + 1| = 1 in the scattering convention
        // used here (B_n = -b_n of Bohren-Huffman), i.e. Re B_n = -|B_n|^2
        let g = Geometry::new(60.0, 5.0, 1.0).unwrap();
        let m = MaterialModel::parse_table("1 2.25 0\n4 2.25 0\n").unwrap();
        for n in 1..=4 {
            let b = mie_coefficients(n, 2.5, &g, &m).unwrap().b;
            assert!((b.re + b.norm_sqr()).abs() < 1e-10, "n={n} {b}");
            let a = mie_coefficients(n, 2.5, &g, &m).unwrap().a;
            assert!((a.re + a.norm_sqr()).abs() < 1e-10, "n={n} {a}");
        }
    }

    #[test]
    fn zero_b_gives_zero_green() {
        let s = green_rr_from_coefficients(0.015, 10.0, &[Complex64::new(0.0, 0.0); 5]).unwrap();
        assert_eq!(s.total, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn dipole_term_peaks_near_2_79() {
        let (g, m) = silver_8_2();
        let grid: Vec<f64> = (0..=600).map(|i| 2.6 + 0.4 * i as f64 / 600.0).collect();
        let mut best = (0.0, f64::MIN);
        for &w in &grid {
            let v = green_rr_term(1, w, &g, &m).unwrap().im;
            if v > best.1 {
                best = (w, v);
            }
        }
        assert!((best.0 - 2.79).abs() < 0.01, "peak at {}", best.0);
    }

    #[test]
    fn per_order_peaks_follow_quasi_static_resonances() {
        let (g, m) = silver_8_2();
        let em = EmitterSpec::from_dipole(2.9, 10.0, 0.0, 1.0).unwrap();
        for n in 1..=3 {
            let wn = qs_mode_params(n, &g, &m, &em).unwrap().hbar_omega_n;
            let grid: Vec<f64> = (0..=2000).map(|i| wn - 0.15 + 0.3 * i as f64 / 2000.0).collect();
            let peak = grid
                .iter()
                .map(|&w| (w, green_rr_term(n, w, &g, &m).unwrap().im))
                .fold((0.0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
            assert!((peak.0 - wn).abs() < 0.01 * wn, "n={n}: {} vs {wn}", peak.0);
        }
    }

    #[test]
    fn radial_sum_rule() {
        for &x in &[0.1, 0.5, 2.0] {
            let s: f64 = radial_fractions(x, 60).unwrap().iter().sum();
            assert!((s - 1.0).abs() < 1e-6, "x={x}: {s}");
        }
        let f = radial_fractions(1e-4, 5).unwrap();
        assert!((f[0] - 1.0).abs() < 1e-7 && f[1] < 1e-8);
        assert!(radial_fractions(2.0, 3).unwrap()[1] > 0.0);
    }

    #[test]
    fn decomposition_totals() {
        let g = Geometry::new(50.0, 30.0, 1.0).unwrap();
        let em = EmitterSpec::from_dipole(2.6, 5.0, 0.0, 1.0).unwrap();
        let d = gamma0n_radial_decomposition(2.6, &g, &em, 40).unwrap();
        assert!(!d.truncated);
        assert!((d.captured() - 1.0).abs() < 1e-8);
        let d = gamma0n_radial_decomposition(2.6, &g, &em, 1).unwrap();
        assert!(d.truncated);
    }

    #[test]
    fn polarizability_examples() {
        let p = polarizability_from_eps(2, Complex64::new(2.0, 0.0), 2.0, 5.0, 0.1).unwrap();
        assert_eq!(p.alpha, Complex64::new(0.0, 0.0));
        let p = polarizability_from_eps(1, Complex64::new(-3.0, 0.1), 1.0, 5.0, 0.0).unwrap();
        assert_eq!(p.alpha, p.alpha_eff);
        assert!(matches!(
            polarizability_from_eps(1, Complex64::new(-2.0, 0.0), 1.0, 5.0, 0.0),
            Err(Error::SingularDenominator(_))
        ));
    }

    #[test]
    fn lossless_unit_background_resonances() {
        let m = MaterialModel::drude(1.0, 7.9, 0.0).unwrap();
        for n in 1..=6 {
            let nf = n as f64;
            let w = qs_resonance(n, 1.0, &m).unwrap();
            let want = 7.9 * (nf / (2.0 * nf + 1.0)).sqrt();
            assert!((w / want - 1.0).abs() < 1e-10);
        }
        // |alpha_1|^2 is largest at the resonance
        let g = Geometry::new(5.0, 1.0, 1.0).unwrap();
        let w1 = 7.9 / 3f64.sqrt();
        let at = |w: f64| qs_polarizability(1, w, &g, &m).unwrap().alpha.norm();
        assert!(at(w1 * (1.0 + 1e-6)) > at(w1 * 1.01) && at(w1 * (1.0 - 1e-6)) > at(w1 * 0.99));
    }

    #[test]
    fn silver_dipole_resonance() {
        let w = qs_resonance(1, 1.0, &MaterialModel::silver()).unwrap();
        // closed form with damping: w^2 = wp^2 / (eps_inf + 2) - gamma^2
        let want = (7.9f64.powi(2) / 8.0 - 0.051f64.powi(2)).sqrt();
        assert!((w - want).abs() < 1e-10);
        assert!((w - 2.793).abs() < 1e-3);
    }

    #[test]
    fn mode_param_scalings() {
        let m = MaterialModel::silver();
        let em = EmitterSpec::from_dipole(2.8, 5.0, 0.0, 1.0).unwrap();
        let g1 = Geometry::new(8.0, 2.0, 1.0).unwrap();
        let g2 = Geometry::new(16.0, 2.0, 1.0).unwrap();
        let a = qs_mode_params(1, &g1, &m, &em).unwrap();
        let b = qs_mode_params(1, &g2, &m, &em).unwrap();
        assert!((b.hbar_gamma_rad / a.hbar_gamma_rad - 8.0).abs() < 1e-10);
        assert!((a.hbar_gamma - a.hbar_gamma_rad - 0.051).abs() < 1e-15);
        let c10 = qs_coupling(
            1,
            2.79,
            &Geometry::from_center_distance(8.0, 10.0, 1.0).unwrap(),
            5.0,
            1.0,
        );
        let c12 = qs_coupling(
            1,
            2.79,
            &Geometry::from_center_distance(8.0, 12.0, 1.0).unwrap(),
            5.0,
            1.0,
        );
        assert!((c12 / c10 - (10.0f64 / 12.0).powi(3)).abs() < 1e-14);
    }

    #[test]
    fn printed_forms_recovered_for_unit_eps() {
        // eps_inf = eps_b = 1: Gamma_rad = w_n (n+1)(k0 R)^(2n+1) / (n (2n-1)!! (2n+1)!!)
        let m = MaterialModel::drude(1.0, 7.9, 0.0).unwrap();
        let g = Geometry::new(20.0, 3.0, 1.0).unwrap();
        let em = EmitterSpec::from_dipole(4.0, 5.0, 0.0, 1.0).unwrap();
        let p = qs_mode_params(2, &g, &m, &em).unwrap();
        let w = 7.9 * (0.4f64).sqrt();
        let want = w * 3.0 * (w / HBAR_C * 20.0).powi(5) / (2.0 * 3.0 * 15.0);
        assert!((p.hbar_gamma_rad / want - 1.0).abs() < 1e-10);
        assert_eq!(residue_factor(3, 1.0, 1.0), 1.0);
        assert!((residue_factor(1, 6.0, 1.0) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn radiative_width_matches_effective_polarizability() {
        // the width of |alpha_1^eff|^2 in a nearly lossless metal is Gamma_p + Gamma_1^rad
        let m = MaterialModel::drude(6.0, 7.9, 1e-6).unwrap();
        let g = Geometry::new(10.0, 3.0, 1.0).unwrap();
        let em = EmitterSpec::from_dipole(2.8, 5.0, 0.0, 1.0).unwrap();
        let p = qs_mode_params(1, &g, &m, &em).unwrap();
        let f = |w: f64| qs_polarizability(1, w, &g, &m).unwrap().alpha_eff.norm_sqr();
        let peak = f(p.hbar_omega_n);
        let half = |sign: f64| {
            let (mut a, mut b) = (p.hbar_omega_n, p.hbar_omega_n + sign * 0.05);
            for _ in 0..100 {
                let mid = 0.5 * (a + b);
                if f(mid) > 0.5 * peak {
                    a = mid
                } else {
                    b = mid
                }
            }
            a
        };
        let fwhm = half(1.0) - half(-1.0);
        assert!((fwhm / p.hbar_gamma - 1.0).abs() < 0.02, "{fwhm} vs {}", p.hbar_gamma);
    }

    #[test]
    fn resonances_increase_to_accumulation_point() {
        let m = MaterialModel::silver();
        let lim = 7.9 / 7f64.sqrt();
        let mut prev = 0.0;
        for n in 1..=20 {
            let w = qs_resonance(n, 1.0, &m).unwrap();
            assert!(w > prev && w < lim);
            prev = w;
        }
    }

    #[test]
    fn lorentzian_green_on_resonance() {
        let v = lorentzian_green(2.8, 2.8, 0.05, 0.02, 4.0);
        assert_eq!(v.re, 0.0);
        let d = 4.0 * DEBYE;
        let k0 = 2.8 / HBAR_C;
        let want = 0.02f64.powi(2) * 2.0 / 0.05 / (4.0 * PI * COULOMB * d * d * k0 * k0);
        assert!((v.im / want - 1.0).abs() < 1e-14);
        assert_eq!(lorentzian_green(2.7, 2.8, 0.05, 0.0, 4.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn quasi_static_green_tracks_exact_dipole_term() {
        let (g, m) = silver_8_2();
        let em = EmitterSpec::from_dipole(2.8, 5.0, 0.0, 1.0).unwrap();
        let mode = qs_mode_params(1, &g, &m, &em).unwrap();
        let w = mode.hbar_omega_n;
        let qs = lorentzian_green(w, w, mode.hbar_gamma, mode.hbar_g, em.d_eg).im;
        let exact = green_rr_term(1, w, &g, &m).unwrap().im;
        assert!((qs / exact - 1.0).abs() < 0.15, "{qs} vs {exact}");
    }

    #[test]
    fn quasi_static_green_vanishes_without_dipole_coupling() {
        let (g, m) = silver_8_2();
        let em = EmitterSpec::from_dipole(2.8, 0.0, 1e-6, 1.0).unwrap();
        // d = 0 makes g = 0 and the ratio 0/0; the single-pole form is defined through g
        let mode = qs_mode_params(1, &g, &m, &em).unwrap();
        assert_eq!(mode.hbar_g, 0.0);
    }

    proptest! {
        #[test]
        fn total_ldos_positive(w in 2.0f64..3.5, h in 1.0f64..20.0) {
            let g = Geometry::new(8.0, h, 1.0).unwrap();
            let s = green_rr_scattered(w, &g, &MaterialModel::silver(), 40).unwrap();
            let kb = w / HBAR_C;
            prop_assert!(s.total.im + free_green_rr_imag(kb) > 0.0);
        }

        #[test]
        fn no_radiation_correction_at_zero_kb(n in 1usize..6, re in -10.0f64..-0.1, im in 0.01f64..2.0) {
            let p = polarizability_from_eps(n, Complex64::new(re, im), 1.0, 7.0, 0.0).unwrap();
            prop_assert_eq!(p.alpha, p.alpha_eff);
        }
    }
}
