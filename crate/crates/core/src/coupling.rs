//! Emitter-plasmon coupling spectra and the extraction of per-mode
//! parameters by Lorentzian and Fano fits.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{levenberg_marquardt, LmOptions, LmReport};
use crate::medium::{radiative_rate, EmitterSpec, Geometry, MaterialModel, COULOMB, DEBYE, HBAR_C};
use crate::mie::{green_rr_term, qs_mode_params, radial_fractions};

/// Per-mode parameters. Rates and couplings are `hbar` times the angular
/// quantity, in eV. `hbar_g` is stored non-negative; a Fano ratio carries the
/// relative sign of the direct radiative coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeParams {
    pub n: usize,
    pub hbar_omega_n: f64,
    pub hbar_gamma: f64,
    pub hbar_gamma_rad: Option<f64>,
    pub hbar_gamma_nr: Option<f64>,
    pub hbar_g: f64,
    /// Fano ratio `alpha_n`, with `alpha_n g_n = ±sqrt(gamma_0n^rad Gamma_n^rad)`.
    pub alpha: Option<f64>,
    /// `hbar gamma_0n^rad` at the mode frequency, the emitter's share of the
    /// radiative continuum seen by this mode.
    pub hbar_gamma0n_rad: Option<f64>,
    /// `|model - data| / |data|` over the fit window.
    pub fit_residual: f64,
    /// `omega_n - omega_0` against the emitter the modes were extracted for.
    pub detuning: f64,
}

impl ModeParams {
    pub fn lorentzian(n: usize, hbar_omega_n: f64, hbar_gamma: f64, hbar_g: f64) -> Self {
        ModeParams {
            n,
            hbar_omega_n,
            hbar_gamma,
            hbar_gamma_rad: None,
            hbar_gamma_nr: None,
            hbar_g,
            alpha: None,
            hbar_gamma0n_rad: None,
            fit_residual: 0.0,
            detuning: 0.0,
        }
    }

    pub fn quality(&self) -> f64 {
        self.hbar_omega_n / self.hbar_gamma
    }

    pub fn against(mut self, emitter: &EmitterSpec) -> Self {
        self.detuning = self.hbar_omega_n - emitter.hbar_omega0;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpectrum {
    pub n: usize,
    /// Photon energies (eV), strictly ascending.
    pub grid: Vec<f64>,
    /// `hbar |kappa_n|^2` (eV), a density per unit photon energy.
    pub values: Vec<f64>,
}

/// Uniform energy grid description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl EnergyGrid {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        if !(min > 0.0 && max > min && points >= 2) || !max.is_finite() {
            return Err(Error::InvalidParameter {
                field: "grid",
                reason: format!("need 0 < min < max and >= 2 points, got [{min}, {max}] x {points}"),
            });
        }
        Ok(EnergyGrid { min, max, points })
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.points)
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter {
            field: "grid",
            reason: "energies must be strictly ascending with at least 2 points".into(),
        });
    }
    Ok(())
}

/// `hbar |kappa|^2 = 4 C d^2 k0^2 Im G_n^rr` in eV, with `C = e^2 / 4 pi eps0`.
pub fn kappa_from_green(hbar_omega: f64, im_g: f64, d_eg: f64) -> f64 {
    let d = d_eg * DEBYE;
    let k0 = hbar_omega / HBAR_C;
    4.0 * COULOMB * d * d * k0 * k0 * im_g
}

/// Lorentzian model `(Gamma / 2 pi) g^2 / ((E - E_n)^2 + Gamma^2 / 4)`.
pub fn lorentzian_kappa(e: f64, hbar_omega_n: f64, hbar_gamma: f64, hbar_g: f64) -> f64 {
    let x = e - hbar_omega_n;
    hbar_gamma / (2.0 * PI) * hbar_g * hbar_g / (x * x + 0.25 * hbar_gamma * hbar_gamma)
}

pub fn kappa_spectrum(
    n: usize,
    grid: &[f64],
    geometry: &Geometry,
    material: &MaterialModel,
    emitter: &EmitterSpec,
) -> Result<CouplingSpectrum> {
    check_grid(grid)?;
    let values = grid
        .par_iter()
        .map(|&w| {
            Ok(kappa_from_green(
                w,
                green_rr_term(n, w, geometry, material)?.im,
                emitter.d_eg,
            ))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(CouplingSpectrum {
        n,
        grid: grid.to_vec(),
        values,
    })
}

/// Peak index, value and full width at half maximum (linear interpolation;
/// a side that never drops below half maximum mirrors the other one).
fn peak_and_width(grid: &[f64], values: &[f64]) -> Option<(usize, f64, f64)> {
    // prefer an interior maximum: rate spectra can rise towards a grid edge
    let interior = (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1])
        .max_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let imax = match interior {
        Some(i) => i,
        None => {
            values
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())?
                .0
        }
    };
    let peak = values[imax];
    if !(peak > 0.0) {
        return None;
    }
    let half = 0.5 * peak;
    let left = (0..imax).rev().find(|&i| values[i] < half).map(|i| {
        let t = (half - values[i]) / (values[i + 1] - values[i]);
        grid[imax] - (grid[i] + t * (grid[i + 1] - grid[i]))
    });
    let right = (imax + 1..values.len()).find(|&i| values[i] < half).map(|i| {
        let t = (values[i - 1] - half) / (values[i - 1] - values[i]);
        (grid[i - 1] + t * (grid[i] - grid[i - 1])) - grid[imax]
    });
    let fwhm = match (left, right) {
        (Some(l), Some(r)) => l + r,
        (Some(l), None) => 2.0 * l,
        (None, Some(r)) => 2.0 * r,
        (None, None) => grid[grid.len() - 1] - grid[0],
    };
    Some((imax, peak, fwhm))
}

/// RMS of the residuals relative to the RMS of the data; `scaled` holds the
/// residuals divided by `scale`.
fn relative_rms(scaled: &[f64], scale: f64, data: &[f64]) -> f64 {
    let r: f64 = scaled.iter().map(|v| v * v).sum::<f64>().sqrt() * scale;
    let d: f64 = data.iter().map(|v| v * v).sum::<f64>().sqrt();
    if d == 0.0 {
        0.0
    } else {
        r / d
    }
}

pub fn fit_lorentzian(spectrum: &CouplingSpectrum) -> Result<ModeParams> {
    let CouplingSpectrum { n, grid, values } = spectrum;
    check_grid(grid)?;
    if grid.len() != values.len() {
        return Err(Error::InvalidArgument("grid and values differ in length".into()));
    }
    let (imax, peak, fwhm) = peak_and_width(grid, values).ok_or_else(|| Error::ModeExtraction {
        modes: vec![*n],
        reason: "spectrum has no positive peak".into(),
    })?;
    let w0 = grid[imax];
    let g0 = (PI * fwhm * peak / 2.0).sqrt();
    let resid = |p: &[f64]| -> Vec<f64> {
        let (w, gam, g) = (p[0], p[1].exp(), p[2].exp());
        grid.iter()
            .zip(values)
            .map(|(&e, &v)| (lorentzian_kappa(e, w, gam, g) - v) / peak)
            .collect()
    };
    let rep = levenberg_marquardt(resid, &[w0, fwhm.ln(), g0.ln()], &LmOptions::default())?;
    let mut m = ModeParams::lorentzian(*n, rep.params[0], rep.params[1].exp(), rep.params[2].exp());
    m.fit_residual = relative_rms(&rep.residuals, peak, values);
    Ok(m)
}

/// Per-mode windows: `omega_n` estimate +- `half_widths` linewidths, clipped
/// to the grid bounds, sampled with `grid.points` points.
pub fn extract_modes(
    n_modes: usize,
    grid: &EnergyGrid,
    geometry: &Geometry,
    material: &MaterialModel,
    emitter: &EmitterSpec,
) -> Result<Vec<ModeParams>> {
    extract_modes_with(n_modes, grid, 5.0, geometry, material, emitter)
}

pub fn extract_modes_with(
    n_modes: usize,
    grid: &EnergyGrid,
    half_widths: f64,
    geometry: &Geometry,
    material: &MaterialModel,
    emitter: &EmitterSpec,
) -> Result<Vec<ModeParams>> {
    if n_modes < 1 {
        return Err(Error::InvalidArgument("need at least one mode".into()));
    }
    let results: Vec<(usize, Result<ModeParams>)> = (1..=n_modes)
        .into_par_iter()
        .map(|n| (n, extract_one(n, grid, half_widths, geometry, material, emitter)))
        .collect();
    let mut modes = Vec::with_capacity(n_modes);
    let mut failed = Vec::new();
    let mut reasons = Vec::new();
    for (n, r) in results {
        match r {
            Ok(m) => modes.push(m),
            Err(e) => {
                failed.push(n);
                reasons.push(format!("n={n}: {e}"));
            }
        }
    }
    if !failed.is_empty() {
        return Err(Error::ModeExtraction {
            modes: failed,
            reason: reasons.join("; "),
        });
    }
    Ok(modes)
}

fn extract_one(
    n: usize,
    grid: &EnergyGrid,
    half_widths: f64,
    geometry: &Geometry,
    material: &MaterialModel,
    emitter: &EmitterSpec,
) -> Result<ModeParams> {
    let (center, width) = match qs_mode_params(n, geometry, material, emitter) {
        Ok(q) => (q.hbar_omega_n, q.hbar_gamma.max(1e-3)),
        Err(_) => {
            let full = kappa_spectrum(n, &grid.values(), geometry, material, emitter)?;
            let (i, _, w) = peak_and_width(&full.grid, &full.values).ok_or_else(|| Error::ModeExtraction {
                modes: vec![n],
                reason: "no resonance on the grid".into(),
            })?;
            (full.grid[i], w)
        }
    };
    let lo = (center - half_widths * width).max(grid.min);
    let hi = (center + half_widths * width).min(grid.max);
    if !(hi > lo) {
        return Err(Error::ModeExtraction {
            modes: vec![n],
            reason: format!("resonance near {center:.4} eV lies outside the grid"),
        });
    }
    let spec = kappa_spectrum(n, &linspace(lo, hi, grid.points.max(50)), geometry, material, emitter)?;
    Ok(fit_lorentzian(&spec)?.against(emitter))
}

/// Frequency-dependent emitter rates entering the Fano profile of mode `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanoContext {
    pub n: usize,
    pub d_eg: f64,
    pub eta: f64,
    pub eps_b: f64,
    pub r_d: f64,
}

impl FanoContext {
    pub fn new(n: usize, geometry: &Geometry, emitter: &EmitterSpec) -> Self {
        FanoContext {
            n,
            d_eg: emitter.d_eg,
            eta: emitter.eta,
            eps_b: geometry.eps_b,
            r_d: geometry.r_d,
        }
    }

    pub fn gamma0_rad(&self, hbar_omega: f64) -> f64 {
        radiative_rate(self.d_eg, hbar_omega, self.eps_b)
    }

    /// Total intrinsic rate at `hbar_omega`, keeping the quantum yield fixed.
    pub fn gamma0(&self, hbar_omega: f64) -> f64 {
        self.gamma0_rad(hbar_omega) / self.eta
    }

    pub fn gamma0n_rad(&self, hbar_omega: f64) -> f64 {
        let x = self.eps_b.sqrt() * hbar_omega / HBAR_C * self.r_d;
        radial_fractions(x, self.n).map(|f| f[self.n - 1]).unwrap_or(0.0) * self.gamma0_rad(hbar_omega)
    }
}

/// Fano profile parameters; `sign` is the sign of `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoParams {
    pub hbar_omega_n: f64,
    pub hbar_gamma_rad: f64,
    pub hbar_gamma_nr: f64,
    pub hbar_g: f64,
    pub sign: f64,
}

impl FanoParams {
    pub fn alpha(&self, ctx: &FanoContext) -> f64 {
        if self.hbar_g == 0.0 {
            return 0.0;
        }
        self.sign * (ctx.gamma0n_rad(self.hbar_omega_n) * self.hbar_gamma_rad).sqrt() / self.hbar_g
    }
}

/// `gamma_n / gamma_0` at emission energy `e`:
/// `F [1 - a^2/4 + 2 a Q x] / (1 + 4 Q^2 x^2)`, `x = (e - E_n)/E_n`.
pub fn fano_rate(e: f64, p: &FanoParams, ctx: &FanoContext) -> f64 {
    fano_rate_with_alpha(e, p, p.alpha(ctx), ctx)
}

fn fano_rate_with_alpha(e: f64, p: &FanoParams, alpha: f64, ctx: &FanoContext) -> f64 {
    let gamma = p.hbar_gamma_rad + p.hbar_gamma_nr;
    let f = 4.0 * p.hbar_g * p.hbar_g / (ctx.gamma0(e) * gamma);
    let q = p.hbar_omega_n / gamma;
    let x = (e - p.hbar_omega_n) / p.hbar_omega_n;
    f * (1.0 - 0.25 * alpha * alpha + 2.0 * alpha * q * x) / (1.0 + 4.0 * q * q * x * x)
}

#[derive(Debug, Clone, PartialEq)]
pub enum FanoFit {
    /// `Gamma^nr` pinned to zero; fits `omega_n`, `Gamma^rad`, `g`.
    Lossless,
    /// Fits `Gamma^nr` only, other parameters taken from a lossless fit.
    LossyFrozen(ModeParams),
    /// Fits all four parameters.
    LossyFree,
}

/// Fits a `gamma_n / gamma_0` spectrum over emission energies `grid`.
pub fn fit_fano_rate(grid: &[f64], values: &[f64], ctx: &FanoContext, mode: &FanoFit) -> Result<ModeParams> {
    check_grid(grid)?;
    if grid.len() != values.len() {
        return Err(Error::InvalidArgument("grid and values differ in length".into()));
    }
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !(scale > 0.0) {
        return Err(Error::ModeExtraction {
            modes: vec![ctx.n],
            reason: "rate spectrum is identically zero".into(),
        });
    }
    let (imax, peak, fwhm) = peak_and_width(grid, values).ok_or_else(|| Error::ModeExtraction {
        modes: vec![ctx.n],
        reason: "rate spectrum has no positive peak".into(),
    })?;
    let w_peak = grid[imax];
    let residuals = |p: &FanoParams| -> Vec<f64> {
        let alpha = p.alpha(ctx);
        grid.iter()
            .zip(values)
            .map(|(&e, &v)| (fano_rate_with_alpha(e, p, alpha, ctx) - v) / scale)
            .collect()
    };
    let opts = LmOptions::default();
    let mut best: Option<(LmReport, FanoParams)> = None;
    let mut last_err = None;
    let mut consider = |rep: Result<LmReport>, p: FanoParams| match rep {
        Ok(rep) => {
            if best.as_ref().is_none_or(|(b, _)| rep.cost < b.cost) {
                best = Some((rep, p));
            }
        }
        Err(e) => last_err = Some(e),
    };
    match mode {
        FanoFit::Lossless | FanoFit::LossyFree => {
            let lossy = matches!(mode, FanoFit::LossyFree);
            let g0 = (peak * ctx.gamma0(w_peak) * fwhm / 4.0).sqrt();
            // asymmetric low-Q profiles put the peak well off the resonance, so
            // a few shifted and rescaled starts are tried for each sign of alpha
            let starts = [(0.0, 1.0), (-0.5, 1.0), (0.5, 1.0), (0.0, 2.0), (0.0, 0.5)];
            for sign in [-1.0, 1.0] {
                let unpack = |x: &[f64]| FanoParams {
                    hbar_omega_n: x[0],
                    hbar_gamma_rad: x[1].exp(),
                    hbar_gamma_nr: if lossy { x[3].exp() } else { 0.0 },
                    hbar_g: x[2].exp(),
                    sign,
                };
                for (shift, stretch) in starts {
                    let width = stretch * fwhm;
                    let mut x0 = vec![w_peak + shift * fwhm, width.ln(), (g0 * stretch.sqrt()).ln()];
                    if lossy {
                        x0[1] = (0.5 * width).ln();
                        x0.push((0.5 * width).ln());
                    }
                    let rep = levenberg_marquardt(|x| residuals(&unpack(x)), &x0, &opts);
                    let p = rep.as_ref().map(|r| unpack(&r.params)).unwrap_or(unpack(&x0));
                    consider(rep, p);
                }
            }
        }
        FanoFit::LossyFrozen(base) => {
            let gamma_rad = base.hbar_gamma_rad.ok_or(Error::IncompleteModes {
                n: base.n,
                what: "a radiative width",
            })?;
            let sign = base.alpha.map_or(1.0, |a| if a < 0.0 { -1.0 } else { 1.0 });
            let unpack = |x: &[f64]| FanoParams {
                hbar_omega_n: base.hbar_omega_n,
                hbar_gamma_rad: gamma_rad,
                hbar_gamma_nr: x[0].exp(),
                hbar_g: base.hbar_g,
                sign,
            };
            let x0 = [(fwhm - gamma_rad).max(0.1 * gamma_rad).ln()];
            let rep = levenberg_marquardt(|x| residuals(&unpack(x)), &x0, &opts);
            let p = rep.as_ref().map(|r| unpack(&r.params)).unwrap_or(unpack(&x0));
            consider(rep, p);
        }
    }
    let (rep, p) = match best {
        Some(b) => b,
        None => return Err(last_err.unwrap()),
    };
    Ok(ModeParams {
        n: ctx.n,
        hbar_omega_n: p.hbar_omega_n,
        hbar_gamma: p.hbar_gamma_rad + p.hbar_gamma_nr,
        hbar_gamma_rad: Some(p.hbar_gamma_rad),
        hbar_gamma_nr: Some(p.hbar_gamma_nr),
        hbar_g: p.hbar_g,
        alpha: Some(p.alpha(ctx)),
        hbar_gamma0n_rad: Some(ctx.gamma0n_rad(p.hbar_omega_n)),
        fit_residual: relative_rms(&rep.residuals, scale, values),
        detuning: 0.0,
    })
}

impl ModeParams {
    /// Fano profile parameters of a Fano-resolved mode.
    pub fn fano_params(&self) -> Result<FanoParams> {
        let gamma_rad = self.hbar_gamma_rad.ok_or(Error::IncompleteModes {
            n: self.n,
            what: "a radiative width",
        })?;
        let alpha = self.alpha.ok_or(Error::IncompleteModes {
            n: self.n,
            what: "a Fano ratio",
        })?;
        Ok(FanoParams {
            hbar_omega_n: self.hbar_omega_n,
            hbar_gamma_rad: gamma_rad,
            hbar_gamma_nr: self.hbar_gamma_nr.unwrap_or(self.hbar_gamma - gamma_rad),
            hbar_g: self.hbar_g,
            sign: if alpha < 0.0 { -1.0 } else { 1.0 },
        })
    }
}

impl ModeParams {
    /// Copy with the Fano ratio and the direct emitter channel evaluated at
    /// emission energy `hbar_omega` instead of at the fitted resonance.
    pub fn fano_at(&self, ctx: &FanoContext, hbar_omega: f64) -> Result<ModeParams> {
        let p = self.fano_params()?;
        let g0n = ctx.gamma0n_rad(hbar_omega);
        let alpha = if self.hbar_g == 0.0 {
            0.0
        } else {
            p.sign * (g0n * p.hbar_gamma_rad).sqrt() / self.hbar_g.abs()
        };
        Ok(ModeParams {
            alpha: Some(alpha),
            hbar_gamma0n_rad: Some(g0n),
            ..self.clone()
        })
    }
}

/// Writes a two-column spectrum with `#` header lines.
pub fn format_spectrum(header: &[&str], grid: &[f64], values: &[f64]) -> String {
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    for (e, v) in grid.iter().zip(values) {
        let _ = writeln!(out, "{e:.10e} {v:.10e}");
    }
    out
}

pub fn parse_spectrum(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut grid = Vec::new();
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .collect();
        if cols.len() != 2 {
            return Err(Error::Parse {
                line: i + 1,
                reason: format!("expected 2 columns, found {}", cols.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| Error::Parse {
                line: i + 1,
                reason: format!("not a number: {s}"),
            })
        };
        grid.push(parse(cols[0])?);
        values.push(parse(cols[1])?);
    }
    check_grid(&grid)?;
    Ok((grid, values))
}
