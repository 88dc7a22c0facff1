//! Closed-form weak-coupling rates: adiabatic elimination, Purcell factors,
//! the Fermi golden rule, broadened and Fano-modified rates.

use serde::{Deserialize, Serialize};

use crate::coupling::ModeParams;
use crate::error::{Error, Result};
use crate::medium::{EmitterSpec, Geometry, MaterialModel, HBAR_C, HBAR_EV_FS};
use crate::mie::green_rr_scattered;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMethod {
    Adiabatic,
    Fermi,
    Broadened,
    Fano,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakCouplingReport {
    pub method: RateMethod,
    /// `hbar delta omega` (eV); reported only, never folded into `omega_0`.
    pub lamb_shift: f64,
    pub gamma0: f64,
    pub gamma_tot: f64,
    pub gamma_n: Vec<f64>,
    pub purcell: Vec<f64>,
    pub quality: Vec<f64>,
    pub f_rad: Vec<Option<f64>>,
    /// Emitter energy where the Fano bracket of each mode vanishes.
    pub fano_dip: Vec<Option<f64>>,
}

impl WeakCouplingReport {
    pub fn ratio(&self) -> f64 {
        self.gamma_tot / self.gamma0
    }

    pub fn lifetime_ns(&self) -> f64 {
        crate::medium::HBAR_EV_S / self.gamma_tot * 1e9
    }
}

fn report(
    method: RateMethod,
    modes: &[ModeParams],
    emitter: &EmitterSpec,
    lamb: f64,
    gamma_n: Vec<f64>,
) -> WeakCouplingReport {
    let gamma0 = emitter.hbar_gamma0;
    let factors = purcell_factors(modes, emitter);
    WeakCouplingReport {
        method,
        lamb_shift: lamb,
        gamma0,
        gamma_tot: gamma0 + gamma_n.iter().sum::<f64>(),
        gamma_n,
        purcell: factors.iter().map(|f| f.f_p).collect(),
        quality: factors.iter().map(|f| f.quality).collect(),
        f_rad: factors.iter().map(|f| f.f_rad).collect(),
        fano_dip: vec![None; modes.len()],
    }
}

/// `delta omega = sum g^2 (w0 - wn) / D`, `gamma_n = g^2 Gamma / D`,
/// `D = (w0 - wn)^2 + Gamma^2/4`.
pub fn adiabatic_rates(modes: &[ModeParams], emitter: &EmitterSpec) -> WeakCouplingReport {
    let mut lamb = 0.0;
    let mut gamma_n = Vec::with_capacity(modes.len());
    for m in modes {
        let x = emitter.hbar_omega0 - m.hbar_omega_n;
        let den = x * x + 0.25 * m.hbar_gamma * m.hbar_gamma;
        let g2 = m.hbar_g * m.hbar_g;
        lamb += g2 * x / den;
        gamma_n.push(g2 * m.hbar_gamma / den);
    }
    report(RateMethod::Adiabatic, modes, emitter, lamb, gamma_n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurcellEntry {
    pub n: usize,
    /// `4 g^2 / (gamma_0 Gamma_n)`.
    pub f_p: f64,
    pub quality: f64,
    /// Detuned contribution `gamma_n / gamma_0`.
    pub contribution: f64,
    /// `4 g^2 / (gamma_0^rad Gamma_n^rad)`.
    pub f_rad: Option<f64>,
    /// `4 g^2 / (gamma_0^rad Gamma_n)`, the lossy factor referred to the
    /// radiative emitter rate.
    pub f_p_rad: Option<f64>,
}

pub fn purcell_factors(modes: &[ModeParams], emitter: &EmitterSpec) -> Vec<PurcellEntry> {
    let gamma0 = emitter.hbar_gamma0;
    let gamma0_rad = emitter.eta * gamma0;
    modes
        .iter()
        .map(|m| {
            let g2 = m.hbar_g * m.hbar_g;
            let x = emitter.hbar_omega0 - m.hbar_omega_n;
            let f_p = 4.0 * g2 / (gamma0 * m.hbar_gamma);
            PurcellEntry {
                n: m.n,
                f_p,
                quality: m.hbar_omega_n / m.hbar_gamma,
                contribution: f_p / (1.0 + 4.0 * x * x / (m.hbar_gamma * m.hbar_gamma)),
                f_rad: m.hbar_gamma_rad.map(|gr| 4.0 * g2 / (gamma0_rad * gr)),
                f_p_rad: m.hbar_gamma_rad.map(|_| 4.0 * g2 / (gamma0_rad * m.hbar_gamma)),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FermiRate {
    pub ratio: f64,
    pub converged: bool,
}

/// `gamma_tot / gamma_0 = 1 + eta (6 pi / k_b) Im G_S^rr(r_d, r_d)`.
pub fn fermi_rate(
    hbar_omega0: f64,
    geometry: &Geometry,
    material: &MaterialModel,
    emitter: &EmitterSpec,
    n_max: usize,
) -> Result<FermiRate> {
    if !(geometry.r_d > geometry.radius) {
        return Err(Error::InvalidParameter {
            field: "h",
            reason: "emitter must sit outside the particle".into(),
        });
    }
    let kb = geometry.n_b() * hbar_omega0 / HBAR_C;
    let g = green_rr_scattered(hbar_omega0, geometry, material, n_max)?;
    Ok(FermiRate {
        ratio: 1.0 + emitter.eta * 6.0 * std::f64::consts::PI / kb * g.total.im,
        converged: g.converged,
    })
}

/// Per-mode rates with the emitter line folded in:
/// `g^2 (gamma_0 + Gamma) / ((w0 - wn)^2 + ((gamma_0 + Gamma)/2)^2)`.
pub fn broadened_rate(modes: &[ModeParams], emitter: &EmitterSpec) -> Vec<f64> {
    modes
        .iter()
        .map(|m| {
            let w = emitter.hbar_gamma0 + m.hbar_gamma;
            let x = emitter.hbar_omega0 - m.hbar_omega_n;
            m.hbar_g * m.hbar_g * w / (x * x + 0.25 * w * w)
        })
        .collect()
}

pub fn broadened_report(modes: &[ModeParams], emitter: &EmitterSpec) -> WeakCouplingReport {
    report(
        RateMethod::Broadened,
        modes,
        emitter,
        0.0,
        broadened_rate(modes, emitter),
    )
}

/// Adiabatic elimination of the Fano Hamiltonian, `Delta_n = w_n - w_0`:
/// `delta omega = -sum g^2 [(1 - a^2/4) Delta + a Gamma/2] / D`,
/// `gamma_n = g^2 [(1 - a^2/4) Gamma - 2 a Delta] / D`.
pub fn fano_adiabatic(modes: &[ModeParams], emitter: &EmitterSpec) -> Result<WeakCouplingReport> {
    let mut lamb = 0.0;
    let mut gamma_n = Vec::with_capacity(modes.len());
    let mut dips = Vec::with_capacity(modes.len());
    for m in modes {
        let a = m.alpha.ok_or(Error::IncompleteModes {
            n: m.n,
            what: "a Fano ratio",
        })?;
        let d = m.hbar_omega_n - emitter.hbar_omega0;
        let gam = m.hbar_gamma;
        let den = d * d + 0.25 * gam * gam;
        let g2 = m.hbar_g * m.hbar_g;
        let b = 1.0 - 0.25 * a * a;
        lamb -= g2 * (b * d + 0.5 * a * gam) / den;
        gamma_n.push(g2 * (b * gam - 2.0 * a * d) / den);
        dips.push(fano_dip(m.hbar_omega_n, gam, a));
    }
    let mut r = report(RateMethod::Fano, modes, emitter, lamb, gamma_n);
    r.fano_dip = dips;
    Ok(r)
}

/// Root of `1 - a^2/4 + 2 a Q (w - wn)/wn`; none when `a = 0`.
pub fn fano_dip(hbar_omega_n: f64, hbar_gamma: f64, alpha: f64) -> Option<f64> {
    if alpha == 0.0 {
        return None;
    }
    let q = hbar_omega_n / hbar_gamma;
    let x = -(1.0 - 0.25 * alpha * alpha) / (2.0 * alpha * q);
    Some(hbar_omega_n * (1.0 + x))
}

/// Decay rate (eV) from a log-linear least-squares fit of a population trace
/// sampled at `times` (fs).
pub fn fit_exponential_decay(times: &[f64], population: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(population)
        .filter(|(_, p)| **p > 0.0)
        .map(|(t, p)| (*t, p.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidArgument(
            "need two positive samples to fit a decay".into(),
        ));
    }
    let n = pts.len() as f64;
    let (st, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + t, b + y));
    let (mt, my) = (st / n, sy / n);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| {
        (a + (t - mt) * (y - my), b + (t - mt) * (t - mt))
    });
    if den == 0.0 {
        return Err(Error::InvalidArgument("samples share a single time".into()));
    }
    Ok(-num / den * HBAR_EV_FS)
}
