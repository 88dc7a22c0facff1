//! End-to-end pipelines for the reference configurations: linewidths of a
//! small sphere, the strong-coupling dressed states, the weak-coupling decay
//! rate by three routes and the Fano regime of a large sphere.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::coupling::{extract_modes, fit_fano_rate, linspace, EnergyGrid, FanoContext, FanoFit, ModeParams};
use crate::error::{Error, Result};
use crate::heff::{
    build_standard, eigendecompose, evolve_spectral, polarization_from_set, radiated_spectrum, AmplitudeState,
    DressedSet, PolarizationSpectrum, RadiatedSpectrum,
};
use crate::medium::{EmitterSpec, Geometry, MaterialModel, HBAR_C, HBAR_EV_FS, HBAR_EV_S};
use crate::mie::green_rr_term;
use crate::weak::{adiabatic_rates, fermi_rate, fit_exponential_decay, purcell_factors, WeakCouplingReport};

/// Interior local maxima `(x, y)` sorted by decreasing height.
pub fn local_maxima(x: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    let mut peaks: Vec<(f64, f64)> = (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1])
        .map(|i| (x[i], y[i]))
        .collect();
    peaks.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    peaks
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrongCoupling {
    pub modes: Vec<ModeParams>,
    pub dressed: DressedSet,
    /// `|Re(lambda_a - lambda_b)|` of the two states with largest `|m_0|` (eV).
    pub dressed_splitting: f64,
    /// Separation of the two highest polarization peaks (eV).
    pub peak_separation: f64,
    pub polarization: PolarizationSpectrum,
    pub radiated: RadiatedSpectrum,
    /// Highest `|C_1|^2` peak (eV).
    pub c1_peak: f64,
    /// Highest far-field peak (eV).
    pub p_rad_peak: f64,
}

pub fn strong_coupling(
    geometry: &Geometry,
    material: &MaterialModel,
    emitter: &EmitterSpec,
    n_modes: usize,
    fit_grid: &EnergyGrid,
    spectrum_grid: &[f64],
) -> Result<StrongCoupling> {
    let modes = extract_modes(n_modes, fit_grid, geometry, material, emitter)?;
    let h = build_standard(&modes, emitter)?;
    let dressed = eigendecompose(&h)?;
    let order = dressed.by_emitter_weight();
    let dressed_splitting = if order.len() > 1 {
        (dressed.eigenvalues[order[0]].re - dressed.eigenvalues[order[1]].re).abs()
    } else {
        0.0
    };
    let polarization = polarization_from_set(&dressed, emitter.hbar_omega0, spectrum_grid);
    let peaks = local_maxima(spectrum_grid, &polarization.values);
    let peak_separation = if peaks.len() > 1 {
        (peaks[0].0 - peaks[1].0).abs()
    } else {
        0.0
    };
    let radiated = radiated_spectrum(&h, spectrum_grid, geometry, material)?;
    let top = |v: &[f64]| local_maxima(spectrum_grid, v).first().map_or(f64::NAN, |p| p.0);
    Ok(StrongCoupling {
        c1_peak: top(&radiated.c1_sq),
        p_rad_peak: top(&radiated.p_rad),
        modes,
        dressed,
        dressed_splitting,
        peak_separation,
        polarization,
        radiated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakCoupling {
    pub fermi: f64,
    pub fermi_converged: bool,
    pub adiabatic: f64,
    /// `gamma_tot / gamma_0` from an exponential fit of `|C_e(t)|^2`.
    pub dynamics: f64,
    pub lifetime_ns: f64,
    pub report: WeakCouplingReport,
    pub modes: Vec<ModeParams>,
    /// Sample times (fs) and `|C_e|^2` of the fitted trace.
    pub times: Vec<f64>,
    pub excited_population: Vec<f64>,
}

impl WeakCoupling {
    /// Largest relative difference between any two routes.
    pub fn max_pairwise(&self) -> f64 {
        let v = [self.fermi, self.adiabatic, self.dynamics];
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in i + 1..3 {
                worst = worst.max((v[i] - v[j]).abs() / v[i].min(v[j]));
            }
        }
        worst
    }
}

pub fn weak_coupling(
    geometry: &Geometry,
    material: &MaterialModel,
    emitter: &EmitterSpec,
    n_modes: usize,
    fit_grid: &EnergyGrid,
    n_max: usize,
) -> Result<WeakCoupling> {
    let fermi = fermi_rate(emitter.hbar_omega0, geometry, material, emitter, n_max)?;
    let modes = extract_modes(n_modes, fit_grid, geometry, material, emitter)?;
    let report = adiabatic_rates(&modes, emitter);
    let h = build_standard(&modes, emitter)?;
    let set = eigendecompose(&h)?;
    // three adiabatic lifetimes, skipping the fs plasmon transient
    let tau_fs = HBAR_EV_FS / report.gamma_tot;
    let times = linspace(0.01 * tau_fs, 3.0 * tau_fs, 200);
    let traj = evolve_spectral(&set, &AmplitudeState::excited(modes.len()), &times);
    let pop: Vec<f64> = traj.iter().map(|s| s.c_e.norm_sqr()).collect();
    let rate = fit_exponential_decay(&times, &pop)?;
    Ok(WeakCoupling {
        fermi: fermi.ratio,
        fermi_converged: fermi.converged,
        adiabatic: report.ratio(),
        dynamics: rate / emitter.hbar_gamma0,
        lifetime_ns: HBAR_EV_S / rate * 1e9,
        report,
        modes,
        times,
        excited_population: pop,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FanoRegime {
    pub grid: Vec<f64>,
    /// Per-mode Fermi rate `gamma_1 / gamma_0` of the lossless sphere.
    pub lossless_data: Vec<f64>,
    /// Same for the absorbing sphere.
    pub lossy_data: Vec<f64>,
    pub lossless: ModeParams,
    pub lossy: ModeParams,
    pub q_f: f64,
    pub f_rad: f64,
    /// `4 g^2 / (gamma_0^rad Gamma)` of the lossy fit.
    pub f_p: f64,
    /// `|F_p - (Gamma^rad / Gamma) F_rad| / F_p` on the fitted numbers.
    pub identity_error: f64,
    /// Fano dip predicted from the fitted `alpha`, and the minimum of the data.
    pub predicted_dip: Option<f64>,
    pub data_minimum: f64,
}

impl FanoRegime {
    /// True when the dip of the data and the one predicted from the sign of
    /// `alpha` lie on the same side of the resonance.
    pub fn dip_orientation_agrees(&self) -> bool {
        match self.predicted_dip {
            Some(d) => {
                (d - self.lossless.hbar_omega_n).signum() == (self.data_minimum - self.lossless.hbar_omega_n).signum()
            }
            None => false,
        }
    }
}

/// Dipolar-mode rate spectrum `eta (6 pi / k_b) Im G_1^rr` over `grid`.
pub fn dipolar_rate_spectrum(
    grid: &[f64],
    geometry: &Geometry,
    material: &MaterialModel,
    eta: f64,
) -> Result<Vec<f64>> {
    grid.iter()
        .map(|&w| {
            let kb = geometry.n_b() * w / HBAR_C;
            Ok(eta * 6.0 * PI / kb * green_rr_term(1, w, geometry, material)?.im)
        })
        .collect()
}

/// Lossless fit on the non-absorbing sphere, then `Gamma^nr` alone on the
/// absorbing one with the other parameters frozen.
pub fn fano_regime(
    geometry: &Geometry,
    lossy_material: &MaterialModel,
    emitter: &EmitterSpec,
    grid: &[f64],
) -> Result<FanoRegime> {
    let lossless_material = lossy_material.lossless();
    let ctx = FanoContext::new(1, geometry, emitter);
    let lossless_data = dipolar_rate_spectrum(grid, geometry, &lossless_material, emitter.eta)?;
    let lossy_data = dipolar_rate_spectrum(grid, geometry, lossy_material, emitter.eta)?;
    let lossless = fit_fano_rate(grid, &lossless_data, &ctx, &FanoFit::Lossless)?;
    let lossy = fit_fano_rate(grid, &lossy_data, &ctx, &FanoFit::LossyFrozen(lossless.clone()))?;
    let alpha = lossless.alpha.ok_or(Error::IncompleteModes {
        n: 1,
        what: "a Fano ratio",
    })?;
    // emitter rates referred to the mode frequency
    let at_mode = EmitterSpec::from_dipole(lossless.hbar_omega_n, emitter.d_eg, 0.0, geometry.eps_b)?;
    let f0 = purcell_factors(std::slice::from_ref(&lossless), &at_mode)[0];
    let f1 = purcell_factors(std::slice::from_ref(&lossy), &at_mode)[0];
    let f_rad = f0.f_rad.unwrap_or(f64::NAN);
    let f_p = f1.f_p_rad.unwrap_or(f64::NAN);
    let ratio = lossy.hbar_gamma_rad.unwrap_or(f64::NAN) / lossy.hbar_gamma;
    let f_rad_lossy = f1.f_rad.unwrap_or(f64::NAN);
    let (imin, _) = lossless_data.iter().enumerate().fold(
        (0, f64::INFINITY),
        |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) },
    );
    Ok(FanoRegime {
        grid: grid.to_vec(),
        q_f: 2.0 / alpha,
        f_rad,
        f_p,
        identity_error: (f_p - ratio * f_rad_lossy).abs() / f_p,
        predicted_dip: crate::weak::fano_dip(lossless.hbar_omega_n, lossless.hbar_gamma, alpha),
        data_minimum: grid[imin],
        lossless_data,
        lossy_data,
        lossless,
        lossy,
    })
}
