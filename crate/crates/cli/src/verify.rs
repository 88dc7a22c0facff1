//! Self-checks run with `--verify`: closed-form limits, internal identities and
//! agreement between independent routes, on fixed deterministic inputs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use plasmon_core::coupling::{
    fano_rate, fit_fano_rate, fit_lorentzian, linspace, lorentzian_kappa, CouplingSpectrum, FanoContext, FanoFit,
    FanoParams, ModeParams,
};
use plasmon_core::heff::{
    build_fano, build_standard, eigendecompose, evolve, secular_newton_step, AmplitudeState, EffectiveHamiltonian,
    FanoVariant,
};
use plasmon_core::lindblad::{
    build_dissipators, build_liouvillian, build_state_space, effective_hamiltonian_from_lindblad, evolve_master,
    system_hamiltonian, DensityMatrix, DissipatorKind,
};
use plasmon_core::medium::{EmitterSpec, Geometry, MaterialModel, HBAR_EV_FS};
use plasmon_core::mie::{qs_mode_params, radial_fractions};
use plasmon_core::ode::OdeOptions;
use serde::{Deserialize, Serialize};

use crate::config::Resolved;
use crate::error::{CliError, OpContext};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyCheck {
    pub name: String,
    pub value: f64,
    /// Largest acceptable value.
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub checks: Vec<VerifyCheck>,
}

impl VerifyReport {
    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{} = {:.3e} (limit {:.0e})", c.name, c.value, c.threshold))
            .collect()
    }
}

fn check(name: &str, value: f64, threshold: f64) -> VerifyCheck {
    VerifyCheck {
        name: name.to_string(),
        value,
        threshold,
        pass: value <= threshold,
    }
}

fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

pub fn run(r: &Resolved, scenario_h: Option<&EffectiveHamiltonian>) -> Result<VerifyReport, CliError> {
    let mut checks = vec![
        check("quasistatic_drude_limit", quasistatic_limit(&r.material)?, 1e-6),
        check("radial_fraction_sum", radial_sum()?, 1e-6),
    ];
    let (route, trace, positivity) = lindblad_routes()?;
    checks.push(check("lindblad_vs_effective_hamiltonian", route, 1e-6));
    checks.push(check("lindblad_trace", trace, 1e-9));
    checks.push(check("lindblad_negative_eigenvalue", positivity, 1e-9));
    let (lorentz, fano) = fit_round_trips()?;
    checks.push(check("lorentzian_fit_round_trip", lorentz, 1e-6));
    checks.push(check("fano_fit_round_trip", fano, 1e-6));
    if let Some(h) = scenario_h {
        let (biorth, arrow) = spectral_checks(h)?;
        checks.push(check("scenario_biorthonormality", biorth, 1e-10));
        checks.push(check("scenario_secular_newton_step", arrow, 1e-12));
    }
    Ok(VerifyReport {
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

/// Lossless Drude metal with eps_inf = 1 in vacuum: poles at wp sqrt(n / (2n + 1)).
fn quasistatic_limit(material: &MaterialModel) -> Result<f64, CliError> {
    let wp = material.plasma_energy().unwrap_or(7.90);
    let metal = MaterialModel::drude(1.0, wp, 0.0).op("medium::drude")?;
    let geo = Geometry::new(8.0, 2.0, 1.0).op("medium::geometry")?;
    let em = EmitterSpec::from_dipole(2.9, 1.0, 0.0, 1.0).op("medium::emitter")?;
    let mut worst = 0.0f64;
    for n in 1..=6 {
        let m = qs_mode_params(n, &geo, &metal, &em).op("mie::qs_mode_params")?;
        let nf = n as f64;
        worst = worst.max(rel(m.hbar_omega_n, wp * (nf / (2.0 * nf + 1.0)).sqrt()));
    }
    Ok(worst)
}

fn radial_sum() -> Result<f64, CliError> {
    let mut worst = 0.0f64;
    for x in [0.1, 0.5, 2.0] {
        let f = radial_fractions(x, 60).op("mie::radial_fractions")?;
        worst = worst.max((f.iter().sum::<f64>() - 1.0).abs());
    }
    Ok(worst)
}

/// (omega_n, Gamma_rad, Gamma_nr, g, signed gamma_0n^rad)
type ModeRow = (f64, f64, f64, f64, f64);

/// Two fixed multimode systems with Fano data, consistent with the emitter budget.
fn reference_systems() -> Result<Vec<(EmitterSpec, Vec<ModeParams>)>, CliError> {
    let table: [(f64, f64, &[ModeRow]); 2] = [
        (
            0.6,
            8e-3,
            &[(2.80, 0.06, 0.03, 0.02, 0.9e-3), (2.95, 0.04, 0.05, -0.03, 0.6e-3)],
        ),
        (
            0.9,
            4e-3,
            &[
                (2.75, 0.10, 0.02, 0.015, 1.0e-3),
                (2.90, 0.03, 0.06, 0.035, -0.5e-3),
                (3.05, 0.05, 0.04, -0.01, 0.8e-3),
            ],
        ),
    ];
    let mut out = Vec::new();
    for (eta, gamma0, modes) in table {
        let em = EmitterSpec::from_dipole(2.9, 1.0, 0.0, 1.0).op("medium::emitter")?;
        let em = EmitterSpec {
            eta,
            hbar_gamma0: gamma0,
            ..em
        };
        let list = modes
            .iter()
            .enumerate()
            .map(|(k, &(w, gr, gnr, g, signed_rate))| {
                let g0n = signed_rate.abs();
                let mut m = ModeParams::lorentzian(k + 1, w, gr + gnr, g);
                m.hbar_gamma_rad = Some(gr);
                m.hbar_gamma_nr = Some(gnr);
                m.hbar_gamma0n_rad = Some(g0n);
                m.alpha = Some(signed_rate.signum() * (g0n * gr).sqrt() / g.abs());
                m.against(&em)
            })
            .collect();
        out.push((em, list));
    }
    Ok(out)
}

/// Worst element-wise mismatch between the Lindblad density matrix and the
/// pure state of the effective Hamiltonian, worst trace error, most negative eigenvalue.
fn lindblad_routes() -> Result<(f64, f64, f64), CliError> {
    let (mut route, mut trace, mut min_eig) = (0.0f64, 0.0f64, 0.0f64);
    let opts = OdeOptions {
        rtol: 1e-10,
        atol: 1e-13,
        ..OdeOptions::default()
    };
    for (em, modes) in reference_systems()? {
        let dim = modes.len() + 1;
        let psi: Vec<Complex64> = (0..dim)
            .map(|k| Complex64::from_polar(1.0, 0.7 * k as f64) / (dim as f64).sqrt())
            .collect();
        let kinds = [
            (
                DissipatorKind::Standard,
                build_standard(&modes, &em).op("heff::build_standard")?,
            ),
            (
                DissipatorKind::FanoRadiative,
                build_fano(&modes, &em, FanoVariant::RadiativeOnly).op("heff::build_fano")?,
            ),
            (
                DissipatorKind::FanoFull,
                build_fano(&modes, &em, FanoVariant::General).op("heff::build_fano")?,
            ),
        ];
        for (kind, h) in kinds {
            let space = build_state_space(modes.len());
            let h_s = system_hamiltonian(&modes, &em, &space);
            let dis = build_dissipators(kind, &modes, &em, &space).op("lindblad::build_dissipators")?;
            let l = build_liouvillian(&h_s, &dis, &space).op("lindblad::build_liouvillian")?;
            let from_l =
                effective_hamiltonian_from_lindblad(&h_s, &dis, &em, &modes).op("lindblad::effective_hamiltonian")?;
            route = route.max(max_diff(&from_l.matrix, &h.matrix));
            let times = linspace(0.0, 10.0 * HBAR_EV_FS / em.hbar_gamma0, 21);
            let mut full = vec![Complex64::new(0.0, 0.0)];
            full.extend_from_slice(&psi);
            let rhos =
                evolve_master(&l, &DensityMatrix::pure(0.0, &full), &times, &opts).op("lindblad::evolve_master")?;
            let amps = evolve(&h, &AmplitudeState::from_vector(0.0, &psi), &times).op("heff::evolve")?;
            for (rho, a) in rhos.iter().zip(&amps) {
                let v = a.to_vector();
                for i in 0..dim {
                    for j in 0..dim {
                        route = route.max((rho.rho[(i + 1, j + 1)] - v[i] * v[j].conj()).norm());
                    }
                }
                trace = trace.max((rho.trace() - 1.0).abs());
                min_eig = min_eig.min(rho.min_eigenvalue());
            }
        }
    }
    Ok((route, trace, -min_eig))
}

fn fit_round_trips() -> Result<(f64, f64), CliError> {
    let mut lorentz = 0.0f64;
    for (w, gam, g) in [(2.8, 0.05, 0.03), (3.3, 0.2, 0.004), (1.9, 0.025, 0.08)] {
        let grid = linspace(w - 5.0 * gam, w + 5.0 * gam, 201);
        let values = grid.iter().map(|&e| lorentzian_kappa(e, w, gam, g)).collect();
        let m = fit_lorentzian(&CouplingSpectrum { n: 1, grid, values }).op("coupling::fit_lorentzian")?;
        lorentz = lorentz
            .max(rel(m.hbar_omega_n, w))
            .max(rel(m.hbar_gamma, gam))
            .max(rel(m.hbar_g, g));
    }
    let mut fano = 0.0f64;
    let em = EmitterSpec::from_dipole(2.6, 1.0, 0.0, 1.0).op("medium::emitter")?;
    for (radius, h, w, gr, alpha) in [(50.0, 30.0, 2.9, 0.15, -0.4), (30.0, 10.0, 2.5, 0.08, 0.7)] {
        let geo = Geometry::new(radius, h, 1.0).op("medium::geometry")?;
        let ctx = FanoContext::new(1, &geo, &em);
        let g = (ctx.gamma0n_rad(w) * gr).sqrt() / f64::abs(alpha);
        let truth = FanoParams {
            hbar_omega_n: w,
            hbar_gamma_rad: gr,
            hbar_gamma_nr: 0.0,
            hbar_g: g,
            sign: f64::signum(alpha),
        };
        let grid = linspace(w - 6.0 * gr, w + 6.0 * gr, 241);
        let values: Vec<f64> = grid.iter().map(|&e| fano_rate(e, &truth, &ctx)).collect();
        let m = fit_fano_rate(&grid, &values, &ctx, &FanoFit::Lossless).op("coupling::fit_fano_rate")?;
        fano = fano
            .max(rel(m.hbar_omega_n, w))
            .max(rel(m.hbar_gamma_rad.unwrap_or(f64::NAN), gr))
            .max(rel(m.hbar_g, g))
            .max(rel(m.alpha.unwrap_or(f64::NAN), alpha));
    }
    Ok((lorentz, fano))
}

fn spectral_checks(h: &EffectiveHamiltonian) -> Result<(f64, f64), CliError> {
    let set = eigendecompose(h).op("heff::eigendecompose")?;
    let id = DMatrix::<Complex64>::identity(h.dim(), h.dim());
    let biorth = max_diff(&set.overlap_matrix(), &id);
    // eigenvalue error relative to the matrix scale
    let scale = h.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let arrow = set
        .eigenvalues
        .iter()
        .map(|&lam| secular_newton_step(&h.matrix, lam) / scale)
        .fold(0.0, f64::max);
    Ok((biorth, arrow))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_systems_are_valid() {
        for (em, modes) in reference_systems().unwrap() {
            let budget: f64 = modes.iter().map(|m| m.hbar_gamma0n_rad.unwrap()).sum();
            assert!(budget < em.eta * em.hbar_gamma0);
            build_fano(&modes, &em, FanoVariant::General).unwrap();
        }
    }

    #[test]
    fn routes_agree_on_reference_systems() {
        let (route, trace, neg) = lindblad_routes().unwrap();
        assert!(route < 1e-6, "{route}");
        assert!(trace < 1e-9 && neg < 1e-9);
    }
}
