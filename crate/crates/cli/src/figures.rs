//! Reference figure data. Each figure uses fixed reference geometries and
//! emitters; only the material block of the scenario is taken over.

use plasmon_core::coupling::{
    extract_modes, fano_rate, kappa_spectrum, linspace, lorentzian_kappa, EnergyGrid, FanoContext, ModeParams,
};
use plasmon_core::medium::{EmitterSpec, Geometry, MaterialModel, HBAR_EV_FS};
use plasmon_core::scenarios::{fano_regime, strong_coupling, weak_coupling, FanoRegime};
use plasmon_core::weak::{adiabatic_rates, fermi_rate};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Resolved;
use crate::error::{CliError, OpContext};
use crate::output::{OutputSet, Table};
use crate::tasks::{dressed_table, fano_summary, TaskReport};

const HC_EV_NM: f64 = 1239.841984;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Tolerance {
    Relative(f64),
    Absolute(f64),
    AtLeast(f64),
    AtMost(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub figure: &'static str,
    pub value: f64,
    pub expected: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
}

impl Check {
    fn new(figure: &'static str, name: impl Into<String>, value: f64, expected: f64, tolerance: Tolerance) -> Self {
        let pass = match tolerance {
            Tolerance::Relative(t) => (value / expected - 1.0).abs() <= t,
            Tolerance::Absolute(t) => (value - expected).abs() <= t,
            Tolerance::AtLeast(t) => value >= t,
            Tolerance::AtMost(t) => value <= t,
        };
        Check {
            name: name.into(),
            figure,
            value,
            expected,
            tolerance,
            pass,
        }
    }

    fn flag(figure: &'static str, name: impl Into<String>, ok: bool) -> Self {
        Check::new(figure, name, if ok { 1.0 } else { 0.0 }, 1.0, Tolerance::Absolute(0.0))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub all_pass: bool,
    pub checks: Vec<Check>,
    pub assumptions: Vec<String>,
}

fn geometry(radius: f64, h: f64) -> Result<Geometry, CliError> {
    Geometry::new(radius, h, 1.0).op("medium::geometry")
}

fn strong_emitter() -> Result<EmitterSpec, CliError> {
    EmitterSpec::from_dipole(2.94, 25.0, 0.0, 1.0).op("medium::emitter")
}

fn weak_emitter() -> Result<EmitterSpec, CliError> {
    EmitterSpec::from_lifetime(HC_EV_NM / 670.0, 50.0, 0.9, 1.0).op("medium::emitter")
}

fn wide_grid() -> EnergyGrid {
    EnergyGrid {
        min: 1.0,
        max: 7.0,
        points: 400,
    }
}

fn distances() -> Vec<f64> {
    (1..=20).map(|h| h as f64).collect()
}

pub fn suite(r: &Resolved, out: &mut OutputSet) -> Result<TaskReport, CliError> {
    let mat = &r.material;
    let mut checks = Vec::new();
    let assumptions = vec![
        "fig2: R = 8 nm assumed, the radius of the strong- and weak-coupling figures".to_string(),
        "fig2, fig3, fig4, fig5: d_eg = 25 D, chosen so the dressed splitting at h = 2 nm is 144 meV".to_string(),
        "fig6: emitter from (lambda = 670 nm, tau0 = 50 ns, eta = 0.9) with the dipole implied by the radiative rate"
            .to_string(),
        "fig8, fig9: d_eg = 1 D, eta = 1; F factors use emitter rates evaluated at the fitted dipolar resonance"
            .to_string(),
        "all figures: vacuum background (eps_b = 1); the material block of the scenario is used throughout".to_string(),
    ];

    fig2(mat, out, &mut checks)?;
    fig3(mat, out)?;
    fig4_5(mat, out, &mut checks)?;
    fig6(mat, out, &mut checks)?;
    fig8(mat, out, &mut checks)?;
    fig9(mat, out, &mut checks)?;

    let summary = Summary {
        all_pass: checks.iter().all(|c| c.pass),
        checks,
        assumptions: assumptions.clone(),
    };
    out.json("summary.json", &summary)?;
    Ok(TaskReport {
        assumptions,
        ..TaskReport::default()
    })
}

fn lorentz_columns(table: Table, grid: &[f64], modes: &[ModeParams]) -> Table {
    let mut table = table;
    for m in modes {
        table = table.column(
            format!("lorentzian_fit_{}", m.n),
            grid.iter()
                .map(|&e| lorentzian_kappa(e, m.hbar_omega_n, m.hbar_gamma, m.hbar_g))
                .collect(),
        );
    }
    table
}

fn fig2(mat: &MaterialModel, out: &mut OutputSet, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let geo = geometry(8.0, 2.0)?;
    let em = strong_emitter()?;
    let modes = extract_modes(6, &wide_grid(), &geo, mat, &em).op("coupling::extract_modes")?;
    let grid = linspace(2.4, 3.6, 601);
    let mut table = Table::new()
        .comment("coupling constant spectra hbar^2 |kappa_n|^2 (eV) for n = 1..6 and their Lorentzian fits")
        .comment("R = 8 nm (assumed), h = 2 nm, eps_b = 1, d_eg = 25 D")
        .column("energy_eV", grid.clone());
    for n in 1..=6 {
        let s = kappa_spectrum(n, &grid, &geo, mat, &em).op("coupling::kappa_spectrum")?;
        table = table.column(format!("kappa_sq_{n}"), s.values);
    }
    out.csv("fig2.csv", &lorentz_columns(table, &grid, &modes))?;
    for m in &modes {
        checks.push(Check::new(
            "fig2",
            format!("Gamma_{}_meV", m.n),
            m.hbar_gamma * 1e3,
            51.0,
            Tolerance::Relative(0.10),
        ));
    }
    let increasing = modes.windows(2).all(|w| w[1].hbar_omega_n > w[0].hbar_omega_n);
    checks.push(Check::flag("fig2", "resonances_increase_with_n", increasing));
    Ok(())
}

fn fig3(mat: &MaterialModel, out: &mut OutputSet) -> Result<(), CliError> {
    let em = strong_emitter()?;
    let hs = distances();
    let rows: Vec<Vec<ModeParams>> = hs
        .par_iter()
        .map(|&h| extract_modes(4, &wide_grid(), &geometry(8.0, h)?, mat, &em).op("coupling::extract_modes"))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new()
        .comment("coupling strength 2 hbar g_n (eV) and losses hbar Gamma_n (eV) of modes n = 1..4 versus surface distance h (nm)")
        .comment("R = 8 nm, eps_b = 1, d_eg = 25 D")
        .column("h_nm", hs.clone());
    for n in 0..4 {
        table = table.column(
            format!("two_g_{}_eV", n + 1),
            rows.iter().map(|m| 2.0 * m[n].hbar_g).collect(),
        );
    }
    for n in 0..4 {
        table = table.column(
            format!("Gamma_{}_eV", n + 1),
            rows.iter().map(|m| m[n].hbar_gamma).collect(),
        );
    }
    out.csv("fig3.csv", &table)
}

fn fig4_5(mat: &MaterialModel, out: &mut OutputSet, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let geo = geometry(8.0, 2.0)?;
    let em = strong_emitter()?;
    let grid = linspace(2.5, 3.3, 1601);
    let s = strong_coupling(&geo, mat, &em, 25, &wide_grid(), &grid).op("scenarios::strong_coupling")?;
    out.csv(
        "fig4a.csv",
        &dressed_table(&s.dressed, em.hbar_omega0).comment("R = 8 nm, h = 2 nm, hbar_omega0 = 2.94 eV, N = 25"),
    )?;
    out.csv(
        "fig4b.csv",
        &Table::new()
            .comment("polarization spectrum P(E) (eV^-2); R = 8 nm, h = 2 nm, hbar_omega0 = 2.94 eV, N = 25")
            .column("energy_eV", grid.clone())
            .column("polarization", s.polarization.values.clone()),
    )?;
    out.csv(
        "fig5.csv",
        &Table::new()
            .comment(
                "far-field spectrum P_rad (arb. units) and LSP_1 population |C_1(E)|^2 (eV^-2); same system as fig4",
            )
            .column("energy_eV", grid.clone())
            .column("p_rad", s.radiated.p_rad.clone())
            .column("c1_sq", s.radiated.c1_sq.clone()),
    )?;
    checks.push(Check::new(
        "fig4",
        "dressed_splitting_meV",
        s.dressed_splitting * 1e3,
        144.0,
        Tolerance::Relative(0.10),
    ));
    checks.push(Check::new(
        "fig4",
        "peak_separation_meV",
        s.peak_separation * 1e3,
        144.0,
        Tolerance::Relative(0.10),
    ));
    checks.push(Check::new(
        "fig5",
        "c1_peak_eV",
        s.c1_peak,
        2.79,
        Tolerance::Absolute(0.030),
    ));
    checks.push(Check::new(
        "fig5",
        "p_rad_vs_c1_peak_offset_meV",
        (s.p_rad_peak - s.c1_peak).abs() * 1e3,
        0.0,
        Tolerance::Absolute(5.0),
    ));
    Ok(())
}

fn fig6(mat: &MaterialModel, out: &mut OutputSet, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let em = weak_emitter()?;
    let w = weak_coupling(&geometry(8.0, 5.0)?, mat, &em, 25, &wide_grid(), 80).op("scenarios::weak_coupling")?;
    let rate = w.dynamics * em.hbar_gamma0;
    out.csv(
        "fig6a.csv",
        &Table::new()
            .comment("excited-state population |C_e(t)|^2 and its exponential fit; time in fs")
            .comment("R = 8 nm, h = 5 nm, lambda = 670 nm, tau0 = 50 ns, eta = 0.9, N = 25")
            .column("t_fs", w.times.clone())
            .column("p_excited", w.excited_population.clone())
            .column(
                "exponential_fit",
                w.times.iter().map(|t| (-rate * t / HBAR_EV_FS).exp()).collect(),
            ),
    )?;
    let hs = distances();
    let rows: Vec<(f64, f64)> = hs
        .par_iter()
        .map(|&h| {
            let geo = geometry(8.0, h)?;
            let modes = extract_modes(25, &wide_grid(), &geo, mat, &em).op("coupling::extract_modes")?;
            let fermi = fermi_rate(em.hbar_omega0, &geo, mat, &em, 80).op("weak::fermi_rate")?;
            Ok((adiabatic_rates(&modes, &em).ratio(), fermi.ratio))
        })
        .collect::<Result<_, CliError>>()?;
    out.csv(
        "fig6b.csv",
        &Table::new()
            .comment("normalised decay rate gamma_tot / gamma_0 versus surface distance h (nm): adiabatic elimination and Fermi rule")
            .comment("R = 8 nm, lambda = 670 nm, tau0 = 50 ns, eta = 0.9, N = 25, n_max = 80")
            .column("h_nm", hs)
            .column("gamma_ratio_adiabatic", rows.iter().map(|r| r.0).collect())
            .column("gamma_ratio_fermi", rows.iter().map(|r| r.1).collect()),
    )?;
    for (name, v) in [
        ("gamma_ratio_fermi", w.fermi),
        ("gamma_ratio_adiabatic", w.adiabatic),
        ("gamma_ratio_dynamics", w.dynamics),
    ] {
        checks.push(Check::new("fig6", name, v, 30.0, Tolerance::Relative(0.15)));
    }
    checks.push(Check::new(
        "fig6",
        "route_spread",
        w.max_pairwise(),
        0.0,
        Tolerance::AtMost(0.05),
    ));
    checks.push(Check::new(
        "fig6",
        "lifetime_ns",
        w.lifetime_ns,
        1.7,
        Tolerance::Relative(0.15),
    ));
    Ok(())
}

fn fig8(mat: &MaterialModel, out: &mut OutputSet, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let geo = geometry(50.0, 5.0)?;
    let em = EmitterSpec::from_dipole(2.6, 1.0, 0.0, 1.0).op("medium::emitter")?;
    let grid = linspace(1.8, 4.0, 441);
    let mut table = Table::new()
        .comment("coupling constant spectra hbar^2 |kappa_n|^2 (eV) for n = 1..4 and the best Lorentzian for n = 1")
        .comment("R = 50 nm, h = 5 nm, eps_b = 1, d_eg = 1 D")
        .column("energy_eV", grid.clone());
    for n in 1..=4 {
        let s = kappa_spectrum(n, &grid, &geo, mat, &em).op("coupling::kappa_spectrum")?;
        table = table.column(format!("kappa_sq_{n}"), s.values);
    }
    // fitted on the usual +-5 linewidth window, plotted on the figure grid
    let lorentz = extract_modes(1, &wide_grid(), &geo, mat, &em).op("coupling::extract_modes")?;
    let table = lorentz_columns(table, &grid, &lorentz);
    out.csv("fig8.csv", &table)?;
    checks.push(Check::new(
        "fig8",
        "n1_lorentzian_rms",
        lorentz[0].fit_residual,
        0.05,
        Tolerance::AtLeast(0.05),
    ));
    Ok(())
}

fn fig9(mat: &MaterialModel, out: &mut OutputSet, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let em = EmitterSpec::from_dipole(2.6, 1.0, 0.0, 1.0).op("medium::emitter")?;
    let grid = linspace(1.8, 3.6, 181);
    let run = |h: f64| -> Result<FanoRegime, CliError> {
        fano_regime(&geometry(50.0, h)?, mat, &em, &grid).op("scenarios::fano_regime")
    };
    let far = run(30.0)?;
    let near = run(15.0)?;
    let mut table = Table::new()
        .comment("decay rate into the dipolar mode gamma_1 / gamma_0 versus emission energy (eV), with Fano fits")
        .comment(
            "R = 50 nm, d_eg = 1 D, eta = 1; lossless columns use Gamma_p = 0, lossy columns the scenario material",
        )
        .column("energy_eV", grid.clone());
    for (tag, f) in [("h30", &far), ("h15", &near)] {
        let geo = geometry(50.0, if tag == "h30" { 30.0 } else { 15.0 })?;
        let ctx = FanoContext::new(1, &geo, &em);
        let curve = |m: &ModeParams| -> Result<Vec<f64>, CliError> {
            let p = m.fano_params().op("coupling::fano_params")?;
            Ok(grid.iter().map(|&e| fano_rate(e, &p, &ctx)).collect())
        };
        table = table
            .column(format!("lossless_rate_{tag}"), f.lossless_data.clone())
            .column(format!("lossless_fit_{tag}"), curve(&f.lossless)?)
            .column(format!("lossy_rate_{tag}"), f.lossy_data.clone())
            .column(format!("lossy_fit_{tag}"), curve(&f.lossy)?);
    }
    out.csv("fig9.csv", &table)?;
    out.json(
        "fig9.json",
        &serde_json::json!({ "h30": fano_summary(&far), "h15": fano_summary(&near) }),
    )?;
    let gnr = far.lossy.hbar_gamma_nr.unwrap_or(f64::NAN) * 1e3;
    checks.push(Check::new("fig9", "q_F_h30", far.q_f, -4.2, Tolerance::Relative(0.15)));
    checks.push(Check::new(
        "fig9",
        "F_rad_h30",
        far.f_rad,
        14.2,
        Tolerance::Relative(0.15),
    ));
    checks.push(Check::new(
        "fig9",
        "F_rad_h15",
        near.f_rad,
        40.7,
        Tolerance::Relative(0.15),
    ));
    checks.push(Check::new(
        "fig9",
        "Gamma_nr_h30_meV",
        gnr,
        40.0,
        Tolerance::Relative(0.25),
    ));
    checks.push(Check::new("fig9", "F_p_h30", far.f_p, 12.2, Tolerance::Relative(0.15)));
    checks.push(Check::new("fig9", "F_p_h15", near.f_p, 35.1, Tolerance::Relative(0.15)));
    checks.push(Check::new(
        "fig9",
        "F_p_identity_error",
        far.identity_error.max(near.identity_error),
        0.0,
        Tolerance::AtMost(1e-10),
    ));
    checks.push(Check::flag(
        "fig9",
        "dip_orientation_matches_alpha_sign",
        far.dip_orientation_agrees(),
    ));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_kinds() {
        assert!(Check::new("x", "a", 1.05, 1.0, Tolerance::Relative(0.1)).pass);
        assert!(!Check::new("x", "a", -3.0, -4.2, Tolerance::Relative(0.15)).pass);
        assert!(Check::new("x", "a", 2.80, 2.79, Tolerance::Absolute(0.03)).pass);
        assert!(!Check::new("x", "a", 0.01, 0.05, Tolerance::AtLeast(0.05)).pass);
        assert!(Check::new("x", "a", 1e-12, 0.0, Tolerance::AtMost(1e-10)).pass);
        assert!(!Check::flag("x", "b", false).pass);
    }
}
