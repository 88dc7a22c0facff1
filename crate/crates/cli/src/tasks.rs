use plasmon_core::coupling::{extract_modes, fano_rate, kappa_spectrum, FanoContext, ModeParams};
use plasmon_core::heff::{
    build_standard, eigendecompose, evolve, polarization_sum_rule, AmplitudeState, DressedSet, EffectiveHamiltonian,
};
use plasmon_core::lindblad::{
    build_dissipators, build_liouvillian, build_state_space, effective_hamiltonian_from_lindblad, evolve_master,
    evolve_master_spectral, system_hamiltonian, DensityMatrix, DissipatorKind, EXCITED, GROUND,
};
use plasmon_core::medium::{free_space_rates, HBAR_EV_FS, HBAR_EV_S};
use plasmon_core::ode::OdeOptions;
use plasmon_core::scenarios::{fano_regime, strong_coupling, weak_coupling};
use plasmon_core::weak::{broadened_report, fit_exponential_decay, purcell_factors};
use serde::Serialize;
use serde_json::json;

use crate::config::{Resolved, Solver, Task};
use crate::error::{CliError, OpContext};
use crate::figures;
use crate::output::{OutputSet, Table};

/// What a task leaves behind besides its files.
#[derive(Debug, Default)]
pub struct TaskReport {
    pub assumptions: Vec<String>,
    /// Hamiltonian of the scenario, checked by `--verify` when present.
    pub hamiltonian: Option<EffectiveHamiltonian>,
    /// Wall-clock seconds of named stages.
    pub timings: Vec<(String, f64)>,
}

pub fn run(task: Task, r: &Resolved, out: &mut OutputSet) -> Result<TaskReport, CliError> {
    match task {
        Task::Spectra => spectra(r, out),
        Task::Fit => fit(r, out),
        Task::Dressed => dressed(r, out),
        Task::Dynamics => dynamics(r, out),
        Task::Rates => rates(r, out),
        Task::Fano => fano(r, out),
        Task::Lindblad => lindblad(r, out),
        Task::FigureSuite => figures::suite(r, out),
    }
}

pub fn scenario_comment(r: &Resolved) -> String {
    format!(
        "R = {} nm, h = {} nm, eps_b = {}, hbar_omega0 = {} eV, d_eg = {:.4} D, eta = {:.4}",
        r.geometry.radius,
        r.geometry.h(),
        r.geometry.eps_b,
        r.emitter.hbar_omega0,
        r.emitter.d_eg,
        r.emitter.eta
    )
}

fn modes(r: &Resolved) -> Result<Vec<ModeParams>, CliError> {
    extract_modes(
        r.scenario.run.n_modes,
        &r.fit_grid,
        &r.geometry,
        &r.material,
        &r.emitter,
    )
    .op("coupling::extract_modes")
}

fn mode_table(modes: &[ModeParams]) -> Table {
    Table::new()
        .comment("Lorentzian mode parameters; energies and rates in eV (hbar omega, hbar Gamma, hbar g)")
        .column("n", modes.iter().map(|m| m.n as f64).collect())
        .column("omega_n_eV", modes.iter().map(|m| m.hbar_omega_n).collect())
        .column("Gamma_n_eV", modes.iter().map(|m| m.hbar_gamma).collect())
        .column("g_n_eV", modes.iter().map(|m| m.hbar_g).collect())
        .column("quality", modes.iter().map(|m| m.quality()).collect())
        .column("detuning_eV", modes.iter().map(|m| m.detuning).collect())
        .column("fit_rms", modes.iter().map(|m| m.fit_residual).collect())
}

/// `5 hbar / gamma_min` over the dressed states, sampled at 401 points.
fn default_times(r: &Resolved, set: &DressedSet) -> Vec<f64> {
    if let Some(t) = &r.times {
        return t.clone();
    }
    let slowest = (0..set.len()).map(|m| set.width(m)).fold(f64::INFINITY, f64::min);
    let stop = 5.0 * HBAR_EV_FS / slowest.max(1e-15);
    plasmon_core::coupling::linspace(0.0, stop, 401)
}

fn spectra(r: &Resolved, out: &mut OutputSet) -> Result<TaskReport, CliError> {
    let grid = r.fit_grid.values();
    let mut table = Table::new()
        .comment("coupling constant spectra hbar^2 |kappa_n|^2 (eV) versus emission energy (eV)")
        .comment(scenario_comment(r))
        .column("energy_eV", grid.clone());
    for n in 1..=r.scenario.run.n_modes {
        let s = kappa_spectrum(n, &grid, &r.geometry, &r.material, &r.emitter).op("coupling::kappa_spectrum")?;
        table = table.column(format!("kappa_sq_{n}"), s.values);
    }
    out.csv("spectra.csv", &table)?;
    Ok(TaskReport::default())
}

fn fit(r: &Resolved, out: &mut OutputSet) -> Result<TaskReport, CliError> {
    let modes = modes(r)?;
    out.csv("modes.csv", &mode_table(&modes).comment(scenario_comment(r)))?;
    out.json(
        "modes.json",
        &json!({
            "geometry": r.geometry,
            "material": r.material,
            "emitter": r.emitter,
            "fit_grid": r.fit_grid,
            "modes": modes,
        }),
    )?;
    let h = build_standard(&modes, &r.emitter).op("heff::build_standard")?;
    Ok(TaskReport {
        hamiltonian: Some(h),
        ..TaskReport::default()
    })
}

/// Weight table of the dressed states sorted by energy: normalised squared
/// components of each right eigenvector.
pub fn dressed_table(set: &DressedSet, hbar_omega0: f64) -> Table {
    let mut order: Vec<usize> = (0..set.len()).collect();
    order.sort_by(|&a, &b| {
        set.eigenvalues[a]
            .re
            .partial_cmp(&set.eigenvalues[b].re)
            .unwrap()
            .then(a.cmp(&b))
    });
    let dim = set.len();
    let weights = |m: usize| -> Vec<f64> {
        let col: Vec<f64> = (0..dim).map(|k| set.right[(k, m)].norm_sqr()).collect();
        let total: f64 = col.iter().sum();
        col.iter().map(|w| w / total).collect()
    };
    let mut table = Table::new()
        .comment("dressed states sorted by energy; energy and width (FWHM) in eV")
        .comment(
            "m0_abs_sq is |<e,0|R_m>|^2 in the biorthogonal normalisation; weights are normalised |R_m|^2 components",
        )
        .column("state", (1..=dim).map(|m| m as f64).collect())
        .column("energy_eV", order.iter().map(|&m| set.energy(m, hbar_omega0)).collect())
        .column("width_eV", order.iter().map(|&m| set.width(m)).collect())
        .column("m0_abs_sq", order.iter().map(|&m| set.m0(m).norm_sqr()).collect())
        .column("weight_emitter", order.iter().map(|&m| weights(m)[0]).collect());
    for n in 1..dim {
        table = table.column(
            format!("weight_lsp_{n}"),
            order.iter().map(|&m| weights(m)[n]).collect(),
        );
    }
    table
}

fn dressed(r: &Resolved, out: &mut OutputSet) -> Result<TaskReport, CliError> {
    let s = strong_coupling(
        &r.geometry,
        &r.material,
        &r.emitter,
        r.scenario.run.n_modes,
        &r.fit_grid,
        &r.spectrum_grid,
    )
    .op("scenarios::strong_coupling")?;
    out.csv(
        "dressed.csv",
        &dressed_table(&s.dressed, r.emitter.hbar_omega0).comment(scenario_comment(r)),
    )?;
    out.csv(
        "polarization.csv",
        &Table::new()
            .comment("near-field polarization spectrum P(E) (eV^-2) for the emitter initially excited")
            .comment(scenario_comment(r))
            .column("energy_eV", s.polarization.grid.clone())
            .column("polarization", s.polarization.values.clone()),
    )?;
    out.csv(
        "radiated.csv",
        &Table::new()
            .comment("far-field spectrum P_rad (arb. units) and dipolar plasmon population |C_1(E)|^2 (eV^-2)")
            .comment(scenario_comment(r))
            .column("energy_eV", s.radiated.grid.clone())
            .column("p_rad", s.radiated.p_rad.clone())
            .column("c1_sq", s.radiated.c1_sq.clone()),
    )?;
    out.json(
        "dressed.json",
        &json!({
            "dressed_splitting_eV": s.dressed_splitting,
            "polarization_peak_separation_eV": s.peak_separation,
            "c1_peak_eV": s.c1_peak,
            "p_rad_peak_eV": s.p_rad_peak,
            "polarization_sum_rule": polarization_sum_rule(&s.dressed),
            "modes": s.modes,
        }),
    )?;
    let h = build_standard(&s.modes, &r.emitter).op("heff::build_standard")?;
    Ok(TaskReport {
        hamiltonian: Some(h),
        ..TaskReport::default()
    })
}

fn dynamics(r: &Resolved, out: &mut OutputSet) -> Result<TaskReport, CliError> {
    let modes = modes(r)?;
    let h = build_standard(&modes, &r.emitter).op("heff::build_standard")?;
    let set = eigendecompose(&h).op("heff::eigendecompose")?;
    let times = default_times(r, &set);
    let traj = evolve(&h, &AmplitudeState::excited(modes.len()), &times).op("heff::evolve")?;
    let pe: Vec<f64> = traj.iter().map(|s| s.c_e.norm_sqr()).collect();
    let mut table = Table::new()
        .comment("amplitude dynamics from |e,0>; time in fs, populations dimensionless")
        .comment(scenario_comment(r))
        .column("t_fs", times.clone())
        .column("p_excited", pe.clone())
        .column(
            "p_lsp_total",
            traj.iter().map(|s| s.c_n.iter().map(|c| c.norm_sqr()).sum()).collect(),
        );
    for n in 0..modes.len() {
        table = table.column(
            format!("p_lsp_{}", n + 1),
            traj.iter().map(|s| s.c_n[n].norm_sqr()).collect(),
        );
    }
    table = table.column("norm", traj.iter().map(|s| s.norm_sqr()).collect());
    out.csv("dynamics.csv", &table)?;
    // skip the plasmon transient before fitting an exponential
    let cut = times.len() / 100;
    let decay = fit_exponential_decay(&times[cut..], &pe[cut..]).ok();
    out.json(
        "dynamics.json",
        &json!({
            "decay_rate_eV": decay,
            "gamma_ratio": decay.map(|g| g / r.emitter.hbar_gamma0),
            "lifetime_ns": decay.map(|g| HBAR_EV_S / g * 1e9),
            "dressed_energies_eV": (0..set.len()).map(|m| set.energy(m, r.emitter.hbar_omega0)).collect::<Vec<_>>(),
            "dressed_widths_eV": (0..set.len()).map(|m| set.width(m)).collect::<Vec<_>>(),
        }),
    )?;
    Ok(TaskReport {
        hamiltonian: Some(h),
        ..TaskReport::default()
    })
}

fn rates(r: &Resolved, out: &mut OutputSet) -> Result<TaskReport, CliError> {
    let run = &r.scenario.run;
    let w = weak_coupling(
        &r.geometry,
        &r.material,
        &r.emitter,
        run.n_modes,
        &r.fit_grid,
        run.n_max,
    )
    .op("scenarios::weak_coupling")?;
    let broadened = broadened_report(&w.modes, &r.emitter);
    let g0 = r.emitter.hbar_gamma0;
    let lifetime = |ratio: f64| HBAR_EV_S / (ratio * g0) * 1e9;
    let methods = ["fermi", "adiabatic", "broadened", "dynamics"];
    let ratios = [w.fermi, w.adiabatic, broadened.ratio(), w.dynamics];
    out.csv(
        "rates.csv",
        &Table::new()
            .comment("normalised total decay rate gamma_tot / gamma_0 by route and the implied lifetime (ns)")
            .comment(scenario_comment(r))
            .text_column("method", methods.iter().map(|s| s.to_string()).collect())
            .column("gamma_ratio", ratios.to_vec())
            .column("lifetime_ns", ratios.iter().map(|&x| lifetime(x)).collect()),
    )?;
    let factors = purcell_factors(&w.modes, &r.emitter);
    out.csv(
        "purcell.csv",
        &mode_table(&w.modes)
            .comment("F_p = 4 g^2 / (gamma_0 Gamma_n); contribution = gamma_n / gamma_0 at the emitter energy")
            .column("purcell", factors.iter().map(|f| f.f_p).collect())
            .column("contribution", factors.iter().map(|f| f.contribution).collect()),
    )?;
    out.csv(
        "decay.csv",
        &Table::new()
            .comment("excited-state population used for the exponential fit; time in fs")
            .column("t_fs", w.times.clone())
            .column("p_excited", w.excited_population.clone()),
    )?;
    let free = free_space_rates(&r.emitter, &r.geometry);
    out.json(
        "rates.json",
        &json!({
            "gamma_ratio_fermi": w.fermi,
            "fermi_converged": w.fermi_converged,
            "gamma_ratio_adiabatic": w.adiabatic,
            "gamma_ratio_broadened": broadened.ratio(),
            "gamma_ratio_dynamics": w.dynamics,
            "max_pairwise_spread": w.max_pairwise(),
            "lifetime_ns": w.lifetime_ns,
            "lamb_shift_eV": w.report.lamb_shift,
            "free_space": free,
            "implied_d_eg_debye": r.emitter.d_eg,
            "modes": w.modes,
        }),
    )?;
    let h = build_standard(&w.modes, &r.emitter).op("heff::build_standard")?;
    Ok(TaskReport {
        hamiltonian: Some(h),
        ..TaskReport::default()
    })
}

fn fano(r: &Resolved, out: &mut OutputSet) -> Result<TaskReport, CliError> {
    let grid = r.fit_grid.values();
    let f = fano_regime(&r.geometry, &r.material, &r.emitter, &grid).op("scenarios::fano_regime")?;
    let ctx = FanoContext::new(1, &r.geometry, &r.emitter);
    let curve = |m: &ModeParams| -> Result<Vec<f64>, CliError> {
        let p = m.fano_params().op("coupling::fano_params")?;
        Ok(grid.iter().map(|&e| fano_rate(e, &p, &ctx)).collect())
    };
    out.csv(
        "fano.csv",
        &Table::new()
            .comment("dipolar-mode decay rate gamma_1 / gamma_0 versus emission energy (eV): data and Fano fits")
            .comment(scenario_comment(r))
            .column("energy_eV", grid.clone())
            .column("lossless_rate", f.lossless_data.clone())
            .column("lossless_fit", curve(&f.lossless)?)
            .column("lossy_rate", f.lossy_data.clone())
            .column("lossy_fit", curve(&f.lossy)?),
    )?;
    out.json("fano.json", &fano_summary(&f))?;
    Ok(TaskReport::default())
}

#[derive(Serialize)]
pub struct FanoSummary {
    pub q_f: f64,
    pub f_rad: f64,
    pub f_p: f64,
    /// eV
    pub hbar_gamma_nr: Option<f64>,
    pub identity_error: f64,
    /// eV
    pub predicted_dip: Option<f64>,
    /// eV
    pub data_minimum: f64,
    pub dip_orientation_agrees: bool,
    pub lossless: ModeParams,
    pub lossy: ModeParams,
}

pub fn fano_summary(f: &plasmon_core::scenarios::FanoRegime) -> FanoSummary {
    FanoSummary {
        q_f: f.q_f,
        f_rad: f.f_rad,
        f_p: f.f_p,
        hbar_gamma_nr: f.lossy.hbar_gamma_nr,
        identity_error: f.identity_error,
        predicted_dip: f.predicted_dip,
        data_minimum: f.data_minimum,
        dip_orientation_agrees: f.dip_orientation_agrees(),
        lossless: f.lossless.clone(),
        lossy: f.lossy.clone(),
    }
}

fn kind_name(kind: DissipatorKind) -> &'static str {
    match kind {
        DissipatorKind::Standard => "standard",
        DissipatorKind::FanoRadiative => "fano_radiative",
        DissipatorKind::FanoFull => "fano_full",
    }
}

fn lindblad(r: &Resolved, out: &mut OutputSet) -> Result<TaskReport, CliError> {
    let kind = r.scenario.run.dissipator;
    let mut assumptions = Vec::new();
    let modes = match kind {
        DissipatorKind::Standard => modes(r)?,
        _ => {
            let f =
                fano_regime(&r.geometry, &r.material, &r.emitter, &r.fit_grid.values()).op("scenarios::fano_regime")?;
            let ctx = FanoContext::new(1, &r.geometry, &r.emitter);
            assumptions.push(
                "Fano dissipators use the fitted dipolar mode only; its Fano ratio is evaluated at the emitter energy"
                    .into(),
            );
            vec![f.lossy.fano_at(&ctx, r.emitter.hbar_omega0).op("coupling::fano_at")?]
        }
    };
    let space = build_state_space(modes.len());
    let h_s = system_hamiltonian(&modes, &r.emitter, &space);
    let dis = build_dissipators(kind, &modes, &r.emitter, &space).op("lindblad::build_dissipators")?;
    let l = build_liouvillian(&h_s, &dis, &space).op("lindblad::build_liouvillian")?;
    let heff =
        effective_hamiltonian_from_lindblad(&h_s, &dis, &r.emitter, &modes).op("lindblad::effective_hamiltonian")?;
    let set = eigendecompose(&heff).op("heff::eigendecompose")?;
    let times = default_times(r, &set);

    // RK steps must resolve the fastest frequency over the whole span
    let fastest = modes
        .iter()
        .map(|m| (m.hbar_omega_n - r.emitter.hbar_omega0).abs() + m.hbar_gamma + m.hbar_g.abs())
        .fold(r.emitter.hbar_gamma0, f64::max);
    let span = times.last().copied().unwrap_or(0.0) - times[0];
    let spectral = match r.scenario.run.solver {
        Solver::Rk => false,
        Solver::Spectral => true,
        Solver::Auto => span * fastest / HBAR_EV_FS > 1e5,
    };
    let rho0 = DensityMatrix::basis(space.dim(), EXCITED);
    let start = std::time::Instant::now();
    let rhos = if spectral {
        evolve_master_spectral(&l, &rho0, &times).op("lindblad::evolve_master_spectral")?
    } else {
        evolve_master(&l, &rho0, &times, &OdeOptions::default()).op("lindblad::evolve_master")?
    };
    let t_lindblad = start.elapsed().as_secs_f64();
    let start = std::time::Instant::now();
    let amps = evolve(&heff, &AmplitudeState::excited(modes.len()), &times).op("heff::evolve")?;
    let t_heff = start.elapsed().as_secs_f64();

    let mut deviation = 0.0f64;
    for (rho, a) in rhos.iter().zip(&amps) {
        let v = a.to_vector();
        for i in 0..v.len() {
            deviation = deviation.max((rho.rho[(i + 1, i + 1)].re - v[i].norm_sqr()).abs());
        }
    }
    let mut table = Table::new()
        .comment(format!(
            "{} master equation from |e,0><e,0|; time in fs, populations per basis state",
            kind_name(kind)
        ))
        .comment(scenario_comment(r))
        .column("t_fs", times.clone())
        .column("p_ground", rhos.iter().map(|d| d.rho[(GROUND, GROUND)].re).collect())
        .column("p_excited", rhos.iter().map(|d| d.rho[(EXCITED, EXCITED)].re).collect());
    for n in 1..=modes.len() {
        let k = space.mode_index(n);
        table = table.column(format!("p_lsp_{n}"), rhos.iter().map(|d| d.rho[(k, k)].re).collect());
    }
    table = table
        .column("trace", rhos.iter().map(|d| d.trace()).collect())
        .column("p_excited_heff", amps.iter().map(|a| a.c_e.norm_sqr()).collect());
    out.csv("populations.csv", &table)?;
    out.json(
        "lindblad.json",
        &json!({
            "kind": kind,
            "solver": if spectral { "spectral" } else { "rk" },
            "liouvillian_dim": space.dim() * space.dim(),
            "heff_dim": heff.dim(),
            "max_population_deviation_vs_heff": deviation,
            "max_trace_error": rhos.iter().map(|d| (d.trace() - 1.0).abs()).fold(0.0, f64::max),
            "min_eigenvalue": rhos.iter().map(|d| d.min_eigenvalue()).fold(f64::INFINITY, f64::min),
            "channels": dis.channels.iter().map(|c| c.label.clone()).collect::<Vec<_>>(),
            "modes": modes,
        }),
    )?;
    Ok(TaskReport {
        assumptions,
        hamiltonian: Some(heff),
        timings: vec![
            ("lindblad_evolution_s".into(), t_lindblad),
            ("heff_evolution_s".into(), t_heff),
        ],
    })
}
