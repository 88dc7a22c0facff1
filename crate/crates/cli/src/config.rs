//! Scenario files: a JSON document with `material`, `geometry`, `emitter`
//! and `run` blocks. See `docs/scenario.md` for the full schema.

use std::cmp::Ordering;
use std::path::{Path, PathBuf};

use plasmon_core::coupling::{linspace, EnergyGrid};
use plasmon_core::lindblad::DissipatorKind;
use plasmon_core::medium::{EmitterSpec, Geometry, MaterialModel};
use plasmon_core::mie::qs_resonance;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

const HC_EV_NM: f64 = 1239.841984;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub material: MaterialConfig,
    pub geometry: GeometryConfig,
    pub emitter: EmitterConfig,
    pub run: RunConfig,
}

/// Drude parameters default to silver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaterialConfig {
    Drude {
        #[serde(default = "silver_eps_inf")]
        eps_inf: f64,
        #[serde(default = "silver_omega_p")]
        hbar_omega_p: f64,
        #[serde(default = "silver_gamma_p")]
        hbar_gamma_p: f64,
    },
    /// Three-column table (eV, Re eps, Im eps), relative to the scenario file.
    Tabulated { path: PathBuf },
}

fn silver_eps_inf() -> f64 {
    6.0
}
fn silver_omega_p() -> f64 {
    7.90
}
fn silver_gamma_p() -> f64 {
    0.051
}
fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// Sphere radius (nm).
    #[serde(rename = "R")]
    pub radius: f64,
    /// Emitter distance to the surface (nm).
    pub h: f64,
    #[serde(default = "one")]
    pub eps_b: f64,
}

/// Emission energy from `hbar_omega0` (eV) or `wavelength_nm`; rates from
/// either `{tau0_ns, eta}` or `{d_eg, hbar_gamma0_nr}`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar_omega0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength_nm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau0_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_eg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar_gamma0_nr: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Spectra,
    Fit,
    Dressed,
    Dynamics,
    Rates,
    Fano,
    Lindblad,
    FigureSuite,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Spectra => "spectra",
            Task::Fit => "fit",
            Task::Dressed => "dressed",
            Task::Dynamics => "dynamics",
            Task::Rates => "rates",
            Task::Fano => "fano",
            Task::Lindblad => "lindblad",
            Task::FigureSuite => "figure-suite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Spectral propagation when the time span covers many plasmon periods.
    #[default]
    Auto,
    Rk,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGridConfig {
    #[serde(default)]
    pub start_fs: f64,
    pub stop_fs: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    /// Number of plasmon modes.
    #[serde(rename = "N", default = "default_modes")]
    pub n_modes: usize,
    /// Fit / spectra grid (eV).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_grid: Option<GridConfig>,
    /// Grid for polarization and far-field spectra (eV).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum_grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<TimeGridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Multipole truncation of the Fermi-rule route.
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_dissipator")]
    pub dissipator: DissipatorKind,
    #[serde(default)]
    pub solver: Solver,
}

fn default_modes() -> usize {
    25
}
fn default_n_max() -> usize {
    80
}
fn default_dissipator() -> DissipatorKind {
    DissipatorKind::Standard
}

/// Scenario with every block validated and converted to library types.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scenario: Scenario,
    pub material: MaterialModel,
    pub geometry: Geometry,
    pub emitter: EmitterSpec,
    pub fit_grid: EnergyGrid,
    pub spectrum_grid: Vec<f64>,
    pub times: Option<Vec<f64>>,
}

/// Parses a scenario; errors carry the JSON path of the offending field.
pub fn parse(text: &str) -> Result<Scenario, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "<root>".to_string() } else { path };
        CliError::config(path, e.into_inner().to_string())
    })
}

pub fn load(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    parse(&text)
}

fn positive(path: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(path, format!("must be a positive number, got {v}")))
    }
}

fn non_negative(path: &str, v: f64) -> Result<f64, CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(path, format!("must be non-negative, got {v}")))
    }
}

fn grid(path: &str, g: &GridConfig) -> Result<EnergyGrid, CliError> {
    positive(&format!("{path}.min"), g.min)?;
    if g.max.partial_cmp(&g.min) != Some(Ordering::Greater) || !g.max.is_finite() {
        return Err(CliError::config(
            format!("{path}.max"),
            format!("must exceed min = {}", g.min),
        ));
    }
    if g.points < 10 {
        return Err(CliError::config(format!("{path}.points"), "need at least 10 points"));
    }
    Ok(EnergyGrid {
        min: g.min,
        max: g.max,
        points: g.points,
    })
}

impl Scenario {
    pub fn resolve(&self, base_dir: &Path) -> Result<Resolved, CliError> {
        let g = &self.geometry;
        let radius = positive("geometry.R", g.radius)?;
        let h = positive("geometry.h", g.h)?;
        let eps_b = positive("geometry.eps_b", g.eps_b)?;
        let geometry = Geometry::new(radius, h, eps_b).map_err(|e| CliError::config("geometry", e.to_string()))?;

        let material = match &self.material {
            MaterialConfig::Drude {
                eps_inf,
                hbar_omega_p,
                hbar_gamma_p,
            } => {
                positive("material.eps_inf", *eps_inf)?;
                positive("material.hbar_omega_p", *hbar_omega_p)?;
                non_negative("material.hbar_gamma_p", *hbar_gamma_p)?;
                MaterialModel::drude(*eps_inf, *hbar_omega_p, *hbar_gamma_p)
                    .map_err(|e| CliError::config("material", e.to_string()))?
            }
            MaterialConfig::Tabulated { path } => {
                let full = if path.is_absolute() {
                    path.clone()
                } else {
                    base_dir.join(path)
                };
                MaterialModel::load_table(&full).map_err(|e| CliError::config("material.path", e.to_string()))?
            }
        };

        let emitter = self.resolve_emitter(eps_b)?;
        let run = &self.run;
        if run.n_modes == 0 || run.n_modes > 200 {
            return Err(CliError::config(
                "run.N",
                format!("must lie in 1..=200, got {}", run.n_modes),
            ));
        }
        if run.n_max == 0 || run.n_max > 400 {
            return Err(CliError::config(
                "run.n_max",
                format!("must lie in 1..=400, got {}", run.n_max),
            ));
        }
        let fano_modes =
            run.task == Task::Fano || (run.task == Task::Lindblad && run.dissipator != DissipatorKind::Standard);
        let default_fit = if fano_modes {
            // window around the quasi-static dipole resonance
            let w1 = qs_resonance(1, eps_b, &material).map_err(|e| CliError::config("material", e.to_string()))?;
            GridConfig {
                min: (w1 - 0.9).max(0.1),
                max: w1 + 0.9,
                points: 181,
            }
        } else {
            GridConfig {
                min: 1.0,
                max: 7.0,
                points: 400,
            }
        };
        let fit_grid = grid("run.omega_grid", run.omega_grid.as_ref().unwrap_or(&default_fit))?;
        let spectrum_grid = match &run.spectrum_grid {
            Some(s) => grid("run.spectrum_grid", s)?.values(),
            None => {
                let w0 = emitter.hbar_omega0;
                linspace((w0 - 0.4).max(0.05), w0 + 0.4, 1601)
            }
        };
        let times = match &run.t_grid {
            Some(t) => {
                non_negative("run.t_grid.start_fs", t.start_fs)?;
                if t.stop_fs.partial_cmp(&t.start_fs) != Some(Ordering::Greater) || !t.stop_fs.is_finite() {
                    return Err(CliError::config("run.t_grid.stop_fs", "must exceed start_fs"));
                }
                if t.points < 2 {
                    return Err(CliError::config("run.t_grid.points", "need at least 2 points"));
                }
                Some(linspace(t.start_fs, t.stop_fs, t.points))
            }
            None => None,
        };
        Ok(Resolved {
            scenario: self.clone(),
            material,
            geometry,
            emitter,
            fit_grid,
            spectrum_grid,
            times,
        })
    }

    fn resolve_emitter(&self, eps_b: f64) -> Result<EmitterSpec, CliError> {
        let e = &self.emitter;
        let w0 = match (e.hbar_omega0, e.wavelength_nm) {
            (Some(w), None) => positive("emitter.hbar_omega0", w)?,
            (None, Some(l)) => HC_EV_NM / positive("emitter.wavelength_nm", l)?,
            (Some(_), Some(_)) => {
                return Err(CliError::config(
                    "emitter",
                    "give either hbar_omega0 or wavelength_nm, not both",
                ))
            }
            (None, None) => return Err(CliError::config("emitter.hbar_omega0", "missing emission energy")),
        };
        let lifetime = e.tau0_ns.is_some() || e.eta.is_some();
        let dipole = e.d_eg.is_some() || e.hbar_gamma0_nr.is_some();
        let spec = match (lifetime, dipole) {
            (true, false) => {
                let tau = positive("emitter.tau0_ns", e.tau0_ns.unwrap_or(f64::NAN))?;
                let eta = e.eta.unwrap_or(1.0);
                if !(eta > 0.0 && eta <= 1.0) {
                    return Err(CliError::config(
                        "emitter.eta",
                        format!("must lie in (0, 1], got {eta}"),
                    ));
                }
                EmitterSpec::from_lifetime(w0, tau, eta, eps_b)
            }
            (false, true) => {
                let d = positive("emitter.d_eg", e.d_eg.unwrap_or(f64::NAN))?;
                let nr = non_negative("emitter.hbar_gamma0_nr", e.hbar_gamma0_nr.unwrap_or(0.0))?;
                EmitterSpec::from_dipole(w0, d, nr, eps_b)
            }
            (true, true) => {
                return Err(CliError::config(
                    "emitter",
                    "give either {tau0_ns, eta} or {d_eg, hbar_gamma0_nr}, not both",
                ))
            }
            (false, false) => return Err(CliError::config("emitter.d_eg", "missing dipole moment or lifetime")),
        };
        spec.map_err(|err| CliError::config("emitter", err.to_string()))
    }
}
