//! Scenario runner: reads a JSON scenario, runs one task of the emitter /
//! nanosphere pipeline and writes CSV + JSON outputs with a checksummed manifest.

pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod tasks;
pub mod verify;

use std::path::{Path, PathBuf};
use std::time::Instant;

use plasmon_core::coupling::EnergyGrid;
use plasmon_core::medium::{EmitterSpec, Geometry};
use serde::{Deserialize, Serialize};

use crate::config::Scenario;
use crate::error::CliError;
use crate::output::{sha256_hex, OutputFile, OutputSet};
use crate::verify::VerifyReport;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub verify: bool,
}

/// Parameters after defaults and unit conversions were applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedParameters {
    pub geometry: Geometry,
    pub emitter: EmitterSpec,
    pub fit_grid: EnergyGrid,
    pub spectrum_grid: [f64; 2],
    pub spectrum_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub task: String,
    pub config_file: String,
    pub config_sha256: String,
    pub scenario: Scenario,
    pub resolved: ResolvedParameters,
    pub assumptions: Vec<String>,
    pub threads: Option<usize>,
    pub wall_clock_s: f64,
    /// Seconds spent in named stages.
    pub timings: Vec<(String, f64)>,
    pub outputs: Vec<OutputFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerifyReport>,
}

fn output_dir(opts: &RunOptions, scenario: &Scenario, base: &Path) -> PathBuf {
    if let Some(dir) = &opts.out {
        return dir.clone();
    }
    match &scenario.run.output_dir {
        Some(d) if d.is_absolute() => d.clone(),
        Some(d) => base.join(d),
        None => PathBuf::from("out"),
    }
}

/// Runs one scenario. On error every file written so far is removed.
pub fn run(opts: &RunOptions) -> Result<RunManifest, CliError> {
    let start = Instant::now();
    let text =
        std::fs::read(&opts.config).map_err(|e| CliError::io(format!("reading {}", opts.config.display()), e))?;
    let scenario = config::load(&opts.config)?;
    let base = opts.config.parent().unwrap_or(Path::new(".")).to_path_buf();
    let resolved = scenario.resolve(&base)?;
    if opts.threads == Some(0) {
        return Err(CliError::config("--threads", "must be at least 1"));
    }
    let mut out = OutputSet::create(&output_dir(opts, &scenario, &base))?;

    let work = |out: &mut OutputSet| -> Result<(tasks::TaskReport, Option<VerifyReport>), CliError> {
        let report = tasks::run(scenario.run.task, &resolved, out)?;
        let verification = if opts.verify {
            let v = verify::run(&resolved, report.hamiltonian.as_ref())?;
            out.json("verify.json", &v)?;
            if !v.pass {
                return Err(CliError::Verification(format!(
                    "failed checks: {}",
                    v.failures().join(", ")
                )));
            }
            Some(v)
        } else {
            None
        };
        Ok((report, verification))
    };
    let (report, verification) = match opts.threads {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| CliError::io("starting worker threads", std::io::Error::other(e)))?;
            pool.install(|| work(&mut out))?
        }
        None => work(&mut out)?,
    };

    let grid = &resolved.spectrum_grid;
    let mut manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        core_version: plasmon_core::VERSION.to_string(),
        task: scenario.run.task.name().to_string(),
        config_file: opts.config.display().to_string(),
        config_sha256: sha256_hex(&text),
        scenario: scenario.clone(),
        resolved: ResolvedParameters {
            geometry: resolved.geometry,
            emitter: resolved.emitter,
            fit_grid: resolved.fit_grid,
            spectrum_grid: [grid[0], grid[grid.len() - 1]],
            spectrum_points: grid.len(),
        },
        assumptions: report.assumptions,
        threads: opts.threads,
        wall_clock_s: 0.0,
        timings: report.timings,
        outputs: out.files().to_vec(),
        verification,
    };
    manifest.wall_clock_s = start.elapsed().as_secs_f64();
    out.json(MANIFEST, &manifest)?;
    out.finish();
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub file: String,
    pub problem: String,
}

/// Recomputes the checksums listed in a run directory's manifest.
pub fn validate(dir: &Path) -> Result<Vec<Mismatch>, CliError> {
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| CliError::config(MANIFEST, e.to_string()))?;
    let mut bad = Vec::new();
    for f in &manifest.outputs {
        match std::fs::read(dir.join(&f.file)) {
            Ok(bytes) => {
                let sum = sha256_hex(&bytes);
                if sum != f.sha256 || bytes.len() as u64 != f.bytes {
                    bad.push(Mismatch {
                        file: f.file.clone(),
                        problem: format!("checksum {sum} differs from recorded {}", f.sha256),
                    });
                }
            }
            Err(e) => bad.push(Mismatch {
                file: f.file.clone(),
                problem: e.to_string(),
            }),
        }
    }
    Ok(bad)
}
