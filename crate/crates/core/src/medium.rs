//! Materials, geometry and emitter description.
//!
//! Internal units: energies and rates as `hbar * omega` in eV, lengths in nm,
//! dipole moments in Debye. Times at the interfaces are in fs.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `hbar c` in eV nm.
pub const HBAR_C: f64 = 197.3269804;
/// One Debye in e nm.
pub const DEBYE: f64 = 0.0208194;
/// `e^2 / (4 pi eps_0)` in eV nm.
pub const COULOMB: f64 = 1.4399645;
/// `hbar` in eV s.
pub const HBAR_EV_S: f64 = 6.582119569e-16;
/// `hbar` in eV fs.
pub const HBAR_EV_FS: f64 = 0.6582119569;

/// Converts an `hbar * gamma` rate in eV to 1/s.
pub fn ev_to_per_second(rate: f64) -> f64 {
    rate / HBAR_EV_S
}

/// Converts a rate in 1/s to `hbar * gamma` in eV.
pub fn per_second_to_ev(rate: f64) -> f64 {
    rate * HBAR_EV_S
}

/// One row of a tabulated permittivity: photon energy (eV), Re eps, Im eps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub energy: f64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaterialModel {
    Drude {
        eps_inf: f64,
        hbar_omega_p: f64,
        hbar_gamma_p: f64,
    },
    Tabulated {
        rows: Vec<TableRow>,
    },
}

impl MaterialModel {
    pub fn drude(eps_inf: f64, hbar_omega_p: f64, hbar_gamma_p: f64) -> Result<Self> {
        if !(hbar_omega_p > 0.0) || !hbar_omega_p.is_finite() {
            return Err(Error::InvalidParameter {
                field: "hbar_omega_p",
                reason: format!("must be positive, got {hbar_omega_p}"),
            });
        }
        if !(hbar_gamma_p >= 0.0) || !hbar_gamma_p.is_finite() {
            return Err(Error::InvalidParameter {
                field: "hbar_gamma_p",
                reason: format!("must be non-negative, got {hbar_gamma_p}"),
            });
        }
        if !eps_inf.is_finite() {
            return Err(Error::InvalidParameter {
                field: "eps_inf",
                reason: "must be finite".into(),
            });
        }
        Ok(MaterialModel::Drude {
            eps_inf,
            hbar_omega_p,
            hbar_gamma_p,
        })
    }

    /// Silver Drude parameters: eps_inf = 6, 7.90 eV plasma energy, 51 meV damping.
    pub fn silver() -> Self {
        MaterialModel::Drude {
            eps_inf: 6.0,
            hbar_omega_p: 7.90,
            hbar_gamma_p: 0.051,
        }
    }

    /// Same metal with the damping switched off.
    pub fn lossless(&self) -> Self {
        match self {
            MaterialModel::Drude {
                eps_inf, hbar_omega_p, ..
            } => MaterialModel::Drude {
                eps_inf: *eps_inf,
                hbar_omega_p: *hbar_omega_p,
                hbar_gamma_p: 0.0,
            },
            MaterialModel::Tabulated { rows } => MaterialModel::Tabulated {
                rows: rows.iter().map(|r| TableRow { im: 0.0, ..*r }).collect(),
            },
        }
    }

    pub fn tabulated(rows: Vec<TableRow>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InvalidParameter {
                field: "table",
                reason: format!("need at least 2 rows, got {}", rows.len()),
            });
        }
        for w in rows.windows(2) {
            if !(w[1].energy > w[0].energy) {
                return Err(Error::InvalidParameter {
                    field: "table",
                    reason: format!(
                        "energies must be strictly increasing ({} then {})",
                        w[0].energy, w[1].energy
                    ),
                });
            }
        }
        if let Some(r) = rows
            .iter()
            .find(|r| r.im < 0.0 || !r.re.is_finite() || !r.im.is_finite())
        {
            return Err(Error::InvalidParameter {
                field: "table",
                reason: format!("row at {} eV has invalid permittivity", r.energy),
            });
        }
        if rows[0].energy <= 0.0 {
            return Err(Error::InvalidParameter {
                field: "table",
                reason: "energies must be positive".into(),
            });
        }
        Ok(MaterialModel::Tabulated { rows })
    }

    /// Parses three whitespace or comma separated columns; `#` starts a comment.
    pub fn parse_table(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 3 {
                return Err(Error::Parse {
                    line: i + 1,
                    reason: format!("expected 3 columns, found {}", cols.len()),
                });
            }
            let mut v = [0.0; 3];
            for (slot, s) in v.iter_mut().zip(&cols) {
                *slot = s.parse().map_err(|_| Error::Parse {
                    line: i + 1,
                    reason: format!("not a number: {s}"),
                })?;
            }
            rows.push(TableRow {
                energy: v[0],
                re: v[1],
                im: v[2],
            });
        }
        Self::tabulated(rows)
    }

    pub fn load_table(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        Self::parse_table(&text)
    }

    /// Complex permittivity at photon energy `hbar_omega` (eV).
    pub fn permittivity(&self, hbar_omega: f64) -> Result<Complex64> {
        if !(hbar_omega > 0.0) || !hbar_omega.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "photon energy must be positive, got {hbar_omega}"
            )));
        }
        match self {
            MaterialModel::Drude {
                eps_inf,
                hbar_omega_p,
                hbar_gamma_p,
            } => {
                let w = hbar_omega;
                let denom = Complex64::new(w * w, hbar_gamma_p * w);
                Ok(Complex64::new(*eps_inf, 0.0) - hbar_omega_p * hbar_omega_p / denom)
            }
            MaterialModel::Tabulated { rows } => {
                let (lo, hi) = (rows[0].energy, rows[rows.len() - 1].energy);
                if hbar_omega < lo || hbar_omega > hi {
                    return Err(Error::OutOfRange {
                        energy: hbar_omega,
                        min: lo,
                        max: hi,
                    });
                }
                let k = rows
                    .partition_point(|r| r.energy <= hbar_omega)
                    .clamp(1, rows.len() - 1);
                let (a, b) = (rows[k - 1], rows[k]);
                let t = (hbar_omega - a.energy) / (b.energy - a.energy);
                Ok(Complex64::new(a.re + t * (b.re - a.re), a.im + t * (b.im - a.im)))
            }
        }
    }

    /// Drude plasma energy, if this is a Drude model.
    pub fn plasma_energy(&self) -> Option<f64> {
        match self {
            MaterialModel::Drude { hbar_omega_p, .. } => Some(*hbar_omega_p),
            MaterialModel::Tabulated { .. } => None,
        }
    }

    pub fn eps_inf(&self) -> Option<f64> {
        match self {
            MaterialModel::Drude { eps_inf, .. } => Some(*eps_inf),
            MaterialModel::Tabulated { .. } => None,
        }
    }

    pub fn damping(&self) -> Option<f64> {
        match self {
            MaterialModel::Drude { hbar_gamma_p, .. } => Some(*hbar_gamma_p),
            MaterialModel::Tabulated { .. } => None,
        }
    }
}

/// Sphere of radius `radius` in a background `eps_b`, emitter at center
/// distance `r_d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub radius: f64,
    pub eps_b: f64,
    pub r_d: f64,
}

impl Geometry {
    /// Builds from the surface distance `h = r_d - R`.
    pub fn new(radius: f64, h: f64, eps_b: f64) -> Result<Self> {
        Self::from_center_distance(radius, radius + h, eps_b)
    }

    pub fn from_center_distance(radius: f64, r_d: f64, eps_b: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter {
                field: "R",
                reason: format!("radius must be positive, got {radius}"),
            });
        }
        if !(r_d > radius) || !r_d.is_finite() {
            return Err(Error::InvalidParameter {
                field: "h",
                reason: format!("emitter must sit outside the sphere (r_d = {r_d}, R = {radius})"),
            });
        }
        if !(eps_b >= 1.0) || !eps_b.is_finite() {
            return Err(Error::InvalidParameter {
                field: "eps_b",
                reason: format!("must be >= 1, got {eps_b}"),
            });
        }
        Ok(Geometry { radius, eps_b, r_d })
    }

    pub fn h(&self) -> f64 {
        self.r_d - self.radius
    }

    pub fn n_b(&self) -> f64 {
        self.eps_b.sqrt()
    }

    pub fn with_h(&self, h: f64) -> Result<Self> {
        Self::new(self.radius, h, self.eps_b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavenumbers {
    pub k0: f64,
    pub kb: f64,
    pub km: Complex64,
}

/// Vacuum, background and metal wavenumbers (1/nm); `Im k_m >= 0`.
pub fn wavenumbers(geometry: &Geometry, material: &MaterialModel, hbar_omega: f64) -> Result<Wavenumbers> {
    let eps_m = material.permittivity(hbar_omega)?;
    let k0 = hbar_omega / HBAR_C;
    let mut root = eps_m.sqrt();
    if root.im < 0.0 || (root.im == 0.0 && root.re < 0.0) {
        root = -root;
    }
    Ok(Wavenumbers {
        k0,
        kb: geometry.n_b() * k0,
        km: root * k0,
    })
}

/// Free-space radiative rate `hbar gamma_0^rad` (eV) of a dipole `d_debye` at
/// `hbar_omega` in a medium of permittivity `eps_b`.
pub fn radiative_rate(d_debye: f64, hbar_omega: f64, eps_b: f64) -> f64 {
    let d = d_debye * DEBYE;
    let k0 = hbar_omega / HBAR_C;
    4.0 / 3.0 * eps_b.sqrt() * COULOMB * d * d * k0.powi(3)
}

/// Two-level emitter with radial dipole. `hbar_gamma0` is the total intrinsic
/// rate, `eta` the intrinsic quantum yield.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterSpec {
    pub hbar_omega0: f64,
    pub d_eg: f64,
    pub eta: f64,
    pub hbar_gamma0: f64,
}

impl EmitterSpec {
    /// From the free-space lifetime (ns) and quantum yield; the dipole moment
    /// is the one implied by the radiative part `eta / tau0`.
    pub fn from_lifetime(hbar_omega0: f64, tau0_ns: f64, eta: f64, eps_b: f64) -> Result<Self> {
        check_energy(hbar_omega0)?;
        if !(tau0_ns > 0.0) || !tau0_ns.is_finite() {
            return Err(Error::InvalidParameter {
                field: "tau0_ns",
                reason: format!("must be positive, got {tau0_ns}"),
            });
        }
        check_eta(eta)?;
        let gamma0 = HBAR_EV_S / (tau0_ns * 1e-9);
        let unit = radiative_rate(1.0, hbar_omega0, eps_b);
        Ok(EmitterSpec {
            hbar_omega0,
            d_eg: (eta * gamma0 / unit).sqrt(),
            eta,
            hbar_gamma0: gamma0,
        })
    }

    /// From the dipole moment (D) and an intrinsic non-radiative rate (eV).
    pub fn from_dipole(hbar_omega0: f64, d_eg: f64, hbar_gamma0_nr: f64, eps_b: f64) -> Result<Self> {
        check_energy(hbar_omega0)?;
        if !(d_eg >= 0.0) || !d_eg.is_finite() {
            return Err(Error::InvalidParameter {
                field: "d_eg",
                reason: format!("must be non-negative, got {d_eg}"),
            });
        }
        if !(hbar_gamma0_nr >= 0.0) || !hbar_gamma0_nr.is_finite() {
            return Err(Error::InvalidParameter {
                field: "hbar_gamma0_nr",
                reason: format!("must be non-negative, got {hbar_gamma0_nr}"),
            });
        }
        let rad = radiative_rate(d_eg, hbar_omega0, eps_b);
        let total = rad + hbar_gamma0_nr;
        if total <= 0.0 {
            return Err(Error::InvalidParameter {
                field: "d_eg",
                reason: "emitter has no decay channel".into(),
            });
        }
        Ok(EmitterSpec {
            hbar_omega0,
            d_eg,
            eta: rad / total,
            hbar_gamma0: total,
        })
    }

    pub fn with_frequency(&self, hbar_omega0: f64) -> Self {
        EmitterSpec { hbar_omega0, ..*self }
    }

    pub fn tau0_ns(&self) -> f64 {
        HBAR_EV_S / self.hbar_gamma0 * 1e9
    }
}

fn check_energy(e: f64) -> Result<()> {
    if !(e > 0.0) || !e.is_finite() {
        return Err(Error::InvalidParameter {
            field: "hbar_omega0",
            reason: format!("must be positive, got {e}"),
        });
    }
    Ok(())
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter {
            field: "eta",
            reason: format!("quantum yield must lie in (0, 1], got {eta}"),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeSpaceRates {
    pub gamma0_rad: f64,
    pub gamma0: f64,
    pub gamma0_nr: f64,
}

impl FreeSpaceRates {
    pub fn gamma0_rad_per_s(&self) -> f64 {
        ev_to_per_second(self.gamma0_rad)
    }

    pub fn gamma0_per_s(&self) -> f64 {
        ev_to_per_second(self.gamma0)
    }

    pub fn gamma0_nr_per_s(&self) -> f64 {
        ev_to_per_second(self.gamma0_nr)
    }
}

/// Radiative rate from the dipole moment; total rate from the quantum yield.
pub fn free_space_rates(emitter: &EmitterSpec, geometry: &Geometry) -> FreeSpaceRates {
    let rad = radiative_rate(emitter.d_eg, emitter.hbar_omega0, geometry.eps_b);
    let total = if emitter.eta > 0.0 {
        rad / emitter.eta
    } else {
        emitter.hbar_gamma0
    };
    FreeSpaceRates {
        gamma0_rad: rad,
        gamma0: total,
        gamma0_nr: total - rad,
    }
}
