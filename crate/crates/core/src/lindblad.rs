//! Master-equation dynamics in the ground plus single-excitation sector.
//!
//! Basis order: `|g,0>, |e,0>, |g,1_1>, ..., |g,1_N>`. Superoperators act on
//! column-stacked density matrices, `vec(A rho B) = (B^T (x) A) vec(rho)`, and
//! are stored in eV: `d rho / dt = L rho / hbar` with `hbar` in eV fs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupling::ModeParams;
use crate::error::{Error, Result};
use crate::heff::{EffectiveHamiltonian, HamiltonianKind};
use crate::linalg::{eig, solve, CMatrix, CVector};
use crate::medium::{EmitterSpec, HBAR_EV_FS};
use crate::ode::{dopri5, OdeOptions};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Operator as `(row, col, value)` triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    pub dim: usize,
    pub entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOp {
    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn scaled(&self, s: f64) -> SparseOp {
        SparseOp {
            dim: self.dim,
            entries: self.entries.iter().map(|&(r, c, v)| (r, c, v * s)).collect(),
        }
    }

    pub fn plus(&self, other: &SparseOp) -> SparseOp {
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        SparseOp { dim: self.dim, entries }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub n_modes: usize,
    pub sigma_ge: SparseOp,
    pub a: Vec<SparseOp>,
}

pub const GROUND: usize = 0;
pub const EXCITED: usize = 1;

impl StateSpace {
    pub fn dim(&self) -> usize {
        self.n_modes + 2
    }

    /// Basis index of `|g,1_n>` for mode `n = 1..=N`.
    pub fn mode_index(&self, n: usize) -> usize {
        n + 1
    }

    pub fn labels(&self) -> Vec<String> {
        let mut l = vec!["g,0".to_string(), "e,0".to_string()];
        l.extend((1..=self.n_modes).map(|n| format!("g,1_{n}")));
        l
    }
}

pub fn build_state_space(n_modes: usize) -> StateSpace {
    let dim = n_modes + 2;
    StateSpace {
        n_modes,
        sigma_ge: SparseOp {
            dim,
            entries: vec![(GROUND, EXCITED, ONE)],
        },
        a: (1..=n_modes)
            .map(|n| SparseOp {
                dim,
                entries: vec![(GROUND, n + 1, ONE)],
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DissipatorKind {
    Standard,
    FanoRadiative,
    FanoFull,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub label: String,
    /// Collapse operator including the square root of its rate (sqrt eV).
    pub op: SparseOp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissipatorSpec {
    pub kind: DissipatorKind,
    pub channels: Vec<Channel>,
}

fn rate(field: &'static str, v: f64) -> Result<f64> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter {
            field,
            reason: format!("rates must be non-negative, got {v}"),
        });
    }
    Ok(v)
}

/// `gamma_0n^rad` of a Fano-resolved mode; falls back to `(alpha g)^2 / Gamma^rad`.
fn emitter_channel_rate(m: &ModeParams) -> Result<f64> {
    if let Some(r) = m.hbar_gamma0n_rad {
        return rate("hbar_gamma0n_rad", r);
    }
    let alpha = m.alpha.ok_or(Error::IncompleteModes {
        n: m.n,
        what: "a Fano ratio",
    })?;
    let gr = m.hbar_gamma_rad.ok_or(Error::IncompleteModes {
        n: m.n,
        what: "a radiative width",
    })?;
    if gr == 0.0 {
        return Err(Error::IncompleteModes {
            n: m.n,
            what: "an emitter channel rate",
        });
    }
    Ok((alpha * m.hbar_g).powi(2) / gr)
}

pub fn build_dissipators(
    kind: DissipatorKind,
    modes: &[ModeParams],
    emitter: &EmitterSpec,
    space: &StateSpace,
) -> Result<DissipatorSpec> {
    if modes.len() != space.n_modes {
        return Err(Error::InvalidArgument(
            "mode count does not match the state space".into(),
        ));
    }
    let gamma0 = rate("hbar_gamma0", emitter.hbar_gamma0)?;
    let mut channels = Vec::new();
    match kind {
        DissipatorKind::Standard => {
            channels.push(Channel {
                label: "emitter".into(),
                op: space.sigma_ge.scaled(gamma0.sqrt()),
            });
            for (m, a) in modes.iter().zip(&space.a) {
                channels.push(Channel {
                    label: format!("lsp_{}", m.n),
                    op: a.scaled(rate("hbar_gamma", m.hbar_gamma)?.sqrt()),
                });
            }
        }
        DissipatorKind::FanoRadiative | DissipatorKind::FanoFull => {
            let gamma0_rad = emitter.eta * gamma0;
            let mut used = 0.0;
            for (m, a) in modes.iter().zip(&space.a) {
                let alpha = m.alpha.ok_or(Error::IncompleteModes {
                    n: m.n,
                    what: "a Fano ratio",
                })?;
                let gr = rate(
                    "hbar_gamma_rad",
                    m.hbar_gamma_rad.ok_or(Error::IncompleteModes {
                        n: m.n,
                        what: "a radiative width",
                    })?,
                )?;
                let g0n = emitter_channel_rate(m)?;
                used += g0n;
                // the cross term of c^+ c must reproduce -(i/2) alpha g
                let sign = if alpha * m.hbar_g < 0.0 { -1.0 } else { 1.0 };
                channels.push(Channel {
                    label: format!("collective_{}", m.n),
                    op: space.sigma_ge.scaled(sign * g0n.sqrt()).plus(&a.scaled(gr.sqrt())),
                });
            }
            let residual = gamma0_rad - used;
            if residual < -1e-9 * gamma0_rad.max(f64::MIN_POSITIVE) {
                return Err(Error::InvalidParameter {
                    field: "hbar_gamma0n_rad",
                    reason: format!(
                        "mode channels exceed the emitter radiative rate by {:.3e} eV",
                        -residual
                    ),
                });
            }
            if residual > 0.0 {
                channels.push(Channel {
                    label: "emitter_rad_residual".into(),
                    op: space.sigma_ge.scaled(residual.sqrt()),
                });
            }
            if kind == DissipatorKind::FanoFull {
                for (m, a) in modes.iter().zip(&space.a) {
                    let gnr = m
                        .hbar_gamma_nr
                        .unwrap_or(m.hbar_gamma - m.hbar_gamma_rad.unwrap_or(m.hbar_gamma));
                    let gnr = rate("hbar_gamma_nr", if gnr.abs() < 1e-15 { 0.0 } else { gnr })?;
                    channels.push(Channel {
                        label: format!("lsp_nr_{}", m.n),
                        op: a.scaled(gnr.sqrt()),
                    });
                }
                let nr = gamma0 - gamma0_rad;
                if nr > 0.0 {
                    channels.push(Channel {
                        label: "emitter_nr".into(),
                        op: space.sigma_ge.scaled(nr.sqrt()),
                    });
                }
            }
        }
    }
    Ok(DissipatorSpec { kind, channels })
}

/// `H_S = sum Delta_n a_n^+ a_n + sum g_n (sigma_eg a_n + a_n^+ sigma_ge)` (eV).
pub fn system_hamiltonian(modes: &[ModeParams], emitter: &EmitterSpec, space: &StateSpace) -> CMatrix {
    let mut h = CMatrix::zeros(space.dim(), space.dim());
    for (i, m) in modes.iter().enumerate().take(space.n_modes) {
        let k = space.mode_index(i + 1);
        h[(k, k)] = Complex64::new(m.hbar_omega_n - emitter.hbar_omega0, 0.0);
        h[(EXCITED, k)] = Complex64::new(m.hbar_g, 0.0);
        h[(k, EXCITED)] = Complex64::new(m.hbar_g, 0.0);
    }
    h
}

/// Vectorised generator in eV.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    pub dim: usize,
    pub matrix: CMatrix,
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn build_liouvillian(h_s: &CMatrix, dissipators: &DissipatorSpec, space: &StateSpace) -> Result<Liouvillian> {
    let d = space.dim();
    if h_s.nrows() != d || h_s.ncols() != d {
        return Err(Error::ContractViolation(
            "H_S dimension does not match the state space".into(),
        ));
    }
    let herm = (h_s - h_s.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = h_s.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if herm > 1e-12 * scale {
        return Err(Error::ContractViolation(format!(
            "H_S is not hermitian (deviation {herm:.3e})"
        )));
    }
    let id = CMatrix::identity(d, d);
    let mut l = (kron(&id, h_s) - kron(&h_s.transpose(), &id)) * (-I);
    for ch in &dissipators.channels {
        let c = ch.op.to_dense();
        let cdc = c.adjoint() * &c;
        l += kron(&c.map(|z| z.conj()), &c);
        l -= kron(&id, &cdc) * Complex64::new(0.5, 0.0);
        l -= kron(&cdc.transpose(), &id) * Complex64::new(0.5, 0.0);
    }
    Ok(Liouvillian { dim: d, matrix: l })
}

/// Density matrix snapshot at time `t` (fs).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub t: f64,
    pub rho: CMatrix,
}

impl DensityMatrix {
    pub fn pure(t: f64, psi: &[Complex64]) -> Self {
        let v = CVector::from_column_slice(psi);
        DensityMatrix {
            t,
            rho: &v * v.adjoint(),
        }
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut psi = vec![ZERO; dim];
        psi[k] = ONE;
        DensityMatrix::pure(0.0, &psi)
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.rho.nrows()).map(|i| self.rho[(i, i)].re).collect()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.rho - self.rho.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        let tr = self.trace();
        let min = self.min_eigenvalue();
        if herm > 1e-12 || !(-1e-9..=1.0 + 1e-9).contains(&tr) || min < -1e-9 {
            return Err(Error::ContractViolation(format!(
                "density matrix at t = {} fs: hermiticity {herm:.2e}, trace {tr}, min eigenvalue {min:.2e}",
                self.t
            )));
        }
        Ok(())
    }

    fn vec(&self) -> Vec<Complex64> {
        self.rho.as_slice().to_vec()
    }

    fn from_vec(t: f64, dim: usize, v: &[Complex64]) -> Self {
        DensityMatrix {
            t,
            rho: DMatrix::from_column_slice(dim, dim, v),
        }
    }
}

/// Adaptive Runge-Kutta propagation of the vectorised master equation.
pub fn evolve_master(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    times: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<DensityMatrix>> {
    rho0.validate()?;
    let m = l.matrix.map(|z| z / HBAR_EV_FS);
    let n = m.nrows();
    // keep only structurally nonzero entries for the matrix-vector product
    let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); n];
    for j in 0..n {
        for i in 0..n {
            let v = m[(i, j)];
            if v != ZERO {
                rows[i].push((j, v));
            }
        }
    }
    let ys = dopri5(
        |_, y, dy| {
            for (i, row) in rows.iter().enumerate() {
                dy[i] = row.iter().map(|&(j, v)| v * y[j]).sum();
            }
        },
        rho0.t,
        &rho0.vec(),
        times,
        opts,
    )?;
    let out: Vec<DensityMatrix> = times
        .iter()
        .zip(ys)
        .map(|(&t, y)| {
            let mut d = DensityMatrix::from_vec(t, l.dim, &y);
            // remove round-off antihermitian drift before validation
            d.rho = (&d.rho + d.rho.adjoint()) * Complex64::new(0.5, 0.0);
            d
        })
        .collect();
    for d in &out {
        d.validate()?;
    }
    Ok(out)
}

/// Propagation through the eigendecomposition of the Liouvillian, for stiff
/// parameter sets where the time step would have to resolve fs and ns scales.
pub fn evolve_master_spectral(l: &Liouvillian, rho0: &DensityMatrix, times: &[f64]) -> Result<Vec<DensityMatrix>> {
    rho0.validate()?;
    let e = eig(&l.matrix)?;
    let v0 = CVector::from_vec(rho0.vec());
    let c = solve(&e.vectors, &v0)?;
    let back = &e.vectors * &c;
    let err = (&back - &v0).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if err > 1e-8 {
        return Err(Error::SingularSystem(format!(
            "Liouvillian eigenbasis reconstructs the initial state only to {err:.2e}"
        )));
    }
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let dt = (t - rho0.t) / HBAR_EV_FS;
        let phased = CVector::from_iterator(c.len(), c.iter().zip(&e.values).map(|(ci, li)| ci * (li * dt).exp()));
        let y = &e.vectors * phased;
        let mut d = DensityMatrix::from_vec(t, l.dim, y.as_slice());
        d.rho = (&d.rho + d.rho.adjoint()) * Complex64::new(0.5, 0.0);
        d.validate()?;
        out.push(d);
    }
    Ok(out)
}

/// `H_S - (i/2) sum c^+ c` restricted to `|e,0>, |g,1_n>`.
pub fn effective_hamiltonian_from_lindblad(
    h_s: &CMatrix,
    dissipators: &DissipatorSpec,
    emitter: &EmitterSpec,
    modes: &[ModeParams],
) -> Result<EffectiveHamiltonian> {
    let d = h_s.nrows();
    let mut full = h_s.clone();
    for ch in &dissipators.channels {
        let c = ch.op.to_dense();
        full -= (c.adjoint() * &c) * (0.5 * I);
    }
    let sub = full.view((1, 1), (d - 1, d - 1)).into_owned();
    let kind = match dissipators.kind {
        DissipatorKind::Standard => HamiltonianKind::Standard,
        _ => HamiltonianKind::Fano,
    };
    EffectiveHamiltonian::from_matrix(kind, sub, *emitter, modes.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heff::{build_fano, build_standard, FanoVariant};

    fn emitter() -> EmitterSpec {
        EmitterSpec {
            hbar_omega0: 2.9,
            d_eg: 1.0,
            eta: 0.8,
            hbar_gamma0: 0.01,
        }
    }

    fn fano_mode(n: usize, w: f64, gr: f64, gnr: f64, g: f64, g0n: f64, sign: f64) -> ModeParams {
        ModeParams {
            n,
            hbar_omega_n: w,
            hbar_gamma: gr + gnr,
            hbar_gamma_rad: Some(gr),
            hbar_gamma_nr: Some(gnr),
            hbar_g: g,
            alpha: Some(sign * (g0n * gr).sqrt() / g),
            hbar_gamma0n_rad: Some(g0n),
            fit_residual: 0.0,
            detuning: 0.0,
        }
    }

    fn close(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn sector_operators() {
        let s0 = build_state_space(0);
        assert_eq!(s0.dim(), 2);
        assert_eq!(s0.sigma_ge.to_dense()[(GROUND, EXCITED)], ONE);
        let s = build_state_space(2);
        let a1 = s.a[0].to_dense();
        let num = a1.adjoint() * &a1;
        let mut proj = CMatrix::zeros(4, 4);
        proj[(2, 2)] = ONE;
        assert_eq!(num, proj);
        // [a, a^+] is the identity only on span{|g,0>, |g,1_1>}
        let comm = &a1 * a1.adjoint() - a1.adjoint() * &a1;
        let mut expect = CMatrix::zeros(4, 4);
        expect[(0, 0)] = ONE;
        expect[(2, 2)] = -ONE;
        assert_eq!(comm, expect);
        assert_eq!(&a1 * &a1, CMatrix::zeros(4, 4));
    }

    #[test]
    fn collective_channel_expansion() {
        // D[c] with c = sqrt(g0) s + sqrt(G) a equals D0 + D_lsp + cross terms
        let s = build_state_space(1);
        let (g0, gr): (f64, f64) = (0.003, 0.2);
        let c = s.sigma_ge.scaled(g0.sqrt()).plus(&s.a[0].scaled(gr.sqrt())).to_dense();
        let sg = s.sigma_ge.to_dense();
        let a = s.a[0].to_dense();
        let mut rho = CMatrix::from_fn(3, 3, |i, j| {
            Complex64::new((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.05)
        });
        rho = &rho * rho.adjoint();
        let dis = |c: &CMatrix, r: &CMatrix| -> CMatrix {
            let cdc = c.adjoint() * c;
            c * r * c.adjoint() - (&cdc * r + r * &cdc) * Complex64::new(0.5, 0.0)
        };
        let lhs = dis(&c, &rho);
        let k = Complex64::new((g0 * gr).sqrt(), 0.0);
        let cross = (&sg * &rho * a.adjoint() + &a * &rho * sg.adjoint()) * k
            - ((sg.adjoint() * &a + a.adjoint() * &sg) * &rho + &rho * (sg.adjoint() * &a + a.adjoint() * &sg))
                * (k * 0.5);
        let rhs = dis(&sg, &rho) * Complex64::new(g0, 0.0) + dis(&a, &rho) * Complex64::new(gr, 0.0) + cross;
        assert!(close(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn liouvillian_structure() {
        let s = build_state_space(2);
        let modes = vec![
            ModeParams::lorentzian(1, 2.8, 0.05, 0.03),
            ModeParams::lorentzian(2, 2.95, 0.06, 0.02),
        ];
        let em = emitter();
        let h = system_hamiltonian(&modes, &em, &s);
        let dis = build_dissipators(DissipatorKind::Standard, &modes, &em, &s).unwrap();
        let l = build_liouvillian(&h, &dis, &s).unwrap();
        // trace functional is a left null vector
        let id = CMatrix::identity(4, 4);
        let tr = CVector::from_column_slice(id.as_slice());
        let left = l.matrix.transpose() * tr;
        assert!(left.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
        // the ground state is stationary
        let g = DensityMatrix::basis(4, GROUND);
        let dv = &l.matrix * CVector::from_column_slice(g.rho.as_slice());
        assert!(dv.norm() < 1e-15);
        // no dissipators: purely imaginary spectrum
        let empty = DissipatorSpec {
            kind: DissipatorKind::Standard,
            channels: vec![],
        };
        let l0 = build_liouvillian(&h, &empty, &s).unwrap();
        for v in eig(&l0.matrix).unwrap().values {
            assert!(v.re.abs() < 1e-12);
        }
        let mut bad = h.clone();
        bad[(1, 2)] += Complex64::new(0.0, 1e-3);
        assert!(matches!(
            build_liouvillian(&bad, &dis, &s),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn pure_plasmon_decay() {
        let s = build_state_space(1);
        let gam: f64 = 0.1;
        let dis = DissipatorSpec {
            kind: DissipatorKind::Standard,
            channels: vec![Channel {
                label: "lsp".into(),
                op: s.a[0].scaled(gam.sqrt()),
            }],
        };
        let l = build_liouvillian(&CMatrix::zeros(3, 3), &dis, &s).unwrap();
        let times = [0.0, 5.0, 20.0, 50.0];
        let out = evolve_master(&l, &DensityMatrix::basis(3, 2), &times, &OdeOptions::default()).unwrap();
        for d in out {
            assert!((d.rho[(2, 2)].re - (-gam * d.t / HBAR_EV_FS).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn heff_reductions_are_exact() {
        let em = emitter();
        let s = build_state_space(2);
        let modes = vec![
            ModeParams::lorentzian(1, 2.8, 0.05, 0.03),
            ModeParams::lorentzian(2, 2.95, 0.06, 0.02),
        ];
        let h = system_hamiltonian(&modes, &em, &s);
        let dis = build_dissipators(DissipatorKind::Standard, &modes, &em, &s).unwrap();
        let from_l = effective_hamiltonian_from_lindblad(&h, &dis, &em, &modes).unwrap();
        assert!(close(&from_l.matrix, &build_standard(&modes, &em).unwrap().matrix) < 1e-15);

        let fm = vec![
            fano_mode(1, 2.6, 0.25, 0.04, 0.004, 1e-7, -1.0),
            fano_mode(2, 2.9, 0.1, 0.05, 0.002, 2e-8, 1.0),
        ];
        let em = EmitterSpec {
            hbar_gamma0: 2e-7,
            eta: 0.9,
            ..em
        };
        let h = system_hamiltonian(&fm, &em, &s);
        let rad = build_dissipators(DissipatorKind::FanoRadiative, &fm, &em, &s).unwrap();
        let a = effective_hamiltonian_from_lindblad(&h, &rad, &em, &fm).unwrap();
        let b = build_fano(&fm, &em, FanoVariant::RadiativeOnly).unwrap();
        assert!(close(&a.matrix, &b.matrix) < 1e-15);
        let full = build_dissipators(DissipatorKind::FanoFull, &fm, &em, &s).unwrap();
        let a = effective_hamiltonian_from_lindblad(&h, &full, &em, &fm).unwrap();
        let b = build_fano(&fm, &em, FanoVariant::General).unwrap();
        assert!(close(&a.matrix, &b.matrix) < 1e-15);
    }

    #[test]
    fn collapsed_channels_limits() {
        let em = EmitterSpec {
            hbar_gamma0: 2e-7,
            eta: 1.0,
            ..emitter()
        };
        let s = build_state_space(1);
        // no radiative width: all emitter channels add to gamma_0^rad
        let m = ModeParams {
            hbar_gamma_rad: Some(0.0),
            hbar_gamma_nr: Some(0.0),
            hbar_gamma: 0.0,
            alpha: Some(0.0),
            hbar_gamma0n_rad: Some(5e-8),
            ..ModeParams::lorentzian(1, 2.6, 0.0, 0.001)
        };
        let dis = build_dissipators(DissipatorKind::FanoRadiative, &[m], &em, &s).unwrap();
        let total: CMatrix = dis
            .channels
            .iter()
            .map(|c| {
                let d = c.op.to_dense();
                d.adjoint() * d
            })
            .fold(CMatrix::zeros(3, 3), |a, b| a + b);
        assert!((total[(1, 1)].re - 2e-7).abs() < 1e-20);
        assert!(total[(2, 2)].norm() < 1e-20);
        // channel rates beyond the emitter radiative rate are rejected
        let over = fano_mode(1, 2.6, 0.2, 0.0, 0.003, 3e-7, 1.0);
        assert!(build_dissipators(DissipatorKind::FanoRadiative, &[over], &em, &s).is_err());
    }
}
