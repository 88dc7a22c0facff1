//! Non-hermitian effective Hamiltonians of an emitter coupled to N plasmon
//! modes in the single-excitation sector, their biorthogonal eigenbasis,
//! amplitude dynamics and emission spectra.
//!
//! Matrices are in eV in the frame rotating at the emitter frequency. Basis
//! order is `|e,0>, |g,1_1>, ..., |g,1_N>`. Times are in fs.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::ModeParams;
use crate::error::{Error, Result};
use crate::linalg::{eig, solve, CMatrix, CVector};
use crate::medium::{radiative_rate, EmitterSpec, Geometry, MaterialModel, HBAR_EV_FS};
use crate::mie::dipole_polarizability;
use crate::ode::{dopri5, OdeOptions};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianKind {
    Standard,
    Fano,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FanoVariant {
    /// Radiative rates only: `gamma_0^rad`, `Gamma_n^rad`.
    RadiativeOnly,
    /// Full rates `gamma_0`, `Gamma_n = Gamma_n^rad + Gamma_n^nr`.
    General,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    pub kind: HamiltonianKind,
    pub matrix: CMatrix,
    pub emitter: EmitterSpec,
    pub modes: Vec<ModeParams>,
}

impl EffectiveHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_modes(&self) -> usize {
        self.dim() - 1
    }

    pub fn labels(&self) -> Vec<String> {
        std::iter::once("e,0".to_string())
            .chain(self.modes.iter().map(|m| format!("g,1_{}", m.n)))
            .collect()
    }

    /// Wraps an explicit matrix; the first row and column couple the emitter.
    pub fn from_matrix(
        kind: HamiltonianKind,
        matrix: CMatrix,
        emitter: EmitterSpec,
        modes: Vec<ModeParams>,
    ) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() < 1 {
            return Err(Error::InvalidArgument("effective Hamiltonian must be square".into()));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument(
                "effective Hamiltonian has non-finite entries".into(),
            ));
        }
        Ok(EffectiveHamiltonian {
            kind,
            matrix,
            emitter,
            modes,
        })
    }

    /// `H[n,0] / H[0,n]` per mode, the phase gauge relating left and right
    /// eigenvectors. `None` when one of the pair vanishes alone.
    pub fn gauge_ratios(&self) -> Option<Vec<Complex64>> {
        let h = &self.matrix;
        let mut out = vec![Complex64::new(1.0, 0.0)];
        for n in 1..self.dim() {
            let (up, down) = (h[(0, n)], h[(n, 0)]);
            if up == ZERO && down == ZERO {
                out.push(Complex64::new(1.0, 0.0));
            } else if up == ZERO || down == ZERO {
                return None;
            } else {
                out.push(down / up);
            }
        }
        Some(out)
    }
}

fn check_modes(modes: &[ModeParams]) -> Result<()> {
    if modes.is_empty() {
        return Err(Error::InvalidArgument("need at least one mode".into()));
    }
    for m in modes {
        if !(m.hbar_gamma >= 0.0) || !m.hbar_gamma.is_finite() || !m.hbar_g.is_finite() {
            return Err(Error::InvalidParameter {
                field: "modes",
                reason: format!("mode {} has an invalid width or coupling", m.n),
            });
        }
    }
    Ok(())
}

/// Diagonal `{-i gamma_0/2, Delta_n - i Gamma_n/2}`, symmetric couplings `g_n`.
pub fn build_standard(modes: &[ModeParams], emitter: &EmitterSpec) -> Result<EffectiveHamiltonian> {
    check_modes(modes)?;
    let n = modes.len();
    let mut h = CMatrix::zeros(n + 1, n + 1);
    h[(0, 0)] = Complex64::new(0.0, -0.5 * emitter.hbar_gamma0);
    for (k, m) in modes.iter().enumerate() {
        h[(k + 1, k + 1)] = Complex64::new(m.hbar_omega_n - emitter.hbar_omega0, -0.5 * m.hbar_gamma);
        h[(0, k + 1)] = Complex64::new(m.hbar_g, 0.0);
        h[(k + 1, 0)] = Complex64::new(m.hbar_g, 0.0);
    }
    EffectiveHamiltonian::from_matrix(HamiltonianKind::Standard, h, *emitter, modes.to_vec())
}

/// Couplings `g_n (1 - i alpha_n / 2)` on both sides of the diagonal.
pub fn build_fano(modes: &[ModeParams], emitter: &EmitterSpec, variant: FanoVariant) -> Result<EffectiveHamiltonian> {
    check_modes(modes)?;
    let n = modes.len();
    let gamma0 = match variant {
        FanoVariant::General => emitter.hbar_gamma0,
        FanoVariant::RadiativeOnly => emitter.eta * emitter.hbar_gamma0,
    };
    let mut h = CMatrix::zeros(n + 1, n + 1);
    h[(0, 0)] = Complex64::new(0.0, -0.5 * gamma0);
    for (k, m) in modes.iter().enumerate() {
        let alpha = m.alpha.ok_or(Error::IncompleteModes {
            n: m.n,
            what: "a Fano ratio",
        })?;
        let width = match variant {
            FanoVariant::General => m.hbar_gamma,
            FanoVariant::RadiativeOnly => m.hbar_gamma_rad.ok_or(Error::IncompleteModes {
                n: m.n,
                what: "a radiative width",
            })?,
        };
        let c = m.hbar_g * Complex64::new(1.0, -0.5 * alpha);
        h[(k + 1, k + 1)] = Complex64::new(m.hbar_omega_n - emitter.hbar_omega0, -0.5 * width);
        h[(0, k + 1)] = c;
        h[(k + 1, 0)] = c;
    }
    EffectiveHamiltonian::from_matrix(HamiltonianKind::Fano, h, *emitter, modes.to_vec())
}

/// Eigenvalues `lambda_m = omega_m - i gamma_m / 2` with biorthonormal right
/// and left eigenvectors stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedSet {
    pub eigenvalues: Vec<Complex64>,
    pub right: CMatrix,
    pub left: CMatrix,
    /// `<L_m | e,0>`, the expansion coefficients of the excited emitter.
    pub eta: Vec<Complex64>,
}

impl DressedSet {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Emitter component `m_0` of right vector `m`.
    pub fn m0(&self, m: usize) -> Complex64 {
        self.right[(0, m)]
    }

    pub fn energy(&self, m: usize, hbar_omega0: f64) -> f64 {
        hbar_omega0 + self.eigenvalues[m].re
    }

    pub fn width(&self, m: usize) -> f64 {
        -2.0 * self.eigenvalues[m].im
    }

    /// Residue `eta_m m_0` of the emitter amplitude on state `m`.
    pub fn emitter_residue(&self, m: usize) -> Complex64 {
        self.eta[m] * self.right[(0, m)]
    }

    /// State indices ordered by decreasing `|m_0|`.
    pub fn by_emitter_weight(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| {
            self.m0(b)
                .norm()
                .partial_cmp(&self.m0(a).norm())
                .unwrap()
                .then(a.cmp(&b))
        });
        idx
    }

    /// `<L_m | R_m'>`.
    pub fn overlap_matrix(&self) -> CMatrix {
        self.left.adjoint() * &self.right
    }
}

/// Left vectors `L_m = conj(R_m / ratio)` normalised so `<L_m|R_m> = 1`.
/// Returns `(right, left)`, the right vectors rescaled consistently.
pub fn left_from_right(right: &CMatrix, ratios: &[Complex64]) -> Result<(CMatrix, CMatrix)> {
    let dim = right.nrows();
    if ratios.len() != dim {
        return Err(Error::InvalidArgument(
            "one gauge ratio per basis state required".into(),
        ));
    }
    let mut r = right.clone();
    let mut l = CMatrix::zeros(dim, right.ncols());
    for m in 0..right.ncols() {
        let c: Complex64 = (0..dim).map(|i| r[(i, m)] * r[(i, m)] / ratios[i]).sum();
        if c.norm() < 1e-10 {
            return Err(Error::NearDefective {
                index: m,
                overlap: c.norm(),
            });
        }
        let s = c.sqrt();
        for i in 0..dim {
            r[(i, m)] /= s;
        }
        for i in 0..dim {
            l[(i, m)] = (r[(i, m)] / ratios[i]).conj();
        }
    }
    Ok((r, l))
}

pub fn eigendecompose(h: &EffectiveHamiltonian) -> Result<DressedSet> {
    let e = eig(&h.matrix)?;
    let (right, left) = match h.gauge_ratios() {
        Some(ratios) => left_from_right(&e.vectors, &ratios)?,
        None => {
            // not similar to a complex-symmetric matrix: dual basis by inversion
            let inv = crate::linalg::inverse(&e.vectors)?;
            (e.vectors.clone(), inv.adjoint())
        }
    };
    let eta = (0..right.ncols()).map(|m| left[(0, m)].conj()).collect();
    Ok(DressedSet {
        eigenvalues: e.values,
        right,
        left,
        eta,
    })
}

/// Amplitudes on `|e,0>` and `|g,1_n>` at time `t` (fs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeState {
    pub t: f64,
    pub c_e: Complex64,
    pub c_n: Vec<Complex64>,
}

impl AmplitudeState {
    pub fn excited(n_modes: usize) -> Self {
        AmplitudeState {
            t: 0.0,
            c_e: Complex64::new(1.0, 0.0),
            c_n: vec![ZERO; n_modes],
        }
    }

    pub fn from_vector(t: f64, v: &[Complex64]) -> Self {
        AmplitudeState {
            t,
            c_e: v[0],
            c_n: v[1..].to_vec(),
        }
    }

    pub fn to_vector(&self) -> CVector {
        CVector::from_iterator(
            self.c_n.len() + 1,
            std::iter::once(self.c_e).chain(self.c_n.iter().copied()),
        )
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c_e.norm_sqr() + self.c_n.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }
}

/// Spectral propagation `psi(t) = sum_m <L_m|psi_0> R_m exp(-i lambda_m t / hbar)`.
pub fn evolve_spectral(set: &DressedSet, psi0: &AmplitudeState, times: &[f64]) -> Vec<AmplitudeState> {
    let v0 = psi0.to_vector();
    let coeffs = set.left.adjoint() * &v0;
    times
        .iter()
        .map(|&t| {
            let dt = t - psi0.t;
            let phased = CVector::from_iterator(
                coeffs.len(),
                coeffs
                    .iter()
                    .zip(&set.eigenvalues)
                    .map(|(c, l)| c * (-I * l * dt / HBAR_EV_FS).exp()),
            );
            let v = &set.right * phased;
            AmplitudeState::from_vector(t, v.as_slice())
        })
        .collect()
}

/// Time-stepped `i hbar d psi/dt = H psi`.
pub fn evolve_rk(
    h: &EffectiveHamiltonian,
    psi0: &AmplitudeState,
    times: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<AmplitudeState>> {
    let m = h.matrix.map(|z| -I * z / HBAR_EV_FS);
    let dim = h.dim();
    let ys = dopri5(
        |_, y, dy| {
            for i in 0..dim {
                let mut s = ZERO;
                for j in 0..dim {
                    s += m[(i, j)] * y[j];
                }
                dy[i] = s;
            }
        },
        psi0.t,
        psi0.to_vector().as_slice(),
        times,
        opts,
    )?;
    Ok(times
        .iter()
        .zip(ys)
        .map(|(&t, y)| AmplitudeState::from_vector(t, &y))
        .collect())
}

/// Spectral propagation, falling back to time stepping when the eigenbasis is
/// near-defective.
pub fn evolve(h: &EffectiveHamiltonian, psi0: &AmplitudeState, times: &[f64]) -> Result<Vec<AmplitudeState>> {
    if psi0.c_n.len() != h.n_modes() {
        return Err(Error::InvalidArgument(
            "initial state dimension does not match the Hamiltonian".into(),
        ));
    }
    match eigendecompose(h) {
        Ok(set) => Ok(evolve_spectral(&set, psi0, times)),
        Err(Error::NearDefective { .. }) => evolve_rk(h, psi0, times, &OdeOptions::default()),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizationSpectrum {
    /// Absolute photon energies (eV).
    pub grid: Vec<f64>,
    /// `P(E)` (eV^-2).
    pub values: Vec<f64>,
    /// `hbar omega_0 + Re lambda_m` per dressed state.
    pub dressed_energies: Vec<f64>,
    /// `-2 Im lambda_m` per dressed state.
    pub dressed_widths: Vec<f64>,
}

/// `P(E) = |sum_m eta_m m_0 / (E - E_0 - lambda_m)|^2` for the excited emitter.
pub fn polarization_spectrum(h: &EffectiveHamiltonian, grid: &[f64]) -> Result<PolarizationSpectrum> {
    let set = eigendecompose(h)?;
    Ok(polarization_from_set(&set, h.emitter.hbar_omega0, grid))
}

pub fn polarization_from_set(set: &DressedSet, hbar_omega0: f64, grid: &[f64]) -> PolarizationSpectrum {
    let res: Vec<Complex64> = (0..set.len()).map(|m| set.emitter_residue(m)).collect();
    let values = grid
        .iter()
        .map(|&e| {
            res.iter()
                .zip(&set.eigenvalues)
                .map(|(a, l)| a / (e - hbar_omega0 - l))
                .sum::<Complex64>()
                .norm_sqr()
        })
        .collect();
    PolarizationSpectrum {
        grid: grid.to_vec(),
        values,
        dressed_energies: (0..set.len()).map(|m| set.energy(m, hbar_omega0)).collect(),
        dressed_widths: (0..set.len()).map(|m| set.width(m)).collect(),
    }
}

/// Closed form of `(1/2 pi) int P(E) dE` from the residues.
pub fn polarization_sum_rule(set: &DressedSet) -> f64 {
    let res: Vec<Complex64> = (0..set.len()).map(|m| set.emitter_residue(m)).collect();
    let mut acc = ZERO;
    for (a, la) in res.iter().zip(&set.eigenvalues) {
        for (b, lb) in res.iter().zip(&set.eigenvalues) {
            acc += I * a * b.conj() / (lb.conj() - la);
        }
    }
    acc.re
}

/// Frequency-domain amplitudes `C(E) = i (E - E_0 - H)^-1 psi_0`.
pub fn frequency_amplitudes(h: &EffectiveHamiltonian, psi0: &AmplitudeState, hbar_omega: f64) -> Result<CVector> {
    let dim = h.dim();
    let shift = Complex64::new(hbar_omega - h.emitter.hbar_omega0, 0.0);
    let a = CMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            shift - h.matrix[(i, j)]
        } else {
            -h.matrix[(i, j)]
        }
    });
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let b = psi0.to_vector().map(|z| I * z);
    let x = solve(&a, &b).map_err(|_| Error::SingularSystem(format!("E = {hbar_omega} eV")))?;
    if x.norm() * scale > 1e15 * b.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::SingularSystem(format!("E = {hbar_omega} eV")));
    }
    Ok(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiatedSpectrum {
    pub grid: Vec<f64>,
    /// `|C_e(E)|^2` (eV^-2).
    pub polarization: Vec<f64>,
    /// Far-field power spectral density, `gamma^rad(E) P(E) / 2 pi` (eV^-1).
    pub p_rad: Vec<f64>,
    /// `|C_1(E)|^2` (eV^-2), the dipolar-mode population proxy.
    pub c1_sq: Vec<f64>,
}

/// `P_rad(E) = gamma_0^rad(E) [1 + 4 |alpha_1(E)|^2 / r_d^6] P(E) / 2 pi`, with
/// the retarded dipole polarizability so the particle resonance sits where
/// the fitted modes put it.
pub fn radiated_spectrum(
    h: &EffectiveHamiltonian,
    grid: &[f64],
    geometry: &Geometry,
    material: &MaterialModel,
) -> Result<RadiatedSpectrum> {
    let psi0 = AmplitudeState::excited(h.n_modes());
    let dipole_index = h.modes.iter().position(|m| m.n == 1).map(|k| k + 1);
    let rows = grid
        .par_iter()
        .map(|&e| {
            let c = frequency_amplitudes(h, &psi0, e)?;
            let p = c[0].norm_sqr();
            let a1 = dipole_polarizability(e, geometry, material)?;
            let gamma_rad =
                radiative_rate(h.emitter.d_eg, e, geometry.eps_b) * (1.0 + 4.0 * a1.norm_sqr() / geometry.r_d.powi(6));
            let c1 = dipole_index.map_or(0.0, |k| c[k].norm_sqr());
            Ok((p, gamma_rad * p / (2.0 * std::f64::consts::PI), c1))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RadiatedSpectrum {
        grid: grid.to_vec(),
        polarization: rows.iter().map(|r| r.0).collect(),
        p_rad: rows.iter().map(|r| r.1).collect(),
        c1_sq: rows.iter().map(|r| r.2).collect(),
    })
}

/// Relative residual of `lambda` in the secular determinant of an arrowhead
/// matrix (first row and column plus diagonal).
pub fn arrowhead_residual(matrix: &CMatrix, lambda: Complex64) -> f64 {
    let dim = matrix.nrows();
    let d: Vec<Complex64> = (1..dim).map(|k| matrix[(k, k)] - lambda).collect();
    let prod_except = |skip: Option<usize>| -> (Complex64, f64) {
        d.iter()
            .enumerate()
            .filter(|(k, _)| Some(*k) != skip)
            .fold((Complex64::new(1.0, 0.0), 1.0), |(p, a), (_, z)| (p * z, a * z.norm()))
    };
    let a = matrix[(0, 0)] - lambda;
    let (p_all, m_all) = prod_except(None);
    let mut value = a * p_all;
    let mut scale = a.norm() * m_all;
    for k in 1..dim {
        let gg = matrix[(0, k)] * matrix[(k, 0)];
        let (p, m) = prod_except(Some(k - 1));
        value -= gg * p;
        scale += gg.norm() * m;
    }
    if scale == 0.0 {
        0.0
    } else {
        value.norm() / scale
    }
}

/// Newton correction `|f / f'|` of `lambda` for the pole form of the secular
/// equation, `f = H_00 - lambda - sum_k H_0k H_k0 / (H_kk - lambda)`. Stays
/// meaningful when a tiny coupling puts `lambda` within rounding of `H_kk`,
/// where the product form of `arrowhead_residual` loses all relative accuracy.
pub fn secular_newton_step(matrix: &CMatrix, lambda: Complex64) -> f64 {
    let mut f = matrix[(0, 0)] - lambda;
    let mut fp = Complex64::new(-1.0, 0.0);
    for k in 1..matrix.nrows() {
        let d = matrix[(k, k)] - lambda;
        let gg = matrix[(0, k)] * matrix[(k, 0)];
        if gg == ZERO {
            continue;
        }
        if d == ZERO {
            // f / f' -> d at the pole
            return 0.0;
        }
        f -= gg / d;
        fp -= gg / (d * d);
    }
    (f / fp).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn emitter(gamma0: f64) -> EmitterSpec {
        EmitterSpec {
            hbar_omega0: 2.9,
            d_eg: 1.0,
            eta: 1.0,
            hbar_gamma0: gamma0,
        }
    }

    fn random_modes(rng: &mut ChaCha8Rng, n: usize) -> Vec<ModeParams> {
        (1..=n)
            .map(|k| {
                ModeParams::lorentzian(
                    k,
                    rng.gen_range(2.6..3.2),
                    rng.gen_range(0.02..0.2),
                    rng.gen_range(0.005..0.08),
                )
            })
            .collect()
    }

    #[test]
    fn uncoupled_eigenvalues_are_diagonal() {
        let modes = vec![ModeParams::lorentzian(1, 3.0, 0.05, 0.0)];
        let h = build_standard(&modes, &emitter(1e-3)).unwrap();
        let set = eigendecompose(&h).unwrap();
        let mut diag: Vec<Complex64> = (0..2).map(|i| h.matrix[(i, i)]).collect();
        diag.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (a, b) in set.eigenvalues.iter().zip(&diag) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn two_level_closed_form() {
        let (g, gam) = (0.05, 0.08);
        let modes = vec![ModeParams::lorentzian(1, 2.9, gam, g)];
        let set = eigendecompose(&build_standard(&modes, &emitter(0.0)).unwrap()).unwrap();
        let root = Complex64::new(g * g - gam * gam / 16.0, 0.0).sqrt();
        let base = Complex64::new(0.0, -gam / 4.0);
        let mut exact = [base - root, base + root];
        exact.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (a, b) in set.eigenvalues.iter().zip(&exact) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn biorthogonality_and_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let h = build_standard(&random_modes(&mut rng, 8), &emitter(1e-3)).unwrap();
            let set = eigendecompose(&h).unwrap();
            let o = set.overlap_matrix();
            let err = (o - CMatrix::identity(9, 9))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-10, "biorthogonality {err}");
            let tr: Complex64 = set.eigenvalues.iter().sum();
            assert!((tr - h.matrix.trace()).norm() < 1e-10);
            for l in &set.eigenvalues {
                assert!(arrowhead_residual(&h.matrix, *l) < 1e-8);
                assert!(secular_newton_step(&h.matrix, *l) < 1e-13);
                assert!(l.im <= 1e-15);
            }
        }
    }

    #[test]
    fn newton_step_stays_small_for_nearly_decoupled_modes() {
        let em = emitter(1e-8);
        let modes: Vec<ModeParams> = (0..6)
            .map(|k| ModeParams::lorentzian(k + 1, 2.9 + 0.001 * k as f64, 0.05, 1e-7).against(&em))
            .collect();
        let h = build_standard(&modes, &em).unwrap();
        let set = eigendecompose(&h).unwrap();
        for l in &set.eigenvalues {
            assert!(secular_newton_step(&h.matrix, *l) < 1e-13);
        }
        let shifted = set.eigenvalues[0] + Complex64::new(1e-6, 0.0);
        assert!(secular_newton_step(&h.matrix, shifted) > 1e-7);
    }

    #[test]
    fn fano_with_zero_alpha_is_standard() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut modes = random_modes(&mut rng, 4);
        for m in &mut modes {
            m.alpha = Some(0.0);
        }
        let em = emitter(1e-3);
        assert_eq!(
            build_fano(&modes, &em, FanoVariant::General).unwrap().matrix,
            build_standard(&modes, &em).unwrap().matrix
        );
    }

    #[test]
    fn fano_needs_alpha() {
        let modes = vec![ModeParams::lorentzian(1, 2.9, 0.1, 0.01)];
        assert!(matches!(
            build_fano(&modes, &emitter(1e-3), FanoVariant::General),
            Err(Error::IncompleteModes { .. })
        ));
    }

    #[test]
    fn spectral_matches_rk_and_norm_decreases() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..3 {
            let h = build_standard(&random_modes(&mut rng, 6), &emitter(0.01)).unwrap();
            let set = eigendecompose(&h).unwrap();
            let slowest = set
                .eigenvalues
                .iter()
                .map(|l| -2.0 * l.im)
                .fold(f64::INFINITY, f64::min);
            let tmax = 10.0 * HBAR_EV_FS / slowest;
            let times: Vec<f64> = (0..=40).map(|i| tmax * i as f64 / 40.0).collect();
            let psi0 = AmplitudeState::excited(6);
            let a = evolve_spectral(&set, &psi0, &times);
            let opts = OdeOptions {
                rtol: 1e-11,
                atol: 1e-14,
                ..Default::default()
            };
            let b = evolve_rk(&h, &psi0, &times, &opts).unwrap();
            let mut prev = f64::INFINITY;
            for (x, y) in a.iter().zip(&b) {
                let d = (x.to_vector() - y.to_vector()).camax();
                assert!(d < 1e-8, "deviation {d}");
                assert!(x.norm_sqr() <= prev + 1e-12);
                prev = x.norm_sqr();
            }
            assert!((a[0].c_e - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn bare_emitter_decay() {
        let modes = vec![ModeParams::lorentzian(1, 3.0, 0.05, 0.0)];
        let h = build_standard(&modes, &emitter(0.002)).unwrap();
        let out = evolve(&h, &AmplitudeState::excited(1), &[0.0, 100.0, 500.0]).unwrap();
        for s in out {
            assert!((s.c_e.norm_sqr() - (-0.002 * s.t / HBAR_EV_FS).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn sum_rule_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let h = build_standard(&random_modes(&mut rng, 3), &emitter(0.01)).unwrap();
        let set = eigendecompose(&h).unwrap();
        // E - E0 = tan(u) maps the real line onto (-pi/2, pi/2)
        let n = 400_000;
        let du = std::f64::consts::PI / n as f64;
        let grid: Vec<f64> = (0..n)
            .map(|i| 2.9 + (-std::f64::consts::FRAC_PI_2 + (i as f64 + 0.5) * du).tan())
            .collect();
        let p = polarization_from_set(&set, 2.9, &grid);
        let integral: f64 = grid
            .iter()
            .zip(&p.values)
            .map(|(e, v)| v * (1.0 + (e - 2.9).powi(2)) * du)
            .sum::<f64>()
            / (2.0 * std::f64::consts::PI);
        let closed = polarization_sum_rule(&set);
        assert!((integral / closed - 1.0).abs() < 1e-4, "{integral} vs {closed}");
    }

    #[test]
    fn solve_route_matches_residues() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let h = build_standard(&random_modes(&mut rng, 4), &emitter(0.01)).unwrap();
        let set = eigendecompose(&h).unwrap();
        let grid = [2.5, 2.8, 2.95, 3.3];
        let p = polarization_from_set(&set, 2.9, &grid);
        for (e, v) in grid.iter().zip(&p.values) {
            let c = frequency_amplitudes(&h, &AmplitudeState::excited(4), *e).unwrap();
            assert!((c[0].norm_sqr() / v - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn sign_gauge_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let modes = random_modes(&mut rng, 5);
        let h = build_standard(&modes, &emitter(0.01)).unwrap();
        let mut flipped = h.clone();
        for k in [2, 4] {
            flipped.matrix[(0, k)] = -flipped.matrix[(0, k)];
            flipped.matrix[(k, 0)] = -flipped.matrix[(k, 0)];
        }
        let times = [0.0, 5.0, 20.0, 80.0];
        let a = evolve(&h, &AmplitudeState::excited(5), &times).unwrap();
        let b = evolve(&flipped, &AmplitudeState::excited(5), &times).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.c_e.norm_sqr() - y.c_e.norm_sqr()).abs() < 1e-10);
            for (p, q) in x.c_n.iter().zip(&y.c_n) {
                assert!((p.norm_sqr() - q.norm_sqr()).abs() < 1e-10);
            }
        }
    }
}
