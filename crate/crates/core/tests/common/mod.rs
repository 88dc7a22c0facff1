//! Random parameter draws shared by the integration tests.

use num_complex::Complex64;
use plasmon_core::coupling::ModeParams;
use plasmon_core::medium::EmitterSpec;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random single-excitation system: emitter plus `1..=5` Fano-resolved modes.
pub fn random_system(rng: &mut ChaCha8Rng) -> (EmitterSpec, Vec<ModeParams>) {
    let n = rng.gen_range(1..=5);
    let em = EmitterSpec {
        hbar_omega0: 2.9,
        d_eg: 1.0,
        eta: rng.gen_range(0.5..1.0),
        hbar_gamma0: rng.gen_range(2e-3..1e-2),
    };
    let budget = em.eta * em.hbar_gamma0 * rng.gen_range(0.3..0.9);
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let modes = weights
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let gr: f64 = rng.gen_range(0.02..0.15);
            let gnr: f64 = rng.gen_range(0.01..0.08);
            let g: f64 = rng.gen_range(0.005..0.04);
            let g0n = budget * w / total;
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            ModeParams {
                n: k + 1,
                hbar_omega_n: rng.gen_range(2.7..3.1),
                hbar_gamma: gr + gnr,
                hbar_gamma_rad: Some(gr),
                hbar_gamma_nr: Some(gnr),
                hbar_g: g,
                alpha: Some(sign * (g0n * gr).sqrt() / g),
                hbar_gamma0n_rad: Some(g0n),
                fit_residual: 0.0,
                detuning: 0.0,
            }
            .against(&em)
        })
        .collect();
    (em, modes)
}

pub fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}
