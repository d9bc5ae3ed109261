//! Random inputs and targets: Haar states, Haar unitaries, POVMs cut from
//! Haar isometries, the QFT matrix, and deterministic RNG sub-streams.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::training::Povm2;
use crate::walk::UnitaryMatrix;

/// Sub-stream used for parameter initialization.
pub const STREAM_INIT: u64 = 0;
/// Sub-stream used for the per-update training states.
pub const STREAM_STATES: u64 = 1;
/// Sub-stream used for phase and axis-noise tables.
pub const STREAM_TABLES: u64 = 2;
/// Sub-stream used for random targets.
pub const STREAM_TARGET: u64 = 3;

/// Independent ChaCha stream `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-sample seed derived from a master seed (SplitMix64 finalizer).
pub fn sample_seed(master: u64, sample: u64) -> u64 {
    let mut z = master ^ sample.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random pure state: a normalized complex Gaussian vector.
pub fn haar_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    assert!(dim >= 1, "state dimension must be positive");
    loop {
        let mut v: Vec<C64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-300 {
            v.iter_mut().for_each(|z| *z /= norm);
            return v;
        }
    }
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitaryMatrix {
    assert!(dim >= 1, "unitary dimension must be positive");
    let g = DMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for row in 0..dim {
            q[(row, k)] *= phase;
        }
    }
    UnitaryMatrix::from_unitary(q)
}

/// 2-outcome POVM on `n` sites taken from the first block column of a Haar
/// unitary on `C^2 ⊗ C^n`: `M_j = ⟨j|_c W |0⟩_c`.
pub fn haar_povm<R: Rng + ?Sized>(sites: usize, rng: &mut R) -> Povm2 {
    let w = haar_unitary(2 * sites, rng);
    Povm2::from_block_column(w.matrix(), sites)
}

/// Unitary DFT, `F[j,k] = exp(2πi jk/d)/√d`.
pub fn qft(dim: usize) -> UnitaryMatrix {
    let scale = 1.0 / (dim as f64).sqrt();
    UnitaryMatrix::from_unitary(DMatrix::from_fn(dim, dim, |j, k| {
        let angle = TAU * ((j * k) % dim) as f64 / dim as f64;
        C64::from_polar(scale, angle)
    }))
}

/// Uniform initial angles on `[−2π, 2π]`.
pub fn uniform_angles<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<f64> {
    (0..count).map(|_| rng.random_range(-TAU..=TAU)).collect()
}
