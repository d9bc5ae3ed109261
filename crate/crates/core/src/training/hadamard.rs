use num_complex::Complex64 as C64;

use super::{ParameterTensor, WalkModel};
use crate::mat2::Mat2;
use crate::walk::{evolve, CoinOperator, UnitaryMatrix, WalkerState};
use crate::{Error, Result};

/// Reads `∂L/∂p_j^(x,t)` off a simulated ancilla interferometer.
///
/// The ancilla starts in `(|0⟩ + |1⟩)/√2`; the `|0⟩` branch receives `V`, the
/// `|1⟩` branch receives `U_{T,t} Σ U_{t,0}` with the unitary insertion
/// `Σ = G ⊗ |x⟩⟨x| ± (I − |x⟩⟨x|)`. After `S†` and `H` on the ancilla,
/// `⟨σ3⟩ = Im⟨VΨ| U_{T,t} Σ U_{t,0} |Ψ⟩`. The `±` halves of the off-site part
/// cancel, so the mean of the two readouts is the gradient. The generator
/// must itself be unitary, which excludes the correlated variant.
pub fn hadamard_test_gradient(
    model: &WalkModel,
    params: &ParameterTensor,
    psi: &WalkerState,
    target: &UnitaryMatrix,
    (j, x, t): (usize, usize, usize),
) -> Result<f64> {
    let spec = model.spec();
    if x >= spec.sites() || t >= model.steps() || j >= model.params_per_site() {
        return Err(Error::Config(format!(
            "parameter ({j}, {x}, {t}) is outside a {}-step, {}-site, {}-parameter walk",
            model.steps(),
            spec.sites(),
            model.params_per_site()
        )));
    }
    if target.dim() != spec.dim() || psi.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: if target.dim() != spec.dim() {
                target.dim()
            } else {
                psi.dim()
            },
        });
    }
    let generator = model.coins().generators(t, x, params.site(t, x))?[j];
    let deviation = generator.unitarity_defect();
    if deviation > 1e-12 {
        return Err(Error::NotUnitary { deviation });
    }
    let schedule = model.schedule(params)?;
    let reference = target.apply(psi.amplitudes());
    let before = evolve(psi, &schedule, spec, 0, t)?;

    let readouts = [1.0, -1.0].map(|sign| {
        let inserted = insert(&before, &generator, x, sign);
        let branch =
            evolve(&inserted, &schedule, spec, t, model.steps()).map(WalkerState::into_amplitudes);
        branch.map(|b| ancilla_sigma_z(&reference, &b))
    });
    let [plus, minus] = readouts;
    Ok(0.5 * (plus? + minus?))
}

/// `G` on site `x`, `sign · I` on every other site.
fn insert(state: &WalkerState, generator: &Mat2, x: usize, sign: f64) -> WalkerState {
    let n = state.dim() / 2;
    let mut amps: Vec<C64> = state.amplitudes().iter().map(|a| a * sign).collect();
    let [lo, hi] = generator.apply([state.amplitudes()[x], state.amplitudes()[n + x]]);
    amps[x] = lo;
    amps[n + x] = hi;
    WalkerState::from_amplitudes(amps).expect("unitary insertion preserves the norm")
}

/// `⟨σ3⟩` of the ancilla after `S†` then `H`, for branches `|0⟩a + |1⟩b` (over √2).
fn ancilla_sigma_z(a: &[C64], b: &[C64]) -> f64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let s_dagger = Mat2::new([
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
    ]);
    let gate = *CoinOperator::hadamard().matrix() * s_dagger;
    a.iter()
        .zip(b)
        .map(|(&ak, &bk)| {
            let [up, down] = gate.apply([ak * h, bk * h]);
            up.norm_sqr() - down.norm_sqr()
        })
        .sum()
}
