//! Exact-compilation round trips over Haar-random targets.

use cyclewalk::synthesis::realize_unitary_exact;
use cyclewalk::training::distance_unitary;
use cyclewalk::training::sampling::{haar_unitary, stream_rng, STREAM_TARGET};
use cyclewalk::walk::full_unitary;
use cyclewalk::{UnitaryMatrix, WalkSpec};
use serde::Serialize;

use crate::error::Result;
use crate::report::SpecEcho;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SynthesisReport {
    pub spec: SpecEcho,
    pub seed: u64,
    pub trials: usize,
    pub max_distance: f64,
    /// Layer count of each realized schedule, in trial order.
    pub schedule_lengths: Vec<usize>,
}

/// Compiles `trials` Haar unitaries and measures how well each schedule
/// reproduces its target.
pub fn run_synthesis_check(spec: &WalkSpec, trials: usize, seed: u64) -> Result<SynthesisReport> {
    let mut rng = stream_rng(seed, STREAM_TARGET);
    let targets: Vec<UnitaryMatrix> = (0..trials)
        .map(|_| haar_unitary(spec.dim(), &mut rng))
        .collect();
    check_targets(spec, &targets, seed)
}

/// Same as [`run_synthesis_check`] for caller-supplied targets.
pub fn check_targets(
    spec: &WalkSpec,
    targets: &[UnitaryMatrix],
    seed: u64,
) -> Result<SynthesisReport> {
    let mut max_distance = 0.0f64;
    let mut schedule_lengths = Vec::with_capacity(targets.len());
    for v in targets {
        let schedule = realize_unitary_exact(v, spec)?;
        let d = distance_unitary(&full_unitary(&schedule, spec)?, v)?;
        max_distance = max_distance.max(d);
        schedule_lengths.push(schedule.steps());
    }
    Ok(SynthesisReport {
        spec: SpecEcho {
            n: spec.sites(),
            delta0: spec.delta0(),
            delta1: spec.delta1(),
        },
        seed,
        trials: targets.len(),
        max_distance,
        schedule_lengths,
    })
}
