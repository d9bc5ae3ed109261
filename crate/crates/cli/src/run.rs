//! Fan-out of independent trainers over a rayon pool.

use std::f64::consts::{PI, TAU};

use cyclewalk::training::sampling::{
    haar_povm, haar_unitary, qft, sample_seed, stream_rng, STREAM_TABLES, STREAM_TARGET,
};
use cyclewalk::training::train;
use cyclewalk::{AxisNoiseTable, CoinModel, SitePhaseTable, TargetOp, TrainConfig};
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::preset::{ExperimentPreset, TablePolicy, TargetKind};
use crate::report::{RunReport, SampleResult};

/// Trains every sample of `preset`; results are ordered by sample id.
pub fn run_preset(preset: &ExperimentPreset, threads: Option<usize>) -> Result<RunReport> {
    preset.validate()?;
    let shared = match preset.phases {
        TablePolicy::Shared => Some(SitePhaseTable::sample(
            preset.spec.sites(),
            &mut stream_rng(preset.seed, STREAM_TABLES),
        )),
        TablePolicy::Independent => None,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| CliError::Pool(e.to_string()))?;
    let samples = pool.install(|| {
        (0..preset.samples)
            .into_par_iter()
            .map(|id| run_sample(preset, id, shared.as_ref()))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(RunReport::new(preset, samples))
}

/// Runs `base` once per layer count with the same master seed, so sample `i`
/// sees the same target, tables and input states at every depth.
pub fn run_sweep(
    base: &ExperimentPreset,
    depths: &[usize],
    threads: Option<usize>,
) -> Result<Vec<RunReport>> {
    if depths.is_empty() {
        return Err(CliError::Validation(
            "sweep needs at least one layer count".into(),
        ));
    }
    depths
        .iter()
        .map(|&steps| {
            let preset = ExperimentPreset {
                name: format!("{}@T{steps}", base.name),
                steps,
                ..base.clone()
            };
            run_preset(&preset, threads)
        })
        .collect()
}

/// One trainer with its own RNG streams derived from `(seed, id)`.
pub fn run_sample(
    preset: &ExperimentPreset,
    id: usize,
    shared: Option<&SitePhaseTable>,
) -> Result<SampleResult> {
    let seed = sample_seed(preset.seed, id as u64);
    let n = preset.spec.sites();
    let target = match &preset.target {
        TargetKind::Qft => TargetOp::Unitary(qft(preset.spec.dim())),
        TargetKind::HaarUnitary => TargetOp::Unitary(haar_unitary(
            preset.spec.dim(),
            &mut stream_rng(seed, STREAM_TARGET),
        )),
        TargetKind::HaarPovm => TargetOp::Povm2(haar_povm(n, &mut stream_rng(seed, STREAM_TARGET))),
        TargetKind::Custom(v) => TargetOp::Unitary(v.clone()),
    };

    let mut tables = stream_rng(seed, STREAM_TABLES);
    let phases = preset.variant.needs_phases().then(|| match shared {
        Some(p) => p.clone(),
        None => SitePhaseTable::sample(n, &mut tables),
    });
    let noise = if preset.variant.needs_axis_noise() {
        Some(AxisNoiseTable::sample(
            preset.steps,
            n,
            preset.noise_std,
            &mut tables,
        )?)
    } else {
        None
    };
    let phase_difference = phases.as_ref().map(|p| wrap_angle(p.phase(0) - p.phase(1)));
    let coins = CoinModel::build(preset.variant, phases, noise)?;

    let config = TrainConfig {
        eta: preset.eta,
        steps: preset.steps,
        max_updates: preset.max_updates,
        eval_every: preset.eval_every,
        seed,
        coins,
        stop_distance: preset.stop_distance,
    };
    let trace = train(&config, &preset.spec, &target, None)?;
    Ok(SampleResult {
        id,
        final_distance: trace.final_distance,
        updates_run: trace.updates_run,
        records: trace.records,
        phase_difference,
    })
}

/// Maps an angle to `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}
