use cyclewalk::synthesis::realize_unitary_exact;
use cyclewalk::training::sampling::{haar_state, haar_unitary, qft, stream_rng};
use cyclewalk::training::{distance_unitary, train};
use cyclewalk::walk::full_unitary;
use cyclewalk::{
    CoinModel, TargetOp, TrainConfig, UnitaryMatrix, WalkModel, WalkSpec, WalkerState, C64,
};
use nalgebra::DMatrix;

/// Dense `S^T C_T ⋯ S C_1` built from explicit block matrices, sharing no
/// code with the in-place stepper.
fn dense_walk(model: &WalkModel, params: &cyclewalk::ParameterTensor) -> DMatrix<C64> {
    let spec = model.spec();
    let (n, d) = (spec.sites(), spec.dim());
    let schedule = model.schedule(params).unwrap();
    let mut shift = DMatrix::zeros(d, d);
    for c in 0..2 {
        for x in 0..n {
            let to = (x as i64 + spec.delta(c)).rem_euclid(n as i64) as usize;
            shift[(c * n + to, c * n + x)] = C64::new(1.0, 0.0);
        }
    }
    let mut total = DMatrix::identity(d, d);
    for t in 0..model.steps() {
        let mut coin = DMatrix::zeros(d, d);
        for x in 0..n {
            let m = schedule.coin(t, x).matrix();
            for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                coin[(r * n + x, c * n + x)] = m.m[r][c];
            }
        }
        total = &shift * coin * total;
    }
    total
}

#[test]
fn model_unitary_matches_dense_oracle() {
    for (n, steps, seed) in [(2, 5, 1), (3, 4, 2), (5, 3, 3)] {
        let model =
            WalkModel::new(WalkSpec::new(n, 1, -1).unwrap(), steps, CoinModel::Full).unwrap();
        let params = model.random_params(&mut stream_rng(seed, 0));
        let oracle = dense_walk(&model, &params);
        let got = model.unitary(&params).unwrap();
        let diff = (got.matrix() - oracle)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12, "n={n}: {diff}");
    }
}

#[test]
fn synthesized_schedule_acts_like_its_target_on_states() {
    let spec = WalkSpec::cycle(3).unwrap();
    let v = haar_unitary(6, &mut stream_rng(9, 3));
    let schedule = realize_unitary_exact(&v, &spec).unwrap();
    let u = full_unitary(&schedule, &spec).unwrap();
    let psi = haar_state(6, &mut stream_rng(9, 1));
    let (a, b) = (u.apply(&psi), v.apply(&psi));
    let overlap: C64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
    assert!(1.0 - overlap.norm() < 1e-10);
    assert!(distance_unitary(&u, &v).unwrap() < 1e-8);
}

#[test]
fn qft_on_two_sites_is_learned_quickly() {
    let spec = WalkSpec::cycle(2).unwrap();
    let target = TargetOp::Unitary(qft(4));
    let mut hits = 0;
    for seed in 0..20 {
        let mut config = TrainConfig::new(0.05, 8, seed, CoinModel::Full);
        config.max_updates = 50_000;
        config.stop_distance = 1e-3;
        let trace = train(&config, &spec, &target, None).unwrap();
        hits += usize::from(trace.final_distance < 1e-3);
    }
    assert!(hits >= 18, "{hits} of 20 seeds reached 1e-3");
}

#[test]
fn deeper_walk_trains_at_least_as_well_on_matched_seeds() {
    let spec = WalkSpec::cycle(2).unwrap();
    let target = TargetOp::Unitary(qft(4));
    let median_final = |steps| {
        let mut finals: Vec<f64> = (0..9)
            .map(|seed| {
                let mut config = TrainConfig::new(0.01, steps, seed, CoinModel::Full);
                config.max_updates = 20_000;
                train(&config, &spec, &target, None).unwrap().final_distance
            })
            .collect();
        finals.sort_by(f64::total_cmp);
        finals[4]
    };
    assert!(median_final(10) <= median_final(4));
}

#[test]
fn basis_state_walk_preserves_norm_over_long_runs() {
    let spec = WalkSpec::cycle(20).unwrap();
    let model = WalkModel::new(spec, 500, CoinModel::Full).unwrap();
    let params = model.random_params(&mut stream_rng(4, 0));
    let u: UnitaryMatrix = model.unitary(&params).unwrap();
    assert!(u.unitarity_defect() < 1e-10);
    let out = u.apply(WalkerState::basis(&spec, 1, 7).amplitudes());
    let norm: f64 = out.iter().map(|z| z.norm_sqr()).sum();
    assert!((norm - 1.0).abs() < 1e-12);
}
