use num_complex::Complex64 as C64;
use rand_chacha::ChaCha8Rng;

use super::model::{povm_endpoints, Workspace};
use super::sampling::{haar_state, stream_rng, STREAM_INIT, STREAM_STATES};
use super::{ParameterTensor, TargetOp, WalkModel};
use crate::coins::CoinModel;
use crate::walk::WalkSpec;
use crate::{Error, Result};

/// Settings for one stochastic-gradient run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub eta: f64,
    pub steps: usize,
    pub max_updates: u64,
    pub eval_every: u64,
    pub seed: u64,
    pub coins: CoinModel,
    /// Stop once the evaluated distance drops below this; `0` runs the full budget.
    pub stop_distance: f64,
}

impl TrainConfig {
    pub const DEFAULT_MAX_UPDATES: u64 = 100_000;
    pub const DEFAULT_EVAL_EVERY: u64 = 100;

    pub fn new(eta: f64, steps: usize, seed: u64, coins: CoinModel) -> Self {
        Self {
            eta,
            steps,
            max_updates: Self::DEFAULT_MAX_UPDATES,
            eval_every: Self::DEFAULT_EVAL_EVERY,
            seed,
            coins,
            stop_distance: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.eta
            )));
        }
        if self.max_updates == 0 || self.eval_every == 0 {
            return Err(Error::Config(
                "max_updates and eval_every must be positive".into(),
            ));
        }
        if !(self.stop_distance.is_finite() && self.stop_distance >= 0.0) {
            return Err(Error::Config(format!(
                "stop distance must be non-negative, got {}",
                self.stop_distance
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainRecord {
    pub update: u64,
    /// Loss averaged over Haar-random inputs.
    pub loss: f64,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainTrace {
    pub records: Vec<TrainRecord>,
    pub params: ParameterTensor,
    pub updates_run: u64,
    pub final_distance: f64,
}

/// `α ← α − η ∂L/∂α`.
pub fn sgd_step(params: &mut ParameterTensor, grad: &ParameterTensor, eta: f64) -> Result<()> {
    params.check_same_shape(grad)?;
    for (p, g) in params.values_mut().iter_mut().zip(grad.values()) {
        *p -= eta * g;
    }
    Ok(())
}

/// Fits the walk to `target` with one fresh Haar-random input per update.
///
/// Without `init`, parameters are drawn uniformly from `[−2π, 2π]`.
pub fn train(
    config: &TrainConfig,
    spec: &WalkSpec,
    target: &TargetOp,
    init: Option<ParameterTensor>,
) -> Result<TrainTrace> {
    config.validate()?;
    target.check_sites(spec.sites())?;
    let model = WalkModel::new(*spec, config.steps, config.coins.clone())?;
    let mut params = match init {
        Some(p) => {
            model.check_params(&p)?;
            p
        }
        None => model.random_params(&mut stream_rng(config.seed, STREAM_INIT)),
    };
    let mut states = stream_rng(config.seed, STREAM_STATES);
    let mut ws = Workspace::new(&model);
    let mut grad = model.zero_params();
    let mut records = Vec::new();

    let evaluate = |params: &ParameterTensor, update: u64| -> Result<TrainRecord> {
        let record = TrainRecord {
            update,
            loss: model.mean_loss(params, target)?,
            distance: model.distance(params, target)?,
        };
        if !(record.loss.is_finite() && record.distance.is_finite()) {
            return Err(Error::NonFinite {
                update,
                what: "evaluation",
            });
        }
        Ok(record)
    };

    let first = evaluate(&params, 0)?;
    records.push(first);
    let mut last = first;
    let mut update = 0;
    while update < config.max_updates && last.distance >= config.stop_distance {
        let (start, goal) = draw_pair(target, spec, &mut states);
        let loss = ws.loss_and_grad(&model, &params, &start, &goal, grad.values_mut());
        update += 1;
        if !loss.is_finite() || !grad.is_finite() {
            return Err(Error::NonFinite {
                update,
                what: "gradient",
            });
        }
        sgd_step(&mut params, &grad, config.eta)?;
        if update % config.eval_every == 0 {
            last = evaluate(&params, update)?;
            records.push(last);
        }
    }

    let final_distance = if last.update == update {
        last.distance
    } else {
        model.distance(&params, target)?
    };
    Ok(TrainTrace {
        records,
        params,
        updates_run: update,
        final_distance,
    })
}

/// A Haar input and the state the target maps it to.
fn draw_pair(target: &TargetOp, spec: &WalkSpec, rng: &mut ChaCha8Rng) -> (Vec<C64>, Vec<C64>) {
    match target {
        TargetOp::Unitary(v) => {
            let psi = haar_state(spec.dim(), rng);
            let goal = v.apply(&psi);
            (psi, goal)
        }
        TargetOp::Povm2(m) => povm_endpoints(&haar_state(spec.sites(), rng), m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::training::sampling::{qft, stream_rng};

    #[test]
    fn sgd_step_examples() {
        let mut p = ParameterTensor::from_values(1, 1, 3, vec![1.0, -2.0, 0.5]).unwrap();
        let zero = ParameterTensor::zeros(1, 1, 3);
        sgd_step(&mut p, &zero, 0.3).unwrap();
        assert_eq!(p.values(), &[1.0, -2.0, 0.5]);

        let g = p.clone();
        sgd_step(&mut p, &g, 1.0).unwrap();
        assert_eq!(p.values(), &[0.0, 0.0, 0.0]);

        let mut p = ParameterTensor::from_values(1, 1, 2, vec![0.3, 0.3]).unwrap();
        let g = ParameterTensor::from_values(1, 1, 2, vec![0.2, 0.0]).unwrap();
        sgd_step(&mut p, &g, 0.05).unwrap();
        assert!((p.values()[0] - 0.29).abs() < 1e-15);
        assert_eq!(p.values()[1], 0.3);

        assert!(sgd_step(&mut p, &ParameterTensor::zeros(1, 2, 1), 0.1).is_err());
    }

    #[test]
    fn exact_start_stops_immediately() {
        let spec = WalkSpec::cycle(2).unwrap();
        let model = WalkModel::new(spec, 3, CoinModel::Full).unwrap();
        let init = model.random_params(&mut stream_rng(1, 0));
        let target = TargetOp::Unitary(model.unitary(&init).unwrap());
        let mut config = TrainConfig::new(0.05, 3, 1, CoinModel::Full);
        config.stop_distance = 1e-9;
        let trace = train(&config, &spec, &target, Some(init.clone())).unwrap();
        assert_eq!(trace.updates_run, 0);
        assert_eq!(trace.records.len(), 1);
        assert!(trace.records[0].distance < 1e-12);
        assert_eq!(trace.params, init);
    }

    #[test]
    fn record_count_follows_budget() {
        let spec = WalkSpec::cycle(2).unwrap();
        let mut config = TrainConfig::new(0.05, 2, 3, CoinModel::Full);
        config.max_updates = 250;
        config.eval_every = 100;
        let trace = train(&config, &spec, &TargetOp::Unitary(qft(4)), None).unwrap();
        assert_eq!(trace.records.len(), 3);
        assert_eq!(trace.updates_run, 250);
        let updates: Vec<u64> = trace.records.iter().map(|r| r.update).collect();
        assert_eq!(updates, [0, 100, 200]);
    }

    #[test]
    fn runs_are_reproducible() {
        let spec = WalkSpec::cycle(2).unwrap();
        let mut config = TrainConfig::new(0.05, 4, 9, CoinModel::Full);
        config.max_updates = 300;
        let a = train(&config, &spec, &TargetOp::Unitary(qft(4)), None).unwrap();
        let b = train(&config, &spec, &TargetOp::Unitary(qft(4)), None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn training_reduces_distance() {
        let spec = WalkSpec::cycle(2).unwrap();
        let mut config = TrainConfig::new(0.05, 8, 4, CoinModel::Full);
        config.max_updates = 3000;
        let trace = train(&config, &spec, &TargetOp::Unitary(qft(4)), None).unwrap();
        assert!(trace.final_distance < trace.records[0].distance);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let spec = WalkSpec::cycle(2).unwrap();
        let target = TargetOp::Unitary(qft(4));
        let base = TrainConfig::new(0.05, 2, 0, CoinModel::Full);
        for broken in [
            TrainConfig {
                eta: 0.0,
                ..base.clone()
            },
            TrainConfig {
                eta: f64::NAN,
                ..base.clone()
            },
            TrainConfig {
                max_updates: 0,
                ..base.clone()
            },
            TrainConfig {
                eval_every: 0,
                ..base.clone()
            },
            TrainConfig {
                stop_distance: -1.0,
                ..base.clone()
            },
        ] {
            assert!(matches!(
                train(&broken, &spec, &target, None),
                Err(Error::Config(_))
            ));
        }
        assert!(train(&base, &WalkSpec::cycle(3).unwrap(), &target, None).is_err());
    }
}
