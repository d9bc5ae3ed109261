use num_complex::Complex64 as C64;
use rand::Rng;

use super::sampling::uniform_angles;
use super::{distance_povm, distance_unitary, mean_loss_povm, mean_loss_unitary};
use super::{ParameterTensor, Povm2, TargetOp};
use crate::coins::CoinModel;
use crate::mat2::Mat2;
use crate::walk::{
    full_unitary, norm_sqr, step_adjoint_in_place, step_in_place, CoinLayer, CoinOperator,
    CoinSchedule, UnitaryMatrix, WalkSpec, WalkerState,
};
use crate::{Error, Result};

/// A trainable `steps`-layer walk: geometry plus coin parameterization.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkModel {
    spec: WalkSpec,
    steps: usize,
    coins: CoinModel,
}

impl WalkModel {
    pub fn new(spec: WalkSpec, steps: usize, coins: CoinModel) -> Result<Self> {
        coins.validate(steps, spec.sites())?;
        Ok(Self { spec, steps, coins })
    }

    pub fn spec(&self) -> &WalkSpec {
        &self.spec
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn coins(&self) -> &CoinModel {
        &self.coins
    }

    pub fn params_per_site(&self) -> usize {
        self.coins.params_per_site()
    }

    pub fn param_count(&self) -> usize {
        self.steps * self.spec.sites() * self.params_per_site()
    }

    pub fn zero_params(&self) -> ParameterTensor {
        ParameterTensor::zeros(self.steps, self.spec.sites(), self.params_per_site())
    }

    /// Independent angles, uniform on `[−2π, 2π]`.
    pub fn random_params<R: Rng + ?Sized>(&self, rng: &mut R) -> ParameterTensor {
        let values = uniform_angles(self.param_count(), rng);
        ParameterTensor::from_values(
            self.steps,
            self.spec.sites(),
            self.params_per_site(),
            values,
        )
        .expect("length matches by construction")
    }

    pub fn check_params(&self, params: &ParameterTensor) -> Result<()> {
        let expected = (self.steps, self.spec.sites(), self.params_per_site());
        if params.shape() != expected {
            return Err(Error::DimensionMismatch {
                expected: self.param_count(),
                found: params.len(),
            });
        }
        Ok(())
    }

    pub fn schedule(&self, params: &ParameterTensor) -> Result<CoinSchedule> {
        self.check_params(params)?;
        let n = self.spec.sites();
        let layers = (0..self.steps)
            .map(|t| {
                let coins = (0..n)
                    .map(|x| self.coins.realize(t, x, params.site(t, x)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(CoinLayer::new(coins))
            })
            .collect::<Result<Vec<_>>>()?;
        CoinSchedule::new(n, layers)
    }

    pub fn unitary(&self, params: &ParameterTensor) -> Result<UnitaryMatrix> {
        full_unitary(&self.schedule(params)?, &self.spec)
    }

    /// The 2-outcome POVM `N_j = ⟨j|_c U |0⟩_c` implemented by the walk.
    pub fn povm(&self, params: &ParameterTensor) -> Result<Povm2> {
        Ok(Povm2::from_block_column(
            self.unitary(params)?.matrix(),
            self.spec.sites(),
        ))
    }

    /// Phase-invariant distance between the walk and `target`.
    pub fn distance(&self, params: &ParameterTensor, target: &TargetOp) -> Result<f64> {
        target.check_sites(self.spec.sites())?;
        match target {
            TargetOp::Unitary(v) => distance_unitary(&self.unitary(params)?, v),
            TargetOp::Povm2(m) => {
                let p = self.povm(params)?;
                distance_povm(
                    [p.operator(0), p.operator(1)],
                    [m.operator(0), m.operator(1)],
                )
            }
        }
    }

    /// Loss averaged over Haar-random input states.
    pub fn mean_loss(&self, params: &ParameterTensor, target: &TargetOp) -> Result<f64> {
        target.check_sites(self.spec.sites())?;
        Ok(match target {
            TargetOp::Unitary(v) => mean_loss_unitary(&self.unitary(params)?, v),
            TargetOp::Povm2(m) => {
                let p = self.povm(params)?;
                mean_loss_povm(
                    [p.operator(0), p.operator(1)],
                    [m.operator(0), m.operator(1)],
                )
            }
        })
    }

    /// `½‖U Ψ − V Ψ‖²`.
    pub fn loss(
        &self,
        params: &ParameterTensor,
        psi: &WalkerState,
        target: &UnitaryMatrix,
    ) -> Result<f64> {
        let (start, goal) = self.unitary_endpoints(psi, target)?;
        self.check_params(params)?;
        let mut ws = Workspace::new(self);
        Ok(ws.forward_loss(self, params, &start, &goal))
    }

    pub fn loss_and_grad(
        &self,
        params: &ParameterTensor,
        psi: &WalkerState,
        target: &UnitaryMatrix,
    ) -> Result<(f64, ParameterTensor)> {
        let (start, goal) = self.unitary_endpoints(psi, target)?;
        self.check_params(params)?;
        let mut ws = Workspace::new(self);
        let mut grad = self.zero_params();
        let loss = ws.loss_and_grad(self, params, &start, &goal, grad.values_mut());
        Ok((loss, grad))
    }

    pub fn grad(
        &self,
        params: &ParameterTensor,
        psi: &WalkerState,
        target: &UnitaryMatrix,
    ) -> Result<ParameterTensor> {
        Ok(self.loss_and_grad(params, psi, target)?.1)
    }

    /// `½ Σ_j ‖⟨j|_c U |0⟩_c ψ − M_j ψ‖²` for a position-space state `ψ`.
    pub fn povm_loss(&self, params: &ParameterTensor, psi: &[C64], target: &Povm2) -> Result<f64> {
        let (start, goal) = self.povm_endpoints(psi, target)?;
        self.check_params(params)?;
        let mut ws = Workspace::new(self);
        Ok(ws.forward_loss(self, params, &start, &goal))
    }

    pub fn povm_loss_and_grad(
        &self,
        params: &ParameterTensor,
        psi: &[C64],
        target: &Povm2,
    ) -> Result<(f64, ParameterTensor)> {
        let (start, goal) = self.povm_endpoints(psi, target)?;
        self.check_params(params)?;
        let mut ws = Workspace::new(self);
        let mut grad = self.zero_params();
        let loss = ws.loss_and_grad(self, params, &start, &goal, grad.values_mut());
        Ok((loss, grad))
    }

    pub fn povm_grad(
        &self,
        params: &ParameterTensor,
        psi: &[C64],
        target: &Povm2,
    ) -> Result<ParameterTensor> {
        Ok(self.povm_loss_and_grad(params, psi, target)?.1)
    }

    fn unitary_endpoints(
        &self,
        psi: &WalkerState,
        target: &UnitaryMatrix,
    ) -> Result<(Vec<C64>, Vec<C64>)> {
        if psi.dim() != self.spec.dim() || target.dim() != self.spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.spec.dim(),
                found: if psi.dim() != self.spec.dim() {
                    psi.dim()
                } else {
                    target.dim()
                },
            });
        }
        Ok((psi.amplitudes().to_vec(), target.apply(psi.amplitudes())))
    }

    fn povm_endpoints(&self, psi: &[C64], target: &Povm2) -> Result<(Vec<C64>, Vec<C64>)> {
        let n = self.spec.sites();
        if psi.len() != n || target.sites() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if psi.len() != n {
                    psi.len()
                } else {
                    target.sites()
                },
            });
        }
        let norm = norm_sqr(psi);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm_sqr: norm });
        }
        Ok(povm_endpoints(psi, target))
    }
}

/// `Ψ = |0⟩_c ⊗ ψ` and `Φ = Σ_j |j⟩_c ⊗ M_j ψ`.
pub(crate) fn povm_endpoints(psi: &[C64], target: &Povm2) -> (Vec<C64>, Vec<C64>) {
    let n = psi.len();
    let mut start = vec![C64::new(0.0, 0.0); 2 * n];
    start[..n].copy_from_slice(psi);
    let mut goal = Vec::with_capacity(2 * n);
    for j in 0..2 {
        let m = target.operator(j);
        goal.extend((0..n).map(|r| (0..n).map(|c| m[(r, c)] * psi[c]).sum::<C64>()));
    }
    (start, goal)
}

/// Reusable buffers for repeated forward/backward sweeps of one model.
pub(crate) struct Workspace {
    coins: Vec<CoinOperator>,
    gens: Vec<[Mat2; 4]>,
    forward: Vec<C64>,
    back: Vec<C64>,
}

impl Workspace {
    pub(crate) fn new(model: &WalkModel) -> Self {
        let cells = model.steps * model.spec.sites();
        let dim = model.spec.dim();
        Self {
            coins: vec![CoinOperator::identity(); cells],
            gens: vec![[Mat2::zero(); 4]; cells],
            forward: vec![C64::new(0.0, 0.0); (model.steps + 1) * dim],
            back: vec![C64::new(0.0, 0.0); dim],
        }
    }

    fn realize(&mut self, model: &WalkModel, params: &ParameterTensor) {
        let n = model.spec.sites();
        for t in 0..model.steps {
            for x in 0..n {
                let k = t * n + x;
                self.coins[k] =
                    model
                        .coins
                        .realize_with_generators(t, x, params.site(t, x), &mut self.gens[k]);
            }
        }
    }

    /// Fills the forward states `Ψ^(0..=T)` and returns the loss.
    fn forward_loss(
        &mut self,
        model: &WalkModel,
        params: &ParameterTensor,
        start: &[C64],
        goal: &[C64],
    ) -> f64 {
        self.realize(model, params);
        self.sweep_forward(model, start);
        let dim = model.spec.dim();
        let last = &self.forward[model.steps * dim..];
        0.5 * last
            .iter()
            .zip(goal)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
    }

    fn sweep_forward(&mut self, model: &WalkModel, start: &[C64]) {
        let n = model.spec.sites();
        let dim = model.spec.dim();
        self.forward[..dim].copy_from_slice(start);
        for t in 0..model.steps {
            let (done, rest) = self.forward.split_at_mut((t + 1) * dim);
            let next = &mut rest[..dim];
            next.copy_from_slice(&done[t * dim..]);
            step_in_place(next, &self.coins[t * n..(t + 1) * n], &model.spec);
        }
    }

    /// Loss and `∂L/∂p = Im⟨Φ^(t)| G ⊗ |x⟩⟨x| |Ψ^(t)⟩`, written into `grad`.
    pub(crate) fn loss_and_grad(
        &mut self,
        model: &WalkModel,
        params: &ParameterTensor,
        start: &[C64],
        goal: &[C64],
        grad: &mut [f64],
    ) -> f64 {
        let loss = self.forward_loss(model, params, start, goal);
        let n = model.spec.sites();
        let dim = model.spec.dim();
        let k = model.params_per_site();
        self.back.copy_from_slice(goal);
        for t in (0..model.steps).rev() {
            step_adjoint_in_place(&mut self.back, &self.coins[t * n..(t + 1) * n], &model.spec);
            let psi = &self.forward[t * dim..(t + 1) * dim];
            for x in 0..n {
                let psi_x = [psi[x], psi[n + x]];
                let phi_x = [self.back[x], self.back[n + x]];
                let cell = t * n + x;
                for j in 0..k {
                    grad[cell * k + j] = self.gens[cell][j].sandwich(phi_x, psi_x).im;
                }
            }
        }
        loss
    }

    #[cfg(test)]
    fn forward_state(&self, t: usize, dim: usize) -> &[C64] {
        &self.forward[t * dim..(t + 1) * dim]
    }
}
