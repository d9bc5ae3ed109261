//! Coin parameterizations.
//!
//! Every model maps a handful of real parameters at layer `t`, site `x` to a
//! unitary coin `c(p)`, together with Hermitian generators `G_j` satisfying
//! `∂c/∂p_j = c · iG_j`. The generators are what the gradient needs.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::mat2::Mat2;
use crate::walk::CoinOperator;
use crate::{Error, Result};

/// `(α0, α1, α2, α3)` of the general coin `e^{iα3σ3} e^{iα2σ2} e^{iα1σ1} e^{iα0}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoinAngles(pub [f64; 4]);

pub fn realize_full(angles: &CoinAngles) -> CoinOperator {
    let [a0, a1, a2, a3] = angles.0;
    let m = Mat2::exp_i_pauli(a3, 3)
        * Mat2::exp_i_pauli(a2, 2)
        * Mat2::exp_i_pauli(a1, 1)
        * Mat2::phase(a0);
    CoinOperator::from_unitary(m)
}

/// Unit 4-vectors `n̂_j` (σ0 component first) with `∂c/∂α_j = c · i(n̂_j·σ⃗)`
/// for the general coin. Only `α1` and `α2` enter.
pub fn full_generator_axes(alpha1: f64, alpha2: f64) -> [[f64; 4]; 4] {
    let (s1, c1) = (2.0 * alpha1).sin_cos();
    let (s2, c2) = (2.0 * alpha2).sin_cos();
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, c1, s1],
        [0.0, s2, -c2 * s1, c2 * c1],
    ]
}

/// Per-site phases `a^(x)`, fixed for a whole training run.
#[derive(Clone, Debug, PartialEq)]
pub struct SitePhaseTable(pub Vec<f64>);

impl SitePhaseTable {
    /// Phases drawn uniformly from `[0, 2π)`.
    pub fn sample<R: Rng + ?Sized>(sites: usize, rng: &mut R) -> Self {
        Self((0..sites).map(|_| rng.random_range(0.0..TAU)).collect())
    }

    pub fn sites(&self) -> usize {
        self.0.len()
    }

    pub fn phase(&self, x: usize) -> f64 {
        self.0[x]
    }
}

/// Per-layer, per-site perturbation of the rotation axis (row-major `t * n + x`).
#[derive(Clone, Debug, PartialEq)]
pub struct AxisNoiseTable {
    steps: usize,
    sites: usize,
    theta: Vec<f64>,
    phi: Vec<f64>,
}

impl AxisNoiseTable {
    pub fn new(steps: usize, sites: usize, theta: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        let len = steps * sites;
        if theta.len() != len || phi.len() != len {
            return Err(Error::Config(format!(
                "axis noise table needs {len} entries, got theta={} phi={}",
                theta.len(),
                phi.len()
            )));
        }
        Ok(Self {
            steps,
            sites,
            theta,
            phi,
        })
    }

    /// `θ ~ N(0, theta_std²)`, `φ ~ U[0, 2π)`.
    pub fn sample<R: Rng + ?Sized>(
        steps: usize,
        sites: usize,
        theta_std: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let normal = Normal::new(0.0, theta_std)
            .map_err(|e| Error::Config(format!("bad axis noise deviation {theta_std}: {e}")))?;
        let len = steps * sites;
        let mut theta = Vec::with_capacity(len);
        let mut phi = Vec::with_capacity(len);
        for _ in 0..len {
            theta.push(normal.sample(rng));
            phi.push(rng.random_range(0.0..TAU));
        }
        Self::new(steps, sites, theta, phi)
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn angles(&self, t: usize, x: usize) -> (f64, f64) {
        let k = t * self.sites + x;
        (self.theta[k], self.phi[k])
    }

    /// Rotation axis over `(σ1, σ2, σ3)`: `(cos θ, sin θ cos φ, sin θ sin φ)`.
    pub fn axis(&self, t: usize, x: usize) -> [f64; 3] {
        let (theta, phi) = self.angles(t, x);
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        [ct, st * cp, st * sp]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VariantKind {
    Full,
    FixedPhase,
    XRotation,
    NoisyAxis,
    Correlated,
}

impl VariantKind {
    pub const ALL: [VariantKind; 5] = [
        VariantKind::Full,
        VariantKind::FixedPhase,
        VariantKind::XRotation,
        VariantKind::NoisyAxis,
        VariantKind::Correlated,
    ];

    /// Trainable reals per site per layer.
    pub fn params_per_site(self) -> usize {
        match self {
            VariantKind::Full => 4,
            VariantKind::FixedPhase => 3,
            VariantKind::XRotation | VariantKind::NoisyAxis | VariantKind::Correlated => 1,
        }
    }

    pub fn needs_phases(self) -> bool {
        self != VariantKind::Full
    }

    pub fn needs_axis_noise(self) -> bool {
        self == VariantKind::NoisyAxis
    }

    pub fn name(self) -> &'static str {
        match self {
            VariantKind::Full => "full",
            VariantKind::FixedPhase => "fixed-phase",
            VariantKind::XRotation => "x-rotation",
            VariantKind::NoisyAxis => "noisy-axis",
            VariantKind::Correlated => "correlated",
        }
    }
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VariantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        VariantKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown coin variant `{s}`")))
    }
}

/// Number of trainable reals in a `T`-layer walk on `n` sites.
pub fn parameter_count(kind: VariantKind, steps: usize, sites: usize) -> usize {
    kind.params_per_site() * steps * sites
}

/// A coin parameterization together with the fixed tables it needs.
#[derive(Clone, Debug, PartialEq)]
pub enum CoinModel {
    /// `e^{iα3σ3} e^{iα2σ2} e^{iα1σ1} e^{iα0}`.
    Full,
    /// `e^{ia(x)} e^{iα3σ3} e^{iα2σ2} e^{iα1σ1}`; parameters `(α1, α2, α3)`.
    FixedPhase { phases: SitePhaseTable },
    /// `e^{ia(x)} e^{iασ1}`.
    XRotation { phases: SitePhaseTable },
    /// `e^{ia(x)} e^{iα(n̂(x,t)·σ⃗)}` with a perturbed axis `n̂`.
    NoisyAxis {
        phases: SitePhaseTable,
        noise: AxisNoiseTable,
    },
    /// `e^{i(a(x) + α)} e^{iασ1}`.
    Correlated { phases: SitePhaseTable },
}

impl CoinModel {
    /// Assembles a model from its tag and whichever tables were supplied.
    pub fn build(
        kind: VariantKind,
        phases: Option<SitePhaseTable>,
        noise: Option<AxisNoiseTable>,
    ) -> Result<Self> {
        let need_phases = || {
            phases
                .clone()
                .ok_or_else(|| Error::Config(format!("variant `{kind}` needs a site phase table")))
        };
        Ok(match kind {
            VariantKind::Full => CoinModel::Full,
            VariantKind::FixedPhase => CoinModel::FixedPhase {
                phases: need_phases()?,
            },
            VariantKind::XRotation => CoinModel::XRotation {
                phases: need_phases()?,
            },
            VariantKind::Correlated => CoinModel::Correlated {
                phases: need_phases()?,
            },
            VariantKind::NoisyAxis => CoinModel::NoisyAxis {
                phases: need_phases()?,
                noise: noise.ok_or_else(|| {
                    Error::Config("variant `noisy-axis` needs an axis noise table".into())
                })?,
            },
        })
    }

    pub fn kind(&self) -> VariantKind {
        match self {
            CoinModel::Full => VariantKind::Full,
            CoinModel::FixedPhase { .. } => VariantKind::FixedPhase,
            CoinModel::XRotation { .. } => VariantKind::XRotation,
            CoinModel::NoisyAxis { .. } => VariantKind::NoisyAxis,
            CoinModel::Correlated { .. } => VariantKind::Correlated,
        }
    }

    pub fn params_per_site(&self) -> usize {
        self.kind().params_per_site()
    }

    pub fn phases(&self) -> Option<&SitePhaseTable> {
        match self {
            CoinModel::Full => None,
            CoinModel::FixedPhase { phases }
            | CoinModel::XRotation { phases }
            | CoinModel::NoisyAxis { phases, .. }
            | CoinModel::Correlated { phases } => Some(phases),
        }
    }

    /// Checks table shapes against a `steps × sites` walk.
    pub fn validate(&self, steps: usize, sites: usize) -> Result<()> {
        if let Some(p) = self.phases() {
            if p.sites() != sites {
                return Err(Error::Config(format!(
                    "phase table has {} sites, walk has {sites}",
                    p.sites()
                )));
            }
        }
        if let CoinModel::NoisyAxis { noise, .. } = self {
            if noise.steps() != steps || noise.sites() != sites {
                return Err(Error::Config(format!(
                    "axis noise table is {}×{}, walk is {steps}×{sites}",
                    noise.steps(),
                    noise.sites()
                )));
            }
        }
        Ok(())
    }

    /// Coin at layer `t`, site `x` for the given per-site parameters.
    pub fn realize(&self, t: usize, x: usize, params: &[f64]) -> Result<CoinOperator> {
        if params.len() != self.params_per_site() {
            return Err(Error::DimensionMismatch {
                expected: self.params_per_site(),
                found: params.len(),
            });
        }
        let mut gens = [Mat2::zero(); 4];
        Ok(self.realize_with_generators(t, x, params, &mut gens))
    }

    /// Coin plus generators `G_j` (`∂c/∂p_j = c · iG_j`) written to `gens[..k]`.
    #[inline]
    pub(crate) fn realize_with_generators(
        &self,
        t: usize,
        x: usize,
        params: &[f64],
        gens: &mut [Mat2; 4],
    ) -> CoinOperator {
        match self {
            CoinModel::Full => {
                let angles = CoinAngles([params[0], params[1], params[2], params[3]]);
                for (g, axis) in gens
                    .iter_mut()
                    .zip(full_generator_axes(params[1], params[2]))
                {
                    *g = Mat2::pauli_combination(axis);
                }
                realize_full(&angles)
            }
            CoinModel::FixedPhase { phases } => {
                let angles = CoinAngles([phases.phase(x), params[0], params[1], params[2]]);
                let axes = full_generator_axes(params[0], params[1]);
                for j in 0..3 {
                    gens[j] = Mat2::pauli_combination(axes[j + 1]);
                }
                realize_full(&angles)
            }
            CoinModel::XRotation { phases } => {
                gens[0] = Mat2::sigma_x();
                CoinOperator::from_unitary(
                    Mat2::phase(phases.phase(x)) * Mat2::exp_i_pauli(params[0], 1),
                )
            }
            CoinModel::NoisyAxis { phases, noise } => {
                let axis = noise.axis(t, x);
                gens[0] = Mat2::pauli_combination([0.0, axis[0], axis[1], axis[2]]);
                CoinOperator::from_unitary(
                    Mat2::phase(phases.phase(x)) * Mat2::exp_i_axis(params[0], axis),
                )
            }
            CoinModel::Correlated { phases } => {
                gens[0] = Mat2::identity() + Mat2::sigma_x();
                CoinOperator::from_unitary(
                    Mat2::phase(phases.phase(x) + params[0]) * Mat2::exp_i_pauli(params[0], 1),
                )
            }
        }
    }

    /// Hermitian generators at `(t, x)`, one per parameter.
    pub fn generators(&self, t: usize, x: usize, params: &[f64]) -> Result<Vec<Mat2>> {
        self.realize(t, x, params)?;
        let mut gens = [Mat2::zero(); 4];
        self.realize_with_generators(t, x, params, &mut gens);
        Ok(gens[..self.params_per_site()].to_vec())
    }
}
