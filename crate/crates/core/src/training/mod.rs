//! Gradient-descent fitting of coin schedules to unitaries and 2-outcome
//! POVMs.
//!
//! The per-state loss is `½‖U_{T,0}Ψ − VΨ‖²`. With `Ψ^(t) = U_{t,0}Ψ` and
//! `Φ^(t) = U_{T,t}†VΨ`, its derivative with respect to a coin parameter at
//! `(x, t)` is `Im⟨Φ^(t)| G ⊗ |x⟩⟨x| |Ψ^(t)⟩`, where `∂c/∂p = c · iG`. One
//! forward sweep and one backward sweep give every partial derivative.

mod hadamard;
mod model;
pub mod sampling;
mod trainer;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::walk::{max_abs_diff, UnitaryMatrix};
use crate::{Error, Result};

pub use hadamard::hadamard_test_gradient;
pub use model::WalkModel;
pub use trainer::{sgd_step, train, TrainConfig, TrainRecord, TrainTrace};

/// Real parameters laid out as `(t, x, j)`, `j` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterTensor {
    steps: usize,
    sites: usize,
    per_site: usize,
    values: Vec<f64>,
}

impl ParameterTensor {
    pub fn zeros(steps: usize, sites: usize, per_site: usize) -> Self {
        Self {
            steps,
            sites,
            per_site,
            values: vec![0.0; steps * sites * per_site],
        }
    }

    pub fn from_values(
        steps: usize,
        sites: usize,
        per_site: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        let expected = steps * sites * per_site;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: values.len(),
            });
        }
        Ok(Self {
            steps,
            sites,
            per_site,
            values,
        })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.steps, self.sites, self.per_site)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn offset(&self, t: usize, x: usize, j: usize) -> usize {
        (t * self.sites + x) * self.per_site + j
    }

    pub fn get(&self, t: usize, x: usize, j: usize) -> f64 {
        self.values[self.offset(t, x, j)]
    }

    pub fn set(&mut self, t: usize, x: usize, j: usize, value: f64) {
        let k = self.offset(t, x, j);
        self.values[k] = value;
    }

    /// Parameters of the coin at `(t, x)`.
    #[inline]
    pub fn site(&self, t: usize, x: usize) -> &[f64] {
        let k = self.offset(t, x, 0);
        &self.values[k..k + self.per_site]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    fn check_same_shape(&self, other: &ParameterTensor) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }
}

/// Two Kraus operators on the `n`-dimensional site space with
/// `M0†M0 + M1†M1 = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm2 {
    m: [DMatrix<C64>; 2],
}

impl Povm2 {
    pub fn new(m0: DMatrix<C64>, m1: DMatrix<C64>) -> Result<Self> {
        let n = m0.nrows();
        for m in [&m0, &m1] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.ncols().max(m.nrows()),
                });
            }
        }
        let deviation = completeness_defect(&m0, &m1);
        if deviation > 1e-10 {
            return Err(Error::InvalidPovm { deviation });
        }
        Ok(Self { m: [m0, m1] })
    }

    /// `M_j = ⟨j|_c W |0⟩_c`, i.e. the blocks `W[j·n.., 0..n]` in coin-major order.
    pub fn from_block_column(w: &DMatrix<C64>, sites: usize) -> Self {
        let m = [0, 1].map(|j| w.view((j * sites, 0), (sites, sites)).into_owned());
        Self { m }
    }

    pub fn sites(&self) -> usize {
        self.m[0].nrows()
    }

    pub fn operator(&self, j: usize) -> &DMatrix<C64> {
        &self.m[j]
    }

    pub fn completeness_defect(&self) -> f64 {
        completeness_defect(&self.m[0], &self.m[1])
    }
}

fn completeness_defect(m0: &DMatrix<C64>, m1: &DMatrix<C64>) -> f64 {
    let sum = m0.adjoint() * m0 + m1.adjoint() * m1;
    max_abs_diff(&sum, &DMatrix::identity(m0.nrows(), m0.ncols()))
}

/// What a walk is trained to reproduce.
#[derive(Clone, Debug, PartialEq)]
pub enum TargetOp {
    Unitary(UnitaryMatrix),
    Povm2(Povm2),
}

impl TargetOp {
    /// Validates the target against a `2n`-dimensional walk.
    pub fn check_sites(&self, sites: usize) -> Result<()> {
        let (expected, found) = match self {
            TargetOp::Unitary(v) => (2 * sites, v.dim()),
            TargetOp::Povm2(p) => (sites, p.sites()),
        };
        if expected != found {
            return Err(Error::DimensionMismatch { expected, found });
        }
        Ok(())
    }
}

/// `sqrt(1 − |tr(U V†)/d|²)`, insensitive to global phase.
///
/// Evaluated as `sqrt(s(2 − s))` with `s = 1 − |tr(V†U)|/d = ‖U − e^{iθ}V‖²_F/(2d)`
/// and `θ = arg tr(V†U)`, which avoids the cancellation in `1 − |z|²` and
/// keeps the result accurate well below `1e-8`.
pub fn distance_unitary(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    let tr = hs_inner(v.matrix(), u.matrix());
    let phase = if tr.norm() > 0.0 {
        tr / tr.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    let residual: f64 = u
        .matrix()
        .iter()
        .zip(v.matrix().iter())
        .map(|(a, b)| (a - phase * b).norm_sqr())
        .sum();
    let s = (residual / (2.0 * u.dim() as f64)).clamp(0.0, 1.0);
    Ok((s * (2.0 - s)).clamp(0.0, 1.0).sqrt())
}

/// `tr(A† B)`.
fn hs_inner(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `1/(2n√2) Σ_j sqrt(tr²(M_j†M_j) + tr²(N_j†N_j) − 2|tr(N_j†M_j)|²)`,
/// insensitive to a separate phase on each outcome.
///
/// The radicand is evaluated as `(a − b)² + 2b‖M − (⟨N,M⟩/b)N‖²` with
/// `a = ‖M‖²`, `b = ‖N‖²` (Lagrange identity), avoiding cancellation.
pub fn distance_povm(n: [&DMatrix<C64>; 2], m: [&DMatrix<C64>; 2]) -> Result<f64> {
    let sites = m[0].nrows();
    for op in n.iter().chain(m.iter()) {
        if op.nrows() != sites || op.ncols() != sites {
            return Err(Error::DimensionMismatch {
                expected: sites,
                found: op.nrows(),
            });
        }
    }
    let mut total = 0.0;
    for j in 0..2 {
        let a = hs_inner(m[j], m[j]).re;
        let b = hs_inner(n[j], n[j]).re;
        let gram = if b > 0.0 {
            let coef = hs_inner(n[j], m[j]) / b;
            let residual: f64 = m[j]
                .iter()
                .zip(n[j].iter())
                .map(|(mk, nk)| (mk - coef * nk).norm_sqr())
                .sum();
            b * residual
        } else {
            0.0
        };
        total += ((a - b) * (a - b) + 2.0 * gram).max(0.0).sqrt();
    }
    Ok(total / (2.0 * sites as f64 * std::f64::consts::SQRT_2))
}

/// Haar average of the per-state loss: `1 − Re tr(V†U)/d`.
pub fn mean_loss_unitary(u: &UnitaryMatrix, v: &UnitaryMatrix) -> f64 {
    1.0 - hs_inner(v.matrix(), u.matrix()).re / u.dim() as f64
}

/// Haar average of the POVM loss: `1 − Re Σ_j tr(M_j†N_j)/n`.
pub fn mean_loss_povm(n: [&DMatrix<C64>; 2], m: [&DMatrix<C64>; 2]) -> f64 {
    let sites = m[0].nrows() as f64;
    1.0 - (0..2).map(|j| hs_inner(m[j], n[j]).re).sum::<f64>() / sites
}
