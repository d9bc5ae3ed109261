//! Discrete-time quantum walks on a cycle graph as programmable unitaries.
//!
//! A walker lives in `C^2 ⊗ C^n` (coin ⊗ site). One step applies a
//! site-dependent 2×2 coin and then shifts coin sector `c` by `delta_c`
//! sites. A stack of `T` coin layers (a [`CoinSchedule`]) therefore defines
//! a `2n × 2n` unitary, and this crate provides two ways to pick the coins:
//!
//! * [`synthesis`] builds an exact schedule for any target unitary by
//!   two-level decomposition and a meet-point construction.
//! * [`training`] fits parameterized coins to a target unitary or a
//!   2-outcome POVM by stochastic gradient descent with analytic gradients.
//!
//! All matrices use the coin-major basis ordering `i = c * n + x`.

pub mod coins;
mod error;
pub mod mat2;
pub mod synthesis;
pub mod training;
pub mod walk;

pub use coins::{AxisNoiseTable, CoinAngles, CoinModel, SitePhaseTable, VariantKind};
pub use error::{Error, Result};
pub use mat2::Mat2;
pub use num_complex::Complex64 as C64;
pub use synthesis::{MeetPoint, TwoLevelUnitary};
pub use training::{
    ParameterTensor, Povm2, TargetOp, TrainConfig, TrainRecord, TrainTrace, WalkModel,
};
pub use walk::{CoinLayer, CoinOperator, CoinSchedule, UnitaryMatrix, WalkSpec, WalkerState};
