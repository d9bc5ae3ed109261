//! The walk itself: cycle geometry, walker states, coin layers, the
//! conditional shift, and assembly of the total `2n × 2n` unitary.
//!
//! Evolution acts in place on amplitude slices: a coin layer is `n`
//! independent 2×2 products and the shift is an index rotation within each
//! coin sector. Dense `2n × 2n` products only appear in tests.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use num_integer::Integer;

use crate::mat2::Mat2;
use crate::{Error, Result};

/// Tolerance used when validating coin unitarity.
pub const COIN_UNITARY_TOL: f64 = 1e-12;
/// Tolerance used when validating `2n × 2n` unitaries.
pub const UNITARY_TOL: f64 = 1e-10;

/// Cycle size and the per-coin shift offsets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WalkSpec {
    n: usize,
    delta0: i64,
    delta1: i64,
}

impl WalkSpec {
    pub fn new(n: usize, delta0: i64, delta1: i64) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewSites(n));
        }
        Ok(Self { n, delta0, delta1 })
    }

    /// `n` sites with the default shifts `δ0 = 0`, `δ1 = 1`.
    pub fn cycle(n: usize) -> Result<Self> {
        Self::new(n, 0, 1)
    }

    /// Shifts of the conventional Hadamard walk, `δ_c = 1 − 2c`.
    pub fn hadamard(n: usize) -> Result<Self> {
        Self::new(n, 1, -1)
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    /// Hilbert space dimension `2n`.
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn delta0(&self) -> i64 {
        self.delta0
    }

    pub fn delta1(&self) -> i64 {
        self.delta1
    }

    pub fn delta(&self, coin: usize) -> i64 {
        if coin == 0 {
            self.delta0
        } else {
            self.delta1
        }
    }

    /// `gcd(|δ0 − δ1|, n)`; equals `n` when the shifts coincide.
    pub fn offset_gcd(&self) -> usize {
        let diff = (self.delta0 - self.delta1).unsigned_abs() as usize;
        diff.gcd(&self.n)
    }

    /// True when every unitary on the `2n`-dimensional space is reachable.
    pub fn is_universal(&self) -> bool {
        self.delta0 != self.delta1 && self.offset_gcd() == 1
    }

    /// `(x + k) mod n`, always in `0..n`.
    #[inline]
    pub fn wrap(&self, x: i64) -> usize {
        x.rem_euclid(self.n as i64) as usize
    }

    /// Site reached from `x` after `steps` shifts with coin `c`.
    #[inline]
    pub fn advance(&self, coin: usize, x: usize, steps: i64) -> usize {
        self.wrap(x as i64 + steps * self.delta(coin))
    }

    /// Coin-major basis index `c·n + x`.
    #[inline]
    pub fn index(&self, coin: usize, x: usize) -> usize {
        coin * self.n + x
    }

    /// Inverse of [`WalkSpec::index`].
    #[inline]
    pub fn label(&self, i: usize) -> (usize, usize) {
        (i / self.n, i % self.n)
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }
}

/// Unitary 2×2 coin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoinOperator(Mat2);

impl CoinOperator {
    /// Validates unitarity to `1e-12`.
    pub fn new(m: Mat2) -> Result<Self> {
        let deviation = m.unitarity_defect();
        if deviation > COIN_UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self(m))
    }

    /// Caller guarantees unitarity (e.g. a product of exponentials of Paulis).
    pub(crate) fn from_unitary(m: Mat2) -> Self {
        Self(m)
    }

    pub fn identity() -> Self {
        Self(Mat2::identity())
    }

    pub fn sigma_x() -> Self {
        Self(Mat2::sigma_x())
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self(Mat2::new([
            [C64::new(h, 0.0), C64::new(h, 0.0)],
            [C64::new(h, 0.0), C64::new(-h, 0.0)],
        ]))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn then(&self, later: &CoinOperator) -> Self {
        Self(later.0 * self.0)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.0.max_abs_diff(&Mat2::identity()) <= tol
    }
}

/// One coin per site.
#[derive(Clone, Debug, PartialEq)]
pub struct CoinLayer {
    coins: Vec<CoinOperator>,
}

impl CoinLayer {
    pub fn new(coins: Vec<CoinOperator>) -> Self {
        Self { coins }
    }

    pub fn identity(n: usize) -> Self {
        Self::uniform(n, CoinOperator::identity())
    }

    pub fn uniform(n: usize, coin: CoinOperator) -> Self {
        Self {
            coins: vec![coin; n],
        }
    }

    pub fn sites(&self) -> usize {
        self.coins.len()
    }

    pub fn coins(&self) -> &[CoinOperator] {
        &self.coins
    }

    pub fn coin(&self, x: usize) -> &CoinOperator {
        &self.coins[x]
    }

    pub fn set(&mut self, x: usize, coin: CoinOperator) {
        self.coins[x] = coin;
    }
}

/// `T` coin layers over `n` sites. Layer `t` is applied before the `t`-th shift.
#[derive(Clone, Debug, PartialEq)]
pub struct CoinSchedule {
    n: usize,
    layers: Vec<CoinLayer>,
}

impl CoinSchedule {
    pub fn new(n: usize, layers: Vec<CoinLayer>) -> Result<Self> {
        for layer in &layers {
            if layer.sites() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: layer.sites(),
                });
            }
        }
        Ok(Self { n, layers })
    }

    pub fn identity(n: usize, steps: usize) -> Self {
        Self {
            n,
            layers: vec![CoinLayer::identity(n); steps],
        }
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn steps(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[CoinLayer] {
        &self.layers
    }

    pub fn layer(&self, t: usize) -> &CoinLayer {
        &self.layers[t]
    }

    pub fn coin(&self, t: usize, x: usize) -> &CoinOperator {
        self.layers[t].coin(x)
    }

    pub fn set(&mut self, t: usize, x: usize, coin: CoinOperator) {
        self.layers[t].set(x, coin);
    }

    /// Runs `self` first, then `later`.
    pub fn extend(&mut self, later: CoinSchedule) {
        assert_eq!(self.n, later.n, "schedules on different cycles");
        self.layers.extend(later.layers);
    }

    fn check_sites(&self, spec: &WalkSpec) -> Result<()> {
        if self.n != spec.sites() {
            return Err(Error::DimensionMismatch {
                expected: spec.sites(),
                found: self.n,
            });
        }
        Ok(())
    }
}

/// Pure walker state, `2n` amplitudes in coin-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkerState {
    amps: Vec<C64>,
}

impl WalkerState {
    /// Accepts any vector whose squared norm is 1 within `1e-10`.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let norm_sqr = norm_sqr(&amps);
        if (norm_sqr - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { amps })
    }

    pub fn basis(spec: &WalkSpec, coin: usize, x: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); spec.dim()];
        amps[spec.index(coin, x)] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn basis_index(dim: usize, i: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[i] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    pub fn amplitude(&self, spec: &WalkSpec, coin: usize, x: usize) -> C64 {
        self.amps[spec.index(coin, x)]
    }

    pub fn inner(&self, other: &WalkerState) -> C64 {
        inner(&self.amps, &other.amps)
    }
}

#[inline]
pub(crate) fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `⟨a|b⟩`.
#[inline]
pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Applies `coins[x]` to the coin pair at each site `x`.
#[inline]
pub(crate) fn coin_layer_in_place(amps: &mut [C64], coins: &[CoinOperator]) {
    let n = coins.len();
    let (lo, hi) = amps.split_at_mut(n);
    for (x, coin) in coins.iter().enumerate() {
        let [a, b] = coin.0.apply([lo[x], hi[x]]);
        lo[x] = a;
        hi[x] = b;
    }
}

/// Applies `coins[x]†` at each site.
#[inline]
pub(crate) fn coin_layer_adjoint_in_place(amps: &mut [C64], coins: &[CoinOperator]) {
    let n = coins.len();
    let (lo, hi) = amps.split_at_mut(n);
    for (x, coin) in coins.iter().enumerate() {
        let m = &coin.0.m;
        let (a, b) = (lo[x], hi[x]);
        lo[x] = m[0][0].conj() * a + m[1][0].conj() * b;
        hi[x] = m[0][1].conj() * a + m[1][1].conj() * b;
    }
}

/// `|c, x⟩ → |c, x + power·δ_c⟩`; negative powers apply the inverse shift.
#[inline]
pub(crate) fn shift_in_place(amps: &mut [C64], spec: &WalkSpec, power: i64) {
    let n = spec.sites();
    for coin in 0..2 {
        let k = spec.wrap(power * spec.delta(coin));
        if k != 0 {
            amps[coin * n..(coin + 1) * n].rotate_right(k);
        }
    }
}

/// One forward step `S C^(t)`.
#[inline]
pub(crate) fn step_in_place(amps: &mut [C64], coins: &[CoinOperator], spec: &WalkSpec) {
    coin_layer_in_place(amps, coins);
    shift_in_place(amps, spec, 1);
}

/// Inverse step `(S C^(t))† = C^(t)† S†`.
#[inline]
pub(crate) fn step_adjoint_in_place(amps: &mut [C64], coins: &[CoinOperator], spec: &WalkSpec) {
    shift_in_place(amps, spec, -1);
    coin_layer_adjoint_in_place(amps, coins);
}

pub fn apply_coin_layer(state: &WalkerState, layer: &CoinLayer) -> Result<WalkerState> {
    if state.dim() != 2 * layer.sites() {
        return Err(Error::DimensionMismatch {
            expected: 2 * layer.sites(),
            found: state.dim(),
        });
    }
    let mut amps = state.amps.clone();
    coin_layer_in_place(&mut amps, &layer.coins);
    Ok(WalkerState { amps })
}

pub fn apply_shift(state: &WalkerState, spec: &WalkSpec) -> Result<WalkerState> {
    spec.check_dim(state.dim())?;
    let mut amps = state.amps.clone();
    shift_in_place(&mut amps, spec, 1);
    Ok(WalkerState { amps })
}

/// `U_{t1,t0} |state⟩`: layers `t0..t1` in time order.
pub fn evolve(
    state: &WalkerState,
    schedule: &CoinSchedule,
    spec: &WalkSpec,
    t0: usize,
    t1: usize,
) -> Result<WalkerState> {
    schedule.check_sites(spec)?;
    spec.check_dim(state.dim())?;
    if t0 > t1 || t1 > schedule.steps() {
        return Err(Error::StepRange {
            t0,
            t1,
            steps: schedule.steps(),
        });
    }
    let mut amps = state.amps.clone();
    for layer in &schedule.layers[t0..t1] {
        step_in_place(&mut amps, &layer.coins, spec);
    }
    Ok(WalkerState { amps })
}

/// Dense `2n × 2n` unitary matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(DMatrix<C64>);

impl UnitaryMatrix {
    /// Validates `V†V = I` to `1e-10`.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let deviation = unitarity_defect(&m);
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self(m))
    }

    /// Validating constructor from `dim²` entries in row-major order.
    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub(crate) fn from_unitary(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// The shift operator `S` raised to `power` (negative allowed).
    pub fn shift(spec: &WalkSpec, power: i64) -> Self {
        let dim = spec.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for coin in 0..2 {
            for x in 0..spec.sites() {
                let to = spec.index(coin, spec.advance(coin, x, power));
                m[(to, spec.index(coin, x))] = C64::new(1.0, 0.0);
            }
        }
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Matrix product `self · rhs` (apply `rhs` first).
    pub fn mul(&self, rhs: &UnitaryMatrix) -> Self {
        Self(&self.0 * &rhs.0)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (c, vc) in v.iter().enumerate() {
            if *vc == C64::new(0.0, 0.0) {
                continue;
            }
            for (r, o) in out.iter_mut().enumerate() {
                *o += self.0[(r, c)] * vc;
            }
        }
        out
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.0)
    }

    /// Largest entrywise modulus of the difference.
    pub fn max_abs_diff(&self, other: &UnitaryMatrix) -> f64 {
        max_abs_diff(&self.0, &other.0)
    }
}

pub(crate) fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub(crate) fn unitarity_defect(m: &DMatrix<C64>) -> f64 {
    let prod = m.adjoint() * m;
    max_abs_diff(&prod, &DMatrix::identity(m.nrows(), m.ncols()))
}

/// Total effect `U_{T,0}` of the schedule; column `i` is the evolved basis state `i`.
pub fn full_unitary(schedule: &CoinSchedule, spec: &WalkSpec) -> Result<UnitaryMatrix> {
    schedule.check_sites(spec)?;
    let dim = spec.dim();
    let mut m = DMatrix::zeros(dim, dim);
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    for col in 0..dim {
        amps.fill(C64::new(0.0, 0.0));
        amps[col] = C64::new(1.0, 0.0);
        for layer in &schedule.layers {
            step_in_place(&mut amps, &layer.coins, spec);
        }
        m.set_column(col, &nalgebra::DVector::from_column_slice(&amps));
    }
    Ok(UnitaryMatrix(m))
}

/// Splits the basis indices into the classes that every walk keeps apart.
///
/// In the frame co-moving with coin sector 0, a coin at step `t` couples
/// `|0, ξ⟩` with `|1, ξ + t(δ0 − δ1)⟩`, so the classes are the residues of the
/// site index modulo `g = gcd(|δ0 − δ1|, n)`. A walk of `T` steps maps class
/// `k` onto class `k + Tδ0 mod g`. A single class is returned exactly when
/// the walk is universal.
pub fn orbit_partition(spec: &WalkSpec) -> Vec<Vec<usize>> {
    let g = spec.offset_gcd();
    (0..g)
        .map(|k| {
            let mut class: Vec<usize> = (0..2)
                .flat_map(|c| {
                    (0..spec.sites())
                        .filter(move |x| x % g == k)
                        .map(move |x| spec.index(c, x))
                })
                .collect();
            class.sort_unstable();
            class
        })
        .collect()
}
