//! Exact compilation of unitaries into coin schedules.
//!
//! A target `V ∈ U(2n)` is split into two-level unitaries by column
//! elimination. Each two-level factor on `{|c0,x0⟩, |c1,x1⟩}` is then
//! realized by letting the two basis trajectories run until they share a
//! site (the meet point) and mixing them there with a single coin; all other
//! coins are identity, so after `n` steps every other trajectory has looped
//! back to its start. Same-coin pairs first flip one trajectory into the
//! other sector and flip it back after a full loop.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use num_integer::Integer;

use crate::mat2::Mat2;
use crate::walk::{
    orbit_partition, unitarity_defect, CoinOperator, CoinSchedule, UnitaryMatrix, WalkSpec,
    UNITARY_TOL,
};
use crate::{Error, Result};

/// Entries below this modulus are treated as already eliminated.
pub const ELIMINATION_THRESHOLD: f64 = 1e-12;

/// Basis label `(coin, site)`.
pub type BasisLabel = (usize, usize);

/// Unitary acting as `v` on `span{|a⟩, |b⟩}` and as identity elsewhere,
/// with `v[i][j] = ⟨pair_i| U |pair_j⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLevelUnitary {
    v: Mat2,
    pair: [BasisLabel; 2],
}

impl TwoLevelUnitary {
    pub fn new(spec: &WalkSpec, v: Mat2, a: BasisLabel, b: BasisLabel) -> Result<Self> {
        for (c, x) in [a, b] {
            if c > 1 || x >= spec.sites() {
                return Err(Error::InvalidPair(format!(
                    "label ({c}, {x}) out of range for {} sites",
                    spec.sites()
                )));
            }
        }
        if a == b {
            return Err(Error::InvalidPair(format!("repeated label {a:?}")));
        }
        CoinOperator::new(v)?;
        Ok(Self { v, pair: [a, b] })
    }

    pub fn block(&self) -> &Mat2 {
        &self.v
    }

    pub fn pair(&self) -> [BasisLabel; 2] {
        self.pair
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.v.max_abs_diff(&Mat2::identity()) <= tol
    }

    /// Dense `2n × 2n` matrix.
    pub fn embed(&self, spec: &WalkSpec) -> UnitaryMatrix {
        let mut m = DMatrix::identity(spec.dim(), spec.dim());
        let idx = self.pair.map(|(c, x)| spec.index(c, x));
        for i in 0..2 {
            for j in 0..2 {
                m[(idx[i], idx[j])] = self.v.m[i][j];
            }
        }
        UnitaryMatrix::from_unitary(m)
    }
}

/// Product of factors where index 0 acts first on the state.
pub fn compose(factors: &[TwoLevelUnitary], spec: &WalkSpec) -> UnitaryMatrix {
    let mut m: DMatrix<C64> = DMatrix::identity(spec.dim(), spec.dim());
    for f in factors {
        let [a, b] = f.pair.map(|(c, x)| spec.index(c, x));
        left_apply(&mut m, a, b, &f.v);
    }
    UnitaryMatrix::from_unitary(m)
}

/// `W ← G W` where `G` acts on rows `a`, `b`.
fn left_apply(w: &mut DMatrix<C64>, a: usize, b: usize, g: &Mat2) {
    for col in 0..w.ncols() {
        let (ra, rb) = (w[(a, col)], w[(b, col)]);
        let [na, nb] = g.apply([ra, rb]);
        w[(a, col)] = na;
        w[(b, col)] = nb;
    }
}

/// Splits `V` into two-level unitaries; applying the returned factors in
/// list order reproduces `V`. At most `d(d − 1)/2` factors for `d = 2n`.
pub fn two_level_decompose(v: &UnitaryMatrix, spec: &WalkSpec) -> Result<Vec<TwoLevelUnitary>> {
    let d = spec.dim();
    if v.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: v.dim(),
        });
    }
    let deviation = unitarity_defect(v.matrix());
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }

    // Row operations G_1, G_2, ... with G_K ⋯ G_1 V = I.
    let mut ops: Vec<(usize, usize, Mat2)> = Vec::new();
    let mut w = v.matrix().clone();
    for c in 0..d {
        for r in c + 1..d {
            let b = w[(r, c)];
            if b.norm() < ELIMINATION_THRESHOLD {
                continue;
            }
            let a = w[(c, c)];
            let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let g = Mat2::new([[a.conj() / norm, b.conj() / norm], [-b / norm, a / norm]]);
            left_apply(&mut w, c, r, &g);
            w[(r, c)] = C64::new(0.0, 0.0);
            ops.push((c, r, g));
        }

        // Column c is now e_c up to a phase on the diagonal.
        let ph = w[(c, c)] / w[(c, c)].norm();
        if (ph - C64::new(1.0, 0.0)).norm() <= ELIMINATION_THRESHOLD {
            continue;
        }
        let fix = |first: bool| {
            if first {
                Mat2::new([
                    [ph.conj(), C64::new(0.0, 0.0)],
                    [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
                ])
            } else {
                Mat2::new([
                    [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
                    [C64::new(0.0, 0.0), ph.conj()],
                ])
            }
        };
        match ops.last_mut() {
            Some((p, q, g)) if *p == c || *q == c => {
                *g = fix(*p == c) * *g;
            }
            _ => {
                let (p, q) = if c + 1 < d { (c, c + 1) } else { (c - 1, c) };
                ops.push((p, q, fix(p == c)));
            }
        }
        for col in 0..d {
            w[(c, col)] *= ph.conj();
        }
    }

    ops.iter()
        .rev()
        .map(|&(p, q, g)| TwoLevelUnitary::new(spec, g.adjoint(), spec.label(p), spec.label(q)))
        .collect()
}

/// Step and site at which the two trajectories of a basis pair coincide.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeetPoint {
    pub t_meet: usize,
    pub x_meet: usize,
}

fn ensure_universal(spec: &WalkSpec) -> Result<()> {
    if spec.is_universal() {
        Ok(())
    } else {
        Err(Error::NotUniversal {
            n: spec.sites(),
            delta0: spec.delta0(),
            delta1: spec.delta1(),
            orbits: orbit_partition(spec),
        })
    }
}

fn mod_inverse(a: i64, n: i64) -> Option<i64> {
    let eg = a.rem_euclid(n).extended_gcd(&n);
    (eg.gcd == 1).then(|| eg.x.rem_euclid(n))
}

/// Coins carried by the two trajectories at the meet point: the original
/// coins when they differ, otherwise the second trajectory is flipped.
fn effective_coins(pair: [BasisLabel; 2]) -> [usize; 2] {
    let [(c0, _), (c1, _)] = pair;
    if c0 != c1 {
        [c0, c1]
    } else {
        [c0, 1 - c1]
    }
}

pub fn solve_meet(spec: &WalkSpec, pair: [BasisLabel; 2]) -> Result<MeetPoint> {
    ensure_universal(spec)?;
    let [(_, x0), (_, x1)] = pair;
    if pair[0] == pair[1] {
        return Err(Error::InvalidPair(format!("repeated label {:?}", pair[0])));
    }
    let n = spec.sites() as i64;
    let [e0, e1] = effective_coins(pair);
    // t (δ_e0 − δ_e1) ≡ x1 − x0 (mod n)
    let step = spec.delta(e0) - spec.delta(e1);
    let inv = mod_inverse(step, n).expect("universal walk has invertible offset");
    let t = ((x1 as i64 - x0 as i64).rem_euclid(n) * inv).rem_euclid(n) as usize;
    Ok(MeetPoint {
        t_meet: t,
        x_meet: spec.advance(e0, x0, t as i64),
    })
}

/// Schedule whose total effect is exactly `tl`: `n` layers for a mixed-coin
/// pair, `2n` layers for a same-coin pair.
pub fn realize_two_level(tl: &TwoLevelUnitary, spec: &WalkSpec) -> Result<CoinSchedule> {
    let meet = solve_meet(spec, tl.pair)?;
    let n = spec.sites();
    let [e0, e1] = effective_coins(tl.pair);
    let mut coin = Mat2::zero();
    let e = [e0, e1];
    for i in 0..2 {
        for j in 0..2 {
            coin.m[e[i]][e[j]] = tl.v.m[i][j];
        }
    }
    let same_coin = tl.pair[0].0 == tl.pair[1].0;
    let steps = if same_coin { 2 * n } else { n };
    let mut schedule = CoinSchedule::identity(n, steps);
    schedule.set(meet.t_meet, meet.x_meet, CoinOperator::new(coin)?);
    if same_coin {
        let x1 = tl.pair[1].1;
        schedule.set(0, x1, CoinOperator::sigma_x());
        schedule.set(n, x1, CoinOperator::sigma_x());
    }
    Ok(schedule)
}

/// Exact schedule for `V`: one realized block per two-level factor, in
/// application order. Returns an empty schedule for the identity.
pub fn realize_unitary_exact(v: &UnitaryMatrix, spec: &WalkSpec) -> Result<CoinSchedule> {
    ensure_universal(spec)?;
    let mut schedule = CoinSchedule::identity(spec.sites(), 0);
    for factor in two_level_decompose(v, spec)? {
        schedule.extend(realize_two_level(&factor, spec)?);
    }
    Ok(schedule)
}

/// Rewrites a schedule as `U_{T,0} = S^T · F_last ⋯ F_first`, where the
/// factor for the coin at `(x, t)` is `S^{-t} (c_x^(t) ⊗ |x⟩⟨x| + rest) S^t`,
/// a two-level unitary on `{|0, x − tδ0⟩, |1, x − tδ1⟩}` whose block is the
/// coin itself. Factors are returned in application order (`t` major, `x`
/// minor); the first element is the shift power `T`.
pub fn total_effect_factorize(
    schedule: &CoinSchedule,
    spec: &WalkSpec,
) -> Result<(usize, Vec<TwoLevelUnitary>)> {
    if schedule.sites() != spec.sites() {
        return Err(Error::DimensionMismatch {
            expected: spec.sites(),
            found: schedule.sites(),
        });
    }
    let mut factors = Vec::with_capacity(schedule.steps() * spec.sites());
    for t in 0..schedule.steps() {
        for x in 0..spec.sites() {
            let back = -(t as i64);
            let a = (0, spec.advance(0, x, back));
            let b = (1, spec.advance(1, x, back));
            factors.push(TwoLevelUnitary {
                v: *schedule.coin(t, x).matrix(),
                pair: [a, b],
            });
        }
    }
    Ok((schedule.steps(), factors))
}
