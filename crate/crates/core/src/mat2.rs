//! Small fixed-size 2×2 complex matrices: coins, Pauli generators and their
//! closed-form exponentials.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Row-major 2×2 complex matrix, `m[row][col]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub m: [[C64; 2]; 2],
}

impl Mat2 {
    pub const fn new(m: [[C64; 2]; 2]) -> Self {
        Self { m }
    }

    pub const fn zero() -> Self {
        Self::new([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        Self::new([[ONE, ZERO], [ZERO, ONE]])
    }

    pub const fn sigma_x() -> Self {
        Self::new([[ZERO, ONE], [ONE, ZERO]])
    }

    pub const fn sigma_y() -> Self {
        Self::new([[ZERO, C64::new(0.0, -1.0)], [I, ZERO]])
    }

    pub const fn sigma_z() -> Self {
        Self::new([[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]])
    }

    /// Pauli matrix `σ_j` with `σ_0 = I`.
    pub fn pauli(j: usize) -> Self {
        match j {
            0 => Self::identity(),
            1 => Self::sigma_x(),
            2 => Self::sigma_y(),
            3 => Self::sigma_z(),
            _ => panic!("Pauli index {j} out of range"),
        }
    }

    /// `n · σ⃗ = Σ_j n_j σ_j` for a real 4-vector (σ_0 component first).
    pub fn pauli_combination(n: [f64; 4]) -> Self {
        let [a, b, c, d] = n;
        Self::new([
            [C64::new(a + d, 0.0), C64::new(b, -c)],
            [C64::new(b, c), C64::new(a - d, 0.0)],
        ])
    }

    /// `exp(iβ (u·σ⃗))` for a real unit 3-vector `u` over `(σ_x, σ_y, σ_z)`.
    pub fn exp_i_axis(beta: f64, u: [f64; 3]) -> Self {
        let (s, c) = beta.sin_cos();
        let g = Self::pauli_combination([0.0, u[0], u[1], u[2]]);
        Self::identity().scale(C64::new(c, 0.0)) + g.scale(C64::new(0.0, s))
    }

    /// `exp(iβ σ_j)`, `j ∈ {0, 1, 2, 3}`.
    pub fn exp_i_pauli(beta: f64, j: usize) -> Self {
        let (s, c) = beta.sin_cos();
        if j == 0 {
            return Self::phase(beta);
        }
        Self::identity().scale(C64::new(c, 0.0)) + Self::pauli(j).scale(C64::new(0.0, s))
    }

    /// `e^{iφ} I`.
    pub fn phase(phi: f64) -> Self {
        Self::identity().scale(C64::from_polar(1.0, phi))
    }

    pub fn scale(self, z: C64) -> Self {
        let m = self.m;
        Self::new([[m[0][0] * z, m[0][1] * z], [m[1][0] * z, m[1][1] * z]])
    }

    pub fn adjoint(&self) -> Self {
        let m = self.m;
        Self::new([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    #[inline]
    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.m;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// `⟨a| M |b⟩` for 2-vectors.
    #[inline]
    pub fn sandwich(&self, a: [C64; 2], b: [C64; 2]) -> C64 {
        let mb = self.apply(b);
        a[0].conj() * mb[0] + a[1].conj() * mb[1]
    }

    pub fn determinant(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Largest entrywise modulus of the difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.m[r][c] - other.m[r][c]).norm());
            }
        }
        worst
    }

    /// `max |(M†M − I)_{rc}|`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Self::identity())
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.m;
        let b = &rhs.m;
        Mat2::new([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for r in 0..2 {
            for c in 0..2 {
                out.m[r][c] += rhs.m[r][c];
            }
        }
        out
    }
}

impl Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, rhs: Mat2) -> Mat2 {
        self + (-rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;

    fn neg(self) -> Mat2 {
        self.scale(C64::new(-1.0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (Mat2::sigma_x(), Mat2::sigma_y(), Mat2::sigma_z());
        assert!((x * y).max_abs_diff(&z.scale(I)) < 1e-15);
        assert!((y * z).max_abs_diff(&x.scale(I)) < 1e-15);
        assert!((x * x).max_abs_diff(&Mat2::identity()) < 1e-15);
    }

    #[test]
    fn pauli_combination_matches_sum() {
        let n = [0.3, -0.2, 0.7, 1.1];
        let mut sum = Mat2::zero();
        for (j, nj) in n.iter().enumerate() {
            sum = sum + Mat2::pauli(j).scale(C64::new(*nj, 0.0));
        }
        assert!(sum.max_abs_diff(&Mat2::pauli_combination(n)) < 1e-15);
    }

    #[test]
    fn exp_of_half_pi_sigma_x_is_i_sigma_x() {
        let e = Mat2::exp_i_pauli(std::f64::consts::FRAC_PI_2, 1);
        assert!(e.max_abs_diff(&Mat2::sigma_x().scale(I)) < 1e-15);
    }
}
