//! Fixed-size 3x3 and 6x6 matrix primitives.
//!
//! Only what the Lax pair and frame transport need: antisymmetric matrices
//! built from three slot coefficients, commutators, the closed-form rotation
//! exponential and block-diagonal composition.
//!
//! Axis convention: the matrix `skew(a12, a13, a23)` acts on vectors as
//! `w × ·` with dual axis `w = (-a23, a13, -a12)`. Every rotation in the
//! crate goes through [`SkewTriple::axis`], so there is exactly one place
//! where this sign pattern lives.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Mat3(rows)
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Mat3([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    pub fn row(&self, i: usize) -> [f64; 3] {
        self.0[i]
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat3([[m[0][0], m[1][0], m[2][0]], [m[0][1], m[1][1], m[2][1]], [m[0][2], m[1][2], m[2][2]]])
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Largest entry of `|M + Mᵀ|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        (*self + self.transpose()).max_abs()
    }

    /// The three upper-triangle slots `(1,2), (1,3), (2,3)`.
    pub fn upper_slots(&self) -> SkewTriple {
        SkewTriple::new(self.0[0][1], self.0[0][2], self.0[1][2])
    }
}

impl Index<(usize, usize)> for Mat3 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, rhs: Mat3) -> Mat3 {
        let mut out = self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, rhs: Mat3) -> Mat3 {
        self + (-rhs)
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        self.scale(-1.0)
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: Mat3) -> Mat3 {
        let mut out = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        out
    }
}

impl Mul<[f64; 3]> for Mat3 {
    type Output = [f64; 3];
    fn mul(self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }
}

/// Coefficients of an antisymmetric 3x3 matrix in slots (1,2), (1,3), (2,3).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SkewTriple {
    pub a12: f64,
    pub a13: f64,
    pub a23: f64,
}

impl SkewTriple {
    pub const fn new(a12: f64, a13: f64, a23: f64) -> Self {
        SkewTriple { a12, a13, a23 }
    }

    pub fn scale(self, s: f64) -> Self {
        SkewTriple::new(self.a12 * s, self.a13 * s, self.a23 * s)
    }

    pub fn lerp_mid(self, other: SkewTriple) -> Self {
        SkewTriple::new(0.5 * (self.a12 + other.a12), 0.5 * (self.a13 + other.a13), 0.5 * (self.a23 + other.a23))
    }

    /// Dual axis `w` with `skew(t) · y = w × y`.
    pub fn axis(self) -> [f64; 3] {
        [-self.a23, self.a13, -self.a12]
    }

    pub fn to_matrix(self) -> Mat3 {
        skew_from_triple(self)
    }
}

impl Neg for SkewTriple {
    type Output = SkewTriple;
    fn neg(self) -> SkewTriple {
        self.scale(-1.0)
    }
}

/// `[[0, a12, a13], [-a12, 0, a23], [-a13, -a23, 0]]`
pub fn skew_from_triple(t: SkewTriple) -> Mat3 {
    Mat3([[0.0, t.a12, t.a13], [-t.a12, 0.0, t.a23], [-t.a13, -t.a23, 0.0]])
}

/// `AB - BA`.
pub fn commutator(a: Mat3, b: Mat3) -> Mat3 {
    a * b - b * a
}

/// Frobenius norm of `R Rᵀ - I`.
pub fn orthonormality_defect(r: &Mat3) -> f64 {
    (*r * r.transpose() - Mat3::IDENTITY).frobenius()
}

const SERIES_ANGLE: f64 = 1e-6;

/// Matrix exponential of `skew(t)` by the axis-angle closed form.
pub fn rodrigues_exp(t: SkewTriple) -> Rotation3 {
    let w = t.axis();
    let theta2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
    let theta = theta2.sqrt();
    // exp(M) = I + a M + b M², a = sinθ/θ, b = (1 - cosθ)/θ²
    let (a, b) = if theta < SERIES_ANGLE {
        (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    let m = skew_from_triple(t);
    Rotation3(Mat3::IDENTITY + m.scale(a) + (m * m).scale(b))
}

/// A proper rotation: `R Rᵀ = I`, `det R = 1`.
///
/// Rows are read as the Darboux frame `(e₁, e₂, e₃)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotation3(Mat3);

impl Rotation3 {
    pub const IDENTITY: Rotation3 = Rotation3(Mat3::IDENTITY);

    /// Tolerance on the orthonormality defect and `|det - 1|` accepted by [`Rotation3::new`].
    pub const TOLERANCE: f64 = 1e-10;

    pub fn new(m: Mat3) -> crate::Result<Self> {
        let defect = orthonormality_defect(&m);
        let det = m.det();
        if defect <= Self::TOLERANCE && (det - 1.0).abs() <= Self::TOLERANCE {
            Ok(Rotation3(m))
        } else {
            Err(crate::Error::NotOrthogonal { defect, det })
        }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn frame_vector(&self, i: usize) -> [f64; 3] {
        self.0.row(i)
    }

    pub fn transpose(&self) -> Rotation3 {
        Rotation3(self.0.transpose())
    }

    pub fn defect(&self) -> f64 {
        orthonormality_defect(&self.0)
    }
}

impl Mul for Rotation3 {
    type Output = Rotation3;
    fn mul(self, rhs: Rotation3) -> Rotation3 {
        Rotation3(self.0 * rhs.0)
    }
}

/// Row-major 6x6 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Matrix6(pub [[f64; 6]; 6]);

impl Default for Matrix6 {
    fn default() -> Self {
        Matrix6::ZERO
    }
}

impl Matrix6 {
    pub const ZERO: Matrix6 = Matrix6([[0.0; 6]; 6]);

    pub fn identity() -> Self {
        block_diag(Mat3::IDENTITY, Mat3::IDENTITY)
    }

    /// 3x3 block `(bi, bj)`, with `bi, bj ∈ {0, 1}`.
    pub fn block(&self, bi: usize, bj: usize) -> Mat3 {
        let mut out = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[3 * bi + i][3 * bj + j];
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Matrix6::ZERO;
        for i in 0..6 {
            for j in 0..6 {
                out.0[j][i] = self.0[i][j];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        (*self + self.transpose()).max_abs()
    }

    pub fn commutator(&self, other: &Matrix6) -> Matrix6 {
        *self * *other - *other * *self
    }
}

impl Add for Matrix6 {
    type Output = Matrix6;
    fn add(self, rhs: Matrix6) -> Matrix6 {
        let mut out = self;
        for i in 0..6 {
            for j in 0..6 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl Sub for Matrix6 {
    type Output = Matrix6;
    fn sub(self, rhs: Matrix6) -> Matrix6 {
        let mut out = self;
        for i in 0..6 {
            for j in 0..6 {
                out.0[i][j] -= rhs.0[i][j];
            }
        }
        out
    }
}

impl Mul for Matrix6 {
    type Output = Matrix6;
    fn mul(self, rhs: Matrix6) -> Matrix6 {
        let mut out = Matrix6::ZERO;
        for i in 0..6 {
            for j in 0..6 {
                out.0[i][j] = (0..6).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        out
    }
}

/// `[[A, 0], [0, B]]`.
pub fn block_diag(a: Mat3, b: Mat3) -> Matrix6 {
    let mut out = Matrix6::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            out.0[i][j] = a.0[i][j];
            out.0[i + 3][j + 3] = b.0[i][j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn triple() -> impl Strategy<Value = SkewTriple> {
        (-4.0..4.0f64, -4.0..4.0f64, -4.0..4.0f64).prop_map(|(a, b, c)| SkewTriple::new(a, b, c))
    }

    fn mat3() -> impl Strategy<Value = Mat3> {
        proptest::array::uniform3(proptest::array::uniform3(-3.0..3.0f64)).prop_map(Mat3)
    }

    #[test]
    fn skew_slot_placement() {
        let m = skew_from_triple(SkewTriple::new(1.0, 2.0, 3.0));
        assert_eq!(m.0, [[0.0, 1.0, 2.0], [-1.0, 0.0, 3.0], [-2.0, -3.0, 0.0]]);
        assert_eq!(skew_from_triple(SkewTriple::default()), Mat3::ZERO);
    }

    #[test]
    fn skew_acts_as_cross_product_with_axis() {
        let t = SkewTriple::new(0.3, -1.2, 0.7);
        let w = t.axis();
        let y = [0.5, 2.0, -1.5];
        let cross = [w[1] * y[2] - w[2] * y[1], w[2] * y[0] - w[0] * y[2], w[0] * y[1] - w[1] * y[0]];
        let my = t.to_matrix() * y;
        for k in 0..3 {
            assert!((my[k] - cross[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn commutator_of_basis_elements() {
        // hand product: skew(1,0,0)·skew(0,1,0) - skew(0,1,0)·skew(1,0,0)
        let a = skew_from_triple(SkewTriple::new(1.0, 0.0, 0.0));
        let b = skew_from_triple(SkewTriple::new(0.0, 1.0, 0.0));
        let ab = Mat3([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 0.0, 0.0]]);
        let ba = Mat3([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, -1.0, 0.0]]);
        assert_eq!(a * b, ab);
        assert_eq!(b * a, ba);
        assert_eq!(commutator(a, b), skew_from_triple(SkewTriple::new(0.0, 0.0, -1.0)));
        assert_eq!(commutator(a, a), Mat3::ZERO);
        assert_eq!(commutator(a, Mat3::IDENTITY), Mat3::ZERO);
    }

    #[test]
    fn rodrigues_special_values() {
        assert_eq!(*rodrigues_exp(SkewTriple::default()).matrix(), Mat3::IDENTITY);
        let r = rodrigues_exp(SkewTriple::new(FRAC_PI_2, 0.0, 0.0));
        let expected = Mat3([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!((*r.matrix() - expected).max_abs() < 1e-15);
    }

    #[test]
    fn rodrigues_small_angle_matches_first_order_series() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let d: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            let t = SkewTriple::new(d[0] / n, d[1] / n, d[2] / n).scale(1e-8);
            let series = Mat3::IDENTITY + t.to_matrix();
            assert!((*rodrigues_exp(t).matrix() - series).max_abs() <= 1e-15);
        }
    }

    #[test]
    fn rodrigues_matches_taylor_series_at_moderate_angle() {
        let t = SkewTriple::new(0.4, -0.9, 1.3);
        let m = t.to_matrix();
        let mut term = Mat3::IDENTITY;
        let mut sum = Mat3::IDENTITY;
        for k in 1..40 {
            term = (term * m).scale(1.0 / k as f64);
            sum = sum + term;
        }
        assert!((*rodrigues_exp(t).matrix() - sum).max_abs() < 1e-14);
    }

    #[test]
    fn defect_of_scaled_identity() {
        assert_eq!(orthonormality_defect(&Mat3::IDENTITY), 0.0);
        assert_eq!(orthonormality_defect(&Mat3::diag(2.0, 1.0, 1.0)), 3.0);
    }

    #[test]
    fn rotation_constructor_rejects_non_orthogonal() {
        assert!(Rotation3::new(Mat3::diag(2.0, 1.0, 1.0)).is_err());
        assert!(Rotation3::new(Mat3::diag(-1.0, 1.0, 1.0)).is_err());
        assert!(Rotation3::new(Mat3::IDENTITY).is_ok());
    }

    #[test]
    fn block_diag_layout() {
        assert_eq!(block_diag(Mat3::IDENTITY, Mat3::IDENTITY), {
            let mut m = Matrix6::ZERO;
            (0..6).for_each(|i| m.0[i][i] = 1.0);
            m
        });
        let b = skew_from_triple(SkewTriple::new(1.0, 2.0, 3.0));
        let m = block_diag(Mat3::ZERO, b);
        assert_eq!(m.block(0, 0), Mat3::ZERO);
        assert_eq!(m.block(1, 1), b);
        assert_eq!(m.block(0, 1), Mat3::ZERO);
        assert_eq!(m.block(1, 0), Mat3::ZERO);
    }

    proptest! {
        #[test]
        fn commutator_of_skew_is_skew(a in triple(), b in triple()) {
            let c = commutator(a.to_matrix(), b.to_matrix());
            prop_assert!(c.antisymmetry_defect() <= 1e-14);
        }

        #[test]
        fn rodrigues_is_a_rotation(t in triple()) {
            let r = rodrigues_exp(t);
            prop_assert!(r.defect() <= 1e-12);
            prop_assert!((r.matrix().det() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn rodrigues_inverse_is_negated_generator(t in triple()) {
            let p = rodrigues_exp(t) * rodrigues_exp(-t);
            prop_assert!((*p.matrix() - Mat3::IDENTITY).frobenius() <= 1e-12);
        }

        #[test]
        fn block_products_do_not_mix(a in mat3(), b in mat3(), c in mat3(), d in mat3()) {
            prop_assert_eq!(block_diag(a, b) * block_diag(c, d), block_diag(a * c, b * d));
        }
    }
}
