//! Planar rigid-body geometry: rotations, SE(2) poses, se(2) twists and the
//! 3×3 solve used to invert the grand resistance matrix.
//!
//! Poses are stored with `theta` wrapped to (−π, π]. The integrator carries
//! an unwrapped angle internally and only wraps when it hands out a [`Pose`].

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Condition estimate above which a 3×3 system is treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2(pub [f64; 2]);

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3(pub [f64; 3]);

/// Row-major 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

/// Row-major 3×3 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat3(pub [[f64; 3]; 3]);

fn all_finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

impl Vec2 {
    pub const E1: Vec2 = Vec2([1.0, 0.0]);
    pub const E2: Vec2 = Vec2([0.0, 1.0]);

    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !all_finite(&[x, y]) {
            return Err(Error::NonFinite("Vec2"));
        }
        Ok(Vec2([x, y]))
    }

    pub fn x(self) -> f64 {
        self.0[0]
    }

    pub fn y(self) -> f64 {
        self.0[1]
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1]
    }

    pub fn norm(self) -> f64 {
        self.0[0].hypot(self.0[1])
    }

    /// Counter-clockwise quarter turn, `(-y, x)`.
    pub fn perp(self) -> Vec2 {
        Vec2([-self.0[1], self.0[0]])
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2([k * self.0[0], k * self.0[1]])
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1]])
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1]])
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2([-self.0[0], -self.0[1]])
    }
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !all_finite(&[a, b, c]) {
            return Err(Error::NonFinite("Vec3"));
        }
        Ok(Vec3([a, b, c]))
    }

    /// Stacks a planar vector with a scalar third entry.
    pub fn stack(v: Vec2, z: f64) -> Vec3 {
        Vec3([v.0[0], v.0[1], z])
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn scale(self, k: f64) -> Vec3 {
        Vec3([k * self.0[0], k * self.0[1], k * self.0[2]])
    }

    pub fn is_finite(self) -> bool {
        all_finite(&self.0)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2]])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1], self.0[2] - rhs.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        self.scale(-1.0)
    }
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn diag(a: f64, b: f64) -> Mat2 {
        Mat2([[a, 0.0], [0.0, b]])
    }

    pub fn transpose(self) -> Mat2 {
        let m = self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn det(self) -> f64 {
        let m = self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn scale(self, k: f64) -> Mat2 {
        let m = self.0;
        Mat2([[k * m[0][0], k * m[0][1]], [k * m[1][0], k * m[1][1]]])
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, c) in row.iter_mut().enumerate() {
                *c = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

impl Mul<Vec2> for Mat2 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        let m = self.0;
        Vec2([m[0][0] * v.0[0] + m[0][1] * v.0[1], m[1][0] * v.0[0] + m[1][1] * v.0[1]])
    }
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);

    /// Assembles the symmetric block matrix `[[a, d], [dᵀ, c]]`.
    pub fn from_blocks(a: Mat2, d: Vec2, c: f64) -> Mat3 {
        let a = a.0;
        Mat3([[a[0][0], a[0][1], d.0[0]], [a[1][0], a[1][1], d.0[1]], [d.0[0], d.0[1], c]])
    }

    pub fn from_columns(c0: Vec3, c1: Vec3, c2: Vec3) -> Mat3 {
        Mat3([[c0.0[0], c1.0[0], c2.0[0]], [c0.0[1], c1.0[1], c2.0[1]], [c0.0[2], c1.0[2], c2.0[2]]])
    }

    pub fn transpose(self) -> Mat3 {
        let m = self.0;
        let mut t = [[0.0; 3]; 3];
        for (i, row) in m.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                t[j][i] = *x;
            }
        }
        Mat3(t)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|r| all_finite(r))
    }

    pub fn row(&self, i: usize) -> Vec3 {
        Vec3(self.0[i])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Leading principal minors `(m₁₁, det of top-left 2×2, det)`.
    pub fn leading_minors(&self) -> [f64; 3] {
        let m = &self.0;
        [m[0][0], m[0][0] * m[1][1] - m[0][1] * m[1][0], self.det()]
    }

    /// Transposed cofactor matrix, so that `M · adj(M) = det(M) · I`.
    pub fn adjugate(&self) -> Mat3 {
        let m = &self.0;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        Mat3([
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ])
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3([
            m[0][0] * v.0[0] + m[0][1] * v.0[1] + m[0][2] * v.0[2],
            m[1][0] * v.0[0] + m[1][1] * v.0[1] + m[1][2] * v.0[2],
            m[2][0] * v.0[0] + m[2][1] * v.0[1] + m[2][2] * v.0[2],
        ])
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: Mat3) -> Mat3 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, c) in row.iter_mut().enumerate() {
                *c = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        Mat3(out)
    }
}

/// Wraps an angle to (−π, π].
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Planar rotation by `alpha`.
pub fn rotation(alpha: f64) -> Result<Mat2> {
    if !alpha.is_finite() {
        return Err(Error::NonFinite("rotation angle"));
    }
    Ok(rot(alpha))
}

// Unchecked rotation for inner loops whose angles are already validated.
pub(crate) fn rot(alpha: f64) -> Mat2 {
    let (s, c) = alpha.sin_cos();
    Mat2([[c, -s], [s, c]])
}

/// Element of SE(2): hinge position and orientation in the lab frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    x: f64,
    y: f64,
    theta: f64,
}

impl Pose {
    pub const IDENTITY: Pose = Pose { x: 0.0, y: 0.0, theta: 0.0 };

    pub fn new(x: f64, y: f64, theta: f64) -> Result<Pose> {
        if !all_finite(&[x, y, theta]) {
            return Err(Error::NonFinite("Pose"));
        }
        Ok(Pose { x, y, theta: wrap_angle(theta) })
    }

    pub(crate) fn from_raw(x: f64, y: f64, theta: f64) -> Pose {
        Pose { x, y, theta: wrap_angle(theta) }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn translation(&self) -> Vec2 {
        Vec2([self.x, self.y])
    }

    /// `(x, y, theta)` as a plain vector.
    pub fn as_vec3(&self) -> Vec3 {
        Vec3([self.x, self.y, self.theta])
    }

    /// Group product `self · other = (h + R_θ h', θ + θ')`.
    pub fn compose(&self, other: &Pose) -> Pose {
        let h = rot(self.theta) * other.translation();
        Pose::from_raw(self.x + h.0[0], self.y + h.0[1], self.theta + other.theta)
    }

    pub fn inverse(&self) -> Pose {
        let h = rot(-self.theta) * self.translation();
        Pose::from_raw(-h.0[0], -h.0[1], -self.theta)
    }

    /// Componentwise max-norm distance, with the angle difference wrapped.
    pub fn distance_max(&self, other: &Pose) -> f64 {
        let dtheta = wrap_angle(self.theta - other.theta).abs();
        (self.x - other.x).abs().max((self.y - other.y).abs()).max(dtheta)
    }

    /// Homogeneous 3×3 matrix form.
    pub fn to_matrix(&self) -> Mat3 {
        let (s, c) = self.theta.sin_cos();
        Mat3([[c, -s, self.x], [s, c, self.y], [0.0, 0.0, 1.0]])
    }
}

impl fmt::Display for Pose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pose(x: {:.6}, y: {:.6}, theta: {:.6})", self.x, self.y, self.theta)
    }
}

pub fn pose_compose(g1: &Pose, g2: &Pose) -> Pose {
    g1.compose(g2)
}

pub fn pose_inverse(g: &Pose) -> Pose {
    g.inverse()
}

/// Body-frame velocity: linear part `(vx, vy)` and angular rate `omega`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Twist {
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
}

impl Twist {
    pub const ZERO: Twist = Twist { vx: 0.0, vy: 0.0, omega: 0.0 };

    pub fn new(vx: f64, vy: f64, omega: f64) -> Result<Twist> {
        if !all_finite(&[vx, vy, omega]) {
            return Err(Error::NonFinite("Twist"));
        }
        Ok(Twist { vx, vy, omega })
    }

    pub fn from_vec3(v: Vec3) -> Twist {
        Twist { vx: v.0[0], vy: v.0[1], omega: v.0[2] }
    }

    pub fn as_vec3(&self) -> Vec3 {
        Vec3([self.vx, self.vy, self.omega])
    }

    pub fn linear(&self) -> Vec2 {
        Vec2([self.vx, self.vy])
    }

    /// Homogeneous 3×3 matrix form `[[ω·J, v], [0, 0]]`.
    pub fn to_matrix(&self) -> Mat3 {
        Mat3([[0.0, -self.omega, self.vx], [self.omega, 0.0, self.vy], [0.0, 0.0, 0.0]])
    }
}

/// se(2) commutator `[ξ₁, ξ₂] = ξ₁ξ₂ − ξ₂ξ₁`, in closed form.
pub fn se2_commutator(xi1: &Twist, xi2: &Twist) -> Twist {
    let v = xi2.linear().perp().scale(xi1.omega) - xi1.linear().perp().scale(xi2.omega);
    Twist { vx: v.0[0], vy: v.0[1], omega: 0.0 }
}

/// Solves `m · x = b` with the adjugate formula.
///
/// The condition estimate is the product of the row norms over `|det|`;
/// beyond [`SINGULAR_CONDITION`] the system is rejected.
pub fn solve3(m: &Mat3, b: Vec3) -> Result<Vec3> {
    if !b.is_finite() {
        return Err(Error::NonFinite("solve3 right-hand side"));
    }
    Ok(Inverse3::new(m)?.solve(b))
}

/// Adjugate factorization of a well-conditioned 3×3 matrix, reusable across
/// several right-hand sides.
#[derive(Clone, Copy, Debug)]
pub struct Inverse3 {
    #[cfg(debug_assertions)]
    m: Mat3,
    adj: Mat3,
    inv_det: f64,
    condition: f64,
}

impl Inverse3 {
    pub fn new(m: &Mat3) -> Result<Inverse3> {
        if !m.is_finite() {
            return Err(Error::NonFinite("solve3 matrix"));
        }
        let det = m.det();
        let row_norms: f64 = (0..3).map(|i| m.row(i).norm()).product();
        let condition = if det == 0.0 { f64::INFINITY } else { row_norms / det.abs() };
        if condition.is_nan() || condition > SINGULAR_CONDITION {
            return Err(Error::SingularResistance { condition });
        }
        Ok(Inverse3 {
            #[cfg(debug_assertions)]
            m: *m,
            adj: m.adjugate(),
            inv_det: 1.0 / det,
            condition,
        })
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn solve(&self, b: Vec3) -> Vec3 {
        let x = (self.adj * b).scale(self.inv_det);
        #[cfg(debug_assertions)]
        {
            let scale = self.m.0.iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()));
            let tol = 1e-10 * b.norm().max(scale * x.norm()) * self.condition.max(1.0).sqrt();
            debug_assert!((self.m * x - b).norm() <= tol, "solve3 residual check failed");
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rotation_reference_values() {
        assert_eq!(rotation(0.0).unwrap(), Mat2::IDENTITY);
        let q = rotation(FRAC_PI_2).unwrap().0;
        let want = [[0.0, -1.0], [1.0, 0.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(q[i][j], want[i][j], 1e-16));
            }
        }
        let r = rotation(FRAC_PI_4).unwrap();
        let h = SQRT_2 / 2.0;
        let want = [[h, -h], [h, h]];
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(r.0[i][j], want[i][j], 2e-16));
            }
        }
        assert!(close(r.det(), 1.0, 1e-15));
    }

    #[test]
    fn rotation_rejects_non_finite() {
        assert!(matches!(rotation(f64::NAN), Err(Error::NonFinite(_))));
        assert!(rotation(f64::INFINITY).is_err());
    }

    #[test]
    fn compose_examples() {
        let g = Pose::new(0.3, -1.2, 2.0).unwrap();
        assert_eq!(Pose::IDENTITY.compose(&g), g);
        let p = Pose::new(1.0, 0.0, 0.0).unwrap().compose(&Pose::new(0.0, 1.0, 0.0).unwrap());
        assert_eq!(p, Pose::new(1.0, 1.0, 0.0).unwrap());
        let p = Pose::new(0.0, 0.0, FRAC_PI_2).unwrap().compose(&Pose::new(1.0, 0.0, 0.0).unwrap());
        assert!(close(p.x(), 0.0, 1e-16) && close(p.y(), 1.0, 1e-16));
        assert!(close(p.theta(), FRAC_PI_2, 1e-16));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(Pose::IDENTITY.inverse().distance_max(&Pose::IDENTITY), 0.0);
        let inv = Pose::new(1.0, 0.0, 0.0).unwrap().inverse();
        assert!(inv.distance_max(&Pose::new(-1.0, 0.0, 0.0).unwrap()) < 1e-16);
        let inv = Pose::new(0.0, 0.0, FRAC_PI_2).unwrap().inverse();
        assert!(inv.distance_max(&Pose::new(0.0, 0.0, -FRAC_PI_2).unwrap()) < 1e-16);
    }

    #[test]
    fn theta_is_wrapped() {
        let p = Pose::new(0.0, 0.0, 3.0 * PI).unwrap();
        assert!(close(p.theta(), PI, 1e-12));
        let p = Pose::new(0.0, 0.0, -PI).unwrap();
        assert!(close(p.theta(), PI, 1e-15));
        assert!(Pose::new(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn commutator_examples() {
        let xi = Twist::new(0.4, -1.0, 2.5).unwrap();
        assert_eq!(se2_commutator(&xi, &xi), Twist::ZERO);
        let t1 = Twist::new(1.0, 2.0, 0.0).unwrap();
        let t2 = Twist::new(-3.0, 0.5, 0.0).unwrap();
        assert_eq!(se2_commutator(&t1, &t2), Twist::ZERO);
        let c = se2_commutator(&Twist::new(1.0, 0.0, 0.0).unwrap(), &Twist::new(0.0, 0.0, 1.0).unwrap());
        assert_eq!(c, Twist { vx: 0.0, vy: -1.0, omega: 0.0 });
    }

    // Oracle: the commutator of the homogeneous 3×3 matrices.
    fn matrix_commutator(a: &Twist, b: &Twist) -> Twist {
        let (ma, mb) = (a.to_matrix(), b.to_matrix());
        let ab = ma * mb;
        let ba = mb * ma;
        Twist { vx: ab.0[0][2] - ba.0[0][2], vy: ab.0[1][2] - ba.0[1][2], omega: ab.0[1][0] - ba.0[1][0] }
    }

    #[test]
    fn commutator_matches_matrix_form() {
        let a = Twist::new(1.0, 0.0, 0.0).unwrap();
        let b = Twist::new(0.0, 0.0, 1.0).unwrap();
        assert_eq!(matrix_commutator(&a, &b), se2_commutator(&a, &b));
        let a = Twist::new(0.3, -0.7, 1.9).unwrap();
        let b = Twist::new(-1.1, 0.2, -0.4).unwrap();
        let (m, c) = (matrix_commutator(&a, &b), se2_commutator(&a, &b));
        assert!(close(m.vx, c.vx, 1e-15) && close(m.vy, c.vy, 1e-15) && close(m.omega, c.omega, 1e-15));
    }

    #[test]
    fn solve3_examples() {
        let b = Vec3([1.5, -2.0, 0.25]);
        assert_eq!(solve3(&Mat3::IDENTITY, b).unwrap(), b);

        let r = Mat3([[3.0, 0.0, 0.0], [0.0, 3.0, SQRT_2], [0.0, SQRT_2, 4.0 / 3.0]]);
        let x = solve3(&r, Vec3([-SQRT_2, 0.0, 0.0])).unwrap();
        assert!(close(x[0], -SQRT_2 / 3.0, 1e-15));
        assert!(close(x[1], 0.0, 1e-15) && close(x[2], 0.0, 1e-15));

        assert!(matches!(solve3(&Mat3::ZERO, b), Err(Error::SingularResistance { .. })));
    }

    #[test]
    fn solve3_rejects_near_singular() {
        let m = Mat3([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0 + 1e-14], [1.0, 0.0, 1.0]]);
        assert!(matches!(solve3(&m, Vec3([1.0, 1.0, 1.0])), Err(Error::SingularResistance { .. })));
    }

    #[test]
    fn adjugate_identity() {
        let m = Mat3([[2.0, -1.0, 0.5], [0.3, 4.0, 1.0], [-2.0, 0.1, 3.0]]);
        let p = m * m.adjugate();
        let det = m.det();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { det } else { 0.0 };
                assert!(close(p.0[i][j], want, 1e-12));
            }
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn pose() -> impl Strategy<Value = Pose> {
            (-5.0..5.0f64, -5.0..5.0f64, -4.0..4.0f64).prop_map(|(x, y, t)| Pose::new(x, y, t).unwrap())
        }

        fn twist() -> impl Strategy<Value = Twist> {
            (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b, c)| Twist::new(a, b, c).unwrap())
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn rotation_inverse(alpha in -100.0..100.0f64) {
                let p = rotation(alpha).unwrap() * rotation(-alpha).unwrap();
                for i in 0..2 {
                    for j in 0..2 {
                        prop_assert!((p.0[i][j] - Mat2::IDENTITY.0[i][j]).abs() <= 1e-14);
                    }
                }
                prop_assert!((rotation(alpha).unwrap().det() - 1.0).abs() <= 1e-15);
            }
        }

        proptest! {
            #[test]
            fn compose_is_associative(a in pose(), b in pose(), c in pose()) {
                let l = a.compose(&b).compose(&c);
                let r = a.compose(&b.compose(&c));
                prop_assert!(l.distance_max(&r) <= 1e-12);
            }

            #[test]
            fn inverse_cancels(g in pose()) {
                prop_assert!(g.compose(&g.inverse()).distance_max(&Pose::IDENTITY) <= 1e-12);
                prop_assert!(g.inverse().compose(&g).distance_max(&Pose::IDENTITY) <= 1e-12);
            }

            #[test]
            fn commutator_antisymmetric_bilinear(a in twist(), b in twist(), c in twist(), k in -2.0..2.0f64) {
                let ab = se2_commutator(&a, &b);
                let ba = se2_commutator(&b, &a);
                prop_assert_eq!(ab.as_vec3(), -ba.as_vec3());
                let lhs = se2_commutator(&Twist::from_vec3(a.as_vec3().scale(k) + c.as_vec3()), &b).as_vec3();
                let rhs = ab.as_vec3().scale(k) + se2_commutator(&c, &b).as_vec3();
                prop_assert!((lhs - rhs).max_abs() <= 1e-12);
            }

            #[test]
            fn solve_residual(m in proptest::array::uniform9(-2.0..2.0f64), b in proptest::array::uniform3(-2.0..2.0f64)) {
                let mut mm = [[0.0; 3]; 3];
                for (k, v) in m.iter().enumerate() {
                    mm[k / 3][k % 3] = *v;
                }
                for (i, row) in mm.iter_mut().enumerate() {
                    row[i] += 7.0;
                }
                let m = Mat3(mm);
                let x = solve3(&m, Vec3(b)).unwrap();
                prop_assert!((m * x - Vec3(b)).norm() <= 1e-10 * Vec3(b).norm().max(1e-300));
            }
        }
    }
}
