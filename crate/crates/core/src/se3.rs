//! Rotation and pose utilities on SO(3) and SE(3).
//!
//! Rotations are plain `Matrix3<f64>`. The generalized coordinate used by the
//! dynamics stacks the position with the three rows of the rotation matrix.

use nalgebra::{Matrix3, Matrix6, Rotation3, UnitQuaternion, Vector3, Vector6};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum Se3Error {
    #[error("matrix is not skew-symmetric (asymmetry {0:e})")]
    NotSkew(f64),
    #[error("cannot project a singular or reflective matrix onto SO(3) (det {0:e})")]
    BadProjection(f64),
    #[error("non-finite input")]
    NonFinite,
}

/// Skew-symmetry tolerance accepted by [`vee`].
pub const SKEW_TOL: f64 = 1e-8;

/// Position and attitude of a rigid body.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub rotation: Matrix3<f64>,
}

impl Pose {
    pub fn new(position: Vector3<f64>, rotation: Matrix3<f64>) -> Self {
        Self { position, rotation }
    }

    pub fn at(position: Vector3<f64>) -> Self {
        Self { position, rotation: Matrix3::identity() }
    }

    pub fn identity() -> Self {
        Self::at(Vector3::zeros())
    }

    /// Rotation rows r1, r2, r3 flattened row-major.
    pub fn rotation_entries(&self) -> [f64; 9] {
        let r = &self.rotation;
        [r[(0, 0)], r[(0, 1)], r[(0, 2)], r[(1, 0)], r[(1, 1)], r[(1, 2)], r[(2, 0)], r[(2, 1)], r[(2, 2)]]
    }

    pub fn quaternion(&self) -> UnitQuaternion<f64> {
        quaternion_from_matrix(&self.rotation)
    }
}

/// Gradient of a scalar with respect to the configuration `(p, r1, r2, r3)`.
/// Row `i` of `rotation` holds the gradient with respect to row `i` of R.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfigGradient {
    pub position: Vector3<f64>,
    pub rotation: Matrix3<f64>,
}

impl ConfigGradient {
    pub fn zeros() -> Self {
        Self { position: Vector3::zeros(), rotation: Matrix3::zeros() }
    }
}

pub fn hat(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Inverse of [`hat`]; rejects matrices whose symmetric part exceeds [`SKEW_TOL`].
pub fn vee(s: &Matrix3<f64>) -> Result<Vector3<f64>, Se3Error> {
    if !s.iter().all(|v| v.is_finite()) {
        return Err(Se3Error::NonFinite);
    }
    let asym = (s + s.transpose()).norm();
    if asym > SKEW_TOL {
        return Err(Se3Error::NotSkew(asym));
    }
    Ok(skew_vee(s))
}

/// vee of the skew part, no checks.
pub(crate) fn skew_vee(s: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(
        0.5 * (s[(2, 1)] - s[(1, 2)]),
        0.5 * (s[(0, 2)] - s[(2, 0)]),
        0.5 * (s[(1, 0)] - s[(0, 1)]),
    )
}

pub fn exp_so3(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = w.norm_squared();
    let theta = theta2.sqrt();
    let (a, b) = if theta < 1e-4 {
        (1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0, 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    let k = hat(w);
    Matrix3::identity() + k * a + k * k * b
}

/// Rotation vector with angle in `[0, pi]`.
pub fn log_so3(r: &Matrix3<f64>) -> Vector3<f64> {
    let v = skew_vee(r);
    let s = v.norm();
    let c = 0.5 * (r.trace() - 1.0);
    let theta = s.atan2(c);
    if c > -0.99 {
        if s < 1e-12 {
            return v;
        }
        return v * (theta / s);
    }
    // near pi: recover the axis from the symmetric part
    let sym = (r + r.transpose()) * 0.5;
    let nn = (sym - Matrix3::identity() * c) / (1.0 - c);
    let mut k = 0;
    for i in 1..3 {
        if nn[(i, i)] > nn[(k, k)] {
            k = i;
        }
    }
    let mut n: Vector3<f64> = nn.column(k).into();
    n /= n.norm();
    if n.dot(&v) < 0.0 {
        n = -n;
    }
    n * theta
}

/// Rotation angle of `r` in `[0, pi]`.
pub fn rotation_angle(r: &Matrix3<f64>) -> f64 {
    let s = skew_vee(r).norm();
    let c = 0.5 * (r.trace() - 1.0);
    s.atan2(c)
}

/// Closest rotation in Frobenius norm (polar factor).
pub fn project_to_so3(m: &Matrix3<f64>) -> Result<Matrix3<f64>, Se3Error> {
    if !m.iter().all(|v| v.is_finite()) {
        return Err(Se3Error::NonFinite);
    }
    let det = m.determinant();
    let scale = m.norm().powi(3).max(f64::MIN_POSITIVE);
    if det <= 1e-12 * scale {
        return Err(Se3Error::BadProjection(det));
    }
    let svd = m.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    Ok(u * vt)
}

/// `1/2 vee(Re - Re^T)`, the attitude error used by the controller.
pub fn rotation_error_vee(re: &Matrix3<f64>) -> Vector3<f64> {
    skew_vee(re)
}

/// `q_cross^T grad_q = [R^T dp ; sum_i d_{r_i} x r_i]`, the generalized force
/// conjugate to a configuration gradient (negated, it is the body wrench).
pub fn config_cross_transpose(rotation: &Matrix3<f64>, grad: &ConfigGradient) -> Vector6<f64> {
    let f = rotation.transpose() * grad.position;
    let mut t = Vector3::zeros();
    for i in 0..3 {
        let ri: Vector3<f64> = rotation.row(i).transpose();
        let gi: Vector3<f64> = grad.rotation.row(i).transpose();
        t += gi.cross(&ri);
    }
    Vector6::new(f.x, f.y, f.z, t.x, t.y, t.z)
}

/// Momentum cross operator `[[0, p_v^], [p_v^, p_w^]]`.
pub fn momentum_cross(momentum: &Vector6<f64>) -> Matrix6<f64> {
    let pv = hat(&momentum.fixed_rows::<3>(0).into());
    let pw = hat(&momentum.fixed_rows::<3>(3).into());
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&pv);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&pv);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&pw);
    m
}

pub fn quaternion_from_matrix(r: &Matrix3<f64>) -> UnitQuaternion<f64> {
    UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*r))
}

/// Rotation about the world z axis.
pub fn yaw_rotation(psi: f64) -> Matrix3<f64> {
    exp_so3(&Vector3::new(0.0, 0.0, psi))
}

/// Rotation about the world y axis (pitch in the xz-plane).
pub fn pitch_rotation(theta: f64) -> Matrix3<f64> {
    exp_so3(&Vector3::new(0.0, theta, 0.0))
}

pub fn is_rotation(r: &Matrix3<f64>, tol: f64) -> bool {
    (r.transpose() * r - Matrix3::identity()).norm() <= tol && (r.determinant() - 1.0).abs() <= tol
}
