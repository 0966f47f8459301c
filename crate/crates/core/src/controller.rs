//! Energy-shaping and damping-injection (IDA-PBC) control on SE(3) and in R^n.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, Vector3, Vector6};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plant::{EuclideanSystem, HamiltonianModel, State};
use crate::se3::{config_cross_transpose, momentum_cross, rotation_error_vee, skew_vee, Pose};

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("input gain is rank deficient (sigma_min {sigma_min:e}, sigma_max {sigma_max:e})")]
    RankDeficient { sigma_min: f64, sigma_max: f64 },
    #[error("control computation produced non-finite values")]
    NonFinite,
    #[error("requested thrust direction is degenerate")]
    DegenerateThrust,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gains {
    pub k_p: f64,
    pub k_r: f64,
    /// Diagonal of the damping matrix `K_d`.
    pub k_d: Vector6<f64>,
    /// Cross-term weight in the Lyapunov function.
    pub rho: f64,
}

impl Default for Gains {
    fn default() -> Self {
        Self { k_p: 20.0, k_r: 50.0, k_d: Vector6::repeat(15.0), rho: 3.5822e-5 }
    }
}

impl Gains {
    pub fn damping(&self) -> Matrix6<f64> {
        Matrix6::from_diagonal(&self.k_d)
    }
}

/// Tracking error between a state and a target state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorState {
    /// `p - p*` in the world frame.
    pub position: Vector3<f64>,
    /// `R^T (p - p*)`.
    pub body_position: Vector3<f64>,
    /// `R*^T R`.
    pub rotation: Matrix3<f64>,
    pub momentum: Vector6<f64>,
}

pub fn error_state(x: &State, target: &State) -> ErrorState {
    let position = x.pose.position - target.pose.position;
    ErrorState {
        position,
        body_position: x.pose.rotation.transpose() * position,
        rotation: target.pose.rotation.transpose() * x.pose.rotation,
        momentum: x.momentum - target.momentum,
    }
}

/// `H_d = 1/2 p_e^T M^-1 p_e + k_p/2 |p_e|^2 + k_R/2 tr(I - R_e)`.
pub fn desired_hamiltonian(err: &ErrorState, gains: &Gains, minv: &Matrix6<f64>) -> f64 {
    0.5 * err.momentum.dot(&(minv * err.momentum))
        + 0.5 * gains.k_p * err.position.norm_squared()
        + 0.5 * gains.k_r * (3.0 - err.rotation.trace())
}

/// Potential error wrench `e = [k_p R^T p_e ; k_R/2 vee(R_e - R_e^T)]`.
pub fn potential_error(err: &ErrorState, gains: &Gains) -> Vector6<f64> {
    let ep = err.body_position * gains.k_p;
    let er = rotation_error_vee(&err.rotation) * gains.k_r;
    Vector6::new(ep.x, ep.y, ep.z, er.x, er.y, er.z)
}

#[derive(Clone, Debug)]
pub struct ControlOutput {
    pub u: DVector<f64>,
    /// Wrench requested from the actuators.
    pub demand: Vector6<f64>,
    /// Part of the demand the actuators cannot produce, `(B B^+ - I) b`.
    pub unmatched: Vector6<f64>,
}

/// Pseudo-inverse of a full-column-rank matrix.
pub fn full_rank_pinv(b: &DMatrix<f64>) -> Result<DMatrix<f64>, ControlError> {
    let svd = b.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if b.ncols() > b.nrows() || !(smin > 1e-8 * smax) {
        return Err(ControlError::RankDeficient { sigma_min: smin, sigma_max: smax });
    }
    svd.pseudo_inverse(0.0).map_err(|_| ControlError::NonFinite)
}

/// IDA-PBC law `u = B^+ (q_cross^T dH/dq - p_cross dH/dp - e - K_d M^-1 p_e)`.
pub fn ida_pbc_control<M: HamiltonianModel + ?Sized>(
    model: &M,
    x: &State,
    target: &State,
    gains: &Gains,
) -> Result<ControlOutput, ControlError> {
    let minv = model.mass_inverse(&x.pose);
    let zeta = minv * x.momentum;
    let grad = model.config_gradient(&x.pose, &x.momentum);
    let err = error_state(x, target);
    let demand = config_cross_transpose(&x.pose.rotation, &grad)
        - momentum_cross(&x.momentum) * zeta
        - potential_error(&err, gains)
        - gains.damping() * minv * err.momentum;
    let b = model.input_gain(&x.pose);
    let pinv = full_rank_pinv(&b)?;
    let dvec = DVector::from_column_slice(demand.as_slice());
    let u = &pinv * &dvec;
    let realized = &b * &u;
    let unmatched = Vector6::from_column_slice(realized.as_slice()) - demand;
    if !u.iter().chain(unmatched.iter()).all(|v| v.is_finite()) {
        return Err(ControlError::NonFinite);
    }
    Ok(ControlOutput { u, demand, unmatched })
}

/// Desired attitude whose body z axis follows the world-frame force demand
/// `R b_v`, with heading set by the yaw angle `psi`.
pub fn desired_rotation(force_body: &Vector3<f64>, rotation: &Matrix3<f64>, psi: f64) -> Result<Matrix3<f64>, ControlError> {
    let f = rotation * force_body;
    let n = f.norm();
    if !(n > 1e-9) {
        return Err(ControlError::DegenerateThrust);
    }
    let b3 = f / n;
    let heading = Vector3::new(-psi.sin(), psi.cos(), 0.0);
    let b1 = heading.cross(&b3);
    let m = b1.norm();
    if !(m > 1e-9) {
        return Err(ControlError::DegenerateThrust);
    }
    let b1 = b1 / m;
    let b2 = b3.cross(&b1);
    Ok(Matrix3::from_columns(&[b1, b2, b3]))
}

/// Body angular velocity of a rotation trajectory from a backward difference.
pub fn angular_velocity_from_difference(prev: &Matrix3<f64>, current: &Matrix3<f64>, dt: f64) -> Vector3<f64> {
    skew_vee(&(current.transpose() * (current - prev))) / dt
}

/// Underactuated tracking: the attitude target is built every step from the
/// translational force demand, and its rate from consecutive targets.
#[derive(Clone, Debug)]
pub struct ThrustVectorController {
    pub gains: Gains,
    pub yaw: f64,
    pub dt: f64,
    prev: Option<Matrix3<f64>>,
}

impl ThrustVectorController {
    pub fn new(gains: Gains, yaw: f64, dt: f64) -> Self {
        Self { gains, yaw, dt, prev: None }
    }

    pub fn reset(&mut self) {
        self.prev = None;
    }

    /// Returns the control and the full target state used.
    pub fn control<M: HamiltonianModel + ?Sized>(
        &mut self,
        model: &M,
        x: &State,
        goal: &Vector3<f64>,
    ) -> Result<(ControlOutput, State), ControlError> {
        let provisional = State::at_rest(Pose::new(*goal, self.prev.unwrap_or(x.pose.rotation)));
        let first = ida_pbc_control(model, x, &provisional, &self.gains)?;
        let force = Vector3::new(first.demand[0], first.demand[1], first.demand[2]);
        let r_star = desired_rotation(&force, &x.pose.rotation, self.yaw)?;
        let w_star = match self.prev {
            Some(p) => angular_velocity_from_difference(&p, &r_star, self.dt),
            None => Vector3::zeros(),
        };
        self.prev = Some(r_star);
        let re = r_star.transpose() * x.pose.rotation;
        let w = re.transpose() * w_star;
        let m = model.mass_inverse(&x.pose).try_inverse().ok_or(ControlError::NonFinite)?;
        let momentum = m * Vector6::new(0.0, 0.0, 0.0, w.x, w.y, w.z);
        let target = State { pose: Pose::new(*goal, r_star), momentum };
        let out = ida_pbc_control(model, x, &target, &self.gains)?;
        Ok((out, target))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EuclideanGains {
    pub k_p: f64,
    pub k_d: Vec<f64>,
    pub rho: f64,
}

impl EuclideanGains {
    pub fn damping(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.k_d))
    }
}

/// `u = B^+ (dH/dq - k_p q_e - K_d M^-1 p_e)` toward `(q*, 0)`.
pub fn euclidean_ida_pbc(
    sys: &EuclideanSystem,
    q: &DVector<f64>,
    p: &DVector<f64>,
    q_star: &DVector<f64>,
    gains: &EuclideanGains,
) -> Result<DVector<f64>, ControlError> {
    let demand = &sys.potential_gradient - (q - q_star) * gains.k_p - gains.damping() * (&sys.mass_inverse * p);
    let u = full_rank_pinv(&sys.gain)? * demand;
    if !u.iter().all(|v| v.is_finite()) {
        return Err(ControlError::NonFinite);
    }
    Ok(u)
}
