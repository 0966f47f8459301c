//! Port-Hamiltonian rigid-body dynamics on SE(3) and the ground-truth vehicle.
//!
//! The configuration is `q = (p, r1, r2, r3)` and the momentum `(p_v, p_w)` is
//! expressed in the body frame:
//!
//! ```text
//! q_dot = q_cross dH/dp
//! p_dot = -q_cross^T dH/dq + p_cross dH/dp + B(q) u + d
//! ```

use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, SVector, Vector3, Vector6};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use rand_distr::{Distribution, Normal};

use crate::se3::{config_cross_transpose, exp_so3, hat, momentum_cross, project_to_so3, ConfigGradient, Pose};

#[derive(Debug, Error)]
pub enum PlantError {
    #[error("state became non-finite")]
    Diverged,
    #[error("input has {got} entries, model expects {want}")]
    InputSize { got: usize, want: usize },
    #[error("invalid parameters: {0}")]
    Invalid(String),
}

/// A (possibly learned) Hamiltonian `H = 1/2 p^T M^-1(q) p + U(q)` with input gain `B(q)`.
pub trait HamiltonianModel {
    fn input_dim(&self) -> usize;
    fn mass_inverse(&self, pose: &Pose) -> Matrix6<f64>;
    fn potential(&self, pose: &Pose) -> f64;
    fn input_gain(&self, pose: &Pose) -> DMatrix<f64>;
    /// Gradient of `H` with respect to the configuration at fixed momentum.
    fn config_gradient(&self, pose: &Pose, momentum: &Vector6<f64>) -> ConfigGradient;

    fn hamiltonian(&self, state: &State) -> f64 {
        let minv = self.mass_inverse(&state.pose);
        0.5 * state.momentum.dot(&(minv * state.momentum)) + self.potential(&state.pose)
    }

    fn twist(&self, state: &State) -> Vector6<f64> {
        self.mass_inverse(&state.pose) * state.momentum
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub pose: Pose,
    /// Body-frame momentum `(p_v, p_w)`.
    pub momentum: Vector6<f64>,
}

impl State {
    pub fn at_rest(pose: Pose) -> Self {
        Self { pose, momentum: Vector6::zeros() }
    }

    /// State with body twist `zeta` under `model`'s mass matrix.
    pub fn from_twist<M: HamiltonianModel + ?Sized>(model: &M, pose: Pose, zeta: &Vector6<f64>) -> Self {
        let m = model.mass_inverse(&pose).try_inverse().expect("mass matrix must be invertible");
        Self { pose, momentum: m * zeta }
    }

    pub fn is_finite(&self) -> bool {
        self.pose.position.iter().chain(self.pose.rotation.iter()).chain(self.momentum.iter()).all(|v| v.is_finite())
    }

    fn pack(&self) -> SVector<f64, 18> {
        let mut x = SVector::<f64, 18>::zeros();
        x.fixed_rows_mut::<3>(0).copy_from(&self.pose.position);
        for (k, v) in self.pose.rotation_entries().iter().enumerate() {
            x[3 + k] = *v;
        }
        x.fixed_rows_mut::<6>(12).copy_from(&self.momentum);
        x
    }

    fn unpack(x: &SVector<f64, 18>) -> Self {
        let position = Vector3::new(x[0], x[1], x[2]);
        let rotation = Matrix3::from_row_slice(&x.as_slice()[3..12]);
        let momentum = Vector6::from_column_slice(&x.as_slice()[12..18]);
        Self { pose: Pose { position, rotation }, momentum }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Actuation {
    /// Fully actuated, `B = I6`.
    Hexarotor,
    /// Collective thrust along body z plus three torques, `B = [0; I4]`.
    Quadrotor,
}

impl Actuation {
    pub fn gain(&self) -> DMatrix<f64> {
        match self {
            Actuation::Hexarotor => DMatrix::identity(6, 6),
            Actuation::Quadrotor => {
                let mut b = DMatrix::zeros(6, 4);
                for i in 0..4 {
                    b[(i + 2, i)] = 1.0;
                }
                b
            }
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Actuation::Hexarotor => 6,
            Actuation::Quadrotor => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantParams {
    pub mass: f64,
    /// Principal moments of inertia.
    pub inertia: Vector3<f64>,
    pub gravity: f64,
    pub actuation: Actuation,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self { mass: 6.77, inertia: Vector3::new(1.05, 1.05, 2.05), gravity: 9.8, actuation: Actuation::Hexarotor }
    }
}

impl PlantParams {
    pub fn quadrotor() -> Self {
        Self { actuation: Actuation::Quadrotor, ..Self::default() }
    }

    pub fn hover_thrust(&self) -> f64 {
        self.mass * self.gravity
    }
}

/// Known rigid body with gravity potential `U = m g z`.
#[derive(Clone, Debug)]
pub struct RigidBody {
    pub params: PlantParams,
    minv: Matrix6<f64>,
    gain: DMatrix<f64>,
}

impl RigidBody {
    pub fn new(params: PlantParams) -> Result<Self, PlantError> {
        if !(params.mass > 0.0) || params.inertia.iter().any(|j| !(*j > 0.0)) {
            return Err(PlantError::Invalid("mass and inertia must be positive".into()));
        }
        let mut minv = Matrix6::zeros();
        for i in 0..3 {
            minv[(i, i)] = 1.0 / params.mass;
            minv[(i + 3, i + 3)] = 1.0 / params.inertia[i];
        }
        let gain = params.actuation.gain();
        Ok(Self { params, minv, gain })
    }

    pub fn hexarotor() -> Self {
        Self::new(PlantParams::default()).unwrap()
    }

    pub fn quadrotor() -> Self {
        Self::new(PlantParams::quadrotor()).unwrap()
    }

    /// Input that balances gravity at rest with attitude `rotation`.
    pub fn hover_input(&self, rotation: &Matrix3<f64>) -> DVector<f64> {
        let w = rotation.transpose() * Vector3::new(0.0, 0.0, self.params.hover_thrust());
        let wrench = Vector6::new(w.x, w.y, w.z, 0.0, 0.0, 0.0);
        let pinv = self.gain.clone().pseudo_inverse(1e-12).unwrap();
        pinv * DVector::from_column_slice(wrench.as_slice())
    }
}

impl HamiltonianModel for RigidBody {
    fn input_dim(&self) -> usize {
        self.gain.ncols()
    }

    fn mass_inverse(&self, _pose: &Pose) -> Matrix6<f64> {
        self.minv
    }

    fn potential(&self, pose: &Pose) -> f64 {
        self.params.mass * self.params.gravity * pose.position.z
    }

    fn input_gain(&self, _pose: &Pose) -> DMatrix<f64> {
        self.gain.clone()
    }

    fn config_gradient(&self, _pose: &Pose, _momentum: &Vector6<f64>) -> ConfigGradient {
        ConfigGradient {
            position: Vector3::new(0.0, 0.0, self.params.mass * self.params.gravity),
            rotation: Matrix3::zeros(),
        }
    }
}

/// Time derivative of the state as `(p_dot, R_dot, momentum_dot)`.
pub fn vector_field<M: HamiltonianModel + ?Sized>(
    model: &M,
    state: &State,
    u: &DVector<f64>,
    d: &Vector6<f64>,
) -> (Vector3<f64>, Matrix3<f64>, Vector6<f64>) {
    let pose = &state.pose;
    let zeta = model.mass_inverse(pose) * state.momentum;
    let v: Vector3<f64> = zeta.fixed_rows::<3>(0).into();
    let w: Vector3<f64> = zeta.fixed_rows::<3>(3).into();
    let grad = model.config_gradient(pose, &state.momentum);
    let p_dot = pose.rotation * v;
    // row i of R w^ is r_i x w
    let r_dot = pose.rotation * hat(&w);
    let b = model.input_gain(pose);
    let bu = &b * u;
    let mom_dot = momentum_cross(&state.momentum) * zeta - config_cross_transpose(&pose.rotation, &grad)
        + Vector6::from_column_slice(bu.as_slice())
        + d;
    (p_dot, r_dot, mom_dot)
}

fn packed_field<M: HamiltonianModel + ?Sized>(
    model: &M,
    x: &SVector<f64, 18>,
    u: &DVector<f64>,
    d: &Vector6<f64>,
) -> SVector<f64, 18> {
    let (p, r, m) = vector_field(model, &State::unpack(x), u, d);
    State { pose: Pose { position: p, rotation: r }, momentum: m }.pack()
}

/// One RK4 step with inputs sampled from `input(t)`, no projection.
pub fn rk4_raw<M: HamiltonianModel + ?Sized>(
    model: &M,
    state: &State,
    input: &dyn Fn(f64) -> DVector<f64>,
    d: &Vector6<f64>,
    t0: f64,
    h: f64,
) -> State {
    let x = state.pack();
    let (u0, um, u1) = (input(t0), input(t0 + 0.5 * h), input(t0 + h));
    let k1 = packed_field(model, &x, &u0, d);
    let k2 = packed_field(model, &(x + k1 * (0.5 * h)), &um, d);
    let k3 = packed_field(model, &(x + k2 * (0.5 * h)), &um, d);
    let k4 = packed_field(model, &(x + k3 * h), &u1, d);
    State::unpack(&(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)))
}

/// One RK4 step with zero-order-hold input and disturbance, then projection onto SO(3).
pub fn step<M: HamiltonianModel + ?Sized>(
    model: &M,
    state: &State,
    u: &DVector<f64>,
    d: &Vector6<f64>,
    dt: f64,
) -> Result<State, PlantError> {
    if u.len() != model.input_dim() {
        return Err(PlantError::InputSize { got: u.len(), want: model.input_dim() });
    }
    finish(rk4_raw(model, state, &|_| u.clone(), d, 0.0, dt))
}

fn finish(mut next: State) -> Result<State, PlantError> {
    if !next.is_finite() {
        return Err(PlantError::Diverged);
    }
    next.pose.rotation = project_to_so3(&next.pose.rotation).map_err(|_| PlantError::Diverged)?;
    Ok(next)
}

/// Advances over `dt` in `substeps` projected RK4 steps; `input` may vary within the interval.
pub fn advance<M: HamiltonianModel + ?Sized>(
    model: &M,
    state: &State,
    input: &dyn Fn(f64) -> DVector<f64>,
    d: &Vector6<f64>,
    t0: f64,
    dt: f64,
    substeps: usize,
) -> Result<State, PlantError> {
    let n = substeps.max(1);
    let h = dt / n as f64;
    let mut x = *state;
    for k in 0..n {
        x = finish(rk4_raw(model, &x, input, d, t0 + k as f64 * h, h))?;
    }
    Ok(x)
}

/// Disturbance with components uniform in `[-delta/2, delta/2]`, rescaled onto
/// the ball of radius `delta` when it falls outside.
pub fn sample_disturbance<R: Rng + ?Sized>(delta: f64, rng: &mut R) -> Vector6<f64> {
    if delta <= 0.0 {
        return Vector6::zeros();
    }
    let mut d = Vector6::from_fn(|_, _| rng.gen_range(-0.5 * delta..=0.5 * delta));
    let n = d.norm();
    if n > delta {
        d *= delta / n;
    }
    d
}

/// Input sinusoid and state-estimation noise.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Amplitude of the sinusoid added to every input channel (0 disables).
    pub input_amplitude: f64,
    /// Sinusoid frequency in Hz.
    pub input_frequency: f64,
    /// Multiple of the base estimation standard deviations (0 disables).
    pub estimation_scale: f64,
}

impl NoiseSpec {
    pub fn sinusoid() -> Self {
        Self { input_amplitude: 5.0, input_frequency: 4800.0, estimation_scale: 0.0 }
    }

    pub fn estimation(scale: f64) -> Self {
        Self { estimation_scale: scale, ..Self::default() }
    }

    /// Base standard deviations: position (m), angle (rad), linear velocity (m/s), angular velocity (rad/s).
    pub fn base_std() -> [f64; 4] {
        [0.01, 0.01f64.to_radians(), 0.02, 0.14f64.to_radians()]
    }

    pub fn input_noise(&self, t: f64, m: usize) -> DVector<f64> {
        if self.input_amplitude == 0.0 {
            return DVector::zeros(m);
        }
        DVector::repeat(m, self.input_amplitude * (std::f64::consts::TAU * self.input_frequency * t).sin())
    }
}

/// State estimate seen by the controller; the rotation is re-projected after the angle perturbation.
pub fn corrupt<M: HamiltonianModel + ?Sized, R: Rng + ?Sized>(model: &M, x: &State, noise: &NoiseSpec, rng: &mut R) -> State {
    if noise.estimation_scale == 0.0 {
        return *x;
    }
    let s = NoiseSpec::base_std().map(|v| v * noise.estimation_scale);
    let mut draw = |std: f64| {
        let n = Normal::new(0.0, std).expect("finite std");
        Vector3::new(n.sample(rng), n.sample(rng), n.sample(rng))
    };
    let (dp, da, dv, dw) = (draw(s[0]), draw(s[1]), draw(s[2]), draw(s[3]));
    let rotation = project_to_so3(&(x.pose.rotation * exp_so3(&da))).unwrap_or(x.pose.rotation);
    let pose = Pose { position: x.pose.position + dp, rotation };
    let mut zeta = model.twist(x);
    for i in 0..3 {
        zeta[i] += dv[i];
        zeta[i + 3] += dw[i];
    }
    State::from_twist(model, pose, &zeta)
}


/// Euclidean mechanical system `H = 1/2 p^T M^-1 p + c^T q` with constant
/// mass matrix and input gain.
#[derive(Clone, Debug)]
pub struct EuclideanSystem {
    pub mass_inverse: DMatrix<f64>,
    /// Gradient of the linear potential.
    pub potential_gradient: DVector<f64>,
    pub gain: DMatrix<f64>,
}

impl EuclideanSystem {
    pub fn new(mass_inverse: DMatrix<f64>, potential_gradient: DVector<f64>, gain: DMatrix<f64>) -> Result<Self, PlantError> {
        let n = mass_inverse.nrows();
        if mass_inverse.ncols() != n || potential_gradient.len() != n || gain.nrows() != n {
            return Err(PlantError::Invalid("inconsistent dimensions".into()));
        }
        Ok(Self { mass_inverse, potential_gradient, gain })
    }

    /// Unit-mass double integrator in `n` dimensions.
    pub fn double_integrator(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n), DVector::zeros(n), DMatrix::identity(n, n)).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.mass_inverse.nrows()
    }

    pub fn energy(&self, q: &DVector<f64>, p: &DVector<f64>) -> f64 {
        0.5 * p.dot(&(&self.mass_inverse * p)) + self.potential_gradient.dot(q)
    }

    /// RK4 step with zero-order-hold input and disturbance.
    pub fn step(
        &self,
        q: &DVector<f64>,
        p: &DVector<f64>,
        u: &DVector<f64>,
        d: &DVector<f64>,
        dt: f64,
    ) -> (DVector<f64>, DVector<f64>) {
        let force = &self.gain * u + d - &self.potential_gradient;
        let f = |p: &DVector<f64>| (&self.mass_inverse * p, force.clone());
        let (a1, b1) = f(p);
        let (a2, b2) = f(&(p + &b1 * (0.5 * dt)));
        let (a3, b3) = f(&(p + &b2 * (0.5 * dt)));
        let (a4, b4) = f(&(p + &b3 * dt));
        (
            q + (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (dt / 6.0),
            p + (b1 + b2 * 2.0 + b3 * 2.0 + b4) * (dt / 6.0),
        )
    }
}
