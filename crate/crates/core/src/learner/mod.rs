//! Learning SE(3) Hamiltonian dynamics from trajectory data.

mod data;
mod model;

pub use data::{dataset_hash, dataset_samples, pose_from_q, q_from_pose, read_jsonl, write_jsonl, Sample, Trajectory};
pub use model::{GainSpec, InertiaSpec, LearnedModel, Layout, MassSpec, ModelSpec, PotentialSpec, INERTIA_EPS};

use nalgebra::{Matrix3, Vector3, Vector6};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::{Tape, Var};
use crate::plant::{HamiltonianModel, PlantParams};
use crate::se3::Pose;
use model::{build_dynamics, build_momentum, build_terms, pose_vars};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("loss diverged after reducing the learning rate")]
    Diverged,
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("rollout produced non-finite values")]
    NonFinite,
    #[error("input has {got} entries, model expects {want}")]
    InputSize { got: usize, want: usize },
    #[error("dataset: {0}")]
    Data(String),
}

impl LearnedModel {
    /// Parameters reproducing a known rigid body: zero network weights and
    /// biases/offsets set to the true values.
    pub fn exact(spec: ModelSpec, truth: &PlantParams) -> Self {
        let mut m = LearnedModel::init(spec, 0);
        m.params.iter_mut().for_each(|p| *p = 0.0);
        let lay = m.layout.clone();
        let last_bias = |net: &crate::autodiff::Mlp| {
            let total = net.offset + net.param_count();
            total - net.outputs()
        };
        if let (MassSpec::Residual { prior, .. }, Some(net)) = (&m.spec.mass, &lay.mass) {
            m.params[last_bias(net)] = (1.0 / truth.mass).sqrt() - (1.0 / prior).sqrt();
        }
        match (&m.spec.inertia, &lay.inertia) {
            (InertiaSpec::Cholesky { prior, .. }, Some(net)) => {
                let b = last_bias(net);
                for (k, idx) in [0usize, 2, 5].iter().enumerate() {
                    let target = (1.0 / truth.inertia[k] - INERTIA_EPS).sqrt();
                    m.params[b + idx] = target - (1.0 / prior[k]).sqrt();
                }
            }
            (InertiaSpec::DiagonalResidual { prior, .. }, Some(net)) => {
                let b = last_bias(net);
                for k in 0..3 {
                    m.params[b + k] = (1.0 / truth.inertia[k]).sqrt() - (1.0 / prior[k]).sqrt();
                }
            }
            _ => {}
        }
        if let (PotentialSpec::Learned { prior, .. }, Some(lin)) = (&m.spec.potential, lay.potential_linear) {
            m.params[lin + 2] = truth.mass * truth.gravity - prior[2];
            m.params[lin] = -prior[0];
            m.params[lin + 1] = -prior[1];
        }
        if let (GainSpec::Learned { inputs, .. }, Some(off)) = (&m.spec.gain, lay.gain_offset) {
            let b = truth.actuation.gain();
            for i in 0..6 {
                for j in 0..*inputs {
                    m.params[off + i * inputs + j] = b[(i, j)];
                }
            }
        }
        m
    }
}

/// RK4 rollout of one sample on the tape; returns the packed final state.
fn build_rollout(tape: &mut Tape, model: &LearnedModel, q0: &Pose, zeta0: &Vector6<f64>, u: &[f64], dt: f64, substeps: usize) -> [Var; 18] {
    let (p, r) = pose_vars(tape, q0);
    let z = [zeta0[0], zeta0[1], zeta0[2], zeta0[3], zeta0[4], zeta0[5]];
    let mom = build_momentum(tape, model, &r, &z);
    let mut x = [p[0]; 18];
    x[..3].copy_from_slice(&p);
    x[3..12].copy_from_slice(&r);
    x[12..].copy_from_slice(&mom);
    let n = substeps.max(1);
    let h = dt / n as f64;
    for _ in 0..n {
        let k1 = build_dynamics(tape, model, &x, u);
        let mut x2 = x;
        for i in 0..18 {
            x2[i] = tape.axpy(x[i], k1[i], 0.5 * h);
        }
        let k2 = build_dynamics(tape, model, &x2, u);
        let mut x3 = x;
        for i in 0..18 {
            x3[i] = tape.axpy(x[i], k2[i], 0.5 * h);
        }
        let k3 = build_dynamics(tape, model, &x3, u);
        let mut x4 = x;
        for i in 0..18 {
            x4[i] = tape.axpy(x[i], k3[i], h);
        }
        let k4 = build_dynamics(tape, model, &x4, u);
        let mut acc = x;
        for (k, c) in [(&k1, h / 6.0), (&k2, h / 3.0), (&k3, h / 3.0), (&k4, h / 6.0)] {
            for i in 0..18 {
                acc[i] = tape.axpy(acc[i], k[i], c);
            }
        }
        x = acc;
        orthonormalize(tape, &mut x);
    }
    x
}

/// One Newton step toward the polar factor, `R <- R (3I - R^T R) / 2`, which
/// matches the plant's SO(3) projection to second order.
fn orthonormalize(tape: &mut Tape, x: &mut [Var; 18]) {
    let r = |i: usize, j: usize| x[3 + 3 * i + j];
    let mut s = [[x[0]; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let col_i = [r(0, i), r(1, i), r(2, i)];
            let col_j = [r(0, j), r(1, j), r(2, j)];
            let d = tape.dot(&col_i, &col_j);
            // (3I - R^T R) / 2
            let v = tape.scale(d, -0.5);
            let v = if i == j { tape.add_const(v, 1.5) } else { v };
            s[i][j] = v;
            s[j][i] = v;
        }
    }
    let mut out = [x[0]; 9];
    for i in 0..3 {
        let row = [r(i, 0), r(i, 1), r(i, 2)];
        for j in 0..3 {
            out[3 * i + j] = tape.dot(&row, &[s[0][j], s[1][j], s[2][j]]);
        }
    }
    x[3..12].copy_from_slice(&out);
}

/// Twist of a packed state under the model.
fn build_twist(tape: &mut Tape, model: &LearnedModel, x: &[Var; 18]) -> [Var; 6] {
    let mut r = [x[3]; 9];
    r.copy_from_slice(&x[3..12]);
    let mut mom = [x[12]; 6];
    mom.copy_from_slice(&x[12..]);
    build_terms(tape, model, &[x[0], x[1], x[2]], &r, &mom, false, false).zeta
}

/// `|p - p_obs|^2 + angle(R_obs R^T)^2 + |zeta - zeta_obs|^2` on the tape.
fn build_sample_loss(tape: &mut Tape, model: &LearnedModel, s: &Sample, substeps: usize) -> Var {
    let x = build_rollout(tape, model, &s.q0, &s.zeta0, &s.u, s.dt, substeps);
    let zeta = build_twist(tape, model, &x);
    let mut terms = Vec::with_capacity(10);
    for i in 0..3 {
        let d = tape.add_const(x[i], -s.q1.position[i]);
        terms.push(tape.square(d));
    }
    let e = s.q1.rotation_entries();
    let mut tr: Option<Var> = None;
    for k in 0..9 {
        let t = tape.scale(x[3 + k], e[k]);
        tr = Some(match tr {
            None => t,
            Some(a) => tape.add(a, t),
        });
    }
    let c = tape.add_const(tr.unwrap(), -1.0);
    let c = tape.scale(c, 0.5);
    terms.push(tape.acos_sq(c));
    for i in 0..6 {
        let d = tape.add_const(zeta[i], -s.zeta1[i]);
        terms.push(tape.square(d));
    }
    tape.sum(&terms)
}

/// Plain-value form of the per-sample loss.
pub fn pose_twist_loss(pred: &Pose, pred_zeta: &Vector6<f64>, truth: &Pose, truth_zeta: &Vector6<f64>) -> f64 {
    let angle = crate::se3::rotation_angle(&(truth.rotation * pred.rotation.transpose()));
    (pred.position - truth.position).norm_squared() + angle * angle + (pred_zeta - truth_zeta).norm_squared()
}

fn check_input(model: &LearnedModel, u: &[f64]) -> Result<(), LearnError> {
    if u.len() != model.spec.input_dim() {
        return Err(LearnError::InputSize { got: u.len(), want: model.spec.input_dim() });
    }
    Ok(())
}

/// Predicted pose and twist after holding `u` for `dt`.
pub fn model_rollout(
    model: &LearnedModel,
    q0: &Pose,
    zeta0: &Vector6<f64>,
    u: &[f64],
    dt: f64,
    substeps: usize,
) -> Result<(Pose, Vector6<f64>), LearnError> {
    check_input(model, u)?;
    let mut tape = Tape::new(&model.params);
    let x = build_rollout(&mut tape, model, q0, zeta0, u, dt, substeps);
    let z = build_twist(&mut tape, model, &x);
    let v: Vec<f64> = x.iter().map(|&a| tape.value(a)).collect();
    let pose = Pose::new(Vector3::new(v[0], v[1], v[2]), Matrix3::from_row_slice(&v[3..12]));
    let zeta = Vector6::from_fn(|i, _| tape.value(z[i]));
    if !v.iter().chain(zeta.iter()).all(|a| a.is_finite()) {
        return Err(LearnError::NonFinite);
    }
    Ok((pose, zeta))
}

/// Summed loss over samples; non-finite rollouts are skipped with a warning.
pub fn trajectory_loss(model: &LearnedModel, samples: &[Sample], substeps: usize) -> f64 {
    let mut tape = Tape::new(&model.params);
    let mut total = 0.0;
    for s in samples {
        tape.clear();
        let out = build_sample_loss(&mut tape, model, s, substeps);
        let l = tape.value(out);
        if l.is_finite() {
            total += l;
        } else {
            log::warn!("skipping sample with non-finite rollout");
        }
    }
    total
}

/// Summed loss and its gradient over the given samples.
pub fn loss_and_gradient(model: &LearnedModel, samples: &[&Sample], substeps: usize, grad: &mut [f64]) -> f64 {
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut tape = Tape::new(&model.params);
    let mut scratch = vec![0.0; grad.len()];
    let mut total = 0.0;
    for s in samples {
        tape.clear();
        let out = build_sample_loss(&mut tape, model, s, substeps);
        let l = tape.value(out);
        if !l.is_finite() {
            log::warn!("skipping sample with non-finite rollout");
            continue;
        }
        scratch.iter_mut().for_each(|g| *g = 0.0);
        tape.backward(out, &mut scratch);
        if scratch.iter().all(|g| g.is_finite()) {
            total += l;
            grad.iter_mut().zip(&scratch).for_each(|(g, s)| *g += s);
        }
    }
    total
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub iterations: usize,
    /// Samples per step; zero means the full dataset.
    pub batch_size: usize,
    pub seed: u64,
    /// RK4 substeps per data interval.
    pub substeps: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-4, iterations: 5000, batch_size: 64, seed: 0, substeps: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean per-sample loss of each step's batch.
    pub batch_losses: Vec<f64>,
    /// Summed loss over the whole dataset before and after training.
    pub initial_loss: f64,
    pub final_loss: f64,
    pub learning_rate_halved: bool,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8);
        self.t += 1;
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = b1 * self.m[i] + (1.0 - b1) * grad[i];
            self.v[i] = b2 * self.v[i] + (1.0 - b2) * grad[i] * grad[i];
            params[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + eps);
        }
    }
}

/// Adam on the mean per-sample loss. A non-finite step restores the previous
/// parameters and halves the learning rate once; a second one aborts.
pub fn train(model: &mut LearnedModel, samples: &[Sample], cfg: &TrainConfig) -> Result<TrainReport, LearnError> {
    if samples.is_empty() {
        return Err(LearnError::TooFewSamples { need: 1, got: 0 });
    }
    for s in samples {
        check_input(model, &s.u)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let initial_loss = trajectory_loss(model, samples, cfg.substeps);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let batch = if cfg.batch_size == 0 { samples.len() } else { cfg.batch_size.min(samples.len()) };
    let mut cursor = samples.len();
    let mut adam = Adam::new(model.params.len());
    let mut grad = vec![0.0; model.params.len()];
    let mut lr = cfg.learning_rate;
    let mut halved = false;
    let mut losses = Vec::with_capacity(cfg.iterations);
    for _ in 0..cfg.iterations {
        if cursor + batch > samples.len() {
            order.shuffle(&mut rng);
            cursor = 0;
        }
        let idx = &order[cursor..cursor + batch];
        cursor += batch;
        let refs: Vec<&Sample> = idx.iter().map(|&i| &samples[i]).collect();
        let l = loss_and_gradient(model, &refs, cfg.substeps, &mut grad);
        let scale = 1.0 / batch as f64;
        grad.iter_mut().for_each(|g| *g *= scale);
        let before = model.params.clone();
        adam.step(&mut model.params, &grad, lr);
        let ok = l.is_finite() && model.params.iter().all(|p| p.is_finite());
        if !ok {
            model.params = before;
            if halved {
                return Err(LearnError::Diverged);
            }
            halved = true;
            lr *= 0.5;
            continue;
        }
        losses.push(l * scale);
    }
    let final_loss = trajectory_loss(model, samples, cfg.substeps);
    Ok(TrainReport { batch_losses: losses, initial_loss, final_loss, learning_rate_halved: halved })
}

/// Disturbance magnitudes `|p_obs(n+1) - p_pred(n+1)| / dt` implied by the data.
pub fn disturbance_residuals(model: &LearnedModel, samples: &[Sample], substeps: usize) -> Result<Vec<f64>, LearnError> {
    let mut out = Vec::with_capacity(samples.len());
    for s in samples {
        let (pose, zeta) = model_rollout(model, &s.q0, &s.zeta0, &s.u, s.dt, substeps)?;
        let pred = model.mass_inverse(&pose).try_inverse().ok_or(LearnError::NonFinite)? * zeta;
        let obs = model.mass_inverse(&s.q1).try_inverse().ok_or(LearnError::NonFinite)? * s.zeta1;
        out.push((obs - pred).norm() / s.dt);
    }
    Ok(out)
}

/// 99th percentile of the implied disturbance magnitudes.
pub fn estimate_disturbance_bound(model: &LearnedModel, samples: &[Sample], substeps: usize) -> Result<f64, LearnError> {
    if samples.len() < 10 {
        return Err(LearnError::TooFewSamples { need: 10, got: samples.len() });
    }
    let mut r = disturbance_residuals(model, samples, substeps)?;
    r.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = ((0.99 * r.len() as f64).ceil() as usize).clamp(1, r.len()) - 1;
    Ok(r[k])
}

/// Saved model with provenance of its training data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub model: LearnedModel,
    pub dataset_hash: String,
    pub train: TrainConfig,
    pub delta_d: f64,
    pub report: Option<TrainReport>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::{step, RigidBody, State};
    use crate::se3::{exp_so3, yaw_rotation};
    use nalgebra::DVector;
    use rand::Rng;

    fn random_sample<R: Rng>(rng: &mut R, m: usize) -> Sample {
        let w = Vector3::from_fn(|_, _| rng.gen_range(-1.5..1.5));
        let q0 = Pose::new(Vector3::zeros(), exp_so3(&w));
        let zeta0 = Vector6::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let u: Vec<f64> = (0..m).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let w1 = Vector3::from_fn(|_, _| rng.gen_range(-1.5..1.5));
        let q1 = Pose::new(Vector3::from_fn(|_, _| rng.gen_range(-0.1..0.1)), exp_so3(&w1));
        let zeta1 = Vector6::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        Sample { q0, zeta0, u, dt: 1.0 / 24.0, q1, zeta1 }
    }

    fn probes() -> Vec<ModelSpec> {
        vec![
            ModelSpec {
                mass: MassSpec::Residual { prior: 2.0, hidden: vec![3] },
                inertia: InertiaSpec::DiagonalResidual { prior: Vector3::new(1.0, 1.5, 2.0), hidden: vec![3] },
                potential: PotentialSpec::TiedGravity { gravity: 9.8 },
                gain: GainSpec::Known { gain: nalgebra::DMatrix::identity(6, 6) },
                init_scale: 0.3,
            },
            ModelSpec {
                mass: MassSpec::Known { mass: 1.3 },
                inertia: InertiaSpec::Cholesky { prior: Vector3::new(1.0, 1.5, 2.0), hidden: vec![2] },
                potential: PotentialSpec::Learned { prior: Vector3::new(0.0, 0.0, 9.8), hidden: vec![2] },
                gain: GainSpec::Learned { inputs: 1, hidden: vec![1] },
                init_scale: 0.3,
            },
        ]
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (k, spec) in probes().into_iter().enumerate() {
            let mut model = LearnedModel::init(spec, 10 + k as u64);
            assert!(model.param_count() <= 100, "{}", model.param_count());
            let m = model.spec.input_dim();
            let mut worst: f64 = 0.0;
            for _ in 0..25 {
                let s = random_sample(&mut rng, m);
                let mut g = vec![0.0; model.param_count()];
                loss_and_gradient(&model, &[&s], 2, &mut g);
                let h = 1e-5;
                for i in 0..model.param_count() {
                    let x0 = model.params[i];
                    model.params[i] = x0 + h;
                    let lp = trajectory_loss(&model, std::slice::from_ref(&s), 2);
                    model.params[i] = x0 - h;
                    let lm = trajectory_loss(&model, std::slice::from_ref(&s), 2);
                    model.params[i] = x0;
                    let fd = (lp - lm) / (2.0 * h);
                    let rel = (g[i] - fd).abs() / fd.abs().max(g[i].abs()).max(1e-6);
                    worst = worst.max(rel);
                }
            }
            assert!(worst < 1e-4, "probe {k}: worst relative error {worst}");
        }
    }

    #[test]
    fn exact_parameters_reproduce_plant() {
        let truth = RigidBody::hexarotor();
        let model = LearnedModel::exact(ModelSpec::rigid_body(6.77, 9.8, 6), &truth.params);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let s = random_sample(&mut rng, 6);
            let x0 = State::from_twist(&truth, s.q0, &s.zeta0);
            let u = DVector::from_vec(s.u.clone());
            let next = step(&truth, &x0, &u, &Vector6::zeros(), s.dt).unwrap();
            let (pose, zeta) = model_rollout(&model, &s.q0, &s.zeta0, &s.u, s.dt, 1).unwrap();
            assert!((pose.position - next.pose.position).norm() < 1e-8);
            assert!((pose.rotation - next.pose.rotation).norm() < 1e-8);
            assert!((zeta - truth.twist(&next)).norm() < 1e-8);
        }
    }

    #[test]
    fn model_queries_match_rigid_body() {
        let truth = RigidBody::hexarotor();
        let model = LearnedModel::exact(ModelSpec::rigid_body(6.77, 9.8, 6), &truth.params);
        let pose = Pose::new(Vector3::new(1.0, -2.0, 0.5), exp_so3(&Vector3::new(0.3, -0.2, 0.9)));
        let mom = Vector6::new(0.4, -1.0, 2.0, 0.3, 0.1, -0.2);
        assert!((model.mass_inverse(&pose) - truth.mass_inverse(&pose)).norm() < 1e-6);
        assert!((model.potential(&pose) - truth.potential(&pose)).abs() < 1e-9);
        assert!((model.input_gain(&pose) - truth.input_gain(&pose)).norm() < 1e-12);
        let (a, b) = (model.config_gradient(&pose, &mom), truth.config_gradient(&pose, &mom));
        assert!((a.position - b.position).norm() < 1e-9);
        assert!((a.rotation - b.rotation).norm() < 1e-9);
    }

    #[test]
    fn config_gradient_matches_finite_differences() {
        let mut spec = probes().remove(0);
        spec.init_scale = 1.0;
        let model = LearnedModel::init(spec, 2);
        let pose = Pose::new(Vector3::new(0.0, 0.0, 1.5), exp_so3(&Vector3::new(0.3, -0.2, 0.9)));
        let mom = Vector6::new(0.4, -1.0, 2.0, 0.3, 0.1, -0.2);
        let h = 1e-6;
        let energy = |p: &Pose| model.potential(p) + 0.5 * mom.dot(&(model.mass_inverse(p) * mom));
        let g = model.config_gradient(&pose, &mom);
        for i in 0..3 {
            for j in 0..3 {
                let (mut a, mut b) = (pose, pose);
                a.rotation[(i, j)] += h;
                b.rotation[(i, j)] -= h;
                let fd = (energy(&a) - energy(&b)) / (2.0 * h);
                assert!((fd - g.rotation[(i, j)]).abs() < 1e-6 * (1.0 + fd.abs()), "{i}{j}");
            }
        }
    }

    #[test]
    fn loss_examples() {
        let p = Pose::identity();
        let z = Vector6::zeros();
        assert_eq!(pose_twist_loss(&p, &z, &p, &z), 0.0);
        let z1 = Vector6::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert!((pose_twist_loss(&p, &z1, &p, &z) - 1.0).abs() < 1e-15);
        let yawed = Pose::new(Vector3::zeros(), yaw_rotation(std::f64::consts::FRAC_PI_2));
        assert!((pose_twist_loss(&yawed, &z, &p, &z) - 2.4674011002723395).abs() < 1e-12);
    }

    #[test]
    fn tape_loss_agrees_with_plain_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let model = LearnedModel::init(ModelSpec::rigid_body(6.77, 9.8, 6), 1);
        let s = random_sample(&mut rng, 6);
        let (pose, zeta) = model_rollout(&model, &s.q0, &s.zeta0, &s.u, s.dt, 2).unwrap();
        let plain = pose_twist_loss(&pose, &zeta, &s.q1, &s.zeta1);
        let tape = trajectory_loss(&model, std::slice::from_ref(&s), 2);
        assert!((plain - tape).abs() < 1e-10 * (1.0 + plain));
    }

    #[test]
    fn zero_interval_is_identity() {
        let model = LearnedModel::init(ModelSpec::rigid_body(6.77, 9.8, 6), 1);
        let q0 = Pose::new(Vector3::new(0.1, 0.2, 0.3), exp_so3(&Vector3::new(0.2, 0.1, -0.4)));
        let z0 = Vector6::new(0.1, 0.2, 0.3, 0.4, 0.5, 0.6);
        let (q, z) = model_rollout(&model, &q0, &z0, &[0.0; 6], 0.0, 1).unwrap();
        assert!((q.position - q0.position).norm() < 1e-15 && (q.rotation - q0.rotation).norm() < 1e-15);
        assert!((z - z0).norm() < 1e-12);
    }

    #[test]
    fn disturbance_bound_needs_ten_samples() {
        let model = LearnedModel::init(ModelSpec::rigid_body(6.77, 9.8, 6), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let few: Vec<Sample> = (0..5).map(|_| random_sample(&mut rng, 6)).collect();
        assert!(matches!(
            estimate_disturbance_bound(&model, &few, 1),
            Err(LearnError::TooFewSamples { need: 10, got: 5 })
        ));
    }
}
