//! The closed loop: world, governor, controller and plant at the control rate.

use hamsafe_core::certify::{delta_e, lyapunov, q_matrices, select_rho, Certificate};
use hamsafe_core::controller::{error_state, Gains, ida_pbc_control, ThrustVectorController};
use hamsafe_core::governor::{governor_step, lift, local_projected_goal, safe_zone_radius, GovernorError};
use hamsafe_core::learner::Checkpoint;
use hamsafe_core::plant::{advance, corrupt, sample_disturbance, Actuation, HamiltonianModel, RigidBody, State};
use hamsafe_core::se3::{rotation_angle, Pose};
use hamsafe_core::world::{scan_distance, Lidar};
use nalgebra::{DVector, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scenario::{DistanceMode, LevelSets, ModelSource, Scenario};

#[derive(Debug)]
pub enum RunError {
    Config(String),
    InfeasibleStart(f64),
    DisturbanceAboveCap { delta_d: f64, cap: f64 },
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(s) => write!(f, "invalid scenario: {s}"),
            RunError::InfeasibleStart(de) => write!(f, "{}", GovernorError::InfeasibleStart(*de)),
            RunError::DisturbanceAboveCap { delta_d, cap } => {
                write!(f, "delta_d = {delta_d} exceeds the certified cap {cap:.4}; pass --force to run anyway")
            }
        }
    }
}

impl std::error::Error for RunError {}

/// One control step of telemetry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub t: f64,
    pub p: [f64; 3],
    /// Unit quaternion `(w, x, y, z)`.
    pub quat: [f64; 4],
    pub zeta: [f64; 6],
    pub u: Vec<f64>,
    pub sigma: f64,
    pub v: f64,
    pub de: f64,
    /// True distance from the robot to the obstacles.
    pub dist_p: f64,
    /// Distance from the governor point used in the safety margin.
    pub dist_g: f64,
    /// `|p - g|`.
    pub pos_err: f64,
    /// Angle between the attitude and its target.
    pub rot_err: f64,
    /// Largest unmatched demand component inside the range of the true input gain.
    pub d2_matched: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub steps: usize,
    pub mean_pos_err: f64,
    pub max_pos_err: f64,
    pub mean_rot_err: f64,
    pub min_dist: f64,
    pub min_de: f64,
    /// Steps with a negative safety margin.
    pub de_violations: usize,
    /// First time the governor reached `sigma >= 0.999`.
    pub completion_time: Option<f64>,
    pub final_sigma: f64,
    /// `|p - r(1)|` at the last step.
    pub final_goal_err: f64,
    pub max_d2_matched: f64,
    pub safe: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub certificate: Certificate,
    /// Level sets actually used by the safety margin.
    pub c1: f64,
    pub c2: f64,
    pub goal: [f64; 3],
    pub rows: Vec<Row>,
    /// Set when the run stopped early.
    pub aborted: Option<String>,
    pub summary: Summary,
}

/// Recomputes the summary from the telemetry rows.
pub fn metrics(rows: &[Row], goal: &[f64; 3], aborted: bool) -> Summary {
    let n = rows.len().max(1) as f64;
    let fold_min = |f: &dyn Fn(&Row) -> f64| rows.iter().map(f).fold(f64::INFINITY, f64::min);
    let fold_max = |f: &dyn Fn(&Row) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let last = rows.last();
    let final_goal_err = last.map_or(f64::NAN, |r| {
        Vector3::from(r.p).metric_distance(&Vector3::from(*goal))
    });
    let min_dist = fold_min(&|r| r.dist_p);
    let min_de = fold_min(&|r| r.de);
    Summary {
        steps: rows.len(),
        mean_pos_err: rows.iter().map(|r| r.pos_err).sum::<f64>() / n,
        max_pos_err: fold_max(&|r| r.pos_err),
        mean_rot_err: rows.iter().map(|r| r.rot_err).sum::<f64>() / n,
        min_dist,
        min_de,
        de_violations: rows.iter().filter(|r| r.de < 0.0).count(),
        completion_time: rows.iter().find(|r| r.sigma >= 0.999).map(|r| r.t),
        final_sigma: last.map_or(0.0, |r| r.sigma),
        final_goal_err,
        max_d2_matched: fold_max(&|r| r.d2_matched),
        safe: !aborted && min_dist > 0.0 && min_de >= 0.0,
    }
}

/// Loads the controller's model named by the scenario.
pub fn load_model(s: &Scenario) -> Result<Box<dyn HamiltonianModel>, RunError> {
    match &s.model {
        ModelSource::GroundTruth => {
            Ok(Box::new(RigidBody::new(s.plant.clone()).map_err(|e| RunError::Config(e.to_string()))?))
        }
        ModelSource::Checkpoint { path } => {
            let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
            let ck: Checkpoint =
                serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
            Ok(Box::new(ck.model))
        }
    }
}

pub fn run_scenario(s: &Scenario, force: bool) -> Result<RunRecord, RunError> {
    let model = load_model(s)?;
    run_with_model(s, model.as_ref(), force)
}

/// Runs `s` with `model` inside the controller and the ground truth as plant.
pub fn run_with_model(s: &Scenario, model: &dyn HamiltonianModel, force: bool) -> Result<RunRecord, RunError> {
    if !(s.dt > 0.0 && s.duration > 0.0 && s.substeps > 0 && s.k_g > 0.0) {
        return Err(RunError::Config("dt, duration, substeps and k_g must be positive".into()));
    }
    let plant = RigidBody::new(s.plant.clone()).map_err(|e| RunError::Config(e.to_string()))?;
    if model.input_dim() != plant.input_dim() {
        return Err(RunError::Config("model and plant input sizes differ".into()));
    }
    let world = s.build_world().map_err(RunError::Config)?;
    let path = s.build_path(&world).map_err(|e| RunError::Config(e.to_string()))?;
    let minv0 = model.mass_inverse(&Pose::identity());
    let gains = match (q_matrices(&minv0, &s.gains, s.alpha, s.beta), s.rho_margin) {
        (Err(e), Some(margin)) => {
            let rho = select_rho(&minv0, &s.gains, s.beta, margin).map_err(|e| RunError::Config(e.to_string()))?;
            log::warn!("{e}; rho reselected as {rho:.4e}");
            Gains { rho, ..s.gains.clone() }
        }
        _ => s.gains.clone(),
    };
    let cert =
        Certificate::compute(&minv0, &gains, s.alpha, s.beta, s.delta_d).map_err(|e| RunError::Config(e.to_string()))?;
    if s.delta_d > cert.delta_cap && !force {
        return Err(RunError::DisturbanceAboveCap { delta_d: s.delta_d, cap: cert.delta_cap });
    }
    let (c1, c2) = match s.levels {
        LevelSets::Fixed { c1, c2 } => (c1, c2),
        LevelSets::Computed => (cert.c1, cert.c2),
    };
    let lidar = match s.distance {
        DistanceMode::Lidar { rays } => Some(Lidar::fibonacci(rays)),
        DistanceMode::Exact => None,
    };
    let dist_g = |x: &State, g: &Vector3<f64>| -> f64 {
        match &lidar {
            Some(l) => scan_distance(&l.scan(&world, &x.pose.position, &x.pose.rotation), g, world.d_max),
            None => world.sensed_distance(g),
        }
    };

    let mut rng_d = ChaCha8Rng::seed_from_u64(s.seed);
    let mut rng_n = ChaCha8Rng::seed_from_u64(s.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut x = State::at_rest(Pose::at(path.start()));
    let mut sigma = 0.0;
    let mut tvc = match s.plant.actuation {
        Actuation::Quadrotor => Some(ThrustVectorController::new(gains.clone(), s.yaw, s.dt)),
        Actuation::Hexarotor => None,
    };
    let true_gain = plant.input_gain(&Pose::identity());
    let projector = &true_gain * true_gain.clone().pseudo_inverse(1e-12).expect("gain has a pseudo-inverse");
    let goal = path.end();
    let steps = (s.duration / s.dt).round() as usize;
    let mut rows = Vec::with_capacity(steps);
    let mut aborted = None;

    for k in 0..steps {
        let t = k as f64 * s.dt;
        let g = path.eval(sigma);
        let xh = corrupt(model, &x, &s.noise, &mut rng_n);
        let control = match tvc.as_mut() {
            Some(c) => c.control(model, &xh, &g),
            None => {
                let target = lift(&g);
                ida_pbc_control(model, &xh, &target, &gains).map(|o| (o, target))
            }
        };
        let (out, target) = match control {
            Ok(v) => v,
            Err(e) => {
                aborted = Some(format!("controller failed at t = {t:.3}: {e}"));
                break;
            }
        };
        let err = error_state(&xh, &target);
        let v = lyapunov(&err, &model.mass_inverse(&xh.pose), &gains);
        let dg = dist_g(&x, &g);
        let de = delta_e(v, dg, c1, c2, cert.k1, gains.k_p);
        if k == 0 && !(de > 0.0) {
            return Err(RunError::InfeasibleStart(de));
        }
        if !s.static_governor {
            let star = local_projected_goal(&path, sigma, &g, safe_zone_radius(de));
            sigma = governor_step(sigma, star, s.k_g, s.dt).map_err(|e| RunError::Config(e.to_string()))?;
        }
        let unmatched = DVector::from_column_slice(out.unmatched.as_slice());
        let d2_matched = (&projector * unmatched).amax();
        let zeta = plant.twist(&x);
        let q = x.pose.quaternion();
        rows.push(Row {
            t,
            p: x.pose.position.into(),
            quat: [q.w, q.i, q.j, q.k],
            zeta: zeta.into(),
            u: out.u.iter().copied().collect(),
            sigma,
            v,
            de,
            dist_p: world.sensed_distance(&x.pose.position),
            dist_g: dg,
            pos_err: (x.pose.position - g).norm(),
            rot_err: rotation_angle(&(target.pose.rotation.transpose() * x.pose.rotation)),
            d2_matched,
        });
        let d = sample_disturbance(s.delta_d, &mut rng_d);
        let u = out.u;
        let noise = &s.noise;
        let m = u.len();
        let input = |tau: f64| &u + noise.input_noise(t + tau, m);
        match advance(&plant, &x, &input, &d, 0.0, s.dt, s.substeps) {
            Ok(next) => x = next,
            Err(e) => {
                aborted = Some(format!("plant diverged at t = {t:.3}: {e}"));
                break;
            }
        }
    }
    let goal_arr: [f64; 3] = goal.into();
    let summary = metrics(&rows, &goal_arr, aborted.is_some());
    Ok(RunRecord { scenario: s.name.clone(), certificate: cert, c1, c2, goal: goal_arr, rows, aborted, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::PathSource;

    #[test]
    fn hover_run_stays_put() {
        let s = Scenario { duration: 2.0, ..Scenario::default() };
        let rec = run_scenario(&s, false).unwrap();
        assert_eq!(rec.rows.len(), 240);
        assert!(rec.summary.max_pos_err < 1e-9);
        assert_eq!(metrics(&rec.rows, &rec.goal, false), rec.summary);
    }

    #[test]
    fn empty_world_liveness() {
        let s = Scenario {
            path: PathSource::Waypoints { points: vec![[0.0, 0.0, 1.0], [10.0, 0.0, 1.0]] },
            duration: 60.0,
            ..Scenario::default()
        };
        let rec = run_scenario(&s, false).unwrap();
        assert!(rec.summary.final_sigma >= 0.999, "{:?}", rec.summary);
        assert!(rec.summary.safe);
    }

    #[test]
    fn determinism() {
        let s = Scenario {
            path: PathSource::Waypoints { points: vec![[0.0, 0.0, 1.0], [3.0, 0.0, 1.0]] },
            duration: 2.0,
            delta_d: 0.01,
            ..Scenario::default()
        };
        let a = run_scenario(&s, false).unwrap();
        let b = run_scenario(&s, false).unwrap();
        assert!(a == b);
    }

    #[test]
    fn rejects_disturbance_above_cap() {
        let s = Scenario { delta_d: 10.0, ..Scenario::default() };
        assert!(matches!(run_scenario(&s, false), Err(RunError::DisturbanceAboveCap { .. })));
        assert!(run_scenario(&Scenario { duration: 0.1, ..s }, true).is_ok());
    }
}
