//! Synthetic flight logs from the ground-truth plant.

use hamsafe_core::controller::{ida_pbc_control, Gains, ThrustVectorController};
use hamsafe_core::learner::{q_from_pose, Trajectory};
use hamsafe_core::plant::{advance, Actuation, HamiltonianModel, RigidBody, State};
use hamsafe_core::se3::{exp_so3, pitch_rotation, yaw_rotation, Pose};
use nalgebra::{DVector, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub trajectories: usize,
    /// Intervals per trajectory.
    pub intervals: usize,
    pub dt: f64,
    /// Plant substeps per interval.
    pub substeps: usize,
    /// Half-width of the uniform input excitation (force, torque).
    pub force_excitation: f64,
    pub torque_excitation: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            trajectories: 18,
            intervals: 24,
            dt: 1.0 / 24.0,
            substeps: 5,
            force_excitation: 8.0,
            torque_excitation: 1.5,
            seed: 0,
        }
    }
}

/// Soft gains for the data-collection pilot.
pub fn pilot_gains() -> Gains {
    Gains { k_p: 6.0, k_r: 10.0, k_d: Vector6::new(4.0, 4.0, 4.0, 2.0, 2.0, 2.0), rho: 0.0 }
}

fn random_target<R: Rng>(rng: &mut R, body: &RigidBody) -> State {
    let p = Vector3::from_fn(|_, _| rng.gen_range(-1.5..1.5));
    let rot = match body.params.actuation {
        Actuation::Hexarotor => exp_so3(&Vector3::new(
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        )),
        Actuation::Quadrotor => nalgebra::Matrix3::identity(),
    };
    State::at_rest(Pose::new(p, rot))
}

fn excitation<R: Rng>(rng: &mut R, body: &RigidBody, cfg: &GenConfig) -> DVector<f64> {
    let b = body.input_gain(&Pose::identity());
    let w = Vector6::from_fn(|i, _| {
        let a = if i < 3 { cfg.force_excitation } else { cfg.torque_excitation };
        rng.gen_range(-a..=a)
    });
    b.transpose() * DVector::from_column_slice(w.as_slice())
}

fn one_trajectory<R: Rng>(rng: &mut R, body: &RigidBody, cfg: &GenConfig) -> Option<Trajectory> {
    let gains = pilot_gains();
    let yaw = match body.params.actuation {
        Actuation::Hexarotor => rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        Actuation::Quadrotor => 0.0,
    };
    let tilt = exp_so3(&Vector3::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2), 0.0));
    let start = Pose::new(Vector3::zeros(), yaw_rotation(yaw) * tilt);
    let zeta0 = Vector6::from_fn(|i, _| if i < 3 { rng.gen_range(-0.5..0.5) } else { rng.gen_range(-0.3..0.3) });
    let mut x = State::from_twist(body, start, &zeta0);
    let target = random_target(rng, body);
    let mut tvc = ThrustVectorController::new(gains.clone(), rng.gen_range(-1.0..1.0), cfg.dt);
    let mut traj = Trajectory { t: vec![0.0], q: vec![q_from_pose(&x.pose)], zeta: vec![twist_array(body, &x)], u: vec![] };
    for n in 0..cfg.intervals {
        let base = match body.params.actuation {
            Actuation::Hexarotor => ida_pbc_control(body, &x, &target, &gains).ok()?.u,
            Actuation::Quadrotor => tvc.control(body, &x, &target.pose.position).ok()?.0.u,
        };
        let u = base + excitation(rng, body, cfg);
        x = advance(body, &x, &|_| u.clone(), &Vector6::zeros(), 0.0, cfg.dt, cfg.substeps).ok()?;
        if x.momentum.norm() > 200.0 {
            return None;
        }
        traj.t.push((n + 1) as f64 * cfg.dt);
        traj.q.push(q_from_pose(&x.pose));
        traj.zeta.push(twist_array(body, &x));
        traj.u.push(u.iter().copied().collect());
    }
    traj.shift_to_origin();
    Some(traj)
}

fn twist_array(body: &RigidBody, x: &State) -> [f64; 6] {
    let z = body.twist(x);
    [z[0], z[1], z[2], z[3], z[4], z[5]]
}

/// Pilot-driven flights toward random pose targets with input excitation;
/// a diverged flight is redrawn with a new target.
pub fn gen_data(body: &RigidBody, cfg: &GenConfig) -> Vec<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.trajectories);
    while out.len() < cfg.trajectories {
        if let Some(t) = one_trajectory(&mut rng, body, cfg) {
            out.push(t);
        }
    }
    out
}

/// Single-interval samples in the vertical x-z plane from `(x, z) = (-1, 0)`
/// with random pitch, velocity and random force/torque inputs.
pub fn gen_planar(body: &RigidBody, samples: usize, dt: f64, substeps: usize, seed: u64) -> Vec<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hover = body.params.hover_thrust();
    (0..samples)
        .map(|_| {
            let pose = Pose::new(Vector3::new(-1.0, 0.0, 0.0), pitch_rotation(rng.gen_range(-0.5..0.5)));
            let zeta = Vector6::new(rng.gen_range(-1.0..1.0), 0.0, rng.gen_range(-1.0..1.0), 0.0, rng.gen_range(-1.0..1.0), 0.0);
            let x0 = State::from_twist(body, pose, &zeta);
            let mut w = Vector6::zeros();
            w[0] = rng.gen_range(-20.0..20.0);
            w[2] = hover + rng.gen_range(-20.0..20.0);
            w[4] = rng.gen_range(-3.0..3.0);
            let u = body.input_gain(&pose).transpose() * DVector::from_column_slice(w.as_slice());
            let x1 = advance(body, &x0, &|_| u.clone(), &Vector6::zeros(), 0.0, dt, substeps).expect("short planar interval");
            let mut t = Trajectory {
                t: vec![0.0, dt],
                q: vec![q_from_pose(&x0.pose), q_from_pose(&x1.pose)],
                zeta: vec![twist_array(body, &x0), twist_array(body, &x1)],
                u: vec![u.iter().copied().collect()],
            };
            t.shift_to_origin();
            t
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use hamsafe_core::learner::{read_jsonl, write_jsonl};

    #[test]
    fn default_shape_and_round_trip() {
        let body = RigidBody::hexarotor();
        let data = gen_data(&body, &GenConfig::default());
        assert_eq!(data.len(), 18);
        for t in &data {
            assert_eq!(t.u.len(), 24);
            t.validate().unwrap();
            assert_eq!(&t.q[0][..3], &[0.0, 0.0, 0.0]);
        }
        let mut buf = Vec::new();
        write_jsonl(&data, &mut buf).unwrap();
        assert!(read_jsonl(&buf[..]).unwrap() == data);
    }

    #[test]
    fn planar_samples() {
        let body = RigidBody::hexarotor();
        let data = gen_planar(&body, 150, 1.0 / 24.0, 5, 1);
        assert_eq!(data.len(), 150);
        assert!(data.iter().all(|t| t.q[1][1].abs() < 1e-12));
    }
}
