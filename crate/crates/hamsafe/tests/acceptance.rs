//! Acceptance suite: one pass/fail line per criterion. Runs without the libtest
//! harness so the report is printed even when output capture is on.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use hamsafe::datagen::{gen_data, gen_planar, GenConfig};
use hamsafe::run::{run_scenario, run_with_model, RunRecord};
use hamsafe::scenario::{self, Scenario, SWEEP};
use hamsafe_core::certify::{
    euclidean_certify, euclidean_lyapunov, in_region, lyapunov, q_matrices, select_rho, z_norms,
    Certificate,
};
use hamsafe_core::controller::{error_state, euclidean_ida_pbc, ida_pbc_control, EuclideanGains, Gains};
use hamsafe_core::governor::lift;
use hamsafe_core::learner::{
    dataset_samples, estimate_disturbance_bound, loss_and_gradient, train, trajectory_loss, GainSpec, InertiaSpec,
    LearnedModel, MassSpec, ModelSpec, PotentialSpec, Sample, TrainConfig,
};
use hamsafe_core::plant::{
    advance, sample_disturbance, step, EuclideanSystem, HamiltonianModel, NoiseSpec, RigidBody, State,
};
use hamsafe_core::se3::{exp_so3, hat, is_rotation, log_so3, project_to_so3, vee, Pose};
use nalgebra::{DVector, Matrix3, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn random_rotation<R: Rng>(rng: &mut R, max_angle: f64) -> Matrix3<f64> {
    let axis = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0)).normalize();
    exp_so3(&(axis * rng.gen_range(0.0..max_angle)))
}

fn math_kernel() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut hv, mut le, mut el, mut orth, mut proj, mut fix) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut ok = true;
    for _ in 0..10_000 {
        let w = Vector3::from_fn(|_, _| rng.gen_range(-10.0..10.0));
        match vee(&hat(&w)) {
            Ok(v) => hv = hv.max((v - w).norm()),
            Err(_) => ok = false,
        }
        // log inverts exp inside the open ball of radius pi
        let axis = w.normalize();
        let small = axis * rng.gen_range(0.0..std::f64::consts::PI * 0.999);
        let r = exp_so3(&small);
        le = le.max((log_so3(&r) - small).norm());
        orth = orth.max((r.transpose() * r - Matrix3::identity()).norm());
        let any = exp_so3(&w);
        el = el.max((exp_so3(&log_so3(&any)) - any).norm());
        let noisy = any + Matrix3::from_fn(|_, _| rng.gen_range(-0.05..0.05));
        match project_to_so3(&noisy) {
            Ok(p) => {
                proj = proj.max((p.transpose() * p - Matrix3::identity()).norm());
                ok &= p.determinant() > 0.0 && is_rotation(&p, 1e-9);
            }
            Err(_) => ok = false,
        }
        match project_to_so3(&any) {
            Ok(p) => fix = fix.max((p - any).norm()),
            Err(_) => ok = false,
        }
    }
    let pass = ok && hv < 1e-9 && le < 1e-8 && el < 1e-8 && orth < 1e-9 && proj < 1e-9 && fix < 1e-9;
    (
        pass,
        format!(
            "10000 samples: vee(hat) {hv:.1e}, log(exp) {le:.1e}, exp(log) {el:.1e}, R^T R {orth:.1e}, projection {proj:.1e}, projection of rotation {fix:.1e}"
        ),
    )
}

fn plant_fidelity() -> (bool, String) {
    let body = RigidBody::hexarotor();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let pose = Pose::new(Vector3::new(0.0, 0.0, 50.0), random_rotation(&mut rng, 3.0));
        let zeta = Vector6::from_fn(|_, _| rng.gen_range(-2.0..2.0));
        let mut x = State::from_twist(&body, pose, &zeta);
        let h0 = body.hamiltonian(&x);
        let u = DVector::zeros(6);
        let dt = 1.0 / 1200.0;
        let mut drift: f64 = 0.0;
        for _ in 0..12_000 {
            x = step(&body, &x, &u, &Vector6::zeros(), dt).expect("free flight stays finite");
            drift = drift.max((body.hamiltonian(&x) - h0).abs());
        }
        worst = worst.max(drift / 10.0);
    }
    (worst < 1e-6, format!("max |H - H0| / 10 s = {worst:.2e} J/s over 3 tumbling free flights"))
}

fn random_sample<R: Rng>(rng: &mut R, m: usize) -> Sample {
    let q0 = Pose::new(Vector3::zeros(), random_rotation(rng, 1.5));
    let zeta0 = Vector6::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    let u: Vec<f64> = (0..m).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let q1 = Pose::new(Vector3::from_fn(|_, _| rng.gen_range(-0.1..0.1)), random_rotation(rng, 1.5));
    let zeta1 = Vector6::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    Sample { q0, zeta0, u, dt: 1.0 / 24.0, q1, zeta1 }
}

fn gradient_probe() -> (bool, String) {
    let probes = [
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
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut sizes = vec![];
    for point in 0..50u64 {
        let spec = probes[(point % 2) as usize].clone();
        let mut model = LearnedModel::init(spec, 100 + point);
        let n = model.param_count();
        if point < 2 {
            sizes.push(n);
        }
        let s = random_sample(&mut rng, model.spec.input_dim());
        let mut g = vec![0.0; n];
        loss_and_gradient(&model, &[&s], 2, &mut g);
        let h = 1e-5;
        for i in 0..n {
            let x0 = model.params[i];
            model.params[i] = x0 + h;
            let lp = trajectory_loss(&model, std::slice::from_ref(&s), 2);
            model.params[i] = x0 - h;
            let lm = trajectory_loss(&model, std::slice::from_ref(&s), 2);
            model.params[i] = x0;
            let fd = (lp - lm) / (2.0 * h);
            worst = worst.max((g[i] - fd).abs() / fd.abs().max(g[i].abs()).max(1e-6));
        }
    }
    (
        sizes.iter().all(|&n| n <= 100) && worst < 1e-4,
        format!("probes of {sizes:?} parameters, 50 points, worst relative error {worst:.2e}"),
    )
}

/// Relative Frobenius error of `M^-1 B`, stacked over states and worst single state.
fn minv_b_error(model: &dyn HamiltonianModel, truth: &RigidBody, poses: &[Pose]) -> (f64, f64) {
    let (mut num, mut den, mut worst) = (0.0, 0.0, 0.0f64);
    for pose in poses {
        let a = model.mass_inverse(pose) * model.input_gain(pose);
        let b = truth.mass_inverse(pose) * truth.input_gain(pose);
        let e = (&a - &b).norm_squared();
        num += e;
        den += b.norm_squared();
        worst = worst.max((e / b.norm_squared()).sqrt());
    }
    ((num / den).sqrt(), worst)
}

struct Learned {
    model: LearnedModel,
    delta_d: f64,
}

fn dynamics_learning() -> (bool, String, Option<Learned>) {
    let truth = RigidBody::hexarotor();
    let data = gen_data(&truth, &GenConfig::default());
    let samples = dataset_samples(&data);
    let mut model = LearnedModel::init(ModelSpec::rigid_body(6.77, 9.8, 6), 0);
    let cfg = TrainConfig { learning_rate: 1e-4, iterations: 5000, batch_size: 0, seed: 0, substeps: 1 };
    let report = match train(&mut model, &samples, &cfg) {
        Ok(r) => r,
        Err(e) => return (false, format!("training failed: {e}"), None),
    };
    let reduction = 1.0 - report.final_loss / report.initial_loss;
    let heldout = gen_data(&truth, &GenConfig { seed: 99, trajectories: 4, ..GenConfig::default() });
    let poses: Vec<Pose> = heldout.iter().flat_map(|t| t.q.iter().map(hamsafe_core::learner::pose_from_q)).collect();
    let (stacked, worst) = minv_b_error(&model, &truth, &poses);
    let delta_d = estimate_disturbance_bound(&model, &dataset_samples(&heldout), 1).unwrap_or(f64::NAN);
    let pass = reduction >= 0.99 && stacked < 0.10;
    let detail = format!(
        "{} samples, loss {:.3e} -> {:.3e} ({:.4}% reduction), held-out M^-1 B error {:.2}% (worst state {:.2}%), delta_d estimate {:.4}",
        samples.len(),
        report.initial_loss,
        report.final_loss,
        100.0 * reduction,
        100.0 * stacked,
        100.0 * worst,
        delta_d
    );
    (pass, detail, Some(Learned { model, delta_d }))
}

fn certificates() -> (bool, String) {
    let minv = RigidBody::hexarotor().mass_inverse(&Pose::identity());
    let gains = Gains::default();
    let q_ok = q_matrices(&minv, &gains, 2.0, 20.0).is_ok();
    let rho = select_rho(&minv, &gains, 20.0, 0.9);
    let rho_ok = rho.as_ref().is_ok_and(|&r| q_matrices(&minv, &Gains { rho: r, ..gains.clone() }, 2.0, 20.0).is_ok());
    let Ok(c) = Certificate::compute(&minv, &gains, 2.0, 20.0, 0.0) else {
        return (false, "certificate failed".into());
    };
    // disturbance level at which our c1 would equal the published one
    let d_eq = (2.2050 * c.k3 / (c.k2 * c.k_gamma)).sqrt();
    (
        q_ok && rho_ok && c.delta_cap > 0.0,
        format!(
            "Q1-3 PD {q_ok}, select_rho {:.4e} PD {rho_ok}, delta_d cap {:.4e}; computed c2 {:.4} vs published 8.8200, computed c1 = {:.1} delta_d^2 (equals published 2.2050 at delta_d {:.4})",
            rho.unwrap_or(f64::NAN),
            c.delta_cap,
            c.c2,
            c.k2 * c.k_gamma / c.k3,
            d_eq
        ),
    )
}

fn iss_inequality() -> (bool, String) {
    let body = RigidBody::hexarotor();
    let gains = Gains::default();
    let minv = body.mass_inverse(&Pose::identity());
    let cert0 = Certificate::compute(&minv, &gains, 2.0, 20.0, 0.0).expect("certificate");
    let delta = 0.5 * cert0.delta_cap;
    let cert = Certificate::compute(&minv, &gains, 2.0, 20.0, delta).expect("certificate");
    let target = lift(&Vector3::new(0.0, 0.0, 2.0));
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let v_of = |x: &State| lyapunov(&error_state(x, &target), &body.mass_inverse(&x.pose), &gains);
    let (mut checks, mut worst_margin, mut starts) = (0usize, f64::INFINITY, 0);
    let mut ok = true;
    while starts < 100 {
        let pose = Pose::new(
            target.pose.position + Vector3::from_fn(|_, _| rng.gen_range(-0.4..0.4)),
            random_rotation(&mut rng, 0.35),
        );
        let x0 = State::from_twist(&body, pose, &Vector6::from_fn(|_, _| rng.gen_range(-0.3..0.3)));
        let err = error_state(&x0, &target);
        if !(in_region(&err, 2.0, 20.0) && v_of(&x0) <= cert.c2) {
            continue;
        }
        starts += 1;
        let mut x = x0;
        for _ in 0..120 {
            let d = sample_disturbance(delta, &mut rng);
            let u = ida_pbc_control(&body, &x, &target, &gains).expect("control").u;
            let h = 1e-5;
            let fwd = step(&body, &x, &u, &d, h).expect("step");
            let bwd = step(&body, &x, &u, &d, -h).expect("step");
            let vdot = (v_of(&fwd) - v_of(&bwd)) / (2.0 * h);
            let (ze, zp) = z_norms(&error_state(&x, &target), &gains);
            let bound = -cert.k3 * (ze * ze + zp * zp) + cert.k_gamma * delta * delta;
            let tol = 1e-4 * vdot.abs().max(bound.abs()).max(1e-12);
            ok &= vdot <= bound + tol;
            worst_margin = worst_margin.min(bound + tol - vdot);
            checks += 1;
            x = step(&body, &x, &u, &d, 1.0 / 120.0).expect("step");
        }
    }
    (ok, format!("{starts} starts, {checks} steps, delta_d {delta:.4e}, smallest slack {worst_margin:.3e}"))
}

fn regulation_tail(delta: f64, seed: u64) -> f64 {
    let body = RigidBody::hexarotor();
    let gains = Gains::default();
    let target = lift(&Vector3::new(0.0, 0.0, 2.0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pose = Pose::new(Vector3::new(0.5, -0.3, 2.4), exp_so3(&Vector3::new(0.2, -0.1, 0.3)));
    let mut x = State::from_twist(&body, pose, &Vector6::zeros());
    let dt = 1.0 / 120.0;
    let mut tail: f64 = 0.0;
    for k in 0..(20 * 120) {
        let d = sample_disturbance(delta, &mut rng);
        let u = ida_pbc_control(&body, &x, &target, &gains).expect("control").u;
        x = advance(&body, &x, &|_| u.clone(), &d, 0.0, dt, 10).expect("advance");
        if k >= 15 * 120 {
            tail = tail.max((x.pose.position - target.pose.position).norm());
        }
    }
    tail
}

fn ultimate_bound() -> (bool, String) {
    let minv = RigidBody::hexarotor().mass_inverse(&Pose::identity());
    let mut ok = true;
    let mut parts = vec![];
    for (i, &delta) in [0.0, 0.1, 1.0].iter().enumerate() {
        let cert = Certificate::compute(&minv, &Gains::default(), 2.0, 20.0, delta).expect("certificate");
        let tail = regulation_tail(delta, 70 + i as u64);
        let limit = if delta == 0.0 { 1e-3 } else { cert.uub_radius + 1e-3 };
        ok &= tail <= limit;
        parts.push(format!("delta_d {delta}: tail {tail:.2e} <= {limit:.3e}"));
    }
    (ok, parts.join(", "))
}

fn record_line(label: &str, r: &RunRecord) -> String {
    let s = &r.summary;
    format!(
        "{label}: min dE {:.4}, min dist {:.3}, sigma {:.5}, goal err {:.2e}, t_done {}",
        s.min_de,
        s.min_dist,
        s.final_sigma,
        s.final_goal_err,
        s.completion_time.map_or("-".into(), |t| format!("{t:.1}s"))
    )
}

fn completes(r: &RunRecord, goal_tol: f64) -> bool {
    let s = &r.summary;
    r.aborted.is_none()
        && s.min_de >= 0.0
        && s.min_dist > 0.0
        && s.final_sigma >= 0.999
        && s.final_goal_err <= goal_tol
}

fn learned_run(s: &Scenario, model: &LearnedModel, delta_d: f64) -> Result<RunRecord, String> {
    let s = Scenario { delta_d, ..s.clone() };
    run_with_model(&s, model, true).map_err(|e| e.to_string())
}

fn judge(label: &str, r: Result<RunRecord, String>, warehouse: bool) -> (bool, String) {
    match r {
        Ok(r) => {
            let mut pass = completes(&r, r.certificate.uub_radius + 1e-3);
            if warehouse {
                pass &= r.summary.completion_time.is_some_and(|t| (40.0..=120.0).contains(&t));
            }
            (pass, record_line(label, &r))
        }
        Err(e) => (false, format!("{label}: {e}")),
    }
}

fn safe_tracking(learned: Option<&Learned>) -> (bool, String) {
    let mut results = vec![];
    let walls = scenario::walls2d();
    let house = scenario::warehouse3d_hexarotor();
    results.push(judge("walls2d truth", run_scenario(&walls, false).map_err(|e| e.to_string()), false));
    results.push(judge("warehouse truth", run_scenario(&house, false).map_err(|e| e.to_string()), true));

    // planar residual model from x-z plane flights, priors 50% off
    let truth = RigidBody::hexarotor();
    let planar = gen_planar(&truth, 150, 1.0 / 24.0, 5, 1);
    let spec = ModelSpec::planar_residual(1.5 * 6.77, truth.params.inertia * 1.5, 9.8);
    let mut pm = LearnedModel::init(spec, 0);
    let cfg = TrainConfig { learning_rate: 1e-3, iterations: 2000, batch_size: 0, seed: 0, substeps: 1 };
    match train(&mut pm, &dataset_samples(&planar), &cfg) {
        Ok(_) => {
            let mass = 1.0 / pm.mass_inverse(&Pose::identity())[(0, 0)];
            let mass_ok = (mass - 6.77).abs() / 6.77 < 0.10;
            results.push((mass_ok, format!("planar mass {mass:.4} vs 6.77")));
            let test = gen_planar(&truth, 40, 1.0 / 24.0, 5, 7);
            let d = estimate_disturbance_bound(&pm, &dataset_samples(&test), 1).unwrap_or(f64::NAN);
            results.push(judge(&format!("walls2d learned (delta_d {d:.3})"), learned_run(&walls, &pm, d), false));
        }
        Err(e) => results.push((false, format!("planar training failed: {e}"))),
    }
    match learned {
        Some(l) => results.push(judge(
            &format!("warehouse learned (delta_d {:.3})", l.delta_d),
            learned_run(&house, &l.model, l.delta_d),
            true,
        )),
        None => results.push((false, "warehouse learned: no trained model".into())),
    }
    let ok = results.iter().all(|r| r.0);
    (ok, results.into_iter().map(|r| r.1).collect::<Vec<_>>().join("; "))
}

fn disturbance_sweep() -> (bool, String) {
    let mut ok = true;
    let mut dists = vec![];
    for d in SWEEP {
        match run_scenario(&scenario::disturbance_sweep(d), true) {
            Ok(r) => {
                ok &= r.aborted.is_none() && r.summary.min_dist > 0.0;
                dists.push((d, r.summary.min_dist));
            }
            Err(e) => return (false, format!("delta_d {d}: {e}")),
        }
    }
    let at = |x: f64| dists.iter().find(|(d, _)| *d == x).map(|p| p.1).unwrap_or(f64::NAN);
    ok &= at(30.0) < at(0.1);
    let list: Vec<String> = dists.iter().map(|(d, m)| format!("{d}:{m:.4}")).collect();
    (ok, format!("min distance per delta_d {}", list.join(" ")))
}

fn quadrotor() -> (bool, String) {
    let hex = run_scenario(&scenario::warehouse3d_hexarotor(), false);
    let quad = run_scenario(&scenario::warehouse3d_quadrotor(), false);
    match (hex, quad) {
        (Ok(h), Ok(q)) => {
            let s = &q.summary;
            let pass = completes(&q, q.certificate.uub_radius + 1e-3)
                && s.max_d2_matched < 1e-8
                && s.mean_rot_err > h.summary.mean_rot_err;
            (
                pass,
                format!(
                    "{}, matched d2 max {:.2e}, mean attitude error {:.2e} rad vs hexarotor {:.2e}",
                    record_line("quadrotor", &q),
                    s.max_d2_matched,
                    s.mean_rot_err,
                    h.summary.mean_rot_err
                ),
            )
        }
        (h, q) => (false, format!("hexarotor {:?}, quadrotor {:?}", h.err(), q.err())),
    }
}

fn noise_robustness() -> (bool, String) {
    let mut ok = true;
    let mut parts = vec![];
    for (label, noise, must_hold) in [
        ("sinusoid", NoiseSpec::sinusoid(), true),
        ("1x estimation", NoiseSpec::estimation(1.0), true),
        ("3x estimation", NoiseSpec::estimation(3.0), false),
    ] {
        match run_scenario(&scenario::static_governor(noise), false) {
            Ok(r) => {
                let s = &r.summary;
                if must_hold {
                    ok &= s.de_violations == 0 && s.min_de > 0.0;
                } else {
                    // the violation count must agree with the telemetry
                    ok &= s.de_violations == r.rows.iter().filter(|row| row.de < 0.0).count();
                }
                parts.push(format!("{label}: min dE {:.4}, violations {}", s.min_de, s.de_violations));
            }
            Err(e) => {
                // a rejected start is itself a reported violation
                ok &= !must_hold;
                parts.push(format!("{label}: {e}"));
            }
        }
    }
    (ok, parts.join(", "))
}

fn euclidean_variant() -> (bool, String) {
    let n = 3;
    let sys = EuclideanSystem::double_integrator(n);
    let gains = EuclideanGains { k_p: 4.0, k_d: vec![3.0; n], rho: 0.1 };
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut ok = true;
    let q_star = DVector::from_element(n, 1.0);
    let cert0 = match euclidean_certify(&sys.mass_inverse, &gains, 0.0) {
        Ok(c) => c,
        Err(e) => return (false, e.to_string()),
    };
    // sandwich k1 |z|^2 <= V <= k2 |z|^2
    let mut sandwich: f64 = f64::INFINITY;
    for _ in 0..10_000 {
        let qe = DVector::from_fn(n, |_, _| rng.gen_range(-3.0..3.0));
        let p = DVector::from_fn(n, |_, _| rng.gen_range(-3.0..3.0));
        let v = euclidean_lyapunov(&qe, &p, &sys.mass_inverse, &gains);
        let z2 = gains.k_p * gains.k_p * qe.norm_squared() + p.norm_squared();
        sandwich = sandwich.min((v - cert0.k1 * z2).min(cert0.k2 * z2 - v));
    }
    ok &= sandwich >= -1e-12;
    let mut parts = vec![format!("sandwich slack {sandwich:.2e}")];
    for &delta in &[0.0, 0.1, 1.0] {
        let cert = euclidean_certify(&sys.mass_inverse, &gains, delta).expect("certificate");
        let mut q = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)) + &q_star;
        let mut p = DVector::zeros(n);
        let dt = 1.0 / 120.0;
        let (mut tail, mut worst): (f64, f64) = (0.0, f64::INFINITY);
        for k in 0..(30 * 120) {
            let d6 = sample_disturbance(delta, &mut rng);
            let d = DVector::from_fn(n, |j, _| d6[j]);
            let u = euclidean_ida_pbc(&sys, &q, &p, &q_star, &gains).expect("control");
            let h = 1e-5;
            let v = |q: &DVector<f64>, p: &DVector<f64>| euclidean_lyapunov(&(q - &q_star), p, &sys.mass_inverse, &gains);
            let (qf, pf) = sys.step(&q, &p, &u, &d, h);
            let (qb, pb) = sys.step(&q, &p, &u, &d, -h);
            let vdot = (v(&qf, &pf) - v(&qb, &pb)) / (2.0 * h);
            let z2 = gains.k_p * gains.k_p * (&q - &q_star).norm_squared() + p.norm_squared();
            let bound = -cert.k3 * z2 + cert.k_gamma * delta * delta;
            let tol = 1e-4 * vdot.abs().max(bound.abs()).max(1e-12);
            worst = worst.min(bound + tol - vdot);
            let next = sys.step(&q, &p, &u, &d, dt);
            q = next.0;
            p = next.1;
            if k >= 25 * 120 {
                tail = tail.max((&q - &q_star).norm());
            }
        }
        let limit = if delta == 0.0 { 1e-3 } else { cert.uub_radius + 1e-3 };
        ok &= worst >= 0.0 && tail <= limit;
        parts.push(format!("delta_d {delta}: V_dot slack {worst:.2e}, tail {tail:.2e} <= {limit:.3e}"));
    }
    (ok, parts.join(", "))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t0 = Instant::now();
    let v = f();
    (v, t0.elapsed())
}

/// Criterion numbers given on the command line select a subset.
fn selected() -> Vec<usize> {
    let ids: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    if ids.is_empty() {
        (1..=12).collect()
    } else {
        ids
    }
}

fn main() -> ExitCode {
    let want = selected();
    let mut out: Vec<Outcome> = vec![];
    let mut push = |id, name, budget, r: ((bool, String), Duration)| {
        let ((pass, detail), elapsed) = r;
        let o = Outcome { id, name, pass, detail, elapsed, budget };
        println!(
            "criterion {:>2} {:<24} {} ({:.1}s of {}s) {}",
            o.id,
            o.name,
            if o.pass && o.elapsed <= o.budget { "PASS" } else { "FAIL" },
            o.elapsed.as_secs_f64(),
            o.budget.as_secs(),
            o.detail
        );
        out.push(o);
    };
    let on = |id: usize| want.contains(&id);
    if on(1) {
        push(1, "math kernel", secs(5), timed(math_kernel));
    }
    if on(2) {
        push(2, "plant fidelity", secs(5), timed(plant_fidelity));
    }
    if on(3) {
        push(3, "gradient correctness", secs(60), timed(gradient_probe));
    }
    let mut learned = None;
    if on(4) || on(8) {
        let ((pass, detail, model), t4) = timed(dynamics_learning);
        learned = model;
        if on(4) {
            push(4, "dynamics learning", secs(600), ((pass, detail), t4));
        }
    }
    if on(5) {
        push(5, "certificates", secs(1), timed(certificates));
    }
    if on(6) {
        push(6, "ISS inequality", secs(120), timed(iss_inequality));
    }
    if on(7) {
        push(7, "ultimate bound", secs(120), timed(ultimate_bound));
    }
    if on(8) {
        push(8, "safe tracking", secs(4 * 300), timed(|| safe_tracking(learned.as_ref())));
    }
    if on(9) {
        push(9, "disturbance sweep", secs(600), timed(disturbance_sweep));
    }
    if on(10) {
        push(10, "quadrotor", secs(300), timed(quadrotor));
    }
    if on(11) {
        push(11, "noise robustness", secs(180), timed(noise_robustness));
    }
    if on(12) {
        push(12, "R^n variant", secs(60), timed(euclidean_variant));
    }
    let failed: Vec<usize> = out.iter().filter(|o| !(o.pass && o.elapsed <= o.budget)).map(|o| o.id).collect();
    println!("{} of {} criteria passed", out.len() - failed.len(), out.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {failed:?}");
        ExitCode::FAILURE
    }
}
