//! Learned Hamiltonian on SE(3): structured parameterizations of `M^-1(q)`,
//! `U(q)` and `B(q)` whose networks read only the rotation entries, so the
//! model is translation equivariant.

use nalgebra::{DMatrix, Matrix3, Matrix6, Vector3, Vector6};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Mlp, MlpTrace, Tape, Var};
use crate::plant::HamiltonianModel;
use crate::se3::{ConfigGradient, Pose};

/// Jitter added to the learned inverse inertia.
pub const INERTIA_EPS: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MassSpec {
    Known { mass: f64 },
    /// `m^-1 = (sqrt(1/prior) + net(R))^2`.
    Residual { prior: f64, hidden: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InertiaSpec {
    Known { inertia: Vector3<f64> },
    /// `J^-1 = L L^T + eps I`, `L` lower triangular from the network plus
    /// a diagonal offset `sqrt(1/prior)`.
    Cholesky { prior: Vector3<f64>, hidden: Vec<usize> },
    /// `J^-1 = diag((sqrt(1/prior_i) + net_i(R))^2)`.
    DiagonalResidual { prior: Vector3<f64>, hidden: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// `U = m g z` with known mass.
    KnownGravity { mass: f64, gravity: f64 },
    /// `U = m_theta(R) g z`, sharing the learned mass.
    TiedGravity { gravity: f64 },
    /// `U = (prior + w) . p + net(R)`.
    Learned { prior: Vector3<f64>, hidden: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GainSpec {
    Known { gain: DMatrix<f64> },
    /// `B = offset + net(R)`, both learned, 6 x inputs row-major.
    Learned { inputs: usize, hidden: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub mass: MassSpec,
    pub inertia: InertiaSpec,
    pub potential: PotentialSpec,
    pub gain: GainSpec,
    /// Scale of the initial last-layer weights.
    pub init_scale: f64,
}

impl ModelSpec {
    /// Known mass and gravity; inertia and input gain learned.
    pub fn rigid_body(mass: f64, gravity: f64, inputs: usize) -> Self {
        Self {
            mass: MassSpec::Known { mass },
            inertia: InertiaSpec::Cholesky { prior: Vector3::repeat(1.0), hidden: vec![32, 32] },
            potential: PotentialSpec::KnownGravity { mass, gravity },
            gain: GainSpec::Learned { inputs, hidden: vec![32, 32] },
            init_scale: 0.1,
        }
    }

    /// Known actuation; mass and inertia learned as residuals on priors.
    pub fn residual(prior_mass: f64, prior_inertia: Vector3<f64>, gravity: f64) -> Self {
        Self {
            mass: MassSpec::Residual { prior: prior_mass, hidden: vec![32, 32] },
            inertia: InertiaSpec::DiagonalResidual { prior: prior_inertia, hidden: vec![32, 32] },
            potential: PotentialSpec::TiedGravity { gravity },
            gain: GainSpec::Known { gain: DMatrix::identity(6, 6) },
            init_scale: 0.1,
        }
    }

    /// Residual model for motion confined to the x-z plane. The inertia is
    /// linear in the rotation entries so the two axes the data never excites
    /// are not dragged along by a shared hidden layer.
    pub fn planar_residual(prior_mass: f64, prior_inertia: Vector3<f64>, gravity: f64) -> Self {
        Self {
            inertia: InertiaSpec::DiagonalResidual { prior: prior_inertia, hidden: vec![] },
            ..Self::residual(prior_mass, prior_inertia, gravity)
        }
    }

    pub fn input_dim(&self) -> usize {
        match &self.gain {
            GainSpec::Known { gain } => gain.ncols(),
            GainSpec::Learned { inputs, .. } => *inputs,
        }
    }
}

/// Parameter layout derived from a spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub mass: Option<Mlp>,
    pub inertia: Option<Mlp>,
    pub potential: Option<Mlp>,
    /// Start of the three linear potential weights.
    pub potential_linear: Option<usize>,
    pub gain: Option<Mlp>,
    /// Start of the constant gain offset.
    pub gain_offset: Option<usize>,
    pub total: usize,
}

fn net(hidden: &[usize], outputs: usize, offset: &mut usize) -> Mlp {
    let mut sizes = vec![9];
    sizes.extend_from_slice(hidden);
    sizes.push(outputs);
    let m = Mlp::new(sizes, *offset);
    *offset += m.param_count();
    m
}

impl Layout {
    pub fn new(spec: &ModelSpec) -> Self {
        let mut off = 0;
        let mass = match &spec.mass {
            MassSpec::Residual { hidden, .. } => Some(net(hidden, 1, &mut off)),
            MassSpec::Known { .. } => None,
        };
        let inertia = match &spec.inertia {
            InertiaSpec::Cholesky { hidden, .. } => Some(net(hidden, 6, &mut off)),
            InertiaSpec::DiagonalResidual { hidden, .. } => Some(net(hidden, 3, &mut off)),
            InertiaSpec::Known { .. } => None,
        };
        let (potential, potential_linear) = match &spec.potential {
            PotentialSpec::Learned { hidden, .. } => {
                let m = net(hidden, 1, &mut off);
                let lin = off;
                off += 3;
                (Some(m), Some(lin))
            }
            _ => (None, None),
        };
        let (gain, gain_offset) = match &spec.gain {
            GainSpec::Learned { inputs, hidden } => {
                let m = net(hidden, 6 * inputs, &mut off);
                let o = off;
                off += 6 * inputs;
                (Some(m), Some(o))
            }
            GainSpec::Known { .. } => (None, None),
        };
        Self { mass, inertia, potential, potential_linear, gain, gain_offset, total: off }
    }
}

/// Learned model: spec, layout and flat parameter vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnedModel {
    pub spec: ModelSpec,
    pub layout: Layout,
    pub params: Vec<f64>,
}

impl LearnedModel {
    pub fn init(spec: ModelSpec, seed: u64) -> Self {
        let layout = Layout::new(&spec);
        let mut params = vec![0.0; layout.total];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for m in [&layout.mass, &layout.inertia, &layout.potential, &layout.gain].into_iter().flatten() {
            m.init(&mut params, spec.init_scale, &mut rng);
        }
        Self { spec, layout, params }
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }
}

/// Tape values describing the model at one configuration.
pub(crate) struct Terms {
    /// `(v, w) = M^-1 p`.
    pub zeta: [Var; 6],
    pub grad_p: [Var; 3],
    /// Row-major gradient with respect to the rotation entries.
    pub grad_r: Option<[Var; 9]>,
    /// Row-major `6 x m` gain, or `None` when known.
    pub gain: Option<Vec<Var>>,
    /// Hamiltonian value when requested.
    pub energy: Option<Var>,
}

struct NetEval {
    trace: MlpTrace,
    outputs: usize,
}

/// Builds `M^-1 p`, `dH/dq`, `B` and optionally `U` for configuration `(p, r)` and momentum `mom`.
pub(crate) fn build_terms(
    tape: &mut Tape,
    model: &LearnedModel,
    pos: &[Var; 3],
    r: &[Var; 9],
    mom: &[Var; 6],
    want_grad: bool,
    want_potential: bool,
) -> Terms {
    let spec = &model.spec;
    let lay = &model.layout;
    let r0 = tape.contiguous(r);
    let zero = tape.constant(0.0);
    let pv = [mom[0], mom[1], mom[2]];
    let pw = [mom[3], mom[4], mom[5]];

    // mass
    let mut mass_bar: Option<Var> = None;
    let mut mass_s: Option<Var> = None;
    let mut mass_net: Option<NetEval> = None;
    let v: [Var; 3] = match &spec.mass {
        MassSpec::Known { mass } => {
            let k = 1.0 / mass;
            [tape.scale(pv[0], k), tape.scale(pv[1], k), tape.scale(pv[2], k)]
        }
        MassSpec::Residual { prior, .. } => {
            let m = lay.mass.as_ref().unwrap();
            let tr = m.forward(tape, r0);
            let s = tape.add_const(tr.output, (1.0 / prior).sqrt());
            let minv = tape.square(s);
            mass_s = Some(s);
            let vv = [tape.mul(minv, pv[0]), tape.mul(minv, pv[1]), tape.mul(minv, pv[2])];
            if want_grad {
                // dT/ds = s |p_v|^2
                let pp = tape.dot(&pv, &pv);
                mass_bar = Some(tape.mul(s, pp));
            }
            mass_net = Some(NetEval { trace: tr, outputs: 1 });
            vv
        }
    };

    // inertia
    let mut inertia_net: Option<(NetEval, Vec<Var>)> = None;
    let w: [Var; 3] = match &spec.inertia {
        InertiaSpec::Known { inertia } => {
            [tape.scale(pw[0], 1.0 / inertia[0]), tape.scale(pw[1], 1.0 / inertia[1]), tape.scale(pw[2], 1.0 / inertia[2])]
        }
        InertiaSpec::Cholesky { prior, .. } => {
            let m = lay.inertia.as_ref().unwrap();
            let tr = m.forward(tape, r0);
            let y = tape.run(tr.output, 6);
            let l00 = tape.add_const(y[0], (1.0 / prior[0]).sqrt());
            let l10 = y[1];
            let l11 = tape.add_const(y[2], (1.0 / prior[1]).sqrt());
            let l20 = y[3];
            let l21 = y[4];
            let l22 = tape.add_const(y[5], (1.0 / prior[2]).sqrt());
            // a = L^T p_w
            let a0 = {
                let t0 = tape.mul(l00, pw[0]);
                let t1 = tape.mul(l10, pw[1]);
                let t2 = tape.mul(l20, pw[2]);
                let s = tape.add(t0, t1);
                tape.add(s, t2)
            };
            let a1 = {
                let t1 = tape.mul(l11, pw[1]);
                let t2 = tape.mul(l21, pw[2]);
                tape.add(t1, t2)
            };
            let a2 = tape.mul(l22, pw[2]);
            let w0 = {
                let t = tape.mul(l00, a0);
                tape.axpy(t, pw[0], INERTIA_EPS)
            };
            let w1 = {
                let t0 = tape.mul(l10, a0);
                let t1 = tape.mul(l11, a1);
                let s = tape.add(t0, t1);
                tape.axpy(s, pw[1], INERTIA_EPS)
            };
            let w2 = {
                let t0 = tape.mul(l20, a0);
                let t1 = tape.mul(l21, a1);
                let t2 = tape.mul(l22, a2);
                let s = tape.add(t0, t1);
                let s = tape.add(s, t2);
                tape.axpy(s, pw[2], INERTIA_EPS)
            };
            let mut ybar = vec![];
            if want_grad {
                let first = tape.mul(pw[0], a0);
                tape.mul(pw[1], a0);
                tape.mul(pw[1], a1);
                tape.mul(pw[2], a0);
                tape.mul(pw[2], a1);
                tape.mul(pw[2], a2);
                ybar = vec![first];
            }
            inertia_net = Some((NetEval { trace: tr, outputs: 6 }, ybar));
            [w0, w1, w2]
        }
        InertiaSpec::DiagonalResidual { prior, .. } => {
            let m = lay.inertia.as_ref().unwrap();
            let tr = m.forward(tape, r0);
            let y = tape.run(tr.output, 3);
            let mut s = [zero; 3];
            let mut out = [zero; 3];
            for i in 0..3 {
                s[i] = tape.add_const(y[i], (1.0 / prior[i]).sqrt());
                let jinv = tape.square(s[i]);
                out[i] = tape.mul(jinv, pw[i]);
            }
            let mut ybar = vec![];
            if want_grad {
                let mut first = None;
                let sq: Vec<Var> = (0..3).map(|i| tape.square(pw[i])).collect();
                for i in 0..3 {
                    let b = tape.mul(s[i], sq[i]);
                    first.get_or_insert(b);
                }
                ybar = vec![first.unwrap()];
            }
            inertia_net = Some((NetEval { trace: tr, outputs: 3 }, ybar));
            out
        }
    };

    // potential
    let mut potential_net: Option<NetEval> = None;
    let mut potential_value: Option<Var> = None;
    let grad_p: [Var; 3] = match &spec.potential {
        PotentialSpec::KnownGravity { mass, gravity } => {
            if want_potential {
                potential_value = Some(tape.scale(pos[2], mass * gravity));
            }
            let c = tape.constant(mass * gravity);
            [zero, zero, c]
        }
        PotentialSpec::TiedGravity { gravity } => match (&spec.mass, mass_s) {
            (MassSpec::Known { mass }, _) => {
                if want_potential {
                    potential_value = Some(tape.scale(pos[2], mass * gravity));
                }
                let c = tape.constant(mass * gravity);
                [zero, zero, c]
            }
            (_, Some(s)) => {
                // U = g z / s^2
                let s2 = tape.square(s);
                let one = tape.constant(*gravity);
                let gz = tape.div(one, s2);
                if want_potential {
                    potential_value = Some(tape.mul(gz, pos[2]));
                }
                if want_grad {
                    // dU/ds = -2 g z / s^3
                    let s3 = tape.mul(s2, s);
                    let num = tape.scale(pos[2], -2.0 * gravity);
                    let du = tape.div(num, s3);
                    let mb = mass_bar.unwrap_or(zero);
                    mass_bar = Some(tape.add(mb, du));
                }
                [zero, zero, gz]
            }
            _ => unreachable!(),
        },
        PotentialSpec::Learned { prior, .. } => {
            let m = lay.potential.as_ref().unwrap();
            let lin = lay.potential_linear.unwrap();
            let tr = m.forward(tape, r0);
            let mut g = [zero; 3];
            for i in 0..3 {
                let wi = tape.param(lin + i);
                g[i] = tape.add_const(wi, prior[i]);
            }
            if want_potential {
                let gp = tape.dot(&g, pos);
                potential_value = Some(tape.add(gp, tr.output));
            }
            potential_net = Some(NetEval { trace: tr, outputs: 1 });
            g
        }
    };
    if want_potential && potential_value.is_some() {
        // add kinetic part so callers get H
        let pvv = tape.dot(&pv, &v);
        let pww = tape.dot(&pw, &w);
        let two_t = tape.add(pvv, pww);
        let u = potential_value.unwrap();
        potential_value = Some(tape.axpy(u, two_t, 0.5));
    }

    // configuration gradient by in-graph vector-Jacobian products
    let grad_r = if want_grad {
        let mut acc: Option<[Var; 9]> = None;
        let mut add = |tape: &mut Tape, g: Var| {
            let gs = tape.run(g, 9);
            acc = Some(match acc {
                None => [gs[0], gs[1], gs[2], gs[3], gs[4], gs[5], gs[6], gs[7], gs[8]],
                Some(a) => {
                    let mut o = a;
                    for k in 0..9 {
                        o[k] = tape.add(a[k], gs[k]);
                    }
                    o
                }
            });
        };
        if let (Some(ne), Some(mb)) = (&mass_net, mass_bar) {
            let g = lay.mass.as_ref().unwrap().input_vjp(tape, &ne.trace, mb);
            add(tape, g);
            debug_assert_eq!(ne.outputs, 1);
        }
        if let Some((ne, yb)) = &inertia_net {
            let g = lay.inertia.as_ref().unwrap().input_vjp(tape, &ne.trace, yb[0]);
            add(tape, g);
            debug_assert!(ne.outputs == 6 || ne.outputs == 3);
        }
        if let Some(ne) = &potential_net {
            let one = tape.constant(1.0);
            let g = lay.potential.as_ref().unwrap().input_vjp(tape, &ne.trace, one);
            add(tape, g);
        }
        Some(acc.unwrap_or([zero; 9]))
    } else {
        None
    };

    let gain = match &spec.gain {
        GainSpec::Known { .. } => None,
        GainSpec::Learned { inputs, .. } => {
            let m = lay.gain.as_ref().unwrap();
            let off = lay.gain_offset.unwrap();
            let tr = m.forward(tape, r0);
            let ys = tape.run(tr.output, 6 * inputs);
            let mut out = Vec::with_capacity(6 * inputs);
            for (k, y) in ys.into_iter().enumerate() {
                let o = tape.param(off + k);
                out.push(tape.add(y, o));
            }
            Some(out)
        }
    };

    Terms { zeta: [v[0], v[1], v[2], w[0], w[1], w[2]], grad_p, grad_r, gain, energy: potential_value }
}

/// Time derivative of the packed state `(p, r, p_v, p_w)` on the tape.
pub(crate) fn build_dynamics(tape: &mut Tape, model: &LearnedModel, x: &[Var; 18], u: &[f64]) -> [Var; 18] {
    let pos = [x[0], x[1], x[2]];
    let mut r = [x[3]; 9];
    r.copy_from_slice(&x[3..12]);
    let mut mom = [x[12]; 6];
    mom.copy_from_slice(&x[12..18]);
    let t = build_terms(tape, model, &pos, &r, &mom, true, false);
    let v = [t.zeta[0], t.zeta[1], t.zeta[2]];
    let w = [t.zeta[3], t.zeta[4], t.zeta[5]];
    let gr = t.grad_r.unwrap();
    let mut out = [x[0]; 18];
    // p_dot = R v
    for i in 0..3 {
        let row = [r[3 * i], r[3 * i + 1], r[3 * i + 2]];
        out[i] = tape.dot(&row, &v);
    }
    // r_i dot = r_i x w
    let mut torque = None;
    for i in 0..3 {
        let row = [r[3 * i], r[3 * i + 1], r[3 * i + 2]];
        let c = tape.cross(&row, &w);
        out[3 + 3 * i..6 + 3 * i].copy_from_slice(&c);
        let gi = [gr[3 * i], gr[3 * i + 1], gr[3 * i + 2]];
        let rc = tape.cross(&row, &gi);
        torque = Some(match torque {
            None => rc,
            Some(a) => {
                let a: [Var; 3] = a;
                [tape.add(a[0], rc[0]), tape.add(a[1], rc[1]), tape.add(a[2], rc[2])]
            }
        });
    }
    let torque = torque.unwrap();
    let pv = [mom[0], mom[1], mom[2]];
    let pw = [mom[3], mom[4], mom[5]];
    // Bu
    let mut bu = [None; 6];
    match (&t.gain, &model.spec.gain) {
        (Some(g), GainSpec::Learned { inputs, .. }) => {
            for i in 0..6 {
                let mut acc: Option<Var> = None;
                for j in 0..*inputs {
                    let term = tape.scale(g[i * inputs + j], u[j]);
                    acc = Some(match acc {
                        None => term,
                        Some(a) => tape.add(a, term),
                    });
                }
                bu[i] = acc;
            }
        }
        (None, GainSpec::Known { gain }) => {
            for i in 0..6 {
                let s: f64 = (0..gain.ncols()).map(|j| gain[(i, j)] * u[j]).sum();
                if s != 0.0 {
                    bu[i] = Some(tape.constant(s));
                }
            }
        }
        _ => unreachable!(),
    }
    // p_v dot = p_v x w - R^T dU/dp + (Bu)_v
    let pvxw = tape.cross(&pv, &w);
    for j in 0..3 {
        let col = [r[j], r[3 + j], r[6 + j]];
        let rt = tape.dot(&col, &t.grad_p);
        let mut e = tape.sub(pvxw[j], rt);
        if let Some(b) = bu[j] {
            e = tape.add(e, b);
        }
        out[12 + j] = e;
    }
    // p_w dot = p_w x w + p_v x v + sum r_i x dH/dr_i + (Bu)_w
    let a = tape.cross(&pw, &w);
    let b = tape.cross(&pv, &v);
    for j in 0..3 {
        let s = tape.add(a[j], b[j]);
        let mut e = tape.add(s, torque[j]);
        if let Some(bb) = bu[3 + j] {
            e = tape.add(e, bb);
        }
        out[15 + j] = e;
    }
    out
}

/// `M(q) zeta` on the tape (used to turn measured twists into momenta).
pub(crate) fn build_momentum(tape: &mut Tape, model: &LearnedModel, r: &[Var; 9], zeta: &[f64; 6]) -> [Var; 6] {
    // evaluate M^-1 columns by probing with unit momenta is wasteful; invert the
    // structured blocks instead
    let spec = &model.spec;
    let lay = &model.layout;
    let r0 = tape.contiguous(r);
    let pv: [Var; 3] = match &spec.mass {
        MassSpec::Known { mass } => {
            let m = *mass;
            [tape.constant(m * zeta[0]), tape.constant(m * zeta[1]), tape.constant(m * zeta[2])]
        }
        MassSpec::Residual { prior, .. } => {
            let tr = lay.mass.as_ref().unwrap().forward(tape, r0);
            let s = tape.add_const(tr.output, (1.0 / prior).sqrt());
            let minv = tape.square(s);
            let mut o = [s; 3];
            for i in 0..3 {
                let z = tape.constant(zeta[i]);
                o[i] = tape.div(z, minv);
            }
            o
        }
    };
    let pw: [Var; 3] = match &spec.inertia {
        InertiaSpec::Known { inertia } => {
            [tape.constant(inertia[0] * zeta[3]), tape.constant(inertia[1] * zeta[4]), tape.constant(inertia[2] * zeta[5])]
        }
        InertiaSpec::DiagonalResidual { prior, .. } => {
            let tr = lay.inertia.as_ref().unwrap().forward(tape, r0);
            let y = tape.run(tr.output, 3);
            let mut o = [y[0]; 3];
            for i in 0..3 {
                let s = tape.add_const(y[i], (1.0 / prior[i]).sqrt());
                let jinv = tape.square(s);
                let z = tape.constant(zeta[3 + i]);
                o[i] = tape.div(z, jinv);
            }
            o
        }
        InertiaSpec::Cholesky { prior, .. } => {
            let tr = lay.inertia.as_ref().unwrap().forward(tape, r0);
            let y = tape.run(tr.output, 6);
            let l00 = tape.add_const(y[0], (1.0 / prior[0]).sqrt());
            let l11 = tape.add_const(y[2], (1.0 / prior[1]).sqrt());
            let l22 = tape.add_const(y[5], (1.0 / prior[2]).sqrt());
            let l = [[l00, y[1], y[3]], [y[1], l11, y[4]], [y[3], y[4], l22]];
            // lower factor entries: (i, j) for i >= j
            let lo = |i: usize, j: usize| if i >= j { Some(l[i][j]) } else { None };
            // A = L L^T + eps I
            let mut a = [[y[0]; 3]; 3];
            for i in 0..3 {
                for j in 0..=i {
                    let mut acc: Option<Var> = None;
                    for k in 0..=j {
                        let (Some(x), Some(z)) = (lo(i, k), lo(j, k)) else { continue };
                        let p = tape.mul(x, z);
                        acc = Some(match acc {
                            None => p,
                            Some(q) => tape.add(q, p),
                        });
                    }
                    let mut v = acc.unwrap();
                    if i == j {
                        v = tape.add_const(v, INERTIA_EPS);
                    }
                    a[i][j] = v;
                    a[j][i] = v;
                }
            }
            solve3(tape, &a, &[zeta[3], zeta[4], zeta[5]])
        }
    };
    [pv[0], pv[1], pv[2], pw[0], pw[1], pw[2]]
}

/// `A^-1 b` for symmetric 3x3 `A` by cofactors.
fn solve3(tape: &mut Tape, a: &[[Var; 3]; 3], b: &[f64; 3]) -> [Var; 3] {
    let mut cof = [[a[0][0]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
            let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
            let p = tape.mul(a[i1][j1], a[i2][j2]);
            let q = tape.mul(a[i1][j2], a[i2][j1]);
            cof[i][j] = tape.sub(p, q);
        }
    }
    let d0 = tape.mul(a[0][0], cof[0][0]);
    let d1 = tape.mul(a[0][1], cof[0][1]);
    let d2 = tape.mul(a[0][2], cof[0][2]);
    let det = {
        let s = tape.add(d0, d1);
        tape.add(s, d2)
    };
    let mut out = [det; 3];
    for i in 0..3 {
        // (A^-1)_{ij} = cof[j][i] / det
        let mut acc: Option<Var> = None;
        for j in 0..3 {
            if b[j] == 0.0 {
                continue;
            }
            let t = tape.scale(cof[j][i], b[j]);
            acc = Some(match acc {
                None => t,
                Some(x) => tape.add(x, t),
            });
        }
        out[i] = match acc {
            None => tape.constant(0.0),
            Some(x) => tape.div(x, det),
        };
    }
    out
}

pub(crate) fn pose_vars(tape: &mut Tape, pose: &Pose) -> ([Var; 3], [Var; 9]) {
    let p = [tape.constant(pose.position.x), tape.constant(pose.position.y), tape.constant(pose.position.z)];
    let e = pose.rotation_entries();
    let mut r = [p[0]; 9];
    for k in 0..9 {
        r[k] = tape.constant(e[k]);
    }
    (p, r)
}

impl HamiltonianModel for LearnedModel {
    fn input_dim(&self) -> usize {
        self.spec.input_dim()
    }

    fn mass_inverse(&self, pose: &Pose) -> Matrix6<f64> {
        let mut m = Matrix6::zeros();
        let mut tape = Tape::new(&self.params);
        for c in 0..6 {
            tape.clear();
            let (p, r) = pose_vars(&mut tape, pose);
            let mut mom = [p[0]; 6];
            for k in 0..6 {
                mom[k] = tape.constant(if k == c { 1.0 } else { 0.0 });
            }
            let t = build_terms(&mut tape, self, &p, &r, &mom, false, false);
            for k in 0..6 {
                m[(k, c)] = tape.value(t.zeta[k]);
            }
        }
        m
    }

    fn potential(&self, pose: &Pose) -> f64 {
        let mut tape = Tape::new(&self.params);
        let (p, r) = pose_vars(&mut tape, pose);
        let z = tape.constant(0.0);
        let t = build_terms(&mut tape, self, &p, &r, &[z; 6], false, true);
        tape.value(t.energy.unwrap())
    }

    fn input_gain(&self, pose: &Pose) -> DMatrix<f64> {
        match &self.spec.gain {
            GainSpec::Known { gain } => gain.clone(),
            GainSpec::Learned { inputs, .. } => {
                let mut tape = Tape::new(&self.params);
                let (p, r) = pose_vars(&mut tape, pose);
                let z = tape.constant(0.0);
                let t = build_terms(&mut tape, self, &p, &r, &[z; 6], false, false);
                let g = t.gain.unwrap();
                DMatrix::from_fn(6, *inputs, |i, j| tape.value(g[i * inputs + j]))
            }
        }
    }

    fn config_gradient(&self, pose: &Pose, momentum: &Vector6<f64>) -> ConfigGradient {
        let mut tape = Tape::new(&self.params);
        let (p, r) = pose_vars(&mut tape, pose);
        let mut mom = [p[0]; 6];
        for k in 0..6 {
            mom[k] = tape.constant(momentum[k]);
        }
        let t = build_terms(&mut tape, self, &p, &r, &mom, true, false);
        let gr = t.grad_r.unwrap();
        ConfigGradient {
            position: Vector3::new(tape.value(t.grad_p[0]), tape.value(t.grad_p[1]), tape.value(t.grad_p[2])),
            rotation: Matrix3::from_fn(|i, j| tape.value(gr[3 * i + j])),
        }
    }
}
