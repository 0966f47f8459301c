//! Reverse-mode automatic differentiation on a flat tape of scalars.
//!
//! Parameters live outside the tape in a borrowed slice; affine nodes read a
//! strided run of parameters against a contiguous run of tape values, which
//! keeps dense layers (and their transposes) to one node per output.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
enum Op {
    Const,
    Param(u32),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    /// `a + c b`
    Axpy(u32, u32, f64),
    Scale(u32, f64),
    Tanh(u32),
    /// `g (1 - h^2)`, the tanh derivative applied to an adjoint.
    TanhGrad(u32, u32),
    Sqrt(u32),
    /// `acos(x)^2`
    AcosSq(u32),
    /// `bias + sum_i w[w0 + i ws] x[x0 + i]`
    Affine { w0: u32, ws: u32, x0: u32, len: u32, bias: u32 },
}

/// A tape bound to a parameter vector.
pub struct Tape<'p> {
    params: &'p [f64],
    ops: Vec<Op>,
    vals: Vec<f64>,
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p [f64]) -> Self {
        Self { params, ops: Vec::with_capacity(4096), vals: Vec::with_capacity(4096) }
    }

    pub fn clear(&mut self) {
        self.ops.clear();
        self.vals.clear();
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn params(&self) -> &'p [f64] {
        self.params
    }

    fn push(&mut self, op: Op, v: f64) -> Var {
        self.ops.push(op);
        self.vals.push(v);
        Var(self.ops.len() as u32 - 1)
    }

    pub fn value(&self, v: Var) -> f64 {
        self.vals[v.index()]
    }

    pub fn constant(&mut self, v: f64) -> Var {
        self.push(Op::Const, v)
    }

    pub fn param(&mut self, i: usize) -> Var {
        let v = self.params[i];
        self.push(Op::Param(i as u32), v)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.vals[a.index()] + self.vals[b.index()];
        self.push(Op::Add(a.0, b.0), v)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let v = self.vals[a.index()] - self.vals[b.index()];
        self.push(Op::Sub(a.0, b.0), v)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let v = self.vals[a.index()] * self.vals[b.index()];
        self.push(Op::Mul(a.0, b.0), v)
    }

    pub fn div(&mut self, a: Var, b: Var) -> Var {
        let v = self.vals[a.index()] / self.vals[b.index()];
        self.push(Op::Div(a.0, b.0), v)
    }

    pub fn axpy(&mut self, a: Var, b: Var, c: f64) -> Var {
        let v = self.vals[a.index()] + c * self.vals[b.index()];
        self.push(Op::Axpy(a.0, b.0, c), v)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let v = c * self.vals[a.index()];
        self.push(Op::Scale(a.0, c), v)
    }

    pub fn add_const(&mut self, a: Var, c: f64) -> Var {
        let k = self.constant(c);
        self.add(a, k)
    }

    pub fn square(&mut self, a: Var) -> Var {
        self.mul(a, a)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let v = self.vals[a.index()].tanh();
        self.push(Op::Tanh(a.0), v)
    }

    pub fn tanh_grad(&mut self, h: Var, g: Var) -> Var {
        let hv = self.vals[h.index()];
        let v = self.vals[g.index()] * (1.0 - hv * hv);
        self.push(Op::TanhGrad(h.0, g.0), v)
    }

    pub fn sqrt(&mut self, a: Var) -> Var {
        let v = self.vals[a.index()].sqrt();
        self.push(Op::Sqrt(a.0), v)
    }

    /// `acos(x)^2` with `x` clamped to `[-1, 1]`; its derivative tends to -2 as `x -> 1`.
    pub fn acos_sq(&mut self, a: Var) -> Var {
        let t = self.vals[a.index()].clamp(-1.0, 1.0).acos();
        self.push(Op::AcosSq(a.0), t * t)
    }

    /// Affine combination of strided parameters with a contiguous run of values.
    pub fn affine(&mut self, w0: usize, ws: usize, x0: Var, len: usize, bias: Option<usize>) -> Var {
        let x = x0.index();
        let mut v = match bias {
            Some(b) => self.params[b],
            None => 0.0,
        };
        let w = &self.params[w0..];
        let xs = &self.vals[x..x + len];
        if ws == 1 {
            v += w[..len].iter().zip(xs).map(|(a, b)| a * b).sum::<f64>();
        } else {
            for (i, xv) in xs.iter().enumerate() {
                v += w[i * ws] * xv;
            }
        }
        let op = Op::Affine { w0: w0 as u32, ws: ws as u32, x0: x0.0, len: len as u32, bias: bias.map_or(NONE, |b| b as u32) };
        self.push(op, v)
    }

    /// Start of a contiguous copy of `xs` (no copy when already contiguous).
    pub fn contiguous(&mut self, xs: &[Var]) -> Var {
        if xs.windows(2).all(|w| w[1].0 == w[0].0 + 1) && !xs.is_empty() {
            return xs[0];
        }
        let first = Var(self.ops.len() as u32);
        for &x in xs {
            self.scale(x, 1.0);
        }
        first
    }

    pub fn run(&self, start: Var, len: usize) -> Vec<Var> {
        (0..len).map(|i| Var(start.0 + i as u32)).collect()
    }

    pub fn dot(&mut self, a: &[Var], b: &[Var]) -> Var {
        let mut acc = self.mul(a[0], b[0]);
        for i in 1..a.len() {
            let p = self.mul(a[i], b[i]);
            acc = self.add(acc, p);
        }
        acc
    }

    pub fn sum(&mut self, xs: &[Var]) -> Var {
        let mut acc = xs[0];
        for &x in &xs[1..] {
            acc = self.add(acc, x);
        }
        acc
    }

    pub fn cross(&mut self, a: &[Var; 3], b: &[Var; 3]) -> [Var; 3] {
        let mut out = [a[0]; 3];
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let p = self.mul(a[j], b[k]);
            let q = self.mul(a[k], b[j]);
            out[i] = self.sub(p, q);
        }
        out
    }

    /// Accumulates `d out / d params` into `grad`.
    pub fn backward(&self, out: Var, grad: &mut [f64]) {
        let mut adj = vec![0.0; out.index() + 1];
        adj[out.index()] = 1.0;
        let p = self.params;
        for i in (0..=out.index()).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            match self.ops[i] {
                Op::Const => {}
                Op::Param(k) => grad[k as usize] += a,
                Op::Add(x, y) => {
                    adj[x as usize] += a;
                    adj[y as usize] += a;
                }
                Op::Sub(x, y) => {
                    adj[x as usize] += a;
                    adj[y as usize] -= a;
                }
                Op::Mul(x, y) => {
                    adj[x as usize] += a * self.vals[y as usize];
                    adj[y as usize] += a * self.vals[x as usize];
                }
                Op::Div(x, y) => {
                    let yv = self.vals[y as usize];
                    adj[x as usize] += a / yv;
                    adj[y as usize] -= a * self.vals[i] / yv;
                }
                Op::Axpy(x, y, c) => {
                    adj[x as usize] += a;
                    adj[y as usize] += a * c;
                }
                Op::Scale(x, c) => adj[x as usize] += a * c,
                Op::Tanh(x) => {
                    let h = self.vals[i];
                    adj[x as usize] += a * (1.0 - h * h);
                }
                Op::TanhGrad(h, g) => {
                    let hv = self.vals[h as usize];
                    adj[g as usize] += a * (1.0 - hv * hv);
                    adj[h as usize] -= 2.0 * a * hv * self.vals[g as usize];
                }
                Op::Sqrt(x) => adj[x as usize] += a * 0.5 / self.vals[i],
                Op::AcosSq(x) => {
                    let c = self.vals[x as usize].clamp(-1.0, 1.0);
                    let t = c.acos();
                    let s = (1.0 - c * c).sqrt();
                    let d = if s < 1e-12 { if c > 0.0 { -2.0 } else { -2.0 * t / 1e-12 } } else { -2.0 * t / s };
                    adj[x as usize] += a * d;
                }
                Op::Affine { w0, ws, x0, len, bias } => {
                    let (w0, ws, x0) = (w0 as usize, ws as usize, x0 as usize);
                    if bias != NONE {
                        grad[bias as usize] += a;
                    }
                    for k in 0..len as usize {
                        let wi = w0 + k * ws;
                        adj[x0 + k] += a * p[wi];
                        grad[wi] += a * self.vals[x0 + k];
                    }
                }
            }
        }
    }
}

/// Fully connected tanh network; layer `l` stores `W_l` (out x in, row-major) then `b_l`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Mlp {
    pub sizes: Vec<usize>,
    pub offset: usize,
}

/// Activations kept for the input vector-Jacobian product.
pub struct MlpTrace {
    hidden: Vec<Var>,
    pub output: Var,
}

impl Mlp {
    pub fn new(sizes: Vec<usize>, offset: usize) -> Self {
        Self { sizes, offset }
    }

    pub fn param_count(&self) -> usize {
        self.sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn outputs(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    fn layer_offset(&self, l: usize) -> usize {
        self.offset + self.sizes.windows(2).take(l).map(|w| w[0] * w[1] + w[1]).sum::<usize>()
    }

    pub fn forward(&self, tape: &mut Tape, x0: Var) -> MlpTrace {
        let layers = self.sizes.len() - 1;
        let mut x = x0;
        let mut hidden = Vec::with_capacity(layers);
        for l in 0..layers {
            let (nin, nout) = (self.sizes[l], self.sizes[l + 1]);
            let off = self.layer_offset(l);
            let mut first = None;
            for o in 0..nout {
                let v = tape.affine(off + o * nin, 1, x, nin, Some(off + nout * nin + o));
                first.get_or_insert(v);
            }
            let pre = first.unwrap();
            if l + 1 < layers {
                let mut h0 = None;
                for o in 0..nout {
                    let h = tape.tanh(Var(pre.0 + o as u32));
                    h0.get_or_insert(h);
                }
                x = h0.unwrap();
                hidden.push(x);
            } else {
                x = pre;
            }
        }
        MlpTrace { hidden, output: x }
    }

    /// `J^T ybar` with respect to the network input, built on the tape.
    pub fn input_vjp(&self, tape: &mut Tape, trace: &MlpTrace, ybar: Var) -> Var {
        let layers = self.sizes.len() - 1;
        let mut g = ybar;
        for l in (0..layers).rev() {
            let (nin, nout) = (self.sizes[l], self.sizes[l + 1]);
            let off = self.layer_offset(l);
            if l + 1 < layers {
                let h = trace.hidden[l];
                let mut first = None;
                for o in 0..nout {
                    let v = tape.tanh_grad(Var(h.0 + o as u32), Var(g.0 + o as u32));
                    first.get_or_insert(v);
                }
                g = first.unwrap();
            }
            let mut first = None;
            for i in 0..nin {
                let v = tape.affine(off + i, nin, g, nout, None);
                first.get_or_insert(v);
            }
            g = first.unwrap();
        }
        g
    }

    /// Glorot-uniform weights with the last layer scaled by `out_scale`, zero biases.
    pub fn init<R: rand::Rng + ?Sized>(&self, params: &mut [f64], out_scale: f64, rng: &mut R) {
        let layers = self.sizes.len() - 1;
        for l in 0..layers {
            let (nin, nout) = (self.sizes[l], self.sizes[l + 1]);
            let off = self.layer_offset(l);
            let a = (6.0 / (nin + nout) as f64).sqrt() * if l + 1 == layers { out_scale } else { 1.0 };
            for w in &mut params[off..off + nin * nout] {
                *w = rng.gen_range(-a..a);
            }
            for b in &mut params[off + nin * nout..off + nin * nout + nout] {
                *b = 0.0;
            }
        }
    }
}
