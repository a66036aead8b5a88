//! Scalar reverse-mode differentiation on an append-only tape.
//!
//! The tape records one node per scalar operation; parents always precede
//! children, so the backward pass is a single reverse sweep. Parameters are
//! bound from a [`ParameterStore`] and their adjoints are scattered into a
//! [`Gradients`] buffer with the same shapes.
//!
//! Message vectors here are short (edge degrees of a few tens) and the toy
//! graphs are tiny, so a scalar tape with an n-ary dot-product node for
//! affine layers is fast enough for every training loop in the crate.
//! Everything is f64; there is no mixed precision.

pub mod gradcheck;
mod mlp;
mod params;

pub use mlp::{Activation, MlpSpec};
pub use params::{AdamConfig, Gradients, ParamId, ParameterStore};

/// Saturation guard: inputs to the exact arctanh are clipped to this radius.
pub const ARCTANH_CLIP: f64 = 1.0 - 1e-9;

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Value(u32);

impl Value {
    fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Input,
    Param { array: u32, index: u32 },
    Add(Value, Value),
    Sub(Value, Value),
    Mul(Value, Value),
    Neg(Value),
    Abs(Value),
    Tanh(Value),
    Sigmoid(Value),
    SoftplusShifted(Value),
    ArctanhClip(Value),
    ArctanhTaylor(Value, u32),
    Scale(Value, f64),
    AddConst(Value),
    Sum { off: u32, len: u32 },
    Dot { off: u32, len: u32 },
    BceLogit { z: Value, target: f64 },
}

/// Truncated odd series of arctanh: sum of x^(2m+1)/(2m+1) for m = 0..=q.
///
/// The factor 2 of the check-node update lives at the call site, not here.
pub fn arctanh_taylor_f64(x: f64, q: usize) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = 0.0;
    for m in 0..=q {
        sum += term / (2 * m + 1) as f64;
        term *= x2;
    }
    sum
}

fn arctanh_taylor_deriv(x: f64, q: usize) -> f64 {
    // d/dx = sum of x^(2m), m = 0..=q
    let x2 = x * x;
    let mut term = 1.0;
    let mut sum = 0.0;
    for _ in 0..=q {
        sum += term;
        term *= x2;
    }
    sum
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid_f64(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Append-only computation tape.
#[derive(Debug, Default)]
pub struct Tape {
    ops: Vec<Op>,
    vals: Vec<f64>,
    adjs: Vec<f64>,
    args: Vec<u32>,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn with_capacity(nodes: usize) -> Self {
        Tape {
            ops: Vec::with_capacity(nodes),
            vals: Vec::with_capacity(nodes),
            adjs: Vec::with_capacity(nodes),
            args: Vec::new(),
        }
    }

    /// Drops all nodes, keeping allocations for reuse.
    pub fn clear(&mut self) {
        self.ops.clear();
        self.vals.clear();
        self.adjs.clear();
        self.args.clear();
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn val(&self, v: Value) -> f64 {
        self.vals[v.idx()]
    }

    fn push(&mut self, op: Op, val: f64) -> Value {
        let id = self.ops.len() as u32;
        self.ops.push(op);
        self.vals.push(val);
        self.adjs.push(0.0);
        Value(id)
    }

    /// A leaf node (input or constant); no gradient is reported for it.
    pub fn input(&mut self, v: f64) -> Value {
        self.push(Op::Input, v)
    }

    /// A leaf bound to `store` parameter `(id, index)`.
    pub fn param(&mut self, store: &ParameterStore, id: ParamId, index: usize) -> Value {
        let v = store.values(id)[index];
        self.push(
            Op::Param {
                array: id.raw() as u32,
                index: index as u32,
            },
            v,
        )
    }

    /// Binds a whole parameter array as leaves.
    pub fn bind(&mut self, store: &ParameterStore, id: ParamId) -> Vec<Value> {
        (0..store.values(id).len())
            .map(|i| self.param(store, id, i))
            .collect()
    }

    pub fn add(&mut self, a: Value, b: Value) -> Value {
        let v = self.vals[a.idx()] + self.vals[b.idx()];
        self.push(Op::Add(a, b), v)
    }

    pub fn sub(&mut self, a: Value, b: Value) -> Value {
        let v = self.vals[a.idx()] - self.vals[b.idx()];
        self.push(Op::Sub(a, b), v)
    }

    pub fn mul(&mut self, a: Value, b: Value) -> Value {
        let v = self.vals[a.idx()] * self.vals[b.idx()];
        self.push(Op::Mul(a, b), v)
    }

    pub fn neg(&mut self, a: Value) -> Value {
        let v = -self.vals[a.idx()];
        self.push(Op::Neg(a), v)
    }

    pub fn abs_val(&mut self, a: Value) -> Value {
        let v = self.vals[a.idx()].abs();
        self.push(Op::Abs(a), v)
    }

    pub fn tanh(&mut self, a: Value) -> Value {
        let v = self.vals[a.idx()].tanh();
        self.push(Op::Tanh(a), v)
    }

    pub fn sigmoid(&mut self, a: Value) -> Value {
        let v = sigmoid_f64(self.vals[a.idx()]);
        self.push(Op::Sigmoid(a), v)
    }

    pub fn softplus_shifted(&mut self, a: Value) -> Value {
        let v = softplus(self.vals[a.idx()]) - std::f64::consts::LN_2;
        self.push(Op::SoftplusShifted(a), v)
    }

    /// Exact arctanh with the saturation clip applied to the input value.
    /// The derivative is evaluated at the clipped point.
    pub fn arctanh_clip(&mut self, a: Value) -> Value {
        let x = self.vals[a.idx()].clamp(-ARCTANH_CLIP, ARCTANH_CLIP);
        self.push(Op::ArctanhClip(a), x.atanh())
    }

    /// Truncated-series arctanh of degree 2q+1; a polynomial, so no clip.
    pub fn arctanh_taylor(&mut self, a: Value, q: usize) -> Value {
        let v = arctanh_taylor_f64(self.vals[a.idx()], q);
        self.push(Op::ArctanhTaylor(a, q as u32), v)
    }

    pub fn scale(&mut self, a: Value, k: f64) -> Value {
        let v = self.vals[a.idx()] * k;
        self.push(Op::Scale(a, k), v)
    }

    pub fn add_const(&mut self, a: Value, k: f64) -> Value {
        let v = self.vals[a.idx()] + k;
        self.push(Op::AddConst(a), v)
    }

    /// Sum of the given nodes; the empty sum is a constant zero.
    pub fn sum(&mut self, xs: &[Value]) -> Value {
        if xs.is_empty() {
            return self.input(0.0);
        }
        let off = self.args.len() as u32;
        self.args.extend(xs.iter().map(|v| v.0));
        let v = xs.iter().map(|x| self.vals[x.idx()]).sum();
        self.push(
            Op::Sum {
                off,
                len: xs.len() as u32,
            },
            v,
        )
    }

    /// Inner product of two equal-length node slices.
    pub fn dot(&mut self, xs: &[Value], ws: &[Value]) -> Value {
        assert_eq!(xs.len(), ws.len(), "dot length mismatch");
        if xs.is_empty() {
            return self.input(0.0);
        }
        let off = self.args.len() as u32;
        self.args.extend(xs.iter().map(|v| v.0));
        self.args.extend(ws.iter().map(|v| v.0));
        let v = xs
            .iter()
            .zip(ws)
            .map(|(x, w)| self.vals[x.idx()] * self.vals[w.idx()])
            .sum();
        self.push(
            Op::Dot {
                off,
                len: xs.len() as u32,
            },
            v,
        )
    }

    /// Binary cross-entropy of `sigmoid(z)` against a constant target,
    /// computed in the numerically stable logit form.
    pub fn bce_logit(&mut self, z: Value, target: f64) -> Value {
        debug_assert!(target == 0.0 || target == 1.0);
        let zv = self.vals[z.idx()];
        let v = softplus(zv) - target * zv;
        self.push(Op::BceLogit { z, target }, v)
    }

    /// Reverse sweep from a scalar loss node. Adjoints of parameter leaves
    /// are accumulated into a gradient buffer shaped like `store`; the tape
    /// can be reused afterwards (adjoints are reset on the next call).
    pub fn backward(&mut self, loss: Value, store: &ParameterStore) -> Gradients {
        let mut grads = Gradients::zeros_like(store);
        for a in &mut self.adjs {
            *a = 0.0;
        }
        self.adjs[loss.idx()] = 1.0;
        for i in (0..self.ops.len()).rev() {
            let go = self.adjs[i];
            if go == 0.0 {
                continue;
            }
            match self.ops[i] {
                Op::Input => {}
                Op::Param { array, index } => {
                    grads.accumulate(array as usize, index as usize, go);
                }
                Op::Add(a, b) => {
                    self.adjs[a.idx()] += go;
                    self.adjs[b.idx()] += go;
                }
                Op::Sub(a, b) => {
                    self.adjs[a.idx()] += go;
                    self.adjs[b.idx()] -= go;
                }
                Op::Mul(a, b) => {
                    let (va, vb) = (self.vals[a.idx()], self.vals[b.idx()]);
                    self.adjs[a.idx()] += go * vb;
                    self.adjs[b.idx()] += go * va;
                }
                Op::Neg(a) => self.adjs[a.idx()] -= go,
                Op::Abs(a) => {
                    let s = if self.vals[a.idx()] >= 0.0 { 1.0 } else { -1.0 };
                    self.adjs[a.idx()] += go * s;
                }
                Op::Tanh(a) => {
                    let y = self.vals[i];
                    self.adjs[a.idx()] += go * (1.0 - y * y);
                }
                Op::Sigmoid(a) => {
                    let y = self.vals[i];
                    self.adjs[a.idx()] += go * y * (1.0 - y);
                }
                Op::SoftplusShifted(a) => {
                    self.adjs[a.idx()] += go * sigmoid_f64(self.vals[a.idx()]);
                }
                Op::ArctanhClip(a) => {
                    let x = self.vals[a.idx()].clamp(-ARCTANH_CLIP, ARCTANH_CLIP);
                    self.adjs[a.idx()] += go / (1.0 - x * x);
                }
                Op::ArctanhTaylor(a, q) => {
                    let d = arctanh_taylor_deriv(self.vals[a.idx()], q as usize);
                    self.adjs[a.idx()] += go * d;
                }
                Op::Scale(a, k) => self.adjs[a.idx()] += go * k,
                Op::AddConst(a) => self.adjs[a.idx()] += go,
                Op::Sum { off, len } => {
                    for j in off..off + len {
                        let a = self.args[j as usize] as usize;
                        self.adjs[a] += go;
                    }
                }
                Op::Dot { off, len } => {
                    let (off, len) = (off as usize, len as usize);
                    for j in 0..len {
                        let x = self.args[off + j] as usize;
                        let w = self.args[off + len + j] as usize;
                        let (vx, vw) = (self.vals[x], self.vals[w]);
                        self.adjs[x] += go * vw;
                        self.adjs[w] += go * vx;
                    }
                }
                Op::BceLogit { z, target } => {
                    self.adjs[z.idx()] += go * (sigmoid_f64(self.vals[z.idx()]) - target);
                }
            }
        }
        grads
    }
}
