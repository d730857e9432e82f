//! Operation tape for reverse-mode gradients.
//!
//! Nodes are appended in evaluation order, so the node vector is already a
//! topological order and backward is a single reverse sweep. Leaf values
//! borrow from the caller where possible; a tape over a frozen model does not
//! copy its weight matrices.

use std::borrow::Cow;

use super::{check_len, matvec_into, Activation};
use crate::error::{Error, Result};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
enum Op {
    Constant,
    Param(usize),
    LinearMap {
        w: NodeId,
        x: NodeId,
    },
    Hadamard(NodeId, NodeId),
    Add(NodeId, NodeId),
    /// `s[idx] * v` for a scalar picked out of another node.
    Scale {
        v: NodeId,
        s: NodeId,
        idx: usize,
    },
    Activate {
        x: NodeId,
        kind: Activation,
    },
    /// Weighted binary cross-entropy on a raw logit.
    BceWithLogits {
        logit: NodeId,
        target: bool,
        weight: f64,
    },
    /// `max(0, 1 - y * margin)` with `y` in {-1, +1}.
    Hinge {
        margin: NodeId,
        sign: f64,
    },
}

#[derive(Debug, Clone)]
struct Node<'a> {
    value: Cow<'a, [f64]>,
    rows: usize,
    cols: usize,
    op: Op,
    requires_grad: bool,
}

/// Ordered record of primitive operations.
#[derive(Debug, Clone, Default)]
pub struct Tape<'a> {
    nodes: Vec<Node<'a>>,
}

impl<'a> Tape<'a> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        &self.nodes[id.0].value
    }

    pub fn shape(&self, id: NodeId) -> (usize, usize) {
        let n = &self.nodes[id.0];
        (n.rows, n.cols)
    }

    fn push(&mut self, value: Cow<'a, [f64]>, rows: usize, cols: usize, op: Op, requires_grad: bool) -> NodeId {
        debug_assert_eq!(value.len(), rows * cols);
        self.nodes.push(Node {
            value,
            rows,
            cols,
            op,
            requires_grad,
        });
        NodeId(self.nodes.len() - 1)
    }

    fn grad(&self, id: NodeId) -> bool {
        self.nodes[id.0].requires_grad
    }

    /// A column-vector input that never receives a gradient.
    pub fn constant(&mut self, value: impl Into<Cow<'a, [f64]>>) -> NodeId {
        let value = value.into();
        let n = value.len();
        self.push(value, n, 1, Op::Constant, false)
    }

    /// A learnable array; `slot` ties it back to the model's parameter order.
    pub fn param(&mut self, slot: usize, value: &'a [f64], rows: usize, cols: usize) -> Result<NodeId> {
        check_len("Tape::param", rows * cols, value.len())?;
        Ok(self.push(Cow::Borrowed(value), rows, cols, Op::Param(slot), true))
    }

    /// `W·x`, with `w` any `rows × cols` node and `x` a vector node.
    pub fn linear_map(&mut self, w: NodeId, x: NodeId) -> Result<NodeId> {
        let (rows, cols) = self.shape(w);
        check_len("linear_map", cols, self.value(x).len())?;
        let mut out = vec![0.0; rows];
        matvec_into(self.value(w), rows, cols, self.value(x), &mut out);
        let rg = self.grad(w) || self.grad(x);
        Ok(self.push(Cow::Owned(out), rows, 1, Op::LinearMap { w, x }, rg))
    }

    pub fn hadamard(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        check_len("hadamard", va.len(), vb.len())?;
        let out: Vec<f64> = va.iter().zip(vb).map(|(x, y)| x * y).collect();
        let n = out.len();
        let rg = self.grad(a) || self.grad(b);
        Ok(self.push(Cow::Owned(out), n, 1, Op::Hadamard(a, b), rg))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        check_len("add", va.len(), vb.len())?;
        let out: Vec<f64> = va.iter().zip(vb).map(|(x, y)| x + y).collect();
        let n = out.len();
        let rg = self.grad(a) || self.grad(b);
        Ok(self.push(Cow::Owned(out), n, 1, Op::Add(a, b), rg))
    }

    /// `s[idx] · v`.
    pub fn scale(&mut self, v: NodeId, s: NodeId, idx: usize) -> Result<NodeId> {
        let sv = self.value(s);
        if idx >= sv.len() {
            return Err(Error::dims("scale", idx + 1, sv.len()));
        }
        let k = sv[idx];
        let out: Vec<f64> = self.value(v).iter().map(|x| k * x).collect();
        let n = out.len();
        let rg = self.grad(v) || self.grad(s);
        Ok(self.push(Cow::Owned(out), n, 1, Op::Scale { v, s, idx }, rg))
    }

    pub fn activate(&mut self, x: NodeId, kind: Activation) -> NodeId {
        let out: Vec<f64> = self.value(x).iter().map(|&v| kind.apply(v)).collect();
        let n = out.len();
        let rg = self.grad(x);
        self.push(Cow::Owned(out), n, 1, Op::Activate { x, kind }, rg)
    }

    pub fn bce_with_logits(&mut self, logit: NodeId, target: bool, weight: f64) -> Result<NodeId> {
        let v = self.value(logit);
        check_len("bce_with_logits", 1, v.len())?;
        let loss = weight * softplus(if target { -v[0] } else { v[0] });
        let rg = self.grad(logit);
        Ok(self.push(
            Cow::Owned(vec![loss]),
            1,
            1,
            Op::BceWithLogits { logit, target, weight },
            rg,
        ))
    }

    pub fn hinge(&mut self, margin: NodeId, target: bool) -> Result<NodeId> {
        let v = self.value(margin);
        check_len("hinge", 1, v.len())?;
        let sign = if target { 1.0 } else { -1.0 };
        let loss = (1.0 - sign * v[0]).max(0.0);
        let rg = self.grad(margin);
        Ok(self.push(Cow::Owned(vec![loss]), 1, 1, Op::Hinge { margin, sign }, rg))
    }

    /// Reverse sweep from a scalar `output`.
    pub fn backward(&self, output: NodeId) -> Result<Gradients> {
        let out = &self.nodes[output.0];
        if out.value.len() != 1 {
            return Err(Error::InvalidInput(format!(
                "backward needs a scalar output, node {} has {} entries",
                output.0,
                out.value.len()
            )));
        }
        let mut adj: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        adj[output.0] = Some(vec![1.0]);

        for i in (0..=output.0).rev() {
            let Some(g) = adj[i].take() else { continue };
            let node = &self.nodes[i];
            match node.op {
                Op::Constant | Op::Param(_) => {}
                Op::LinearMap { w, x } => {
                    let (rows, cols) = self.shape(w);
                    if self.grad(w) {
                        let xv = self.value(x);
                        let gw = slot(&mut adj, w, rows * cols);
                        for (r, gr) in g.iter().enumerate() {
                            if *gr == 0.0 {
                                continue;
                            }
                            for (dst, xc) in gw[r * cols..(r + 1) * cols].iter_mut().zip(xv) {
                                *dst += gr * xc;
                            }
                        }
                    }
                    if self.grad(x) {
                        let wv = self.value(w);
                        let gx = slot(&mut adj, x, cols);
                        for (r, gr) in g.iter().enumerate() {
                            for (dst, wc) in gx.iter_mut().zip(&wv[r * cols..(r + 1) * cols]) {
                                *dst += gr * wc;
                            }
                        }
                    }
                }
                Op::Hadamard(a, b) => {
                    let n = g.len();
                    if self.grad(a) {
                        let vb = self.value(b);
                        let ga = slot(&mut adj, a, n);
                        for ((dst, gi), bi) in ga.iter_mut().zip(&g).zip(vb) {
                            *dst += gi * bi;
                        }
                    }
                    if self.grad(b) {
                        let va = self.value(a);
                        let gb = slot(&mut adj, b, n);
                        for ((dst, gi), ai) in gb.iter_mut().zip(&g).zip(va) {
                            *dst += gi * ai;
                        }
                    }
                }
                Op::Add(a, b) => {
                    let n = g.len();
                    for p in [a, b] {
                        if self.grad(p) {
                            let gp = slot(&mut adj, p, n);
                            for (dst, gi) in gp.iter_mut().zip(&g) {
                                *dst += gi;
                            }
                        }
                    }
                }
                Op::Scale { v, s, idx } => {
                    let n = g.len();
                    if self.grad(v) {
                        let k = self.value(s)[idx];
                        let gv = slot(&mut adj, v, n);
                        for (dst, gi) in gv.iter_mut().zip(&g) {
                            *dst += k * gi;
                        }
                    }
                    if self.grad(s) {
                        let d: f64 = g.iter().zip(self.value(v)).map(|(a, b)| a * b).sum();
                        let len = self.value(s).len();
                        slot(&mut adj, s, len)[idx] += d;
                    }
                }
                Op::Activate { x, kind } => {
                    if self.grad(x) {
                        let n = g.len();
                        let xv = self.value(x);
                        let yv = &node.value;
                        let gx = slot(&mut adj, x, n);
                        for (((dst, gi), xi), yi) in gx.iter_mut().zip(&g).zip(xv).zip(yv.iter()) {
                            *dst += gi * kind.derivative(*xi, *yi);
                        }
                    }
                }
                Op::BceWithLogits { logit, target, weight } => {
                    if self.grad(logit) {
                        let z = self.value(logit)[0];
                        // d/dz softplus(-z) = -sigmoid(-z); d/dz softplus(z) = sigmoid(z)
                        let d = if target { -sigmoid(-z) } else { sigmoid(z) };
                        slot(&mut adj, logit, 1)[0] += g[0] * weight * d;
                    }
                }
                Op::Hinge { margin, sign } => {
                    if self.grad(margin) {
                        let m = self.value(margin)[0];
                        let d = if 1.0 - sign * m > 0.0 { -sign } else { 0.0 };
                        slot(&mut adj, margin, 1)[0] += g[0] * d;
                    }
                }
            }
            adj[i] = Some(g);
        }

        let params = self
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| match n.op {
                Op::Param(s) => Some((s, NodeId(i))),
                _ => None,
            })
            .collect();
        Ok(Gradients { adj, params })
    }
}

fn slot(adj: &mut [Option<Vec<f64>>], id: NodeId, len: usize) -> &mut Vec<f64> {
    adj[id.0].get_or_insert_with(|| vec![0.0; len])
}

/// `ln(1 + e^z)` without overflow.
pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Adjoints produced by [`Tape::backward`].
#[derive(Debug, Clone)]
pub struct Gradients {
    adj: Vec<Option<Vec<f64>>>,
    params: Vec<(usize, NodeId)>,
}

impl Gradients {
    /// Adjoint of any node reached by the sweep; `None` when the node does
    /// not influence the output.
    pub fn get(&self, id: NodeId) -> Option<&[f64]> {
        self.adj.get(id.0).and_then(|a| a.as_deref())
    }

    /// Adds every parameter adjoint into `acc[slot]`. Parameters that did not
    /// influence the output contribute nothing, leaving a zero gradient.
    pub fn accumulate_into(&self, acc: &mut [Vec<f64>]) {
        for &(slot, id) in &self.params {
            if let Some(g) = self.get(id) {
                for (dst, v) in acc[slot].iter_mut().zip(g) {
                    *dst += v;
                }
            }
        }
    }

    /// Dense per-slot gradients for `slot_lens`.
    pub fn param_grads(&self, slot_lens: &[usize]) -> Vec<Vec<f64>> {
        let mut acc: Vec<Vec<f64>> = slot_lens.iter().map(|&n| vec![0.0; n]).collect();
        self.accumulate_into(&mut acc);
        acc
    }
}
