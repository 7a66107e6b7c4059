//! Reverse-mode automatic differentiation over [`Mat`] values.
//!
//! Every forward operation appends a node to a tape; `backward` walks the
//! tape once in reverse, accumulating exact adjoints. Only the operations
//! the gait classifier needs are implemented, each with its hand-derived
//! backward rule. Gradients are tracked lazily: nodes that no parameter
//! feeds into are skipped during the reverse sweep.
//!
//! Hard contracts, all enforced at runtime:
//! * shapes must line up when an op is recorded;
//! * forward values and backward adjoints must stay finite;
//! * `backward` requires a 1×1 loss node and may run once per tape.

use crate::error::{Error, Result};
use crate::nn::mat::Mat;

/// Handle to a tape node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    /// C = A · B
    MatMul(NodeId, NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    /// Elementwise product.
    Hadamard(NodeId, NodeId),
    /// A (n×m) plus a 1×m row broadcast down every row.
    AddRowBroadcast(NodeId, NodeId),
    /// k·A + c elementwise; only the multiplier matters to the backward
    /// sweep, the constant is folded into the value at creation.
    AffineScalar(NodeId, f64),
    Relu(NodeId),
    Sigmoid(NodeId),
    Tanh(NodeId),
    /// [A | B] column-wise.
    ConcatCols(NodeId, NodeId),
    /// Column means: n×m → 1×m.
    MeanRows(NodeId),
    /// Stack 1×m rows into a k×m matrix.
    StackRows(Vec<NodeId>),
    /// Softmax down a k×1 column.
    SoftmaxCol(NodeId),
    /// Row r of A as a 1×m matrix.
    RowSelect(NodeId, usize),
    /// A scaled by a 1×1 tape value.
    ScaleByScalar(NodeId, NodeId),
    /// Sum of all entries: 1×1.
    Sum(NodeId),
    /// Binary cross-entropy with logits against a constant 0/1 label.
    BceWithLogits(NodeId, f64),
}

struct Node {
    value: Mat,
    op: Op,
    needs_grad: bool,
}

/// Gradients for one backward pass, indexed by [`NodeId`].
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Mat>>,
}

impl Gradients {
    /// Gradient of the loss with respect to the node, if the node
    /// participates in gradient flow and was reached.
    pub fn get(&self, id: NodeId) -> Option<&Mat> {
        self.grads.get(id.0).and_then(|g| g.as_ref())
    }
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    backward_done: bool,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Mat {
        &self.nodes[id.0].value
    }

    fn push(&mut self, value: Mat, op: Op, needs_grad: bool) -> Result<NodeId> {
        if !value.is_finite() {
            return Err(Error::Numerical(
                "non-finite value produced during forward pass".into(),
            ));
        }
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        Ok(NodeId(self.nodes.len() - 1))
    }

    fn needs(&self, id: NodeId) -> bool {
        self.nodes[id.0].needs_grad
    }

    /// Registers a value that gradients should flow to (a parameter).
    pub fn param(&mut self, value: Mat) -> Result<NodeId> {
        self.push(value, Op::Leaf, true)
    }

    /// Registers a value gradients are never requested for (data).
    pub fn constant(&mut self, value: Mat) -> Result<NodeId> {
        self.push(value, Op::Leaf, false)
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.cols() != vb.rows() {
            return Err(Error::Contract(format!(
                "matmul shape mismatch: {:?} · {:?}",
                va.shape(),
                vb.shape()
            )));
        }
        let value = va.matmul(vb);
        let ng = self.needs(a) || self.needs(b);
        self.push(value, Op::MatMul(a, b), ng)
    }

    fn binary_same_shape(
        &mut self,
        a: NodeId,
        b: NodeId,
        name: &str,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.shape() != vb.shape() {
            return Err(Error::Contract(format!(
                "{name} shape mismatch: {:?} vs {:?}",
                va.shape(),
                vb.shape()
            )));
        }
        let value = va.zip_map(vb, f);
        let ng = self.needs(a) || self.needs(b);
        self.push(value, op, ng)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary_same_shape(a, b, "add", |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary_same_shape(a, b, "sub", |x, y| x - y, Op::Sub(a, b))
    }

    pub fn hadamard(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary_same_shape(a, b, "hadamard", |x, y| x * y, Op::Hadamard(a, b))
    }

    /// Adds a 1×m bias row to every row of an n×m matrix.
    pub fn add_row_broadcast(&mut self, a: NodeId, bias: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(bias));
        if vb.rows() != 1 || vb.cols() != va.cols() {
            return Err(Error::Contract(format!(
                "row broadcast needs 1×{} bias, got {:?}",
                va.cols(),
                vb.shape()
            )));
        }
        let mut value = va.clone();
        for r in 0..value.rows() {
            let cols = value.cols();
            let row = &mut value.data_mut()[r * cols..(r + 1) * cols];
            for (x, &b) in row.iter_mut().zip(vb.data()) {
                *x += b;
            }
        }
        let ng = self.needs(a) || self.needs(bias);
        self.push(value, Op::AddRowBroadcast(a, bias), ng)
    }

    /// k·A + c with plain-number coefficients.
    pub fn affine_scalar(&mut self, a: NodeId, k: f64, c: f64) -> Result<NodeId> {
        let value = self.value(a).map(|x| k * x + c);
        let ng = self.needs(a);
        self.push(value, Op::AffineScalar(a, k), ng)
    }

    pub fn relu(&mut self, a: NodeId) -> Result<NodeId> {
        let value = self.value(a).map(|x| x.max(0.0));
        let ng = self.needs(a);
        self.push(value, Op::Relu(a), ng)
    }

    pub fn sigmoid(&mut self, a: NodeId) -> Result<NodeId> {
        let value = self.value(a).map(sigmoid);
        let ng = self.needs(a);
        self.push(value, Op::Sigmoid(a), ng)
    }

    pub fn tanh(&mut self, a: NodeId) -> Result<NodeId> {
        let value = self.value(a).map(f64::tanh);
        let ng = self.needs(a);
        self.push(value, Op::Tanh(a), ng)
    }

    pub fn concat_cols(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.rows() != vb.rows() {
            return Err(Error::Contract(format!(
                "concat_cols row mismatch: {:?} vs {:?}",
                va.shape(),
                vb.shape()
            )));
        }
        let rows = va.rows();
        let (ca, cb) = (va.cols(), vb.cols());
        let mut data = Vec::with_capacity(rows * (ca + cb));
        for r in 0..rows {
            data.extend_from_slice(va.row(r));
            data.extend_from_slice(vb.row(r));
        }
        let value = Mat::from_vec(rows, ca + cb, data);
        let ng = self.needs(a) || self.needs(b);
        self.push(value, Op::ConcatCols(a, b), ng)
    }

    /// Mean over rows: n×m → 1×m.
    pub fn mean_rows(&mut self, a: NodeId) -> Result<NodeId> {
        let va = self.value(a);
        if va.rows() == 0 {
            return Err(Error::Contract("mean_rows over an empty matrix".into()));
        }
        let mut value = va.col_sums();
        value.scale_in_place(1.0 / va.rows() as f64);
        let ng = self.needs(a);
        self.push(value, Op::MeanRows(a), ng)
    }

    /// Stacks k row vectors (all 1×m) into a k×m matrix.
    pub fn stack_rows(&mut self, rows: &[NodeId]) -> Result<NodeId> {
        if rows.is_empty() {
            return Err(Error::Contract("stack_rows needs at least one row".into()));
        }
        let m = self.value(rows[0]).cols();
        let mut data = Vec::with_capacity(rows.len() * m);
        let mut ng = false;
        for &r in rows {
            let v = self.value(r);
            if v.rows() != 1 || v.cols() != m {
                return Err(Error::Contract(format!(
                    "stack_rows needs 1×{m} rows, got {:?}",
                    v.shape()
                )));
            }
            data.extend_from_slice(v.row(0));
            ng |= self.needs(r);
        }
        let value = Mat::from_vec(rows.len(), m, data);
        self.push(value, Op::StackRows(rows.to_vec()), ng)
    }

    /// Numerically stable softmax down a k×1 column.
    pub fn softmax_col(&mut self, a: NodeId) -> Result<NodeId> {
        let va = self.value(a);
        if va.cols() != 1 || va.rows() == 0 {
            return Err(Error::Contract(format!(
                "softmax_col needs a non-empty column vector, got {:?}",
                va.shape()
            )));
        }
        let max = va.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = va.data().iter().map(|&x| (x - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        let value = Mat::from_vec(va.rows(), 1, exps.into_iter().map(|e| e / total).collect());
        let ng = self.needs(a);
        self.push(value, Op::SoftmaxCol(a), ng)
    }

    /// Row r of a as a 1×m matrix.
    pub fn row_select(&mut self, a: NodeId, r: usize) -> Result<NodeId> {
        let va = self.value(a);
        if r >= va.rows() {
            return Err(Error::Contract(format!(
                "row {r} out of bounds for {:?}",
                va.shape()
            )));
        }
        let value = Mat::from_vec(1, va.cols(), va.row(r).to_vec());
        let ng = self.needs(a);
        self.push(value, Op::RowSelect(a, r), ng)
    }

    /// A scaled by a 1×1 tape scalar (gradients flow to both).
    pub fn scale_by_scalar(&mut self, a: NodeId, s: NodeId) -> Result<NodeId> {
        let vs = self.value(s);
        if vs.shape() != (1, 1) {
            return Err(Error::Contract(format!(
                "scale_by_scalar needs a 1×1 scale, got {:?}",
                vs.shape()
            )));
        }
        let k = vs.item();
        let value = self.value(a).map(|x| k * x);
        let ng = self.needs(a) || self.needs(s);
        self.push(value, Op::ScaleByScalar(a, s), ng)
    }

    pub fn sum(&mut self, a: NodeId) -> Result<NodeId> {
        let value = Mat::scalar(self.value(a).sum());
        let ng = self.needs(a);
        self.push(value, Op::Sum(a), ng)
    }

    /// Numerically stable binary cross-entropy with logits:
    /// `max(z, 0) − z·y + ln(1 + exp(−|z|))` for a 1×1 logit and a hard
    /// 0/1 label.
    pub fn bce_with_logits(&mut self, logit: NodeId, label: f64) -> Result<NodeId> {
        let vz = self.value(logit);
        if vz.shape() != (1, 1) {
            return Err(Error::Contract(format!(
                "bce_with_logits needs a 1×1 logit, got {:?}",
                vz.shape()
            )));
        }
        if label != 0.0 && label != 1.0 {
            return Err(Error::Contract(format!(
                "bce_with_logits needs a 0/1 label, got {label}"
            )));
        }
        let z = vz.item();
        let loss = z.max(0.0) - z * label + (-z.abs()).exp().ln_1p();
        let ng = self.needs(logit);
        self.push(Mat::scalar(loss), Op::BceWithLogits(logit, label), ng)
    }

    /// Backpropagates from a 1×1 loss node with seed gradient
    /// `seed` (use 1.0 for a plain loss, 1/batch for averaged batches).
    /// Each tape supports exactly one backward pass.
    pub fn backward_scaled(&mut self, loss: NodeId, seed: f64) -> Result<Gradients> {
        if self.backward_done {
            return Err(Error::Contract(
                "backward called twice on one tape; rebuild the forward pass first".into(),
            ));
        }
        self.backward_done = true;
        if self.value(loss).shape() != (1, 1) {
            return Err(Error::Contract(format!(
                "backward needs a scalar loss, got {:?}",
                self.value(loss).shape()
            )));
        }
        if !seed.is_finite() {
            return Err(Error::Numerical("backward seed must be finite".into()));
        }

        let mut grads: Vec<Option<Mat>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Mat::scalar(seed));

        for i in (0..=loss.0).rev() {
            if !self.nodes[i].needs_grad || grads[i].is_none() {
                continue;
            }
            // All inputs of node i have indices < i, so splitting keeps the
            // outgoing gradient immutable while input slots stay writable.
            let (lower, upper) = grads.split_at_mut(i);
            let g = upper[0].as_ref().expect("checked above");
            let node = &self.nodes[i];
            match &node.op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let (va, vb) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
                    if self.nodes[a.0].needs_grad {
                        accumulate(&mut lower[a.0], g.matmul_nt(vb));
                    }
                    if self.nodes[b.0].needs_grad {
                        accumulate(&mut lower[b.0], va.matmul_tn(g));
                    }
                }
                Op::Add(a, b) => {
                    if self.nodes[a.0].needs_grad {
                        accumulate(&mut lower[a.0], g.clone());
                    }
                    if self.nodes[b.0].needs_grad {
                        accumulate(&mut lower[b.0], g.clone());
                    }
                }
                Op::Sub(a, b) => {
                    if self.nodes[a.0].needs_grad {
                        accumulate(&mut lower[a.0], g.clone());
                    }
                    if self.nodes[b.0].needs_grad {
                        accumulate(&mut lower[b.0], g.map(|x| -x));
                    }
                }
                Op::Hadamard(a, b) => {
                    let (va, vb) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
                    if self.nodes[a.0].needs_grad {
                        accumulate(&mut lower[a.0], g.zip_map(vb, |x, y| x * y));
                    }
                    if self.nodes[b.0].needs_grad {
                        accumulate(&mut lower[b.0], g.zip_map(va, |x, y| x * y));
                    }
                }
                Op::AddRowBroadcast(a, bias) => {
                    if self.nodes[a.0].needs_grad {
                        accumulate(&mut lower[a.0], g.clone());
                    }
                    if self.nodes[bias.0].needs_grad {
                        accumulate(&mut lower[bias.0], g.col_sums());
                    }
                }
                Op::AffineScalar(a, k) => {
                    if self.nodes[a.0].needs_grad {
                        let k = *k;
                        accumulate(&mut lower[a.0], g.map(|x| k * x));
                    }
                }
                Op::Relu(a) => {
                    if self.nodes[a.0].needs_grad {
                        let va = &self.nodes[a.0].value;
                        accumulate(
                            &mut lower[a.0],
                            g.zip_map(va, |gx, x| if x > 0.0 { gx } else { 0.0 }),
                        );
                    }
                }
                Op::Sigmoid(a) => {
                    if self.nodes[a.0].needs_grad {
                        let y = &node.value;
                        accumulate(&mut lower[a.0], g.zip_map(y, |gx, s| gx * s * (1.0 - s)));
                    }
                }
                Op::Tanh(a) => {
                    if self.nodes[a.0].needs_grad {
                        let y = &node.value;
                        accumulate(&mut lower[a.0], g.zip_map(y, |gx, t| gx * (1.0 - t * t)));
                    }
                }
                Op::ConcatCols(a, b) => {
                    let ca = self.nodes[a.0].value.cols();
                    let cb = self.nodes[b.0].value.cols();
                    let rows = g.rows();
                    if self.nodes[a.0].needs_grad {
                        let mut ga = Mat::zeros(rows, ca);
                        for r in 0..rows {
                            let src = &g.row(r)[..ca];
                            ga.data_mut()[r * ca..(r + 1) * ca].copy_from_slice(src);
                        }
                        accumulate(&mut lower[a.0], ga);
                    }
                    if self.nodes[b.0].needs_grad {
                        let mut gb = Mat::zeros(rows, cb);
                        for r in 0..rows {
                            let src = &g.row(r)[ca..];
                            gb.data_mut()[r * cb..(r + 1) * cb].copy_from_slice(src);
                        }
                        accumulate(&mut lower[b.0], gb);
                    }
                }
                Op::MeanRows(a) => {
                    if self.nodes[a.0].needs_grad {
                        let va = &self.nodes[a.0].value;
                        let n = va.rows();
                        let inv = 1.0 / n as f64;
                        let mut ga = Mat::zeros(n, va.cols());
                        for r in 0..n {
                            let cols = va.cols();
                            let dst = &mut ga.data_mut()[r * cols..(r + 1) * cols];
                            for (d, &s) in dst.iter_mut().zip(g.row(0)) {
                                *d = s * inv;
                            }
                        }
                        accumulate(&mut lower[a.0], ga);
                    }
                }
                Op::StackRows(rows) => {
                    for (r, id) in rows.iter().enumerate() {
                        if self.nodes[id.0].needs_grad {
                            let slice = Mat::from_vec(1, g.cols(), g.row(r).to_vec());
                            accumulate(&mut lower[id.0], slice);
                        }
                    }
                }
                Op::SoftmaxCol(a) => {
                    if self.nodes[a.0].needs_grad {
                        let y = &node.value;
                        let dot: f64 = g
                            .data()
                            .iter()
                            .zip(y.data())
                            .map(|(&gi, &yi)| gi * yi)
                            .sum();
                        accumulate(&mut lower[a.0], g.zip_map(y, |gi, yi| yi * (gi - dot)));
                    }
                }
                Op::RowSelect(a, r) => {
                    if self.nodes[a.0].needs_grad {
                        let va = &self.nodes[a.0].value;
                        let mut ga = Mat::zeros(va.rows(), va.cols());
                        let cols = va.cols();
                        ga.data_mut()[r * cols..(r + 1) * cols].copy_from_slice(g.row(0));
                        accumulate(&mut lower[a.0], ga);
                    }
                }
                Op::ScaleByScalar(a, s) => {
                    let k = self.nodes[s.0].value.item();
                    if self.nodes[a.0].needs_grad {
                        accumulate(&mut lower[a.0], g.map(|x| k * x));
                    }
                    if self.nodes[s.0].needs_grad {
                        let va = &self.nodes[a.0].value;
                        let contrib: f64 = g
                            .data()
                            .iter()
                            .zip(va.data())
                            .map(|(&gi, &vi)| gi * vi)
                            .sum();
                        accumulate(&mut lower[s.0], Mat::scalar(contrib));
                    }
                }
                Op::Sum(a) => {
                    if self.nodes[a.0].needs_grad {
                        let va = &self.nodes[a.0].value;
                        accumulate(&mut lower[a.0], Mat::filled(va.rows(), va.cols(), g.item()));
                    }
                }
                Op::BceWithLogits(a, label) => {
                    if self.nodes[a.0].needs_grad {
                        let z = self.nodes[a.0].value.item();
                        let dz = g.item() * (sigmoid(z) - label);
                        accumulate(&mut lower[a.0], Mat::scalar(dz));
                    }
                }
            }
        }

        for g in grads.iter().flatten() {
            if !g.is_finite() {
                return Err(Error::Numerical(
                    "non-finite gradient produced during backward pass".into(),
                ));
            }
        }
        Ok(Gradients { grads })
    }

    /// `backward_scaled` with a unit seed.
    pub fn backward(&mut self, loss: NodeId) -> Result<Gradients> {
        self.backward_scaled(loss, 1.0)
    }
}

fn accumulate(slot: &mut Option<Mat>, contribution: Mat) {
    match slot {
        None => *slot = Some(contribution),
        Some(acc) => acc.add_assign_scaled(&contribution, 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn sigmoid_value_and_gradient_at_zero() {
        let mut tape = Tape::new();
        let x = tape.param(Mat::scalar(0.0)).unwrap();
        let y = tape.sigmoid(x).unwrap();
        let s = tape.sum(y).unwrap();
        assert_eq!(tape.value(y).item(), 0.5);
        let grads = tape.backward(s).unwrap();
        assert!((grads.get(x).unwrap().item() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn bce_matches_frozen_value() {
        // loss(z = −2, y = 1) = 2 + ln(1 + e^{−2})
        let mut tape = Tape::new();
        let z = tape.param(Mat::scalar(-2.0)).unwrap();
        let loss = tape.bce_with_logits(z, 1.0).unwrap();
        assert!((tape.value(loss).item() - 2.126_928_011_042_972_7).abs() < 1e-15);
        let grads = tape.backward(loss).unwrap();
        // d/dz = σ(z) − y = σ(−2) − 1
        let expect = 1.0 / (1.0 + 2.0f64.exp()) - 1.0;
        assert!((grads.get(z).unwrap().item() - expect).abs() < 1e-15);
    }

    #[test]
    fn bce_is_stable_for_extreme_logits() {
        for z in [-800.0, 800.0] {
            for y in [0.0, 1.0] {
                let mut tape = Tape::new();
                let zn = tape.param(Mat::scalar(z)).unwrap();
                let loss = tape.bce_with_logits(zn, y).unwrap();
                assert!(tape.value(loss).item().is_finite());
                let grads = tape.backward(loss).unwrap();
                assert!(grads.get(zn).unwrap().item().is_finite());
            }
        }
    }

    #[test]
    fn softmax_hand_case() {
        // softmax([0, ln 3]) = [0.25, 0.75]
        let mut tape = Tape::new();
        let x = tape.param(Mat::from_vec(2, 1, vec![0.0, 3.0f64.ln()])).unwrap();
        let y = tape.softmax_col(x).unwrap();
        let v = tape.value(y);
        assert!((v.get(0, 0) - 0.25).abs() < 1e-12);
        assert!((v.get(1, 0) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn softmax_is_stable_for_huge_logits() {
        let mut tape = Tape::new();
        let x = tape.param(Mat::from_vec(2, 1, vec![1e6, 1e6 + 1.0])).unwrap();
        let y = tape.softmax_col(x).unwrap();
        assert!(tape.value(y).is_finite());
    }

    #[test]
    fn matmul_gradients_match_analytic_form() {
        // f = sum(A·B) ⇒ dA = 1·Bᵀ, dB = Aᵀ·1
        let mut tape = Tape::new();
        let a = tape
            .param(Mat::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]))
            .unwrap();
        let b = tape
            .param(Mat::from_rows(&[&[5.0, 6.0], &[7.0, 8.0]]))
            .unwrap();
        let c = tape.matmul(a, b).unwrap();
        let s = tape.sum(c).unwrap();
        let grads = tape.backward(s).unwrap();
        assert_eq!(
            grads.get(a).unwrap(),
            &Mat::from_rows(&[&[11.0, 15.0], &[11.0, 15.0]])
        );
        assert_eq!(
            grads.get(b).unwrap(),
            &Mat::from_rows(&[&[4.0, 4.0], &[6.0, 6.0]])
        );
    }

    #[test]
    fn second_backward_is_a_contract_error() {
        let mut tape = Tape::new();
        let x = tape.param(Mat::scalar(1.0)).unwrap();
        let y = tape.tanh(x).unwrap();
        let s = tape.sum(y).unwrap();
        tape.backward(s).unwrap();
        let err = tape.backward(s).unwrap_err();
        assert_eq!(err.category(), "contract");
    }

    #[test]
    fn non_scalar_loss_is_a_contract_error() {
        let mut tape = Tape::new();
        let x = tape.param(Mat::zeros(2, 2)).unwrap();
        let y = tape.relu(x).unwrap();
        let err = tape.backward(y).unwrap_err();
        assert_eq!(err.category(), "contract");
    }

    #[test]
    fn nan_input_is_a_numerical_error() {
        let mut tape = Tape::new();
        let err = tape.param(Mat::scalar(f64::NAN)).unwrap_err();
        assert_eq!(err.category(), "numerical");
    }

    #[test]
    fn shape_mismatch_is_a_contract_error() {
        let mut tape = Tape::new();
        let a = tape.param(Mat::zeros(2, 3)).unwrap();
        let b = tape.param(Mat::zeros(2, 3)).unwrap();
        assert_eq!(tape.matmul(a, b).unwrap_err().category(), "contract");
        let c = tape.param(Mat::zeros(3, 2)).unwrap();
        assert_eq!(tape.add(a, c).unwrap_err().category(), "contract");
    }

    #[test]
    fn constants_receive_no_gradient() {
        let mut tape = Tape::new();
        let x = tape.param(Mat::scalar(2.0)).unwrap();
        let c = tape.constant(Mat::scalar(3.0)).unwrap();
        let y = tape.hadamard(x, c).unwrap();
        let s = tape.sum(y).unwrap();
        let grads = tape.backward(s).unwrap();
        assert!((grads.get(x).unwrap().item() - 3.0).abs() < 1e-15);
        assert!(grads.get(c).is_none());
    }

    /// Builds a little expression using every op and returns (loss, grads
    /// for each param).
    fn omnibus(values: &[Mat]) -> (f64, Vec<Mat>) {
        let mut tape = Tape::new();
        let a = tape.param(values[0].clone()).unwrap(); // 2×3
        let w = tape.param(values[1].clone()).unwrap(); // 3×2
        let bias = tape.param(values[2].clone()).unwrap(); // 1×2
        let s = tape.param(values[3].clone()).unwrap(); // 1×1

        let mm = tape.matmul(a, w).unwrap(); // 2×2
        let biased = tape.add_row_broadcast(mm, bias).unwrap();
        let r = tape.relu(biased).unwrap();
        let sg = tape.sigmoid(biased).unwrap();
        let th = tape.tanh(biased).unwrap();
        let had = tape.hadamard(sg, th).unwrap();
        let diff = tape.sub(r, had).unwrap();
        let tot = tape.add(diff, biased).unwrap();
        let cat = tape.concat_cols(tot, had).unwrap(); // 2×4
        let mean = tape.mean_rows(cat).unwrap(); // 1×4
        let row0 = tape.row_select(cat, 0).unwrap(); // 1×4
        let both = tape.stack_rows(&[mean, row0]).unwrap(); // 2×4
        let scaled = tape.scale_by_scalar(both, s).unwrap();
        let aff = tape.affine_scalar(scaled, 0.7, -0.1).unwrap();
        let colsum = tape.sum(aff).unwrap(); // 1×1
        let firstcol = tape.row_select(aff, 1).unwrap();
        let second = tape.sum(firstcol).unwrap(); // 1×1
        let sm_in = tape.stack_rows(&[colsum, second]).unwrap(); // 2×1
        let sm = tape.softmax_col(sm_in).unwrap();
        let top = tape.row_select(sm, 0).unwrap();
        let logit = tape.affine_scalar(top, 3.0, -1.0).unwrap();
        let loss = tape.bce_with_logits(logit, 1.0).unwrap();
        let loss_val = tape.value(loss).item();
        let grads = tape.backward(loss).unwrap();
        let out = [a, w, bias, s]
            .iter()
            .map(|id| {
                grads
                    .get(*id)
                    .cloned()
                    .unwrap_or_else(|| Mat::zeros(1, 1))
            })
            .collect();
        (loss_val, out)
    }

    #[test]
    fn omnibus_expression_matches_central_differences() {
        let mut rng = crate::seed::rng_from_seed(99);
        let mut rand_mat = |r: usize, c: usize| {
            Mat::from_vec(r, c, (0..r * c).map(|_| rng.gen::<f64>() - 0.5).collect())
        };
        let values = vec![
            rand_mat(2, 3),
            rand_mat(3, 2),
            rand_mat(1, 2),
            Mat::scalar(0.8),
        ];
        let (_, analytic) = omnibus(&values);
        let h = 1e-5;
        for p in 0..values.len() {
            for idx in 0..values[p].len() {
                let mut plus = values.clone();
                plus[p].data_mut()[idx] += h;
                let mut minus = values.clone();
                minus[p].data_mut()[idx] -= h;
                let (lp, _) = omnibus(&plus);
                let (lm, _) = omnibus(&minus);
                let fd = (lp - lm) / (2.0 * h);
                let ad = analytic[p].data()[idx];
                let rel = (ad - fd).abs() / ad.abs().max(fd.abs()).max(1e-6);
                assert!(
                    rel < 1e-6,
                    "param {p} entry {idx}: analytic {ad} vs fd {fd} (rel {rel})"
                );
            }
        }
    }
}
