//! The gait classifier: a graph convolution shared across frames, a GRU
//! over time per joint, temporal attention pooling, and a linear head
//! producing one logit.
//!
//! Per frame t with node features `X_t` (N×D) and the fixed normalized
//! adjacency `Â`:
//!
//! ```text
//! P_t = relu(Â · X_t · W + b)                      (graph convolution)
//! z_t = sigmoid([P_t | H_{t−1}] · W_z + b_z)        (update gate)
//! r_t = sigmoid([P_t | H_{t−1}] · W_r + b_r)        (reset gate)
//! C_t = tanh([P_t | r_t ⊙ H_{t−1}] · W_c + b_c)     (candidate)
//! H_t = z_t ⊙ H_{t−1} + (1 − z_t) ⊙ C_t
//! s_t = mean_nodes(H_t) · a                        (attention score)
//! α   = softmax(s)                                 (over frames)
//! K   = Σ_t α_t H_t                                (context)
//! logit = mean_nodes(K) · w_head + b_head
//! ```
//!
//! All parameters start from uniform(−1/√fan_in, 1/√fan_in) draws with
//! zero biases, from a seeded generator, so two models built from one seed
//! are bit-identical.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::mat::Mat;
use crate::nn::tape::{Gradients, NodeId, Tape};
use crate::seed::rng_from_seed;

/// Tensor names in canonical order; gradients and optimizer state follow
/// this order everywhere.
pub const PARAM_NAMES: [&str; 11] = [
    "gcn_w", "gcn_b", "w_update", "b_update", "w_reset", "b_reset", "w_cand", "b_cand", "attn",
    "head_w", "head_b",
];

const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub input_dim: usize,
    pub hidden: usize,
    pub gcn_w: Mat,
    pub gcn_b: Mat,
    pub w_update: Mat,
    pub b_update: Mat,
    pub w_reset: Mat,
    pub b_reset: Mat,
    pub w_cand: Mat,
    pub b_cand: Mat,
    pub attn: Mat,
    pub head_w: Mat,
    pub head_b: Mat,
}

impl ModelParams {
    /// Fresh parameters: uniform ±1/√fan_in weights, zero biases. Identical
    /// seeds yield bit-identical parameters.
    pub fn init(input_dim: usize, hidden: usize, seed: u64) -> Result<Self> {
        if input_dim == 0 || hidden == 0 {
            return Err(Error::Parameter(
                "model needs positive input and hidden sizes".into(),
            ));
        }
        let mut rng = rng_from_seed(seed);
        let mut uniform = |rows: usize, cols: usize| {
            let bound = 1.0 / (rows as f64).sqrt();
            Mat::from_vec(
                rows,
                cols,
                (0..rows * cols)
                    .map(|_| (2.0 * rng.gen::<f64>() - 1.0) * bound)
                    .collect(),
            )
        };
        Ok(ModelParams {
            gcn_w: uniform(input_dim, hidden),
            gcn_b: Mat::zeros(1, hidden),
            w_update: uniform(2 * hidden, hidden),
            b_update: Mat::zeros(1, hidden),
            w_reset: uniform(2 * hidden, hidden),
            b_reset: Mat::zeros(1, hidden),
            w_cand: uniform(2 * hidden, hidden),
            b_cand: Mat::zeros(1, hidden),
            attn: uniform(hidden, 1),
            head_w: uniform(hidden, 1),
            head_b: Mat::zeros(1, 1),
            input_dim,
            hidden,
        })
    }

    pub fn tensors(&self) -> [(&'static str, &Mat); 11] {
        [
            ("gcn_w", &self.gcn_w),
            ("gcn_b", &self.gcn_b),
            ("w_update", &self.w_update),
            ("b_update", &self.b_update),
            ("w_reset", &self.w_reset),
            ("b_reset", &self.b_reset),
            ("w_cand", &self.w_cand),
            ("b_cand", &self.b_cand),
            ("attn", &self.attn),
            ("head_w", &self.head_w),
            ("head_b", &self.head_b),
        ]
    }

    pub fn tensors_mut(&mut self) -> [(&'static str, &mut Mat); 11] {
        [
            ("gcn_w", &mut self.gcn_w),
            ("gcn_b", &mut self.gcn_b),
            ("w_update", &mut self.w_update),
            ("b_update", &mut self.b_update),
            ("w_reset", &mut self.w_reset),
            ("b_reset", &mut self.b_reset),
            ("w_cand", &mut self.w_cand),
            ("b_cand", &mut self.b_cand),
            ("attn", &mut self.attn),
            ("head_w", &mut self.head_w),
            ("head_b", &mut self.head_b),
        ]
    }

    /// Writes a versioned JSON checkpoint.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut tensors = BTreeMap::new();
        for (name, mat) in self.tensors() {
            tensors.insert(name.to_string(), mat.clone());
        }
        let doc = Checkpoint {
            format_version: CHECKPOINT_VERSION,
            input_dim: self.input_dim,
            hidden: self.hidden,
            tensors,
        };
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(BufWriter::new(file), &doc)
            .map_err(|e| Error::io(path, std::io::Error::new(std::io::ErrorKind::Other, e)))
    }

    /// Reads a checkpoint, validating version, tensor names, and shapes.
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let doc: Checkpoint = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if doc.format_version != CHECKPOINT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported checkpoint version {}",
                doc.format_version
            )));
        }
        let mut params = ModelParams::init(doc.input_dim, doc.hidden, 0)?;
        for (name, slot) in params.tensors_mut() {
            let tensor = doc
                .tensors
                .get(name)
                .ok_or_else(|| Error::Parse(format!("checkpoint missing tensor {name:?}")))?;
            if tensor.shape() != slot.shape() {
                return Err(Error::Parse(format!(
                    "checkpoint tensor {name:?} has shape {:?}, expected {:?}",
                    tensor.shape(),
                    slot.shape()
                )));
            }
            *slot = tensor.clone();
        }
        Ok(params)
    }
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format_version: u32,
    input_dim: usize,
    hidden: usize,
    tensors: BTreeMap<String, Mat>,
}

/// Gradients for every tensor, in [`PARAM_NAMES`] order. Missing gradients
/// (parameters the loss never touched) are zero.
#[derive(Debug, Clone)]
pub struct ParamGrads {
    pub mats: Vec<Mat>,
}

impl ParamGrads {
    pub fn zeros_like(params: &ModelParams) -> Self {
        ParamGrads {
            mats: params
                .tensors()
                .iter()
                .map(|(_, m)| Mat::zeros(m.rows(), m.cols()))
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &ParamGrads) {
        assert_eq!(self.mats.len(), other.mats.len());
        for (a, b) in self.mats.iter_mut().zip(&other.mats) {
            a.add_assign_scaled(b, 1.0);
        }
    }
}

/// Tape handles for one registration of the parameters.
pub struct BoundParams {
    pub gcn_w: NodeId,
    pub gcn_b: NodeId,
    pub w_update: NodeId,
    pub b_update: NodeId,
    pub w_reset: NodeId,
    pub b_reset: NodeId,
    pub w_cand: NodeId,
    pub b_cand: NodeId,
    pub attn: NodeId,
    pub head_w: NodeId,
    pub head_b: NodeId,
}

impl BoundParams {
    /// Registers every tensor as a gradient-carrying leaf.
    pub fn bind(tape: &mut Tape, params: &ModelParams) -> Result<Self> {
        Ok(BoundParams {
            gcn_w: tape.param(params.gcn_w.clone())?,
            gcn_b: tape.param(params.gcn_b.clone())?,
            w_update: tape.param(params.w_update.clone())?,
            b_update: tape.param(params.b_update.clone())?,
            w_reset: tape.param(params.w_reset.clone())?,
            b_reset: tape.param(params.b_reset.clone())?,
            w_cand: tape.param(params.w_cand.clone())?,
            b_cand: tape.param(params.b_cand.clone())?,
            attn: tape.param(params.attn.clone())?,
            head_w: tape.param(params.head_w.clone())?,
            head_b: tape.param(params.head_b.clone())?,
        })
    }

    /// Registers every tensor as a constant: forward passes work as usual
    /// but backward sweeps skip the entire graph. Use for evaluation.
    pub fn bind_frozen(tape: &mut Tape, params: &ModelParams) -> Result<Self> {
        Ok(BoundParams {
            gcn_w: tape.constant(params.gcn_w.clone())?,
            gcn_b: tape.constant(params.gcn_b.clone())?,
            w_update: tape.constant(params.w_update.clone())?,
            b_update: tape.constant(params.b_update.clone())?,
            w_reset: tape.constant(params.w_reset.clone())?,
            b_reset: tape.constant(params.b_reset.clone())?,
            w_cand: tape.constant(params.w_cand.clone())?,
            b_cand: tape.constant(params.b_cand.clone())?,
            attn: tape.constant(params.attn.clone())?,
            head_w: tape.constant(params.head_w.clone())?,
            head_b: tape.constant(params.head_b.clone())?,
        })
    }

    fn ids(&self) -> [NodeId; 11] {
        [
            self.gcn_w,
            self.gcn_b,
            self.w_update,
            self.b_update,
            self.w_reset,
            self.b_reset,
            self.w_cand,
            self.b_cand,
            self.attn,
            self.head_w,
            self.head_b,
        ]
    }

    /// Collects gradients in canonical order, zero-filling any tensor the
    /// loss did not reach.
    pub fn collect_grads(&self, grads: &Gradients, params: &ModelParams) -> ParamGrads {
        let mut out = ParamGrads::zeros_like(params);
        for (slot, id) in out.mats.iter_mut().zip(self.ids()) {
            if let Some(g) = grads.get(id) {
                *slot = g.clone();
            }
        }
        out
    }

    /// Adds this tape's parameter gradients into an accumulator.
    pub fn accumulate_grads(&self, grads: &Gradients, into: &mut ParamGrads) {
        for (slot, id) in into.mats.iter_mut().zip(self.ids()) {
            if let Some(g) = grads.get(id) {
                slot.add_assign_scaled(g, 1.0);
            }
        }
    }
}

/// Graph convolution: `relu(Â · X · W + b)`.
pub fn gcn_forward(tape: &mut Tape, x: NodeId, adj: NodeId, w: NodeId, b: NodeId) -> Result<NodeId> {
    let ax = tape.matmul(adj, x)?;
    let axw = tape.matmul(ax, w)?;
    let pre = tape.add_row_broadcast(axw, b)?;
    tape.relu(pre)
}

/// One gated-recurrence step over per-node states.
pub fn gru_step(tape: &mut Tape, x: NodeId, h_prev: NodeId, p: &BoundParams) -> Result<NodeId> {
    let xh = tape.concat_cols(x, h_prev)?;
    let z_lin = tape.matmul(xh, p.w_update)?;
    let z_pre = tape.add_row_broadcast(z_lin, p.b_update)?;
    let z = tape.sigmoid(z_pre)?;
    let r_lin = tape.matmul(xh, p.w_reset)?;
    let r_pre = tape.add_row_broadcast(r_lin, p.b_reset)?;
    let r = tape.sigmoid(r_pre)?;
    let rh = tape.hadamard(r, h_prev)?;
    let xrh = tape.concat_cols(x, rh)?;
    let c_lin = tape.matmul(xrh, p.w_cand)?;
    let c_pre = tape.add_row_broadcast(c_lin, p.b_cand)?;
    let cand = tape.tanh(c_pre)?;
    let keep = tape.hadamard(z, h_prev)?;
    let one_minus_z = tape.affine_scalar(z, -1.0, 1.0)?;
    let update = tape.hadamard(one_minus_z, cand)?;
    tape.add(keep, update)
}

/// Attention over the per-frame hidden states: softmax-weighted sum with
/// scores from the node-mean of each state.
pub fn temporal_attention(tape: &mut Tape, hs: &[NodeId], attn: NodeId) -> Result<NodeId> {
    if hs.is_empty() {
        return Err(Error::Contract("attention needs at least one frame".into()));
    }
    let mut scores = Vec::with_capacity(hs.len());
    for &h in hs {
        let m = tape.mean_rows(h)?;
        scores.push(tape.matmul(m, attn)?);
    }
    let col = tape.stack_rows(&scores)?;
    let alpha = tape.softmax_col(col)?;
    let mut context: Option<NodeId> = None;
    for (t, &h) in hs.iter().enumerate() {
        let weight = tape.row_select(alpha, t)?;
        let term = tape.scale_by_scalar(h, weight)?;
        context = Some(match context {
            None => term,
            Some(acc) => tape.add(acc, term)?,
        });
    }
    Ok(context.expect("hs is non-empty"))
}

/// Full forward pass for one window; returns the 1×1 logit node.
pub fn forward(
    tape: &mut Tape,
    bound: &BoundParams,
    adj: NodeId,
    frames: &[Mat],
) -> Result<NodeId> {
    if frames.is_empty() {
        return Err(Error::Contract("forward needs at least one frame".into()));
    }
    let n = frames[0].rows();
    let hidden = tape.value(bound.gcn_b).cols();
    let mut h = tape.constant(Mat::zeros(n, hidden))?;
    let mut hs = Vec::with_capacity(frames.len());
    for frame in frames {
        let x = tape.constant(frame.clone())?;
        let p = gcn_forward(tape, x, adj, bound.gcn_w, bound.gcn_b)?;
        h = gru_step(tape, p, h, bound)?;
        hs.push(h);
    }
    let context = temporal_attention(tape, &hs, bound.attn)?;
    let pooled = tape.mean_rows(context)?;
    let proj = tape.matmul(pooled, bound.head_w)?;
    tape.add(proj, bound.head_b)
}

/// Convenience inference: probability of the positive class for one
/// window.
pub fn predict(params: &ModelParams, adj: &Mat, frames: &[Mat]) -> Result<f64> {
    let mut tape = Tape::new();
    let bound = BoundParams::bind(&mut tape, params)?;
    let adj_id = tape.constant(adj.clone())?;
    let logit = forward(&mut tape, &bound, adj_id, frames)?;
    let prob = tape.sigmoid(logit)?;
    Ok(tape.value(prob).item())
}
