use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{fan_in_uniform, fnv1a, uniform, zeros, Gradients, ParamId, ParamStore};
use crate::error::{Error, Result};
use crate::graph::Document;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderConfig {
    pub embedding_dim: usize,
    /// Output width; each direction of the recurrence carries half of it.
    pub hidden_dim: usize,
    pub buckets: usize,
    pub lowercase: bool,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            embedding_dim: 32,
            hidden_dim: 64,
            buckets: 4096,
            lowercase: true,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.embedding_dim == 0 || self.hidden_dim == 0 || self.buckets == 0 {
            return Err(Error::Config("encoder dimensions must be positive".into()));
        }
        if !self.hidden_dim.is_multiple_of(2) {
            return Err(Error::Config("encoder hidden_dim must be even".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
struct Recurrence {
    input: ParamId,
    hidden: ParamId,
    bias: ParamId,
}

/// Hashed word embeddings followed by a bidirectional tanh recurrence.
/// Row `t` of the output is `[forward_t; backward_t]`.
#[derive(Clone, Debug)]
pub struct Encoder {
    pub config: EncoderConfig,
    embedding: ParamId,
    forward: Recurrence,
    backward: Recurrence,
}

/// Activations kept from the forward pass for backpropagation.
#[derive(Clone, Debug)]
pub struct EncoderCache {
    pub buckets: Vec<usize>,
    pub inputs: Array2<f64>,
    pub forward: Array2<f64>,
    pub backward: Array2<f64>,
    pub output: Array2<f64>,
}

impl Encoder {
    pub fn new(
        store: &mut ParamStore,
        config: EncoderConfig,
        prefix: &str,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        config.validate()?;
        let e = config.embedding_dim;
        let h = config.hidden_dim / 2;
        store.add(
            format!("{prefix}.embedding"),
            uniform(&[config.buckets, e], 0.1, rng),
        );
        for dir in ["forward", "backward"] {
            store.add(format!("{prefix}.{dir}.input"), fan_in_uniform(h, e, rng));
            store.add(format!("{prefix}.{dir}.hidden"), fan_in_uniform(h, h, rng));
            store.add(format!("{prefix}.{dir}.bias"), zeros(&[h]));
        }
        Self::bind(store, config, prefix)
    }

    /// Looks up the parameters of an encoder already present in `store`.
    pub fn bind(store: &ParamStore, config: EncoderConfig, prefix: &str) -> Result<Self> {
        config.validate()?;
        let id = |name: String| {
            store
                .id(&name)
                .ok_or_else(|| Error::Checkpoint(format!("missing parameter {name}")))
        };
        let rec = |dir: &str| -> Result<Recurrence> {
            Ok(Recurrence {
                input: id(format!("{prefix}.{dir}.input"))?,
                hidden: id(format!("{prefix}.{dir}.hidden"))?,
                bias: id(format!("{prefix}.{dir}.bias"))?,
            })
        };
        let encoder = Encoder {
            embedding: id(format!("{prefix}.embedding"))?,
            forward: rec("forward")?,
            backward: rec("backward")?,
            config,
        };
        let e = encoder.config.embedding_dim;
        let h = encoder.config.hidden_dim / 2;
        let expect = [
            (encoder.embedding, vec![encoder.config.buckets, e]),
            (encoder.forward.input, vec![h, e]),
            (encoder.forward.hidden, vec![h, h]),
            (encoder.forward.bias, vec![h]),
            (encoder.backward.input, vec![h, e]),
            (encoder.backward.hidden, vec![h, h]),
            (encoder.backward.bias, vec![h]),
        ];
        for (pid, shape) in expect {
            if store.get(pid).shape() != shape.as_slice() {
                return Err(Error::Checkpoint(format!(
                    "parameter {} has shape {:?}, expected {shape:?}",
                    store.name(pid),
                    store.get(pid).shape()
                )));
            }
        }
        Ok(encoder)
    }

    pub fn output_dim(&self) -> usize {
        self.config.hidden_dim
    }

    pub fn bucket(&self, text: &str) -> usize {
        let h = if self.config.lowercase {
            fnv1a(text.to_lowercase().as_bytes())
        } else {
            fnv1a(text.as_bytes())
        };
        (h % self.config.buckets as u64) as usize
    }

    pub fn forward(&self, store: &ParamStore, doc: &Document) -> EncoderCache {
        let buckets: Vec<usize> = doc.tokens().map(|t| self.bucket(&t.text)).collect();
        let table = store.matrix(self.embedding);
        let mut inputs = Array2::zeros((buckets.len(), self.config.embedding_dim));
        for (mut row, &b) in inputs.rows_mut().into_iter().zip(&buckets) {
            row.assign(&table.row(b));
        }
        let forward = run_recurrence(store, &self.forward, inputs.view(), false);
        let backward = run_recurrence(store, &self.backward, inputs.view(), true);
        let output = ndarray::concatenate(Axis(1), &[forward.view(), backward.view()])
            .expect("equal row counts");
        EncoderCache {
            buckets,
            inputs,
            forward,
            backward,
            output,
        }
    }

    /// Accumulates parameter gradients given the gradient of the loss with
    /// respect to the encoder output.
    pub fn backward(
        &self,
        store: &ParamStore,
        cache: &EncoderCache,
        d_output: ArrayView2<f64>,
        grads: &mut Gradients,
    ) {
        let h = self.config.hidden_dim / 2;
        let mut d_inputs = Array2::zeros(cache.inputs.raw_dim());
        backprop_recurrence(
            store,
            &self.forward,
            cache.inputs.view(),
            cache.forward.view(),
            d_output.slice(s![.., ..h]),
            false,
            &mut d_inputs,
            grads,
        );
        backprop_recurrence(
            store,
            &self.backward,
            cache.inputs.view(),
            cache.backward.view(),
            d_output.slice(s![.., h..]),
            true,
            &mut d_inputs,
            grads,
        );
        let mut d_table = grads.matrix_mut(self.embedding);
        for (row, &b) in d_inputs.rows().into_iter().zip(&cache.buckets) {
            let mut target = d_table.row_mut(b);
            target += &row;
        }
    }
}

fn time_order(len: usize, reverse: bool) -> Box<dyn Iterator<Item = usize>> {
    if reverse {
        Box::new((0..len).rev())
    } else {
        Box::new(0..len)
    }
}

fn run_recurrence(
    store: &ParamStore,
    rec: &Recurrence,
    inputs: ArrayView2<f64>,
    reverse: bool,
) -> Array2<f64> {
    let wx = store.matrix(rec.input);
    let wh = store.matrix(rec.hidden);
    let b = store.vector(rec.bias);
    let len = inputs.nrows();
    let mut states = Array2::zeros((len, wh.nrows()));
    let mut prev = Array1::zeros(wh.nrows());
    for t in time_order(len, reverse) {
        let pre = wx.dot(&inputs.row(t)) + wh.dot(&prev) + b;
        let state = pre.mapv(f64::tanh);
        states.row_mut(t).assign(&state);
        prev = state;
    }
    states
}

#[allow(clippy::too_many_arguments)]
fn backprop_recurrence(
    store: &ParamStore,
    rec: &Recurrence,
    inputs: ArrayView2<f64>,
    states: ArrayView2<f64>,
    d_states: ArrayView2<f64>,
    reverse: bool,
    d_inputs: &mut Array2<f64>,
    grads: &mut Gradients,
) {
    let wx = store.matrix(rec.input);
    let wh = store.matrix(rec.hidden);
    let len = inputs.nrows();
    let h = wh.nrows();
    let mut d_wx = Array2::<f64>::zeros(wx.raw_dim());
    let mut d_wh = Array2::<f64>::zeros(wh.raw_dim());
    let mut d_b = Array1::<f64>::zeros(h);
    let mut carry = Array1::<f64>::zeros(h);
    let zero = Array1::<f64>::zeros(h);
    // Visit time steps in the opposite order of the forward recurrence.
    for t in time_order(len, !reverse) {
        let state = states.row(t);
        let d_state = &d_states.row(t) + &carry;
        let d_pre: Array1<f64> = &d_state * &state.mapv(|s| 1.0 - s * s);
        let prev: ArrayView1<f64> = match (reverse, t) {
            (false, 0) => zero.view(),
            (false, t) => states.row(t - 1),
            (true, t) if t + 1 == len => zero.view(),
            (true, t) => states.row(t + 1),
        };
        outer_add(&mut d_wx, d_pre.view(), inputs.row(t));
        outer_add(&mut d_wh, d_pre.view(), prev);
        d_b += &d_pre;
        let mut d_in = d_inputs.row_mut(t);
        d_in += &wx.t().dot(&d_pre);
        carry = wh.t().dot(&d_pre);
    }
    grads.matrix_mut(rec.input).scaled_add(1.0, &d_wx);
    grads.matrix_mut(rec.hidden).scaled_add(1.0, &d_wh);
    grads.vector_mut(rec.bias).scaled_add(1.0, &d_b);
}

pub(crate) fn outer_add(target: &mut Array2<f64>, left: ArrayView1<f64>, right: ArrayView1<f64>) {
    for (mut row, &l) in target.rows_mut().into_iter().zip(left.iter()) {
        if l != 0.0 {
            row.scaled_add(l, &right);
        }
    }
}

/// Contextual vectors for every token of `doc`, one row per token.
pub fn encode_document(encoder: &Encoder, store: &ParamStore, doc: &Document) -> Array2<f64> {
    encoder.forward(store, doc).output
}
