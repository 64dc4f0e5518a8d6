//! Dense double-precision parameters, the document encoder, the
//! finite-difference gradient harness and the checkpoint format.

mod checkpoint;
mod encoder;
mod gradcheck;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use encoder::{encode_document, Encoder, EncoderCache, EncoderConfig};
pub use gradcheck::{finite_difference_check, BlockReport, GradCheckReport};

use ndarray::{ArrayD, ArrayView1, ArrayView2, ArrayView3, ArrayViewMut1, ArrayViewMut2, ArrayViewMut3, IxDyn};
use rand::distributions::{Distribution, Uniform};
use rand::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamId(usize);

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: ArrayD<f64>,
}

/// Named parameter arrays in registration order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamStore {
    params: Vec<Param>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a parameter. Panics on a duplicate name.
    pub fn add(&mut self, name: impl Into<String>, value: ArrayD<f64>) -> ParamId {
        let name = name.into();
        assert!(self.id(&name).is_none(), "duplicate parameter {name}");
        self.params.push(Param { name, value });
        ParamId(self.params.len() - 1)
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.params.iter().position(|p| p.name == name).map(ParamId)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.params[id.0].name
    }

    pub fn get(&self, id: ParamId) -> &ArrayD<f64> {
        &self.params[id.0].value
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut ArrayD<f64> {
        &mut self.params[id.0].value
    }

    pub fn vector(&self, id: ParamId) -> ArrayView1<'_, f64> {
        self.get(id).view().into_dimensionality().expect("rank-1 parameter")
    }

    pub fn matrix(&self, id: ParamId) -> ArrayView2<'_, f64> {
        self.get(id).view().into_dimensionality().expect("rank-2 parameter")
    }

    pub fn tensor3(&self, id: ParamId) -> ArrayView3<'_, f64> {
        self.get(id).view().into_dimensionality().expect("rank-3 parameter")
    }

    pub fn zero_grads(&self) -> Gradients {
        Gradients {
            blocks: self
                .params
                .iter()
                .map(|p| ArrayD::zeros(p.value.raw_dim()))
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.value.iter().all(|v| v.is_finite()))
    }

    pub fn parameter_count(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    pub(crate) fn values_mut(&mut self) -> impl Iterator<Item = &mut ArrayD<f64>> {
        self.params.iter_mut().map(|p| &mut p.value)
    }
}

/// Gradient buffers with the same layout as a [`ParamStore`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    blocks: Vec<ArrayD<f64>>,
}

impl Gradients {
    pub fn blocks(&self) -> &[ArrayD<f64>] {
        &self.blocks
    }

    pub fn get(&self, id: ParamId) -> &ArrayD<f64> {
        &self.blocks[id.0]
    }

    pub fn vector_mut(&mut self, id: ParamId) -> ArrayViewMut1<'_, f64> {
        self.blocks[id.0]
            .view_mut()
            .into_dimensionality()
            .expect("rank-1 parameter")
    }

    pub fn matrix_mut(&mut self, id: ParamId) -> ArrayViewMut2<'_, f64> {
        self.blocks[id.0]
            .view_mut()
            .into_dimensionality()
            .expect("rank-2 parameter")
    }

    pub fn tensor3_mut(&mut self, id: ParamId) -> ArrayViewMut3<'_, f64> {
        self.blocks[id.0]
            .view_mut()
            .into_dimensionality()
            .expect("rank-3 parameter")
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a += b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for b in &mut self.blocks {
            b.mapv_inplace(|v| v * factor);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.blocks.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

pub(crate) fn uniform(shape: &[usize], bound: f64, rng: &mut impl Rng) -> ArrayD<f64> {
    let dist = Uniform::new_inclusive(-bound, bound);
    ArrayD::from_shape_simple_fn(IxDyn(shape), || dist.sample(rng))
}

/// Uniform in ±1/√fan_in.
pub(crate) fn fan_in_uniform(rows: usize, cols: usize, rng: &mut impl Rng) -> ArrayD<f64> {
    uniform(&[rows, cols], 1.0 / (cols as f64).sqrt(), rng)
}

pub(crate) fn zeros(shape: &[usize]) -> ArrayD<f64> {
    ArrayD::zeros(IxDyn(shape))
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}
