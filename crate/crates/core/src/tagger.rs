//! Node prediction: a linear-chain CRF over encoder outputs, decoded over
//! the whole document at once.
//!
//! The transition matrix has `L + 2` rows and columns; index `L` is the
//! virtual start state and `L + 1` the virtual stop state. Only
//! `start → y`, `y → y'` and `y → stop` entries take part in scoring.

use ndarray::{Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{decode_iob, encode_iob, Document, FlowGraph, IobLabel, NodeSpan, TagSequence};
use crate::metrics::{node_counts, Counts, Prf};
use crate::numeric::{
    fan_in_uniform, log_sum_exp, read_checkpoint, write_checkpoint, zeros, Encoder,
    EncoderConfig, Gradients, ParamId, ParamStore,
};

/// Emission projection and transition scores of a linear-chain CRF.
#[derive(Clone, Debug)]
pub struct CrfModel {
    pub label_count: usize,
    emission_weight: ParamId,
    emission_bias: ParamId,
    transitions: ParamId,
}

impl CrfModel {
    pub fn new(
        store: &mut ParamStore,
        input_dim: usize,
        label_count: usize,
        prefix: &str,
        rng: &mut impl Rng,
    ) -> Self {
        store.add(
            format!("{prefix}.emission.weight"),
            fan_in_uniform(label_count, input_dim, rng),
        );
        store.add(format!("{prefix}.emission.bias"), zeros(&[label_count]));
        store.add(
            format!("{prefix}.transitions"),
            zeros(&[label_count + 2, label_count + 2]),
        );
        Self::bind(store, label_count, prefix).expect("just registered")
    }

    pub fn bind(store: &ParamStore, label_count: usize, prefix: &str) -> Result<Self> {
        let id = |name: String| {
            store
                .id(&name)
                .ok_or_else(|| Error::Checkpoint(format!("missing parameter {name}")))
        };
        let model = CrfModel {
            label_count,
            emission_weight: id(format!("{prefix}.emission.weight"))?,
            emission_bias: id(format!("{prefix}.emission.bias"))?,
            transitions: id(format!("{prefix}.transitions"))?,
        };
        if store.matrix(model.transitions).dim() != (label_count + 2, label_count + 2)
            || store.vector(model.emission_bias).len() != label_count
        {
            return Err(Error::Checkpoint("CRF shape mismatch".into()));
        }
        Ok(model)
    }

    pub fn emissions(&self, store: &ParamStore, encoded: ArrayView2<f64>) -> Array2<f64> {
        encoded.dot(&store.matrix(self.emission_weight).t()) + store.vector(self.emission_bias)
    }

    pub fn transitions<'a>(&self, store: &'a ParamStore) -> ArrayView2<'a, f64> {
        store.matrix(self.transitions)
    }

    pub fn score_sequence(
        &self,
        store: &ParamStore,
        encoded: ArrayView2<f64>,
        labels: &[usize],
    ) -> Result<f64> {
        check_len(encoded.nrows(), labels.len())?;
        Ok(sequence_score(
            self.emissions(store, encoded).view(),
            self.transitions(store),
            labels,
        ))
    }

    pub fn log_partition(&self, store: &ParamStore, encoded: ArrayView2<f64>) -> f64 {
        log_partition(self.emissions(store, encoded).view(), self.transitions(store))
    }

    pub fn viterbi_decode(&self, store: &ParamStore, encoded: ArrayView2<f64>) -> (Vec<usize>, f64) {
        viterbi(self.emissions(store, encoded).view(), self.transitions(store))
    }

    /// Negative log-likelihood of `gold`. Accumulates parameter gradients
    /// into `grads` and returns the gradient with respect to `encoded`.
    pub fn nll_loss_and_grad(
        &self,
        store: &ParamStore,
        encoded: ArrayView2<f64>,
        gold: &[usize],
        grads: &mut Gradients,
    ) -> Result<(f64, Array2<f64>)> {
        check_len(encoded.nrows(), gold.len())?;
        let emissions = self.emissions(store, encoded);
        let (loss, d_emissions, d_transitions) =
            nll_with_gradient(emissions.view(), self.transitions(store), gold);
        grads
            .matrix_mut(self.emission_weight)
            .scaled_add(1.0, &d_emissions.t().dot(&encoded));
        grads
            .vector_mut(self.emission_bias)
            .scaled_add(1.0, &d_emissions.sum_axis(Axis(0)));
        grads
            .matrix_mut(self.transitions)
            .scaled_add(1.0, &d_transitions);
        let d_encoded = d_emissions.dot(&store.matrix(self.emission_weight));
        Ok((loss, d_encoded))
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

/// Emission plus transition score of one label sequence, including the
/// start and stop transitions.
pub fn sequence_score(emissions: ArrayView2<f64>, transitions: ArrayView2<f64>, labels: &[usize]) -> f64 {
    let l = emissions.ncols();
    let (start, stop) = (l, l + 1);
    let Some((&first, _)) = labels.split_first() else {
        return 0.0;
    };
    let mut score = transitions[[start, first]];
    for (t, &y) in labels.iter().enumerate() {
        score += emissions[[t, y]];
        if t > 0 {
            score += transitions[[labels[t - 1], y]];
        }
    }
    score + transitions[[*labels.last().unwrap(), stop]]
}

/// Forward log-scores `alpha[t][y]` of all prefixes ending in `y` at `t`.
fn forward(emissions: ArrayView2<f64>, transitions: ArrayView2<f64>) -> Array2<f64> {
    let (len, l) = emissions.dim();
    let mut alpha = Array2::zeros((len, l));
    for y in 0..l {
        alpha[[0, y]] = transitions[[l, y]] + emissions[[0, y]];
    }
    for t in 1..len {
        for y in 0..l {
            alpha[[t, y]] = emissions[[t, y]]
                + log_sum_exp((0..l).map(|p| alpha[[t - 1, p]] + transitions[[p, y]]));
        }
    }
    alpha
}

/// Backward log-scores `beta[t][y]` of all suffixes following `y` at `t`.
fn backward(emissions: ArrayView2<f64>, transitions: ArrayView2<f64>) -> Array2<f64> {
    let (len, l) = emissions.dim();
    let mut beta = Array2::zeros((len, l));
    for y in 0..l {
        beta[[len - 1, y]] = transitions[[y, l + 1]];
    }
    for t in (0..len - 1).rev() {
        for y in 0..l {
            beta[[t, y]] = log_sum_exp(
                (0..l).map(|n| transitions[[y, n]] + emissions[[t + 1, n]] + beta[[t + 1, n]]),
            );
        }
    }
    beta
}

/// Log of the sum of exponentiated scores over every label sequence.
pub fn log_partition(emissions: ArrayView2<f64>, transitions: ArrayView2<f64>) -> f64 {
    let l = emissions.ncols();
    if emissions.nrows() == 0 {
        return 0.0;
    }
    let alpha = forward(emissions, transitions);
    let last = alpha.nrows() - 1;
    log_sum_exp((0..l).map(|y| alpha[[last, y]] + transitions[[y, l + 1]]))
}

/// Highest-scoring label sequence and its score. Ties go to the lowest
/// label index, both for the final label and at every backpointer.
pub fn viterbi(emissions: ArrayView2<f64>, transitions: ArrayView2<f64>) -> (Vec<usize>, f64) {
    let (len, l) = emissions.dim();
    if len == 0 {
        return (Vec::new(), 0.0);
    }
    let mut best = Array2::<f64>::zeros((len, l));
    let mut back = Array2::<usize>::zeros((len, l));
    for y in 0..l {
        best[[0, y]] = transitions[[l, y]] + emissions[[0, y]];
    }
    for t in 1..len {
        for y in 0..l {
            let (arg, score) = argmax((0..l).map(|p| best[[t - 1, p]] + transitions[[p, y]]));
            best[[t, y]] = score + emissions[[t, y]];
            back[[t, y]] = arg;
        }
    }
    let (mut y, score) = argmax((0..l).map(|p| best[[len - 1, p]] + transitions[[p, l + 1]]));
    let mut path = vec![0; len];
    for t in (0..len).rev() {
        path[t] = y;
        y = back[[t, y]];
    }
    (path, score)
}

fn argmax(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// Loss `log Z − score(gold)` with gradients with respect to the emission
/// matrix and the transition matrix (expected minus observed counts).
pub fn nll_with_gradient(
    emissions: ArrayView2<f64>,
    transitions: ArrayView2<f64>,
    gold: &[usize],
) -> (f64, Array2<f64>, Array2<f64>) {
    let (len, l) = emissions.dim();
    let mut d_emissions = Array2::zeros((len, l));
    let mut d_transitions = Array2::zeros(transitions.raw_dim());
    if len == 0 {
        return (0.0, d_emissions, d_transitions);
    }
    let alpha = forward(emissions, transitions);
    let beta = backward(emissions, transitions);
    let log_z = log_sum_exp((0..l).map(|y| alpha[[len - 1, y]] + transitions[[y, l + 1]]));

    for t in 0..len {
        for y in 0..l {
            d_emissions[[t, y]] = (alpha[[t, y]] + beta[[t, y]] - log_z).exp();
        }
    }
    for y in 0..l {
        d_transitions[[l, y]] += d_emissions[[0, y]];
        d_transitions[[y, l + 1]] += d_emissions[[len - 1, y]];
    }
    for t in 1..len {
        for p in 0..l {
            for y in 0..l {
                d_transitions[[p, y]] += (alpha[[t - 1, p]]
                    + transitions[[p, y]]
                    + emissions[[t, y]]
                    + beta[[t, y]]
                    - log_z)
                    .exp();
            }
        }
    }

    d_transitions[[l, gold[0]]] -= 1.0;
    d_transitions[[gold[len - 1], l + 1]] -= 1.0;
    for (t, &y) in gold.iter().enumerate() {
        d_emissions[[t, y]] -= 1.0;
        if t > 0 {
            d_transitions[[gold[t - 1], y]] -= 1.0;
        }
    }
    let loss = log_z - sequence_score(emissions, transitions, gold);
    (loss, d_emissions, d_transitions)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeModelConfig {
    pub encoder: EncoderConfig,
}

/// Encoder plus CRF over the IOB inventory of [`IobLabel`].
#[derive(Clone, Debug)]
pub struct NodeTagger {
    pub config: NodeModelConfig,
    pub store: ParamStore,
    pub encoder: Encoder,
    pub crf: CrfModel,
}

const NODE_KIND: &str = "node";

#[derive(Serialize, Deserialize)]
struct NodeCheckpointHeader {
    kind: String,
    labels: Vec<String>,
    config: NodeModelConfig,
}

impl NodeTagger {
    pub fn new(config: NodeModelConfig, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let encoder = Encoder::new(&mut store, config.encoder.clone(), "encoder", &mut rng)?;
        let crf = CrfModel::new(
            &mut store,
            encoder.output_dim(),
            IobLabel::COUNT,
            "crf",
            &mut rng,
        );
        Ok(NodeTagger {
            config,
            store,
            encoder,
            crf,
        })
    }

    pub fn from_store(config: NodeModelConfig, store: ParamStore) -> Result<Self> {
        let encoder = Encoder::bind(&store, config.encoder.clone(), "encoder")?;
        let crf = CrfModel::bind(&store, IobLabel::COUNT, "crf")?;
        if store.matrix(crf.emission_weight).ncols() != encoder.output_dim() {
            return Err(Error::Checkpoint("emission width does not match encoder".into()));
        }
        Ok(NodeTagger {
            config,
            store,
            encoder,
            crf,
        })
    }

    pub fn encode(&self, doc: &Document) -> Array2<f64> {
        self.encoder.forward(&self.store, doc).output
    }

    pub fn viterbi_decode(&self, doc: &Document) -> TagSequence {
        let (path, _) = self.crf.viterbi_decode(&self.store, self.encode(doc).view());
        TagSequence::from_indices(&path).expect("inventory indices")
    }

    pub fn predict_nodes(&self, doc: &Document) -> Vec<NodeSpan> {
        decode_iob(&self.viterbi_decode(doc), doc).expect("decoded length matches")
    }

    pub fn loss_and_grad(&self, gold: &FlowGraph) -> Result<(f64, Gradients)> {
        let tags = encode_iob(&gold.nodes, &gold.document)?;
        let cache = self.encoder.forward(&self.store, &gold.document);
        let mut grads = self.store.zero_grads();
        let (loss, d_encoded) = self.crf.nll_loss_and_grad(
            &self.store,
            cache.output.view(),
            &tags.indices(),
            &mut grads,
        )?;
        self.encoder
            .backward(&self.store, &cache, d_encoded.view(), &mut grads);
        Ok((loss, grads))
    }

    /// Micro-averaged span P/R/F1 of predictions against gold nodes.
    pub fn evaluate(&self, graphs: &[FlowGraph]) -> Prf {
        let counts = graphs
            .par_iter()
            .map(|g| node_counts(&self.predict_nodes(&g.document), &g.nodes))
            .collect::<Vec<_>>()
            .into_iter()
            .fold(Counts::default(), |a, b| a + b);
        counts.prf()
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let header = NodeCheckpointHeader {
            kind: NODE_KIND.into(),
            labels: IobLabel::all().map(|l| l.to_string()).collect(),
            config: self.config.clone(),
        };
        let json = serde_json::to_string(&header).expect("header serializes");
        write_checkpoint(path, &json, &self.store)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let (json, store) = read_checkpoint(path)?;
        let header: NodeCheckpointHeader =
            serde_json::from_str(&json).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if header.kind != NODE_KIND {
            return Err(Error::Checkpoint(format!(
                "expected a node checkpoint, found {:?}",
                header.kind
            )));
        }
        let labels: Vec<String> = IobLabel::all().map(|l| l.to_string()).collect();
        if header.labels != labels {
            return Err(Error::Checkpoint("label inventory mismatch".into()));
        }
        Self::from_store(header.config, store)
    }
}

#[cfg(test)]
mod tests {
    use ndarray::{array, Array1, Array2};
    use rand::Rng;

    use super::*;
    use crate::numeric::finite_difference_check;

fn marginals(emissions: ArrayView2<f64>, transitions: ArrayView2<f64>) -> Array2<f64> {
    let alpha = forward(emissions, transitions);
    let beta = backward(emissions, transitions);
    let z = log_partition(emissions, transitions);
    (&alpha + &beta).mapv(|v| (v - z).exp())
}

fn row_sums(m: &Array2<f64>) -> Array1<f64> {
    m.sum_axis(Axis(1))
}

    fn random(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
        Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-2.0..2.0))
    }

    #[test]
    fn zero_parameters_score_zero() {
        let e = Array2::zeros((3, 4));
        let t = Array2::zeros((6, 6));
        assert_eq!(sequence_score(e.view(), t.view(), &[1, 3, 0]), 0.0);
    }

    #[test]
    fn single_token_score() {
        let e = array![[0.5, -1.0, 2.0]];
        let mut t = Array2::zeros((5, 5));
        t[[3, 2]] = 0.25;
        t[[2, 4]] = -0.5;
        assert_eq!(sequence_score(e.view(), t.view(), &[2]), 2.0 + 0.25 - 0.5);
    }

    #[test]
    fn hand_summed_four_tokens() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let e = random(&mut rng, 4, 3);
        let t = random(&mut rng, 5, 5);
        let y = [2, 0, 0, 1];
        let expected = t[[3, 2]]
            + e[[0, 2]]
            + t[[2, 0]]
            + e[[1, 0]]
            + t[[0, 0]]
            + e[[2, 0]]
            + t[[0, 1]]
            + e[[3, 1]]
            + t[[1, 4]];
        assert!((sequence_score(e.view(), t.view(), &y) - expected).abs() < 1e-12);
    }

    #[test]
    fn one_token_partition() {
        let e = array![[0.1, 0.7, -0.3]];
        let t = Array2::zeros((5, 5));
        let expected = (0.1f64.exp() + 0.7f64.exp() + (-0.3f64).exp()).ln();
        assert!((log_partition(e.view(), t.view()) - expected).abs() < 1e-12);
    }

    #[test]
    fn peaked_emissions_decode_per_token() {
        let e = array![[0.0, 9.0, 0.0], [9.0, 0.0, 0.0], [0.0, 0.0, 9.0]];
        let t = Array2::zeros((5, 5));
        let (path, score) = viterbi(e.view(), t.view());
        assert_eq!(path, vec![1, 0, 2]);
        assert_eq!(score, sequence_score(e.view(), t.view(), &path));
    }

    #[test]
    fn zero_model_ties_to_o() {
        let e = Array2::zeros((4, 21));
        let t = Array2::zeros((23, 23));
        assert_eq!(viterbi(e.view(), t.view()).0, vec![0; 4]);
    }

    #[test]
    fn partition_dominates_and_marginals_normalize() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let e = random(&mut rng, 6, 4);
        let t = random(&mut rng, 6, 6);
        let z = log_partition(e.view(), t.view());
        let (path, best) = viterbi(e.view(), t.view());
        assert!(z >= best);
        assert!(z >= sequence_score(e.view(), t.view(), &path));
        for s in row_sums(&marginals(e.view(), t.view())) {
            assert!((s - 1.0).abs() < 1e-10);
        }
    }

    /// Every label sequence of the given shape, in lexicographic order.
    fn all_sequences(len: usize, labels: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..labels).map(move |y| {
                        let mut q = p.clone();
                        q.push(y);
                        q
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn enumeration_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let (len, l) = (rng.gen_range(1..=6), rng.gen_range(1..=4));
            let e = random(&mut rng, len, l);
            let t = random(&mut rng, l + 2, l + 2);
            let scored: Vec<(Vec<usize>, f64)> = all_sequences(len, l)
                .into_iter()
                .map(|y| {
                    let s = sequence_score(e.view(), t.view(), &y);
                    (y, s)
                })
                .collect();
            let z = log_sum_exp(scored.iter().map(|(_, s)| *s));
            assert!((log_partition(e.view(), t.view()) - z).abs() < 1e-8);
            let best = scored.iter().map(|(_, s)| *s).fold(f64::NEG_INFINITY, f64::max);
            let (path, score) = viterbi(e.view(), t.view());
            assert!((score - best).abs() < 1e-9);
            assert!((sequence_score(e.view(), t.view(), &path) - best).abs() < 1e-9);
        }
    }

    #[test]
    fn single_label_loss_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let e = random(&mut rng, 5, 1);
        let t = random(&mut rng, 3, 3);
        let (loss, _, _) = nll_with_gradient(e.view(), t.view(), &[0; 5]);
        assert!(loss.abs() < 1e-12);
    }

    fn toy_setup(tokens: usize, labels: usize, seed: u64) -> (ParamStore, Encoder, CrfModel, Document, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let config = EncoderConfig {
            embedding_dim: 4,
            hidden_dim: 6,
            buckets: 13,
            lowercase: true,
        };
        let enc = Encoder::new(&mut store, config, "enc", &mut rng).unwrap();
        let crf = CrfModel::new(&mut store, 6, labels, "crf", &mut rng);
        // Non-zero transitions and biases so every block is exercised.
        for name in ["crf.transitions", "crf.emission.bias", "enc.forward.bias", "enc.backward.bias"] {
            let id = store.id(name).unwrap();
            store.get_mut(id).mapv_inplace(|_| rng.gen_range(-0.5..0.5));
        }
        let words: Vec<String> = (0..tokens).map(|i| format!("w{}", i % 4)).collect();
        let doc = Document::new("toy", "d", vec![words]).unwrap();
        let gold = (0..tokens).map(|_| rng.gen_range(0..labels)).collect();
        (store, enc, crf, doc, gold)
    }

    #[test]
    fn nll_gradient_matches_finite_differences() {
        let (store, enc, crf, doc, gold) = toy_setup(5, 3, 12);
        let loss_fn = |s: &ParamStore| {
            let cache = enc.forward(s, &doc);
            let mut grads = s.zero_grads();
            let (loss, d) = crf.nll_loss_and_grad(s, cache.output.view(), &gold, &mut grads)?;
            enc.backward(s, &cache, d.view(), &mut grads);
            Ok((loss, grads))
        };
        let (loss, _) = loss_fn(&store).unwrap();
        assert!(loss >= 0.0);
        let report = finite_difference_check(loss_fn, &store, 1e-5, 1e-4).unwrap();
        assert!(report.passed(), "{report:#?}");
    }

    #[test]
    fn untrained_tagger_predicts_nothing() {
        let mut tagger = NodeTagger::new(NodeModelConfig::default(), 0).unwrap();
        for p in tagger.store.values_mut() {
            p.fill(0.0);
        }
        let doc = Document::new("d", "x", vec![vec!["Cut".into(), "it".into()]]).unwrap();
        assert_eq!(tagger.viterbi_decode(&doc).to_string(), "O O");
        assert!(tagger.predict_nodes(&doc).is_empty());
    }
}
