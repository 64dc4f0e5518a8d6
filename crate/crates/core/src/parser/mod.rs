//! Edge prediction: biaffine arc and label scoring over pooled node spans,
//! arborescence decoding and the weighted joint loss.

mod cle;

pub use cle::{
    arborescence_score, assign_labels, cle_decode, decode_labeled, is_arborescence, Head, NEG_INF,
};

use std::collections::HashMap;
use std::path::Path;

use ndarray::{s, Array1, Array2, Array3, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Document, Edge, EdgeLabel, FlowGraph, NodeSpan};
use crate::metrics::{edge_counts, Counts, Prf};
use crate::numeric::{
    fan_in_uniform, log_sum_exp, read_checkpoint, uniform, write_checkpoint, zeros, Encoder,
    EncoderConfig, Gradients, ParamId, ParamStore,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BiaffineConfig {
    pub arc_dim: usize,
    pub label_dim: usize,
    /// Relative positions beyond this many nodes share a distance bias.
    pub distance_clip: usize,
}

impl Default for BiaffineConfig {
    fn default() -> Self {
        BiaffineConfig {
            arc_dim: 32,
            label_dim: 32,
            distance_clip: 8,
        }
    }
}

impl BiaffineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.arc_dim == 0 || self.label_dim == 0 {
            return Err(Error::Config("biaffine dimensions must be positive".into()));
        }
        Ok(())
    }

    fn distance_buckets(&self) -> usize {
        2 * self.distance_clip + 2
    }
}

/// Weight of the edge loss against the label loss.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossWeights {
    pub lambda: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights { lambda: 0.5 }
    }
}

impl LossWeights {
    pub fn new(lambda: f64) -> Result<Self> {
        let w = LossWeights { lambda };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Config(format!("lambda {} outside [0, 1]", self.lambda)));
        }
        Ok(())
    }
}

/// Arc logits `arc[u][v]` of `u` flowing into `v` and label
/// log-probabilities `label[u][v][l]`, over the nodes plus ROOT at index
/// `n`. Labels are normalized per pair because their softmax only ever sees
/// gold arcs in training, which leaves each pair's raw offset arbitrary.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreTensor {
    pub arc: Array2<f64>,
    pub label: Array3<f64>,
}

impl ScoreTensor {
    pub fn node_count(&self) -> usize {
        self.arc.nrows() - 1
    }
}

#[derive(Clone, Copy, Debug)]
struct Projection {
    weight: ParamId,
    bias: ParamId,
}

impl Projection {
    fn new(store: &mut ParamStore, name: &str, out: usize, input: usize, rng: &mut impl Rng) -> Self {
        Projection {
            weight: store.add(format!("{name}.weight"), fan_in_uniform(out, input, rng)),
            bias: store.add(format!("{name}.bias"), zeros(&[out])),
        }
    }

    fn bind(store: &ParamStore, name: &str) -> Result<Self> {
        Ok(Projection {
            weight: param(store, &format!("{name}.weight"))?,
            bias: param(store, &format!("{name}.bias"))?,
        })
    }

    fn apply(&self, store: &ParamStore, x: ArrayView2<f64>) -> Array2<f64> {
        (x.dot(&store.matrix(self.weight).t()) + store.vector(self.bias)).mapv(f64::tanh)
    }

    /// Backpropagates through `tanh(xWᵀ + b)` and returns the input gradient.
    fn backward(
        &self,
        store: &ParamStore,
        x: ArrayView2<f64>,
        y: &Array2<f64>,
        dy: &Array2<f64>,
        grads: &mut Gradients,
    ) -> Array2<f64> {
        let dz = dy * &y.mapv(|v| 1.0 - v * v);
        grads.matrix_mut(self.weight).scaled_add(1.0, &dz.t().dot(&x));
        grads.vector_mut(self.bias).scaled_add(1.0, &dz.sum_axis(Axis(0)));
        dz.dot(&store.matrix(self.weight))
    }
}

fn param(store: &ParamStore, name: &str) -> Result<ParamId> {
    store
        .id(name)
        .ok_or_else(|| Error::Checkpoint(format!("missing parameter {name}")))
}

/// Separate arc and label modules over pooled node vectors.
#[derive(Clone, Debug)]
pub struct BiaffineModel {
    pub config: BiaffineConfig,
    arc_dep: Projection,
    arc_head: Projection,
    root_head: ParamId,
    arc_bilinear: ParamId,
    arc_head_bias: ParamId,
    distance_bias: ParamId,
    label_dep: Projection,
    label_head: Projection,
    label_bilinear: ParamId,
    label_linear: ParamId,
    label_bias: ParamId,
}

/// Forward activations kept for the backward pass.
struct Activations {
    pooled: Array2<f64>,
    arc_dep: Array2<f64>,
    /// Head vectors of the nodes followed by ROOT.
    arc_head: Array2<f64>,
    label_dep: Array2<f64>,
    label_head: Array2<f64>,
    buckets: Array2<usize>,
}

impl BiaffineModel {
    pub fn new(
        store: &mut ParamStore,
        config: BiaffineConfig,
        input_dim: usize,
        prefix: &str,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        config.validate()?;
        let (a, d, k) = (config.arc_dim, config.label_dim, EdgeLabel::COUNT);
        Projection::new(store, &format!("{prefix}.arc.dep"), a, input_dim, rng);
        Projection::new(store, &format!("{prefix}.arc.head"), a, input_dim, rng);
        store.add(format!("{prefix}.arc.root"), uniform(&[a], 0.1, rng));
        store.add(format!("{prefix}.arc.bilinear"), fan_in_uniform(a, a, rng));
        store.add(format!("{prefix}.arc.head_bias"), zeros(&[a]));
        store.add(format!("{prefix}.arc.distance"), zeros(&[config.distance_buckets()]));
        Projection::new(store, &format!("{prefix}.label.dep"), d, input_dim, rng);
        Projection::new(store, &format!("{prefix}.label.head"), d, input_dim, rng);
        let bound = 1.0 / (d as f64).sqrt();
        store.add(format!("{prefix}.label.bilinear"), uniform(&[k, d, d], bound, rng));
        store.add(format!("{prefix}.label.linear"), fan_in_uniform(k, 2 * d, rng));
        store.add(format!("{prefix}.label.bias"), zeros(&[k]));
        Self::bind(store, config, prefix)
    }

    pub fn bind(store: &ParamStore, config: BiaffineConfig, prefix: &str) -> Result<Self> {
        let p = |n: &str| param(store, &format!("{prefix}.{n}"));
        let model = BiaffineModel {
            arc_dep: Projection::bind(store, &format!("{prefix}.arc.dep"))?,
            arc_head: Projection::bind(store, &format!("{prefix}.arc.head"))?,
            root_head: p("arc.root")?,
            arc_bilinear: p("arc.bilinear")?,
            arc_head_bias: p("arc.head_bias")?,
            distance_bias: p("arc.distance")?,
            label_dep: Projection::bind(store, &format!("{prefix}.label.dep"))?,
            label_head: Projection::bind(store, &format!("{prefix}.label.head"))?,
            label_bilinear: p("label.bilinear")?,
            label_linear: p("label.linear")?,
            label_bias: p("label.bias")?,
            config,
        };
        let (a, d) = (model.config.arc_dim, model.config.label_dim);
        let ok = store.matrix(model.arc_bilinear).dim() == (a, a)
            && store.tensor3(model.label_bilinear).dim() == (EdgeLabel::COUNT, d, d)
            && store.vector(model.distance_bias).len() == model.config.distance_buckets();
        if !ok {
            return Err(Error::Checkpoint("biaffine shape mismatch".into()));
        }
        Ok(model)
    }

    pub fn input_dim(&self, store: &ParamStore) -> usize {
        store.matrix(self.arc_dep.weight).ncols()
    }

    /// Distance bucket of every (node, destination) pair. Nodes are ranked
    /// by span start, so the buckets do not depend on list order.
    fn buckets(&self, nodes: &[NodeSpan]) -> Array2<usize> {
        let n = nodes.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (nodes[i].start, nodes[i].node_id));
        let mut rank = vec![0i64; n];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r as i64;
        }
        let k = self.config.distance_clip as i64;
        Array2::from_shape_fn((n, n + 1), |(u, v)| {
            if v == n {
                (2 * k + 1) as usize
            } else {
                ((rank[v] - rank[u]).clamp(-k, k) + k) as usize
            }
        })
    }

    fn activations(&self, store: &ParamStore, encoded: ArrayView2<f64>, nodes: &[NodeSpan]) -> Result<Activations> {
        if nodes.is_empty() {
            return Err(Error::NoNodes);
        }
        let width = encoded.ncols();
        let mut pooled = Array2::zeros((nodes.len(), width));
        for (i, node) in nodes.iter().enumerate() {
            if node.end >= encoded.nrows() || node.start > node.end {
                return Err(Error::InvalidSpan {
                    node: node.node_id,
                    reason: "outside the encoded document",
                });
            }
            let rows = encoded.slice(s![node.start..=node.end, ..]);
            pooled.row_mut(i).assign(&rows.mean_axis(Axis(0)).expect("non-empty span"));
        }
        let arc_dep = self.arc_dep.apply(store, pooled.view());
        let mut arc_head = Array2::zeros((nodes.len() + 1, self.config.arc_dim));
        arc_head
            .slice_mut(s![..nodes.len(), ..])
            .assign(&self.arc_head.apply(store, pooled.view()));
        arc_head.row_mut(nodes.len()).assign(&store.vector(self.root_head));
        Ok(Activations {
            arc_dep,
            arc_head,
            label_dep: self.label_dep.apply(store, pooled.view()),
            label_head: self.label_head.apply(store, pooled.view()),
            buckets: self.buckets(nodes),
            pooled,
        })
    }

    /// Raw arc scores (n × (n+1)) without masking.
    fn arc_logits(&self, store: &ParamStore, act: &Activations) -> Array2<f64> {
        let u = store.matrix(self.arc_bilinear);
        let w = store.vector(self.arc_head_bias);
        let dist = store.vector(self.distance_bias);
        let mut logits = act.arc_dep.dot(&u).dot(&act.arc_head.t());
        let head_term = act.arc_head.dot(&w);
        for ((i, j), v) in logits.indexed_iter_mut() {
            *v += head_term[j] + dist[act.buckets[[i, j]]];
        }
        logits
    }

    /// Label scores for one (node, destination node) pair.
    fn label_logits(&self, store: &ParamStore, dep: ArrayView1<f64>, head: ArrayView1<f64>) -> Array1<f64> {
        let d = self.config.label_dim;
        let bilinear = store.tensor3(self.label_bilinear);
        let linear = store.matrix(self.label_linear);
        let bias = store.vector(self.label_bias);
        Array1::from_shape_fn(EdgeLabel::COUNT, |l| {
            bilinear.index_axis(Axis(0), l).dot(&head).dot(&dep)
                + linear.slice(s![l, ..d]).dot(&dep)
                + linear.slice(s![l, d..]).dot(&head)
                + bias[l]
        })
    }

    pub fn score_arcs(&self, store: &ParamStore, encoded: ArrayView2<f64>, nodes: &[NodeSpan]) -> Result<ScoreTensor> {
        let act = self.activations(store, encoded, nodes)?;
        let n = nodes.len();
        let logits = self.arc_logits(store, &act);
        let mut arc = Array2::from_elem((n + 1, n + 1), NEG_INF);
        arc.slice_mut(s![..n, ..]).assign(&logits);
        for u in 0..n {
            arc[[u, u]] = NEG_INF;
        }
        let mut label = Array3::from_elem((n + 1, n + 1, EdgeLabel::COUNT), NEG_INF);
        for u in 0..n {
            label.slice_mut(s![u, n, ..]).fill(0.0);
            for v in (0..n).filter(|&v| v != u) {
                let l = self.label_logits(store, act.label_dep.row(u), act.label_head.row(v));
                let norm = log_sum_exp(l.iter().copied());
                label.slice_mut(s![u, v, ..]).assign(&l.mapv(|x| x - norm));
            }
        }
        Ok(ScoreTensor { arc, label })
    }

    /// Weighted joint loss against a complete gold graph whose node list is
    /// `gold.nodes`. Returns the loss and the gradient for `encoded`.
    pub fn joint_loss_and_grad(
        &self,
        store: &ParamStore,
        encoded: ArrayView2<f64>,
        gold: &FlowGraph,
        weights: LossWeights,
        grads: &mut Gradients,
    ) -> Result<(f64, Array2<f64>)> {
        weights.validate()?;
        let n = gold.nodes.len();
        let (heads, labeled) = gold_structure(gold)?;
        let act = self.activations(store, encoded, &gold.nodes)?;
        let lambda = weights.lambda;

        // Edge loss: softmax over every destination except the node itself.
        let logits = self.arc_logits(store, &act);
        let mut d_logits = Array2::zeros((n, n + 1));
        let mut edge_loss = 0.0;
        for u in 0..n {
            let row = logits.row(u);
            let max = (0..=n).filter(|&v| v != u).map(|v| row[v]).fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = (0..=n).filter(|&v| v != u).map(|v| (row[v] - max).exp()).sum();
            let log_z = max + z.ln();
            edge_loss += log_z - row[heads[u]];
            for v in (0..=n).filter(|&v| v != u) {
                let p = (row[v] - log_z).exp();
                let target = if v == heads[u] { 1.0 } else { 0.0 };
                d_logits[[u, v]] = lambda * (p - target) / n as f64;
            }
        }
        edge_loss /= n as f64;

        let mut d_arc_dep = Array2::zeros(act.arc_dep.raw_dim());
        let mut d_arc_head = Array2::zeros(act.arc_head.raw_dim());
        if lambda != 0.0 {
            let u = store.matrix(self.arc_bilinear);
            let w = store.vector(self.arc_head_bias);
            grads
                .matrix_mut(self.arc_bilinear)
                .scaled_add(1.0, &act.arc_dep.t().dot(&d_logits).dot(&act.arc_head));
            let col = d_logits.sum_axis(Axis(0));
            grads
                .vector_mut(self.arc_head_bias)
                .scaled_add(1.0, &act.arc_head.t().dot(&col));
            {
                let mut dist = grads.vector_mut(self.distance_bias);
                for ((i, j), g) in d_logits.indexed_iter() {
                    dist[act.buckets[[i, j]]] += g;
                }
            }
            d_arc_dep = d_logits.dot(&act.arc_head).dot(&u.t());
            d_arc_head = d_logits.t().dot(&act.arc_dep.dot(&u));
            for (mut row, c) in d_arc_head.outer_iter_mut().zip(col.iter()) {
                row.scaled_add(*c, &w);
            }
            grads
                .vector_mut(self.root_head)
                .scaled_add(1.0, &d_arc_head.row(n));
        }

        // Label loss: softmax over labels of every gold edge.
        let d = self.config.label_dim;
        let mut d_label_dep = Array2::zeros(act.label_dep.raw_dim());
        let mut d_label_head = Array2::zeros(act.label_head.raw_dim());
        let mut label_loss = 0.0;
        if !labeled.is_empty() {
            let scale = (1.0 - lambda) / labeled.len() as f64;
            let bilinear = store.tensor3(self.label_bilinear);
            let linear = store.matrix(self.label_linear);
            for &(u, v, gold_label) in &labeled {
                let (dep, head) = (act.label_dep.row(u), act.label_head.row(v));
                let logits = self.label_logits(store, dep, head);
                let max = logits.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                let log_z = max + logits.mapv(|x| (x - max).exp()).sum().ln();
                label_loss += log_z - logits[gold_label];
                if scale == 0.0 {
                    continue;
                }
                for l in 0..EdgeLabel::COUNT {
                    let target = if l == gold_label { 1.0 } else { 0.0 };
                    let g = scale * ((logits[l] - log_z).exp() - target);
                    let ul = bilinear.index_axis(Axis(0), l);
                    let dep_col = dep.insert_axis(Axis(1));
                    let head_row = head.insert_axis(Axis(0));
                    grads
                        .tensor3_mut(self.label_bilinear)
                        .index_axis_mut(Axis(0), l)
                        .scaled_add(g, &dep_col.dot(&head_row));
                    {
                        let mut lin = grads.matrix_mut(self.label_linear);
                        lin.slice_mut(s![l, ..d]).scaled_add(g, &dep);
                        lin.slice_mut(s![l, d..]).scaled_add(g, &head);
                    }
                    grads.vector_mut(self.label_bias)[l] += g;
                    d_label_dep
                        .row_mut(u)
                        .scaled_add(g, &(ul.dot(&head) + linear.slice(s![l, ..d])));
                    d_label_head
                        .row_mut(v)
                        .scaled_add(g, &(ul.t().dot(&dep) + linear.slice(s![l, d..])));
                }
            }
            label_loss /= labeled.len() as f64;
        }

        let pooled = act.pooled.view();
        let node_heads = act.arc_head.slice(s![..n, ..]).to_owned();
        let d_node_heads = d_arc_head.slice(s![..n, ..]).to_owned();
        let mut d_pooled = self.arc_dep.backward(store, pooled, &act.arc_dep, &d_arc_dep, grads);
        d_pooled += &self.arc_head.backward(store, pooled, &node_heads, &d_node_heads, grads);
        d_pooled += &self.label_dep.backward(store, pooled, &act.label_dep, &d_label_dep, grads);
        d_pooled += &self.label_head.backward(store, pooled, &act.label_head, &d_label_head, grads);

        let mut d_encoded = Array2::zeros(encoded.raw_dim());
        for (i, node) in gold.nodes.iter().enumerate() {
            let share = d_pooled.row(i).mapv(|g| g / node.len() as f64);
            for t in node.start..=node.end {
                d_encoded.row_mut(t).scaled_add(1.0, &share);
            }
        }
        let total = lambda * edge_loss + (1.0 - lambda) * label_loss;
        Ok((total, d_encoded))
    }
}

/// Gold destination (position, or `n` for ROOT) of every node, and the
/// labeled gold edges as position pairs.
fn gold_structure(gold: &FlowGraph) -> Result<(Vec<usize>, Vec<(usize, usize, usize)>)> {
    let report = gold.validate();
    if let Some(v) = report.violations.first() {
        return Err(Error::IncompleteGold(format!("{}: {v}", gold.document.id)));
    }
    if !report.is_complete() {
        return Err(Error::IncompleteGold(format!(
            "{} has more than one sink",
            gold.document.id
        )));
    }
    let n = gold.nodes.len();
    let position: HashMap<usize, usize> = gold
        .nodes
        .iter()
        .enumerate()
        .map(|(i, node)| (node.node_id, i))
        .collect();
    let mut heads = vec![n; n];
    let mut labeled = Vec::with_capacity(gold.edges.len());
    for e in &gold.edges {
        let (u, v) = (position[&e.src], position[&e.dst]);
        heads[u] = v;
        labeled.push((u, v, e.label.index()));
    }
    Ok((heads, labeled))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeModelConfig {
    #[serde(default)]
    pub encoder: EncoderConfig,
    #[serde(default)]
    pub biaffine: BiaffineConfig,
    #[serde(default)]
    pub loss: LossWeights,
}

/// Encoder plus biaffine scorer, decoded by maximum spanning arborescence.
#[derive(Clone, Debug)]
pub struct EdgeParser {
    pub config: EdgeModelConfig,
    pub store: ParamStore,
    pub encoder: Encoder,
    pub scorer: BiaffineModel,
}

const EDGE_KIND: &str = "edge";

#[derive(Serialize, Deserialize)]
struct EdgeCheckpointHeader {
    kind: String,
    labels: Vec<String>,
    config: EdgeModelConfig,
}

impl EdgeParser {
    pub fn new(config: EdgeModelConfig, seed: u64) -> Result<Self> {
        config.loss.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let encoder = Encoder::new(&mut store, config.encoder.clone(), "encoder", &mut rng)?;
        let scorer = BiaffineModel::new(
            &mut store,
            config.biaffine.clone(),
            encoder.output_dim(),
            "biaffine",
            &mut rng,
        )?;
        Ok(EdgeParser {
            config,
            store,
            encoder,
            scorer,
        })
    }

    pub fn from_store(config: EdgeModelConfig, store: ParamStore) -> Result<Self> {
        config.loss.validate()?;
        let encoder = Encoder::bind(&store, config.encoder.clone(), "encoder")?;
        let scorer = BiaffineModel::bind(&store, config.biaffine.clone(), "biaffine")?;
        if scorer.input_dim(&store) != encoder.output_dim() {
            return Err(Error::Checkpoint("scorer width does not match encoder".into()));
        }
        Ok(EdgeParser {
            config,
            store,
            encoder,
            scorer,
        })
    }

    pub fn scores(&self, doc: &Document, nodes: &[NodeSpan]) -> Result<ScoreTensor> {
        let encoded = self.encoder.forward(&self.store, doc).output;
        self.scorer.score_arcs(&self.store, encoded.view(), nodes)
    }

    /// Decoded edges, with endpoints given as the nodes' ids.
    pub fn predict_edges(&self, doc: &Document, nodes: &[NodeSpan]) -> Result<Vec<Edge>> {
        let scores = self.scores(doc, nodes)?;
        let (_, edges) = decode_labeled(scores.arc.view(), scores.label.view())?;
        Ok(edges
            .into_iter()
            .map(|e| Edge::new(nodes[e.src].node_id, nodes[e.dst].node_id, e.label))
            .collect())
    }

    /// The input graph's nodes with predicted edges. Graphs without nodes
    /// come back without edges.
    pub fn predict_graph(&self, doc: &Document, nodes: Vec<NodeSpan>) -> Result<FlowGraph> {
        let edges = if nodes.is_empty() {
            Vec::new()
        } else {
            self.predict_edges(doc, &nodes)?
        };
        Ok(FlowGraph::new(doc.clone(), nodes, edges))
    }

    pub fn loss_and_grad(&self, gold: &FlowGraph) -> Result<(f64, Gradients)> {
        let cache = self.encoder.forward(&self.store, &gold.document);
        let mut grads = self.store.zero_grads();
        let (loss, d_encoded) = self.scorer.joint_loss_and_grad(
            &self.store,
            cache.output.view(),
            gold,
            self.config.loss,
            &mut grads,
        )?;
        self.encoder
            .backward(&self.store, &cache, d_encoded.view(), &mut grads);
        Ok((loss, grads))
    }

    /// Labeled-edge P/R/F1 with gold nodes.
    pub fn evaluate(&self, graphs: &[FlowGraph]) -> Result<Prf> {
        let counts = graphs
            .par_iter()
            .map(|g| {
                if g.nodes.is_empty() {
                    return Ok(Counts { gold: g.edges.len(), ..Counts::default() });
                }
                let predicted = self.predict_edges(&g.document, &g.nodes)?;
                edge_counts(&predicted, &g.edges, &g.nodes)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(counts.into_iter().sum::<Counts>().prf())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let header = EdgeCheckpointHeader {
            kind: EDGE_KIND.into(),
            labels: EdgeLabel::ALL.iter().map(|l| l.as_str().to_owned()).collect(),
            config: self.config.clone(),
        };
        let json = serde_json::to_string(&header).expect("header serializes");
        write_checkpoint(path, &json, &self.store)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let (json, store) = read_checkpoint(path)?;
        let header: EdgeCheckpointHeader =
            serde_json::from_str(&json).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if header.kind != EDGE_KIND {
            return Err(Error::Checkpoint(format!(
                "expected an edge checkpoint, found {:?}",
                header.kind
            )));
        }
        let labels: Vec<&str> = EdgeLabel::ALL.iter().map(|l| l.as_str()).collect();
        if header.labels != labels {
            return Err(Error::Checkpoint("edge label inventory mismatch".into()));
        }
        Self::from_store(header.config, store)
    }
}
