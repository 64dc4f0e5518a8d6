//! Precision, recall and F1 for nodes, labeled edges, pipeline tuples and
//! annotator agreement.
//!
//! Matching is exact and multiset-based: each gold item is matched at most
//! once. Corpus scores are micro-averaged by pooling counts before dividing.
//! When nothing is predicted, precision is 0; when nothing is gold, recall is
//! 0; in particular empty-versus-empty scores 0 everywhere.

use std::collections::{BTreeMap, HashMap};
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeLabel, FlowGraph, NodeSpan, Tag};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub true_positive: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl Counts {
    pub fn prf(self) -> Prf {
        let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        let precision = ratio(self.true_positive, self.predicted);
        let recall = ratio(self.true_positive, self.gold);
        // 2PR/(P+R) reduces to 2tp/(predicted+gold), which avoids rounding
        // the intermediate ratios.
        let f1 = if self.true_positive == 0 {
            0.0
        } else {
            ratio(2 * self.true_positive, self.predicted + self.gold)
        };
        Prf {
            precision,
            recall,
            f1,
            counts: self,
        }
    }
}

impl Add for Counts {
    type Output = Counts;
    fn add(self, o: Counts) -> Counts {
        Counts {
            true_positive: self.true_positive + o.true_positive,
            predicted: self.predicted + o.predicted,
            gold: self.gold + o.gold,
        }
    }
}

impl AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        *self = *self + o;
    }
}

impl Sum for Counts {
    fn sum<I: Iterator<Item = Counts>>(iter: I) -> Counts {
        iter.fold(Counts::default(), Add::add)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: Counts,
}

/// Counts for two multisets of comparable keys.
pub fn match_counts<K: Eq + std::hash::Hash>(
    predicted: impl IntoIterator<Item = K>,
    gold: impl IntoIterator<Item = K>,
) -> Counts {
    let mut remaining: HashMap<K, usize> = HashMap::new();
    let mut gold_count = 0;
    for k in gold {
        *remaining.entry(k).or_default() += 1;
        gold_count += 1;
    }
    let mut counts = Counts {
        gold: gold_count,
        ..Counts::default()
    };
    for k in predicted {
        counts.predicted += 1;
        if let Some(n) = remaining.get_mut(&k).filter(|n| **n > 0) {
            *n -= 1;
            counts.true_positive += 1;
        }
    }
    counts
}

fn span_key(n: &NodeSpan) -> (usize, usize, Tag) {
    (n.start, n.end, n.tag)
}

pub fn node_counts(predicted: &[NodeSpan], gold: &[NodeSpan]) -> Counts {
    match_counts(predicted.iter().map(span_key), gold.iter().map(span_key))
}

/// Exact `(start, end, tag)` matching.
pub fn node_f1(predicted: &[NodeSpan], gold: &[NodeSpan]) -> Prf {
    node_counts(predicted, gold).prf()
}

/// Node counts restricted to one tag on both sides.
pub fn tag_counts(predicted: &[NodeSpan], gold: &[NodeSpan]) -> BTreeMap<Tag, Counts> {
    Tag::ALL
        .iter()
        .map(|&tag| {
            let keep = |n: &&NodeSpan| n.tag == tag;
            let c = match_counts(
                predicted.iter().filter(keep).map(span_key),
                gold.iter().filter(keep).map(span_key),
            );
            (tag, c)
        })
        .collect()
}

type Span = (usize, usize);

fn lookup(nodes: &[NodeSpan], id: usize, edge: usize) -> Result<&NodeSpan> {
    nodes
        .iter()
        .find(|n| n.node_id == id)
        .ok_or(Error::DanglingEdge { edge })
}

fn edge_keys(edges: &[Edge], nodes: &[NodeSpan]) -> Result<Vec<(Span, Span, EdgeLabel)>> {
    edges
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let u = lookup(nodes, e.src, i)?;
            let v = lookup(nodes, e.dst, i)?;
            Ok(((u.start, u.end), (v.start, v.end), e.label))
        })
        .collect()
}

pub fn edge_counts(predicted: &[Edge], gold: &[Edge], nodes: &[NodeSpan]) -> Result<Counts> {
    Ok(match_counts(edge_keys(predicted, nodes)?, edge_keys(gold, nodes)?))
}

/// Labeled edges over a shared node inventory, matched on
/// `(source span, destination span, label)`.
pub fn edge_f1(predicted: &[Edge], gold: &[Edge], nodes: &[NodeSpan]) -> Result<Prf> {
    Ok(edge_counts(predicted, gold, nodes)?.prf())
}

/// An edge expanded with its endpoint spans and tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EvalTuple {
    pub u_span: Span,
    pub v_span: Span,
    pub label: EdgeLabel,
    pub n_u: Tag,
    pub n_v: Tag,
}

pub fn eval_tuples(g: &FlowGraph) -> Result<Vec<EvalTuple>> {
    g.edges
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let u = lookup(&g.nodes, e.src, i)?;
            let v = lookup(&g.nodes, e.dst, i)?;
            Ok(EvalTuple {
                u_span: (u.start, u.end),
                v_span: (v.start, v.end),
                label: e.label,
                n_u: u.tag,
                n_v: v.tag,
            })
        })
        .collect()
}

pub fn pipeline_counts(predicted: &FlowGraph, gold: &FlowGraph) -> Result<Counts> {
    Ok(match_counts(eval_tuples(predicted)?, eval_tuples(gold)?))
}

/// Tuple F1 for a graph built on predicted nodes against the gold graph.
pub fn pipeline_f1(predicted: &FlowGraph, gold: &FlowGraph) -> Result<Prf> {
    Ok(pipeline_counts(predicted, gold)?.prf())
}

/// Pairs graphs by document id. Both sides must hold the same documents
/// with identical text.
pub fn align<'a>(
    predicted: &'a [FlowGraph],
    gold: &'a [FlowGraph],
) -> Result<Vec<(&'a FlowGraph, &'a FlowGraph)>> {
    let by_id: HashMap<&str, &FlowGraph> =
        predicted.iter().map(|g| (g.document.id.as_str(), g)).collect();
    if by_id.len() != predicted.len() {
        return Err(Error::DocumentMismatch("duplicate document id in predictions".into()));
    }
    if predicted.len() != gold.len() {
        return Err(Error::DocumentMismatch(format!(
            "{} predicted documents but {} gold documents",
            predicted.len(),
            gold.len()
        )));
    }
    gold.iter()
        .map(|g| {
            let p = by_id.get(g.document.id.as_str()).ok_or_else(|| {
                Error::DocumentMismatch(format!("no prediction for {}", g.document.id))
            })?;
            if p.document.step_texts() != g.document.step_texts() {
                return Err(Error::DocumentMismatch(format!(
                    "text of {} differs",
                    g.document.id
                )));
            }
            Ok((*p, g))
        })
        .collect()
}

/// Per-document and pooled counts for one kind of comparison.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusScores {
    pub documents: Vec<(String, Counts)>,
    pub total: Counts,
}

impl CorpusScores {
    fn collect(pairs: &[(&FlowGraph, &FlowGraph)], f: impl Fn(&FlowGraph, &FlowGraph) -> Result<Counts>) -> Result<Self> {
        let documents = pairs
            .iter()
            .map(|(p, g)| Ok((g.document.id.clone(), f(p, g)?)))
            .collect::<Result<Vec<_>>>()?;
        let total = documents.iter().map(|(_, c)| *c).sum();
        Ok(CorpusScores { documents, total })
    }

    pub fn prf(&self) -> Prf {
        self.total.prf()
    }
}

pub fn corpus_node_scores(predicted: &[FlowGraph], gold: &[FlowGraph]) -> Result<CorpusScores> {
    CorpusScores::collect(&align(predicted, gold)?, |p, g| Ok(node_counts(&p.nodes, &g.nodes)))
}

/// Edge scores where predictions were made over gold nodes. Endpoints are
/// resolved through each side's own node list, so node ids need not agree.
pub fn corpus_edge_scores(predicted: &[FlowGraph], gold: &[FlowGraph]) -> Result<CorpusScores> {
    CorpusScores::collect(&align(predicted, gold)?, |p, g| {
        Ok(match_counts(
            edge_keys(&p.edges, &p.nodes)?,
            edge_keys(&g.edges, &g.nodes)?,
        ))
    })
}

pub fn corpus_pipeline_scores(predicted: &[FlowGraph], gold: &[FlowGraph]) -> Result<CorpusScores> {
    CorpusScores::collect(&align(predicted, gold)?, pipeline_counts)
}

pub fn corpus_tag_counts(predicted: &[FlowGraph], gold: &[FlowGraph]) -> Result<BTreeMap<Tag, Counts>> {
    let mut total: BTreeMap<Tag, Counts> = BTreeMap::new();
    for (p, g) in align(predicted, gold)? {
        for (tag, c) in tag_counts(&p.nodes, &g.nodes) {
            *total.entry(tag).or_default() += c;
        }
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub nodes: Prf,
    pub edges: Prf,
}

/// Node and edge agreement of `b` against `a`, with `a` taken as gold.
pub fn agreement(a: &[FlowGraph], b: &[FlowGraph]) -> Result<Agreement> {
    Ok(Agreement {
        nodes: corpus_node_scores(b, a)?.prf(),
        edges: corpus_edge_scores(b, a)?.prf(),
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::graph::Document;

    fn n(id: usize, s: usize, e: usize, tag: Tag) -> NodeSpan {
        NodeSpan::new(id, s, e, tag)
    }

    #[test]
    fn four_sevenths() {
        let gold = [n(0, 0, 0, Tag::Ae), n(1, 2, 3, Tag::C), n(2, 5, 5, Tag::T), n(3, 7, 7, Tag::D)];
        let pred = [n(0, 0, 0, Tag::Ae), n(1, 2, 3, Tag::C), n(2, 5, 6, Tag::T)];
        let p = node_f1(&pred, &gold);
        assert_eq!(p.precision, 2.0 / 3.0);
        assert_eq!(p.recall, 0.5);
        assert_eq!(p.f1, 4.0 / 7.0);
    }

    #[test]
    fn empty_conventions() {
        let gold = [n(0, 0, 0, Tag::Ae)];
        assert_eq!(node_f1(&[], &gold).f1, 0.0);
        let e = edge_f1(&[], &[], &gold).unwrap();
        assert_eq!((e.precision, e.recall, e.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn multiset_matching() {
        let gold = [n(0, 1, 1, Tag::C)];
        let pred = [n(0, 1, 1, Tag::C), n(1, 1, 1, Tag::C)];
        assert_eq!(node_counts(&pred, &gold).true_positive, 1);
    }

    fn four_edge_nodes() -> Vec<NodeSpan> {
        (0..5).map(|i| n(i, i, i, Tag::C)).collect()
    }

    #[test]
    fn one_wrong_label_of_four() {
        let nodes = four_edge_nodes();
        let gold: Vec<Edge> = (0..4).map(|i| Edge::new(i, 4, EdgeLabel::Targ)).collect();
        let mut pred = gold.clone();
        pred[2].label = EdgeLabel::Dest;
        let p = edge_f1(&pred, &gold, &nodes).unwrap();
        assert_eq!((p.precision, p.recall), (0.75, 0.75));
    }

    #[test]
    fn dangling_edge_is_an_error() {
        let nodes = four_edge_nodes();
        let err = edge_f1(&[Edge::new(0, 9, EdgeLabel::Targ)], &[], &nodes).unwrap_err();
        assert!(matches!(err, Error::DanglingEdge { edge: 0 }));
    }

    fn doc(tokens: usize) -> Document {
        Document::new("d", "x", vec![(0..tokens).map(|i| format!("w{i}")).collect()]).unwrap()
    }

    #[test]
    fn pipeline_tag_error() {
        let nodes = vec![n(0, 0, 0, Tag::C), n(1, 1, 1, Tag::T), n(2, 2, 2, Tag::Ac), n(3, 3, 3, Tag::Ae)];
        let edges = vec![
            Edge::new(0, 3, EdgeLabel::Targ),
            Edge::new(1, 3, EdgeLabel::TComp),
            Edge::new(2, 3, EdgeLabel::Agent),
        ];
        let gold = FlowGraph::new(doc(4), nodes.clone(), edges.clone());
        let mut wrong = nodes;
        wrong[1].tag = Tag::C;
        let pred = FlowGraph::new(doc(4), wrong, edges);
        let p = pipeline_f1(&pred, &gold).unwrap();
        assert!((p.precision - 2.0 / 3.0).abs() < 1e-15 && (p.recall - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pipeline_shifted_span_unmatched() {
        let nodes = vec![n(0, 0, 0, Tag::C), n(1, 2, 2, Tag::Ae)];
        let edges = vec![Edge::new(0, 1, EdgeLabel::Targ)];
        let gold = FlowGraph::new(doc(3), nodes.clone(), edges.clone());
        let pred = FlowGraph::new(doc(3), vec![n(0, 0, 1, Tag::C), nodes[1]], edges);
        assert_eq!(pipeline_f1(&pred, &gold).unwrap().counts.true_positive, 0);
    }

    #[test]
    fn agreement_identity_and_mismatch() {
        let g = FlowGraph::new(
            doc(3),
            vec![n(0, 0, 0, Tag::C), n(1, 2, 2, Tag::Ae)],
            vec![Edge::new(0, 1, EdgeLabel::Targ)],
        );
        let a = agreement(&[g.clone()], &[g.clone()]).unwrap();
        assert_eq!((a.nodes.f1, a.edges.f1), (1.0, 1.0));
        let mut other = g.clone();
        other.document.id = "e".into();
        assert!(matches!(agreement(&[g], &[other]), Err(Error::DocumentMismatch(_))));
    }

    fn arb_nodes() -> impl Strategy<Value = Vec<NodeSpan>> {
        prop::collection::vec((0usize..6, 0usize..3, 0usize..Tag::ALL.len()), 0..8).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (s, l, t))| n(i, s, s + l, Tag::ALL[t]))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn bounds_and_symmetry(a in arb_nodes(), b in arb_nodes()) {
            let ab = node_f1(&a, &b);
            let ba = node_f1(&b, &a);
            for v in [ab.precision, ab.recall, ab.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(ab.f1 <= ab.precision.max(ab.recall) + 1e-15);
            prop_assert!((ab.f1 - ba.f1).abs() < 1e-15);
            prop_assert_eq!(ab.precision, ba.recall);
        }

        #[test]
        fn order_invariant(a in arb_nodes(), b in arb_nodes()) {
            let mut ra = a.clone();
            ra.reverse();
            prop_assert_eq!(node_counts(&a, &b), node_counts(&ra, &b));
        }
    }
}
