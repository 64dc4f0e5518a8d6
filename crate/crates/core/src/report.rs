//! Plain-text tables: corpus statistics and evaluation results.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::error::Result;
use crate::graph::{FlowGraph, Tag};
use crate::metrics::{
    corpus_edge_scores, corpus_node_scores, corpus_pipeline_scores, corpus_tag_counts, Counts,
    CorpusScores, Prf,
};

/// Mean and population standard deviation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
}

impl Moments {
    pub fn of(values: &[f64]) -> Moments {
        if values.is_empty() {
            return Moments::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Moments {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DomainStats {
    pub domain: String,
    pub documents: usize,
    pub characters: Moments,
    pub words: Moments,
    pub steps: Moments,
    pub tags: Moments,
    pub labels: Moments,
}

/// Characters of one document: token lengths plus one space between
/// neighbouring tokens of the same step.
pub fn character_count(g: &FlowGraph) -> usize {
    g.document
        .step_texts()
        .iter()
        .map(|step| step.iter().map(|t| t.chars().count()).sum::<usize>() + step.len().saturating_sub(1))
        .sum()
}

/// Per-domain statistics, domains in lexicographic order.
pub fn corpus_stats(graphs: &[FlowGraph]) -> Vec<DomainStats> {
    let mut by_domain: BTreeMap<&str, Vec<&FlowGraph>> = BTreeMap::new();
    for g in graphs {
        by_domain.entry(&g.document.domain).or_default().push(g);
    }
    by_domain
        .into_iter()
        .map(|(domain, gs)| {
            let col = |f: &dyn Fn(&FlowGraph) -> usize| {
                Moments::of(&gs.iter().map(|g| f(g) as f64).collect::<Vec<_>>())
            };
            DomainStats {
                domain: domain.to_owned(),
                documents: gs.len(),
                characters: col(&character_count),
                words: col(&|g| g.document.token_count()),
                steps: col(&|g| g.document.step_count()),
                tags: col(&|g| g.nodes.len()),
                labels: col(&|g| g.edges.len()),
            }
        })
        .collect()
}

pub fn format_stats(stats: &[DomainStats]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<16} {:>5}  {:>17}  {:>15}  {:>13}  {:>13}  {:>13}",
        "domain", "docs", "characters", "words", "steps", "tags", "labels"
    )
    .unwrap();
    for s in stats {
        let m = |m: Moments| format!("{:.2} ± {:.2}", m.mean, m.std);
        writeln!(
            out,
            "{:<16} {:>5}  {:>17}  {:>15}  {:>13}  {:>13}  {:>13}",
            s.domain,
            s.documents,
            m(s.characters),
            m(s.words),
            m(s.steps),
            m(s.tags),
            m(s.labels)
        )
        .unwrap();
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    Node,
    Edge,
    Pipeline,
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalMode::Node => "node",
            EvalMode::Edge => "edge",
            EvalMode::Pipeline => "pipeline",
        })
    }
}

/// Scores of a predicted corpus against gold, ready for printing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub mode: EvalMode,
    pub scores: CorpusScores,
    /// Node mode only.
    pub per_tag: Option<BTreeMap<Tag, Counts>>,
    /// Pipeline mode: edge F1 of the same edges scored as if the predicted
    /// nodes were gold, when both sides share node spans.
    pub gold_node_edge: Option<Prf>,
}

pub fn evaluate(predicted: &[FlowGraph], gold: &[FlowGraph], mode: EvalMode) -> Result<EvaluationReport> {
    Ok(match mode {
        EvalMode::Node => EvaluationReport {
            mode,
            scores: corpus_node_scores(predicted, gold)?,
            per_tag: Some(corpus_tag_counts(predicted, gold)?),
            gold_node_edge: None,
        },
        EvalMode::Edge => EvaluationReport {
            mode,
            scores: corpus_edge_scores(predicted, gold)?,
            per_tag: None,
            gold_node_edge: None,
        },
        EvalMode::Pipeline => {
            let same_nodes = crate::metrics::align(predicted, gold)?
                .iter()
                .all(|(p, g)| crate::metrics::node_counts(&p.nodes, &g.nodes).true_positive == g.nodes.len()
                    && p.nodes.len() == g.nodes.len());
            EvaluationReport {
                mode,
                scores: corpus_pipeline_scores(predicted, gold)?,
                per_tag: None,
                gold_node_edge: if same_nodes {
                    Some(corpus_edge_scores(predicted, gold)?.prf())
                } else {
                    None
                },
            }
        }
    })
}

/// Pipeline drop relative to a gold-node edge score.
pub fn pipeline_drop(pipeline: &Prf, gold_node: &Prf) -> f64 {
    gold_node.f1 - pipeline.f1
}

fn prf_row(out: &mut String, name: &str, p: &Prf) {
    writeln!(
        out,
        "{:<24} {:>9.4} {:>9.4} {:>9.4} {:>6} {:>6} {:>6}",
        name, p.precision, p.recall, p.f1, p.counts.true_positive, p.counts.predicted, p.counts.gold
    )
    .unwrap();
}

fn header(out: &mut String, first: &str) {
    writeln!(
        out,
        "{:<24} {:>9} {:>9} {:>9} {:>6} {:>6} {:>6}",
        first, "P", "R", "F1", "tp", "pred", "gold"
    )
    .unwrap();
}

impl fmt::Display for EvaluationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        writeln!(out, "mode: {}", self.mode).unwrap();
        header(&mut out, "document");
        for (id, c) in &self.scores.documents {
            prf_row(&mut out, id, &c.prf());
        }
        prf_row(&mut out, "micro-average", &self.scores.prf());
        if let Some(tags) = &self.per_tag {
            writeln!(out).unwrap();
            header(&mut out, "tag");
            for (tag, c) in tags.iter().filter(|(_, c)| c.gold + c.predicted > 0) {
                prf_row(&mut out, tag.as_str(), &c.prf());
            }
        }
        if let Some(edge) = &self.gold_node_edge {
            let pipeline = self.scores.prf();
            writeln!(out).unwrap();
            writeln!(out, "gold-node edge F1: {:.4}", edge.f1).unwrap();
            writeln!(out, "pipeline drop:     {:.4}", pipeline_drop(&pipeline, edge)).unwrap();
        }
        f.write_str(&out)
    }
}

/// One row of a results table: a domain, a regime and its scores.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub domain: String,
    pub regime: String,
    pub scores: Prf,
}

/// Rows grouped by domain, one line per regime.
pub fn format_results(title: &str, rows: &[ResultRow]) -> String {
    let mut out = String::new();
    writeln!(out, "{title}").unwrap();
    writeln!(out, "{:<16} {:<20} {:>7} {:>7} {:>7}", "domain", "regime", "P", "R", "F1").unwrap();
    let mut last = None;
    for r in rows {
        let domain = if last == Some(&r.domain) { "" } else { &r.domain };
        writeln!(
            out,
            "{:<16} {:<20} {:>7.3} {:>7.3} {:>7.3}",
            domain, r.regime, r.scores.precision, r.scores.recall, r.scores.f1
        )
        .unwrap();
        last = Some(&r.domain);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Document, Edge, EdgeLabel, NodeSpan};
    use crate::synthetic::{generate_corpus, SyntheticDomain};

    #[test]
    fn counts_two_steps() {
        let doc = Document::new(
            "d",
            "x",
            vec![
                vec!["Cut".into(), "the".into(), "paper".into()],
                vec!["Fold".into(), "it".into(), ".".into()],
            ],
        )
        .unwrap();
        let g = FlowGraph::new(
            doc,
            vec![NodeSpan::new(0, 0, 0, Tag::Ae), NodeSpan::new(1, 3, 3, Tag::Ae)],
            vec![Edge::new(0, 1, EdgeLabel::Targ)],
        );
        assert_eq!(character_count(&g), "Cut the paper".len() + "Fold it .".len());
        let s = &corpus_stats(&[g])[0];
        assert_eq!((s.words.mean, s.steps.mean, s.tags.mean, s.labels.mean), (6.0, 2.0, 2.0, 1.0));
        assert_eq!(s.words.std, 0.0);
    }

    #[test]
    fn recount_oracle() {
        let corpus = generate_corpus(&SyntheticDomain::crafts(), 30, 4);
        let s = &corpus_stats(&corpus)[0];
        // Recount from the serialized text, independent of the token model.
        let chars: Vec<f64> = corpus
            .iter()
            .map(|g| {
                g.document
                    .step_texts()
                    .iter()
                    .map(|st| st.join(" ").chars().count())
                    .sum::<usize>() as f64
            })
            .collect();
        let mean = chars.iter().sum::<f64>() / 30.0;
        let std = (chars.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / 30.0).sqrt();
        assert!((s.characters.mean - mean).abs() < 1e-9);
        assert!((s.characters.std - std).abs() < 1e-9);
        assert_eq!(s.documents, 30);
    }

    #[test]
    fn pipeline_with_gold_nodes_matches_edge_mode() {
        let gold = generate_corpus(&SyntheticDomain::cooking(), 5, 2);
        let mut pred = gold.clone();
        for g in &mut pred {
            if let Some(e) = g.edges.first_mut() {
                e.label = EdgeLabel::Dest;
            }
        }
        let edge = evaluate(&pred, &gold, EvalMode::Edge).unwrap();
        let pipe = evaluate(&pred, &gold, EvalMode::Pipeline).unwrap();
        assert_eq!(edge.scores.prf(), pipe.scores.prf());
        assert_eq!(pipe.gold_node_edge, Some(edge.scores.prf()));
        assert_eq!(pipe.to_string(), evaluate(&pred, &gold, EvalMode::Pipeline).unwrap().to_string());
        assert!(pipe.to_string().contains("pipeline drop:     0.0000"));
    }
}
