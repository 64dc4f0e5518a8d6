//! Line-delimited corpus files, cross-validation folds and the
//! source/target dataset pairing used by the training regimes.
//!
//! Each line of a corpus file is one JSON object with the fields `id`,
//! `domain`, `steps`, `nodes` and `edges`, serialized in exactly that order:
//!
//! ```text
//! {"id":"a1","domain":"cooking","steps":[["Cut","the","potatoes","."]],"nodes":[{"id":0,"start":0,"end":0,"tag":"Ae"},{"id":1,"start":2,"end":2,"tag":"C"}],"edges":[{"src":1,"dst":0,"label":"Targ"}]}
//! ```

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Document, Edge, EdgeLabel, FlowGraph, NodeSpan, Notice, Tag};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: String,
    domain: String,
    steps: Vec<Vec<String>>,
    #[serde(default)]
    nodes: Vec<NodeRecord>,
    #[serde(default)]
    edges: Vec<EdgeRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: usize,
    start: usize,
    end: usize,
    tag: Tag,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    src: usize,
    dst: usize,
    label: EdgeLabel,
}

impl From<&FlowGraph> for Record {
    fn from(g: &FlowGraph) -> Self {
        Record {
            id: g.document.id.clone(),
            domain: g.document.domain.clone(),
            steps: g.document.step_texts(),
            nodes: g
                .nodes
                .iter()
                .map(|n| NodeRecord {
                    id: n.node_id,
                    start: n.start,
                    end: n.end,
                    tag: n.tag,
                })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    src: e.src,
                    dst: e.dst,
                    label: e.label,
                })
                .collect(),
        }
    }
}

impl Record {
    fn into_graph(self) -> Result<FlowGraph> {
        let document = Document::new(self.id, self.domain, self.steps)?;
        let nodes = self
            .nodes
            .into_iter()
            .map(|n| NodeSpan::new(n.id, n.start, n.end, n.tag))
            .collect();
        let edges = self
            .edges
            .into_iter()
            .map(|e| Edge::new(e.src, e.dst, e.label))
            .collect();
        Ok(FlowGraph::new(document, nodes, edges))
    }
}

/// Canonical single-line serialization of one graph (no trailing newline).
pub fn graph_to_line(g: &FlowGraph) -> String {
    serde_json::to_string(&Record::from(g)).expect("records always serialize")
}

/// Parses one record. Structural validation is left to the caller.
pub fn graph_from_line(line: &str) -> std::result::Result<FlowGraph, String> {
    let record: Record = serde_json::from_str(line).map_err(|e| e.to_string())?;
    record.into_graph().map_err(|e| e.to_string())
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<FlowGraph>> {
    let path = path.as_ref();
    let file = fs::File::open(path)?;
    read_corpus(BufReader::new(file), path)
}

/// Reads a corpus, validating every record. Blank lines are skipped;
/// incomplete graphs are accepted with a logged notice.
pub fn read_corpus(reader: impl BufRead, path: &Path) -> Result<Vec<FlowGraph>> {
    let mut graphs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let g = graph_from_line(&line).map_err(|message| Error::Parse {
            path: path.to_owned(),
            line: i + 1,
            message,
        })?;
        let report = g.validate();
        if let Some(v) = report.violations.first() {
            return Err(Error::InvalidRecord {
                id: g.document.id.clone(),
                message: format!("line {}: {v}", i + 1),
            });
        }
        for notice in &report.notices {
            let Notice::Incomplete { roots } = notice;
            log::debug!(
                "record {:?} is incomplete ({} sink nodes)",
                g.document.id,
                roots.len()
            );
        }
        graphs.push(g);
    }
    Ok(graphs)
}

pub fn save_corpus(graphs: &[FlowGraph], path: impl AsRef<Path>) -> Result<()> {
    let mut file = std::io::BufWriter::new(fs::File::create(path)?);
    write_corpus(graphs, &mut file)?;
    file.flush()?;
    Ok(())
}

pub fn write_corpus(graphs: &[FlowGraph], mut out: impl Write) -> Result<()> {
    for g in graphs {
        out.write_all(graph_to_line(g).as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Labeled source-domain and target-domain training data, plus an optional
/// target-domain validation split for model selection.
#[derive(Clone, Debug, Default)]
pub struct DatasetPair {
    pub source: Vec<FlowGraph>,
    pub target: Vec<FlowGraph>,
    pub validation: Vec<FlowGraph>,
}

/// Assignment of documents to cross-validation folds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldSplit {
    pub fold_count: usize,
    /// Fold index of each document, in corpus order.
    pub assignments: Vec<usize>,
}

/// Document indices playing each role in one cross-validation round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl FoldSplit {
    pub fn fold(&self, f: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == f)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        (0..self.fold_count).map(|f| self.fold(f).len()).collect()
    }

    /// Round `r`: fold `r` trains, fold `r + 1 (mod k)` validates, the rest test.
    pub fn round(&self, r: usize) -> RoundSplit {
        let k = self.fold_count;
        let train_fold = r % k;
        let valid_fold = (r + 1) % k;
        let mut split = RoundSplit {
            train: Vec::new(),
            validation: Vec::new(),
            test: Vec::new(),
        };
        for (i, &f) in self.assignments.iter().enumerate() {
            if f == train_fold {
                split.train.push(i);
            } else if f == valid_fold {
                split.validation.push(i);
            } else {
                split.test.push(i);
            }
        }
        split
    }
}

pub fn make_folds<T>(corpus: &[T], fold_count: usize, seed: u64) -> Result<FoldSplit> {
    let n = corpus.len();
    if fold_count < 2 || fold_count > n {
        return Err(Error::FoldCount {
            docs: n,
            folds: fold_count,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignments = vec![0; n];
    for (pos, &doc) in order.iter().enumerate() {
        assignments[doc] = pos % fold_count;
    }
    Ok(FoldSplit {
        fold_count,
        assignments,
    })
}

pub fn select<T: Clone>(items: &[T], indices: &[usize]) -> Vec<T> {
    indices.iter().map(|&i| items[i].clone()).collect()
}
