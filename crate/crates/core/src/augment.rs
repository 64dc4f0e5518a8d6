//! Causality-preserving step swapping and synonym word replacement.
//!
//! Both procedures are applied to target-domain training data only.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Document, FlowGraph, NodeSpan};
use crate::numeric::fnv1a;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub max_swaps_per_example: usize,
    pub replacements_per_example: usize,
    pub replace_probability: f64,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            max_swaps_per_example: 5,
            replacements_per_example: 10,
            replace_probability: 0.5,
            seed: 0,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.replace_probability) {
            return Err(Error::Config(format!(
                "replace_probability {} outside [0, 1]",
                self.replace_probability
            )));
        }
        Ok(())
    }
}

/// Lowercase word to single-token synonyms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SynonymLexicon {
    entries: BTreeMap<String, Vec<String>>,
}

impl SynonymLexicon {
    /// Builds a lexicon, dropping self-synonyms, multi-word synonyms and
    /// duplicates. Words left without synonyms are omitted.
    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, Vec<S>)>,
        S: AsRef<str>,
    {
        let mut map: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (word, syns) in entries {
            let key = word.as_ref().trim().to_lowercase();
            if key.is_empty() {
                continue;
            }
            let list = map.entry(key.clone()).or_default();
            for s in syns {
                let s = s.as_ref().trim();
                if s.is_empty() || s.contains(char::is_whitespace) || s.to_lowercase() == key {
                    continue;
                }
                if !list.iter().any(|x| x == s) {
                    list.push(s.to_owned());
                }
            }
        }
        map.retain(|_, v| !v.is_empty());
        SynonymLexicon { entries: map }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        Self::read(std::io::BufReader::new(file), path)
    }

    /// Reads `word<TAB>syn1,syn2,...` lines.
    pub fn read(reader: impl BufRead, path: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (word, syns) = line.split_once('\t').ok_or_else(|| Error::Parse {
                path: path.to_owned(),
                line: i + 1,
                message: "expected word<TAB>synonyms".into(),
            })?;
            entries.push((
                word.to_owned(),
                syns.split(',').map(str::to_owned).collect::<Vec<_>>(),
            ));
        }
        Ok(Self::from_entries(entries))
    }

    pub fn synonyms(&self, word: &str) -> Option<&[String]> {
        self.entries.get(&word.to_lowercase()).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Per-document RNG stream derived from the seed and the document id.
pub fn document_rng(seed: u64, id: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ fnv1a(id.as_bytes()))
}

/// `reach[a][b]` is true when a directed path of length >= 1 leads from a to b.
fn reachability(g: &FlowGraph) -> Vec<Vec<bool>> {
    let n = g.nodes.len();
    let mut reach = vec![vec![false; n]; n];
    for e in &g.edges {
        if e.src < n && e.dst < n {
            reach[e.src][e.dst] = true;
        }
    }
    for k in 0..n {
        for a in 0..n {
            if reach[a][k] {
                for b in 0..n {
                    if reach[k][b] {
                        reach[a][b] = true;
                    }
                }
            }
        }
    }
    reach
}

fn nodes_by_step(g: &FlowGraph) -> Vec<Vec<usize>> {
    let mut by_step = vec![Vec::new(); g.document.step_count()];
    for n in &g.nodes {
        if let Some(s) = g.document.step_of_offset(n.start) {
            by_step[s].push(n.node_id);
        }
    }
    by_step
}

fn check_pair(g: &FlowGraph, i: usize, j: usize) -> Result<()> {
    let steps = g.document.step_count();
    if i >= j || j >= steps {
        return Err(Error::InvalidStepPair { i, j, steps });
    }
    Ok(())
}

/// True when exchanging steps `i < j` reverses the order of no pair of steps
/// connected by a directed path in either direction.
pub fn swappable(g: &FlowGraph, i: usize, j: usize) -> Result<bool> {
    check_pair(g, i, j)?;
    Ok(swappable_with(&reachability(g), &nodes_by_step(g), i, j))
}

fn swappable_with(reach: &[Vec<bool>], by_step: &[Vec<usize>], i: usize, j: usize) -> bool {
    let connected = |a: usize, b: usize| {
        by_step[a]
            .iter()
            .any(|&u| by_step[b].iter().any(|&v| reach[u][v] || reach[v][u]))
    };
    (i + 1..=j).all(|k| !connected(i, k)) && (i..j).all(|k| !connected(k, j))
}

/// Exchanges steps `i` and `j`, remapping node spans to the new offsets.
/// Node ids and edges are carried over unchanged.
pub fn swap_steps(g: &FlowGraph, i: usize, j: usize) -> Result<FlowGraph> {
    if !swappable(g, i, j)? {
        return Err(Error::NotSwappable { i, j });
    }
    Ok(reorder_steps(g, i, j))
}

fn reorder_steps(g: &FlowGraph, i: usize, j: usize) -> FlowGraph {
    let doc = &g.document;
    let mut order: Vec<usize> = (0..doc.step_count()).collect();
    order.swap(i, j);
    let old_ranges = doc.step_ranges();
    let mut new_start = vec![0; doc.step_count()];
    let mut pos = 0;
    for &old in &order {
        new_start[old] = pos;
        pos += old_ranges[old].len();
    }
    let texts = doc.step_texts();
    let steps = order.iter().map(|&s| texts[s].clone()).collect();
    let document = Document::new(doc.id.clone(), doc.domain.clone(), steps)
        .expect("reordering keeps every step non-empty");
    let nodes = g
        .nodes
        .iter()
        .map(|n| match doc.step_of_offset(n.start) {
            Some(s) => {
                let shift = |off: usize| off - old_ranges[s].start + new_start[s];
                NodeSpan::new(n.node_id, shift(n.start), shift(n.end), n.tag)
            }
            None => *n,
        })
        .collect();
    FlowGraph::new(document, nodes, g.edges.clone())
}

/// Up to `max_swaps_per_example` copies, each with one swappable pair of
/// steps exchanged. Pairs are sampled uniformly without replacement.
pub fn augment_by_swapping(
    g: &FlowGraph,
    config: &AugmentConfig,
    rng: &mut impl Rng,
) -> Vec<FlowGraph> {
    if config.max_swaps_per_example == 0 {
        return Vec::new();
    }
    let reach = reachability(g);
    let by_step = nodes_by_step(g);
    let steps = g.document.step_count();
    let mut pairs: Vec<(usize, usize)> = (0..steps)
        .flat_map(|i| (i + 1..steps).map(move |j| (i, j)))
        .filter(|&(i, j)| swappable_with(&reach, &by_step, i, j))
        .collect();
    pairs.shuffle(rng);
    pairs
        .into_iter()
        .map(|(i, j)| {
            let mut out = reorder_steps(g, i, j);
            out.document.id = format!("{}#swap{i}-{j}", g.document.id);
            out
        })
        .filter(|out| out.document.step_texts() != g.document.step_texts() || out.nodes != g.nodes)
        .take(config.max_swaps_per_example)
        .collect()
}

/// Exactly `replacements_per_example` copies in which every in-lexicon token
/// is independently replaced, with probability `p`, by a uniformly chosen
/// synonym. Spans, tags and edges are unchanged.
pub fn augment_by_replacement(
    g: &FlowGraph,
    lexicon: &SynonymLexicon,
    config: &AugmentConfig,
    rng: &mut impl Rng,
) -> Vec<FlowGraph> {
    let p = config.replace_probability.clamp(0.0, 1.0);
    (0..config.replacements_per_example)
        .map(|copy| {
            let steps: Vec<Vec<String>> = g
                .document
                .steps
                .iter()
                .map(|step| {
                    step.iter()
                        .map(|tok| match lexicon.synonyms(&tok.text) {
                            Some(syns) if rng.gen_bool(p) => syns.choose(rng).unwrap().clone(),
                            _ => tok.text.clone(),
                        })
                        .collect()
                })
                .collect();
            let document = Document::new(
                format!("{}#repl{copy}", g.document.id),
                g.document.domain.clone(),
                steps,
            )
            .expect("synonyms are non-empty single tokens");
            FlowGraph::new(document, g.nodes.clone(), g.edges.clone())
        })
        .collect()
}

/// Expands a training split: originals first, then swap copies, then
/// replacement copies, each document drawing from its own RNG stream.
pub fn augment_corpus(
    graphs: &[FlowGraph],
    config: &AugmentConfig,
    step_swap: bool,
    lexicon: Option<&SynonymLexicon>,
) -> Vec<FlowGraph> {
    let mut out = graphs.to_vec();
    if step_swap {
        for g in graphs {
            let mut rng = document_rng(config.seed, &format!("swap:{}", g.document.id));
            out.extend(augment_by_swapping(g, config, &mut rng));
        }
    }
    if let Some(lexicon) = lexicon {
        for g in graphs {
            let mut rng = document_rng(config.seed, &format!("replace:{}", g.document.id));
            out.extend(augment_by_replacement(g, lexicon, config, &mut rng));
        }
    }
    out
}

/// Words covered by the lexicon at least once in `graphs`.
pub fn lexicon_coverage(graphs: &[FlowGraph], lexicon: &SynonymLexicon) -> BTreeSet<String> {
    graphs
        .iter()
        .flat_map(|g| g.document.tokens())
        .filter(|t| lexicon.synonyms(&t.text).is_some())
        .map(|t| t.text.to_lowercase())
        .collect()
}
