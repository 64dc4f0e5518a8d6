//! Documents, node spans, labeled edges and the flow graph built over them.
//!
//! Edges point in the direction of flow: `src` is the entity or action that
//! flows into `dst`. A complete flow graph therefore has out-degree at most
//! one everywhere and a single sink (the final action).

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node tags. The declaration order fixes the CRF label inventory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "&'static str")]
pub enum Tag {
    C,
    T,
    D,
    Q,
    Ae,
    Ae2,
    Ac,
    At,
    Sc,
    St,
}

impl Tag {
    pub const ALL: [Tag; 10] = [
        Tag::C,
        Tag::T,
        Tag::D,
        Tag::Q,
        Tag::Ae,
        Tag::Ae2,
        Tag::Ac,
        Tag::At,
        Tag::Sc,
        Tag::St,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::C => "C",
            Tag::T => "T",
            Tag::D => "D",
            Tag::Q => "Q",
            Tag::Ae => "Ae",
            Tag::Ae2 => "Ae2",
            Tag::Ac => "Ac",
            Tag::At => "At",
            Tag::Sc => "Sc",
            Tag::St => "St",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Tag::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::UnknownTag(s.to_owned()))
    }
}

impl TryFrom<String> for Tag {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Tag> for &'static str {
    fn from(t: Tag) -> Self {
        t.as_str()
    }
}

/// Edge labels, in a fixed order that doubles as the label-classifier index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "&'static str")]
pub enum EdgeLabel {
    Agent,
    Targ,
    Dest,
    TComp,
    CComp,
    CEq,
    CPartOf,
    CSet,
    TEq,
    TPartOf,
    AEq,
    VTm,
    OtherMod,
}

impl EdgeLabel {
    pub const COUNT: usize = 13;

    pub const ALL: [EdgeLabel; 13] = [
        EdgeLabel::Agent,
        EdgeLabel::Targ,
        EdgeLabel::Dest,
        EdgeLabel::TComp,
        EdgeLabel::CComp,
        EdgeLabel::CEq,
        EdgeLabel::CPartOf,
        EdgeLabel::CSet,
        EdgeLabel::TEq,
        EdgeLabel::TPartOf,
        EdgeLabel::AEq,
        EdgeLabel::VTm,
        EdgeLabel::OtherMod,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeLabel::Agent => "Agent",
            EdgeLabel::Targ => "Targ",
            EdgeLabel::Dest => "Dest",
            EdgeLabel::TComp => "T-comp",
            EdgeLabel::CComp => "C-comp",
            EdgeLabel::CEq => "C-eq",
            EdgeLabel::CPartOf => "C-part-of",
            EdgeLabel::CSet => "C-set",
            EdgeLabel::TEq => "T-eq",
            EdgeLabel::TPartOf => "T-part-of",
            EdgeLabel::AEq => "A-eq",
            EdgeLabel::VTm => "V-tm",
            EdgeLabel::OtherMod => "other-mod",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<EdgeLabel> {
        EdgeLabel::ALL.get(i).copied()
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EdgeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EdgeLabel::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::UnknownLabel(s.to_owned()))
    }
}

impl TryFrom<String> for EdgeLabel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<EdgeLabel> for &'static str {
    fn from(l: EdgeLabel) -> Self {
        l.as_str()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub step_index: usize,
    pub token_index: usize,
    pub doc_offset: usize,
}

/// A tokenized procedural article. Tokens carry their position both within
/// their step and in the document-level flattening.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub domain: String,
    pub steps: Vec<Vec<Token>>,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        domain: impl Into<String>,
        steps: Vec<Vec<String>>,
    ) -> Result<Self> {
        let id = id.into();
        if steps.is_empty() || steps.iter().any(Vec::is_empty) {
            return Err(Error::EmptyDocument(id));
        }
        let mut offset = 0;
        let mut out = Vec::with_capacity(steps.len());
        for (step_index, step) in steps.into_iter().enumerate() {
            let mut tokens = Vec::with_capacity(step.len());
            for (token_index, text) in step.into_iter().enumerate() {
                check_token_text(&text)?;
                tokens.push(Token {
                    text,
                    step_index,
                    token_index,
                    doc_offset: offset,
                });
                offset += 1;
            }
            out.push(tokens);
        }
        Ok(Document {
            id,
            domain: domain.into(),
            steps: out,
        })
    }

    pub fn token_count(&self) -> usize {
        self.steps.iter().map(Vec::len).sum()
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.steps.iter().flatten()
    }

    /// Document-level offset ranges covered by each step.
    pub fn step_ranges(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.steps
            .iter()
            .map(|s| {
                let r = start..start + s.len();
                start = r.end;
                r
            })
            .collect()
    }

    pub fn step_of_offset(&self, offset: usize) -> Option<usize> {
        self.step_ranges().iter().position(|r| r.contains(&offset))
    }

    pub fn step_texts(&self) -> Vec<Vec<String>> {
        self.steps
            .iter()
            .map(|s| s.iter().map(|t| t.text.clone()).collect())
            .collect()
    }
}

fn check_token_text(text: &str) -> Result<()> {
    if text.is_empty() {
        return Err(Error::InvalidToken {
            text: text.to_owned(),
            reason: "empty",
        });
    }
    if text.contains(['\n', '\r']) {
        return Err(Error::InvalidToken {
            text: text.to_owned(),
            reason: "contains a newline",
        });
    }
    Ok(())
}

/// A tagged entity mention, inclusive on both ends, in document offsets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSpan {
    pub node_id: usize,
    pub start: usize,
    pub end: usize,
    pub tag: Tag,
}

impl NodeSpan {
    pub fn new(node_id: usize, start: usize, end: usize, tag: Tag) -> Self {
        NodeSpan {
            node_id,
            start,
            end,
            tag,
        }
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn overlaps(&self, other: &NodeSpan) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub label: EdgeLabel,
}

impl Edge {
    pub fn new(src: usize, dst: usize, label: EdgeLabel) -> Self {
        Edge { src, dst, label }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowGraph {
    pub document: Document,
    pub nodes: Vec<NodeSpan>,
    pub edges: Vec<Edge>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NodeIdMismatch { index: usize, node_id: usize },
    SpanOutOfBounds { node: usize },
    CrossStep { node: usize },
    Overlap { first: usize, second: usize },
    SelfLoop { edge: usize },
    DanglingEdge { edge: usize },
    MultiHead { node: usize, edges: Vec<usize> },
    Cycle { nodes: Vec<usize> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NodeIdMismatch { index, node_id } => {
                write!(f, "node at position {index} has id {node_id}")
            }
            Violation::SpanOutOfBounds { node } => write!(f, "node {node}: span out of bounds"),
            Violation::CrossStep { node } => write!(f, "node {node}: span crosses a step boundary"),
            Violation::Overlap { first, second } => {
                write!(f, "nodes {first} and {second}: overlapping spans")
            }
            Violation::SelfLoop { edge } => write!(f, "edge {edge}: self loop"),
            Violation::DanglingEdge { edge } => write!(f, "edge {edge}: dangling node reference"),
            Violation::MultiHead { node, edges } => {
                write!(f, "node {node}: multiple outgoing edges {edges:?}")
            }
            Violation::Cycle { nodes } => write!(f, "cycle through nodes {nodes:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Notice {
    /// More than one node without an outgoing edge.
    Incomplete { roots: Vec<usize> },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub notices: Vec<Notice>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.notices.is_empty()
    }
}

impl FlowGraph {
    pub fn new(document: Document, nodes: Vec<NodeSpan>, edges: Vec<Edge>) -> Self {
        FlowGraph {
            document,
            nodes,
            edges,
        }
    }

    pub fn node(&self, id: usize) -> Option<&NodeSpan> {
        self.nodes.get(id).filter(|n| n.node_id == id)
    }

    /// Step containing the first token of `node`.
    pub fn node_step(&self, node: usize) -> Option<usize> {
        self.node(node)
            .and_then(|n| self.document.step_of_offset(n.start))
    }

    /// The unique outgoing edge of every node, or `None` for sinks.
    /// Only meaningful on single-head graphs; later edges win otherwise.
    pub fn heads(&self) -> Vec<Option<usize>> {
        let mut heads = vec![None; self.nodes.len()];
        for e in &self.edges {
            if e.src < heads.len() {
                heads[e.src] = Some(e.dst);
            }
        }
        heads
    }

    pub fn validate(&self) -> ValidationReport {
        validate_flow_graph(self)
    }
}

/// Checks every structural invariant and reports each violation found.
pub fn validate_flow_graph(g: &FlowGraph) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = g.nodes.len();
    let tokens = g.document.token_count();
    let ranges = g.document.step_ranges();

    for (index, node) in g.nodes.iter().enumerate() {
        if node.node_id != index {
            report.violations.push(Violation::NodeIdMismatch {
                index,
                node_id: node.node_id,
            });
        }
        if node.start > node.end || node.end >= tokens {
            report
                .violations
                .push(Violation::SpanOutOfBounds { node: index });
        } else if !ranges
            .iter()
            .any(|r| r.contains(&node.start) && r.contains(&node.end))
        {
            report.violations.push(Violation::CrossStep { node: index });
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            if g.nodes[a].overlaps(&g.nodes[b]) {
                report.violations.push(Violation::Overlap {
                    first: a,
                    second: b,
                });
            }
        }
    }

    let mut outgoing = vec![Vec::new(); n];
    let mut graph = DiGraph::<(), ()>::with_capacity(n, g.edges.len());
    let ids: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for (i, e) in g.edges.iter().enumerate() {
        if e.src >= n || e.dst >= n {
            report.violations.push(Violation::DanglingEdge { edge: i });
            continue;
        }
        outgoing[e.src].push(i);
        if e.src == e.dst {
            report.violations.push(Violation::SelfLoop { edge: i });
            continue;
        }
        graph.add_edge(ids[e.src], ids[e.dst], ());
    }
    for (node, edges) in outgoing.iter().enumerate() {
        if edges.len() > 1 {
            report.violations.push(Violation::MultiHead {
                node,
                edges: edges.clone(),
            });
        }
    }
    let mut cycles: Vec<Vec<usize>> = tarjan_scc(&graph)
        .into_iter()
        .filter(|c| c.len() > 1)
        .map(|c| {
            let mut nodes: Vec<_> = c.into_iter().map(|ix| ix.index()).collect();
            nodes.sort_unstable();
            nodes
        })
        .collect();
    cycles.sort();
    report
        .violations
        .extend(cycles.into_iter().map(|nodes| Violation::Cycle { nodes }));

    let roots: Vec<usize> = (0..n).filter(|&v| outgoing[v].is_empty()).collect();
    if roots.len() > 1 {
        report.notices.push(Notice::Incomplete { roots });
    }
    report
}

/// Per-token IOB label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IobLabel {
    O,
    B(Tag),
    I(Tag),
}

impl IobLabel {
    /// Size of the label inventory: `O` plus `B-`/`I-` for every tag.
    pub const COUNT: usize = 1 + 2 * Tag::ALL.len();

    /// Inventory index: `O` is 0, then `B-t`, `I-t` in tag order.
    pub fn index(self) -> usize {
        match self {
            IobLabel::O => 0,
            IobLabel::B(t) => 1 + 2 * t.index(),
            IobLabel::I(t) => 2 + 2 * t.index(),
        }
    }

    pub fn from_index(i: usize) -> Option<IobLabel> {
        match i {
            0 => Some(IobLabel::O),
            i if i < Self::COUNT => {
                let tag = Tag::ALL[(i - 1) / 2];
                Some(if i % 2 == 1 {
                    IobLabel::B(tag)
                } else {
                    IobLabel::I(tag)
                })
            }
            _ => None,
        }
    }

    pub fn all() -> impl Iterator<Item = IobLabel> {
        (0..Self::COUNT).filter_map(IobLabel::from_index)
    }
}

impl fmt::Display for IobLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IobLabel::O => f.write_str("O"),
            IobLabel::B(t) => write!(f, "B-{t}"),
            IobLabel::I(t) => write!(f, "I-{t}"),
        }
    }
}

impl FromStr for IobLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "O" {
            return Ok(IobLabel::O);
        }
        let malformed = || Error::MalformedIob(s.to_owned());
        let (prefix, tag) = s.split_once('-').ok_or_else(malformed)?;
        let tag: Tag = tag.parse().map_err(|_| malformed())?;
        match prefix {
            "B" => Ok(IobLabel::B(tag)),
            "I" => Ok(IobLabel::I(tag)),
            _ => Err(malformed()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TagSequence {
    pub labels: Vec<IobLabel>,
}

impl TagSequence {
    pub fn new(labels: Vec<IobLabel>) -> Self {
        TagSequence { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.index()).collect()
    }

    pub fn from_indices(indices: &[usize]) -> Option<Self> {
        indices
            .iter()
            .map(|&i| IobLabel::from_index(i))
            .collect::<Option<Vec<_>>>()
            .map(TagSequence::new)
    }
}

impl fmt::Display for TagSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

pub fn encode_iob(nodes: &[NodeSpan], doc: &Document) -> Result<TagSequence> {
    let len = doc.token_count();
    for n in nodes {
        if n.start > n.end || n.end >= len {
            return Err(Error::InvalidSpan {
                node: n.node_id,
                reason: "out of bounds",
            });
        }
    }
    let mut sorted: Vec<&NodeSpan> = nodes.iter().collect();
    sorted.sort_by_key(|n| (n.start, n.end));
    for pair in sorted.windows(2) {
        if pair[0].overlaps(pair[1]) {
            return Err(Error::OverlappingSpans {
                first: pair[0].node_id,
                second: pair[1].node_id,
            });
        }
    }
    let mut labels = vec![IobLabel::O; len];
    for n in nodes {
        labels[n.start] = IobLabel::B(n.tag);
        for l in &mut labels[n.start + 1..=n.end] {
            *l = IobLabel::I(n.tag);
        }
    }
    Ok(TagSequence { labels })
}

/// Converts IOB labels back to spans. Malformed input is repaired: an `I-X`
/// that does not continue an `X` span in the same step opens a new span.
/// Node ids are assigned in order of span start.
pub fn decode_iob(tags: &TagSequence, doc: &Document) -> Result<Vec<NodeSpan>> {
    let len = doc.token_count();
    if tags.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            actual: tags.len(),
        });
    }
    let step_starts: BTreeSet<usize> = doc.step_ranges().iter().map(|r| r.start).collect();
    let mut spans: Vec<NodeSpan> = Vec::new();
    let mut open: Option<NodeSpan> = None;
    for (i, label) in tags.labels.iter().enumerate() {
        if step_starts.contains(&i) {
            spans.extend(open.take());
        }
        match *label {
            IobLabel::O => spans.extend(open.take()),
            IobLabel::B(tag) => {
                spans.extend(open.take());
                open = Some(NodeSpan::new(0, i, i, tag));
            }
            IobLabel::I(tag) => match open.as_mut() {
                Some(span) if span.tag == tag => span.end = i,
                _ => {
                    spans.extend(open.take());
                    open = Some(NodeSpan::new(0, i, i, tag));
                }
            },
        }
    }
    spans.extend(open);
    for (id, s) in spans.iter_mut().enumerate() {
        s.node_id = id;
    }
    Ok(spans)
}

/// All nodes with a directed path to `node`.
pub fn ancestors(g: &FlowGraph, node: usize) -> Result<BTreeSet<usize>> {
    let n = g.nodes.len();
    if node >= n {
        return Err(Error::UnknownNode(node));
    }
    let mut incoming = vec![Vec::new(); n];
    for e in &g.edges {
        if e.src < n && e.dst < n {
            incoming[e.dst].push(e.src);
        }
    }
    let mut seen = BTreeSet::new();
    let mut stack = vec![node];
    while let Some(v) = stack.pop() {
        for &u in &incoming[v] {
            if u != node && seen.insert(u) {
                stack.push(u);
            }
        }
    }
    Ok(seen)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(steps: &[&[&str]]) -> Document {
        Document::new(
            "d",
            "test",
            steps
                .iter()
                .map(|s| s.iter().map(|t| t.to_string()).collect())
                .collect(),
        )
        .unwrap()
    }

    fn graph(nodes: usize, edges: &[(usize, usize)]) -> FlowGraph {
        let words: Vec<&str> = vec!["w"; nodes.max(1)];
        let d = doc(&[&words]);
        FlowGraph::new(
            d,
            (0..nodes).map(|i| NodeSpan::new(i, i, i, Tag::C)).collect(),
            edges
                .iter()
                .map(|&(s, t)| Edge::new(s, t, EdgeLabel::Targ))
                .collect(),
        )
    }

    #[test]
    fn token_positions() {
        let d = doc(&[&["Heat", "oil"], &["Cut", "the", "potatoes"]]);
        let t: Vec<_> = d.tokens().cloned().collect();
        assert_eq!(t[3].step_index, 1);
        assert_eq!(t[3].token_index, 1);
        assert_eq!(t[3].doc_offset, 3);
        assert_eq!(d.step_ranges(), vec![0..2, 2..5]);
    }

    #[test]
    fn document_rejects_bad_tokens() {
        assert!(Document::new("x", "d", vec![]).is_err());
        assert!(Document::new("x", "d", vec![vec![]]).is_err());
        assert!(Document::new("x", "d", vec![vec!["a\nb".into()]]).is_err());
        assert!(Document::new("x", "d", vec![vec!["".into()]]).is_err());
    }

    #[test]
    fn closed_sets() {
        assert_eq!("Ae2".parse::<Tag>().unwrap(), Tag::Ae2);
        assert!("X".parse::<Tag>().is_err());
        assert_eq!("T-part-of".parse::<EdgeLabel>().unwrap(), EdgeLabel::TPartOf);
        assert!("Targ2".parse::<EdgeLabel>().is_err());
        assert_eq!(IobLabel::COUNT, 21);
        for (i, l) in IobLabel::all().enumerate() {
            assert_eq!(l.index(), i);
            assert_eq!(l.to_string().parse::<IobLabel>().unwrap(), l);
        }
    }

    #[test]
    fn minimal_graph_is_valid() {
        let r = graph(2, &[(0, 1)]).validate();
        assert!(r.is_valid());
        assert!(r.is_complete());
    }

    #[test]
    fn two_cycle() {
        let r = graph(2, &[(0, 1), (1, 0)]).validate();
        let cycles: Vec<_> = r
            .violations
            .iter()
            .filter(|v| matches!(v, Violation::Cycle { .. }))
            .collect();
        assert_eq!(cycles.len(), 1);
    }

    #[test]
    fn multi_head() {
        let r = graph(3, &[(0, 1), (0, 2)]).validate();
        assert_eq!(
            r.violations,
            vec![Violation::MultiHead {
                node: 0,
                edges: vec![0, 1]
            }]
        );
    }

    #[test]
    fn incomplete_is_a_notice() {
        let r = graph(3, &[(0, 2)]).validate();
        assert!(r.is_valid());
        assert_eq!(r.notices, vec![Notice::Incomplete { roots: vec![1, 2] }]);
    }

    #[test]
    fn dangling_and_cross_step() {
        let d = doc(&[&["a", "b"], &["c"]]);
        let g = FlowGraph::new(
            d,
            vec![NodeSpan::new(0, 1, 2, Tag::C), NodeSpan::new(1, 0, 0, Tag::Ae)],
            vec![Edge::new(0, 5, EdgeLabel::Targ)],
        );
        let r = g.validate();
        assert!(r.violations.contains(&Violation::CrossStep { node: 0 }));
        assert!(r.violations.contains(&Violation::DanglingEdge { edge: 0 }));
    }

    #[test]
    fn encode_examples() {
        let d = doc(&[&["a", "b", "c", "d"]]);
        let s = encode_iob(&[NodeSpan::new(0, 1, 2, Tag::C)], &d).unwrap();
        assert_eq!(s.to_string(), "O B-C I-C O");
        let d3 = doc(&[&["a", "b", "c"]]);
        assert_eq!(encode_iob(&[], &d3).unwrap().to_string(), "O O O");
        let s = encode_iob(
            &[NodeSpan::new(0, 0, 0, Tag::Ae), NodeSpan::new(1, 1, 2, Tag::C)],
            &d3,
        )
        .unwrap();
        assert_eq!(s.to_string(), "B-Ae B-C I-C");
        let err = encode_iob(
            &[NodeSpan::new(0, 0, 1, Tag::Ae), NodeSpan::new(1, 1, 2, Tag::C)],
            &d3,
        )
        .unwrap_err();
        assert!(matches!(err, Error::OverlappingSpans { first: 0, second: 1 }));
    }

    fn seq(s: &str) -> TagSequence {
        TagSequence::new(s.split(' ').map(|l| l.parse().unwrap()).collect())
    }

    #[test]
    fn decode_examples() {
        let d4 = doc(&[&["a", "b", "c", "d"]]);
        assert_eq!(
            decode_iob(&seq("O B-C I-C O"), &d4).unwrap(),
            vec![NodeSpan::new(0, 1, 2, Tag::C)]
        );
        let d2 = doc(&[&["a", "b"]]);
        assert_eq!(
            decode_iob(&seq("I-C O"), &d2).unwrap(),
            vec![NodeSpan::new(0, 0, 0, Tag::C)]
        );
        assert_eq!(
            decode_iob(&seq("B-Ae I-C"), &d2).unwrap(),
            vec![NodeSpan::new(0, 0, 0, Tag::Ae), NodeSpan::new(1, 1, 1, Tag::C)]
        );
        assert!(matches!(
            decode_iob(&seq("O"), &d2),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn decode_splits_at_step_boundary() {
        let d = doc(&[&["a", "b"], &["c"]]);
        assert_eq!(
            decode_iob(&seq("O B-C I-C"), &d).unwrap(),
            vec![NodeSpan::new(0, 1, 1, Tag::C), NodeSpan::new(1, 2, 2, Tag::C)]
        );
    }

    #[test]
    fn ancestor_examples() {
        let chain = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(ancestors(&chain, 2).unwrap(), BTreeSet::from([0, 1]));
        assert!(ancestors(&chain, 0).unwrap().is_empty());
        let diamond = graph(4, &[(0, 2), (1, 2), (2, 3)]);
        assert_eq!(ancestors(&diamond, 3).unwrap(), BTreeSet::from([0, 1, 2]));
        assert!(matches!(ancestors(&chain, 7), Err(Error::UnknownNode(7))));
    }
}
