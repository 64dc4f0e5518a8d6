use std::collections::BTreeSet;

use proptest::prelude::*;

use procflow::corpus::{graph_from_line, graph_to_line};
use procflow::graph::{
    ancestors, decode_iob, encode_iob, Document, Edge, EdgeLabel, FlowGraph, NodeSpan, Tag,
    Violation,
};

/// Step lengths plus, per token, whether a span starts there, its length
/// and its tag index.
fn arb_document() -> impl Strategy<Value = (Vec<usize>, Vec<(bool, usize, usize)>)> {
    prop::collection::vec(1usize..6, 1..5).prop_flat_map(|steps| {
        let tokens: usize = steps.iter().sum();
        (
            Just(steps),
            prop::collection::vec((any::<bool>(), 1usize..4, 0..Tag::ALL.len()), tokens),
        )
    })
}

fn build(steps: &[usize], marks: &[(bool, usize, usize)]) -> (Document, Vec<NodeSpan>) {
    let texts: Vec<Vec<String>> = steps
        .iter()
        .map(|&len| (0..len).map(|i| format!("w{i}")).collect())
        .collect();
    let doc = Document::new("p", "test", texts).unwrap();
    let mut nodes = Vec::new();
    for range in doc.step_ranges() {
        let mut pos = range.start;
        while pos < range.end {
            let (start, len, tag) = marks[pos];
            if start {
                let end = (pos + len).min(range.end) - 1;
                nodes.push(NodeSpan::new(nodes.len(), pos, end, Tag::ALL[tag]));
                pos = end + 1;
            } else {
                pos += 1;
            }
        }
    }
    (doc, nodes)
}

/// One-token nodes on a single step with arbitrary edges among them.
fn small_graph(n: usize, edges: &[(usize, usize)]) -> FlowGraph {
    let doc = Document::new("g", "test", vec![(0..n.max(1)).map(|i| format!("t{i}")).collect()])
        .unwrap();
    let nodes = (0..n).map(|i| NodeSpan::new(i, i, i, Tag::C)).collect();
    let edges = edges
        .iter()
        .map(|&(s, d)| Edge::new(s, d, EdgeLabel::Targ))
        .collect();
    FlowGraph::new(doc, nodes, edges)
}

fn arb_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1usize..7).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 0..9)))
}

/// `reach[a][b]`: a path of length >= 1 from a to b.
fn closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut reach = vec![vec![false; n]; n];
    for &(s, d) in edges {
        reach[s][d] = true;
    }
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                reach[a][b] |= reach[a][k] && reach[k][b];
            }
        }
    }
    reach
}

proptest! {
    #[test]
    fn iob_round_trip((steps, marks) in arb_document()) {
        let (doc, nodes) = build(&steps, &marks);
        let tags = encode_iob(&nodes, &doc).unwrap();
        prop_assert_eq!(tags.len(), doc.token_count());
        prop_assert_eq!(decode_iob(&tags, &doc).unwrap(), nodes);
    }

    #[test]
    fn corpus_line_round_trip((steps, marks) in arb_document(), seed in any::<u64>()) {
        let (doc, nodes) = build(&steps, &marks);
        let n = nodes.len();
        let edges: Vec<Edge> = (0..n.saturating_sub(1))
            .map(|u| {
                let label = EdgeLabel::ALL[(seed as usize + u) % EdgeLabel::COUNT];
                Edge::new(u, u + 1 + (seed as usize >> u) % (n - u - 1), label)
            })
            .collect();
        let g = FlowGraph::new(doc, nodes, edges);
        let line = graph_to_line(&g);
        let back = graph_from_line(&line).unwrap();
        prop_assert_eq!(graph_to_line(&back), line);
        prop_assert_eq!(back, g);
    }

    #[test]
    fn validation_matches_brute_force((n, edges) in arb_graph()) {
        let g = small_graph(n, &edges);
        let report = g.validate();
        let reach = closure(n, &edges);

        let self_loops = edges.iter().filter(|(s, d)| s == d).count();
        let reported_loops = report
            .violations
            .iter()
            .filter(|v| matches!(v, Violation::SelfLoop { .. }))
            .count();
        prop_assert_eq!(reported_loops, self_loops);

        for u in 0..n {
            let out = edges.iter().filter(|(s, _)| *s == u).count();
            let flagged = report
                .violations
                .iter()
                .any(|v| matches!(v, Violation::MultiHead { node, .. } if *node == u));
            prop_assert_eq!(flagged, out > 1);
        }

        // Nodes on a cycle of length >= 2.
        let on_cycle: BTreeSet<usize> = (0..n)
            .filter(|&u| (0..n).any(|v| v != u && reach[u][v] && reach[v][u]))
            .collect();
        let reported: BTreeSet<usize> = report
            .violations
            .iter()
            .filter_map(|v| match v {
                Violation::Cycle { nodes } => Some(nodes.clone()),
                _ => None,
            })
            .flatten()
            .collect();
        prop_assert_eq!(reported, on_cycle);

        let sinks = (0..n).filter(|&u| !edges.iter().any(|(s, _)| *s == u)).count();
        prop_assert_eq!(report.is_complete(), sinks <= 1);
    }

    #[test]
    fn ancestors_match_closure((n, edges) in arb_graph()) {
        let g = small_graph(n, &edges);
        let reach = closure(n, &edges);
        for v in 0..n {
            let expected: BTreeSet<usize> = (0..n).filter(|&u| u != v && reach[u][v]).collect();
            prop_assert_eq!(ancestors(&g, v).unwrap(), expected);
        }
    }
}
