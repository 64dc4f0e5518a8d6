//! Full prediction: nodes from the tagger (or the input), then edges.

use rayon::prelude::*;

use crate::error::Result;
use crate::graph::FlowGraph;
use crate::parser::EdgeParser;
use crate::tagger::NodeTagger;

/// Predicts a graph for every input document, ignoring gold edges. With no
/// tagger the input nodes are kept and only edges are predicted.
pub fn predict_corpus(
    tagger: Option<&NodeTagger>,
    parser: &EdgeParser,
    graphs: &[FlowGraph],
) -> Result<Vec<FlowGraph>> {
    graphs
        .par_iter()
        .map(|g| {
            let nodes = match tagger {
                Some(t) => t.predict_nodes(&g.document),
                None => g.nodes.clone(),
            };
            parser.predict_graph(&g.document, nodes)
        })
        .collect()
}
