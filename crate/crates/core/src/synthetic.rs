//! Random flow graphs from a small procedural grammar, used as fixtures.
//!
//! Every domain shares the same structure and function words ("the",
//! "with", "into", "of", "for", "minutes", numbers, "."); only the content
//! vocabulary (actions, components, tools, units) differs. Each generated
//! graph is a complete single-head DAG whose sink is the last step's action.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Document, Edge, EdgeLabel, FlowGraph, NodeSpan, Tag};

#[derive(Clone, Debug)]
pub struct SyntheticDomain {
    pub name: String,
    pub actions: Vec<String>,
    pub components: Vec<String>,
    pub tools: Vec<String>,
    pub units: Vec<String>,
    pub min_steps: usize,
    pub max_steps: usize,
    /// Probability that a step's action flows into the immediately next step.
    pub next_step_flow: f64,
}

fn words(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

impl SyntheticDomain {
    pub fn cooking() -> Self {
        SyntheticDomain {
            name: "cooking".into(),
            actions: words(&[
                "chop", "boil", "stir", "bake", "slice", "mix", "fry", "peel", "whisk", "simmer",
                "grate", "season", "roast", "drain", "knead", "melt", "pour", "toss", "mash",
                "dice",
            ]),
            components: words(&[
                "potatoes", "onion", "garlic", "flour", "butter", "sugar", "olive oil", "eggs",
                "milk", "carrots", "rice", "chicken", "beef", "tomatoes", "salt", "pepper",
                "cream", "cheese", "pasta", "lemon", "brown sugar", "honey", "yeast", "basil",
                "spinach", "beans", "corn", "mushrooms", "apples", "dough", "broth", "vinegar",
                "sour cream", "bacon", "peas", "oats", "ginger", "celery", "squash", "noodles",
            ]),
            tools: words(&[
                "pan", "pot", "bowl", "oven", "knife", "skillet", "spatula", "colander",
                "saucepan", "baking sheet", "blender", "ladle", "tray", "cutting board",
                "griddle",
            ]),
            units: words(&["cups", "tablespoons", "teaspoons", "grams", "ounces"]),
            min_steps: 3,
            max_steps: 7,
            next_step_flow: 0.7,
        }
    }

    pub fn crafts() -> Self {
        SyntheticDomain {
            name: "crafts".into(),
            actions: words(&[
                "fold", "glue", "tape", "paint", "sand", "staple", "trim", "cut", "stitch", "sew",
                "weave", "knot", "punch", "stamp", "varnish", "polish", "drill", "wrap", "braid",
                "emboss",
            ]),
            components: words(&[
                "cardboard", "paper", "ribbon", "duct tape", "fabric", "yarn", "beads", "wire",
                "felt", "glitter", "twine", "canvas", "tissue paper", "buttons", "lace", "foam",
                "leather", "clay", "wax", "soap", "craft sticks", "cork", "mesh", "sequins",
                "plywood", "cotton", "burlap", "velvet", "string", "contact paper",
                "pipe cleaners", "glaze", "resin", "stencil", "denim", "linen", "feathers",
                "tulle", "pebbles", "shells",
            ]),
            tools: words(&[
                "scissors", "brush", "needle", "stapler", "hot glue gun", "ruler", "sponge",
                "box cutter", "pliers", "hole punch", "mold", "frame", "hammer", "clamp",
                "easel",
            ]),
            units: words(&["sheets", "inches", "strips", "yards", "pieces"]),
            min_steps: 3,
            max_steps: 7,
            next_step_flow: 0.7,
        }
    }
}

#[derive(Default)]
struct Builder {
    steps: Vec<Vec<String>>,
    offset: usize,
    nodes: Vec<NodeSpan>,
    edges: Vec<Edge>,
}

impl Builder {
    fn word(&mut self, step: &mut Vec<String>, w: &str) {
        step.push(w.to_owned());
        self.offset += 1;
    }

    /// Appends a possibly multi-word phrase as one node and returns its id.
    fn node(&mut self, step: &mut Vec<String>, phrase: &str, tag: Tag) -> usize {
        let start = self.offset;
        for w in phrase.split(' ') {
            self.word(step, w);
        }
        let id = self.nodes.len();
        self.nodes.push(NodeSpan::new(id, start, self.offset - 1, tag));
        id
    }
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

pub fn generate_graph(domain: &SyntheticDomain, id: &str, rng: &mut impl Rng) -> FlowGraph {
    let step_count = rng.gen_range(domain.min_steps..=domain.max_steps.max(domain.min_steps));
    let mut b = Builder::default();
    let mut actions = Vec::with_capacity(step_count);
    let mut uses_previous = vec![false; step_count];

    for k in 0..step_count {
        let mut step = Vec::new();
        let verb = capitalize(domain.actions.choose(rng).unwrap());
        let action = b.node(&mut step, &verb, Tag::Ae);
        actions.push(action);

        let object = if k > 0 { rng.gen_range(0..4) } else { rng.gen_range(0..3) };
        match object {
            0 | 1 => {
                b.word(&mut step, "the");
                let c = b.node(&mut step, domain.components.choose(rng).unwrap(), Tag::C);
                b.edges.push(Edge::new(c, action, EdgeLabel::Targ));
            }
            2 => {
                let amount = format!(
                    "{} {}",
                    rng.gen_range(1..10),
                    domain.units.choose(rng).unwrap()
                );
                let q = b.node(&mut step, &amount, Tag::Q);
                b.word(&mut step, "of");
                let c = b.node(&mut step, domain.components.choose(rng).unwrap(), Tag::C);
                b.edges.push(Edge::new(q, c, EdgeLabel::OtherMod));
                b.edges.push(Edge::new(c, action, EdgeLabel::Targ));
            }
            _ => {
                b.word(&mut step, "it");
                uses_previous[k] = true;
            }
        }
        match rng.gen_range(0..4) {
            0 => {
                b.word(&mut step, "with");
                b.word(&mut step, "the");
                let t = b.node(&mut step, domain.tools.choose(rng).unwrap(), Tag::T);
                b.edges.push(Edge::new(t, action, EdgeLabel::TComp));
            }
            1 => {
                b.word(&mut step, "into");
                b.word(&mut step, "the");
                let t = b.node(&mut step, domain.tools.choose(rng).unwrap(), Tag::T);
                b.edges.push(Edge::new(t, action, EdgeLabel::Dest));
            }
            2 => {
                b.word(&mut step, "for");
                let span = format!("{} minutes", rng.gen_range(1..10));
                let d = b.node(&mut step, &span, Tag::D);
                b.edges.push(Edge::new(d, action, EdgeLabel::OtherMod));
            }
            _ => {}
        }
        b.word(&mut step, ".");
        b.steps.push(step);
    }

    for k in 0..step_count.saturating_sub(1) {
        let dst = if uses_previous[k + 1] || rng.gen_bool(domain.next_step_flow) {
            k + 1
        } else {
            rng.gen_range(k + 1..step_count)
        };
        b.edges
            .push(Edge::new(actions[k], actions[dst], EdgeLabel::Targ));
    }

    let document = Document::new(id, domain.name.clone(), b.steps).expect("grammar emits tokens");
    FlowGraph::new(document, b.nodes, b.edges)
}

/// `count` graphs with ids `<domain>-000`, `<domain>-001`, ...
pub fn generate_corpus(domain: &SyntheticDomain, count: usize, seed: u64) -> Vec<FlowGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| generate_graph(domain, &format!("{}-{i:03}", domain.name), &mut rng))
        .collect()
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    #[test]
    fn generated_graphs_are_complete() {
        for g in generate_corpus(&SyntheticDomain::cooking(), 50, 1)
            .iter()
            .chain(&generate_corpus(&SyntheticDomain::crafts(), 50, 2))
        {
            let r = g.validate();
            assert!(r.is_valid(), "{:?}", r.violations);
            assert!(r.is_complete());
            assert_eq!(g.edges.len() + 1, g.nodes.len());
        }
    }

    #[test]
    fn content_vocabularies_are_disjoint() {
        let vocab = |d: &SyntheticDomain| -> HashSet<String> {
            d.actions
                .iter()
                .chain(&d.components)
                .chain(&d.tools)
                .chain(&d.units)
                .flat_map(|p| p.split(' ').map(str::to_owned).collect::<Vec<_>>())
                .collect()
        };
        let a = vocab(&SyntheticDomain::cooking());
        let b = vocab(&SyntheticDomain::crafts());
        assert!(a.is_disjoint(&b), "{:?}", a.intersection(&b).collect::<Vec<_>>());
    }

    #[test]
    fn deterministic() {
        let d = SyntheticDomain::crafts();
        assert_eq!(generate_corpus(&d, 5, 3), generate_corpus(&d, 5, 3));
    }
}
