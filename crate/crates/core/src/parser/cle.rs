//! Maximum spanning arborescence decoding with ROOT as the sink.
//!
//! Arc matrices are `(n + 1) × (n + 1)` with row `u` holding the scores of
//! `u` flowing into each column; index `n` is the virtual ROOT. Every real
//! node receives exactly one destination and following destinations from
//! any node ends at ROOT.

use ndarray::{ArrayView2, ArrayView3};

use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeLabel};

/// Stand-in for minus infinity that keeps sums totally ordered.
pub const NEG_INF: f64 = -1e18;

/// Destination of a node. `Root` sorts after every real node, which makes
/// the lexicographic tie rule prefer real destinations of lower index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Head {
    Node(usize),
    Root,
}

impl Head {
    fn index(self, n: usize) -> usize {
        match self {
            Head::Node(v) => v,
            Head::Root => n,
        }
    }

    fn from_index(i: usize, n: usize) -> Head {
        if i == n {
            Head::Root
        } else {
            Head::Node(i)
        }
    }
}

fn real_count(arcs: ArrayView2<f64>) -> Result<usize> {
    let (rows, cols) = arcs.dim();
    if rows != cols || rows < 2 {
        return Err(Error::NoNodes);
    }
    Ok(rows - 1)
}

/// Sum of the chosen arc scores, accumulated in node order.
pub fn arborescence_score(arcs: ArrayView2<f64>, heads: &[Head]) -> f64 {
    let n = heads.len();
    heads
        .iter()
        .enumerate()
        .map(|(u, h)| arcs[[u, h.index(n)]])
        .sum()
}

/// True when every node reaches ROOT without revisiting a node.
pub fn is_arborescence(heads: &[Head]) -> bool {
    let n = heads.len();
    (0..n).all(|start| {
        let mut u = start;
        for _ in 0..=n {
            match heads[u] {
                Head::Root => return true,
                Head::Node(v) if v < n && v != u => u = v,
                Head::Node(_) => return false,
            }
        }
        false
    })
}

/// Maximum-score arborescence. Among optimal arborescences the smallest
/// head vector in lexicographic order is returned.
pub fn cle_decode(arcs: ArrayView2<f64>) -> Result<Vec<Head>> {
    let n = real_count(arcs)?;
    let mut scores: Vec<Vec<f64>> = arcs.outer_iter().map(|r| r.to_vec()).collect();
    for (u, row) in scores.iter_mut().enumerate() {
        if u < n {
            row[u] = NEG_INF;
        }
    }
    let best = to_heads(&chu_liu_edmonds(&scores, n), n);
    let target = arborescence_score(arcs, &best);

    // Lower each node's destination in turn while the optimum is kept.
    let mut current = best;
    for u in 0..n {
        let chosen = current[u].index(n);
        for h in 0..chosen {
            if h == u || scores[u][h] <= NEG_INF {
                continue;
            }
            let saved = std::mem::replace(&mut scores[u], vec![NEG_INF; n + 1]);
            scores[u][h] = saved[h];
            let candidate = to_heads(&chu_liu_edmonds(&scores, n), n);
            let feasible = is_arborescence(&candidate)
                && candidate[u] == Head::Node(h)
                && candidate[..u] == current[..u];
            if feasible && arborescence_score(arcs, &candidate) >= target {
                current = candidate;
                break;
            }
            scores[u] = saved;
        }
        let keep = current[u].index(n);
        let value = scores[u][keep];
        scores[u] = vec![NEG_INF; n + 1];
        scores[u][keep] = value;
    }
    Ok(current)
}

fn to_heads(heads: &[usize], n: usize) -> Vec<Head> {
    heads[..n].iter().map(|&h| Head::from_index(h, n)).collect()
}

/// Recursive contraction over `scores[dependent][destination]`, with `root`
/// as the only node without a destination. Returns a destination per node;
/// the root's entry is meaningless.
fn chu_liu_edmonds(scores: &[Vec<f64>], root: usize) -> Vec<usize> {
    let m = scores.len();
    let mut heads = vec![root; m];
    for d in 0..m {
        if d == root {
            continue;
        }
        let mut best = f64::NEG_INFINITY;
        for h in 0..m {
            if h != d && scores[d][h] > best {
                best = scores[d][h];
                heads[d] = h;
            }
        }
    }
    let Some(cycle) = find_cycle(&heads, root) else {
        return heads;
    };

    let in_cycle: Vec<bool> = (0..m).map(|v| cycle.contains(&v)).collect();
    // Old index → contracted index; the cycle becomes the last new node.
    let mut map = vec![0; m];
    let mut back = Vec::new();
    for v in 0..m {
        if !in_cycle[v] {
            map[v] = back.len();
            back.push(v);
        }
    }
    let c = back.len();
    for &v in &cycle {
        map[v] = c;
    }
    let size = c + 1;
    // Pairs with no underlying arc stay at true minus infinity and are never
    // selected, since every node keeps a finite arc toward the root.
    let mut contracted = vec![vec![f64::NEG_INFINITY; size]; size];
    // Which original destination inside the cycle an outside node uses.
    let mut enter_dst = vec![vec![usize::MAX; size]; size];
    // Which cycle member leaves the cycle toward an outside destination.
    let mut leave_src = vec![usize::MAX; size];

    for d in (0..m).filter(|&d| d != root) {
        for h in (0..m).filter(|&h| h != d && !(in_cycle[d] && in_cycle[h])) {
            let (nd, nh) = (map[d], map[h]);
            let s = if in_cycle[d] {
                scores[d][h] - scores[d][heads[d]]
            } else {
                scores[d][h]
            };
            if s > contracted[nd][nh] {
                contracted[nd][nh] = s;
                if nd == c {
                    leave_src[nh] = d;
                } else {
                    enter_dst[nd][nh] = h;
                }
            }
        }
    }

    let sub = chu_liu_edmonds(&contracted, map[root]);
    let mut result = heads.clone();
    for (nd, &nh) in sub.iter().enumerate() {
        if nd == map[root] {
            continue;
        }
        if nd == c {
            let d = leave_src[nh];
            result[d] = back[nh];
        } else {
            let d = back[nd];
            result[d] = if nh == c { enter_dst[nd][nh] } else { back[nh] };
        }
    }
    result
}

fn find_cycle(heads: &[usize], root: usize) -> Option<Vec<usize>> {
    let m = heads.len();
    let mut color = vec![0u8; m];
    for start in 0..m {
        if color[start] != 0 || start == root {
            continue;
        }
        let mut path = Vec::new();
        let mut v = start;
        while v != root && color[v] == 0 {
            color[v] = 1;
            path.push(v);
            v = heads[v];
        }
        if v != root && color[v] == 1 {
            let pos = path.iter().position(|&x| x == v).unwrap();
            return Some(path[pos..].to_vec());
        }
        for p in path {
            color[p] = 2;
        }
    }
    None
}

/// Highest-scoring label per chosen arc, lowest index on ties. Arcs into
/// ROOT are dropped; endpoints are positions in the scored node list.
pub fn assign_labels(label_scores: ArrayView3<f64>, heads: &[Head]) -> Vec<Edge> {
    heads
        .iter()
        .enumerate()
        .filter_map(|(u, h)| match *h {
            Head::Root => None,
            Head::Node(v) => {
                let row = label_scores.slice(ndarray::s![u, v, ..]);
                let mut best = 0;
                for (l, &s) in row.iter().enumerate() {
                    if s > row[best] {
                        best = l;
                    }
                }
                Some(Edge::new(u, v, EdgeLabel::from_index(best).expect("label index")))
            }
        })
        .collect()
}

/// Labeled decoding. Labels are independent once the arcs are fixed, so
/// the best labeled arborescence is the best arborescence under
/// `arc[u][v] + max_l label[u][v][l]`, labeled by the per-arc argmax.
pub fn decode_labeled(
    arcs: ArrayView2<f64>,
    label_scores: ArrayView3<f64>,
) -> Result<(Vec<Head>, Vec<Edge>)> {
    let n = real_count(arcs)?;
    let mut combined = arcs.to_owned();
    for u in 0..n {
        for v in (0..n).filter(|&v| v != u) {
            let best = label_scores
                .slice(ndarray::s![u, v, ..])
                .iter()
                .fold(f64::NEG_INFINITY, |m, &s| m.max(s));
            combined[[u, v]] += best;
        }
    }
    let heads = cle_decode(combined.view())?;
    let edges = assign_labels(label_scores, &heads);
    Ok((heads, edges))
}

#[cfg(test)]
mod tests {
    use ndarray::{array, Array2, Array3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn matrix(n: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
        let mut a = Array2::from_shape_simple_fn((n + 1, n + 1), || rng.gen_range(-5.0..5.0));
        for v in 0..=n {
            a[[n, v]] = NEG_INF;
            a[[v, v]] = NEG_INF;
        }
        a
    }

    /// All arborescences in lexicographic head-vector order.
    fn all_arborescences(n: usize) -> Vec<Vec<Head>> {
        let mut out = Vec::new();
        let mut heads = vec![0usize; n];
        loop {
            let hv: Vec<Head> = heads.iter().map(|&h| Head::from_index(h, n)).collect();
            if heads.iter().enumerate().all(|(u, &h)| h != u) && is_arborescence(&hv) {
                out.push(hv);
            }
            let mut i = n;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                heads[i] += 1;
                if heads[i] <= n {
                    break;
                }
                heads[i] = 0;
            }
        }
    }

    #[test]
    fn chain_is_found() {
        let a = array![[NEG_INF, 5.0, 1.0], [0.0, NEG_INF, 5.0], [NEG_INF, NEG_INF, NEG_INF]];
        assert_eq!(cle_decode(a.view()).unwrap(), vec![Head::Node(1), Head::Root]);
    }

    #[test]
    fn equal_scores_give_smallest_vector() {
        let n = 4;
        let mut a = Array2::zeros((n + 1, n + 1));
        for v in 0..=n {
            a[[n, v]] = NEG_INF;
            a[[v, v]] = NEG_INF;
        }
        let expected = all_arborescences(n).into_iter().min().unwrap();
        assert_eq!(cle_decode(a.view()).unwrap(), expected);
        assert_eq!(expected, vec![Head::Node(1), Head::Node(2), Head::Node(3), Head::Root]);
    }

    #[test]
    fn empty_matrix_is_an_error() {
        assert!(matches!(cle_decode(Array2::zeros((1, 1)).view()), Err(Error::NoNodes)));
    }

    #[test]
    fn matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=5 {
            let trees = all_arborescences(n);
            for _ in 0..20 {
                let a = matrix(n, &mut rng);
                let heads = cle_decode(a.view()).unwrap();
                assert!(is_arborescence(&heads));
                let best = trees
                    .iter()
                    .map(|t| arborescence_score(a.view(), t))
                    .fold(f64::NEG_INFINITY, f64::max);
                assert_eq!(arborescence_score(a.view(), &heads), best);
            }
        }
    }

    #[test]
    fn integer_ties_resolve_lexicographically() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in 2..=4 {
            let trees = all_arborescences(n);
            for _ in 0..30 {
                let mut a = matrix(n, &mut rng);
                a.mapv_inplace(|v| if v <= NEG_INF { v } else { v.round().clamp(-1.0, 1.0) });
                let heads = cle_decode(a.view()).unwrap();
                let best = trees
                    .iter()
                    .map(|t| arborescence_score(a.view(), t))
                    .fold(f64::NEG_INFINITY, f64::max);
                let first = trees
                    .iter()
                    .find(|t| arborescence_score(a.view(), t) == best)
                    .unwrap();
                assert_eq!(&heads, first);
            }
        }
    }

    #[test]
    fn constant_shift_is_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = matrix(5, &mut rng);
            let shifted = a.mapv(|v| if v <= NEG_INF { v } else { v + 3.5 });
            assert_eq!(cle_decode(a.view()).unwrap(), cle_decode(shifted.view()).unwrap());
        }
    }

    #[test]
    fn label_ties_pick_index_zero() {
        let scores = Array3::zeros((3, 3, EdgeLabel::COUNT));
        let edges = assign_labels(scores.view(), &[Head::Node(1), Head::Root]);
        assert_eq!(edges, vec![Edge::new(0, 1, EdgeLabel::ALL[0])]);
        let mut scores = Array3::zeros((3, 3, EdgeLabel::COUNT));
        scores[[0, 1, 7]] = 1.0;
        assert_eq!(assign_labels(scores.view(), &[Head::Node(1), Head::Root])[0].label, EdgeLabel::ALL[7]);
    }

    #[test]
    fn label_scores_can_change_the_tree() {
        let arcs = array![[NEG_INF, 0.5, 1.0], [NEG_INF, NEG_INF, 0.0], [NEG_INF, NEG_INF, NEG_INF]];
        let mut labels = Array3::from_elem((3, 3, EdgeLabel::COUNT), -3.0);
        labels[[0, 1, 4]] = -0.1;
        labels.slice_mut(ndarray::s![.., 2, ..]).fill(0.0);
        assert_eq!(cle_decode(arcs.view()).unwrap(), vec![Head::Root, Head::Root]);
        let (heads, edges) = decode_labeled(arcs.view(), labels.view()).unwrap();
        assert_eq!(heads, vec![Head::Root, Head::Root]);
        labels[[0, 1, 4]] = 0.8;
        let (heads, edges2) = decode_labeled(arcs.view(), labels.view()).unwrap();
        assert_eq!(heads, vec![Head::Node(1), Head::Root]);
        assert!(edges.is_empty());
        assert_eq!(edges2, vec![Edge::new(0, 1, EdgeLabel::ALL[4])]);
    }
}
