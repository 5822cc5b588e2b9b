//! Splitting a diagram into pieces along approximate minimum bisections of
//! its crossing graph, and the tree that says how to glue them back.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::diagram::{CrossingId, Diagram, End, EndpointAllocator};
use crate::pairing::Label;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubdivideError {
    #[error("bisection needs at least 2 vertices")]
    TooSmall,
    #[error("2^{m} pieces requested but the diagram has only {crossings} crossings")]
    TooManyPieces { m: u32, crossings: usize },
    #[error("invalid gluing plan: {0}")]
    InvalidPlan(String),
}

/// Crossings as vertices, one edge per arc joining two crossings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossingGraph {
    pub vertices: Vec<CrossingId>,
    /// Edge multiset as `(low, high)` pairs; self-loops have `low == high`.
    pub edges: Vec<(CrossingId, CrossingId)>,
}

pub fn build_graph(d: &Diagram) -> CrossingGraph {
    let vertices: Vec<CrossingId> = d.crossing_ids().collect();
    let mut edges: Vec<(CrossingId, CrossingId)> = d
        .arcs()
        .iter()
        .filter_map(|a| match (a.tail, a.head) {
            (End::Slot { crossing: u, .. }, End::Slot { crossing: v, .. }) => Some((u.min(v), u.max(v))),
            _ => None,
        })
        .collect();
    edges.sort_unstable();
    CrossingGraph { vertices, edges }
}

impl CrossingGraph {
    pub fn degree(&self, v: CrossingId) -> usize {
        self.edges
            .iter()
            .map(|&(a, b)| (a == v) as usize + (b == v) as usize)
            .sum()
    }

    /// Subgraph induced by `keep`.
    pub fn induced(&self, keep: &BTreeSet<CrossingId>) -> CrossingGraph {
        CrossingGraph {
            vertices: self.vertices.iter().copied().filter(|v| keep.contains(v)).collect(),
            edges: self
                .edges
                .iter()
                .copied()
                .filter(|(a, b)| keep.contains(a) && keep.contains(b))
                .collect(),
        }
    }

    /// Number of edges with one end in `part` and the other outside it.
    pub fn cut_size(&self, part: &BTreeSet<CrossingId>) -> usize {
        self.edges
            .iter()
            .filter(|(a, b)| part.contains(a) != part.contains(b))
            .count()
    }
}

/// Dense weights between distinct vertices, indexed by vertex position.
struct Weights {
    n: usize,
    w: Vec<i64>,
}

impl Weights {
    fn new(g: &CrossingGraph) -> Self {
        let n = g.vertices.len();
        let mut w = vec![0; n * n];
        let idx = |v: CrossingId| g.vertices.binary_search(&v).expect("edge endpoint is a vertex");
        for &(a, b) in &g.edges {
            if a != b {
                let (i, j) = (idx(a), idx(b));
                w[i * n + j] += 1;
                w[j * n + i] += 1;
            }
        }
        Weights { n, w }
    }

    fn at(&self, i: usize, j: usize) -> i64 {
        self.w[i * self.n + j]
    }

    fn cut(&self, side: &[bool]) -> i64 {
        let mut c = 0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                if side[i] != side[j] {
                    c += self.at(i, j);
                }
            }
        }
        c
    }

    /// Kernighan-Lin passes until no pass improves the cut.
    fn refine(&self, side: &mut [bool]) {
        let n = self.n;
        for _ in 0..32 {
            let mut dval: Vec<i64> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if side[i] != side[j] {
                                self.at(i, j)
                            } else {
                                -self.at(i, j)
                            }
                        })
                        .sum()
                })
                .collect();
            let mut locked = vec![false; n];
            let mut swaps = Vec::new();
            let mut gains = Vec::new();
            loop {
                let mut best: Option<(i64, usize, usize)> = None;
                for a in (0..n).filter(|&a| side[a] && !locked[a]) {
                    for b in (0..n).filter(|&b| !side[b] && !locked[b]) {
                        let g = dval[a] + dval[b] - 2 * self.at(a, b);
                        if best.is_none_or(|(bg, _, _)| g > bg) {
                            best = Some((g, a, b));
                        }
                    }
                }
                let Some((g, a, b)) = best else { break };
                locked[a] = true;
                locked[b] = true;
                for i in (0..n).filter(|&i| !locked[i]) {
                    // Effect of moving a to the false side and b to the true side.
                    let sa = if side[i] { 2 } else { -2 };
                    dval[i] += sa * self.at(i, a) - sa * self.at(i, b);
                }
                swaps.push((a, b));
                gains.push(g);
            }
            let mut best_k = 0;
            let mut best_gain = 0;
            let mut acc = 0;
            for (k, g) in gains.iter().enumerate() {
                acc += g;
                if acc > best_gain {
                    best_gain = acc;
                    best_k = k + 1;
                }
            }
            if best_k == 0 {
                return;
            }
            for &(a, b) in &swaps[..best_k] {
                side[a] = false;
                side[b] = true;
            }
        }
    }
}

/// Splits the vertices into parts of sizes `ceil(n/2)` and `floor(n/2)`
/// with a small cut. Several starting partitions (a breadth-first region
/// grown from the lowest vertex, then seeded shuffles) are refined by
/// Kernighan-Lin; the smallest cut wins, the earliest on ties.
pub fn min_bisect(
    g: &CrossingGraph,
    seed: u64,
) -> Result<(BTreeSet<CrossingId>, BTreeSet<CrossingId>), SubdivideError> {
    let n = g.vertices.len();
    if n < 2 {
        return Err(SubdivideError::TooSmall);
    }
    let weights = Weights::new(g);
    let half = n.div_ceil(2);

    let mut adjacency: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (i, adj) in adjacency.iter_mut().enumerate() {
        adj.extend((0..n).filter(|&j| weights.at(i, j) > 0));
    }
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    for root in 0..n {
        if visited[root] {
            continue;
        }
        let mut queue = VecDeque::from([root]);
        visited[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &u in &adjacency[v] {
                if !visited[u] {
                    visited[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    let mut starts = vec![order];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..4 {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        starts.push(perm);
    }

    let mut best: Option<(i64, Vec<bool>)> = None;
    for start in starts {
        let mut side = vec![false; n];
        for &v in &start[..half] {
            side[v] = true;
        }
        weights.refine(&mut side);
        let c = weights.cut(&side);
        if best.as_ref().is_none_or(|(bc, _)| c < *bc) {
            best = Some((c, side));
        }
    }
    let (_, side) = best.expect("at least one candidate");
    let (mut a, mut b) = (BTreeSet::new(), BTreeSet::new());
    for (i, &s) in side.iter().enumerate() {
        if s {
            a.insert(g.vertices[i]);
        } else {
            b.insert(g.vertices[i]);
        }
    }
    Ok((a, b))
}

/// Shape of a gluing tree over piece indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Leaf(usize),
    Node(Box<Shape>, Box<Shape>),
}

impl Shape {
    pub fn node(left: Shape, right: Shape) -> Shape {
        Shape::Node(Box::new(left), Box::new(right))
    }

    fn leaves(&self, out: &mut Vec<usize>) {
        match self {
            Shape::Leaf(i) => out.push(*i),
            Shape::Node(l, r) => {
                l.leaves(out);
                r.leaves(out);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanNode {
    Leaf {
        piece: usize,
    },
    Internal {
        left: Box<PlanNode>,
        right: Box<PlanNode>,
        /// Transpositions joining the two subtrees (and closing loops
        /// within their union).
        transpositions: Vec<(Label, Label)>,
    },
}

impl PlanNode {
    pub fn depth(&self) -> usize {
        match self {
            PlanNode::Leaf { .. } => 0,
            PlanNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn collect_transpositions(&self, out: &mut Vec<(Label, Label)>) {
        if let PlanNode::Internal {
            left,
            right,
            transpositions,
        } = self
        {
            left.collect_transpositions(out);
            right.collect_transpositions(out);
            out.extend(transpositions);
        }
    }

    fn to_json(&self, pieces: &[Diagram]) -> serde_json::Value {
        match self {
            PlanNode::Leaf { piece } => json!({
                "piece": piece,
                "crossings": pieces[*piece].n_crossings(),
                "endpoints": pieces[*piece].endpoints(),
                "pd": pieces[*piece].to_pd().to_string(),
            }),
            PlanNode::Internal {
                left,
                right,
                transpositions,
            } => json!({
                "transpositions": transpositions,
                "left": left.to_json(pieces),
                "right": right.to_json(pieces),
            }),
        }
    }
}

/// Pieces and the binary tree that glues them back together.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluingPlan {
    pub root: PlanNode,
    pub pieces: Vec<Diagram>,
    /// Endpoints left open after all gluing.
    pub endpoints: Vec<Label>,
    /// Writhe of the whole diagram.
    pub writhe: i64,
}

impl GluingPlan {
    /// Attaches each transposition to the lowest node of `shape` whose
    /// subtree holds both of its labels.
    pub fn with_shape(
        pieces: Vec<Diagram>,
        transpositions: &[(Label, Label)],
        shape: &Shape,
    ) -> Result<Self, SubdivideError> {
        let mut leaves = Vec::new();
        shape.leaves(&mut leaves);
        let mut sorted = leaves.clone();
        sorted.sort_unstable();
        if sorted != (0..pieces.len()).collect::<Vec<_>>() {
            return Err(SubdivideError::InvalidPlan(
                "shape must use every piece exactly once".into(),
            ));
        }
        let mut owner: BTreeMap<Label, usize> = BTreeMap::new();
        for (i, p) in pieces.iter().enumerate() {
            for &l in p.endpoints() {
                if owner.insert(l, i).is_some() {
                    return Err(SubdivideError::InvalidPlan(format!("label {l} appears in two pieces")));
                }
            }
        }
        let mut used = BTreeSet::new();
        for &(x, y) in transpositions {
            for l in [x, y] {
                if !owner.contains_key(&l) {
                    return Err(SubdivideError::InvalidPlan(format!(
                        "label {l} is not an endpoint of any piece"
                    )));
                }
                if !used.insert(l) {
                    return Err(SubdivideError::InvalidPlan(format!("label {l} is glued twice")));
                }
            }
        }
        let mut pending: Vec<(Label, Label)> = transpositions.to_vec();
        let root = Self::place(shape, &owner, &mut pending)?;
        if let Some((x, y)) = pending.first() {
            return Err(SubdivideError::InvalidPlan(format!(
                "transposition ({x} {y}) lies within a single piece"
            )));
        }
        let endpoints = owner.keys().copied().filter(|l| !used.contains(l)).collect();
        let writhe = pieces.iter().map(Diagram::writhe).sum();
        Ok(GluingPlan {
            root,
            pieces,
            endpoints,
            writhe,
        })
    }

    fn place(
        shape: &Shape,
        owner: &BTreeMap<Label, usize>,
        pending: &mut Vec<(Label, Label)>,
    ) -> Result<PlanNode, SubdivideError> {
        match shape {
            Shape::Leaf(i) => Ok(PlanNode::Leaf { piece: *i }),
            Shape::Node(l, r) => {
                let left = Self::place(l, owner, pending)?;
                let right = Self::place(r, owner, pending)?;
                let mut inside = Vec::new();
                shape.leaves(&mut inside);
                let (here, rest): (Vec<_>, Vec<_>) = pending
                    .iter()
                    .partition(|(x, y)| inside.contains(&owner[x]) && inside.contains(&owner[y]));
                *pending = rest;
                Ok(PlanNode::Internal {
                    left: Box::new(left),
                    right: Box::new(right),
                    transpositions: here,
                })
            }
        }
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Every transposition in the tree.
    pub fn transpositions(&self) -> Vec<(Label, Label)> {
        let mut out = Vec::new();
        self.root.collect_transpositions(&mut out);
        out
    }

    /// Glues the pieces back into one diagram, ignoring polynomials.
    pub fn reassemble(&self) -> Result<Diagram, crate::diagram::DiagramError> {
        let refs: Vec<&Diagram> = self.pieces.iter().collect();
        Diagram::glue(&refs, &self.transpositions())
    }

    /// Debug dump: tree structure, per-leaf PD code and transpositions.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "depth": self.depth(),
            "writhe": self.writhe,
            "endpoints": self.endpoints,
            "tree": self.root.to_json(&self.pieces),
        })
    }
}

/// Recursively bisects `d` to depth `m`, giving `2^m` pieces of
/// `floor(n/2^m)` or `ceil(n/2^m)` crossings each. Crossingless components
/// travel with the first piece.
pub fn subdivide(d: &Diagram, m: u32, seed: u64) -> Result<GluingPlan, SubdivideError> {
    let n = d.n_crossings();
    let pieces_wanted = 1usize.checked_shl(m).unwrap_or(usize::MAX);
    if m >= usize::BITS || pieces_wanted > n.max(1) {
        return Err(SubdivideError::TooManyPieces { m, crossings: n });
    }
    let graph = build_graph(d);
    let mut parts: Vec<BTreeSet<CrossingId>> = Vec::new();
    let shape = split(&graph, graph.vertices.iter().copied().collect(), m, seed, &mut parts)?;

    let mut alloc = EndpointAllocator::for_diagram(d);
    let mut pieces = Vec::with_capacity(parts.len());
    let mut cuts = Vec::new();
    for (i, part) in parts.iter().enumerate() {
        let (piece, c) = d.split_piece(part, &mut alloc, i == 0);
        pieces.push(piece);
        cuts.extend(c);
    }
    cuts.sort_unstable();
    cuts.dedup();
    GluingPlan::with_shape(pieces, &cuts, &shape)
}

fn split(
    g: &CrossingGraph,
    set: BTreeSet<CrossingId>,
    m: u32,
    seed: u64,
    parts: &mut Vec<BTreeSet<CrossingId>>,
) -> Result<Shape, SubdivideError> {
    if m == 0 {
        parts.push(set);
        return Ok(Shape::Leaf(parts.len() - 1));
    }
    let (a, b) = min_bisect(&g.induced(&set), seed)?;
    let left = split(g, a, m - 1, seed, parts)?;
    let right = split(g, b, m - 1, seed, parts)?;
    Ok(Shape::node(left, right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::parse_pd;

    fn graph(n: u32, edges: &[(u32, u32)]) -> CrossingGraph {
        CrossingGraph {
            vertices: (1..=n).collect(),
            edges: edges.to_vec(),
        }
    }

    fn trefoil() -> Diagram {
        parse_pd("X 1 5 2 4\nX 3 1 4 6\nX 5 3 6 2").unwrap()
    }

    #[test]
    fn graphs() {
        let g = build_graph(&trefoil());
        assert_eq!(g.vertices.len(), 3);
        assert_eq!(g.edges.len(), 6);
        assert!(g.vertices.iter().all(|&v| g.degree(v) == 4));
        let g = build_graph(&parse_pd("X 1 2 3 4").unwrap());
        assert_eq!((g.vertices.len(), g.edges.len()), (1, 0));
        let g = build_graph(&Diagram::unlink(0));
        assert!(g.vertices.is_empty() && g.edges.is_empty());
    }

    #[test]
    fn bisection_examples() {
        let g = graph(2, &[]);
        let (a, _) = min_bisect(&g, 0).unwrap();
        assert_eq!(g.cut_size(&a), 0);

        let g = graph(4, &[(1, 2), (2, 3), (3, 4)]);
        let (a, b) = min_bisect(&g, 0).unwrap();
        assert_eq!(g.cut_size(&a), 1);
        assert_eq!((a.len(), b.len()), (2, 2));
        assert!(a == BTreeSet::from([1, 2]) || a == BTreeSet::from([3, 4]));

        let g = build_graph(&trefoil());
        let (a, b) = min_bisect(&g, 0).unwrap();
        assert_eq!((a.len(), b.len()), (2, 1));
        assert_eq!(g.cut_size(&a), 4);

        assert_eq!(min_bisect(&graph(1, &[]), 0), Err(SubdivideError::TooSmall));
    }

    #[test]
    fn self_loops_never_cut() {
        let g = graph(4, &[(1, 1), (1, 2), (2, 3), (3, 4), (4, 4)]);
        let (a, _) = min_bisect(&g, 3).unwrap();
        assert_eq!(g.cut_size(&a), 1);
    }

    #[test]
    fn trefoil_plans() {
        let t = trefoil();
        let p0 = subdivide(&t, 0, 0).unwrap();
        assert_eq!(p0.pieces, vec![t.clone()]);
        assert!(p0.transpositions().is_empty());

        let p1 = subdivide(&t, 1, 0).unwrap();
        let sizes: Vec<usize> = p1.pieces.iter().map(Diagram::n_crossings).collect();
        assert_eq!(sizes, vec![2, 1]);
        match &p1.root {
            PlanNode::Internal { transpositions, .. } => assert_eq!(transpositions.len(), 4),
            _ => panic!("expected an internal root"),
        }
        assert_eq!(p1.reassemble().unwrap(), t);
        assert_eq!(p1.writhe, 3);
        assert!(matches!(subdivide(&t, 2, 0), Err(SubdivideError::TooManyPieces { .. })));
    }

    #[test]
    fn plan_validation() {
        let d = parse_pd("X 1 2 3 4").unwrap();
        let err = GluingPlan::with_shape(vec![d.clone()], &[(1, 2)], &Shape::Leaf(0));
        assert!(matches!(err, Err(SubdivideError::InvalidPlan(_))));
        let err = GluingPlan::with_shape(vec![d], &[(1, 9)], &Shape::Leaf(0));
        assert!(matches!(err, Err(SubdivideError::InvalidPlan(_))));
    }

    #[test]
    fn json_dump_has_leaf_pd() {
        let p = subdivide(&trefoil(), 1, 0).unwrap();
        let j = p.to_json();
        assert_eq!(j["depth"], 1);
        assert!(j["tree"]["left"]["pd"].as_str().unwrap().contains('X'));
    }
}
