//! Link and linkoid diagrams.
//!
//! A diagram is a set of crossings joined by oriented arcs. Every arc end
//! sits either in a crossing slot or at a labelled open endpoint. Slots are
//! numbered 0..4 counterclockwise starting at the incoming under-strand, so
//! the under-strand always runs 0 -> 2 and the over-strand joins 1 and 3.
//! A crossing is positive when its over-strand runs 3 -> 1.

mod gauss;
mod pd;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::pairing::{Label, Pairing};

pub use gauss::parse_gauss;
pub use pd::{parse_pd, PdCode, PdItem};

pub type ArcId = u32;
pub type CrossingId = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("arc {arc} is used {count} times; interior arcs need exactly 2 ends")]
    InconsistentArc { arc: ArcId, count: usize },
    #[error("crossing {0} does not have exactly one over and one under passage with matching signs")]
    InconsistentCrossing(u32),
    #[error("orientation cannot be assigned consistently: {0}")]
    UnorientableDiagram(String),
    #[error("malformed diagram: {0}")]
    Malformed(String),
}

/// Where an arc end is attached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum End {
    Slot { crossing: CrossingId, slot: u8 },
    Open(Label),
}

impl End {
    pub fn crossing(&self) -> Option<CrossingId> {
        match self {
            End::Slot { crossing, .. } => Some(*crossing),
            End::Open(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Crossing {
    pub id: CrossingId,
    /// Arc labels in slot order.
    pub slots: [ArcId; 4],
    pub sign: Sign,
}

/// An oriented arc running from `tail` to `head`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Arc {
    pub id: ArcId,
    pub tail: End,
    pub head: End,
}

/// One connected component traced along its orientation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub arcs: Vec<ArcId>,
    /// `(foot, head)` labels for open components.
    pub ends: Option<(Label, Label)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagram {
    crossings: Vec<Crossing>,
    arcs: Vec<Arc>,
    endpoints: Vec<Label>,
    strand_permutation: Pairing,
    free_loops: usize,
}

impl Diagram {
    /// Validates oriented parts and derives crossing signs, endpoints and the
    /// strand permutation.
    pub fn from_oriented_parts(
        crossings: Vec<(CrossingId, [ArcId; 4])>,
        mut arcs: Vec<Arc>,
        free_loops: usize,
    ) -> Result<Self, DiagramError> {
        let mut slots: BTreeMap<CrossingId, [ArcId; 4]> = BTreeMap::new();
        for (id, s) in crossings {
            if slots.insert(id, s).is_some() {
                return Err(DiagramError::Malformed(format!("duplicate crossing id {id}")));
            }
        }
        arcs.sort_by_key(|a| a.id);
        if let Some(w) = arcs.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(DiagramError::Malformed(format!("duplicate arc id {}", w[0].id)));
        }

        // (crossing, slot) -> incoming?
        let mut occupied: HashMap<(CrossingId, u8), bool> = HashMap::new();
        let mut endpoints = Vec::new();
        for arc in &arcs {
            for (end, incoming) in [(arc.tail, false), (arc.head, true)] {
                match end {
                    End::Open(l) => endpoints.push(l),
                    End::Slot { crossing, slot } => {
                        let s = slots.get(&crossing).ok_or_else(|| {
                            DiagramError::Malformed(format!("arc {} ends at unknown crossing {crossing}", arc.id))
                        })?;
                        if slot > 3 || s[slot as usize] != arc.id {
                            return Err(DiagramError::Malformed(format!(
                                "arc {} is not listed in slot {slot} of crossing {crossing}",
                                arc.id
                            )));
                        }
                        if occupied.insert((crossing, slot), incoming).is_some() {
                            return Err(DiagramError::InconsistentArc { arc: arc.id, count: 3 });
                        }
                    }
                }
            }
        }
        endpoints.sort_unstable();
        if let Some(w) = endpoints.windows(2).find(|w| w[0] == w[1]) {
            return Err(DiagramError::Malformed(format!("endpoint label {} used twice", w[0])));
        }

        let mut out = Vec::with_capacity(slots.len());
        for (id, s) in slots {
            let inc = |k: u8| {
                occupied.get(&(id, k)).copied().ok_or(DiagramError::InconsistentArc {
                    arc: s[k as usize],
                    count: 1,
                })
            };
            let (a, b, c, d) = (inc(0)?, inc(1)?, inc(2)?, inc(3)?);
            if !a || c {
                return Err(DiagramError::UnorientableDiagram(format!(
                    "under-strand of crossing {id} does not run from slot 0 to slot 2"
                )));
            }
            if b == d {
                return Err(DiagramError::UnorientableDiagram(format!(
                    "over-strand of crossing {id} is not traversed in one direction"
                )));
            }
            let sign = if d { Sign::Positive } else { Sign::Negative };
            out.push(Crossing { id, slots: s, sign });
        }

        let mut diagram = Diagram {
            crossings: out,
            arcs,
            endpoints,
            strand_permutation: Pairing::empty(),
            free_loops,
        };
        let pairs: Vec<(Label, Label)> = diagram.components().into_iter().filter_map(|c| c.ends).collect();
        diagram.strand_permutation = Pairing::new(pairs).map_err(|e| DiagramError::Malformed(e.to_string()))?;
        Ok(diagram)
    }

    /// The crossingless diagram made of `loops` free circles.
    pub fn unlink(loops: usize) -> Self {
        Diagram {
            crossings: Vec::new(),
            arcs: Vec::new(),
            endpoints: Vec::new(),
            strand_permutation: Pairing::empty(),
            free_loops: loops,
        }
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn crossing(&self, id: CrossingId) -> Option<&Crossing> {
        self.crossings
            .binary_search_by_key(&id, |c| c.id)
            .ok()
            .map(|i| &self.crossings[i])
    }

    pub fn crossing_ids(&self) -> impl Iterator<Item = CrossingId> + '_ {
        self.crossings.iter().map(|c| c.id)
    }

    pub fn n_crossings(&self) -> usize {
        self.crossings.len()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: ArcId) -> Option<&Arc> {
        self.arcs
            .binary_search_by_key(&id, |a| a.id)
            .ok()
            .map(|i| &self.arcs[i])
    }

    /// Open endpoint labels, ascending.
    pub fn endpoints(&self) -> &[Label] {
        &self.endpoints
    }

    pub fn is_closed(&self) -> bool {
        self.endpoints.is_empty()
    }

    pub fn strand_permutation(&self) -> &Pairing {
        &self.strand_permutation
    }

    /// Crossingless closed components.
    pub fn free_loops(&self) -> usize {
        self.free_loops
    }

    pub fn writhe(&self) -> i64 {
        self.crossings.iter().map(|c| c.sign.value()).sum()
    }

    /// Components in order: open ones by foot label, then closed ones by
    /// their smallest arc id. Free loops are not listed.
    pub fn components(&self) -> Vec<Component> {
        let by_tail: HashMap<End, usize> = self.arcs.iter().enumerate().map(|(i, a)| (a.tail, i)).collect();
        let next = |i: usize| -> Option<usize> {
            match self.arcs[i].head {
                End::Open(_) => None,
                End::Slot { crossing, slot } => by_tail
                    .get(&End::Slot {
                        crossing,
                        slot: (slot + 2) % 4,
                    })
                    .copied(),
            }
        };
        let mut seen = vec![false; self.arcs.len()];
        let mut out = Vec::new();
        let mut feet: Vec<(Label, usize)> = self
            .arcs
            .iter()
            .enumerate()
            .filter_map(|(i, a)| match a.tail {
                End::Open(l) => Some((l, i)),
                _ => None,
            })
            .collect();
        feet.sort_unstable();
        for (foot, start) in feet {
            let mut arcs = Vec::new();
            let mut cur = start;
            loop {
                seen[cur] = true;
                arcs.push(self.arcs[cur].id);
                match next(cur) {
                    Some(n) => cur = n,
                    None => break,
                }
            }
            let head = match self.arcs[cur].head {
                End::Open(l) => l,
                End::Slot { .. } => unreachable!("open walk ends at an endpoint"),
            };
            out.push(Component {
                arcs,
                ends: Some((foot, head)),
            });
        }
        for start in 0..self.arcs.len() {
            if seen[start] {
                continue;
            }
            let mut arcs = Vec::new();
            let mut cur = start;
            while !seen[cur] {
                seen[cur] = true;
                arcs.push(self.arcs[cur].id);
                cur = next(cur).expect("closed components have no open ends");
            }
            out.push(Component { arcs, ends: None });
        }
        out
    }

    /// Switches every crossing: the over-strand becomes the under-strand.
    pub fn mirror(&self) -> Diagram {
        // Positive: [a,b,c,d] -> [d,a,b,c]; negative: [a,b,c,d] -> [b,c,d,a].
        let shift: HashMap<CrossingId, u8> = self
            .crossings
            .iter()
            .map(|c| (c.id, if c.sign == Sign::Positive { 1 } else { 3 }))
            .collect();
        let remap = |e: End| match e {
            End::Slot { crossing, slot } => End::Slot {
                crossing,
                slot: (slot + shift[&crossing]) % 4,
            },
            open => open,
        };
        let crossings = self
            .crossings
            .iter()
            .map(|c| {
                let k = shift[&c.id] as usize;
                let mut s = [0; 4];
                for (old, arc) in c.slots.iter().enumerate() {
                    s[(old + k) % 4] = *arc;
                }
                (c.id, s)
            })
            .collect();
        let arcs = self
            .arcs
            .iter()
            .map(|a| Arc {
                id: a.id,
                tail: remap(a.tail),
                head: remap(a.head),
            })
            .collect();
        Diagram::from_oriented_parts(crossings, arcs, self.free_loops).expect("mirroring preserves validity")
    }

    /// The sub-diagram induced by `subset`.
    ///
    /// Arcs joining a crossing inside the subset to one outside are cut once;
    /// the two new ends get labels from `alloc` (shared between the two sides
    /// of a split so both agree), and the pair is returned as a transposition
    /// of the gluing permutation. Crossingless components (free strands and
    /// loops) are kept only when `keep_free` is set.
    pub fn split_piece(
        &self,
        subset: &BTreeSet<CrossingId>,
        alloc: &mut EndpointAllocator,
        keep_free: bool,
    ) -> (Diagram, Vec<(Label, Label)>) {
        let inside = |e: &End| matches!(e.crossing(), Some(c) if subset.contains(&c));
        let mut arcs = Vec::new();
        let mut cuts = Vec::new();
        for a in &self.arcs {
            let (t_in, h_in) = (inside(&a.tail), inside(&a.head));
            let t_open = matches!(a.tail, End::Open(_));
            let h_open = matches!(a.head, End::Open(_));
            match (t_in, h_in) {
                (true, true) => arcs.push(*a),
                (true, false) if h_open => arcs.push(*a),
                (false, true) if t_open => arcs.push(*a),
                (true, false) => {
                    let (x, y) = alloc.cut(a.id);
                    cuts.push((x, y));
                    arcs.push(Arc {
                        id: a.id,
                        tail: a.tail,
                        head: End::Open(x),
                    });
                }
                (false, true) => {
                    let (x, y) = alloc.cut(a.id);
                    cuts.push((x, y));
                    arcs.push(Arc {
                        id: a.id,
                        tail: End::Open(y),
                        head: a.head,
                    });
                }
                (false, false) => {
                    if keep_free && t_open && h_open {
                        arcs.push(*a);
                    }
                }
            }
        }
        let crossings = self
            .crossings
            .iter()
            .filter(|c| subset.contains(&c.id))
            .map(|c| (c.id, c.slots))
            .collect();
        let loops = if keep_free { self.free_loops } else { 0 };
        let piece =
            Diagram::from_oriented_parts(crossings, arcs, loops).expect("sub-diagram of a valid diagram is valid");
        (piece, cuts)
    }

    /// Glues diagrams along transpositions `(x, y)` joining an arc ending at
    /// `Open(x)` with one starting at `Open(y)` (either order). Halves of a
    /// cut arc share its id, so the glued arc keeps that id.
    pub fn glue(pieces: &[&Diagram], transpositions: &[(Label, Label)]) -> Result<Diagram, DiagramError> {
        let mut crossings = Vec::new();
        let mut arcs: Vec<Arc> = Vec::new();
        let mut loops = 0;
        for p in pieces {
            crossings.extend(p.crossings.iter().map(|c| (c.id, c.slots)));
            arcs.extend(p.arcs.iter().copied());
            loops += p.free_loops;
        }
        let partner: HashMap<Label, Label> = transpositions.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
        // Union arcs through glued endpoints; arcs form chains and cycles.
        let by_tail_open: HashMap<Label, usize> = arcs
            .iter()
            .enumerate()
            .filter_map(|(i, a)| match a.tail {
                End::Open(l) => Some((l, i)),
                _ => None,
            })
            .collect();
        let mut used = vec![false; arcs.len()];
        let mut merged = Vec::new();
        // Chains start at arcs whose tail is not glued.
        let starts: Vec<usize> = (0..arcs.len())
            .filter(|&i| match arcs[i].tail {
                End::Open(l) => !partner.contains_key(&l),
                End::Slot { .. } => true,
            })
            .collect();
        for s in starts {
            let tail = arcs[s].tail;
            let id = arcs[s].id;
            let mut cur = s;
            used[cur] = true;
            loop {
                match arcs[cur].head {
                    End::Open(l) if partner.contains_key(&l) => {
                        let nxt = *by_tail_open.get(&partner[&l]).ok_or_else(|| {
                            DiagramError::UnorientableDiagram(format!(
                                "gluing {l} to {} reverses a strand",
                                partner[&l]
                            ))
                        })?;
                        if used[nxt] {
                            return Err(DiagramError::Malformed("gluing cycle through a slot".into()));
                        }
                        used[nxt] = true;
                        cur = nxt;
                    }
                    head => {
                        merged.push(Arc { id, tail, head });
                        break;
                    }
                }
            }
        }
        // Remaining arcs close up into crossingless loops.
        for i in 0..arcs.len() {
            if used[i] {
                continue;
            }
            let mut cur = i;
            while !used[cur] {
                used[cur] = true;
                if let End::Open(l) = arcs[cur].head {
                    if let Some(n) = partner.get(&l).and_then(|p| by_tail_open.get(p)) {
                        cur = *n;
                        continue;
                    }
                }
                return Err(DiagramError::Malformed("unterminated glued chain".into()));
            }
            loops += 1;
        }
        // A merged arc keeps the id of its first segment; relabel the slot
        // at its head in case the last segment had a different id.
        let index: HashMap<CrossingId, usize> = crossings.iter().enumerate().map(|(i, c)| (c.0, i)).collect();
        for a in &merged {
            if let End::Slot { crossing, slot } = a.head {
                let i = *index
                    .get(&crossing)
                    .ok_or(DiagramError::InconsistentCrossing(crossing))?;
                crossings[i].1[slot as usize] = a.id;
            }
        }
        Diagram::from_oriented_parts(crossings, merged, loops)
    }
}

/// Slot order of a crossing from planar strand directions. Each strand is
/// given as `(incoming arc, outgoing arc, direction)`.
pub fn slots_from_directions(under: (ArcId, ArcId, [f64; 2]), over: (ArcId, ArcId, [f64; 2])) -> [ArcId; 4] {
    let (ui, uo, u) = under;
    let (oi, oo, o) = over;
    if over_out_slot(u, o) == 1 {
        [ui, oo, uo, oi]
    } else {
        [ui, oi, uo, oo]
    }
}

/// Slot (1 or 3) of the outgoing over-strand, given the under and over
/// directions. Slots run counterclockwise from the incoming under ray,
/// which points along `-under`.
pub fn over_out_slot(under: [f64; 2], over: [f64; 2]) -> u8 {
    if -under[0] * over[1] + under[1] * over[0] > 0.0 {
        1
    } else {
        3
    }
}

/// Issues globally unique endpoint labels for cuts.
#[derive(Clone, Debug)]
pub struct EndpointAllocator {
    next: Label,
    cuts: HashMap<ArcId, (Label, Label)>,
}

impl EndpointAllocator {
    pub fn new(first: Label) -> Self {
        Self {
            next: first,
            cuts: HashMap::new(),
        }
    }

    /// Starts above every endpoint label already used by `d`.
    pub fn for_diagram(d: &Diagram) -> Self {
        Self::new(d.endpoints().last().map_or(1, |l| l + 1))
    }

    /// Labels for cutting arc `arc`: `(tail side, head side)`. Repeated calls
    /// for the same arc return the same pair.
    pub fn cut(&mut self, arc: ArcId) -> (Label, Label) {
        let next = &mut self.next;
        *self.cuts.entry(arc).or_insert_with(|| {
            let pair = (*next, *next + 1);
            *next += 2;
            pair
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trefoil() -> Diagram {
        parse_pd("X 1 5 2 4\nX 3 1 4 6\nX 5 3 6 2\n").unwrap()
    }

    #[test]
    fn geometric_slots() {
        // Over strand heading down, under heading right: a positive crossing.
        let s = slots_from_directions((1, 2, [1.0, 0.0]), (3, 4, [0.0, -1.0]));
        assert_eq!(s, [1, 4, 2, 3]);
        let s = slots_from_directions((1, 2, [1.0, 0.0]), (3, 4, [0.0, 1.0]));
        assert_eq!(s, [1, 3, 2, 4]);
    }

    #[test]
    fn trefoil_shape() {
        let t = trefoil();
        assert_eq!(t.n_crossings(), 3);
        assert!(t.endpoints().is_empty());
        assert_eq!(t.components().len(), 1);
        assert_eq!(t.writhe(), 3);
    }

    #[test]
    fn one_crossing_tangle() {
        let d = parse_pd("X 1 2 3 4").unwrap();
        assert_eq!(d.n_crossings(), 1);
        assert_eq!(d.endpoints(), &[1, 2, 3, 4]);
        assert_eq!(d.strand_permutation(), &Pairing::new([(1, 3), (2, 4)]).unwrap());
        assert_eq!(d.components().len(), 2);
    }

    #[test]
    fn free_loop_only() {
        let d = parse_pd("loop").unwrap();
        assert_eq!(d.free_loops(), 1);
        assert_eq!(d.n_crossings(), 0);
        assert_eq!(d.writhe(), 0);
    }

    #[test]
    fn mirror_negates_writhe_and_is_involutive() {
        let t = trefoil();
        let m = t.mirror();
        assert_eq!(m.writhe(), -3);
        assert_ne!(m, t);
        assert_eq!(m.mirror(), t);
    }

    #[test]
    fn split_trivial_subsets() {
        let t = trefoil();
        let all: BTreeSet<_> = t.crossing_ids().collect();
        let mut alloc = EndpointAllocator::for_diagram(&t);
        let (p, cuts) = t.split_piece(&all, &mut alloc, true);
        assert_eq!(p, t);
        assert!(cuts.is_empty());
        let (p, cuts) = t.split_piece(&BTreeSet::new(), &mut alloc, false);
        assert_eq!(p.n_crossings(), 0);
        assert!(p.arcs().is_empty());
        assert!(cuts.is_empty());
    }

    #[test]
    fn split_one_crossing_of_trefoil() {
        let t = trefoil();
        let mut alloc = EndpointAllocator::for_diagram(&t);
        let (p, cuts) = t.split_piece(&BTreeSet::from([1]), &mut alloc, true);
        assert_eq!(p.n_crossings(), 1);
        assert_eq!(p.endpoints().len(), 4);
        // Each of the 4 boundary arcs is cut once, producing 4 transpositions
        // of which this side holds one label each; the trefoil graph has
        // a double edge between every pair, so the boundary has 4 arcs.
        assert_eq!(cuts.len(), 4);
        let (q, cuts_q) = t.split_piece(&BTreeSet::from([2, 3]), &mut alloc, false);
        let mut a = cuts.clone();
        let mut b = cuts_q.clone();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        let glued = Diagram::glue(&[&p, &q], &cuts).unwrap();
        assert_eq!(glued, t);
    }

    #[test]
    fn strand_permutation_follows_components() {
        let d = parse_pd("X 1 2 3 4\nX 3 5 6 7").unwrap();
        let comps = d.components();
        for c in comps {
            let (f, h) = c.ends.unwrap();
            assert_eq!(d.strand_permutation().partner(f), Some(h));
        }
    }

    #[test]
    fn loop_free_chain_has_one_more_strand_than_crossings() {
        for x in 1..8u32 {
            let mut text = String::new();
            for i in 0..x {
                let base = 10 * i + 100;
                let a = if i == 0 { 1 } else { 10 * (i - 1) + 102 };
                text.push_str(&format!("X {a} {} {} {}\n", base + 1, base + 2, base + 3));
            }
            let d = parse_pd(&text).unwrap();
            assert_eq!(d.strand_permutation().len(), x as usize + 1);
        }
    }
}
