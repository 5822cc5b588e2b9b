//! Reidemeister moves on oriented diagrams, for invariance checks.
//!
//! Corners and faces: corner `(c, s)` is the region between slots `s` and
//! `s + 1` of crossing `c`. Leaving a corner along slot `s + 1` and arriving
//! at slot `k` of the next crossing lands in corner `(next, k)`, so the
//! corners of one face form an orbit of that step.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::diagram::{over_out_slot, slots_from_directions, Arc, ArcId, CrossingId, Diagram, DiagramError, End, Sign};
use crate::pairing::Label;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoveError {
    #[error("no arc {0}")]
    NoSuchArc(ArcId),
    #[error("no crossing {0}")]
    NoSuchCrossing(CrossingId),
    #[error("move does not apply: {0}")]
    NotApplicable(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// A kink added by an R1 move: its crossing sign and whether the strand
/// first passes over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Kink {
    pub sign: Sign,
    pub over_first: bool,
}

impl Kink {
    pub const ALL: [Kink; 4] = [
        Kink {
            sign: Sign::Positive,
            over_first: false,
        },
        Kink {
            sign: Sign::Negative,
            over_first: false,
        },
        Kink {
            sign: Sign::Positive,
            over_first: true,
        },
        Kink {
            sign: Sign::Negative,
            over_first: true,
        },
    ];
}

pub type Corner = (CrossingId, u8);

/// Mutable slot-level view of a diagram. Arcs are rebuilt from slot roles.
struct Work {
    slots: BTreeMap<CrossingId, ([ArcId; 4], Sign)>,
    open: HashMap<ArcId, (Option<Label>, Option<Label>)>,
    loops: usize,
    next_arc: ArcId,
    next_crossing: CrossingId,
}

fn is_incoming(slot: u8, sign: Sign) -> bool {
    match slot {
        0 => true,
        2 => false,
        1 => sign == Sign::Negative,
        _ => sign == Sign::Positive,
    }
}

impl Work {
    fn new(d: &Diagram) -> Self {
        let slots = d.crossings().iter().map(|c| (c.id, (c.slots, c.sign))).collect();
        let mut open = HashMap::new();
        for a in d.arcs() {
            let tail = match a.tail {
                End::Open(l) => Some(l),
                _ => None,
            };
            let head = match a.head {
                End::Open(l) => Some(l),
                _ => None,
            };
            if tail.is_some() || head.is_some() {
                open.insert(a.id, (tail, head));
            }
        }
        Work {
            slots,
            open,
            loops: d.free_loops(),
            next_arc: d.arcs().iter().map(|a| a.id).max().unwrap_or(0) + 1,
            next_crossing: d.crossing_ids().max().unwrap_or(0) + 1,
        }
    }

    fn fresh_arc(&mut self) -> ArcId {
        self.next_arc += 1;
        self.next_arc - 1
    }

    fn fresh_crossing(&mut self) -> CrossingId {
        self.next_crossing += 1;
        self.next_crossing - 1
    }

    fn incoming(&self, (c, s): Corner) -> bool {
        is_incoming(s, self.slots[&c].1)
    }

    fn finish(self) -> Result<Diagram, MoveError> {
        let mut ends: BTreeMap<ArcId, (Option<End>, Option<End>)> = BTreeMap::new();
        for (&c, &(slots, sign)) in &self.slots {
            for (k, &a) in slots.iter().enumerate() {
                let end = End::Slot {
                    crossing: c,
                    slot: k as u8,
                };
                let e = ends.entry(a).or_default();
                let place = if is_incoming(k as u8, sign) { &mut e.1 } else { &mut e.0 };
                if place.replace(end).is_some() {
                    return Err(DiagramError::InconsistentArc { arc: a, count: 3 }.into());
                }
            }
        }
        for (&a, &(tail, head)) in &self.open {
            let e = ends.entry(a).or_default();
            if let Some(l) = tail {
                e.0 = Some(End::Open(l));
            }
            if let Some(l) = head {
                e.1 = Some(End::Open(l));
            }
        }
        let arcs = ends
            .into_iter()
            .map(|(id, (tail, head))| match (tail, head) {
                (Some(tail), Some(head)) => Ok(Arc { id, tail, head }),
                _ => Err(DiagramError::InconsistentArc { arc: id, count: 1 }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let crossings = self.slots.into_iter().map(|(c, (s, _))| (c, s)).collect();
        Ok(Diagram::from_oriented_parts(crossings, arcs, self.loops)?)
    }
}

/// The other end of the arc at `corner`'s slot `s`.
fn other_end(d: &Diagram, c: CrossingId, s: u8) -> Result<End, MoveError> {
    let x = d.crossing(c).ok_or(MoveError::NoSuchCrossing(c))?;
    let id = x.slots[s as usize];
    let arc = d.arc(id).ok_or(MoveError::NoSuchArc(id))?;
    let here = End::Slot { crossing: c, slot: s };
    Ok(if arc.tail == here { arc.head } else { arc.tail })
}

/// The next corner of the face containing `corner`, or `None` if the face
/// passes an open endpoint.
pub fn next_corner(d: &Diagram, (c, s): Corner) -> Result<Option<Corner>, MoveError> {
    Ok(match other_end(d, c, (s + 1) % 4)? {
        End::Slot { crossing, slot } => Some((crossing, slot)),
        End::Open(_) => None,
    })
}

/// Adds a kink to arc `arc`.
pub fn r1(d: &Diagram, arc: ArcId, kink: Kink) -> Result<Diagram, MoveError> {
    let a = *d.arc(arc).ok_or(MoveError::NoSuchArc(arc))?;
    let mut w = Work::new(d);
    let (e, e2, l) = (arc, w.fresh_arc(), w.fresh_arc());
    let k = w.fresh_crossing();
    let slots = match (kink.sign, kink.over_first) {
        (Sign::Negative, false) => [e, l, l, e2],
        (Sign::Positive, false) => [e, e2, l, l],
        (Sign::Positive, true) => [l, l, e2, e],
        (Sign::Negative, true) => [l, e, e2, l],
    };
    match a.head {
        End::Slot { crossing, slot } => {
            w.slots.get_mut(&crossing).expect("arc ends at a known crossing").0[slot as usize] = e2;
        }
        End::Open(label) => {
            w.open.get_mut(&e).expect("open arc").1 = None;
            w.open.insert(e2, (None, Some(label)));
        }
    }
    w.slots.insert(k, (slots, kink.sign));
    w.finish()
}

/// Corners where an R2 finger move applies: the arcs at slot `s` of `c`
/// and at the far side of the next corner are distinct and the face's
/// next crossing differs from `c`.
pub fn r2_corners(d: &Diagram) -> Vec<Corner> {
    let mut out = Vec::new();
    for c in d.crossings() {
        for s in 0..4u8 {
            if let Ok(Some(z)) = next_corner(d, (c.id, s)) {
                let (e, f) = (c.slots[s as usize], c.slots[(s as usize + 1) % 4]);
                let h = d.crossing(z.0).expect("known").slots[(z.1 as usize + 1) % 4];
                if z.0 != c.id && e != f && h != e && h != f {
                    out.push((c.id, s));
                }
            }
        }
    }
    out
}

/// Pushes a finger of the arc following corner `(c, s)`'s face past the
/// next crossing across the arc at slot `s` of `c`, creating two crossings.
/// The pushed arc passes over both when `over` is set.
///
/// The new crossing nearer to `c` forms a triangular face with `c` and the
/// next crossing of the face.
pub fn r2(d: &Diagram, (x, s): Corner, over: bool) -> Result<Diagram, MoveError> {
    let cx = d.crossing(x).ok_or(MoveError::NoSuchCrossing(x))?;
    let (z, k) = next_corner(d, (x, s))?.ok_or_else(|| MoveError::NotApplicable("face passes an endpoint".into()))?;
    let e = cx.slots[s as usize];
    let f = cx.slots[(s as usize + 1) % 4];
    let hk = (k + 1) % 4;
    let h = d.crossing(z).ok_or(MoveError::NoSuchCrossing(z))?.slots[hk as usize];
    if z == x || e == f || h == e || h == f {
        return Err(MoveError::NotApplicable(
            "corner needs distinct arcs and crossings".into(),
        ));
    }
    let mut w = Work::new(d);
    let e_out = !w.incoming((x, s));
    let h_out = !w.incoming((z, hk));
    let (e_near, e_mid, h_near, h_mid) = (w.fresh_arc(), w.fresh_arc(), w.fresh_arc(), w.fresh_arc());
    w.slots.get_mut(&x).expect("known").0[s as usize] = e_near;
    w.slots.get_mut(&z).expect("known").0[hk as usize] = h_near;

    // Local frame: e leaves `x` along +x; the face lies above it, and the
    // finger dips below e between the two new crossings.
    let strand = |out: bool, near: ArcId, far: ArcId, dir: [f64; 2]| {
        if out {
            (near, far, dir)
        } else {
            (far, near, [-dir[0], -dir[1]])
        }
    };
    for (e_pair, h_pair, h_dir) in [
        ((e_near, e_mid), (h_near, h_mid), [0.0, -1.0]),
        ((e_mid, e), (h_mid, h), [0.0, 1.0]),
    ] {
        let es = strand(e_out, e_pair.0, e_pair.1, [1.0, 0.0]);
        let hs = strand(h_out, h_pair.0, h_pair.1, h_dir);
        let (under, top) = if over { (es, hs) } else { (hs, es) };
        let slots = slots_from_directions(under, top);
        let sign = if over_out_slot(under.2, top.2) == 1 {
            Sign::Positive
        } else {
            Sign::Negative
        };
        let y = w.fresh_crossing();
        w.slots.insert(y, (slots, sign));
    }
    w.finish()
}

/// The R2 move whose new crossings form an R3-able triangle.
pub fn r2_for_triangle(d: &Diagram, corner: Corner) -> Result<Diagram, MoveError> {
    let (_, k) = next_corner(d, corner)?.ok_or_else(|| MoveError::NotApplicable("face passes an endpoint".into()))?;
    // The pushed arc is over at the next crossing iff its slot is odd.
    r2(d, corner, (k + 1) % 2 == 1)
}

/// Triangular faces on three distinct crossings where one strand passes
/// over (or under) at both of its triangle crossings. Each is given by its
/// corners in face order, starting from the smallest.
pub fn r3_triangles(d: &Diagram) -> Vec<[Corner; 3]> {
    let mut out = Vec::new();
    for c in d.crossings() {
        for s in 0..4u8 {
            let a = (c.id, s);
            let Ok(Some(b)) = next_corner(d, a) else { continue };
            let Ok(Some(t)) = next_corner(d, b) else { continue };
            let Ok(Some(back)) = next_corner(d, t) else { continue };
            let tri = [a, b, t];
            if back != a || a.0 == b.0 || b.0 == t.0 || a.0 == t.0 || tri.iter().min() != Some(&a) {
                continue;
            }
            // The strand along edge i runs from slot s_i + 1 to slot s_{i+1}.
            let movable = (0..3).any(|i| (tri[i].1 + 1) % 2 == tri[(i + 1) % 3].1 % 2);
            if movable {
                out.push(tri);
            }
        }
    }
    out
}

/// Slides one strand of a triangular face across the opposite crossing.
pub fn r3(d: &Diagram, tri: [Corner; 3]) -> Result<Diagram, MoveError> {
    if !r3_triangles(d).contains(&tri) {
        return Err(MoveError::NotApplicable(format!(
            "no movable triangle at corners {tri:?}"
        )));
    }
    let w0 = Work::new(d);
    let mut w = Work::new(d);
    let old = |c: CrossingId, s: u8| w0.slots[&c].0[(s % 4) as usize];
    let mut set = |c: CrossingId, s: u8, a: ArcId| w.slots.get_mut(&c).expect("known").0[(s % 4) as usize] = a;
    for i in 0..3 {
        let (v, sv) = tri[i];
        let (u, su) = tri[(i + 1) % 3];
        // Edge i joins v's slot sv+1 and u's slot su; the strand's outer
        // arcs sit opposite at v's sv+3 and u's su+2. The triangle flips,
        // so each crossing takes over the other's outer arc on this strand.
        let edge = old(v, sv + 1);
        set(v, sv + 1, old(u, su + 2));
        set(u, su, old(v, sv + 3));
        set(v, sv + 3, edge);
        set(u, su + 2, edge);
    }
    w.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bracket::jones;
    use crate::diagram::parse_pd;
    use crate::laurent::LaurentPoly;

    fn trefoil() -> Diagram {
        parse_pd("X 1 5 2 4\nX 3 1 4 6\nX 5 3 6 2").unwrap()
    }

    #[test]
    fn kinks_change_writhe_not_jones() {
        let t = trefoil();
        let want = jones(&t, None).unwrap();
        for kink in Kink::ALL {
            for a in t.arcs() {
                let k = r1(&t, a.id, kink).unwrap();
                assert_eq!(k.n_crossings(), 4);
                assert_eq!(k.writhe(), t.writhe() + kink.sign.value());
                assert_eq!(jones(&k, None).unwrap(), want);
            }
        }
    }

    #[test]
    fn kink_on_open_arc() {
        let d = parse_pd("endpoint 1\nendpoint 1").unwrap();
        let sigma = d.strand_permutation().clone();
        for kink in Kink::ALL {
            let k = r1(&d, 1, kink).unwrap();
            assert_eq!(k.endpoints(), d.endpoints());
            assert_eq!(jones(&k, Some(&sigma)).unwrap(), LaurentPoly::one());
        }
    }

    #[test]
    fn trefoil_faces() {
        // Two triangles, three bigons; the triangles are alternating.
        let t = trefoil();
        let mut seen = std::collections::HashSet::new();
        let mut sizes = Vec::new();
        for c in t.crossings() {
            for s in 0..4u8 {
                if seen.contains(&(c.id, s)) {
                    continue;
                }
                let mut cur = (c.id, s);
                let mut n = 0;
                while seen.insert(cur) {
                    n += 1;
                    cur = next_corner(&t, cur).unwrap().unwrap();
                }
                sizes.push(n);
            }
        }
        sizes.sort();
        assert_eq!(sizes, vec![2, 2, 2, 3, 3]);
        assert!(r3_triangles(&t).is_empty());
    }

    #[test]
    fn fingers_keep_jones() {
        let t = trefoil();
        let want = jones(&t, None).unwrap();
        let corners = r2_corners(&t);
        assert!(!corners.is_empty());
        for &c in &corners {
            for over in [false, true] {
                let f = r2(&t, c, over).unwrap();
                assert_eq!(f.n_crossings(), 5);
                assert_eq!(f.writhe(), t.writhe());
                assert_eq!(jones(&f, None).unwrap(), want);
            }
        }
    }

    #[test]
    fn triangle_moves_keep_jones_and_invert() {
        let t = trefoil();
        let want = jones(&t, None).unwrap();
        for c in r2_corners(&t) {
            let f = r2_for_triangle(&t, c).unwrap();
            let tris = r3_triangles(&f);
            assert!(!tris.is_empty(), "finger at {c:?} should leave a movable triangle");
            for tri in tris {
                let g = r3(&f, tri).unwrap();
                assert_eq!(g.writhe(), f.writhe());
                assert_eq!(jones(&g, None).unwrap(), want);
                // The triangle survives the move; moving it back restores
                // the slots.
                let back = r3_triangles(&g)
                    .into_iter()
                    .map(|b| r3(&g, b).unwrap())
                    .find(|h| h.crossings() == f.crossings());
                assert!(back.is_some());
            }
        }
    }

    #[test]
    fn r3_rejects_non_triangles() {
        let t = trefoil();
        assert!(matches!(
            r3(&t, [(1, 0), (2, 0), (3, 0)]),
            Err(MoveError::NotApplicable(_))
        ));
    }
}
