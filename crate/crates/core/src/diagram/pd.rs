//! Planar diagram (PD) text format.
//!
//! One item per line:
//!
//! ```text
//! # comment
//! X 1 5 2 4      crossing, arcs listed from the incoming under-strand ccw
//! endpoint 7     arc 7 has an open end here
//! loop           a crossingless circle
//! ```
//!
//! Brackets and commas are treated as whitespace, so `X[1,5,2,4]` also
//! parses. An arc that appears in only one crossing slot has an implicit
//! open end. Open ends are labelled 1, 2, ... in document order.

use std::collections::HashMap;
use std::fmt;

use super::{Arc, ArcId, Diagram, DiagramError, End};
use crate::pairing::Label;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PdItem {
    Crossing([ArcId; 4]),
    Endpoint(ArcId),
    Loop,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PdCode {
    pub items: Vec<PdItem>,
}

impl PdCode {
    pub fn from_crossings(crossings: impl IntoIterator<Item = [ArcId; 4]>) -> Self {
        Self {
            items: crossings.into_iter().map(PdItem::Crossing).collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, DiagramError> {
        let mut items = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let cleaned: String = line
                .chars()
                .map(|c| {
                    if matches!(c, '[' | ']' | ',' | '(' | ')') {
                        ' '
                    } else {
                        c
                    }
                })
                .collect();
            let mut toks = cleaned.split_whitespace();
            let Some(head) = toks.next() else { continue };
            let err = |msg: String| DiagramError::Parse { line: i + 1, msg };
            let nums: Result<Vec<ArcId>, _> = toks.map(|t| t.parse::<ArcId>()).collect();
            let nums = nums.map_err(|e| err(format!("bad arc label: {e}")))?;
            match head.to_ascii_lowercase().as_str() {
                "x" => {
                    let s: [ArcId; 4] = nums
                        .try_into()
                        .map_err(|v: Vec<ArcId>| err(format!("crossing needs 4 arcs, got {}", v.len())))?;
                    items.push(PdItem::Crossing(s));
                }
                "endpoint" => match nums[..] {
                    [a] => items.push(PdItem::Endpoint(a)),
                    _ => return Err(err("endpoint takes one arc label".into())),
                },
                "loop" => {
                    if !nums.is_empty() {
                        return Err(err("loop takes no arguments".into()));
                    }
                    items.push(PdItem::Loop);
                }
                other => return Err(err(format!("unknown item `{other}`"))),
            }
        }
        Ok(Self { items })
    }

    pub fn crossings(&self) -> impl Iterator<Item = &[ArcId; 4]> {
        self.items.iter().filter_map(|i| match i {
            PdItem::Crossing(s) => Some(s),
            _ => None,
        })
    }

    /// Builds the oriented diagram. Crossings get ids 1, 2, ... in order.
    ///
    /// Orientation follows the under passages (slot 0 in, slot 2 out). A
    /// component with no under passage is oriented from its lower endpoint
    /// label if open; if closed, its smallest arc is followed by the smaller
    /// of its two neighbouring arcs.
    pub fn to_diagram(&self) -> Result<Diagram, DiagramError> {
        let mut uses: HashMap<ArcId, usize> = HashMap::new();
        let mut decls: HashMap<ArcId, usize> = HashMap::new();
        let mut loops = 0;
        for item in &self.items {
            match item {
                PdItem::Crossing(s) => s.iter().for_each(|a| *uses.entry(*a).or_default() += 1),
                PdItem::Endpoint(a) => *decls.entry(*a).or_default() += 1,
                PdItem::Loop => loops += 1,
            }
        }
        let mut all: Vec<ArcId> = uses.keys().chain(decls.keys()).copied().collect();
        all.sort_unstable();
        all.dedup();
        for &a in &all {
            let (u, d) = (uses.get(&a).copied().unwrap_or(0), decls.get(&a).copied().unwrap_or(0));
            let implicit = u == 1 && d == 0;
            if !implicit && u + d != 2 {
                return Err(DiagramError::InconsistentArc { arc: a, count: u + d });
            }
        }

        // Undirected ends per arc, labelled in document order.
        let mut ends: HashMap<ArcId, Vec<End>> = HashMap::new();
        let mut crossings = Vec::new();
        let mut next_label: Label = 1;
        let mut next_id = 1;
        for item in &self.items {
            match item {
                PdItem::Crossing(s) => {
                    for (k, &a) in s.iter().enumerate() {
                        ends.entry(a).or_default().push(End::Slot {
                            crossing: next_id,
                            slot: k as u8,
                        });
                        if uses[&a] == 1 && !decls.contains_key(&a) {
                            ends.entry(a).or_default().push(End::Open(next_label));
                            next_label += 1;
                        }
                    }
                    crossings.push((next_id, *s));
                    next_id += 1;
                }
                PdItem::Endpoint(a) => {
                    ends.entry(*a).or_default().push(End::Open(next_label));
                    next_label += 1;
                }
                PdItem::Loop => {}
            }
        }

        let slot_arc: HashMap<(u32, u8), ArcId> = crossings
            .iter()
            .flat_map(|(id, s)| (0..4u8).map(move |k| ((*id, k), s[k as usize])))
            .collect();
        // The other end of `arc` from `end`.
        let other = |arc: ArcId, end: End| -> End {
            let e = &ends[&arc];
            if e[0] == end {
                e[1]
            } else {
                e[0]
            }
        };

        let mut oriented: HashMap<ArcId, Arc> = HashMap::new();
        let mut order: Vec<ArcId> = all.clone();
        // Open components first, from the lowest endpoint label.
        order.sort_by_key(|a| {
            let low = ends[a].iter().filter_map(|e| match e {
                End::Open(l) => Some(*l),
                _ => None,
            });
            (low.min().unwrap_or(Label::MAX), *a)
        });
        for start in order {
            if oriented.contains_key(&start) {
                continue;
            }
            let open_start = ends[&start].iter().filter(|e| matches!(e, End::Open(_))).min().copied();
            let from = open_start.unwrap_or(ends[&start][0]);
            // Walk: (arc, entered-from end).
            let mut walk: Vec<(ArcId, End)> = Vec::new();
            let (mut arc, mut from_end) = (start, from);
            loop {
                walk.push((arc, from_end));
                let to = other(arc, from_end);
                match to {
                    End::Open(_) => break,
                    End::Slot { crossing, slot } => {
                        let nxt_end = End::Slot {
                            crossing,
                            slot: (slot + 2) % 4,
                        };
                        let nxt = slot_arc[&(crossing, (slot + 2) % 4)];
                        if nxt == start && nxt_end == from {
                            break;
                        }
                        arc = nxt;
                        from_end = nxt_end;
                    }
                }
                if walk.len() > all.len() {
                    return Err(DiagramError::Malformed("strand walk does not terminate".into()));
                }
            }
            // Under passages vote on the direction.
            let mut forward: Option<bool> = None;
            for &(a, f) in &walk {
                if let End::Slot { slot, .. } = other(a, f) {
                    let vote = match slot {
                        0 => Some(true),
                        2 => Some(false),
                        _ => None,
                    };
                    if let Some(v) = vote {
                        if forward.is_some_and(|x| x != v) {
                            return Err(DiagramError::UnorientableDiagram(format!(
                                "component through arc {start} enters under-strands from both sides"
                            )));
                        }
                        forward = Some(v);
                    }
                }
            }
            let forward = forward.unwrap_or_else(|| {
                if open_start.is_some() || walk.len() < 2 {
                    true
                } else {
                    let min = walk.iter().map(|w| w.0).min().unwrap();
                    let i = walk.iter().position(|w| w.0 == min).unwrap();
                    let succ = walk[(i + 1) % walk.len()].0;
                    let pred = walk[(i + walk.len() - 1) % walk.len()].0;
                    succ <= pred
                }
            });
            for &(a, f) in &walk {
                let to = other(a, f);
                let (tail, head) = if forward { (f, to) } else { (to, f) };
                oriented.insert(a, Arc { id: a, tail, head });
            }
        }
        Diagram::from_oriented_parts(crossings, oriented.into_values().collect(), loops)
    }
}

impl fmt::Display for PdCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            match item {
                PdItem::Crossing([a, b, c, d]) => writeln!(f, "X {a} {b} {c} {d}")?,
                PdItem::Endpoint(a) => writeln!(f, "endpoint {a}")?,
                PdItem::Loop => writeln!(f, "loop")?,
            }
        }
        Ok(())
    }
}

/// Parses PD text into a diagram.
pub fn parse_pd(text: &str) -> Result<Diagram, DiagramError> {
    PdCode::parse(text)?.to_diagram()
}

impl Diagram {
    /// PD code with explicit endpoint lines in label order, so reparsing
    /// keeps the relative order of endpoint labels. Orientation of
    /// components without under passages is not recorded.
    pub fn to_pd(&self) -> PdCode {
        let mut items: Vec<PdItem> = self.crossings().iter().map(|c| PdItem::Crossing(c.slots)).collect();
        let mut opens: Vec<(Label, ArcId)> = self
            .arcs()
            .iter()
            .flat_map(|a| {
                [a.tail, a.head].into_iter().filter_map(move |e| match e {
                    End::Open(l) => Some((l, a.id)),
                    _ => None,
                })
            })
            .collect();
        opens.sort_unstable();
        items.extend(opens.into_iter().map(|(_, a)| PdItem::Endpoint(a)));
        items.extend(std::iter::repeat_n(PdItem::Loop, self.free_loops()));
        PdCode { items }
    }
}
