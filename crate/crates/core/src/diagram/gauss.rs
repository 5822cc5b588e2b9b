//! Extended Gauss code.
//!
//! Components are separated by `|`. Each component lists its passages in
//! traversal order as `O<k><sign>` (over) or `U<k><sign>` (under), for
//! example `O1+ U2+ O3+ U1+ O2+ U3+`. A component that starts with the
//! keyword `open` is an open strand running from its foot to its head. An
//! empty closed component is a crossingless loop. Open ends are labelled
//! `1, 2, ...` foot then head, in component order.

use std::collections::BTreeMap;

use super::{Arc, ArcId, CrossingId, Diagram, DiagramError, End};
use crate::pairing::Label;

struct Passage {
    crossing: CrossingId,
    over: bool,
    positive: bool,
}

fn parse_token(tok: &str, line: usize) -> Result<Passage, DiagramError> {
    let err = |msg: &str| DiagramError::Parse {
        line,
        msg: format!("{msg}: `{tok}`"),
    };
    let mut chars = tok.chars();
    let over = match chars.next().map(|c| c.to_ascii_uppercase()) {
        Some('O') => true,
        Some('U') => false,
        _ => return Err(err("passage must start with O or U")),
    };
    let rest: &str = chars.as_str();
    let (num, sign) = rest.split_at(rest.len().saturating_sub(1));
    let positive = match sign {
        "+" => true,
        "-" => false,
        _ => return Err(err("passage must end with + or -")),
    };
    let crossing: CrossingId = num.parse().map_err(|_| err("bad crossing number"))?;
    Ok(Passage {
        crossing,
        over,
        positive,
    })
}

/// Parses Gauss code into a diagram. Crossing ids are the numbers used in
/// the code.
pub fn parse_gauss(text: &str) -> Result<Diagram, DiagramError> {
    let body: String = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .collect::<Vec<_>>()
        .join(" ");
    let mut comps: Vec<(bool, Vec<Passage>)> = Vec::new();
    for part in body.split('|') {
        let mut toks = part.split_whitespace().peekable();
        let open = toks.peek().is_some_and(|t| t.eq_ignore_ascii_case("open"));
        if open {
            toks.next();
        }
        let passages = toks.map(|t| parse_token(t, 1)).collect::<Result<Vec<_>, _>>()?;
        comps.push((open, passages));
    }
    // An input consisting only of whitespace has no components.
    if comps.len() == 1 && !comps[0].0 && comps[0].1.is_empty() {
        comps.clear();
    }

    // Per crossing: (under in, under out, over in, over out, sign).
    #[derive(Default)]
    struct Slots {
        under: Option<(ArcId, ArcId)>,
        over: Option<(ArcId, ArcId)>,
        sign: Option<bool>,
    }
    let mut table: BTreeMap<CrossingId, Slots> = BTreeMap::new();
    // Per arc: (tail passage, head passage) as (crossing, over, incoming).
    let mut arc_ends: Vec<(End, End)> = Vec::new();
    let mut pending: Vec<(usize, CrossingId, bool, bool)> = Vec::new();
    let mut next_label: Label = 1;
    let mut loops = 0;
    let mut next_arc: ArcId = 1;

    for (open, passages) in &comps {
        let p = passages.len();
        if p == 0 {
            if *open {
                arc_ends.push((End::Open(next_label), End::Open(next_label + 1)));
                next_label += 2;
                next_arc += 1;
            } else {
                loops += 1;
            }
            continue;
        }
        let n_arcs = if *open { p + 1 } else { p };
        let first = next_arc;
        next_arc += n_arcs as ArcId;
        let arc_of = |k: usize| first + (k % n_arcs) as ArcId;
        for (i, pass) in passages.iter().enumerate() {
            let incoming = if *open { arc_of(i) } else { arc_of(i + p - 1) };
            let outgoing = if *open { arc_of(i + 1) } else { arc_of(i) };
            let s = table.entry(pass.crossing).or_default();
            let slot = if pass.over { &mut s.over } else { &mut s.under };
            if slot.is_some() || s.sign.is_some_and(|x| x != pass.positive) {
                return Err(DiagramError::InconsistentCrossing(pass.crossing));
            }
            *slot = Some((incoming, outgoing));
            s.sign = Some(pass.positive);
        }
        let base = arc_ends.len();
        for _ in 0..n_arcs {
            arc_ends.push((End::Open(0), End::Open(0)));
        }
        if *open {
            arc_ends[base].0 = End::Open(next_label);
            arc_ends[base + n_arcs - 1].1 = End::Open(next_label + 1);
            next_label += 2;
        }
        for (i, pass) in passages.iter().enumerate() {
            let incoming = if *open { i } else { (i + p - 1) % p };
            let outgoing = if *open { i + 1 } else { i };
            pending.push((base + incoming, pass.crossing, pass.over, true));
            pending.push((base + outgoing, pass.crossing, pass.over, false));
        }
    }

    let mut crossings = Vec::new();
    let mut slot_of: BTreeMap<(CrossingId, bool, bool), u8> = BTreeMap::new();
    for (&id, s) in &table {
        let (Some((ui, uo)), Some((oi, oo)), Some(pos)) = (s.under, s.over, s.sign) else {
            return Err(DiagramError::InconsistentCrossing(id));
        };
        let slots = if pos { [ui, oo, uo, oi] } else { [ui, oi, uo, oo] };
        slot_of.insert((id, false, true), 0);
        slot_of.insert((id, false, false), 2);
        slot_of.insert((id, true, true), if pos { 3 } else { 1 });
        slot_of.insert((id, true, false), if pos { 1 } else { 3 });
        crossings.push((id, slots));
    }
    for (arc, crossing, over, incoming) in pending {
        let end = End::Slot {
            crossing,
            slot: slot_of[&(crossing, over, incoming)],
        };
        if incoming {
            arc_ends[arc].1 = end;
        } else {
            arc_ends[arc].0 = end;
        }
    }
    let arcs = arc_ends
        .into_iter()
        .enumerate()
        .map(|(i, (tail, head))| Arc {
            id: i as ArcId + 1,
            tail,
            head,
        })
        .collect();
    Diagram::from_oriented_parts(crossings, arcs, loops)
}
