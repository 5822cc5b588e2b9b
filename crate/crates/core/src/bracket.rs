//! Kauffman bracket state sums.
//!
//! [`expand_piece`] enumerates the `2^n` smoothings of a piece and groups
//! them by the pairing of open endpoints they induce (the state
//! permutation). Closed circles are absorbed into each row's coefficient as
//! powers of `d`, so a row holds `sum A^alpha(S) d^|S|` over its states.
//!
//! The A-smoothing joins slots 0-1 and 2-3 of a crossing, the B-smoothing
//! joins 0-3 and 1-2.

use std::collections::HashMap;

use num_bigint::BigInt;
use rayon::prelude::*;
use thiserror::Error;

use crate::diagram::{Diagram, End};
use crate::laurent::{pow_d, LaurentPoly};
use crate::pairing::{Label, Pairing};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BracketError {
    #[error("diagram has open endpoints; a closure permutation is required")]
    OpenDiagram,
    #[error("diagram has open endpoints but no closure permutation was given")]
    MissingClosure,
    #[error("closure permutation does not pair exactly the diagram's endpoints")]
    DomainMismatch,
    #[error("diagram is empty")]
    EmptyDiagram,
    #[error("piece has {0} crossings; at most 63 can be expanded")]
    TooLarge(usize),
}

/// Grouped state sum of one piece.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateTable {
    pub endpoints: Vec<Label>,
    /// Rows sorted by state permutation.
    pub rows: Vec<(Pairing, LaurentPoly)>,
    pub piece_writhe: i64,
}

impl StateTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Number of strands, `|endpoints| / 2`.
    pub fn strands(&self) -> usize {
        self.endpoints.len() / 2
    }

    pub fn row(&self, key: &Pairing) -> Option<&LaurentPoly> {
        self.rows
            .binary_search_by(|(k, _)| k.cmp(key))
            .ok()
            .map(|i| &self.rows[i].1)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "endpoints": self.endpoints,
            "piece_writhe": self.piece_writhe,
            "rows": self.rows.iter().map(|(k, v)| serde_json::json!({
                "pairing": k.pairs(),
                "coefficient": v.to_json(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// The `c`-th Catalan number (saturating).
pub fn catalan(c: usize) -> u128 {
    let mut x: u128 = 1;
    for k in 0..c as u128 {
        x = match x.checked_mul(2 * (2 * k + 1)) {
            Some(v) => v / (k + 2),
            None => return u128::MAX,
        };
    }
    x
}

/// Flat graph of slot nodes `4i + s` and endpoint nodes `4n + j`, with the
/// node at the other end of each arc.
struct StateGraph {
    n: usize,
    partner: Vec<u32>,
    endpoints: Vec<Label>,
}

impl StateGraph {
    fn new(d: &Diagram) -> Self {
        let n = d.n_crossings();
        let endpoints = d.endpoints().to_vec();
        let node = |e: End| -> u32 {
            match e {
                End::Slot { crossing, slot } => {
                    let i = d
                        .crossings()
                        .binary_search_by_key(&crossing, |c| c.id)
                        .expect("arc attached to a known crossing");
                    (4 * i + slot as usize) as u32
                }
                End::Open(l) => (4 * n + endpoints.binary_search(&l).expect("known endpoint")) as u32,
            }
        };
        let mut partner = vec![u32::MAX; 4 * n + endpoints.len()];
        for a in d.arcs() {
            let (t, h) = (node(a.tail), node(a.head));
            partner[t as usize] = h;
            partner[h as usize] = t;
        }
        StateGraph { n, partner, endpoints }
    }

    #[inline]
    fn smooth(node: u32, a_smoothing: bool) -> u32 {
        let s = node & 3;
        let base = node & !3;
        base | if a_smoothing { s ^ 1 } else { 3 - s }
    }

    /// Walks one state. Fills `key[j]` with the endpoint index paired to
    /// endpoint `j` (when `key` is given) and returns the number of closed
    /// circles. With `closure`, endpoint `j` continues into endpoint
    /// `closure[j]` and every circle, including segment cycles, is counted.
    fn walk(&self, state: u64, seen: &mut [bool], key: Option<&mut [u16]>, closure: Option<&[u32]>) -> usize {
        let n4 = 4 * self.n as u32;
        seen.iter_mut().for_each(|s| *s = false);
        let a_of = |node: u32| (state >> (node >> 2)) & 1 == 1;
        let mut circles = 0;
        match closure {
            None => {
                if let Some(key) = key {
                    for j in 0..self.endpoints.len() as u32 {
                        if seen[(n4 + j) as usize] {
                            continue;
                        }
                        seen[(n4 + j) as usize] = true;
                        let mut cur = self.partner[(n4 + j) as usize];
                        while cur < n4 {
                            seen[cur as usize] = true;
                            let out = Self::smooth(cur, a_of(cur));
                            seen[out as usize] = true;
                            cur = self.partner[out as usize];
                        }
                        seen[cur as usize] = true;
                        key[j as usize] = (cur - n4) as u16;
                        key[(cur - n4) as usize] = j as u16;
                    }
                }
            }
            Some(sigma) => {
                for j in 0..self.endpoints.len() as u32 {
                    if seen[(n4 + j) as usize] {
                        continue;
                    }
                    circles += 1;
                    let mut e = j;
                    loop {
                        seen[(n4 + e) as usize] = true;
                        let mut cur = self.partner[(n4 + e) as usize];
                        while cur < n4 {
                            seen[cur as usize] = true;
                            let out = Self::smooth(cur, a_of(cur));
                            seen[out as usize] = true;
                            cur = self.partner[out as usize];
                        }
                        seen[cur as usize] = true;
                        e = sigma[(cur - n4) as usize];
                        if seen[(n4 + e) as usize] {
                            break;
                        }
                    }
                }
            }
        }
        for start in 0..n4 {
            if seen[start as usize] {
                continue;
            }
            circles += 1;
            let mut cur = start;
            while !seen[cur as usize] {
                seen[cur as usize] = true;
                let out = Self::smooth(cur, a_of(cur));
                seen[out as usize] = true;
                cur = self.partner[out as usize];
            }
        }
        circles
    }
}

/// Counts of states per row, by number of A-smoothings and circles.
struct Accum {
    n: usize,
    keys: HashMap<Vec<u16>, usize>,
    counts: Vec<Vec<u64>>,
}

impl Accum {
    fn new(n: usize) -> Self {
        Accum {
            n,
            keys: HashMap::new(),
            counts: Vec::new(),
        }
    }

    fn width(&self) -> usize {
        2 * self.n + 2
    }

    fn add(&mut self, key: &[u16], a: usize, circles: usize, count: u64) {
        let idx = match self.keys.get(key) {
            Some(&i) => i,
            None => {
                let i = self.counts.len();
                self.keys.insert(key.to_vec(), i);
                self.counts.push(vec![0; (self.n + 1) * self.width()]);
                i
            }
        };
        let w = self.width();
        self.counts[idx][a * w + circles] += count;
    }

    fn merge(mut self, other: Accum) -> Accum {
        let w = other.width();
        for (key, i) in &other.keys {
            for (cell, &c) in other.counts[*i].iter().enumerate() {
                if c != 0 {
                    self.add(key, cell / w, cell % w, c);
                }
            }
        }
        self
    }

    fn range(graph: &StateGraph, lo: u64, hi: u64) -> Accum {
        let mut acc = Accum::new(graph.n);
        let mut seen = vec![false; graph.partner.len()];
        let mut key = vec![0u16; graph.endpoints.len()];
        for state in lo..hi {
            let circles = graph.walk(state, &mut seen, Some(&mut key), None);
            acc.add(&key, state.count_ones() as usize, circles, 1);
        }
        acc
    }
}

/// `sum_a count[a] A^(2a - n)` for one circle count.
fn a_polynomial(n: usize, counts: impl Iterator<Item = (usize, u64)>) -> LaurentPoly {
    LaurentPoly::from_terms(
        counts
            .filter(|&(_, c)| c != 0)
            .map(|(a, c)| (2 * a as i64 - n as i64, BigInt::from(c))),
    )
}

fn check_size(n: usize) -> Result<(), BracketError> {
    if n > 63 {
        Err(BracketError::TooLarge(n))
    } else {
        Ok(())
    }
}

/// States of larger pieces are split into ranges processed in parallel.
const PARALLEL_THRESHOLD: usize = 12;

/// Expands a piece into its grouped state table. Each row is
/// `sum A^alpha(S) d^|S|` over the states with that state permutation,
/// where `|S|` includes the piece's free loops.
pub fn expand_piece(piece: &Diagram) -> Result<StateTable, BracketError> {
    let n = piece.n_crossings();
    check_size(n)?;
    let graph = StateGraph::new(piece);
    let total = 1u64 << n;
    let acc = if n >= PARALLEL_THRESHOLD {
        let chunks = (4 * rayon::current_num_threads())
            .next_power_of_two()
            .min(total as usize) as u64;
        let step = total / chunks;
        (0..chunks)
            .into_par_iter()
            .map(|k| Accum::range(&graph, k * step, (k + 1) * step))
            .reduce(|| Accum::new(n), Accum::merge)
    } else {
        Accum::range(&graph, 0, total)
    };
    let free = piece.free_loops();
    let w = acc.width();
    let mut rows: Vec<(Pairing, LaurentPoly)> = acc
        .keys
        .iter()
        .map(|(key, &i)| {
            let mut coef = LaurentPoly::zero();
            for circles in 0..w {
                let poly = a_polynomial(n, (0..=n).map(|a| (a, acc.counts[i][a * w + circles])));
                if !poly.is_zero() {
                    coef += &poly * &pow_d((circles + free) as u32);
                }
            }
            (Pairing::from_partner_table(&graph.endpoints, key), coef)
        })
        .collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(StateTable {
        endpoints: graph.endpoints,
        rows,
        piece_writhe: piece.writhe(),
    })
}

/// Bracket of a closed diagram, `sum A^alpha(S) d^(|S| - 1)`, by direct
/// serial enumeration.
pub fn serial_bracket(d: &Diagram) -> Result<LaurentPoly, BracketError> {
    if !d.is_closed() {
        return Err(BracketError::OpenDiagram);
    }
    serial_bracket_sigma(d, &Pairing::empty())
}

/// Generalized bracket of a linkoid closed by `sigma`:
/// `sum A^alpha(S) d^(|S| + |segment cycles| - 1)`, by direct serial
/// enumeration with `sigma` joined into every state.
pub fn serial_bracket_sigma(d: &Diagram, sigma: &Pairing) -> Result<LaurentPoly, BracketError> {
    if !sigma.covers_exactly(d.endpoints()) {
        return Err(BracketError::DomainMismatch);
    }
    let n = d.n_crossings();
    check_size(n)?;
    if n == 0 && d.free_loops() == 0 && d.arcs().is_empty() {
        return Err(BracketError::EmptyDiagram);
    }
    let graph = StateGraph::new(d);
    let closure: Vec<u32> = graph
        .endpoints
        .iter()
        .map(|&l| {
            let p = sigma.partner(l).expect("checked domain");
            graph.endpoints.binary_search(&p).expect("checked domain") as u32
        })
        .collect();
    let w = 2 * n + graph.endpoints.len() + 2;
    let mut counts = vec![0u64; (n + 1) * w];
    let mut seen = vec![false; graph.partner.len()];
    for state in 0..1u64 << n {
        let circles = graph.walk(state, &mut seen, None, Some(&closure));
        counts[state.count_ones() as usize * w + circles] += 1;
    }
    let mut out = LaurentPoly::zero();
    for circles in 0..w {
        let poly = a_polynomial(n, (0..=n).map(|a| (a, counts[a * w + circles])));
        if !poly.is_zero() {
            let k = circles + d.free_loops();
            out += &poly * &pow_d((k - 1) as u32);
        }
    }
    Ok(out)
}

/// Writhe-normalized bracket `(-A^3)^(-Wr) <d>`, with `sigma` closing an
/// open diagram.
pub fn jones(d: &Diagram, sigma: Option<&Pairing>) -> Result<LaurentPoly, BracketError> {
    let bracket = match (d.is_closed(), sigma) {
        (true, None) => serial_bracket(d)?,
        (true, Some(s)) => serial_bracket_sigma(d, s)?,
        (false, None) => return Err(BracketError::MissingClosure),
        (false, Some(s)) => serial_bracket_sigma(d, s)?,
    };
    Ok(&bracket * &LaurentPoly::writhe_factor(-d.writhe()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::parse_pd;
    use crate::laurent::TPoly;

    fn p(terms: &[(i64, i64)]) -> LaurentPoly {
        LaurentPoly::from_terms(terms.iter().map(|&(e, c)| (e, BigInt::from(c))))
    }

    #[test]
    fn catalan_numbers() {
        let c: Vec<u128> = (0..8).map(catalan).collect();
        assert_eq!(c, vec![1, 1, 2, 5, 14, 42, 132, 429]);
    }

    #[test]
    fn free_loop_piece() {
        let t = expand_piece(&parse_pd("loop").unwrap()).unwrap();
        assert_eq!(t.rows, vec![(Pairing::empty(), LaurentPoly::d())]);
    }

    #[test]
    fn one_crossing_tangle_rows() {
        let t = expand_piece(&parse_pd("X 1 2 3 4").unwrap()).unwrap();
        assert_eq!(t.endpoints, vec![1, 2, 3, 4]);
        assert_eq!(
            t.rows,
            vec![
                (Pairing::new([(1, 2), (3, 4)]).unwrap(), p(&[(1, 1)])),
                (Pairing::new([(1, 4), (2, 3)]).unwrap(), p(&[(-1, 1)])),
            ]
        );
    }

    #[test]
    fn unknots() {
        assert_eq!(serial_bracket(&parse_pd("loop").unwrap()).unwrap(), LaurentPoly::one());
        assert_eq!(
            serial_bracket(&parse_pd("loop\nloop").unwrap()).unwrap(),
            LaurentPoly::d()
        );
        assert_eq!(serial_bracket(&Diagram::unlink(0)), Err(BracketError::EmptyDiagram));
    }

    #[test]
    fn trefoil_and_mirror() {
        let t = parse_pd("X 1 5 2 4\nX 3 1 4 6\nX 5 3 6 2").unwrap();
        let f = jones(&t, None).unwrap().to_t();
        assert_eq!(f, TPoly::from_integral([(4, -1), (3, 1), (1, 1)]));
        let g = jones(&t.mirror(), None).unwrap().to_t();
        assert_eq!(g, TPoly::from_integral([(-4, -1), (-3, 1), (-1, 1)]));
    }

    #[test]
    fn one_crossing_kinks() {
        // Closing the tangle's strands 1-2 / 3-4 in the two planar ways.
        let d = parse_pd("X 1 2 3 4").unwrap();
        let s1 = Pairing::new([(1, 2), (3, 4)]).unwrap();
        let s2 = Pairing::new([(1, 4), (2, 3)]).unwrap();
        let b1 = serial_bracket_sigma(&d, &s1).unwrap();
        let b2 = serial_bracket_sigma(&d, &s2).unwrap();
        assert_eq!(b1, p(&[(3, -1)]));
        assert_eq!(b2, p(&[(-3, -1)]));
        assert_eq!(
            jones(&d, Some(&s1)).unwrap(),
            &b1 * &LaurentPoly::writhe_factor(-d.writhe())
        );
    }

    #[test]
    fn single_strand() {
        let d = parse_pd("endpoint 1\nendpoint 1").unwrap();
        let s = d.strand_permutation().clone();
        assert_eq!(serial_bracket_sigma(&d, &s).unwrap(), LaurentPoly::one());
        assert_eq!(serial_bracket(&d), Err(BracketError::OpenDiagram));
        assert_eq!(jones(&d, None), Err(BracketError::MissingClosure));
        assert_eq!(
            serial_bracket_sigma(&d, &Pairing::empty()),
            Err(BracketError::DomainMismatch)
        );
    }
}
