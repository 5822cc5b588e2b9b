//! Factorization of a closed diagram's Jones polynomial through one piece
//! of a subdivision.
//!
//! Fixing piece `j`, every state of the rest of the diagram closes `j`'s
//! endpoints by some pairing `kappa`. Summing over those states gives
//! `f = sum_kappa w(kappa) f_j(kappa)`, where `f_j(kappa)` is the Jones
//! polynomial of piece `j` closed by `kappa` and the weight `w(kappa)` is
//! the writhe-normalized state sum of the complement rows that induce it.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::bracket::{jones, BracketError, StateTable};
use crate::laurent::LaurentPoly;
use crate::pairing::{Label, Pairing};
use crate::recombine::{glue_tables, GlueContext, RecombineError};
use crate::subdivide::GluingPlan;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectrumError {
    #[error("the plan has a single piece; subdivide with m >= 1")]
    NotSubdivided,
    #[error("piece {0} does not exist")]
    NoSuchPiece(usize),
    #[error("the factorization is implemented for closed diagrams only")]
    OpenDiagram,
    #[error(transparent)]
    Recombine(#[from] RecombineError),
    #[error(transparent)]
    Bracket(#[from] BracketError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrumEntry {
    pub closure: Pairing,
    pub weight: LaurentPoly,
    pub piece_jones: LaurentPoly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spectrum {
    pub piece: usize,
    /// Closures with nonzero weight first (sorted), then, when `complete`,
    /// every other closure of the piece's endpoints with weight 0.
    pub entries: Vec<SpectrumEntry>,
    /// Whether all closures of the piece are listed.
    pub complete: bool,
    /// `sum weight * piece_jones`.
    pub total: LaurentPoly,
}

/// Closures with zero weight are listed too when the piece has at most
/// this many endpoints.
const LIST_ALL_UP_TO: usize = 8;

/// Factorizes through piece `j` (0-based).
pub fn virtual_spectrum(plan: &GluingPlan, j: usize) -> Result<Spectrum, SpectrumError> {
    if plan.pieces.len() < 2 {
        return Err(SpectrumError::NotSubdivided);
    }
    if j >= plan.pieces.len() {
        return Err(SpectrumError::NoSuchPiece(j));
    }
    if !plan.endpoints.is_empty() {
        return Err(SpectrumError::OpenDiagram);
    }
    let piece = &plan.pieces[j];
    let transpositions = plan.transpositions();
    let mut inner = Vec::new();
    let mut outer = Vec::new();
    for (x, y) in transpositions {
        let touches = piece.endpoints().contains(&x) || piece.endpoints().contains(&y);
        if touches {
            outer.push((x, y));
        } else {
            inner.push((x, y));
        }
    }

    // Fold the complement's leaves together, consuming each transposition
    // as soon as both of its labels are present.
    let mut complement: Option<StateTable> = None;
    for (i, p) in plan.pieces.iter().enumerate() {
        if i == j {
            continue;
        }
        let t = crate::bracket::expand_piece(p)?;
        complement = Some(match complement {
            None => t,
            Some(acc) => {
                let have = |l: Label| acc.endpoints.binary_search(&l).is_ok() || t.endpoints.binary_search(&l).is_ok();
                let (now, later): (Vec<_>, Vec<_>) = inner.iter().partition(|(x, y)| have(*x) && have(*y));
                inner = later;
                glue_tables(&acc, &t, &GlueContext::new(now))?
            }
        });
    }
    let complement = complement.expect("at least one other piece");
    let partner: BTreeMap<Label, Label> = outer.iter().flat_map(|&(x, y)| [(x, y), (y, x)]).collect();

    let complement_writhe = LaurentPoly::writhe_factor(-complement.piece_writhe);
    let mut weights: BTreeMap<Pairing, LaurentPoly> = BTreeMap::new();
    for (tau, coef) in &complement.rows {
        // kappa(i) = sigma(tau(sigma(i))) for piece endpoints i.
        let kappa = Pairing::new(tau.pairs().iter().map(|&(a, b)| (partner[&a], partner[&b])))
            .expect("conjugate of a pairing is a pairing");
        *weights.entry(kappa).or_default() += coef * &complement_writhe;
    }

    let mut entries = Vec::new();
    let mut total = LaurentPoly::zero();
    for (closure, weight) in weights {
        let piece_jones = jones(piece, if piece.is_closed() { None } else { Some(&closure) })?;
        total += &weight * &piece_jones;
        entries.push(SpectrumEntry {
            closure,
            weight,
            piece_jones,
        });
    }
    let complete = piece.endpoints().len() <= LIST_ALL_UP_TO;
    if complete {
        for closure in Pairing::all_on(piece.endpoints()) {
            if entries.iter().any(|e| e.closure == closure) {
                continue;
            }
            let piece_jones = jones(piece, if piece.is_closed() { None } else { Some(&closure) })?;
            entries.push(SpectrumEntry {
                closure,
                weight: LaurentPoly::zero(),
                piece_jones,
            });
        }
    }
    Ok(Spectrum {
        piece: j,
        entries,
        complete,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{parse_pd, Arc, Diagram, End};
    use crate::subdivide::{subdivide, Shape};

    #[test]
    fn trefoil_factorizes() {
        let t = parse_pd("X 1 5 2 4\nX 3 1 4 6\nX 5 3 6 2").unwrap();
        let plan = subdivide(&t, 1, 0).unwrap();
        let want = jones(&t, None).unwrap();
        for j in 0..2 {
            let s = virtual_spectrum(&plan, j).unwrap();
            assert_eq!(s.total, want);
            assert!(s.complete);
            // A piece with 4 endpoints has 3 closures.
            assert_eq!(s.entries.len(), 3);
        }
        assert_eq!(virtual_spectrum(&plan, 2), Err(SpectrumError::NoSuchPiece(2)));
        let flat = subdivide(&t, 0, 0).unwrap();
        assert_eq!(virtual_spectrum(&flat, 0), Err(SpectrumError::NotSubdivided));
    }

    #[test]
    fn manual_two_piece_plan() {
        let tangle = parse_pd("X 1 2 3 4").unwrap();
        // Crossingless arcs 5-6 and 7-8 as the second piece.
        let arcs = Diagram::from_oriented_parts(
            Vec::new(),
            vec![
                Arc {
                    id: 10,
                    tail: End::Open(5),
                    head: End::Open(6),
                },
                Arc {
                    id: 11,
                    tail: End::Open(7),
                    head: End::Open(8),
                },
            ],
            0,
        )
        .unwrap();
        // Heads 3, 4 of the tangle run into the arcs and back to its feet.
        let glue = [(3, 5), (6, 2), (4, 7), (8, 1)];
        let plan = GluingPlan::with_shape(
            vec![tangle.clone(), arcs.clone()],
            &glue,
            &Shape::node(Shape::Leaf(0), Shape::Leaf(1)),
        )
        .unwrap();
        let closed = plan.reassemble().unwrap();
        let want = jones(&closed, None).unwrap();
        // Through the crossingless piece: one closure with the complement's
        // value as weight.
        let s = virtual_spectrum(&plan, 1).unwrap();
        assert_eq!(s.total, want);
        let nonzero: Vec<_> = s.entries.iter().filter(|e| !e.weight.is_zero()).collect();
        assert_eq!(nonzero.len(), 2);
        // Through the tangle: its closure by the arcs alone.
        let s = virtual_spectrum(&plan, 0).unwrap();
        let nonzero: Vec<_> = s.entries.iter().filter(|e| !e.weight.is_zero()).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].closure, Pairing::new([(1, 4), (2, 3)]).unwrap());
        assert_eq!(nonzero[0].weight, LaurentPoly::one());
        assert_eq!(s.total, want);
        assert_eq!(s.entries.iter().filter(|e| e.weight.is_zero()).count(), 2);
    }
}
