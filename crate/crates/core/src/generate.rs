//! Diagram and curve families for tests and benchmarks.

use rand::Rng;

use crate::diagram::{ArcId, Diagram, PdCode, PdItem};
use crate::pairing::Pairing;
use crate::projection::{project, Curve3D, Point};

/// PD code of the closure of a braid on `strands` strands. Generator `i`
/// (1-based) crosses positions `i` and `i + 1`; positive entries give
/// positive crossings. Strands never touched by a generator become loops.
pub fn braid_closure(strands: usize, word: &[i32]) -> PdCode {
    let mut current: Vec<ArcId> = (1..=strands as ArcId).collect();
    let mut next = strands as ArcId + 1;
    let mut crossings: Vec<[ArcId; 4]> = Vec::with_capacity(word.len());
    for &g in word {
        let i = g.unsigned_abs() as usize - 1;
        assert!(g != 0 && i + 1 < strands, "generator {g} out of range");
        let (left, right) = (current[i], current[i + 1]);
        let (new_left, new_right) = (next, next + 1);
        next += 2;
        if g > 0 {
            crossings.push([right, new_right, new_left, left]);
        } else {
            crossings.push([left, right, new_right, new_left]);
        }
        current[i] = new_left;
        current[i + 1] = new_right;
    }
    let rename = |a: ArcId| match current.iter().position(|&c| c == a) {
        Some(pos) if a > strands as ArcId => pos as ArcId + 1,
        _ => a,
    };
    let mut items: Vec<PdItem> = crossings.into_iter().map(|c| PdItem::Crossing(c.map(rename))).collect();
    for (pos, &c) in current.iter().enumerate() {
        if c == pos as ArcId + 1 {
            items.push(PdItem::Loop);
        }
    }
    PdCode { items }
}

/// The `(2, n)` torus link: the closure of the 2-braid `s1^n`.
pub fn torus_2n(n: usize) -> Diagram {
    braid_closure(2, &vec![1; n])
        .to_diagram()
        .expect("braid closures are valid")
}

/// `c` straight strands in general position, every pair crossing once.
/// Its state table has exactly the Catalan number of rows.
pub fn line_arrangement(c: usize) -> Diagram {
    let curves: Vec<Curve3D> = (1..=c)
        .map(|k| {
            let (s, b, z) = (k as f64, (k * k) as f64, k as f64);
            Curve3D::new(vec![[-12.0, -12.0 * s + b, z], [12.0, 12.0 * s + b, z]])
        })
        .collect();
    project(&curves, [0.0, 0.0, 1.0], 1e-9)
        .expect("line arrangement is generic")
        .diagram
}

/// A random linkoid with between 1 and `max_crossings` crossings, from the
/// projection of random open polylines, and a random closure of its
/// endpoints.
pub fn random_linkoid<R: Rng + ?Sized>(rng: &mut R, max_crossings: usize) -> (Diagram, Pairing) {
    loop {
        let comps = rng.gen_range(1..=2);
        let curves: Vec<Curve3D> = (0..comps)
            .map(|_| {
                let n = rng.gen_range(3..=6);
                Curve3D::new(
                    (0..n)
                        .map(|_| {
                            [
                                rng.gen_range(-1.0..1.0),
                                rng.gen_range(-1.0..1.0),
                                rng.gen_range(-1.0..1.0),
                            ]
                        })
                        .collect(),
                )
            })
            .collect();
        let xi: Point = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        if xi.iter().all(|x| x.abs() < 1e-3) {
            continue;
        }
        let Ok(p) = project(&curves, xi, 1e-9) else { continue };
        let n = p.diagram.n_crossings();
        if (1..=max_crossings).contains(&n) {
            let sigma = Pairing::random(p.diagram.endpoints(), rng).expect("even endpoint count");
            return (p.diagram, sigma);
        }
    }
}

/// A right-handed trefoil polyline. With `gap > 0` the curve is left open
/// by dropping points until its ends are at least `gap` apart.
pub fn trefoil_curve(points: usize, gap: f64) -> Curve3D {
    let mut pts: Vec<Point> = (0..points)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * (i as f64) / (points as f64);
            [
                t.sin() + 2.0 * (2.0 * t).sin(),
                t.cos() - 2.0 * (2.0 * t).cos(),
                (3.0 * t).sin(),
            ]
        })
        .collect();
    if gap <= 0.0 {
        pts.push(pts[0]);
    } else {
        let dist = |a: Point, b: Point| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
        while pts.len() > 2 && dist(pts[0], *pts.last().expect("nonempty")) < gap {
            pts.pop();
        }
    }
    Curve3D::new(pts)
}
