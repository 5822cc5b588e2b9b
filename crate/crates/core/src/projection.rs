//! Jones polynomials of open curves in 3-space.
//!
//! Curves are projected onto planes normal to sampled directions. Each
//! generic projection is a linkoid diagram; the writhe-normalized brackets
//! of those diagrams are averaged.

use std::collections::HashMap;
use std::fmt;

use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::diagram::{over_out_slot, slots_from_directions, Arc, ArcId, Diagram, End};
use crate::laurent::{LaurentPoly, RationalPoly};
use crate::pairing::{Label, Pairing};
use crate::recombine::{run_plan_here, RecombineError};
use crate::subdivide::{subdivide, SubdivideError};

pub type Point = [f64; 3];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectionError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("curve {0} needs at least 2 distinct consecutive points")]
    Degenerate(usize),
    #[error("no input curves")]
    Empty,
    #[error("every sampled direction gave a non-generic projection ({0} tried)")]
    AllRejected(usize),
    #[error("samples must be at least 1")]
    NoSamples,
    #[error("closure permutation does not pair the projection's endpoints")]
    DomainMismatch,
    #[error(transparent)]
    Subdivide(#[from] SubdivideError),
    #[error(transparent)]
    Recombine(#[from] RecombineError),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

/// A polyline. A curve whose last point equals its first is closed.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve3D {
    pub points: Vec<Point>,
}

impl Curve3D {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points }
    }

    pub fn is_closed(&self) -> bool {
        self.points.len() > 2 && self.points.first() == self.points.last()
    }
}

/// Parses whitespace-separated `x y z` lines; blank lines separate curves.
pub fn parse_xyz(text: &str) -> Result<Vec<Curve3D>, ProjectionError> {
    let mut curves = Vec::new();
    let mut cur: Vec<Point> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            // Only blank lines separate curves; comment-only lines do not.
            if raw.trim().is_empty() && !cur.is_empty() {
                curves.push(Curve3D::new(std::mem::take(&mut cur)));
            }
            continue;
        }
        let nums: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
        let nums = nums.map_err(|e| ProjectionError::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        match nums[..] {
            [x, y, z] if x.is_finite() && y.is_finite() && z.is_finite() => cur.push([x, y, z]),
            _ => {
                return Err(ProjectionError::Parse {
                    line: i + 1,
                    msg: "expected three finite coordinates".into(),
                })
            }
        }
    }
    if !cur.is_empty() {
        curves.push(Curve3D::new(cur));
    }
    validate(&curves)?;
    Ok(curves)
}

fn validate(curves: &[Curve3D]) -> Result<(), ProjectionError> {
    if curves.is_empty() {
        return Err(ProjectionError::Empty);
    }
    for (k, c) in curves.iter().enumerate() {
        if c.points.len() < 2 || c.points.windows(2).any(|w| w[0] == w[1]) {
            return Err(ProjectionError::Degenerate(k));
        }
    }
    Ok(())
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Why a direction was not generic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Rejection {
    ParallelOverlap,
    NearVertex,
    NearEndpoint,
    CloseCrossings,
    CurvesIntersect,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rejection::ParallelOverlap => "segments overlap in projection",
            Rejection::NearVertex => "crossing too close to a polyline vertex",
            Rejection::NearEndpoint => "curve endpoint too close to another segment",
            Rejection::CloseCrossings => "crossings too close together",
            Rejection::CurvesIntersect => "curves intersect in space",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct Projection {
    pub direction: Point,
    pub diagram: Diagram,
    pub writhe: i64,
}

struct Segment {
    comp: usize,
    index: usize,
    a: [f64; 2],
    b: [f64; 2],
    ha: f64,
    hb: f64,
}

struct Passage {
    crossing: u32,
    over: bool,
    dir: [f64; 2],
}

/// Projects along `xi` (normalized here). Over-strands are those further
/// along `xi`. `eps` is relative to the bounding-box diagonal.
pub fn project(curves: &[Curve3D], xi: Point, eps: f64) -> Result<Projection, Rejection> {
    let n = norm(xi);
    let xi = [xi[0] / n, xi[1] / n, xi[2] / n];
    let axis = (0..3)
        .min_by(|&i, &j| xi[i].abs().total_cmp(&xi[j].abs()))
        .expect("three axes");
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    let u = cross3(xi, e);
    let un = norm(u);
    let u = [u[0] / un, u[1] / un, u[2] / un];
    let v = cross3(xi, u);

    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in curves.iter().flat_map(|c| &c.points) {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let tol = eps * norm(sub(hi, lo)).max(f64::MIN_POSITIVE);

    let flat = |p: Point| [dot(p, u), dot(p, v)];
    let mut segs = Vec::new();
    for (k, c) in curves.iter().enumerate() {
        for (i, w) in c.points.windows(2).enumerate() {
            segs.push(Segment {
                comp: k,
                index: i,
                a: flat(w[0]),
                b: flat(w[1]),
                ha: dot(w[0], xi),
                hb: dot(w[1], xi),
            });
        }
    }
    let nseg = |k: usize| curves[k].points.len() - 1;
    let adjacent = |s: &Segment, t: &Segment| {
        s.comp == t.comp
            && (s.index.abs_diff(t.index) == 1
                || (curves[s.comp].is_closed() && s.index.abs_diff(t.index) == nseg(s.comp) - 1))
    };
    let point_seg_dist = |p: [f64; 2], s: &Segment| {
        let d = [s.b[0] - s.a[0], s.b[1] - s.a[1]];
        let len2 = d[0] * d[0] + d[1] * d[1];
        let t = (((p[0] - s.a[0]) * d[0] + (p[1] - s.a[1]) * d[1]) / len2).clamp(0.0, 1.0);
        let q = [s.a[0] + t * d[0], s.a[1] + t * d[1]];
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    };

    // Vertices near non-incident segments: open-curve ends are a separate
    // rejection reason because they bound the linkoid.
    for (k, c) in curves.iter().enumerate() {
        let last = c.points.len() - 1;
        for (i, p) in c.points.iter().enumerate() {
            let q = flat(*p);
            for s in &segs {
                let incident = s.comp == k
                    && (s.index == i
                        || s.index + 1 == i
                        || (c.is_closed() && ((i == 0 && s.index + 1 == last) || (i == last && s.index == 0))));
                if !incident && point_seg_dist(q, s) < tol {
                    let end = !c.is_closed() && (i == 0 || i == last);
                    return Err(if end {
                        Rejection::NearEndpoint
                    } else {
                        Rejection::NearVertex
                    });
                }
            }
        }
    }

    // (point, under (seg, t), over (seg, t)) per crossing
    type Found = ([f64; 2], (usize, f64), (usize, f64));
    let mut found: Vec<Found> = Vec::new();
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            let (s, t) = (&segs[i], &segs[j]);
            let ds = [s.b[0] - s.a[0], s.b[1] - s.a[1]];
            let dt = [t.b[0] - t.a[0], t.b[1] - t.a[1]];
            let ls = (ds[0] * ds[0] + ds[1] * ds[1]).sqrt();
            let lt = (dt[0] * dt[0] + dt[1] * dt[1]).sqrt();
            let denom = cross2(ds, dt);
            if adjacent(s, t) {
                if denom.abs() <= eps * ls * lt && ds[0] * dt[0] + ds[1] * dt[1] < 0.0 {
                    return Err(Rejection::ParallelOverlap);
                }
                continue;
            }
            if denom.abs() <= eps * ls * lt {
                let near = point_seg_dist(s.a, t) < tol
                    || point_seg_dist(s.b, t) < tol
                    || point_seg_dist(t.a, s) < tol
                    || point_seg_dist(t.b, s) < tol;
                if near {
                    return Err(Rejection::ParallelOverlap);
                }
                continue;
            }
            let w = [t.a[0] - s.a[0], t.a[1] - s.a[1]];
            let ps = cross2(w, dt) / denom;
            let pt = cross2(w, ds) / denom;
            if !(0.0..=1.0).contains(&ps) || !(0.0..=1.0).contains(&pt) {
                continue;
            }
            if ps * ls < tol || (1.0 - ps) * ls < tol || pt * lt < tol || (1.0 - pt) * lt < tol {
                return Err(Rejection::NearVertex);
            }
            let hs = s.ha + ps * (s.hb - s.ha);
            let ht = t.ha + pt * (t.hb - t.ha);
            if (hs - ht).abs() < tol {
                return Err(Rejection::CurvesIntersect);
            }
            let point = [s.a[0] + ps * ds[0], s.a[1] + ps * ds[1]];
            let (under, over) = if hs < ht {
                ((i, ps), (j, pt))
            } else {
                ((j, pt), (i, ps))
            };
            found.push((point, under, over));
        }
    }
    for a in 0..found.len() {
        for b in a + 1..found.len() {
            let (p, q) = (found[a].0, found[b].0);
            if ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt() < tol {
                return Err(Rejection::CloseCrossings);
            }
        }
    }

    // Passages along each component, in curve order.
    let mut along: Vec<Vec<(usize, f64, Passage)>> = (0..curves.len()).map(|_| Vec::new()).collect();
    for (id, (_, under, over)) in found.iter().enumerate() {
        for ((seg, t), is_over) in [(*under, false), (*over, true)] {
            let s = &segs[seg];
            along[s.comp].push((
                s.index,
                t,
                Passage {
                    crossing: id as u32 + 1,
                    over: is_over,
                    dir: [s.b[0] - s.a[0], s.b[1] - s.a[1]],
                },
            ));
        }
    }
    for list in &mut along {
        list.sort_by(|x, y| (x.0, x.1).partial_cmp(&(y.0, y.1)).expect("finite parameters"));
    }

    // Arc ids: consecutive along each component.
    let mut next_arc: ArcId = 1;
    let mut loops = 0;
    let mut label: Label = 1;
    let mut inout: HashMap<(u32, bool), (ArcId, ArcId, [f64; 2])> = HashMap::new();
    let mut plan: Vec<(usize, ArcId, Option<Label>)> = Vec::new();
    for (k, list) in along.iter().enumerate() {
        let closed = curves[k].is_closed();
        let p = list.len();
        let first = next_arc;
        if p == 0 {
            if closed {
                loops += 1;
            } else {
                plan.push((k, first, Some(label)));
                next_arc += 1;
                label += 2;
            }
            continue;
        }
        next_arc += if closed { p } else { p + 1 } as ArcId;
        for (i, (_, _, pass)) in list.iter().enumerate() {
            let (inc, out) = if closed {
                (first + ((i + p - 1) % p) as ArcId, first + i as ArcId)
            } else {
                (first + i as ArcId, first + i as ArcId + 1)
            };
            inout.insert((pass.crossing, pass.over), (inc, out, pass.dir));
        }
        plan.push((k, first, if closed { None } else { Some(label) }));
        if !closed {
            label += 2;
        }
    }

    let mut crossings = Vec::with_capacity(found.len());
    // (crossing, over, incoming) -> slot
    let mut slot_of: HashMap<(u32, bool, bool), u8> = HashMap::new();
    for id in 1..=found.len() as u32 {
        let (ui, uo, ud) = inout[&(id, false)];
        let (oi, oo, od) = inout[&(id, true)];
        let out = over_out_slot(ud, od);
        slot_of.insert((id, false, true), 0);
        slot_of.insert((id, false, false), 2);
        slot_of.insert((id, true, false), out);
        slot_of.insert((id, true, true), 4 - out);
        crossings.push((id, slots_from_directions((ui, uo, ud), (oi, oo, od))));
    }
    let end_at = |pass: &Passage, incoming: bool| End::Slot {
        crossing: pass.crossing,
        slot: slot_of[&(pass.crossing, pass.over, incoming)],
    };
    let mut arcs: Vec<Arc> = Vec::new();
    for (k, first, open) in plan {
        let list = &along[k];
        let p = list.len();
        match open {
            Some(l) if p == 0 => arcs.push(Arc {
                id: first,
                tail: End::Open(l),
                head: End::Open(l + 1),
            }),
            Some(l) => {
                arcs.push(Arc {
                    id: first,
                    tail: End::Open(l),
                    head: end_at(&list[0].2, true),
                });
                for i in 1..p {
                    arcs.push(Arc {
                        id: first + i as ArcId,
                        tail: end_at(&list[i - 1].2, false),
                        head: end_at(&list[i].2, true),
                    });
                }
                arcs.push(Arc {
                    id: first + p as ArcId,
                    tail: end_at(&list[p - 1].2, false),
                    head: End::Open(l + 1),
                });
            }
            None => {
                for i in 0..p {
                    arcs.push(Arc {
                        id: first + i as ArcId,
                        tail: end_at(&list[i].2, false),
                        head: end_at(&list[(i + 1) % p].2, true),
                    });
                }
            }
        }
    }
    let diagram = Diagram::from_oriented_parts(crossings, arcs, loops).expect("projection is a valid diagram");
    let writhe = diagram.writhe();
    Ok(Projection {
        direction: xi,
        diagram,
        writhe,
    })
}

/// Settings for [`jones_open`].
#[derive(Clone, Debug)]
pub struct OpenOptions {
    pub samples: usize,
    pub seed: u64,
    /// Requested subdivision depth; lowered per projection when a
    /// projection has too few crossings.
    pub m: u32,
    pub eps: f64,
    /// Closure in the projection's endpoint labels (component `k` has foot
    /// `2k + 1` and head `2k + 2`, counting open curves only). Defaults to
    /// each component's own endpoint pair.
    pub closure: Option<Pairing>,
}

impl Default for OpenOptions {
    fn default() -> Self {
        Self {
            samples: 150,
            seed: 0,
            m: 0,
            eps: 1e-9,
            closure: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OpenResult {
    pub polynomial: RationalPoly,
    /// Standard error of the mean per exponent of `A`.
    pub std_errors: Vec<(i64, f64)>,
    pub accepted: usize,
    pub rejected: usize,
    pub directions: Vec<Point>,
    /// Writhe-normalized bracket of every accepted projection.
    pub per_sample: Vec<LaurentPoly>,
    /// Closure convention used, for the output metadata.
    pub closure: String,
}

/// Samples `opts.samples` generic directions uniformly on the sphere
/// (rejected directions are redrawn) and averages the writhe-normalized
/// brackets of the projections. Runs on the current rayon pool.
pub fn jones_open(curves: &[Curve3D], opts: &OpenOptions) -> Result<OpenResult, ProjectionError> {
    validate(curves)?;
    if opts.samples == 0 {
        return Err(ProjectionError::NoSamples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let limit = 1000 + 100 * opts.samples;
    let mut projections = Vec::with_capacity(opts.samples);
    let mut tried = 0;
    while projections.len() < opts.samples {
        if tried == limit {
            return Err(ProjectionError::AllRejected(tried));
        }
        tried += 1;
        let xi: Point = [
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
        ];
        if norm(xi) < 1e-12 {
            continue;
        }
        if let Ok(p) = project(curves, xi, opts.eps) {
            projections.push(p);
        }
    }
    let per_sample: Vec<LaurentPoly> = projections
        .par_iter()
        .map(|p| projection_jones(&p.diagram, opts))
        .collect::<Result<_, _>>()?;

    let n = per_sample.len() as u64;
    let sum: LaurentPoly = per_sample.iter().cloned().sum();
    let polynomial = RationalPoly::average(&sum, n);
    let mut exps: Vec<i64> = per_sample.iter().flat_map(|p| p.terms().map(|(e, _)| e)).collect();
    exps.sort_unstable();
    exps.dedup();
    let std_errors = exps
        .into_iter()
        .map(|e| {
            let xs: Vec<f64> = per_sample
                .iter()
                .map(|p| p.coeff(e).to_f64().unwrap_or(f64::NAN))
                .collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let var = if xs.len() > 1 {
                xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
            } else {
                0.0
            };
            (e, (var / xs.len() as f64).sqrt())
        })
        .collect();
    Ok(OpenResult {
        polynomial,
        std_errors,
        accepted: projections.len(),
        rejected: tried - projections.len(),
        directions: projections.iter().map(|p| p.direction).collect(),
        per_sample,
        closure: opts
            .closure
            .as_ref()
            .map_or_else(|| "strand".to_string(), |s| s.to_string()),
    })
}

/// [`jones_open`] on a dedicated pool of `workers` threads.
pub fn jones_open_with_workers(
    curves: &[Curve3D],
    opts: &OpenOptions,
    workers: usize,
) -> Result<OpenResult, ProjectionError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| ProjectionError::Pool(e.to_string()))?;
    pool.install(|| jones_open(curves, opts))
}

fn projection_jones(d: &Diagram, opts: &OpenOptions) -> Result<LaurentPoly, ProjectionError> {
    let sigma = match &opts.closure {
        Some(s) if s.covers_exactly(d.endpoints()) => s.clone(),
        Some(_) => return Err(ProjectionError::DomainMismatch),
        None => d.strand_permutation().clone(),
    };
    let n = d.n_crossings();
    let max_m = if n < 2 { 0 } else { n.ilog2() };
    let plan = subdivide(d, opts.m.min(max_m), opts.seed)?;
    let sigma = if d.is_closed() { None } else { Some(&sigma) };
    Ok(run_plan_here(&plan, sigma)?.polynomial)
}

/// Rational polynomial coefficients as floats, for tolerance checks.
pub fn coefficient_f64(p: &RationalPoly, exp: i64) -> f64 {
    let c = p.coeff(exp);
    if c.is_zero() {
        0.0
    } else {
        c.numer().to_f64().unwrap_or(f64::NAN) / c.denom().to_f64().unwrap_or(f64::NAN)
    }
}
