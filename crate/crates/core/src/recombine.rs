//! Gluing state tables up a [`GluingPlan`] and closing the result.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use thiserror::Error;

use crate::bracket::{catalan, expand_piece, BracketError, StateTable};
use crate::laurent::{pow_d, LaurentError, LaurentPoly};
use crate::pairing::{Label, Pairing};
use crate::permutation::segment_cycles_formula;
use crate::subdivide::{GluingPlan, PlanNode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecombineError {
    #[error("label {0} is an endpoint of both tables")]
    LabelCollision(Label),
    #[error("transposition label {0} is not an endpoint of either table")]
    DanglingTransposition(Label),
    #[error("diagram has open endpoints but no closure permutation was given")]
    MissingClosure,
    #[error("closure permutation does not pair exactly the open endpoints")]
    DomainMismatch,
    #[error("internal invariant breach: {0}")]
    NonDivisible(#[from] LaurentError),
    #[error(transparent)]
    Bracket(#[from] BracketError),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

/// Transpositions consumed by one gluing.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GlueContext {
    pub transpositions: Vec<(Label, Label)>,
}

impl GlueContext {
    pub fn new(transpositions: impl IntoIterator<Item = (Label, Label)>) -> Self {
        Self {
            transpositions: transpositions.into_iter().collect(),
        }
    }
}

/// Index form of a table row over a shared label list.
fn partner_table(labels: &[Label], key: &Pairing) -> Vec<u32> {
    let mut t = vec![u32::MAX; labels.len()];
    for &(a, b) in key.pairs() {
        let (i, j) = (
            labels.binary_search(&a).expect("row label in table"),
            labels.binary_search(&b).expect("row label in table"),
        );
        t[i] = j as u32;
        t[j] = i as u32;
    }
    t
}

type Partial = HashMap<Vec<u16>, Vec<LaurentPoly>>;

fn add_partial(acc: &mut Partial, key: &[u16], loops: usize, coef: LaurentPoly) {
    let slot = match acc.get_mut(key) {
        Some(v) => v,
        None => acc.entry(key.to_vec()).or_default(),
    };
    if slot.len() <= loops {
        slot.resize(loops + 1, LaurentPoly::zero());
    }
    slot[loops] += coef;
}

fn merge_partials(mut a: Partial, b: Partial) -> Partial {
    for (k, polys) in b {
        for (loops, p) in polys.into_iter().enumerate() {
            if !p.is_zero() {
                add_partial(&mut a, &k, loops, p);
            }
        }
    }
    a
}

/// Glues two tables through `ctx`. Each row pair contributes
/// `coef_a * coef_b * d^loops` to the row of the surviving pairing.
pub fn glue_tables(a: &StateTable, b: &StateTable, ctx: &GlueContext) -> Result<StateTable, RecombineError> {
    let mut labels: Vec<Label> = a.endpoints.iter().chain(&b.endpoints).copied().collect();
    labels.sort_unstable();
    if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
        return Err(RecombineError::LabelCollision(w[0]));
    }
    let idx = |l: Label| {
        labels
            .binary_search(&l)
            .map_err(|_| RecombineError::DanglingTransposition(l))
    };
    let mut glue = vec![u32::MAX; labels.len()];
    for &(x, y) in &ctx.transpositions {
        let (i, j) = (idx(x)?, idx(y)?);
        if glue[i] != u32::MAX || glue[j] != u32::MAX || i == j {
            return Err(RecombineError::LabelCollision(if glue[i] != u32::MAX { x } else { y }));
        }
        glue[i] = j as u32;
        glue[j] = i as u32;
    }
    let surviving: Vec<usize> = (0..labels.len()).filter(|&i| glue[i] == u32::MAX).collect();
    let out_labels: Vec<Label> = surviving.iter().map(|&i| labels[i]).collect();
    let mut out_index = vec![u16::MAX; labels.len()];
    for (k, &i) in surviving.iter().enumerate() {
        out_index[i] = k as u16;
    }

    let rows_a: Vec<Vec<u32>> = a.rows.iter().map(|(k, _)| partner_table(&labels, k)).collect();
    let rows_b: Vec<Vec<u32>> = b.rows.iter().map(|(k, _)| partner_table(&labels, k)).collect();
    let nb = rows_b.len();
    let total = rows_a.len() * nb;

    let combine = |mut acc: Partial, pair: usize| -> Partial {
        let (ia, ib) = (pair / nb, pair % nb);
        let (ta, tb) = (&rows_a[ia], &rows_b[ib]);
        let tau = |i: usize| -> usize {
            if ta[i] != u32::MAX {
                ta[i] as usize
            } else {
                tb[i] as usize
            }
        };
        let mut seen = vec![false; labels.len()];
        let mut key = vec![0u16; surviving.len()];
        for &s in &surviving {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut x = tau(s);
            while glue[x] != u32::MAX {
                seen[x] = true;
                let y = glue[x] as usize;
                seen[y] = true;
                x = tau(y);
            }
            seen[x] = true;
            key[out_index[s] as usize] = out_index[x];
            key[out_index[x] as usize] = out_index[s];
        }
        let mut loops = 0;
        for start in 0..labels.len() {
            if seen[start] {
                continue;
            }
            loops += 1;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                let y = tau(x);
                seen[y] = true;
                x = glue[y] as usize;
            }
        }
        let coef = &a.rows[ia].1 * &b.rows[ib].1;
        add_partial(&mut acc, &key, loops, coef);
        acc
    };
    let partial = (0..total)
        .into_par_iter()
        .fold(Partial::new, combine)
        .reduce(Partial::new, merge_partials);

    let mut rows: Vec<(Pairing, LaurentPoly)> = partial
        .into_iter()
        .map(|(key, polys)| {
            let mut coef = LaurentPoly::zero();
            for (loops, p) in polys.into_iter().enumerate() {
                if !p.is_zero() {
                    coef += &p * &pow_d(loops as u32);
                }
            }
            let table: Vec<u16> = key;
            (Pairing::from_partner_table(&out_labels, &table), coef)
        })
        .filter(|(_, c)| !c.is_zero())
        .collect();
    rows.sort_by(|x, y| x.0.cmp(&y.0));
    Ok(StateTable {
        endpoints: out_labels,
        rows,
        piece_writhe: a.piece_writhe + b.piece_writhe,
    })
}

/// Closes the root table: each row gains `d` per segment cycle of its
/// pairing with `sigma`, the rows are summed, one factor `d` is divided out
/// and the writhe normalization `(-A^3)^(-writhe)` applied.
pub fn finalize(root: &StateTable, sigma: Option<&Pairing>, writhe: i64) -> Result<LaurentPoly, RecombineError> {
    let empty = Pairing::empty();
    let sigma = match sigma {
        Some(s) => s,
        None if root.endpoints.is_empty() => &empty,
        None => return Err(RecombineError::MissingClosure),
    };
    if !sigma.covers_exactly(&root.endpoints) {
        return Err(RecombineError::DomainMismatch);
    }
    let mut sum = LaurentPoly::zero();
    for (tau, coef) in &root.rows {
        let orbits = segment_cycles_formula(tau, sigma).map_err(|_| RecombineError::DomainMismatch)?;
        sum += coef * &pow_d(orbits as u32);
    }
    let bracket = sum.div_exact_d()?;
    Ok(&bracket * &LaurentPoly::writhe_factor(-writhe))
}

/// Size of one table produced during a run.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TableStat {
    /// Height in the tree: 0 for leaves.
    pub level: usize,
    pub rows: usize,
    pub strands: usize,
}

impl TableStat {
    pub fn within_catalan_bound(&self) -> bool {
        self.rows as u128 <= catalan(self.strands)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    pub piece_crossings: Vec<usize>,
    pub piece_strands: Vec<usize>,
    /// Every leaf and intermediate table, sorted.
    pub tables: Vec<TableStat>,
}

impl RunStats {
    pub fn max_rows(&self) -> usize {
        self.tables.iter().map(|t| t.rows).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutput {
    pub polynomial: LaurentPoly,
    pub stats: RunStats,
}

/// Runs the plan on a pool of `workers` threads.
pub fn run_plan(plan: &GluingPlan, workers: usize, sigma: Option<&Pairing>) -> Result<RunOutput, RecombineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| RecombineError::Pool(e.to_string()))?;
    pool.install(|| run_plan_here(plan, sigma))
}

/// Runs the plan on the current rayon pool: sibling subtrees in parallel,
/// each leaf expanded and each gluing split into ranges of row pairs.
pub fn run_plan_here(plan: &GluingPlan, sigma: Option<&Pairing>) -> Result<RunOutput, RecombineError> {
    let tables = Mutex::new(Vec::new());
    let root = eval(&plan.root, plan, &tables)?;
    let polynomial = finalize(&root, sigma, plan.writhe)?;
    let mut tables = tables.into_inner().expect("stats lock");
    tables.sort();
    let stats = RunStats {
        piece_crossings: plan.pieces.iter().map(|p| p.n_crossings()).collect(),
        piece_strands: plan.pieces.iter().map(|p| p.endpoints().len() / 2).collect(),
        tables,
    };
    Ok(RunOutput { polynomial, stats })
}

fn eval(node: &PlanNode, plan: &GluingPlan, tables: &Mutex<Vec<TableStat>>) -> Result<StateTable, RecombineError> {
    let (table, level) = match node {
        PlanNode::Leaf { piece } => (expand_piece(&plan.pieces[*piece])?, 0),
        PlanNode::Internal {
            left,
            right,
            transpositions,
        } => {
            let (l, r) = rayon::join(|| eval(left, plan, tables), || eval(right, plan, tables));
            let ctx = GlueContext::new(transpositions.iter().copied());
            (glue_tables(&l?, &r?, &ctx)?, node.depth())
        }
    };
    tables.lock().expect("stats lock").push(TableStat {
        level,
        rows: table.len(),
        strands: table.strands(),
    });
    Ok(table)
}
