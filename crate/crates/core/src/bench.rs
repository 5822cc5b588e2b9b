//! Serial versus parallel timing on torus-link sweeps.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::bracket::{jones, BracketError};
use crate::generate::torus_2n;
use crate::pipeline::{compute_here, PipelineError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BenchError {
    #[error("at least one repetition is required")]
    NoRepetitions,
    #[error("n = {0} is too small for the requested subdivision")]
    TooSmall(usize),
    #[error("serial and parallel polynomials differ at n = {0}")]
    Mismatch(usize),
    #[error("thread pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Bracket(#[from] BracketError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Serial,
    Parallel,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Serial => "serial",
            Mode::Parallel => "parallel",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub mode: Mode,
    pub m: u32,
    pub workers: usize,
    pub seconds_median: f64,
    pub repetitions: usize,
    pub stddev: f64,
}

pub const CSV_HEADER: &str = "n,mode,m,workers,seconds_median,repetitions,stddev";

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{:.9},{},{:.9}",
            self.n,
            self.mode.name(),
            self.m,
            self.workers,
            self.seconds_median,
            self.repetitions,
            self.stddev
        )
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub m: u32,
    pub workers: usize,
    pub repetitions: usize,
    pub seed: u64,
}

fn median_and_stddev(mut xs: Vec<f64>) -> (f64, f64) {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    let median = if k % 2 == 1 {
        xs[k / 2]
    } else {
        (xs[k / 2 - 1] + xs[k / 2]) / 2.0
    };
    let mean = xs.iter().sum::<f64>() / k as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / k as f64;
    (median, var.sqrt())
}

/// Times serial enumeration and the parallel pipeline on `T(2, n)` for each
/// size, checking that both give the same polynomial. The parallel pool is
/// built once, outside the timed region.
pub fn run_sweep(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    if cfg.repetitions == 0 {
        return Err(BenchError::NoRepetitions);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        if n == 0 || 1usize << cfg.m > n {
            return Err(BenchError::TooSmall(n));
        }
        let d = torus_2n(n);
        let mut serial_times = Vec::with_capacity(cfg.repetitions);
        let mut parallel_times = Vec::with_capacity(cfg.repetitions);
        let mut serial = None;
        let mut parallel = None;
        for _ in 0..cfg.repetitions {
            let t = Instant::now();
            let p = jones(&d, None)?;
            serial_times.push(t.elapsed().as_secs_f64());
            serial = Some(p);

            let t = Instant::now();
            let out = pool.install(|| compute_here(&d, None, cfg.m, cfg.seed))?;
            parallel_times.push(t.elapsed().as_secs_f64());
            parallel = Some(out.polynomial);
        }
        if serial != parallel {
            return Err(BenchError::Mismatch(n));
        }
        for (mode, times, m, workers) in [
            (Mode::Serial, serial_times, 0, 1),
            (Mode::Parallel, parallel_times, cfg.m, cfg.workers),
        ] {
            let (seconds_median, stddev) = median_and_stddev(times);
            rows.push(BenchRow {
                n,
                mode,
                m,
                workers,
                seconds_median,
                repetitions: cfg.repetitions,
                stddev,
            });
        }
    }
    Ok(rows)
}

/// Least-squares slope of `log2(seconds)` against `n` over the rows of one
/// mode, in bits per crossing.
pub fn log2_slope(rows: &[BenchRow], mode: Mode) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.mode == mode && r.seconds_median > 0.0)
        .map(|r| (r.n as f64, r.seconds_median.log2()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats() {
        let (m, s) = median_and_stddev(vec![3.0, 1.0, 2.0]);
        assert_eq!(m, 2.0);
        assert!((s - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(median_and_stddev(vec![1.0, 4.0]).0, 2.5);
    }

    #[test]
    fn slope_of_exact_doubling() {
        let rows: Vec<BenchRow> = (10..15)
            .map(|n| BenchRow {
                n,
                mode: Mode::Serial,
                m: 0,
                workers: 1,
                seconds_median: 2f64.powi(n as i32) * 1e-6,
                repetitions: 1,
                stddev: 0.0,
            })
            .collect();
        assert!((log2_slope(&rows, Mode::Serial).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(log2_slope(&rows, Mode::Parallel), None);
    }

    #[test]
    fn small_sweep_shape() {
        let cfg = BenchConfig {
            sizes: vec![4, 6],
            m: 1,
            workers: 2,
            repetitions: 2,
            seed: 0,
        };
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[1].mode, Mode::Parallel);
        assert_eq!(rows[1].to_csv().split(',').count(), CSV_HEADER.split(',').count());
        let bad = BenchConfig { sizes: vec![1], ..cfg };
        assert_eq!(run_sweep(&bad), Err(BenchError::TooSmall(1)));
    }
}
