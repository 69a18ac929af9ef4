//! The `bench` subcommand: wall time per subroutine and log-log growth
//! exponents in the number of tasks.

use std::io::Write;
use std::time::Instant;

use auction_sensitivity::{df_shortcut, error_intervals, initialiser, run_auction, Result};
use serde::Serialize;

use crate::verify::random_instances;
use crate::{exit, CmdResult, Format};

pub const SUBROUTINES: [&str; 4] = ["auction", "df_shortcut", "initialiser", "error_intervals"];

/// Growth exponent in `n` of each subroutine's worst-case bound at fixed `m`.
pub const EXPONENT_BOUNDS: [f64; 4] = [3.0, 3.0, 3.0, 3.0];

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Timing {
    pub m: usize,
    pub n: usize,
    pub trials: usize,
    /// Mean seconds per subroutine, in [`SUBROUTINES`] order.
    pub mean_secs: [f64; 4],
}

impl Timing {
    pub fn total(&self) -> f64 {
        self.mean_secs.iter().sum()
    }
}

pub fn time_pipeline(m: usize, n: usize, trials: usize, seed: u64) -> Result<Timing> {
    let mut sums = [0.0; 4];
    for inst in random_instances(m, n, trials, seed) {
        let costs = &inst.costs;
        let t0 = Instant::now();
        let outcome = run_auction(costs)?;
        let t1 = Instant::now();
        df_shortcut(costs, &outcome)?;
        let t2 = Instant::now();
        let i0 = initialiser(costs, &outcome)?;
        let t3 = Instant::now();
        error_intervals(costs, &outcome, &i0)?;
        let t4 = Instant::now();
        for (sum, (a, b)) in sums.iter_mut().zip([(t0, t1), (t1, t2), (t2, t3), (t3, t4)]) {
            *sum += (b - a).as_secs_f64();
        }
    }
    Ok(Timing {
        m,
        n,
        trials,
        mean_secs: sums.map(|s| s / trials.max(1) as f64),
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Exponent per subroutine, then one for the whole pipeline.
pub fn scaling_exponents(timings: &[Timing]) -> [f64; 5] {
    let slope = |f: &dyn Fn(&Timing) -> f64| {
        loglog_slope(&timings.iter().map(|t| (t.n as f64, f(t))).collect::<Vec<_>>())
    };
    [
        slope(&|t| t.mean_secs[0]),
        slope(&|t| t.mean_secs[1]),
        slope(&|t| t.mean_secs[2]),
        slope(&|t| t.mean_secs[3]),
        slope(&Timing::total),
    ]
}

#[derive(Serialize)]
struct BenchRecord {
    timings: Vec<Timing>,
    exponents: Option<Vec<ExponentRecord>>,
}

#[derive(Serialize)]
struct ExponentRecord {
    subroutine: &'static str,
    exponent: f64,
    bound: f64,
}

pub fn cmd_bench(
    m: usize,
    n: usize,
    trials: usize,
    sizes: &[usize],
    seed: u64,
    format: Format,
    out: &mut dyn Write,
) -> CmdResult {
    let ns: Vec<usize> = if sizes.is_empty() { vec![n] } else { sizes.to_vec() };
    let timings = ns
        .iter()
        .map(|&size| time_pipeline(m, size, trials, seed))
        .collect::<Result<Vec<_>>>()?;
    let exponents = (timings.len() >= 2).then(|| {
        let e = scaling_exponents(&timings);
        SUBROUTINES
            .iter()
            .chain(&["pipeline"])
            .zip(EXPONENT_BOUNDS.iter().chain(&[3.0]))
            .zip(e)
            .map(|((&subroutine, &bound), exponent)| ExponentRecord { subroutine, exponent, bound })
            .collect::<Vec<_>>()
    });

    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &BenchRecord { timings, exponents })?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(out, "m,n,trials,auction_ms,df_shortcut_ms,initialiser_ms,error_intervals_ms,total_ms")?;
            for t in &timings {
                let ms = t.mean_secs.map(|s| s * 1e3);
                writeln!(
                    out,
                    "{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4}",
                    t.m,
                    t.n,
                    t.trials,
                    ms[0],
                    ms[1],
                    ms[2],
                    ms[3],
                    t.total() * 1e3
                )?;
            }
            if let Some(exps) = &exponents {
                writeln!(out)?;
                writeln!(out, "subroutine,exponent,bound")?;
                for e in exps {
                    writeln!(out, "{},{:.3},{}", e.subroutine, e.exponent, e.bound)?;
                }
            }
        }
    }
    Ok(exit::OK)
}
