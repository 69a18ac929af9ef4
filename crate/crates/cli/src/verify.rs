//! The `verify` subcommand: approximation ratio against the exhaustive
//! optimum, sampled robustness of the interval family, and a tightness
//! witness for every finite bound.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use auction_sensitivity::io::FamilyFile;
use auction_sensitivity::oracle::{brute_force_minsum, random_euclidean_instance, sample_robustness, witness_nonrobust};
use auction_sensitivity::{assign, auction_sensitivity, IntervalFamily, MrtaInstance, Result, Side};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{exit, fixed, load_instance, CmdResult, Failure, Format};

pub enum Source {
    File(PathBuf),
    Random { m: usize, n: usize, count: usize, seed: u64 },
}

pub struct Options {
    pub family: Option<PathBuf>,
    pub draws: usize,
    pub epsilon: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceVerdict {
    pub instance: String,
    pub m: usize,
    pub n: usize,
    pub plan_cost: f64,
    pub optimum: f64,
    pub approx_ok: bool,
    pub draws: usize,
    pub violations: usize,
    /// Finite, non-saturated bounds that were enlarged.
    pub bounds_checked: usize,
    pub witnesses: usize,
    /// Enlargements for which no outcome-changing perturbation was found.
    pub safe_enlargements: Vec<String>,
}

impl InstanceVerdict {
    pub fn passed(&self) -> bool {
        self.approx_ok && self.violations == 0 && self.safe_enlargements.is_empty()
    }
}

/// Enlarges every bound that has room to grow and looks for a witness.
/// Unconstrained edges, lower bounds already equal to the cost, and
/// infinite or capped upper bounds are skipped.
pub fn tightness(
    instance: &MrtaInstance<f64>,
    family: &IntervalFamily<f64>,
    epsilon: f64,
) -> Result<(usize, usize, Vec<String>)> {
    let costs = &instance.costs;
    let (mut checked, mut found, mut safe) = (0, 0, Vec::new());
    for (i, e) in costs.edges().enumerate() {
        if family.is_unconstrained(i) {
            continue;
        }
        let mut sides = Vec::new();
        if family.lower[i] < costs.cost(e) {
            sides.push(Side::Lower);
        }
        if family.upper[i].is_finite() && !family.capped[i] {
            sides.push(Side::Upper);
        }
        for side in sides {
            checked += 1;
            match witness_nonrobust(costs, family, e, side, epsilon)? {
                Some(_) => found += 1,
                None => safe.push(format!("{} {:?}", instance.edge_label(e), side).to_lowercase()),
            }
        }
    }
    Ok((checked, found, safe))
}

pub fn verify_instance(
    instance: &MrtaInstance<f64>,
    family: Option<&IntervalFamily<f64>>,
    draws: usize,
    epsilon: f64,
    seed: u64,
) -> Result<InstanceVerdict> {
    let optimum = brute_force_minsum(&instance.costs)?.total_cost;
    let (plan, outcome) = assign(instance)?;
    let computed;
    let family = match family {
        Some(f) => f,
        None => {
            computed = auction_sensitivity(&instance.costs, &outcome)?;
            &computed
        }
    };
    let report = sample_robustness(&instance.costs, family, draws, seed)?;
    let (bounds_checked, witnesses, safe_enlargements) = tightness(instance, family, epsilon)?;
    Ok(InstanceVerdict {
        instance: instance.name.clone(),
        m: instance.m(),
        n: instance.n(),
        plan_cost: plan.total_cost,
        optimum,
        approx_ok: plan.total_cost <= 2.0 * optimum + 1e-9,
        draws,
        violations: report.violations.len(),
        bounds_checked,
        witnesses,
        safe_enlargements,
    })
}

/// `count` random unit-square instances drawn from one seeded stream.
pub fn random_instances(m: usize, n: usize, count: usize, seed: u64) -> Vec<MrtaInstance<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| random_euclidean_instance(m, n, &mut rng).with_name(format!("random-{i}")))
        .collect()
}

#[derive(Serialize)]
struct VerifyRecord<'a> {
    passed: bool,
    instances: &'a [InstanceVerdict],
}

pub fn cmd_verify(source: &Source, options: &Options, format: Format, out: &mut dyn Write) -> CmdResult {
    let instances = match source {
        Source::File(path) => {
            let mut inst = load_instance(path)?;
            if inst.name.is_empty() {
                inst.name = path.display().to_string();
            }
            vec![inst]
        }
        Source::Random { m, n, count, seed } => random_instances(*m, *n, *count, *seed),
    };
    let supplied = match &options.family {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            let file: FamilyFile = serde_json::from_str(&text)?;
            Some(file)
        }
        None => None,
    };

    let mut verdicts = Vec::with_capacity(instances.len());
    for (i, inst) in instances.iter().enumerate() {
        let family = supplied.as_ref().map(|f| f.to_family(inst)).transpose()?;
        let seed = options.seed.wrapping_add(i as u64);
        verdicts.push(verify_instance(inst, family.as_ref(), options.draws, options.epsilon, seed)?);
    }
    let passed = verdicts.iter().all(InstanceVerdict::passed);

    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &VerifyRecord { passed, instances: &verdicts })?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(
                out,
                "instance,m,n,plan_cost,optimum,ratio,draws,violations,bounds_checked,witnesses,status"
            )?;
            for v in &verdicts {
                let ratio = if v.optimum > 0.0 { v.plan_cost / v.optimum } else { 1.0 };
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    v.instance,
                    v.m,
                    v.n,
                    fixed(v.plan_cost, 6),
                    fixed(v.optimum, 6),
                    fixed(ratio, 4),
                    v.draws,
                    v.violations,
                    v.bounds_checked,
                    v.witnesses,
                    if v.passed() { "pass" } else { "FAIL" }
                )?;
            }
        }
    }
    Ok(if passed { exit::OK } else { exit::FAILED })
}
