//! Pilot runs behind the pinned Monte Carlo tolerances of the acceptance
//! suite. Run with `cargo run --release -p prodsum --example pilot`.

use prodsum::asclt::{default_grid, run_asclt_path};
use prodsum::montecarlo::{run_clt_experiment, run_slln_experiment, ExperimentConfig};
use prodsum::statistics::{loo_log_statistic, max_relative_deviation, remainder_magnitude};
use prodsum::streaming::PowerSumState;
use prodsum::{sample, DistributionSpec, LimitLaw, StatisticKind};
use rayon::prelude::*;

const SEEDS: u64 = 50;

fn percentile(mut xs: Vec<f64>, q: f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let idx = ((xs.len() as f64 - 1.0) * q).round() as usize;
    xs[idx]
}

fn main() {
    let exp1 = DistributionSpec::Exponential { rate: 1.0 };
    let grid = default_grid(LimitLaw::StdNormal);

    println!("# ASCLT sup-gap, Exp(1), N = 20000, exact cutoff 2000, seeds 0..{SEEDS}");
    for kind in [StatisticKind::LeaveOneOutLogProduct, StatisticKind::StandardizedSum, StatisticKind::LinearizedSum] {
        let gaps: Vec<f64> = (0..SEEDS)
            .into_par_iter()
            .map(|s| run_asclt_path(&exp1, kind, 20_000, s, &grid, 2000).unwrap().sup_gap)
            .collect();
        println!(
            "{kind}: median {:.4} p95 {:.4} max {:.4}; 1.5 x p95 = {:.4}",
            percentile(gaps.clone(), 0.5),
            percentile(gaps.clone(), 0.95),
            percentile(gaps.clone(), 1.0),
            1.5 * percentile(gaps, 0.95)
        );
    }
    let diffs: Vec<f64> = (0..SEEDS)
        .into_par_iter()
        .map(|s| {
            let a = run_asclt_path(&exp1, StatisticKind::LeaveOneOutLogProduct, 20_000, s, &grid, 2000).unwrap();
            let b = run_asclt_path(&exp1, StatisticKind::LinearizedSum, 20_000, s, &grid, 2000).unwrap();
            (a.sup_gap - b.sup_gap).abs()
        })
        .collect();
    println!(
        "loo vs lin sup-gap difference: p95 {:.4} max {:.4}",
        percentile(diffs.clone(), 0.95),
        percentile(diffs, 1.0)
    );

    println!("# SLLN |gm-prefix - 1|, Exp(1), seeds 0..{SEEDS}");
    let reports: Vec<_> =
        (0..SEEDS).into_par_iter().map(|s| run_slln_experiment(&exp1, &[1_000, 10_000, 100_000], s).unwrap()).collect();
    for (i, n) in [1_000, 10_000, 100_000].iter().enumerate() {
        let errs: Vec<f64> = reports.iter().map(|r| r.rows[i].err_prefix).collect();
        println!("n = {n}: median {:.5} p95 {:.5}", percentile(errs.clone(), 0.5), percentile(errs, 0.95));
    }

    println!("# CLT KS distance, Exp(1), M = 5000, base seed 20240601");
    for kind in [StatisticKind::LeaveOneOutLogProduct, StatisticKind::PrefixLogProduct] {
        let mut cfg = ExperimentConfig::new(exp1, kind, vec![100, 1000, 10000], 5000, 20240601);
        cfg.workers = rayon::current_num_threads();
        let rep = run_clt_experiment(&cfg).unwrap();
        for r in &rep.rows {
            println!("{kind} n = {}: ks {:.4} mean {:.4} sd {:.4}", r.n, r.ks, r.mean, r.sd);
        }
    }

    println!("# Remainder magnitude / (gamma sqrt(n)/(n-1)), 200 paths");
    for n in [1000usize, 10000] {
        let vals: Vec<f64> = (0..200u64)
            .into_par_iter()
            .map(|r| remainder_magnitude(&sample(&exp1, n, 7, r).unwrap(), 1.0, 1.0).unwrap())
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        println!("n = {n}: mean {mean:.6}, ratio to expectation {:.4}", mean / ((n as f64).sqrt() / (n as f64 - 1.0)));
    }

    println!("# LIL ratio max_dev / sqrt(loglog n / n), 100 paths");
    for n in [1000usize, 10000, 100000] {
        let worst = (0..100u64)
            .into_par_iter()
            .map(|r| {
                let p = sample(&exp1, n, 8, r).unwrap();
                let lil = ((n as f64).ln().ln() / n as f64).sqrt();
                max_relative_deviation(&p, 1.0).unwrap() / lil
            })
            .reduce(|| 0.0, f64::max);
        println!("n = {n}: max ratio {worst:.4}");
    }

    println!("# |series - exact| for the leave-one-out statistic, Exp(1), 200 paths");
    for n in [1000usize, 4000, 10000] {
        let errs: Vec<f64> = (0..200u64)
            .into_par_iter()
            .map(|r| {
                let p = sample(&exp1, n, 10, r).unwrap();
                let mut st = PowerSumState::new(1.0).unwrap();
                p.iter().for_each(|&x| st.push(x).unwrap());
                (st.loo_log_series(1.0).unwrap().value - loo_log_statistic(&p, 1.0, 1.0).unwrap()).abs()
            })
            .collect();
        let over = errs.iter().filter(|&&e| e > 1e-6).count();
        println!(
            "n = {n}: median {:.2e} max {:.2e}, {over}/200 above 1e-6",
            percentile(errs.clone(), 0.5),
            percentile(errs, 1.0)
        );
    }

    println!("# exact loo at n = 1e4 on 100 paths (sanity)");
    let t: Vec<f64> = (0..100u64)
        .into_par_iter()
        .map(|r| loo_log_statistic(&sample(&exp1, 10_000, 9, r).unwrap(), 1.0, 1.0).unwrap())
        .collect();
    println!("mean {:.4}", t.iter().sum::<f64>() / 100.0);
}
