//! End-to-end behaviour of the experiment drivers on pinned seeds.

use prodsum::asclt::{default_grid, run_asclt_on_path, LogAvgAccumulator};
use prodsum::distributions::PathSampler;
use prodsum::montecarlo::{clt_law, run_clt_experiment, run_slln_experiment, ExperimentConfig};
use prodsum::statistics::{geometric_mean_loo, max_relative_deviation};
use prodsum::{make_distribution, normal_cdf, run_asclt_path, sample, LimitLaw, StatisticKind};

fn exp1() -> prodsum::DistributionSpec {
    make_distribution("exponential", &[1.0]).unwrap()
}

fn csv_bytes(report: &prodsum::ConvergenceReport) -> Vec<u8> {
    let mut out = Vec::new();
    report.write_csv(&mut out, false).unwrap();
    out
}

#[test]
fn worker_count_does_not_change_reports() {
    for kind in [StatisticKind::LeaveOneOutLogProduct, StatisticKind::PrefixLogProduct, StatisticKind::GeometricMeanLoo]
    {
        let mut config = ExperimentConfig::new(exp1(), kind, vec![10, 100, 1000], 400, 99);
        let one = run_clt_experiment(&config).unwrap();
        config.workers = 8;
        let eight = run_clt_experiment(&config).unwrap();
        assert_eq!(csv_bytes(&one), csv_bytes(&eight), "{kind:?}");
        for (a, b) in one.rows.iter().zip(&eight.rows) {
            assert_eq!(a.ks.to_bits(), b.ks.to_bits());
            assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        }
    }
}

#[test]
fn product_scale_ks_equals_log_scale_ks() {
    for kind in [StatisticKind::LeaveOneOutLogProduct, StatisticKind::PrefixLogProduct] {
        let log = ExperimentConfig::new(exp1(), kind, vec![50, 500], 1000, 3);
        let mut prod = log.clone();
        prod.product_scale = true;
        prod.compare_law = clt_law(kind, &prod.spec, true);
        let a = run_clt_experiment(&log).unwrap();
        let b = run_clt_experiment(&prod).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert!((x.ks - y.ks).abs() <= 1e-12, "{kind:?}: {} vs {}", x.ks, y.ks);
        }
    }
}

#[test]
fn single_replicate_report() {
    let config = ExperimentConfig::new(exp1(), StatisticKind::StandardizedSum, vec![2], 1, 11);
    let report = run_clt_experiment(&config).unwrap();
    let row = &report.rows[0];
    let t = row.mean;
    assert_eq!(row.reps, 1);
    assert!(row.sd.is_nan());
    let expected = (1.0 - normal_cdf(t)).max(normal_cdf(t));
    assert!((row.ks - expected).abs() <= 1e-15);
}

#[test]
fn remainder_column_scales_like_inverse_root_n() {
    let config = ExperimentConfig::new(exp1(), StatisticKind::LeaveOneOutLogProduct, vec![100, 1000, 10_000], 200, 5);
    let report = run_clt_experiment(&config).unwrap();
    for row in &report.rows {
        let n = row.n as f64;
        let expected = n / ((n - 1.0) * n.sqrt());
        let ratio = row.mean_remainder / expected;
        assert!((0.5..=2.0).contains(&ratio), "n = {}: ratio {ratio}", row.n);
        assert!(row.mean_max_deviation > 0.0 && row.mean_max_deviation < 1.0);
    }
}

#[test]
fn exact_cutoff_barely_moves_the_asclt_gap() {
    let grid = default_grid(LimitLaw::StdNormal);
    let horizon = 20_000;
    let exact = run_asclt_path(&exp1(), StatisticKind::LeaveOneOutLogProduct, horizon, 7, &grid, horizon).unwrap();
    let mixed = run_asclt_path(&exp1(), StatisticKind::LeaveOneOutLogProduct, horizon, 7, &grid, 1000).unwrap();
    assert_eq!(exact.mode_switch, None);
    assert_eq!(mixed.mode_switch, Some(1001));
    assert!((exact.sup_gap - mixed.sup_gap).abs() <= 1e-4, "{} vs {}", exact.sup_gap, mixed.sup_gap);
}

#[test]
fn log_and_linearized_asclt_runs_agree() {
    let grid = default_grid(LimitLaw::StdNormal);
    let loo = run_asclt_path(&exp1(), StatisticKind::LeaveOneOutLogProduct, 20_000, 7, &grid, 2000).unwrap();
    let lin = run_asclt_path(&exp1(), StatisticKind::LinearizedSum, 20_000, 7, &grid, 2000).unwrap();
    let std = run_asclt_path(&exp1(), StatisticKind::StandardizedSum, 20_000, 7, &grid, 2000).unwrap();
    assert!((loo.sup_gap - lin.sup_gap).abs() <= 0.05, "loo sup-gap {} vs linearized {}", loo.sup_gap, lin.sup_gap);
    // same statistic computed two ways
    assert!((lin.sup_gap - std.sup_gap).abs() <= 1e-9);
    assert!(loo.a_n.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn asclt_on_two_points_is_a_step() {
    let grid = default_grid(LimitLaw::StdNormal);
    let path = [0.5, 2.0];
    let r = run_asclt_on_path(&exp1(), StatisticKind::StandardizedSum, &path, &grid, 2).unwrap();
    let t2 = (0.5 - 1.0 + 2.0 - 1.0) / 2f64.sqrt();
    let gap = grid.iter().map(|&x| ((if t2 <= x { 1.0 } else { 0.0 }) - normal_cdf(x)).abs()).fold(0.0, f64::max);
    assert_eq!(r.sup_gap, gap);
}

#[test]
fn indicator_flips_are_bounded_by_near_grid_weight() {
    let spec = exp1();
    let horizon = 20_000;
    let grid = default_grid(LimitLaw::StdNormal);
    let eps = 1e-9;
    let mut running = 0.0;
    let ts: Vec<f64> = PathSampler::new(spec, 7, 0)
        .take(horizon)
        .map(|x| {
            running += x - 1.0;
            running
        })
        .enumerate()
        .map(|(i, s)| s / ((i + 1) as f64).sqrt())
        .collect();
    let run = |shift: f64| {
        let mut acc = LogAvgAccumulator::new(grid.clone()).unwrap();
        for (i, &t) in ts.iter().enumerate().skip(1) {
            acc.accumulate(i + 1, t + shift).unwrap();
        }
        acc
    };
    let base = run(0.0);
    let near: f64 = ts
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, t)| grid.iter().any(|g| (*t - g).abs() <= eps))
        .map(|(i, _)| 1.0 / (i + 1) as f64)
        .sum::<f64>()
        / base.total_weight();
    assert!(near < 1e-3);
    let a = base.evaluate().unwrap();
    for shift in [eps, -eps] {
        let b = run(shift).evaluate().unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= near + 1e-15);
        }
    }
}

#[test]
fn sample_mean_of_a_million_exponentials() {
    let path = sample(&exp1(), 1_000_000, 2024, 0).unwrap();
    let mean = path.iter().sum::<f64>() / path.len() as f64;
    assert!((mean - 1.0).abs() <= 0.01);
}

#[test]
fn geometric_means_converge_to_mu() {
    let report = run_slln_experiment(&exp1(), &[1000, 10_000, 100_000], 2024).unwrap();
    let last = report.rows.last().unwrap();
    assert!(last.err_prefix <= 0.02 && last.err_loo <= 0.02);
    let path = sample(&exp1(), 100_000, 2024, 0).unwrap();
    assert!((geometric_mean_loo(&path).unwrap() - last.gm_loo).abs() <= 1e-12);

    let almost_constant = make_distribution("twopoint", &[2.0, 2.0 + 1e-9, 0.5]).unwrap();
    let r = run_slln_experiment(&almost_constant, &[10, 100, 1000], 1).unwrap();
    for row in &r.rows {
        assert!((row.gm_prefix - 2.0).abs() <= 1e-8 && (row.gm_loo - 2.0).abs() <= 1e-8);
    }
}

#[test]
fn max_deviation_stays_on_the_lil_scale() {
    for n in [1000usize, 10_000, 100_000] {
        let scale = ((n as f64).ln().ln() / n as f64).sqrt();
        for stream in 0..100 {
            let path = sample(&exp1(), n, 4242, stream).unwrap();
            let ratio = max_relative_deviation(&path, 1.0).unwrap() / scale;
            assert!(ratio < 10.0, "n = {n}, stream {stream}: {ratio}");
        }
    }
}
