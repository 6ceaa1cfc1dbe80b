use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use prodsum::{make_distribution, sample};

fn prodsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prodsum")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn csv_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_owned).collect()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn clt_writes_one_row_per_n() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("report.csv");
    let gp = dir.path().join("report.gp");
    let out = prodsum(&[
        "clt",
        "--dist",
        "exponential:1",
        "--stat",
        "loo",
        "--n",
        "100,1000,10000",
        "--reps",
        "300",
        "--seed",
        "42",
        "--out",
        p(&csv),
        "--plot",
        p(&gp),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let lines = csv_lines(&csv);
    assert_eq!(lines[0], "n,M,ks,mean,sd,mean_remainder,mean_maxdev,seconds");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("100,300,") && lines[3].starts_with("10000,300,"));
    assert!(stderr(&out).contains("\"baseSeed\": 42"));
    let script = fs::read_to_string(&gp).unwrap();
    assert!(script.contains("set logscale x") && script.contains(p(&csv)));
}

#[test]
fn asclt_writes_the_nineteen_point_grid() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("asclt.csv");
    let gp = dir.path().join("asclt.gp");
    let out = prodsum(&[
        "asclt",
        "--dist",
        "exponential:1",
        "--stat",
        "loo",
        "--N",
        "20000",
        "--seed",
        "7",
        "--exact-cutoff",
        "2000",
        "--out",
        p(&csv),
        "--plot",
        p(&gp),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let lines = csv_lines(&csv);
    assert_eq!(lines[0], "x,A_N,F_limit,gap");
    assert_eq!(lines.len(), 20);
    let err = stderr(&out);
    assert!(err.contains("n = 2..=20000"));
    assert!(err.contains("series mode from n = 2001"));
    assert_eq!(fs::read_to_string(&gp).unwrap().matches(" using ").count(), 2);
}

#[test]
fn slln_and_dist_table_run() {
    let out = prodsum(&["slln", "--dist", "gamma:2:0.5", "--n", "10,100,1000", "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("n,gm_prefix,gm_loo,err_prefix,err_loo\n"));

    let out = prodsum(&["dist-table", "--dist", "exponential:1,uniform:0.5:1.5", "--samples", "1000"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(2).unwrap().starts_with("uniform:0.5:1.5,1,0.288675134594812"));
}

#[test]
fn usage_errors_exit_two() {
    let bogus = prodsum(&["clt", "--stat", "bogus"]);
    assert_eq!(code(&bogus), 2);
    let err = stderr(&bogus);
    for name in ["loo", "rw", "lin", "std", "gm-prefix", "gm-loo"] {
        assert!(err.contains(name), "{err}");
    }
    assert_eq!(code(&prodsum(&["clt", "--dist", "exponential:1", "--stat", "loo", "--frobnicate"])), 2);
    assert_eq!(code(&prodsum(&["no-such-command"])), 2);
    assert_eq!(code(&prodsum(&["clt", "--stat", "loo", "--n", "10", "--reps", "10"])), 2);
    assert_eq!(code(&prodsum(&["clt", "--dist", "normal:0:1", "--stat", "loo"])), 2);
    assert_eq!(code(&prodsum(&["asclt", "--dist", "exponential:1", "--stat", "gm-loo", "--N", "10"])), 2);
    assert_eq!(code(&prodsum(&["--help"])), 0);
}

#[test]
fn invalid_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{ not json").unwrap();
    assert_eq!(code(&prodsum(&["clt", "--config", p(&cfg)])), 2);
    fs::write(&cfg, r#"{"spec": "exponential:1", "kind": "loo", "nList": [10], "M": 5, "baseSeed": 1, "bogus": 3}"#)
        .unwrap();
    assert_eq!(code(&prodsum(&["clt", "--config", p(&cfg)])), 2);
    assert_eq!(code(&prodsum(&["clt", "--config", p(&dir.path().join("missing.json"))])), 2);
}

#[test]
fn emitted_config_reproduces_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = |name: &str| dir.path().join(name);
    let first = prodsum(&[
        "clt",
        "--dist",
        "gamma:4:0.5",
        "--stat",
        "rw",
        "--n",
        "20,200",
        "--reps",
        "200",
        "--seed",
        "5",
        "--emit-config",
        p(&d("clt.json")),
        "--out",
        p(&d("a.csv")),
    ]);
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    let again = prodsum(&["clt", "--config", p(&d("clt.json")), "--out", p(&d("b.csv"))]);
    assert_eq!(code(&again), 0, "{}", stderr(&again));
    assert_eq!(fs::read(d("a.csv")).unwrap(), fs::read(d("b.csv")).unwrap());

    let first = prodsum(&[
        "asclt",
        "--dist",
        "lognormal:0:0.5",
        "--stat",
        "loo",
        "--N",
        "3000",
        "--seed",
        "9",
        "--exact-cutoff",
        "500",
        "--emit-config",
        p(&d("asclt.json")),
        "--out",
        p(&d("c.csv")),
    ]);
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    let again = prodsum(&["asclt", "--config", p(&d("asclt.json")), "--out", p(&d("e.csv"))]);
    assert_eq!(code(&again), 0, "{}", stderr(&again));
    assert_eq!(fs::read(d("c.csv")).unwrap(), fs::read(d("e.csv")).unwrap());

    // flags win over the file
    let seeded = prodsum(&["asclt", "--config", p(&d("asclt.json")), "--seed", "10", "--out", p(&d("f.csv"))]);
    assert_eq!(code(&seeded), 0);
    assert_ne!(fs::read(d("c.csv")).unwrap(), fs::read(d("f.csv")).unwrap());
}

fn reported_max(out: &Output) -> f64 {
    let text = String::from_utf8_lossy(&out.stdout);
    let value = text.split("= ").nth(1).unwrap().split_whitespace().next().unwrap();
    value.parse().unwrap()
}

#[test]
fn identity_holds_for_correct_mean() {
    for (dist, n) in [("exponential:1", "1000"), ("gamma:4:0.5", "10000")] {
        let out = prodsum(&["identity", "--dist", dist, "--n", n, "--reps", "100", "--seed", "1"]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(reported_max(&out) <= 1e-10);
    }
}

#[test]
fn identity_detects_a_wrong_mean() {
    let out = prodsum(&[
        "identity",
        "--dist",
        "exponential:1",
        "--n",
        "1000",
        "--reps",
        "100",
        "--seed",
        "1",
        "--mu-override",
        "1.1",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAILED"));
    // with mu' in place of mu the linearized sum is D / (mu' gamma sqrt n)
    // while the standardized sum is D / (sigma sqrt n)
    let spec = make_distribution("exponential", &[1.0]).unwrap();
    let expected = (0..100)
        .map(|rep| {
            let path = sample(&spec, 1000, 1, rep).unwrap();
            let d: f64 = path.iter().map(|x| x - 1.1).sum();
            let root_n = 1000f64.sqrt();
            (d / (1.1 * root_n) - d / root_n).abs()
        })
        .fold(0.0, f64::max);
    let got = reported_max(&out);
    assert!((got - expected).abs() <= 1e-9 * expected, "{got} vs {expected}");
}
