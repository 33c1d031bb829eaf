use std::process::{Command, Output};

use cltlab::parallel::replicate_seed;
use cltlab::stationary::StationaryProcess;
use cltlab::Config;

fn cltlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cltlab"))
        .args(args)
        .env_remove("CLTLAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn sample_reports_chosen_piece_count() {
    let o = cltlab(&["--independence-order", "5", "--replicates", "2", "sample"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let header = text.lines().next().unwrap();
    assert!(header.contains("pieces=6"), "{header}");
    assert_eq!(text.lines().nth(1), Some("replicate,k,x"));
    assert_eq!(text.lines().count(), 2 + 2 * 30);
}

#[test]
fn sample_output_is_byte_identical() {
    let args = [
        "--seed",
        "42",
        "--replicates",
        "50",
        "--window",
        "-5:20",
        "sample",
    ];
    assert_eq!(cltlab(&args).stdout, cltlab(&args).stdout);
    let json = [
        "--seed",
        "42",
        "--replicates",
        "5",
        "--format",
        "json",
        "sample",
    ];
    assert_eq!(cltlab(&json).stdout, cltlab(&json).stdout);
}

#[test]
fn seed_from_environment() {
    let flag = cltlab(&["--seed", "9", "--replicates", "3", "sample"]);
    let env = Command::new(env!("CARGO_BIN_EXE_cltlab"))
        .args(["--replicates", "3", "sample"])
        .env("CLTLAB_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(flag.stdout, env.stdout);
}

#[test]
fn origin_window_returns_base_draw() {
    let o = cltlab(&[
        "--seed",
        "3",
        "--replicates",
        "20",
        "--window",
        "0:0",
        "sample",
    ]);
    let cfg = Config::new(6).unwrap();
    let rows: Vec<String> = stdout(&o).lines().skip(2).map(str::to_owned).collect();
    assert_eq!(rows.len(), 20);
    for (r, row) in rows.iter().enumerate() {
        let x: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        let base = StationaryProcess::new(&cfg, replicate_seed(3, r as u64)).base_value(0);
        assert_eq!(x, base, "replicate {r}");
    }
}

#[test]
fn floats_round_trip() {
    let o = cltlab(&[
        "--seed",
        "5",
        "--replicates",
        "4",
        "--window",
        "1:3",
        "sample",
    ]);
    let cfg = Config::new(6).unwrap();
    for row in stdout(&o).lines().skip(2) {
        let f: Vec<&str> = row.split(',').collect();
        let (r, k): (u64, i64) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        let w = StationaryProcess::new(&cfg, replicate_seed(5, r))
            .window(1, 3)
            .unwrap();
        assert_eq!(f[2].parse::<f64>().unwrap(), w.get(k).unwrap());
    }
}

#[test]
fn verify_report_is_deterministic_and_self_describing() {
    let args = [
        "--seed",
        "11",
        "--replicates",
        "20000",
        "verify",
        "--suite",
        "nu",
    ];
    let (a, b) = (cltlab(&args), cltlab(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    for c in checks {
        for key in [
            "name",
            "statistic",
            "threshold",
            "relation",
            "passed",
            "samples",
            "seed",
        ] {
            assert!(c.get(key).is_some(), "missing {key}");
        }
    }
    assert_eq!(report["pieces"], 6);
}

#[test]
fn exit_codes() {
    assert_eq!(cltlab(&["--L", "5", "sample"]).status.code(), Some(2));
    assert_eq!(
        cltlab(&["--window", "4:1", "sample"]).status.code(),
        Some(2)
    );
    assert_eq!(
        cltlab(&["verify", "--suite", "unknown"]).status.code(),
        Some(2)
    );
    assert_eq!(cltlab(&["moments", "--power", "9"]).status.code(), Some(2));
    assert_eq!(cltlab(&["--no-such-flag"]).status.code(), Some(2));
}

#[test]
fn moments_prints_reference() {
    let o = cltlab(&[
        "--replicates",
        "50000",
        "moments",
        "--level",
        "mu_n",
        "--depth",
        "1",
        "--power",
        "6",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let reference = report["reference"].as_f64().unwrap();
    assert!((reference - 2329.392857).abs() < 1e-6);
}

#[test]
fn choose_l_for_orders() {
    for (n, l) in [("2", 6), ("5", 6), ("6", 8), ("9", 10)] {
        let o = cltlab(&["--independence-order", n, "--format", "csv", "choose-l"]);
        assert_eq!(stdout(&o).lines().nth(1).unwrap(), format!("{n},{l}"));
    }
}
