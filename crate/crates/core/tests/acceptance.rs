//! Acceptance criteria at their stated sample sizes and tolerances. Each
//! test writes one PASS/FAIL line to stderr (visible without --nocapture)
//! and then asserts. The seed is fixed in advance for every criterion.

use std::io::Write as _;
use std::time::{Duration, Instant};

use cltlab::cli::{cmd_moments, cmd_sample, cmd_verify, Format, Level, RunConfig, Window};
use cltlab::stats::Check;
use cltlab::verify::{self, ALPHA};
use cltlab::Config;

const SEED: u64 = 0;
const THREADS: usize = 1;

type Emit<'a> = Box<dyn Fn(&mut Vec<u8>) -> bool + 'a>;

fn six() -> Config {
    Config::new(6).unwrap()
}

fn summarize(checks: &[Check]) -> String {
    checks
        .iter()
        .map(|c| {
            format!(
                "{}={:.4}{}{}",
                short(&c.name),
                c.statistic,
                c.relation,
                c.threshold
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn short(name: &str) -> &str {
    name.rsplit(": ").next().unwrap_or(name)
}

fn report(id: u32, title: &str, checks: &[Check], elapsed: Duration, budget: Duration) {
    let timely = elapsed <= budget;
    let ok = checks.iter().all(|c| c.passed) && timely;
    let verdict = if ok { "PASS" } else { "FAIL" };
    let line = format!(
        "criterion {id:>2} {verdict} {title} ({:.1}s / {}s budget) {}",
        elapsed.as_secs_f64(),
        budget.as_secs(),
        summarize(checks)
    );
    let _ = writeln!(std::io::stderr(), "{line}");
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
    assert!(
        failed.is_empty(),
        "criterion {id} failed checks: {failed:#?}"
    );
    assert!(timely, "criterion {id} exceeded its runtime budget");
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

#[test]
fn sign_space_combinatorics() {
    let (checks, t) = timed(|| {
        let mut all = verify::nu_exact(&six()).unwrap();
        all.extend(verify::nu_exact(&Config::new(8).unwrap()).unwrap());
        all
    });
    report(
        1,
        "exact sign-space combinatorics, L in {6, 8}",
        &checks,
        t,
        Duration::from_secs(1),
    );
}

#[test]
fn transform_properties() {
    let (checks, t) =
        timed(|| verify::transform_properties(&six(), SEED, verify::TRANSFORM_VECTORS).unwrap());
    report(
        2,
        "transform properties on 10^5 vectors",
        &checks,
        t,
        Duration::from_secs(10),
    );
}

#[test]
fn level_one_sixth_moment() {
    let (checks, t) =
        timed(|| verify::mu1_top_moment(&six(), SEED, verify::MU_DRAWS, THREADS).unwrap());
    report(
        3,
        "level-1 sixth moment and gap",
        &checks,
        t,
        Duration::from_secs(60),
    );
}

#[test]
fn full_block_product() {
    let (checks, t) =
        timed(|| verify::full_block_product(&six(), SEED, verify::MU_DRAWS, THREADS).unwrap());
    assert!(checks[1].threshold <= -3.09 && ALPHA == 0.001);
    report(
        4,
        "full-block product moment",
        &checks,
        t,
        Duration::from_secs(60),
    );
}

#[test]
fn flip_route_equality() {
    let (checks, t) = timed(|| {
        let mut all =
            verify::psi_route_equality(&six(), SEED, verify::MU_DRAWS, 0, THREADS).unwrap();
        all.extend(verify::psi_route_equality(&six(), SEED, verify::MU_DRAWS, 1, THREADS).unwrap());
        all
    });
    assert_eq!(checks.len(), 6);
    report(
        5,
        "flip route vs sign route, orders 2/4/6, j in {0, 1}",
        &checks,
        t,
        Duration::from_secs(120),
    );
}

#[test]
fn abs_sum_lower_bound() {
    let (checks, t) = timed(|| {
        [6, 36]
            .map(|n| verify::abs_sum_lower_bound(SEED, verify::MU_DRAWS, n, THREADS).unwrap())
            .to_vec()
    });
    report(
        6,
        "E|sum| >= sqrt(n)/2 for n in {6, 36}",
        &checks,
        t,
        Duration::from_secs(30),
    );
}

#[test]
fn stationary_marginal() {
    let (checks, t) = timed(|| {
        verify::stationary_marginal(&six(), SEED, verify::STATIONARY_REPLICATES, THREADS).unwrap()
    });
    report(
        7,
        "marginal law of X_0",
        &checks,
        t,
        Duration::from_secs(60),
    );
}

#[test]
fn tuplewise_independence() {
    let (checks, t) = timed(|| {
        let windows = verify::sample_windows(
            &six(),
            SEED,
            verify::STATIONARY_REPLICATES,
            (1, 30),
            THREADS,
        )
        .unwrap();
        verify::stationary_tuplewise(&six(), SEED, &windows, verify::TUPLE_COUNT).unwrap()
    });
    report(
        8,
        "5-tuplewise independence on [1, 30]",
        &checks,
        t,
        Duration::from_secs(120),
    );
}

#[test]
fn abs_value_independence() {
    let (checks, t) = timed(|| {
        let windows = verify::sample_windows(
            &six(),
            SEED,
            verify::STATIONARY_REPLICATES,
            (1, 30),
            THREADS,
        )
        .unwrap();
        verify::stationary_abs_independence(SEED, &windows).unwrap()
    });
    report(
        9,
        "independence of |X_k|",
        &checks,
        t,
        Duration::from_secs(120),
    );
}

#[test]
fn strict_stationarity() {
    let (checks, t) = timed(|| {
        verify::stationary_shift(
            &six(),
            SEED,
            verify::STATIONARY_REPLICATES,
            8,
            &verify::SHIFTS,
            THREADS,
        )
        .unwrap()
    });
    report(
        10,
        "joint moments of shifted 8-windows, shifts 1/5/17",
        &checks,
        t,
        Duration::from_secs(120),
    );
}

#[test]
fn block_level_gap() {
    let (checks, t) =
        timed(|| verify::block_sequence_gap(&six(), SEED, verify::MU_DRAWS, THREADS).unwrap());
    report(
        11,
        "two aligned level-1 blocks, normalized sixth moment",
        &checks,
        t,
        Duration::from_secs(60),
    );
}

#[test]
fn stationary_partial_sums() {
    let (gap, t) = timed(|| {
        verify::clt(
            &six(),
            SEED,
            verify::CLT_REPLICATES,
            verify::CLT_WINDOW,
            THREADS,
        )
        .unwrap()
    });
    assert!((gap.reference - 13.547619047619047).abs() < 1e-9);
    report(
        12,
        "normalized partial sums of length 12",
        &gap.checks,
        t,
        Duration::from_secs(900),
    );
}

#[test]
fn determinism() {
    let rc = RunConfig {
        cfg: six(),
        independence_order: None,
        seed: 123,
        replicates: Some(2000),
        window: Window { lo: -10, hi: 40 },
        format: None,
        threads: 1,
    };
    let capture = |f: &dyn Fn(&mut Vec<u8>) -> bool| {
        let mut out = Vec::new();
        f(&mut out);
        out
    };
    let runs: Vec<(&str, Emit)> = vec![
        (
            "sample csv",
            Box::new(|o: &mut Vec<u8>| cmd_sample(&rc, o).unwrap()),
        ),
        (
            "sample json",
            Box::new(|o: &mut Vec<u8>| {
                cmd_sample(
                    &RunConfig {
                        format: Some(Format::Json),
                        ..rc
                    },
                    o,
                )
                .unwrap()
            }),
        ),
        (
            "verify nu",
            Box::new(|o: &mut Vec<u8>| cmd_verify(&rc, "nu", o).unwrap()),
        ),
        (
            "verify transforms",
            Box::new(|o: &mut Vec<u8>| cmd_verify(&rc, "transforms", o).unwrap()),
        ),
        (
            "verify stationary",
            Box::new(|o: &mut Vec<u8>| {
                cmd_verify(
                    &RunConfig {
                        replicates: Some(500),
                        ..rc
                    },
                    "stationary",
                    o,
                )
                .unwrap()
            }),
        ),
        (
            "moments",
            Box::new(|o: &mut Vec<u8>| cmd_moments(&rc, Level::Stationary, 6, 1, 2, o).unwrap()),
        ),
    ];
    let (checks, t) = timed(|| {
        runs.iter()
            .map(|(name, f)| {
                let (a, b) = (capture(f.as_ref()), capture(f.as_ref()));
                Check::equals(
                    format!("{name} byte mismatch"),
                    f64::from(u8::from(a != b || a.is_empty())),
                    0.0,
                )
            })
            .collect::<Vec<_>>()
    });
    report(
        13,
        "byte-identical output for identical seed and config",
        &checks,
        t,
        Duration::from_secs(60),
    );
}
