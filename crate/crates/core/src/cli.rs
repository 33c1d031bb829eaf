//! Command-line front end. Commands write their report to any `Write` sink
//! and return whether every check passed, so they can be driven from tests.

use std::io::Write;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{pieces_for_order, Config};
use crate::error::{Error, Result};
use crate::measures::{sample_block_sequence, sample_mu};
use crate::parallel::{map_reduce, replicate_seed, Collected};
use crate::rng::RandomSource;
use crate::stationary::{sample_window, WindowSample};
use crate::stats::{
    gaussian_moment, iid_uniform_sum_moment, mu1_sum_moment, two_block_sum_moment, Check,
    MeanAccumulator, MomentEstimate,
};
use crate::vecops::sum_vec;
use crate::verify::{run_suite, Suite, SuiteReport, VerifyOptions};

pub const DEFAULT_REPLICATES: u64 = 100_000;
pub const MAX_POWER: u32 = 8;

/// Replicates buffered per batch when sampling with several threads.
const SAMPLE_BATCH: u64 = 65_536;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Level {
    #[value(name = "mu_n")]
    #[serde(rename = "mu_n")]
    MuN,
    #[serde(rename = "blocks")]
    Blocks,
    #[serde(rename = "stationary")]
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("window '{s}' is not of the form LO:HI"));
        let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
        let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(Error::InvalidWindow { lo, hi });
        }
        Ok(Self { lo, hi })
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cltlab",
    version,
    about = "Sample and verify a stationary, tuplewise independent sequence whose partial sums are not asymptotically normal"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Requested independence order N; picks the smallest valid piece count.
    #[arg(long, global = true, conflicts_with = "pieces")]
    pub independence_order: Option<usize>,
    /// Piece count L (even, at least 6).
    #[arg(long = "L", global = true)]
    pub pieces: Option<usize>,
    #[arg(long, global = true, env = "CLTLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Number of replicates; verify uses per-check defaults when omitted.
    #[arg(long, global = true)]
    pub replicates: Option<u64>,
    #[arg(
        long,
        global = true,
        default_value = "1:30",
        allow_hyphen_values = true
    )]
    pub window: String,
    /// Output format; defaults to csv for `sample` and json otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Emit window samples of the stationary sequence.
    Sample,
    /// Run a verification suite.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Estimate a moment of a block sum or a normalized partial sum.
    Moments {
        #[arg(long, value_enum, default_value = "stationary")]
        level: Level,
        #[arg(long, default_value_t = 6)]
        power: u32,
        /// Recursion depth for `mu_n`, block level for `blocks`.
        #[arg(long, default_value_t = 1)]
        depth: u32,
        /// Number of aligned blocks for `blocks`.
        #[arg(long, default_value_t = 2)]
        blocks: usize,
    },
    /// Print the piece count used for an independence order.
    ChooseL,
}

/// Validated parameters shared by every command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub cfg: Config,
    pub independence_order: Option<usize>,
    pub seed: u64,
    pub replicates: Option<u64>,
    pub window: Window,
    pub format: Option<Format>,
    pub threads: usize,
}

impl RunConfig {
    pub fn from_args(args: &CommonArgs) -> Result<Self> {
        let cfg = match (args.independence_order, args.pieces) {
            (Some(order), _) => Config::for_independence_order(order)?,
            (None, Some(l)) => Config::new(l)?,
            (None, None) => Config::new(6)?,
        };
        if args.replicates == Some(0) {
            return Err(Error::InvalidArgument("replicates must be positive".into()));
        }
        if args.threads == 0 {
            return Err(Error::InvalidArgument("threads must be positive".into()));
        }
        Ok(Self {
            cfg,
            independence_order: args.independence_order,
            seed: args.seed,
            replicates: args.replicates,
            window: args.window.parse()?,
            format: args.format,
            threads: args.threads,
        })
    }

    fn replicates_or_default(&self) -> u64 {
        self.replicates.unwrap_or(DEFAULT_REPLICATES)
    }
}

/// Exit status for an error: 3 for internal limits hit while sampling,
/// 2 for everything caused by the configuration.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::StabilizationCap(_) => 3,
        _ => 2,
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::InvalidArgument(format!("write failed: {e}"))
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    writeln!(out, "{text}").map_err(io_err)
}

#[derive(Serialize)]
struct SampleHeader {
    pieces: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    independence_order: Option<usize>,
    seed: u64,
    replicates: u64,
    window: [i64; 2],
}

#[derive(Serialize)]
struct SampleReport<'a> {
    #[serde(flatten)]
    header: &'a SampleHeader,
    samples: &'a [WindowSample],
}

/// Writes `replicate, k, X_k` rows (csv) or one JSON object holding every
/// window sample. Always succeeds unless sampling fails.
pub fn cmd_sample(rc: &RunConfig, out: &mut dyn Write) -> Result<bool> {
    let reps = rc.replicates_or_default();
    let (lo, hi) = (rc.window.lo, rc.window.hi);
    let header = SampleHeader {
        pieces: rc.cfg.pieces(),
        independence_order: rc.independence_order,
        seed: rc.seed,
        replicates: reps,
        window: [lo, hi],
    };
    let format = rc.format.unwrap_or(Format::Csv);
    if format == Format::Csv {
        let order = rc
            .independence_order
            .map_or(String::new(), |n| format!(" independence_order={n}"));
        writeln!(
            out,
            "# pieces={}{order} seed={} replicates={reps} window={lo}:{hi}",
            header.pieces, rc.seed
        )
        .map_err(io_err)?;
        writeln!(out, "replicate,k,x").map_err(io_err)?;
    }
    let mut all = Vec::new();
    let mut start = 0;
    while start < reps {
        let count = SAMPLE_BATCH.min(reps - start);
        let Collected(batch) = map_reduce(count, rc.threads, Collected::default, |acc, r| {
            acc.0.push(sample_window(
                &rc.cfg,
                lo,
                hi,
                replicate_seed(rc.seed, start + r),
            )?);
            Ok(())
        })?;
        match format {
            Format::Csv => {
                for (i, w) in batch.iter().enumerate() {
                    let r = start + i as u64;
                    for (k, x) in (lo..=hi).zip(&w.values) {
                        writeln!(out, "{r},{k},{}", fmt_f64(*x)).map_err(io_err)?;
                    }
                }
            }
            Format::Json => all.extend(batch),
        }
        start += count;
    }
    if format == Format::Json {
        write_json(
            out,
            &SampleReport {
                header: &header,
                samples: &all,
            },
        )?;
    }
    Ok(true)
}

fn csv_checks(out: &mut dyn Write, checks: &[Check]) -> Result<()> {
    writeln!(
        out,
        "name,relation,statistic,threshold,passed,samples,seed,estimate,std_error,reference"
    )
    .map_err(io_err)?;
    for c in checks {
        let (est, se) = c.estimate.map_or((String::new(), String::new()), |e| {
            (fmt_f64(e.value), fmt_f64(e.std_error))
        });
        let reference = c.reference.map_or(String::new(), fmt_f64);
        writeln!(
            out,
            "\"{}\",{},{},{},{},{},{},{est},{se},{reference}",
            c.name.replace('"', "'"),
            c.relation,
            fmt_f64(c.statistic),
            fmt_f64(c.threshold),
            c.passed,
            c.samples,
            c.seed
        )
        .map_err(io_err)?;
    }
    Ok(())
}

pub fn verify_report(rc: &RunConfig, suite: &str) -> Result<SuiteReport> {
    let suite: Suite = suite.parse()?;
    let opts = VerifyOptions {
        cfg: rc.cfg,
        seed: rc.seed,
        replicates: rc.replicates,
        threads: rc.threads,
        window: (rc.window.lo, rc.window.hi),
    };
    run_suite(&opts, suite)
}

pub fn cmd_verify(rc: &RunConfig, suite: &str, out: &mut dyn Write) -> Result<bool> {
    let report = verify_report(rc, suite)?;
    match rc.format.unwrap_or(Format::Json) {
        Format::Json => write_json(out, &report)?,
        Format::Csv => csv_checks(out, &report.checks)?,
    }
    Ok(report.passed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentsReport {
    pub level: Level,
    pub pieces: usize,
    pub power: u32,
    /// Depth for `mu_n`, block level for `blocks`; absent for `stationary`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    /// Number of summed coordinates.
    pub length: u64,
    /// Whether the sum is divided by `sqrt(length)` before raising.
    pub normalized: bool,
    pub seed: u64,
    pub estimate: MomentEstimate,
    /// Exact value of the estimated moment, when known.
    pub reference: Option<f64>,
    /// The same moment for i.i.d. uniform summands.
    pub iid_reference: f64,
    /// The Gaussian moment, for normalized sums.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaussian_reference: Option<f64>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Moment `power` of a block sum (`mu_n`, unnormalized) or of a normalized
/// sum over aligned blocks or over the window of the stationary sequence.
pub fn moments_report(
    rc: &RunConfig,
    level: Level,
    power: u32,
    depth: u32,
    blocks: usize,
) -> Result<MomentsReport> {
    if power == 0 || power > MAX_POWER {
        return Err(Error::UnsupportedPower(power));
    }
    let cfg = &rc.cfg;
    let l = cfg.pieces();
    let reps = rc.replicates_or_default();
    let too_deep = || Error::DepthCap {
        depth,
        cap: cfg.max_depth(),
    };
    let (length, normalized) = match level {
        Level::MuN => (cfg.block_len(depth).ok_or_else(too_deep)? as u64, false),
        Level::Blocks => {
            if blocks == 0 {
                return Err(Error::InvalidArgument("blocks must be positive".into()));
            }
            (
                cfg.block_len(depth).ok_or_else(too_deep)? as u64 * blocks as u64,
                true,
            )
        }
        Level::Stationary => ((rc.window.hi - rc.window.lo + 1) as u64, true),
    };
    let scale = if normalized {
        1.0 / (length as f64).sqrt()
    } else {
        1.0
    };
    let p = power as i32;
    let acc = match level {
        Level::MuN => {
            let root = RandomSource::new(rc.seed, "moments-mu", u64::from(depth));
            map_reduce(reps, rc.threads, MeanAccumulator::new, |acc, r| {
                acc.push(sum_vec(&sample_mu(cfg, depth, &root.child(r))?).powi(p));
                Ok(())
            })?
        }
        Level::Blocks => {
            let root = RandomSource::new(rc.seed, "moments-blocks", u64::from(depth));
            map_reduce(reps, rc.threads, MeanAccumulator::new, |acc, r| {
                let seq = sample_block_sequence(cfg, depth, blocks, &root.child(r))?;
                acc.push((sum_vec(&seq) * scale).powi(p));
                Ok(())
            })?
        }
        Level::Stationary => map_reduce(reps, rc.threads, MeanAccumulator::new, |acc, r| {
            let w = sample_window(cfg, rc.window.lo, rc.window.hi, replicate_seed(rc.seed, r))?;
            acc.push((sum_vec(&w.values) * scale).powi(p));
            Ok(())
        })?,
    };
    let estimate = acc.estimate()?;
    let norm = if normalized {
        (length as f64).powi(p / 2)
    } else {
        1.0
    };
    let symmetric_zero = power % 2 == 1;
    let iid_reference = if symmetric_zero {
        0.0
    } else {
        iid_uniform_sum_moment(length, power)? / norm
    };
    // moments below order L only involve (L-1)-tuples, which are independent
    let reference = if symmetric_zero || (power as usize) < l {
        Some(iid_reference)
    } else {
        match (level, depth, blocks) {
            (Level::MuN, 1, _) => Some(mu1_sum_moment(cfg, power)?),
            (Level::Blocks, 1, 1) => Some(mu1_sum_moment(cfg, power)? / norm),
            (Level::Blocks, 1, 2) => Some(two_block_sum_moment(cfg, power)? / norm),
            _ => None,
        }
    };
    let checks: Vec<Check> = reference
        .map(|r| {
            Check::at_most(
                format!("|z| of moment {power} vs exact"),
                estimate.z_against(r).abs(),
                4.0,
            )
            .with_estimate(estimate, Some(r))
            .with_seed(rc.seed)
        })
        .into_iter()
        .collect();
    let passed = checks.iter().all(|c| c.passed);
    Ok(MomentsReport {
        level,
        pieces: l,
        power,
        depth: (level != Level::Stationary).then_some(depth),
        length,
        normalized,
        seed: rc.seed,
        estimate,
        reference,
        iid_reference,
        gaussian_reference: normalized.then(|| gaussian_moment(power)),
        checks,
        passed,
    })
}

pub fn cmd_moments(
    rc: &RunConfig,
    level: Level,
    power: u32,
    depth: u32,
    blocks: usize,
    out: &mut dyn Write,
) -> Result<bool> {
    let report = moments_report(rc, level, power, depth, blocks)?;
    match rc.format.unwrap_or(Format::Json) {
        Format::Json => write_json(out, &report)?,
        Format::Csv => {
            writeln!(
                out,
                "level,pieces,power,length,seed,estimate,std_error,count,reference,iid_reference"
            )
            .map_err(io_err)?;
            let level = serde_json::to_value(report.level)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                level.as_str().unwrap_or_default(),
                report.pieces,
                report.power,
                report.length,
                report.seed,
                fmt_f64(report.estimate.value),
                fmt_f64(report.estimate.std_error),
                report.estimate.count,
                report.reference.map_or(String::new(), fmt_f64),
                fmt_f64(report.iid_reference)
            )
            .map_err(io_err)?;
        }
    }
    Ok(report.passed)
}

#[derive(Serialize)]
struct ChoiceReport {
    independence_order: Option<usize>,
    pieces: usize,
}

pub fn cmd_choose_l(rc: &RunConfig, out: &mut dyn Write) -> Result<bool> {
    let pieces = match rc.independence_order {
        Some(order) => pieces_for_order(order)?,
        None => rc.cfg.pieces(),
    };
    let report = ChoiceReport {
        independence_order: rc.independence_order,
        pieces,
    };
    match rc.format.unwrap_or(Format::Json) {
        Format::Json => write_json(out, &report)?,
        Format::Csv => {
            writeln!(out, "independence_order,pieces").map_err(io_err)?;
            let order = rc
                .independence_order
                .map_or(String::new(), |n| n.to_string());
            writeln!(out, "{order},{pieces}").map_err(io_err)?;
        }
    }
    Ok(true)
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = RunConfig::from_args(&cli.common).and_then(|rc| match &cli.command {
        Command::Sample => cmd_sample(&rc, out),
        Command::Verify { suite } => cmd_verify(&rc, suite, out),
        Command::Moments {
            level,
            power,
            depth,
            blocks,
        } => cmd_moments(&rc, *level, *power, *depth, *blocks, out),
        Command::ChooseL => cmd_choose_l(&rc, out),
    });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
