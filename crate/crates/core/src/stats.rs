//! Moment estimation, exact moment oracles, goodness-of-fit tests and the
//! partial-sum moment gap check.

use std::str::FromStr;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::parallel::{map_reduce, replicate_seed, Merge};
use crate::stationary::{StationaryProcess, WindowSample};
use crate::SQRT3;

/// Streaming mean and variance (Welford), mergeable with Chan's update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl MeanAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Sample mean with its standard error; needs at least two samples.
    pub fn estimate(&self) -> Result<MomentEstimate> {
        if self.count < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: self.count as usize,
            });
        }
        let n = self.count as f64;
        Ok(MomentEstimate {
            value: self.mean,
            std_error: (self.m2 / (n - 1.0) / n).sqrt(),
            count: self.count,
        })
    }
}

impl Merge for MeanAccumulator {
    fn merge(&mut self, other: Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other;
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        self.mean += delta * nb / n;
        self.m2 += other.m2 + delta * delta * na * nb / n;
        self.count += other.count;
    }
}

/// A Monte Carlo mean with the standard error of that mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub std_error: f64,
    pub count: u64,
}

impl MomentEstimate {
    /// Pools two estimates over disjoint samples.
    pub fn merge(&self, other: &MomentEstimate) -> MomentEstimate {
        let mut a = self.to_accumulator();
        a.merge(other.to_accumulator());
        a.estimate().expect("pooled count is at least 4")
    }

    fn to_accumulator(self) -> MeanAccumulator {
        let n = self.count as f64;
        MeanAccumulator {
            count: self.count,
            mean: self.value,
            m2: self.std_error * self.std_error * n * (n - 1.0),
        }
    }

    /// `(value - reference) / std_error`.
    pub fn z_against(&self, reference: f64) -> f64 {
        (self.value - reference) / self.std_error
    }
}

/// z-score of `a - b` for estimates from independent samples.
pub fn two_sample_z(a: &MomentEstimate, b: &MomentEstimate) -> f64 {
    (a.value - b.value) / a.std_error.hypot(b.std_error)
}

/// Mean of `x^power` over `samples`, with standard error.
pub fn estimate_moment<I>(samples: I, power: u32) -> Result<MomentEstimate>
where
    I: IntoIterator<Item = f64>,
{
    if power == 0 {
        return Err(Error::UnsupportedPower(0));
    }
    let mut acc = MeanAccumulator::new();
    for x in samples {
        acc.push(x.powi(power as i32));
    }
    acc.estimate()
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `E Z^m` for standard normal `Z`.
pub fn gaussian_moment(m: u32) -> f64 {
    if m % 2 == 1 {
        return 0.0;
    }
    (1..m).step_by(2).map(f64::from).product()
}

/// `E U^a` for `U` uniform on `[-sqrt 3, sqrt 3]`.
pub fn uniform_moment(a: u32) -> f64 {
    if a % 2 == 1 {
        0.0
    } else {
        abs_uniform_moment(a)
    }
}

/// `E |U|^a = 3^(a/2) / (a + 1)`.
pub fn abs_uniform_moment(a: u32) -> f64 {
    SQRT3.powi(a as i32) / f64::from(a + 1)
}

fn check_even_order(m: u32) -> Result<()> {
    if matches!(m, 2 | 4 | 6 | 8) {
        Ok(())
    } else {
        Err(Error::UnsupportedPower(m))
    }
}

/// Partitions of `m` into even parts, each part at most `max`.
fn even_partitions(m: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if m == 0 {
        out.push(prefix.clone());
        return;
    }
    let mut part = max.min(m);
    part -= part % 2;
    while part >= 2 {
        prefix.push(part);
        even_partitions(m - part, part, prefix, out);
        prefix.pop();
        part -= 2;
    }
}

/// Exact `E (U_1 + .. + U_p)^m` for i.i.d. uniforms on `[-sqrt 3, sqrt 3]`,
/// by multinomial expansion over partitions of `m` into even exponents.
pub fn iid_uniform_sum_moment(p: u64, m: u32) -> Result<f64> {
    check_even_order(m)?;
    let mut partitions = Vec::new();
    even_partitions(m, m, &mut Vec::new(), &mut partitions);
    let mut total = 0.0;
    for parts in partitions {
        let k = parts.len() as u64;
        if k > p {
            continue;
        }
        // distinct variables for the k exponents, up to reordering of equal ones
        let falling: f64 = (0..k).map(|i| (p - i) as f64).product();
        let mut multiplicity = 1.0;
        let mut run = 1;
        for w in parts.windows(2) {
            if w[0] == w[1] {
                run += 1;
                multiplicity *= f64::from(run);
            } else {
                run = 1;
            }
        }
        let coefficient = factorial(m) / parts.iter().map(|&a| factorial(a)).product::<f64>();
        let moments: f64 = parts.iter().map(|&a| uniform_moment(a)).product();
        total += coefficient * falling / multiplicity * moments;
    }
    Ok(total)
}

/// Exact `E (sum Y)^m` for one level-1 block `Y`.
///
/// Expanding over the sign vector, terms whose exponents are all even match
/// the i.i.d. case, terms with mixed parity vanish, and terms whose `L`
/// exponents are all odd pick up `E prod V = -1`. The all-odd sum is
/// `m! [t^m] (sum_{a odd} E|U|^a t^a / a!)^L`.
pub fn mu1_sum_moment(cfg: &Config, m: u32) -> Result<f64> {
    check_even_order(m)?;
    let iid = iid_uniform_sum_moment(cfg.pieces() as u64, m)?;
    let deg = m as usize;
    let term: Vec<f64> = (0..=m)
        .map(|a| {
            if a % 2 == 1 {
                abs_uniform_moment(a) / factorial(a)
            } else {
                0.0
            }
        })
        .collect();
    let mut poly = vec![0.0; deg + 1];
    poly[0] = 1.0;
    for _ in 0..cfg.pieces() {
        let mut next = vec![0.0; deg + 1];
        for (i, &c) in poly.iter().enumerate().filter(|(_, &c)| c != 0.0) {
            for (a, &t) in term.iter().enumerate().take(deg + 1 - i) {
                next[i + a] += c * t;
            }
        }
        poly = next;
    }
    Ok(iid - factorial(m) * poly[deg])
}

/// Exact `E (B_1 + B_2)^m` for two independent level-1 block sums.
pub fn two_block_sum_moment(cfg: &Config, m: u32) -> Result<f64> {
    check_even_order(m)?;
    let block = |k: u32| {
        if k == 0 {
            Ok(1.0)
        } else {
            mu1_sum_moment(cfg, k)
        }
    };
    let mut total = 0.0;
    for k in (0..=m).step_by(2) {
        total += binomial(m, k) * block(k)? * block(m - k)?;
    }
    Ok(total)
}

/// The universal bound `E Z^L - 8^(-L/2) L! L^(-L)` on the normalized
/// `L`-th partial-sum moment of the stationary sequence.
pub fn universal_gap_bound(cfg: &Config) -> f64 {
    let l = cfg.pieces() as u32;
    gaussian_moment(l) - gap_constant(cfg)
}

/// `8^(-L/2) L! L^(-L)`.
pub fn gap_constant(cfg: &Config) -> f64 {
    let l = cfg.pieces() as u32;
    8f64.powf(-f64::from(l) / 2.0) * factorial(l) * f64::from(l).powi(-(l as i32))
}

/// Reference distributions accepted by [`ks_statistic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ReferenceCdf {
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    UniformUnps3,
}

impl ReferenceCdf {
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::UniformUnps3 => ((x + SQRT3) / (2.0 * SQRT3)).clamp(0.0, 1.0),
        }
    }
}

impl FromStr for ReferenceCdf {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform_unps3" => Ok(Self::UniformUnps3),
            other => Err(Error::UnknownDistribution(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Asymptotic Kolmogorov survival function `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let s: f64 = (1..=20)
            .map(|j| {
                let k = f64::from(2 * j - 1);
                (-k * k * pi2 / (8.0 * lambda * lambda)).exp()
            })
            .sum();
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let s: f64 = (1..=100)
            .map(|j| {
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                let j = f64::from(j);
                sign * (-2.0 * j * j * lambda * lambda).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// One-sample Kolmogorov-Smirnov test against `cdf` with the asymptotic
/// p-value (Stephens' small-sample correction to the scaling).
pub fn ks_statistic(samples: &[f64], cdf: ReferenceCdf) -> Result<KsResult> {
    ks_with_cdf(samples, |x| cdf.cdf(x))
}

pub fn ks_with_cdf<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsResult> {
    if samples.len() < 100 {
        return Err(Error::InsufficientData {
            needed: 100,
            got: samples.len(),
        });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let sn = n.sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: u64,
    pub p_value: f64,
}

pub fn chi_square_sf(statistic: f64, df: u64) -> f64 {
    ChiSquared::new(df as f64)
        .expect("positive degrees of freedom")
        .sf(statistic)
}

/// Pearson goodness of fit of `counts` against the cell probabilities
/// `probs`.
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> Result<ChiSquareResult> {
    if counts.len() != probs.len() || counts.len() < 2 {
        return Err(Error::InvalidArgument(
            "need matching counts and probabilities".into(),
        ));
    }
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let statistic = counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = p * n as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let df = counts.len() as u64 - 1;
    Ok(ChiSquareResult {
        statistic,
        df,
        p_value: chi_square_sf(statistic, df),
    })
}

pub fn chi_square_uniform(counts: &[u64]) -> Result<ChiSquareResult> {
    let p = 1.0 / counts.len() as f64;
    chi_square_gof(counts, &vec![p; counts.len()])
}

/// Index of the sign pattern of `values`: bit `i` set when `values[i] < 0`.
#[inline]
pub fn sign_pattern(values: impl IntoIterator<Item = f64>) -> usize {
    values
        .into_iter()
        .enumerate()
        .fold(0, |m, (i, v)| m | usize::from(v < 0.0) << i)
}

/// Chi-square test that the signs of the coordinates in `tuple` are
/// uniform over all `2^|tuple|` patterns across replicates.
pub fn sign_pattern_chisq(
    cfg: &Config,
    windows: &[WindowSample],
    tuple: &[i64],
) -> Result<ChiSquareResult> {
    if tuple.len() >= cfg.pieces() {
        return Err(Error::TupleTooLarge {
            size: tuple.len(),
            max: cfg.pieces() - 1,
        });
    }
    if tuple.is_empty() {
        return Err(Error::InvalidArgument("empty tuple".into()));
    }
    let mut sorted = tuple.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DuplicateIndex);
    }
    let mut counts = vec![0u64; 1 << tuple.len()];
    for w in windows {
        let mut values = Vec::with_capacity(tuple.len());
        for &k in tuple {
            values.push(w.get(k).ok_or(Error::IndexOutOfWindow(k))?);
        }
        counts[sign_pattern(values)] += 1;
    }
    chi_square_uniform(&counts)
}

/// Cell of `(|x|, |y|)` in a `bins x bins` grid of equiprobable cells under
/// independent uniform magnitudes on `[0, sqrt 3]`.
#[inline]
pub fn abs_pair_cell(x: f64, y: f64, bins: usize) -> usize {
    let b = |v: f64| ((v.abs() / SQRT3 * bins as f64) as usize).min(bins - 1);
    b(x) * bins + b(y)
}

/// Chi-square test of independence of `|x|` and `|y|` against the known
/// product of uniform marginals, on a `bins x bins` grid.
pub fn binned_pair_chisq(pairs: &[(f64, f64)], bins: usize) -> Result<ChiSquareResult> {
    let mut counts = vec![0u64; bins * bins];
    for &(x, y) in pairs {
        counts[abs_pair_cell(x, y, bins)] += 1;
    }
    chi_square_uniform(&counts)
}

/// Upper `alpha` quantile of the standard normal.
pub fn normal_upper_quantile(alpha: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - alpha)
}

/// One verdict in a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    /// How `statistic` is compared with `threshold`: `"<="`, `">="` or `"=="`.
    pub relation: &'static str,
    pub threshold: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<MomentEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    pub samples: u64,
    pub seed: u64,
}

impl Check {
    fn new(
        name: impl Into<String>,
        statistic: f64,
        relation: &'static str,
        threshold: f64,
        passed: bool,
    ) -> Self {
        Self {
            name: name.into(),
            statistic,
            relation,
            threshold,
            passed,
            estimate: None,
            reference: None,
            samples: 0,
            seed: 0,
        }
    }

    pub fn at_most(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self::new(name, statistic, "<=", threshold, statistic <= threshold)
    }

    pub fn at_least(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self::new(name, statistic, ">=", threshold, statistic >= threshold)
    }

    /// Exact comparison of a computed value with its required value.
    pub fn equals(name: impl Into<String>, statistic: f64, required: f64) -> Self {
        Self::new(name, statistic, "==", required, statistic == required)
    }

    pub fn with_estimate(mut self, estimate: MomentEstimate, reference: Option<f64>) -> Self {
        self.samples = estimate.count;
        self.estimate = Some(estimate);
        self.reference = reference;
        self
    }

    pub fn with_samples(mut self, samples: u64, seed: u64) -> Self {
        self.samples = samples;
        self.seed = seed;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Outcome of the partial-sum moment gap check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    /// Estimate of `E (n^(-1/2) S_n)^L`.
    pub estimate: MomentEstimate,
    /// The same moment for i.i.d. uniform summands.
    pub reference: f64,
    /// The universal bound `E Z^L - 8^(-L/2) L! L^(-L)`; reported only, its
    /// margin below `E Z^L` is far beneath Monte Carlo resolution.
    pub bound: f64,
    /// `(reference - estimate) / std_error`.
    pub z: f64,
    pub critical: f64,
    pub significance: f64,
    pub passed: bool,
    /// Mean, variance and fourth-moment checks plus the deficit verdict.
    pub checks: Vec<Check>,
}

/// Estimates moments of `n^(-1/2) (X_1 + .. + X_n)` over `replicates`
/// independent realizations of the stationary sequence and tests that the
/// `L`-th moment falls below the i.i.d.-uniform value at one-sided level
/// `significance`.
pub fn clt_gap_check(
    cfg: &Config,
    seed: u64,
    replicates: u64,
    n: u64,
    significance: f64,
    threads: usize,
) -> Result<GapReport> {
    let l = cfg.pieces() as u64;
    if n < 2 * l {
        return Err(Error::InvalidArgument(format!(
            "window length {n} below 2L = {}",
            2 * l
        )));
    }
    if !(significance > 0.0 && significance < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "significance {significance} outside (0, 1)"
        )));
    }
    let needed = (10.0 / significance).ceil() as u64;
    if replicates < needed {
        return Err(Error::InsufficientData {
            needed: needed as usize,
            got: replicates as usize,
        });
    }
    let top = cfg.pieces() as i32;
    let scale = 1.0 / (n as f64).sqrt();
    let accs = map_reduce(
        replicates,
        threads,
        || vec![MeanAccumulator::new(); 4],
        |accs, r| {
            let w = StationaryProcess::new(cfg, replicate_seed(seed, r)).window(1, n as i64)?;
            let t = w.values.iter().sum::<f64>() * scale;
            let t2 = t * t;
            accs[0].push(t);
            accs[1].push(t2);
            accs[2].push(t2 * t2);
            accs[3].push(t.powi(top));
            Ok(())
        },
    )?;
    let est: Vec<MomentEstimate> = accs
        .iter()
        .map(MeanAccumulator::estimate)
        .collect::<Result<_>>()?;
    let reference = iid_uniform_sum_moment(n, cfg.pieces() as u32)? / (n as f64).powi(top / 2);
    let fourth_exact = 3.0 - 1.2 / n as f64;
    let z = (reference - est[3].value) / est[3].std_error;
    let critical = normal_upper_quantile(significance);
    let checks = vec![
        Check::at_most(
            "normalized sum: |z| of mean vs 0",
            est[0].z_against(0.0).abs(),
            4.0,
        )
        .with_estimate(est[0], Some(0.0))
        .with_seed(seed),
        Check::at_most(
            "normalized sum: |z| of second moment vs 1",
            est[1].z_against(1.0).abs(),
            4.0,
        )
        .with_estimate(est[1], Some(1.0))
        .with_seed(seed),
        Check::at_most(
            "normalized sum: z of fourth moment above 3",
            est[2].z_against(3.0),
            4.0,
        )
        .with_estimate(est[2], Some(fourth_exact))
        .with_seed(seed),
        Check::at_least(
            format!("normalized sum: deficit z of moment {top} below i.i.d. value"),
            z,
            critical,
        )
        .with_estimate(est[3], Some(reference))
        .with_seed(seed),
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(GapReport {
        estimate: est[3],
        reference,
        bound: universal_gap_bound(cfg),
        z,
        critical,
        significance,
        passed,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomSource;

    fn six() -> Config {
        Config::new(6).unwrap()
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn constant_stream() {
        let e = estimate_moment(std::iter::repeat_n(1.5, 10), 2).unwrap();
        assert_eq!(e.value, 2.25);
        assert_eq!(e.std_error, 0.0);
        assert_eq!(e.count, 10);
        assert!(matches!(
            estimate_moment([1.0], 2),
            Err(Error::InsufficientData { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn merge_matches_whole_stream() {
        let s = RandomSource::new(3, "merge", 0);
        let xs: Vec<f64> = (0..5001).map(|i| s.unit(i) * 10.0 - 3.0).collect();
        let whole = estimate_moment(xs.iter().copied(), 3).unwrap();
        let a = estimate_moment(xs[..1234].iter().copied(), 3).unwrap();
        let b = estimate_moment(xs[1234..].iter().copied(), 3).unwrap();
        for m in [a.merge(&b), b.merge(&a)] {
            assert!(rel_close(m.value, whole.value, 1e-10));
            assert!(rel_close(m.std_error, whole.std_error, 1e-10));
            assert_eq!(m.count, whole.count);
        }
    }

    #[test]
    fn gaussian_moments() {
        assert_eq!(gaussian_moment(2), 1.0);
        assert_eq!(gaussian_moment(4), 3.0);
        assert_eq!(gaussian_moment(6), 15.0);
        assert_eq!(gaussian_moment(8), 105.0);
        assert_eq!(gaussian_moment(5), 0.0);
    }

    #[test]
    fn gaussian_dominates_uniform() {
        for m in 1..=8 {
            assert!(gaussian_moment(m) >= uniform_moment(m));
            assert!(uniform_moment(m) >= 0.0);
            if m % 2 == 1 {
                assert_eq!(gaussian_moment(m), uniform_moment(m));
            }
        }
        assert!(rel_close(uniform_moment(2), 1.0, 1e-15));
        assert!(rel_close(uniform_moment(4), 1.8, 1e-15));
        assert!(rel_close(uniform_moment(6), 27.0 / 7.0, 1e-15));
    }

    #[test]
    fn iid_sum_moments() {
        let v = iid_uniform_sum_moment(6, 6).unwrap();
        let hand = 6.0 * 27.0 / 7.0 + 15.0 * 6.0 * 5.0 * 1.8 + 15.0 * 6.0 * 5.0 * 4.0;
        assert!(rel_close(v, hand, 1e-13));
        assert!(rel_close(v, 2633.142857142857, 1e-12));
        assert!(rel_close(
            iid_uniform_sum_moment(12, 6).unwrap(),
            23410.285714285714,
            1e-12
        ));
        assert!(rel_close(iid_uniform_sum_moment(1, 2).unwrap(), 1.0, 1e-15));
        // E S^4 = 1.8 p + 3 p (p - 1)
        assert!(rel_close(
            iid_uniform_sum_moment(10, 4).unwrap(),
            18.0 + 270.0,
            1e-13
        ));
        assert!(iid_uniform_sum_moment(6, 5).is_err());
        assert!(iid_uniform_sum_moment(6, 10).is_err());
    }

    #[test]
    fn mu1_moments() {
        let cfg = six();
        assert!(rel_close(mu1_sum_moment(&cfg, 2).unwrap(), 6.0, 1e-14));
        assert!(rel_close(mu1_sum_moment(&cfg, 4).unwrap(), 100.8, 1e-13));
        let six_th = mu1_sum_moment(&cfg, 6).unwrap();
        assert!(rel_close(
            six_th,
            2633.142857142857 - 720.0 * 27.0 / 64.0,
            1e-12
        ));
        assert!(rel_close(six_th, 2329.392857142857, 1e-12));
        let gap = iid_uniform_sum_moment(6, 6).unwrap() - six_th;
        assert!(gap >= 720.0 / 64.0);
    }

    #[test]
    fn mu1_equals_iid_below_top_order() {
        for l in [6, 8] {
            let cfg = Config::new(l).unwrap();
            for m in (2..l as u32).step_by(2) {
                assert_eq!(
                    mu1_sum_moment(&cfg, m).unwrap(),
                    iid_uniform_sum_moment(l as u64, m).unwrap()
                );
            }
            let m = l as u32;
            let iid = iid_uniform_sum_moment(l as u64, m).unwrap();
            let mu = mu1_sum_moment(&cfg, m).unwrap();
            assert!(mu < iid);
            assert!(mu <= iid - factorial(m) / 2f64.powi(m as i32));
        }
    }

    #[test]
    fn two_block_moments() {
        let cfg = six();
        assert!(rel_close(
            two_block_sum_moment(&cfg, 2).unwrap(),
            12.0,
            1e-14
        ));
        let m6 = two_block_sum_moment(&cfg, 6).unwrap();
        let hand = 2.0 * 2329.392857142857 + 2.0 * 15.0 * 100.8 * 6.0;
        assert!(rel_close(m6, hand, 1e-12));
        assert!(rel_close(m6, 22802.785714285714, 1e-12));
        assert!(rel_close(m6 / 1728.0, 13.196056547619, 1e-11));
        assert!(rel_close(
            iid_uniform_sum_moment(12, 6).unwrap() / 1728.0,
            13.547619047619,
            1e-11
        ));
    }

    #[test]
    fn gap_constant_value() {
        let c = gap_constant(&six());
        assert!(rel_close(c, 720.0 / 512.0 / 46656.0, 1e-12));
        assert!((c - 3.0e-5).abs() < 1e-6);
        assert!(rel_close(universal_gap_bound(&six()), 15.0 - c, 1e-15));
    }

    #[test]
    fn kolmogorov_branches_agree() {
        // both series are valid near the switch point
        let a = kolmogorov_sf(1.1799);
        let b = kolmogorov_sf(1.1801);
        assert!((a - b).abs() < 1e-3);
        assert!((kolmogorov_sf(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_sf(1.949) - 0.001).abs() < 1e-4);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn ks_accepts_uniform_rejects_shift() {
        let s = RandomSource::new(4, "ks", 0);
        let xs: Vec<f64> = (0..100_000)
            .map(|i| (2.0 * s.unit(i) - 1.0) * SQRT3)
            .collect();
        let r = ks_statistic(&xs, ReferenceCdf::UniformUnps3).unwrap();
        assert!(r.p_value > 0.001, "{r:?}");
        let shifted: Vec<f64> = xs.iter().map(|x| x + 0.5).collect();
        assert!(
            ks_statistic(&shifted, ReferenceCdf::UniformUnps3)
                .unwrap()
                .p_value
                < 0.001
        );
        assert!(ks_statistic(&xs[..50], ReferenceCdf::UniformUnps3).is_err());
        assert_eq!(
            "gauss".parse::<ReferenceCdf>(),
            Err(Error::UnknownDistribution("gauss".into()))
        );
    }

    #[test]
    fn chi_square_basics() {
        let r = chi_square_uniform(&[100, 100, 100, 100]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.df, 3);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        let r = chi_square_uniform(&[400, 0, 0, 0]).unwrap();
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn sign_pattern_bits() {
        assert_eq!(sign_pattern([1.0, -1.0, 2.0, -0.5]), 0b1010);
        assert_eq!(sign_pattern([0.0]), 0);
    }

    #[test]
    fn sign_pattern_errors() {
        let cfg = six();
        let w = crate::stationary::sample_window(&cfg, 1, 10, 0).unwrap();
        let ws = vec![w];
        assert!(matches!(
            sign_pattern_chisq(&cfg, &ws, &[1, 2, 3, 4, 5, 6]),
            Err(Error::TupleTooLarge { size: 6, max: 5 })
        ));
        assert_eq!(
            sign_pattern_chisq(&cfg, &ws, &[1, 11]),
            Err(Error::IndexOutOfWindow(11))
        );
        assert_eq!(
            sign_pattern_chisq(&cfg, &ws, &[1, 1]),
            Err(Error::DuplicateIndex)
        );
        assert!(sign_pattern_chisq(&cfg, &ws, &[1, 2, 3]).is_ok());
    }

    #[test]
    fn abs_cells() {
        assert_eq!(abs_pair_cell(0.0, 0.0, 4), 0);
        assert_eq!(abs_pair_cell(SQRT3, -SQRT3, 4), 15);
        assert_eq!(abs_pair_cell(-0.5, 1.0, 4), 4 + 2);
    }

    #[test]
    fn clt_gap_argument_errors() {
        let cfg = six();
        assert!(clt_gap_check(&cfg, 0, 100_000, 11, 0.001, 1).is_err());
        assert!(matches!(
            clt_gap_check(&cfg, 0, 100, 12, 0.001, 1),
            Err(Error::InsufficientData { .. })
        ));
    }
}
