//! The stationarity test: maximum standardized contrast against a
//! Bonferroni-corrected normal quantile, plus departure localisation.

use log::warn;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::bootstrap::{SieveBootstrap, SigmaTable};
use crate::error::{Error, Result};
use crate::intervals::{
    disjoint_pairs, sample_intervals, ContrastEvaluator, ContrastTable, Interval,
};
use crate::rng::Stream;
use crate::wavelets::{PeriodogramPlan, Scale};

pub const DEFAULT_INTERVALS: usize = 40;
pub const DEFAULT_REPLICATES: usize = 200;
pub const DEFAULT_RETRY_LIMIT: usize = 5;

/// `ceil(T^{2/3})`, computed exactly in integers.
pub fn default_min_len(len: usize) -> usize {
    let target = (len as u128) * (len as u128);
    let mut m = (len as f64).powf(2.0 / 3.0).floor() as u128;
    while m > 0 && (m - 1).pow(3) >= target {
        m -= 1;
    }
    while m.pow(3) < target {
        m += 1;
    }
    m as usize
}

/// `min(4, floor(log2 T) - 3)`, at least 1.
pub fn default_j_star(len: usize) -> usize {
    let log2 = (usize::BITS - 1 - len.max(1).leading_zeros()) as usize;
    log2.saturating_sub(3).clamp(1, 4)
}

/// Test settings. `None` fields are resolved from the series length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub alpha: f64,
    /// Number of random intervals `M`.
    pub intervals: usize,
    /// Minimum interval length `m_T`.
    pub min_len: Option<usize>,
    /// Coarsest scale examined, `J*`.
    pub j_star: Option<usize>,
    /// Bootstrap replicates `B`.
    pub replicates: usize,
    pub seed: u64,
    /// Interval-set redraws allowed when no disjoint pair is found.
    pub retry_limit: usize,
    pub max_ar_order: Option<usize>,
    pub parallel: bool,
    /// Keep the full contrast and sigma tables in the result.
    pub keep_tables: bool,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            alpha: 0.05,
            intervals: DEFAULT_INTERVALS,
            min_len: None,
            j_star: None,
            replicates: DEFAULT_REPLICATES,
            seed: 0,
            retry_limit: DEFAULT_RETRY_LIMIT,
            max_ar_order: None,
            parallel: true,
            keep_tables: false,
        }
    }
}

/// Config with every length-dependent default filled in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedConfig {
    pub alpha: f64,
    pub intervals: usize,
    pub min_len: usize,
    pub j_star: usize,
    pub replicates: usize,
}

impl TestConfig {
    pub fn resolve(&self, len: usize) -> Result<ResolvedConfig> {
        check_level(self.alpha)?;
        let min_len = self.min_len.unwrap_or_else(|| default_min_len(len));
        let j_star = self.j_star.unwrap_or_else(|| default_j_star(len));
        if j_star == 0 {
            return Err(Error::InfeasibleConfig("J* must be at least 1".into()));
        }
        if min_len > len {
            return Err(Error::InfeasibleConfig(format!(
                "minimum interval length {min_len} exceeds series length {len}"
            )));
        }
        let required = (1usize << j_star.min(30)).max(min_len);
        if len < required {
            return Err(Error::SeriesTooShort { len, required });
        }
        if (1usize << j_star) > min_len {
            warn!(
                "2^J* = {} exceeds minimum interval length {min_len}",
                1usize << j_star
            );
        }
        Ok(ResolvedConfig {
            alpha: self.alpha,
            intervals: self.intervals,
            min_len,
            j_star,
            replicates: self.replicates,
        })
    }
}

fn check_level(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidLevel(alpha))
    }
}

/// `Phi^{-1}(1 - alpha / (2 D J*))`.
pub fn critical_value(alpha: f64, pairs: usize, j_star: usize) -> Result<f64> {
    check_level(alpha)?;
    if pairs == 0 || j_star == 0 {
        return Err(Error::InfeasibleConfig(
            "critical value needs at least one pair and one scale".into(),
        ));
    }
    let tail = 0.5 * alpha / (pairs as f64 * j_star as f64);
    let normal = Normal::standard();
    Ok(-normal.inverse_cdf(tail))
}

/// Pair and scale attaining the maximum standardized contrast.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Argmax {
    pub pair: usize,
    pub first: Interval,
    pub second: Interval,
    pub scale: Scale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub critical_value: f64,
    pub reject: bool,
    pub alpha: f64,
    /// Series length `T`.
    pub len: usize,
    /// Number of disjoint pairs `D`.
    pub pairs: usize,
    pub j_star: usize,
    pub intervals: usize,
    pub min_len: usize,
    pub replicates: usize,
    pub seed: u64,
    pub argmax: Argmax,
    /// Largest standardized contrast at each scale `-1..-J*`; 0 when every
    /// cell of the scale is degenerate.
    pub per_scale_max: Vec<f64>,
    pub degenerate_cells: usize,
    pub ar_order: usize,
    pub contrasts: Option<ContrastTable>,
    pub sigmas: Option<SigmaTable>,
}

impl TestResult {
    /// Decision at another level, reusing the same statistic.
    pub fn reject_at(&self, alpha: f64) -> Result<bool> {
        Ok(self.statistic > critical_value(alpha, self.pairs, self.j_star)?)
    }

    /// `|C| / sigma` per cell, `None` for degenerate cells. Needs the tables.
    pub fn standardized(&self) -> Option<Vec<Option<f64>>> {
        let (c, s) = (self.contrasts.as_ref()?, self.sigmas.as_ref()?);
        Some(standardize(c, s))
    }
}

fn standardize(c: &ContrastTable, s: &SigmaTable) -> Vec<Option<f64>> {
    c.values
        .iter()
        .zip(&s.values)
        .zip(&s.degenerate)
        .map(|((c, s), &d)| (!d).then(|| c.abs() / s))
        .collect()
}

pub fn run_test(x: &[f64], cfg: &TestConfig) -> Result<TestResult> {
    let len = x.len();
    let rc = cfg.resolve(len)?;
    let root = Stream::root(cfg.seed);

    let mut attempt = 0;
    let pairs = loop {
        let drawn = sample_intervals(
            len,
            rc.intervals,
            rc.min_len,
            &root.derive("intervals", attempt),
        )?;
        match disjoint_pairs(drawn) {
            Ok(p) => break p,
            Err(Error::NoDisjointPairs) if (attempt as usize) < cfg.retry_limit => attempt += 1,
            Err(e) => return Err(e),
        }
    };

    let plan = PeriodogramPlan::new(len, rc.j_star)?;
    let contrasts = ContrastEvaluator::new(&pairs, len)?.evaluate(&plan.compute(x)?)?;
    let bootstrap = SieveBootstrap {
        replicates: rc.replicates,
        max_order: cfg.max_ar_order,
        parallel: cfg.parallel,
    };
    let sigmas = bootstrap.sigma(x, &pairs, rc.j_star, &root.derive("bootstrap", 0))?;

    let d = pairs.count();
    let standardized = standardize(&contrasts, &sigmas);
    let mut per_scale_max = vec![0.0; rc.j_star];
    let mut best: Option<(f64, usize, usize)> = None;
    for (cell, value) in standardized.iter().enumerate() {
        let Some(v) = *value else { continue };
        let (level, pair) = (cell / d, cell % d);
        if v > per_scale_max[level] {
            per_scale_max[level] = v;
        }
        if best.is_none_or(|(b, _, _)| v > b) {
            best = Some((v, level, pair));
        }
    }
    let (statistic, level, pair) = best.ok_or(Error::DegenerateBootstrap)?;
    let (first, second) = pairs.pair(pair);
    let critical = critical_value(rc.alpha, d, rc.j_star)?;

    Ok(TestResult {
        statistic,
        critical_value: critical,
        reject: statistic > critical,
        alpha: rc.alpha,
        len,
        pairs: d,
        j_star: rc.j_star,
        intervals: rc.intervals,
        min_len: rc.min_len,
        replicates: rc.replicates,
        seed: cfg.seed,
        argmax: Argmax {
            pair,
            first,
            second,
            scale: Scale::from_level(level + 1)?,
        },
        per_scale_max,
        degenerate_cells: sigmas.degenerate_count(),
        ar_order: sigmas.ar_order,
        contrasts: cfg.keep_tables.then_some(contrasts),
        sigmas: cfg.keep_tables.then_some(sigmas),
    })
}

/// How argmax intervals are weighted when profiles are aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightScheme {
    /// `1/R` at every point of both intervals.
    Equal,
    /// `1/(R n)` on an interval of length `n`.
    InverseLength,
}

/// Pointwise-averaged localisation weights under both schemes.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    pub equal: Vec<f64>,
    pub inverse_length: Vec<f64>,
}

impl WeightProfile {
    pub fn get(&self, scheme: WeightScheme) -> &[f64] {
        match scheme {
            WeightScheme::Equal => &self.equal,
            WeightScheme::InverseLength => &self.inverse_length,
        }
    }

    pub fn from_argmax(argmax: &[Argmax], len: usize) -> Result<Self> {
        Ok(WeightProfile {
            equal: accumulate(argmax, WeightScheme::Equal, len)?,
            inverse_length: accumulate(argmax, WeightScheme::InverseLength, len)?,
        })
    }
}

fn accumulate(argmax: &[Argmax], scheme: WeightScheme, len: usize) -> Result<Vec<f64>> {
    if argmax.is_empty() {
        return Err(Error::EmptyResults);
    }
    let r = argmax.len() as f64;
    let mut out = vec![0.0; len];
    for a in argmax {
        for iv in [a.first, a.second] {
            if iv.end >= len {
                return Err(Error::IndexOutOfRange { index: iv.end, len });
            }
            let w = match scheme {
                WeightScheme::Equal => 1.0 / r,
                WeightScheme::InverseLength => 1.0 / (r * iv.len() as f64),
            };
            for o in &mut out[iv.start..=iv.end] {
                *o += w;
            }
        }
    }
    Ok(out)
}

pub fn weight_profile(
    results: &[TestResult],
    scheme: WeightScheme,
    len: usize,
) -> Result<Vec<f64>> {
    if let Some(r) = results.iter().find(|r| r.len != len) {
        return Err(Error::InfeasibleConfig(format!(
            "result for length {} mixed into profile of length {len}",
            r.len
        )));
    }
    let argmax: Vec<Argmax> = results.iter().map(|r| r.argmax).collect();
    accumulate(&argmax, scheme, len)
}

pub fn weight_profiles(results: &[TestResult], len: usize) -> Result<WeightProfile> {
    Ok(WeightProfile {
        equal: weight_profile(results, WeightScheme::Equal, len)?,
        inverse_length: weight_profile(results, WeightScheme::InverseLength, len)?,
    })
}
