//! AR sieve bootstrap for the scale of each contrast.
//!
//! A long autoregression is fitted by Yule-Walker, series are regenerated
//! from resampled centred residuals, and the spread of the regenerated
//! contrasts estimates `sigma_j(p, q)`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::{ContrastEvaluator, IntervalPairSet, PrefixSums};
use crate::rng::Stream;
use crate::wavelets::{PeriodogramPlan, Scale};

/// Cells whose estimated scale falls below this are treated as degenerate.
pub const SIGMA_FLOOR: f64 = 1e-12;

/// Recursion warm-up discarded before each regenerated series, on top of
/// the AR order.
pub const RESAMPLE_BURN_IN: usize = 100;

/// Yule-Walker autoregression with its centred residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct ArFit {
    pub coefficients: Vec<f64>,
    pub innovation_variance: f64,
    /// `T - p` residuals, centred to mean zero.
    pub residuals: Vec<f64>,
}

impl ArFit {
    pub fn order(&self) -> usize {
        self.coefficients.len()
    }
}

/// Biased (divide-by-T) autocovariances of the demeaned series at lags
/// `0..=max_lag`.
fn autocovariances(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = x.iter().map(|v| v - mean).collect();
    (0..=max_lag)
        .map(|lag| {
            centred[lag..]
                .iter()
                .zip(&centred)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

/// Levinson-Durbin recursion: coefficients and prediction-error variance
/// for every order `0..=max_order`.
fn levinson_durbin(acov: &[f64], max_order: usize) -> Vec<(Vec<f64>, f64)> {
    let mut out = Vec::with_capacity(max_order + 1);
    let mut phi: Vec<f64> = Vec::new();
    let mut err = acov[0];
    out.push((phi.clone(), err));
    for k in 1..=max_order {
        if err <= 0.0 {
            // perfectly predictable; higher orders add nothing
            out.push((
                phi.iter().copied().chain(std::iter::once(0.0)).collect(),
                0.0,
            ));
            phi.push(0.0);
            continue;
        }
        let acc: f64 = phi
            .iter()
            .enumerate()
            .map(|(i, a)| a * acov[k - 1 - i])
            .sum();
        let reflection = (acov[k] - acc) / err;
        let mut next = vec![0.0; k];
        for i in 0..k - 1 {
            next[i] = phi[i] - reflection * phi[k - 2 - i];
        }
        next[k - 1] = reflection;
        err *= 1.0 - reflection * reflection;
        phi = next;
        out.push((phi.clone(), err.max(0.0)));
    }
    out
}

fn validate_for_ar(x: &[f64], order: usize) -> Result<Vec<f64>> {
    if 2 * order >= x.len() {
        return Err(Error::OrderTooLarge {
            order,
            len: x.len(),
        });
    }
    let acov = autocovariances(x, order);
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !acov[0].is_finite() || acov[0].sqrt() <= 1e-14 * scale || acov[0] == 0.0 {
        return Err(Error::DegenerateSeries);
    }
    Ok(acov)
}

pub fn yule_walker(x: &[f64], order: usize) -> Result<ArFit> {
    let acov = validate_for_ar(x, order)?;
    let (coefficients, innovation_variance) = levinson_durbin(&acov, order).pop().unwrap();
    if innovation_variance <= 0.0 {
        return Err(Error::DegenerateSeries);
    }
    let mut residuals: Vec<f64> = (order..x.len())
        .map(|t| {
            x[t] - coefficients
                .iter()
                .enumerate()
                .map(|(i, a)| a * x[t - 1 - i])
                .sum::<f64>()
        })
        .collect();
    let mean = residuals.iter().sum::<f64>() / residuals.len() as f64;
    for r in &mut residuals {
        *r -= mean;
    }
    Ok(ArFit {
        coefficients,
        innovation_variance,
        residuals,
    })
}

/// `min(ceil(10 log10 T), 20)`.
pub fn default_max_order(len: usize) -> usize {
    let bound = (10.0 * (len.max(1) as f64).log10()).ceil() as usize;
    bound.min(20)
}

/// AIC-minimising order in `0..=max_order` (`T ln sigma^2_p + 2p`), smallest
/// order on ties. `max_order` is clipped so that `2p < T`.
pub fn select_ar_order(x: &[f64], max_order: usize) -> Result<usize> {
    if max_order == 0 {
        return Err(Error::InfeasibleConfig(
            "maximum AR order must be at least 1".into(),
        ));
    }
    let max_order = max_order.min((x.len().saturating_sub(1)) / 2);
    let acov = validate_for_ar(x, max_order)?;
    let n = x.len() as f64;
    let mut best = (0, f64::INFINITY);
    for (p, (_, var)) in levinson_durbin(&acov, max_order).into_iter().enumerate() {
        if var <= 0.0 {
            break;
        }
        let aic = n * var.ln() + 2.0 * p as f64;
        if aic < best.1 {
            best = (p, aic);
        }
    }
    Ok(best.0)
}

/// Regenerates a length-`len` series from `fit` by drawing innovations with
/// replacement from its residuals. The recursion starts at zero and the
/// first `RESAMPLE_BURN_IN + p` values are discarded.
pub fn ar_resample(fit: &ArFit, len: usize, stream: &Stream) -> Vec<f64> {
    let mut out = vec![0.0; len];
    ar_resample_into(fit, stream, &mut out);
    out
}

fn ar_resample_into(fit: &ArFit, stream: &Stream, out: &mut [f64]) {
    let mut rng = stream.rng();
    let p = fit.order();
    let burn = RESAMPLE_BURN_IN + p;
    let n_res = fit.residuals.len();
    let mut series = vec![0.0; burn + out.len()];
    for t in 0..series.len() {
        let z = fit.residuals[rng.random_range(0..n_res)];
        let ar: f64 = fit
            .coefficients
            .iter()
            .enumerate()
            .take_while(|(i, _)| *i < t)
            .map(|(i, a)| a * series[t - 1 - i])
            .sum();
        series[t] = ar + z;
    }
    out.copy_from_slice(&series[burn..]);
}

/// Bootstrap estimates `sigma_j(p, q)`, `J* x D` row-major by scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaTable {
    pub j_star: usize,
    pub pairs: usize,
    pub values: Vec<f64>,
    pub degenerate: Vec<bool>,
    pub ar_order: usize,
}

impl SigmaTable {
    pub fn get(&self, scale: Scale, pair: usize) -> f64 {
        self.values[(scale.level() - 1) * self.pairs + pair]
    }

    pub fn is_degenerate(&self, scale: Scale, pair: usize) -> bool {
        self.degenerate[(scale.level() - 1) * self.pairs + pair]
    }

    pub fn degenerate_count(&self) -> usize {
        self.degenerate.iter().filter(|&&d| d).count()
    }
}

/// AR sieve bootstrap settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveBootstrap {
    pub replicates: usize,
    /// Upper bound for AIC order selection; `None` uses [`default_max_order`].
    pub max_order: Option<usize>,
    /// Spread replicates over the rayon pool. Results do not depend on it.
    pub parallel: bool,
}

impl Default for SieveBootstrap {
    fn default() -> Self {
        SieveBootstrap {
            replicates: 200,
            max_order: None,
            parallel: true,
        }
    }
}

impl SieveBootstrap {
    pub fn fit(&self, x: &[f64]) -> Result<ArFit> {
        let p_max = self.max_order.unwrap_or_else(|| default_max_order(x.len()));
        let order = select_ar_order(x, p_max)?;
        yule_walker(x, order)
    }

    pub fn sigma(
        &self,
        x: &[f64],
        pairs: &IntervalPairSet,
        j_star: usize,
        stream: &Stream,
    ) -> Result<SigmaTable> {
        if self.replicates < 2 {
            return Err(Error::InfeasibleConfig(format!(
                "bootstrap needs at least 2 replicates, got {}",
                self.replicates
            )));
        }
        let len = x.len();
        let plan = PeriodogramPlan::new(len, j_star)?;
        let evaluator = ContrastEvaluator::new(pairs, len)?;
        let fit = match self.fit(x) {
            Ok(fit) => fit,
            Err(Error::DegenerateSeries) => return Err(Error::DegenerateBootstrap),
            Err(e) => return Err(e),
        };
        let cells = j_star * evaluator.pair_count();

        let replicate = |b: usize, prefix: &mut PrefixSums| -> Vec<f64> {
            let series = ar_resample(&fit, len, &stream.derive("replicate", b as u64));
            let mut periodogram = vec![0.0; j_star * len];
            plan.compute_into(&series, &mut periodogram)
                .expect("plan length matches series");
            let mut out = vec![0.0; cells];
            evaluator.evaluate_into(&periodogram, prefix, &mut out);
            out
        };
        let draws: Vec<Vec<f64>> = if self.parallel {
            (0..self.replicates)
                .into_par_iter()
                .map_init(PrefixSums::default, |prefix, b| replicate(b, prefix))
                .collect()
        } else {
            let mut prefix = PrefixSums::default();
            (0..self.replicates)
                .map(|b| replicate(b, &mut prefix))
                .collect()
        };

        // fixed-order two-pass variance with B in the denominator
        let b = self.replicates as f64;
        let mut mean = vec![0.0; cells];
        for d in &draws {
            for (m, v) in mean.iter_mut().zip(d) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= b;
        }
        let mut var = vec![0.0; cells];
        for d in &draws {
            for ((s, v), m) in var.iter_mut().zip(d).zip(&mean) {
                let e = v - m;
                *s += e * e;
            }
        }
        let values: Vec<f64> = var.into_iter().map(|s| (s / b).sqrt()).collect();
        let degenerate: Vec<bool> = values
            .iter()
            .map(|&s| s.is_nan() || s < SIGMA_FLOOR)
            .collect();
        if degenerate.iter().all(|&d| d) {
            return Err(Error::DegenerateBootstrap);
        }
        Ok(SigmaTable {
            j_star,
            pairs: evaluator.pair_count(),
            values,
            degenerate,
            ar_order: fit.order(),
        })
    }
}

/// [`SieveBootstrap::sigma`] with `replicates` draws and default settings.
pub fn bootstrap_sigma(
    x: &[f64],
    pairs: &IntervalPairSet,
    j_star: usize,
    replicates: usize,
    stream: &Stream,
) -> Result<SigmaTable> {
    SieveBootstrap {
        replicates,
        ..SieveBootstrap::default()
    }
    .sigma(x, pairs, j_star, stream)
}
