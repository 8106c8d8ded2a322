//! Simulation models: stationary ARMA benchmarks (S1-S7), non-stationary
//! alternatives (N1-N12) and synthesis of locally stationary wavelet
//! processes from a wavelet spectrum.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::wavelets::{haar_filter, Scale};

/// Warm-up steps discarded by every recursive model.
pub const MODEL_BURN_IN: usize = 500;

/// Innovation law for the stationary models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnovationDist {
    Normal,
    /// Gamma(9, 1) minus its mean 9.
    #[serde(rename = "gamma91_centred")]
    Gamma91Centred,
    /// Student t with 5 degrees of freedom, unscaled.
    #[serde(rename = "t5")]
    T5,
}

impl InnovationDist {
    pub const ALL: [InnovationDist; 3] = [
        InnovationDist::Normal,
        InnovationDist::Gamma91Centred,
        InnovationDist::T5,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InnovationDist::Normal => "normal",
            InnovationDist::Gamma91Centred => "gamma91_centred",
            InnovationDist::T5 => "t5",
        }
    }
}

impl fmt::Display for InnovationDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InnovationDist {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        InnovationDist::ALL
            .into_iter()
            .find(|d| d.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownInnovation(s.to_string()))
    }
}

pub fn gen_innovations(dist: InnovationDist, n: usize, stream: &Stream) -> Vec<f64> {
    let mut rng = stream.rng();
    match dist {
        InnovationDist::Normal => (0..n).map(|_| rng.sample(StandardNormal)).collect(),
        InnovationDist::Gamma91Centred => {
            let g = Gamma::new(9.0, 1.0).expect("valid gamma parameters");
            (0..n).map(|_| g.sample(&mut rng) - 9.0).collect()
        }
        InnovationDist::T5 => {
            let t = StudentT::new(5.0).expect("valid t parameters");
            (0..n).map(|_| t.sample(&mut rng)).collect()
        }
    }
}

/// Simulation model identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelTag {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
    S7,
    N1,
    N2,
    N3,
    N4,
    N5,
    N6,
    N7,
    N8,
    N9,
    N10,
    N11,
    N12,
}

impl ModelTag {
    pub const STATIONARY: [ModelTag; 7] = [
        ModelTag::S1,
        ModelTag::S2,
        ModelTag::S3,
        ModelTag::S4,
        ModelTag::S5,
        ModelTag::S6,
        ModelTag::S7,
    ];

    pub const NONSTATIONARY: [ModelTag; 12] = [
        ModelTag::N1,
        ModelTag::N2,
        ModelTag::N3,
        ModelTag::N4,
        ModelTag::N5,
        ModelTag::N6,
        ModelTag::N7,
        ModelTag::N8,
        ModelTag::N9,
        ModelTag::N10,
        ModelTag::N11,
        ModelTag::N12,
    ];

    pub fn all() -> impl Iterator<Item = ModelTag> {
        Self::STATIONARY.into_iter().chain(Self::NONSTATIONARY)
    }

    pub fn is_stationary(self) -> bool {
        Self::STATIONARY.contains(&self)
    }

    pub fn valid_tags() -> String {
        Self::all()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// `(ar, ma)` coefficients of the stationary models, in the convention
    /// `X_t = sum ar_i X_{t-i} + Z_t + sum ma_i Z_{t-i}`.
    pub fn arma_coefficients(self) -> Option<(Vec<f64>, Vec<f64>)> {
        use ModelTag::*;
        Some(match self {
            S1 => (vec![], vec![]),
            S2 => (vec![-0.9], vec![]),
            S3 => (vec![0.9], vec![]),
            S4 => (vec![], vec![-0.8]),
            S5 => (vec![], vec![0.8]),
            S6 => (vec![-0.4], vec![-0.8, 0.4]),
            S7 => (vec![1.385929, -0.9604], vec![]),
            _ => return None,
        })
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for ModelTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let want = s.trim();
        ModelTag::all()
            .find(|m| m.to_string().eq_ignore_ascii_case(want))
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// A fully specified simulation draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub tag: ModelTag,
    pub len: usize,
    /// Used by the stationary models only; the alternatives are Gaussian.
    pub innovation: InnovationDist,
}

impl ModelSpec {
    pub fn new(tag: ModelTag, len: usize) -> Self {
        ModelSpec {
            tag,
            len,
            innovation: InnovationDist::Normal,
        }
    }

    pub fn with_innovation(mut self, innovation: InnovationDist) -> Self {
        self.innovation = innovation;
        self
    }
}

pub fn gen_model(spec: &ModelSpec, stream: &Stream) -> Result<Vec<f64>> {
    use ModelTag::*;
    let n = spec.len;
    if n == 0 {
        return Err(Error::SeriesTooShort {
            len: 0,
            required: 1,
        });
    }
    if let Some((ar, ma)) = spec.tag.arma_coefficients() {
        let z = gen_innovations(spec.innovation, n + MODEL_BURN_IN, stream);
        return Ok(arma_recursion(&ar, &ma, &z, MODEL_BURN_IN));
    }
    let tf = n as f64;
    let series = match spec.tag {
        N1 => tv_ar1(n, stream, |t| {
            (0.9 - 1.8 * (t - 1.0) / (tf - 1.0).max(1.0), 1.0)
        }),
        N2 | N3 | N4 => {
            let spectrum = match spec.tag {
                N2 => SpectrumSpec::n2(),
                N3 => SpectrumSpec::n3(),
                _ => SpectrumSpec::n4(),
            };
            return lsw_synthesize(&spectrum, n, stream);
        }
        N5 => tv_ar1(n, stream, |t| (0.0, 1.0 + t / tf)),
        N6 => tv_ar1(n, stream, |t| (-0.9 * (t / tf).sqrt(), 1.0)),
        N7 => tv_ma(n, 1, stream, |t| {
            0.8 * (1.5 - (4.0 * PI * t / tf).cos()).cos()
        }),
        N8 => tv_ma(n, 6, stream, |t| {
            0.8 * (1.5 - (4.0 * PI * t / tf).cos()).cos()
        }),
        N9 => tv_ar1(n, stream, |t| (0.6 * (4.0 * PI * t / tf).sin(), 1.0)),
        N10 => tv_ar1(n, stream, |t| {
            if t <= tf / 4.0 || t > 3.0 * tf / 4.0 {
                (0.5, 1.0)
            } else {
                (-0.5, 1.0)
            }
        }),
        N11 => tv_ar1(n, stream, |t| {
            if t > tf / 2.0 && t <= tf / 2.0 + tf / 64.0 {
                (0.0, 4.0)
            } else {
                (-0.5, 1.0)
            }
        }),
        N12 => {
            let block = tf.sqrt();
            tv_ar1(n, stream, move |t| {
                if block_index(t, block).is_multiple_of(2) {
                    (-0.5, 1.0)
                } else {
                    (0.5, 1.0)
                }
            })
        }
        _ => unreachable!("stationary models handled above"),
    };
    Ok(series)
}

/// Largest `m` with `floor(m * block) <= t`.
fn block_index(t: f64, block: f64) -> usize {
    let mut m = (t / block).floor() as usize;
    while ((m + 1) as f64 * block).floor() <= t {
        m += 1;
    }
    while m > 0 && (m as f64 * block).floor() > t {
        m -= 1;
    }
    m
}

fn arma_recursion(ar: &[f64], ma: &[f64], z: &[f64], burn_in: usize) -> Vec<f64> {
    let mut x = vec![0.0; z.len()];
    for t in 0..z.len() {
        let mut v = z[t];
        for (i, a) in ar.iter().enumerate().filter(|(i, _)| *i < t) {
            v += a * x[t - 1 - i];
        }
        for (i, b) in ma.iter().enumerate().filter(|(i, _)| *i < t) {
            v += b * z[t - 1 - i];
        }
        x[t] = v;
    }
    x.split_off(burn_in)
}

/// `X_t = a(t) X_{t-1} + s(t) Z_t` for `t = 1..=n`, after a burn-in run
/// under the `t = 1` regime starting from zero.
fn tv_ar1(n: usize, stream: &Stream, regime: impl Fn(f64) -> (f64, f64)) -> Vec<f64> {
    let z = gen_innovations(InnovationDist::Normal, n + MODEL_BURN_IN, stream);
    let (a0, s0) = regime(1.0);
    let mut prev = 0.0;
    for zt in &z[..MODEL_BURN_IN] {
        prev = a0 * prev + s0 * zt;
    }
    z[MODEL_BURN_IN..]
        .iter()
        .enumerate()
        .map(|(i, zt)| {
            let (a, s) = regime((i + 1) as f64);
            prev = a * prev + s * zt;
            prev
        })
        .collect()
}

/// `X_t = b(t) Z_{t-lag} + Z_t` for `t = 1..=n`.
fn tv_ma(n: usize, lag: usize, stream: &Stream, coef: impl Fn(f64) -> f64) -> Vec<f64> {
    let z = gen_innovations(InnovationDist::Normal, n + MODEL_BURN_IN, stream);
    (0..n)
        .map(|i| {
            let t = MODEL_BURN_IN + i;
            coef((i + 1) as f64) * z[t - lag] + z[t]
        })
        .collect()
}

/// Time-varying spectrum `S_j(z)`, one entry per scale from `-1` down.
pub type ScaleSpectrum = Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>;

/// Evolutionary wavelet spectrum on rescaled time `[0, 1)`.
#[derive(Clone, Default)]
pub struct SpectrumSpec {
    scales: Vec<ScaleSpectrum>,
}

impl fmt::Debug for SpectrumSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let active: Vec<bool> = self.scales.iter().map(Option::is_some).collect();
        f.debug_struct("SpectrumSpec")
            .field("active", &active)
            .finish()
    }
}

fn n2_bump(z: f64) -> f64 {
    0.25 - 0.5 * (z - 0.5).powi(2)
}

fn gaussian_bump(z: f64) -> f64 {
    (-64.0 * (z - 0.5).powi(2)).exp()
}

impl SpectrumSpec {
    pub fn new(scales: Vec<ScaleSpectrum>) -> Self {
        SpectrumSpec { scales }
    }

    /// Time-constant spectrum, `values[l - 1] = S_{-l}`.
    pub fn constant(values: &[f64]) -> Self {
        SpectrumSpec {
            scales: values
                .iter()
                .map(|&v| -> ScaleSpectrum {
                    (v != 0.0).then(|| {
                        Arc::new(move |_z: f64| v) as Arc<dyn Fn(f64) -> f64 + Send + Sync>
                    })
                })
                .collect(),
        }
    }

    pub fn n2() -> Self {
        SpectrumSpec::new(vec![Some(Arc::new(n2_bump))])
    }

    /// Scale -2 is the scale -1 bump shifted by one half, wrapped periodically.
    pub fn n3() -> Self {
        SpectrumSpec::new(vec![
            Some(Arc::new(n2_bump)),
            Some(Arc::new(|z: f64| n2_bump((z + 0.5).rem_euclid(1.0)))),
        ])
    }

    pub fn n4() -> Self {
        SpectrumSpec::new(vec![
            Some(Arc::new(gaussian_bump)),
            None,
            Some(Arc::new(|z: f64| gaussian_bump(z - 0.25))),
            Some(Arc::new(|z: f64| gaussian_bump(z + 0.25))),
        ])
    }

    /// Coarsest scale with a non-zero spectrum (as a level, 0 if none).
    pub fn synthesis_depth(&self) -> usize {
        self.scales
            .iter()
            .rposition(Option::is_some)
            .map_or(0, |i| i + 1)
    }

    /// `S_j(k / T)` for `k = 0..T-1`, rows for scales `-1..-J_syn`.
    pub fn tabulate(&self, len: usize) -> Result<Vec<Vec<f64>>> {
        let depth = self.synthesis_depth();
        let mut rows = Vec::with_capacity(depth);
        for (level, s) in self.scales.iter().take(depth).enumerate() {
            let row: Vec<f64> = match s {
                None => vec![0.0; len],
                Some(f) => (0..len).map(|k| f(k as f64 / len as f64)).collect(),
            };
            if let Some((location, &value)) = row
                .iter()
                .enumerate()
                .find(|(_, v)| v.is_nan() || **v < 0.0)
            {
                return Err(Error::InvalidSpectrum {
                    scale: -(level as i32 + 1),
                    location,
                    value,
                });
            }
            rows.push(row);
        }
        Ok(rows)
    }
}

/// `X_t = sum_j sum_k sqrt(S_j(k/T)) psi_{j, t-k} xi_{j,k}` with Haar
/// wavelets, standard normal `xi` and periodic wrapping of `t - k`.
pub fn lsw_synthesize(spec: &SpectrumSpec, len: usize, stream: &Stream) -> Result<Vec<f64>> {
    let table = spec.tabulate(len)?;
    let depth = table.len();
    if depth > 0 && len < (1 << depth) {
        return Err(Error::SeriesTooShort {
            len,
            required: 1 << depth,
        });
    }
    let mut rng = stream.rng();
    let mut x = vec![0.0; len];
    for (level, amplitudes) in table.iter().enumerate() {
        let scale = Scale::from_level(level + 1)?;
        let filter = haar_filter(scale.j())?;
        let drive: Vec<f64> = amplitudes
            .iter()
            .map(|s| s.sqrt() * rng.sample::<f64, _>(StandardNormal))
            .collect();
        for (t, xt) in x.iter_mut().enumerate() {
            for (m, h) in filter.taps.iter().enumerate() {
                *xt += h * drive[(t + len - m) % len];
            }
        }
    }
    Ok(x)
}
