//! Non-decimated Haar wavelet machinery.
//!
//! Scales are negative integers `j = -1, -2, ...`, finest first. The filter
//! at scale `j` has `2^{-j}` taps. Periodograms use periodic (circular)
//! convolution so that every scale is defined on the common grid
//! `k = 0..T-1`.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Work threshold (series length times filter length) above which a scale
/// is convolved in the frequency domain.
pub const FFT_CROSSOVER: usize = 4096;

/// Coarsest scale the crate will build a filter for (`2^30` taps).
const MAX_LEVEL: i32 = 30;

/// A wavelet scale `j <= -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub struct Scale(i32);

impl Scale {
    pub fn new(j: i32) -> Result<Self> {
        if (-MAX_LEVEL..=-1).contains(&j) {
            Ok(Scale(j))
        } else {
            Err(Error::InvalidScale(j))
        }
    }

    /// Scale `-level`; `level` counts from 1 at the finest scale.
    pub fn from_level(level: usize) -> Result<Self> {
        let j = i32::try_from(level).map_err(|_| Error::InvalidScale(i32::MIN))?;
        Scale::new(-j)
    }

    pub fn j(self) -> i32 {
        self.0
    }

    /// `-j`, i.e. 1 for the finest scale.
    pub fn level(self) -> usize {
        (-self.0) as usize
    }

    /// Filter length `2^{-j}`.
    pub fn filter_len(self) -> usize {
        1usize << self.level()
    }

    /// Scales `-1, ..., -j_star`.
    pub fn up_to(j_star: usize) -> impl Iterator<Item = Scale> {
        (1..=j_star).map(|l| Scale(-(l as i32)))
    }
}

impl TryFrom<i32> for Scale {
    type Error = Error;
    fn try_from(j: i32) -> Result<Self> {
        Scale::new(j)
    }
}

impl From<Scale> for i32 {
    fn from(s: Scale) -> i32 {
        s.0
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Discrete wavelet filter at one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilter {
    pub scale: Scale,
    pub taps: Vec<f64>,
}

impl WaveletFilter {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }
}

/// Haar filter: `2^{-j-1}` copies of `2^{j/2}` followed by as many of its
/// negation.
pub fn haar_filter(j: i32) -> Result<WaveletFilter> {
    let scale = Scale::new(j)?;
    Ok(haar_for(scale))
}

fn haar_for(scale: Scale) -> WaveletFilter {
    let len = scale.filter_len();
    let a = (2.0f64).powf(scale.j() as f64 / 2.0);
    let mut taps = vec![a; len];
    for t in &mut taps[len / 2..] {
        *t = -a;
    }
    WaveletFilter { scale, taps }
}

/// Squared non-decimated wavelet coefficients `I_{j,k}` for scales
/// `-1..-J*` (rows) and locations `0..T-1` (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodogramMatrix {
    j_star: usize,
    len: usize,
    values: Vec<f64>,
}

impl PeriodogramMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let j_star = rows.len();
        if j_star == 0 {
            return Err(Error::InfeasibleConfig(
                "periodogram needs at least one scale".into(),
            ));
        }
        let len = rows[0].len();
        if rows.iter().any(|r| r.len() != len) {
            return Err(Error::InfeasibleConfig(
                "periodogram rows differ in length".into(),
            ));
        }
        Ok(PeriodogramMatrix {
            j_star,
            len,
            values: rows.into_iter().flatten().collect(),
        })
    }

    pub fn j_star(&self) -> usize {
        self.j_star
    }

    /// Series length `T`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn row(&self, scale: Scale) -> &[f64] {
        let level = scale.level();
        assert!(
            level <= self.j_star,
            "scale {scale} beyond J* = {}",
            self.j_star
        );
        &self.values[(level - 1) * self.len..level * self.len]
    }

    pub fn rows(&self) -> impl Iterator<Item = (Scale, &[f64])> {
        Scale::up_to(self.j_star).zip(self.values.chunks_exact(self.len))
    }

    pub fn get(&self, scale: Scale, k: usize) -> f64 {
        self.row(scale)[k]
    }
}

/// How a scale's circular convolution is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvolutionMethod {
    /// Frequency domain when `T * L_j > FFT_CROSSOVER`, direct otherwise.
    #[default]
    Auto,
    Direct,
    Fft,
}

/// Reusable periodogram evaluator for a fixed `(T, J*)`.
///
/// Holds the filters, FFT plans and filter spectra so that repeated calls
/// (bootstrap replicates) skip all setup work.
#[derive(Clone)]
pub struct PeriodogramPlan {
    len: usize,
    filters: Vec<WaveletFilter>,
    /// Frequency response per scale; `None` for directly convolved scales.
    spectra: Vec<Option<Vec<Complex64>>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for PeriodogramPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodogramPlan")
            .field("len", &self.len)
            .field("j_star", &self.filters.len())
            .field(
                "fft_scales",
                &self.spectra.iter().filter(|s| s.is_some()).count(),
            )
            .finish()
    }
}

impl PeriodogramPlan {
    pub fn new(len: usize, j_star: usize) -> Result<Self> {
        Self::with_method(len, j_star, ConvolutionMethod::Auto)
    }

    pub fn with_method(len: usize, j_star: usize, method: ConvolutionMethod) -> Result<Self> {
        if j_star == 0 || j_star > MAX_LEVEL as usize {
            return Err(Error::InfeasibleConfig(format!(
                "J* must be in 1..={MAX_LEVEL}, got {j_star}"
            )));
        }
        let required = 1usize << j_star;
        if len < required {
            return Err(Error::SeriesTooShort { len, required });
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);

        let filters: Vec<WaveletFilter> = Scale::up_to(j_star).map(haar_for).collect();
        let spectra = filters
            .iter()
            .map(|filter| {
                let use_fft = match method {
                    ConvolutionMethod::Direct => false,
                    ConvolutionMethod::Fft => true,
                    ConvolutionMethod::Auto => len * filter.len() > FFT_CROSSOVER,
                };
                use_fft.then(|| {
                    let mut buf = vec![Complex64::new(0.0, 0.0); len];
                    for (b, &t) in buf.iter_mut().zip(&filter.taps) {
                        b.re = t;
                    }
                    forward.process(&mut buf);
                    // The taps sum to zero exactly; keep the DC response exact too.
                    buf[0] = Complex64::new(0.0, 0.0);
                    buf
                })
            })
            .collect();

        Ok(PeriodogramPlan {
            len,
            filters,
            spectra,
            forward,
            inverse,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn j_star(&self) -> usize {
        self.filters.len()
    }

    pub fn compute(&self, x: &[f64]) -> Result<PeriodogramMatrix> {
        let mut values = vec![0.0; self.len * self.j_star()];
        self.compute_into(x, &mut values)?;
        Ok(PeriodogramMatrix {
            j_star: self.j_star(),
            len: self.len,
            values,
        })
    }

    /// Writes the row-major `J* x T` periodogram into `out`.
    pub fn compute_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.len;
        if x.len() != n {
            return Err(Error::InfeasibleConfig(format!(
                "plan built for length {n}, got series of length {}",
                x.len()
            )));
        }
        assert_eq!(out.len(), n * self.j_star());

        // The filters annihilate constants, so centring changes nothing but
        // keeps rounding error independent of the series level.
        let mean = x.iter().sum::<f64>() / n as f64;
        let centred: Vec<f64> = x.iter().map(|v| v - mean).collect();

        let mut spectrum: Option<Vec<Complex64>> = None;
        let mut scratch = Vec::new();
        for (level, row) in out.chunks_exact_mut(n).enumerate() {
            match &self.spectra[level] {
                None => convolve_direct_sq(&centred, &self.filters[level].taps, row),
                Some(response) => {
                    let xf = spectrum.get_or_insert_with(|| {
                        let mut buf: Vec<Complex64> =
                            centred.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                        self.forward.process(&mut buf);
                        buf
                    });
                    let mut buf: Vec<Complex64> =
                        xf.iter().zip(response).map(|(a, b)| a * b).collect();
                    scratch.resize(self.inverse.get_inplace_scratch_len(), Complex64::default());
                    self.inverse.process_with_scratch(&mut buf, &mut scratch);
                    let norm = 1.0 / n as f64;
                    for (r, c) in row.iter_mut().zip(&buf) {
                        let d = c.re * norm;
                        *r = d * d;
                    }
                }
            }
        }
        Ok(())
    }
}

/// `out[k] = (sum_m taps[m] * x[(k - m) mod T])^2`.
fn convolve_direct_sq(x: &[f64], taps: &[f64], out: &mut [f64]) {
    let n = x.len();
    for (k, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (m, &h) in taps.iter().enumerate() {
            acc += h * x[(k + n - m) % n];
        }
        *o = acc * acc;
    }
}

/// Wavelet periodogram with the default convolution crossover.
pub fn wavelet_periodogram(x: &[f64], j_star: usize) -> Result<PeriodogramMatrix> {
    PeriodogramPlan::new(x.len(), j_star)?.compute(x)
}

/// Autocorrelation wavelet `Psi_j(tau) = sum_k psi_{j,k} psi_{j,k+tau}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocorrWavelet {
    pub scale: Scale,
    /// Values at lags `0..L_j`; the function is even.
    values: Vec<f64>,
}

impl AutocorrWavelet {
    pub fn at(&self, tau: i64) -> f64 {
        let lag = tau.unsigned_abs() as usize;
        self.values.get(lag).copied().unwrap_or(0.0)
    }

    /// Largest lag with possibly non-zero value, `L_j - 1`.
    pub fn support(&self) -> usize {
        self.values.len() - 1
    }

    /// `(tau, Psi_j(tau))` over the full symmetric support.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let s = self.support() as i64;
        (-s..=s).map(move |tau| (tau, self.at(tau)))
    }
}

pub fn autocorr_wavelet(j: i32) -> Result<AutocorrWavelet> {
    let filter = haar_filter(j)?;
    let taps = &filter.taps;
    let values = (0..taps.len())
        .map(|tau| taps.iter().zip(&taps[tau..]).map(|(a, b)| a * b).sum())
        .collect();
    Ok(AutocorrWavelet {
        scale: filter.scale,
        values,
    })
}

/// Gram matrix `A_{j,l} = sum_tau Psi_j(tau) Psi_l(tau)` over scales
/// `-1..-J*`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    j_star: usize,
    values: Vec<f64>,
}

impl OperatorMatrix {
    pub fn j_star(&self) -> usize {
        self.j_star
    }

    pub fn get(&self, j: Scale, l: Scale) -> f64 {
        assert!(j.level() <= self.j_star && l.level() <= self.j_star);
        self.values[(j.level() - 1) * self.j_star + l.level() - 1]
    }

    /// `beta_j = sum_l S_l A_{j,l}` for a spectrum constant in time;
    /// `spectrum[l - 1]` holds `S_{-l}`.
    pub fn apply(&self, spectrum: &[f64]) -> Vec<f64> {
        assert_eq!(spectrum.len(), self.j_star);
        self.values
            .chunks_exact(self.j_star)
            .map(|row| row.iter().zip(spectrum).map(|(a, s)| a * s).sum())
            .collect()
    }
}

pub fn operator_matrix(j_star: usize) -> Result<OperatorMatrix> {
    if j_star == 0 || j_star > MAX_LEVEL as usize {
        return Err(Error::InfeasibleConfig(format!(
            "J* must be in 1..={MAX_LEVEL}"
        )));
    }
    let psis = Scale::up_to(j_star)
        .map(|s| autocorr_wavelet(s.j()))
        .collect::<Result<Vec<_>>>()?;
    let mut values = vec![0.0; j_star * j_star];
    for (a, pa) in psis.iter().enumerate() {
        for (b, pb) in psis.iter().enumerate().skip(a) {
            let lag = pa.support().min(pb.support()) as i64;
            let v: f64 = (-lag..=lag).map(|t| pa.at(t) * pb.at(t)).sum();
            values[a * j_star + b] = v;
            values[b * j_star + a] = v;
        }
    }
    Ok(OperatorMatrix { j_star, values })
}

/// Leading variance term of a contrast for unit-variance white noise:
/// `2 * A_{j,j} * sum_k w_k^2`.
pub fn white_noise_contrast_variance(j: i32, weights: &[f64]) -> Result<f64> {
    let scale = Scale::new(j)?;
    let a = operator_matrix(scale.level())?.get(scale, scale);
    Ok(2.0 * a * weights.iter().map(|w| w * w).sum::<f64>())
}
