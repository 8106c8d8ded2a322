//! Monte Carlo size and power experiments.
//!
//! Each replication draws its data and its test seed from a substream keyed
//! by `(model, innovation, T, replicate)`, so results do not depend on the
//! number of worker threads. All levels in a plan are evaluated on the same
//! replications.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use log::info;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run_test, Argmax, TestConfig, WeightProfile};
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::simgen::{gen_model, InnovationDist, ModelSpec, ModelTag};

/// Environment variable consulted for the default worker count.
pub const WORKERS_ENV: &str = "STATIONARITY_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Size,
    Power,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Size => "size",
            Suite::Power => "power",
        }
    }

    pub fn default_models(self) -> Vec<ModelTag> {
        match self {
            Suite::Size => ModelTag::STATIONARY.to_vec(),
            Suite::Power => ModelTag::NONSTATIONARY.to_vec(),
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "size" => Ok(Suite::Size),
            "power" => Ok(Suite::Power),
            other => Err(Error::InvalidPlan(format!("unknown suite '{other}'"))),
        }
    }
}

/// Test settings shared by every replication of a plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSettings {
    pub intervals: usize,
    pub min_len: Option<usize>,
    pub j_star: Option<usize>,
    pub replicates: usize,
    pub max_ar_order: Option<usize>,
}

impl Default for TestSettings {
    fn default() -> Self {
        let d = TestConfig::default();
        TestSettings {
            intervals: d.intervals,
            min_len: d.min_len,
            j_star: d.j_star,
            replicates: d.replicates,
            max_ar_order: d.max_ar_order,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub suite: Suite,
    pub models: Vec<ModelTag>,
    /// Innovation laws for stationary models; alternatives are always Gaussian.
    pub innovations: Vec<InnovationDist>,
    pub lengths: Vec<usize>,
    pub alphas: Vec<f64>,
    pub replications: usize,
    pub master_seed: u64,
    pub test: TestSettings,
    /// Thread count; never affects results, so it is not echoed in reports.
    #[serde(skip)]
    pub workers: Option<usize>,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

impl ExperimentPlan {
    pub fn new(suite: Suite) -> Self {
        ExperimentPlan {
            suite,
            models: suite.default_models(),
            innovations: vec![InnovationDist::Normal],
            lengths: vec![512],
            alphas: vec![0.1, 0.05],
            replications: 100,
            master_seed: 0,
            test: TestSettings::default(),
            workers: None,
            output_dir: PathBuf::from("."),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidPlan(m.to_string()));
        if self.replications == 0 {
            return fail("replications R must be at least 1");
        }
        if self.models.is_empty() {
            return fail("no models selected");
        }
        if self.lengths.is_empty() {
            return fail("no series lengths selected");
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return fail("levels must be non-empty and inside (0, 1)");
        }
        if self.innovations.is_empty() {
            return fail("no innovation distributions selected");
        }
        if self.test.replicates < 2 {
            return fail("bootstrap replicates B must be at least 2");
        }
        if self.workers == Some(0) {
            return fail("worker count must be positive");
        }
        Ok(())
    }

    /// `(model, innovation, T)` combinations in report order.
    pub fn cells(&self) -> Vec<(ModelTag, InnovationDist, usize)> {
        let mut out = Vec::new();
        for &innovation in &self.innovations {
            for &model in &self.models {
                if !model.is_stationary() && innovation != InnovationDist::Normal {
                    continue;
                }
                for &len in &self.lengths {
                    out.push((model, innovation, len));
                }
            }
        }
        out
    }

    fn test_config(&self, seed: u64, alpha: f64) -> TestConfig {
        TestConfig {
            alpha,
            intervals: self.test.intervals,
            min_len: self.test.min_len,
            j_star: self.test.j_star,
            replicates: self.test.replicates,
            seed,
            max_ar_order: self.test.max_ar_order,
            parallel: false,
            keep_tables: false,
            ..TestConfig::default()
        }
    }
}

/// Substream for one replication of one cell.
pub fn replication_stream(
    master_seed: u64,
    model: ModelTag,
    innovation: InnovationDist,
    len: usize,
    replicate: usize,
) -> Stream {
    Stream::root(master_seed)
        .derive(&format!("model/{model}"), 0)
        .derive(&format!("innovation/{innovation}"), 0)
        .derive("length", len as u64)
        .derive("replicate", replicate as u64)
}

/// Outcome of one replication under every level of the plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub rejects: Vec<bool>,
    pub argmax: Argmax,
    pub runtime_ms: f64,
}

/// Runs one replication: simulate, then test at the first level and decide
/// at all remaining levels from the same statistic.
pub fn run_replication(
    plan: &ExperimentPlan,
    model: ModelTag,
    innovation: InnovationDist,
    len: usize,
    replicate: usize,
) -> Result<Replication> {
    let started = Instant::now();
    let stream = replication_stream(plan.master_seed, model, innovation, len, replicate);
    let spec = ModelSpec::new(model, len).with_innovation(innovation);
    let x = gen_model(&spec, &stream.derive("data", 0))?;
    let seed = stream.derive("test", 0).rng().next_u64();
    let result = run_test(&x, &plan.test_config(seed, plan.alphas[0]))?;
    let rejects = plan
        .alphas
        .iter()
        .map(|&a| result.reject_at(a))
        .collect::<Result<Vec<_>>>()?;
    Ok(Replication {
        rejects,
        argmax: result.argmax,
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// One table cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub model: ModelTag,
    pub innovation: InnovationDist,
    #[serde(rename = "T")]
    pub len: usize,
    pub alpha: f64,
    pub rejections: usize,
    #[serde(rename = "R")]
    pub replications: usize,
    pub fraction: f64,
    /// Replications that failed; they count as non-rejections.
    pub errors: usize,
    pub first_error: Option<String>,
    /// Wall-clock mean, kept out of files so reports stay reproducible.
    #[serde(skip)]
    pub mean_runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileReport {
    pub model: ModelTag,
    pub len: usize,
    pub profile: WeightProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub plan: ExperimentPlan,
    pub cells: Vec<CellReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub summary: ExperimentSummary,
    pub profiles: Vec<ProfileReport>,
}

impl ExperimentReport {
    pub fn cells(&self) -> &[CellReport] {
        &self.summary.cells
    }

    pub fn cell(&self, model: ModelTag, len: usize, alpha: f64) -> Option<&CellReport> {
        self.summary
            .cells
            .iter()
            .find(|c| c.model == model && c.len == len && c.alpha == alpha)
    }

    pub fn profile(&self, model: ModelTag, len: usize) -> Option<&WeightProfile> {
        self.profiles
            .iter()
            .find(|p| p.model == model && p.len == len)
            .map(|p| &p.profile)
    }
}

pub fn default_workers() -> Option<usize> {
    std::env::var(WORKERS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
}

/// Runs every cell of the plan. Failed replications are counted per cell
/// and do not stop the run.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    plan.validate()?;
    let workers = plan.workers.or_else(default_workers);
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = workers {
            b = b.num_threads(n);
        }
        b.build().map_err(|e| Error::InvalidPlan(e.to_string()))?
    };

    let mut cells = Vec::new();
    let mut profiles = Vec::new();
    for (model, innovation, len) in plan.cells() {
        let started = Instant::now();
        let outcomes: Vec<Result<Replication>> = pool.install(|| {
            (0..plan.replications)
                .into_par_iter()
                .map(|r| run_replication(plan, model, innovation, len, r))
                .collect()
        });
        let ok: Vec<&Replication> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
        let errors = outcomes.len() - ok.len();
        let first_error = outcomes
            .iter()
            .find_map(|o| o.as_ref().err())
            .map(|e| e.to_string());
        let mean_runtime_ms = if ok.is_empty() {
            0.0
        } else {
            ok.iter().map(|r| r.runtime_ms).sum::<f64>() / ok.len() as f64
        };
        info!(
            "{model} {innovation} T={len}: {} replications in {:.1}s ({errors} failed)",
            plan.replications,
            started.elapsed().as_secs_f64()
        );
        for (i, &alpha) in plan.alphas.iter().enumerate() {
            let rejections = ok.iter().filter(|r| r.rejects[i]).count();
            cells.push(CellReport {
                model,
                innovation,
                len,
                alpha,
                rejections,
                replications: plan.replications,
                fraction: rejections as f64 / plan.replications as f64,
                errors,
                first_error: first_error.clone(),
                mean_runtime_ms,
            });
        }
        if plan.suite == Suite::Power && !ok.is_empty() {
            let argmax: Vec<Argmax> = ok.iter().map(|r| r.argmax).collect();
            profiles.push(ProfileReport {
                model,
                len,
                profile: WeightProfile::from_argmax(&argmax, len)?,
            });
        }
    }
    Ok(ExperimentReport {
        summary: ExperimentSummary {
            plan: plan.clone(),
            cells,
        },
        profiles,
    })
}

/// Row of a rejection table file.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub model: ModelTag,
    pub len: usize,
    pub alpha: f64,
    pub rejections: usize,
    pub replications: usize,
    pub fraction: f64,
}

impl From<&CellReport> for TableRow {
    fn from(c: &CellReport) -> Self {
        TableRow {
            model: c.model,
            len: c.len,
            alpha: c.alpha,
            rejections: c.rejections,
            replications: c.replications,
            fraction: c.fraction,
        }
    }
}

pub const TABLE_HEADER: &str = "model,T,alpha,rejections,R,fraction";
pub const PROFILE_HEADER: &str = "t,weight_scheme_i,weight_scheme_ii";

pub fn format_table(rows: &[TableRow]) -> String {
    let mut out = format!("{TABLE_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.model, r.len, r.alpha, r.rejections, r.replications, r.fraction
        )
        .unwrap();
    }
    out
}

fn csv_records(text: &str, header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header '{header}'"),
            })
        }
    }
    let width = header.split(',').count();
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let fields: Vec<String> = l.split(',').map(|f| f.trim().to_string()).collect();
            if fields.len() != width {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected {width} fields, found {}", fields.len()),
                });
            }
            Ok((i + 1, fields))
        })
        .collect()
}

fn field<T: FromStr>(line: usize, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad field '{s}'"),
    })
}

pub fn parse_table(text: &str) -> Result<Vec<TableRow>> {
    csv_records(text, TABLE_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            Ok(TableRow {
                model: f[0].parse()?,
                len: field(line, &f[1])?,
                alpha: field(line, &f[2])?,
                rejections: field(line, &f[3])?,
                replications: field(line, &f[4])?,
                fraction: field(line, &f[5])?,
            })
        })
        .collect()
}

pub fn format_profile(profile: &WeightProfile) -> String {
    let mut out = format!("{PROFILE_HEADER}\n");
    for (t, (a, b)) in profile
        .equal
        .iter()
        .zip(&profile.inverse_length)
        .enumerate()
    {
        writeln!(out, "{t},{a},{b}").unwrap();
    }
    out
}

pub fn parse_profile(text: &str) -> Result<WeightProfile> {
    let mut equal = Vec::new();
    let mut inverse_length = Vec::new();
    for (line, f) in csv_records(text, PROFILE_HEADER)? {
        let t: usize = field(line, &f[0])?;
        if t != equal.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected t = {}, found {t}", equal.len()),
            });
        }
        equal.push(field(line, &f[1])?);
        inverse_length.push(field(line, &f[2])?);
    }
    Ok(WeightProfile {
        equal,
        inverse_length,
    })
}

pub fn table_file_name(suite: Suite, innovation: InnovationDist) -> String {
    format!("{}_{}.csv", suite.as_str(), innovation)
}

pub fn profile_file_name(model: ModelTag, len: usize) -> String {
    format!("profile_{model}_T{len}.csv")
}

pub const SUMMARY_FILE: &str = "summary.json";

fn write(path: &Path, contents: &str) -> Result<PathBuf> {
    fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(path.to_path_buf())
}

/// Writes rejection tables (one per innovation law), weight profiles and
/// the JSON summary into `dir`. Returns the paths written.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let plan = &report.summary.plan;
    let mut written = Vec::new();
    for &innovation in &plan.innovations {
        let rows: Vec<TableRow> = report
            .cells()
            .iter()
            .filter(|c| c.innovation == innovation)
            .map(TableRow::from)
            .collect();
        if rows.is_empty() {
            continue;
        }
        written.push(write(
            &dir.join(table_file_name(plan.suite, innovation)),
            &format_table(&rows),
        )?);
    }
    for p in &report.profiles {
        written.push(write(
            &dir.join(profile_file_name(p.model, p.len)),
            &format_profile(&p.profile),
        )?);
    }
    let json =
        serde_json::to_string_pretty(&report.summary).map_err(|e| Error::Io(e.to_string()))?;
    written.push(write(&dir.join(SUMMARY_FILE), &(json + "\n"))?);
    Ok(written)
}

pub fn read_summary(path: &Path) -> Result<ExperimentSummary> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_replications_rejected() {
        let plan = ExperimentPlan {
            replications: 0,
            ..ExperimentPlan::new(Suite::Size)
        };
        assert!(matches!(run_experiment(&plan), Err(Error::InvalidPlan(_))));
    }

    #[test]
    fn alternatives_only_run_gaussian() {
        let plan = ExperimentPlan {
            models: vec![ModelTag::S1, ModelTag::N1],
            innovations: vec![InnovationDist::Normal, InnovationDist::T5],
            ..ExperimentPlan::new(Suite::Size)
        };
        let cells = plan.cells();
        assert_eq!(cells.len(), 3);
        assert!(!cells.contains(&(ModelTag::N1, InnovationDist::T5, 512)));
    }

    #[test]
    fn table_roundtrip() {
        let rows = vec![
            TableRow {
                model: ModelTag::S1,
                len: 512,
                alpha: 0.1,
                rejections: 7,
                replications: 100,
                fraction: 0.07,
            },
            TableRow {
                model: ModelTag::N12,
                len: 256,
                alpha: 0.05,
                rejections: 1,
                replications: 3,
                fraction: 1.0 / 3.0,
            },
        ];
        assert_eq!(parse_table(&format_table(&rows)).unwrap(), rows);
        assert!(parse_table("model,T\n").is_err());
    }

    #[test]
    fn profile_roundtrip() {
        let p = WeightProfile {
            equal: vec![0.0, 0.01, 1.0 / 3.0],
            inverse_length: vec![1e-5, 0.0, 2.0 / 7.0],
        };
        assert_eq!(parse_profile(&format_profile(&p)).unwrap(), p);
    }

    #[test]
    fn infeasible_cell_is_recorded() {
        let plan = ExperimentPlan {
            models: vec![ModelTag::S1],
            lengths: vec![64],
            replications: 2,
            alphas: vec![0.05],
            test: TestSettings {
                min_len: Some(100),
                replicates: 10,
                ..TestSettings::default()
            },
            ..ExperimentPlan::new(Suite::Size)
        };
        let report = run_experiment(&plan).unwrap();
        let cell = &report.cells()[0];
        assert_eq!((cell.rejections, cell.errors, cell.fraction), (0, 2, 0.0));
        assert!(cell.first_error.as_deref().unwrap().contains("infeasible"));
    }
}
