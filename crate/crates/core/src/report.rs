//! JSON report for a single test run.

use serde::{Deserialize, Serialize};

use crate::engine::TestResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgmaxReport {
    pub s_p: usize,
    pub e_p: usize,
    pub s_q: usize,
    pub e_q: usize,
    pub scale: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub reject: bool,
    pub statistic: f64,
    pub critical_value: f64,
    pub alpha: f64,
    #[serde(rename = "D")]
    pub pairs: usize,
    #[serde(rename = "J_star")]
    pub j_star: usize,
    #[serde(rename = "M")]
    pub intervals: usize,
    #[serde(rename = "m_T")]
    pub min_len: usize,
    #[serde(rename = "B")]
    pub replicates: usize,
    pub seed: u64,
    pub argmax: ArgmaxReport,
    pub per_scale_max: Vec<f64>,
    pub degenerate_cells: usize,
    pub runtime_ms: f64,
}

impl TestReport {
    pub fn new(result: &TestResult, runtime_ms: f64) -> Self {
        let a = &result.argmax;
        TestReport {
            reject: result.reject,
            statistic: result.statistic,
            critical_value: result.critical_value,
            alpha: result.alpha,
            pairs: result.pairs,
            j_star: result.j_star,
            intervals: result.intervals,
            min_len: result.min_len,
            replicates: result.replicates,
            seed: result.seed,
            argmax: ArgmaxReport {
                s_p: a.first.start,
                e_p: a.first.end,
                s_q: a.second.start,
                e_q: a.second.end,
                scale: a.scale.j(),
            },
            per_scale_max: result.per_scale_max.clone(),
            degenerate_cells: result.degenerate_cells,
            runtime_ms,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}
