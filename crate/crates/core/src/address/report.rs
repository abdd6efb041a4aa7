//! Analysis report file.

use serde::{Deserialize, Serialize};

use super::{meyer_test, rank, AddressedSample, LinearApprox, DEFAULT_WINDOW_RATIO};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub s: usize,
    pub rank_exceeds_d: bool,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: f64,
    pub profile: Vec<[f64; 2]>,
    pub verdict: String,
}

impl AnalysisReport {
    pub fn new<T: Real>(a: &AddressedSample, l: &LinearApprox<T>) -> Result<Self> {
        let (s, flag) = rank(a);
        let verdict = meyer_test(l, DEFAULT_WINDOW_RATIO)?;
        Ok(AnalysisReport {
            s,
            rank_exceeds_d: flag,
            a: l
                .matrix()
                .to_rows()
                .into_iter()
                .map(|r| r.into_iter().map(|x| x.as_f64()).collect())
                .collect(),
            c: l.c().as_f64(),
            profile: l.profile().iter().map(|(r, c)| [r.as_f64(), c.as_f64()]).collect(),
            verdict: verdict.as_str().to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}
