//! Hypothesis-test and diagnostic outcome records.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// What a statistic is compared against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Reference {
    /// A numeric threshold or target.
    Value(f64),
    /// A named reference distribution.
    Distribution(String),
}

/// One test or diagnostic outcome. `pass` is a pure function of
/// `statistic`, `reference` and the declared threshold; metadata carries
/// provenance (beta, lambdas, seed, settings hash).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    pub reference: Reference,
    pub p_value: Option<f64>,
    pub pass: bool,
    pub n: u64,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl TestReport {
    pub fn new(name: impl Into<String>, statistic: f64, reference: Reference, pass: bool) -> Self {
        Self {
            name: name.into(),
            statistic,
            reference,
            p_value: None,
            pass,
            n: 0,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p_value = Some(p);
        self
    }

    pub fn with_n(mut self, n: u64) -> Self {
        self.n = n;
        self
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }
}
