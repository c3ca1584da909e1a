//! Machine-readable verification records.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One verified quantity against its reference value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub quantity: String,
    #[serde(default)]
    pub anchor: String,
    pub expected: f64,
    pub computed: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Pass when `|computed − reference| ≤ tolerance`.
    pub fn absolute(quantity: &str, reference: f64, computed: f64, tolerance: f64) -> Check {
        Check {
            quantity: quantity.into(),
            anchor: String::new(),
            expected: reference,
            computed,
            tolerance,
            pass: (computed - reference).abs() <= tolerance,
        }
    }

    /// Pass when `|computed − reference| ≤ tolerance · |reference|`.
    pub fn relative(quantity: &str, reference: f64, computed: f64, tolerance: f64) -> Check {
        Check {
            quantity: quantity.into(),
            anchor: String::new(),
            expected: reference,
            computed,
            tolerance,
            pass: (computed - reference).abs() <= tolerance * reference.abs(),
        }
    }

    /// Pass when `computed < bound`.
    pub fn below(quantity: &str, bound: f64, computed: f64) -> Check {
        Check { quantity: quantity.into(), anchor: String::new(), expected: bound, computed, tolerance: 0.0, pass: computed < bound }
    }

    /// Pass when `computed ≥ bound`.
    pub fn above(quantity: &str, bound: f64, computed: f64) -> Check {
        Check { quantity: quantity.into(), anchor: String::new(), expected: bound, computed, tolerance: 0.0, pass: computed >= bound }
    }

    /// Boolean predicate recorded as `1.0`/`0.0`.
    pub fn predicate(quantity: &str, holds: bool) -> Check {
        Check {
            quantity: quantity.into(),
            anchor: String::new(),
            expected: 1.0,
            computed: if holds { 1.0 } else { 0.0 },
            tolerance: 0.0,
            pass: holds,
        }
    }

    /// Attaches the statement this check verifies.
    pub fn anchored(mut self, anchor: &str) -> Check {
        self.anchor = anchor.into();
        self
    }
}

/// Named sections of checks plus free-form JSON payloads.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub seed: u64,
    /// Conjunction of every check.
    pub pass: bool,
    pub sections: BTreeMap<String, Vec<Check>>,
    pub data: BTreeMap<String, serde_json::Value>,
}

impl VerificationReport {
    pub fn new(seed: u64) -> Self {
        VerificationReport { seed, pass: true, ..Default::default() }
    }

    pub fn add(&mut self, section: &str, checks: Vec<Check>) {
        self.pass &= checks.iter().all(|c| c.pass);
        self.sections.entry(section.into()).or_default().extend(checks);
    }

    pub fn attach<T: Serialize>(&mut self, key: &str, value: &T) {
        self.data.insert(key.into(), serde_json::to_value(value).expect("value serializes"));
    }

    pub fn all_pass(&self) -> bool {
        self.sections.values().flatten().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.sections.values().flatten().filter(|c| !c.pass).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
