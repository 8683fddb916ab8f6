use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// One run of a subcommand. Everything except `wall_time_ms` is a function of
/// the inputs and the seed.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs_digest: String,
    pub results: Value,
    pub tolerances: BTreeMap<String, f64>,
    pub verdicts: BTreeMap<String, bool>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl Report {
    pub fn new(command: &str, inputs: &InputDigest, results: Value) -> Self {
        Report {
            command: command.to_string(),
            inputs_digest: inputs.finish(),
            results,
            tolerances: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            pass: true,
            wall_time_ms: None,
        }
    }

    pub fn tolerance(mut self, name: &str, tol: f64) -> Self {
        self.tolerances.insert(name.to_string(), tol);
        self
    }

    pub fn verdict(&mut self, name: &str, pass: bool) {
        self.verdicts.insert(name.to_string(), pass);
        self.pass &= pass;
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialise");
        s.push('\n');
        s
    }
}

/// SHA-256 over labelled input fields, in the order they are added.
#[derive(Clone, Default)]
pub struct InputDigest {
    hasher: Sha256,
}

impl InputDigest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, label: &str, bytes: &[u8]) -> &mut Self {
        for part in [label.as_bytes(), bytes] {
            self.hasher.update((part.len() as u64).to_le_bytes());
            self.hasher.update(part);
        }
        self
    }

    pub fn finish(&self) -> String {
        self.hasher.clone().finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
