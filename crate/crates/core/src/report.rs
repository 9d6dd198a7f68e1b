//! Experiment reports: a versioned JSON record of inputs, outputs and
//! assertions, a CSV view of the sequences, and report comparison.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metric::MetricSurfaceMesh;

pub const SCHEMA_VERSION: u32 = 1;

/// Where an assertion's target comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// A closed-form constant or inequality from the theory.
    ClosedForm,
    /// Holds by construction of the input.
    Construction,
    /// An independent computation (oracle) or a solver cross-check.
    Oracle,
}

/// How `value` is compared with `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `|value − target| ≤ tolerance·|target|`.
    Relative,
    /// `|value − target| ≤ tolerance`.
    Absolute,
    /// `value ≤ target·(1 + tolerance)`.
    AtMost,
    /// `value ≥ target·(1 − tolerance)`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub basis: Basis,
    pub pass: bool,
}

impl Assertion {
    pub fn new(name: &str, value: f64, target: f64, tolerance: f64, comparison: Comparison, basis: Basis) -> Self {
        let pass = match comparison {
            Comparison::Relative => (value - target).abs() <= tolerance * target.abs(),
            Comparison::Absolute => (value - target).abs() <= tolerance,
            Comparison::AtMost => value <= target * (1.0 + tolerance),
            Comparison::AtLeast => value >= target * (1.0 - tolerance),
        };
        Self { name: name.to_string(), value, target, tolerance, comparison, basis, pass }
    }

    /// A yes/no check recorded as value 1 (holds) or 0 against target 1.
    pub fn holds(name: &str, ok: bool, basis: Basis) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, 1.0, 0.0, Comparison::Absolute, basis)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    /// SHA-256 of the primary mesh JSON (empty when there is none).
    pub mesh_hash: String,
    pub parameters: Value,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub scalars: BTreeMap<String, f64>,
    pub sequences: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    pub inputs: Inputs,
    pub outputs: Outputs,
    pub assertions: Vec<Assertion>,
    pub pass: bool,
    pub runtime_ms: u64,
}

impl ExperimentReport {
    pub fn new(experiment: &str, parameters: Value, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            inputs: Inputs { mesh_hash: String::new(), parameters, seed },
            outputs: Outputs::default(),
            assertions: Vec::new(),
            pass: true,
            runtime_ms: 0,
        }
    }

    pub fn scalar(&mut self, name: &str, v: f64) {
        self.outputs.scalars.insert(name.to_string(), v);
    }

    pub fn sequence(&mut self, name: &str, v: Vec<f64>) {
        self.outputs.sequences.insert(name.to_string(), v);
    }

    pub fn check(&mut self, a: Assertion) {
        self.pass &= a.pass;
        self.assertions.push(a);
    }

    pub fn set_mesh(&mut self, mesh: &MetricSurfaceMesh) -> Result<()> {
        self.inputs.mesh_hash = mesh_hash(mesh)?;
        Ok(())
    }

    pub fn failed(&self) -> Vec<&Assertion> {
        self.assertions.iter().filter(|a| !a.pass).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        let version = v.get("schema_version").and_then(Value::as_u64);
        if version != Some(u64::from(SCHEMA_VERSION)) {
            return Err(Error::SchemaMismatch(format!("schema version {version:?}, expected {SCHEMA_VERSION}")));
        }
        serde_json::from_value(v).map_err(|e| Error::SchemaMismatch(e.to_string()))
    }

    /// Long-format CSV of scalars and sequences: `series,index,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("series,index,value\n");
        for (k, v) in &self.outputs.scalars {
            out.push_str(&format!("{k},0,{v}\n"));
        }
        for (k, vs) in &self.outputs.sequences {
            for (i, v) in vs.iter().enumerate() {
                out.push_str(&format!("{k},{i},{v}\n"));
            }
        }
        out
    }
}

pub fn mesh_hash(mesh: &MetricSurfaceMesh) -> Result<String> {
    let json = crate::mesh_io::mesh_to_json(mesh)?;
    Ok(hex::encode(Sha256::digest(json.as_bytes())))
}

/// Relative tolerances for [`compare_reports`]: `default` unless a field
/// path has its own entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub default: f64,
    #[serde(default)]
    pub fields: BTreeMap<String, f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { default: 0.0, fields: BTreeMap::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDiff {
    pub field: String,
    pub baseline: Value,
    pub current: Value,
    /// Relative difference for numbers, `None` otherwise.
    pub relative: Option<f64>,
    pub tolerance: f64,
    pub fail: bool,
}

/// Fields that differ between two reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportDiff {
    pub fields: Vec<FieldDiff>,
}

impl ReportDiff {
    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn failures(&self) -> Vec<&FieldDiff> {
        self.fields.iter().filter(|d| d.fail).collect()
    }
}

/// Flattens a JSON value to `path → leaf`. Arrays of objects with a
/// `name` key are keyed by name, other arrays by index.
fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, Value>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&join(k), x, out);
            }
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                let key = x.get("name").and_then(Value::as_str).map_or_else(|| i.to_string(), str::to_string);
                flatten(&join(&key), x, out);
            }
        }
        leaf => {
            out.insert(prefix.to_string(), leaf.clone());
        }
    }
}

/// Per-field comparison of two reports of the same experiment. Runtime is
/// ignored; key order is irrelevant.
pub fn compare_reports(baseline: &ExperimentReport, current: &ExperimentReport, tol: &Tolerances) -> Result<ReportDiff> {
    if baseline.experiment != current.experiment {
        return Err(Error::SchemaMismatch(format!(
            "experiment {} vs {}",
            baseline.experiment, current.experiment
        )));
    }
    if baseline.schema_version != current.schema_version {
        return Err(Error::SchemaMismatch(format!(
            "schema version {} vs {}",
            baseline.schema_version, current.schema_version
        )));
    }
    let mut a = BTreeMap::new();
    let mut b = BTreeMap::new();
    flatten("", &serde_json::to_value(baseline)?, &mut a);
    flatten("", &serde_json::to_value(current)?, &mut b);
    a.remove("runtime_ms");
    b.remove("runtime_ms");
    let keys: std::collections::BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    let mut fields = Vec::new();
    for k in keys {
        let (x, y) = (a.get(k).cloned().unwrap_or(Value::Null), b.get(k).cloned().unwrap_or(Value::Null));
        if x == y {
            continue;
        }
        let tolerance = tol.fields.get(k.as_str()).copied().unwrap_or(tol.default);
        let relative = match (x.as_f64(), y.as_f64()) {
            (Some(p), Some(q)) => Some((q - p).abs() / p.abs().max(q.abs()).max(f64::MIN_POSITIVE)),
            _ => None,
        };
        let fail = relative.is_none_or(|r| r > tolerance);
        fields.push(FieldDiff { field: k.clone(), baseline: x, current: y, relative, tolerance, fail });
    }
    Ok(ReportDiff { fields })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new("demo", json!({"n": 4, "eps": 0.5}), 7);
        r.scalar("modulus", 0.785);
        r.sequence("values", vec![1.0, 0.5]);
        r.check(Assertion::new("modulus", 0.62, 0.6, 0.05, Comparison::Relative, Basis::ClosedForm));
        r
    }

    #[test]
    fn identical_reports_have_no_diff() {
        let a = sample();
        let mut b = sample();
        b.runtime_ms = 999;
        assert!(compare_reports(&a, &b, &Tolerances::default()).unwrap().is_empty());
    }

    #[test]
    fn perturbed_scalar_fails_once() {
        let a = sample();
        let mut b = sample();
        b.scalar("modulus", 0.785 * 1.01);
        let d = compare_reports(&a, &b, &Tolerances { default: 0.005, ..Default::default() }).unwrap();
        assert_eq!(d.failures().len(), 1);
        assert_eq!(d.failures()[0].field, "outputs.scalars.modulus");
        let loose = Tolerances { default: 0.0, fields: [("outputs.scalars.modulus".to_string(), 0.02)].into() };
        assert!(compare_reports(&a, &b, &loose).unwrap().failures().is_empty());
    }

    #[test]
    fn key_order_is_irrelevant() {
        let a = sample();
        let text = a.to_json().unwrap();
        let mut v: Value = serde_json::from_str(&text).unwrap();
        // rebuild the parameters object with reversed insertion order
        v["inputs"]["parameters"] = json!({"eps": 0.5, "n": 4});
        let b: ExperimentReport = serde_json::from_value(v).unwrap();
        assert!(compare_reports(&a, &b, &Tolerances::default()).unwrap().is_empty());
    }

    #[test]
    fn schema_checks() {
        let a = sample();
        let mut b = sample();
        b.experiment = "other".into();
        assert!(matches!(compare_reports(&a, &b, &Tolerances::default()), Err(Error::SchemaMismatch(_))));
        let text = a.to_json().unwrap().replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(ExperimentReport::from_json(&text), Err(Error::SchemaMismatch(_))));
        assert_eq!(ExperimentReport::from_json(&a.to_json().unwrap()).unwrap(), a);
    }

    #[test]
    fn assertion_comparisons() {
        assert!(Assertion::new("a", 1.02, 1.0, 0.03, Comparison::Relative, Basis::Oracle).pass);
        assert!(!Assertion::new("a", 4.1, 4.0, 0.0, Comparison::AtMost, Basis::ClosedForm).pass);
        assert!(Assertion::new("a", 0.56, 0.6169, 0.1, Comparison::AtLeast, Basis::ClosedForm).pass);
        assert!(!Assertion::holds("h", false, Basis::Construction).pass);
        let r = sample();
        assert!(r.to_csv().contains("values,1,0.5"));
    }
}
