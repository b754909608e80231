//! Per-record rows, corpus aggregates and the report file.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use specbench::fingerprints::FpSimilarity;
use specbench::geometry::{self, GeometryReport};
use specbench::nmr_metrics::{aggregate_scores, stable_mean, MatchScore};
use specbench::seq_metrics::{summarize, PairScore};
use specbench::taskgen::InstructionRecord;

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Serialize,
    Parse,
    ScoreNmr13c,
    ScoreNmr1h,
    ScoreIr,
    ScoreMs,
    ScoreSeq,
    Geom,
    Fpsim,
    Taskgen,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).expect("unit variant");
        f.write_str(v.as_str().expect("string"))
    }
}

/// One output line: metrics for a record, or why it has none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de>"))]
pub struct Row<T> {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl<T: Serialize> Row<T> {
    pub fn ok(id: impl Into<String>, metrics: T) -> Value {
        serde_json::to_value(Row { id: id.into(), metrics: Some(metrics), error: None }).expect("row serializes")
    }
}

pub fn error_row(id: impl Into<String>, error: impl fmt::Display) -> Value {
    json!({ "id": id.into(), "error": error.to_string() })
}

pub fn is_error_row(row: &Value) -> bool {
    row.get("error").is_some()
}

/// Cosine row for IR, Raman, UV and MS pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorScore {
    pub modality: String,
    pub cosine: f64,
    pub dropped_pred: usize,
    pub dropped_truth: usize,
}

/// Row for `serialize` (text out) and `parse` (structure out).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conversion {
    pub modality: String,
    pub output: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub command: Command,
    pub config: RunConfig,
    pub aggregate: Value,
    pub warnings: BTreeMap<String, usize>,
    pub per_record: Vec<Value>,
}

impl EvalReport {
    pub fn build(
        command: Command,
        config: RunConfig,
        per_record: Vec<Value>,
        mut warnings: BTreeMap<String, usize>,
    ) -> Result<Self, CliError> {
        let errors = per_record.iter().filter(|r| is_error_row(r)).count();
        if errors > 0 {
            warnings.insert("record_errors".into(), errors);
        }
        if per_record.iter().all(is_error_row) {
            warnings.insert("empty_corpus".into(), 1);
        }
        let aggregate = aggregate(command, &per_record)?;
        Ok(EvalReport { command, config, aggregate, warnings, per_record })
    }

    pub fn record_errors(&self) -> usize {
        self.warnings.get("record_errors").copied().unwrap_or(0)
    }

    /// Concatenates per-record rows and recomputes the aggregate. Warning counts are summed.
    pub fn merge(reports: Vec<EvalReport>) -> Result<EvalReport, CliError> {
        let mut it = reports.into_iter();
        let mut merged = it.next().ok_or_else(|| CliError::Usage("nothing to merge".into()))?;
        for r in it {
            if r.command != merged.command {
                return Err(CliError::Usage(format!("cannot merge {} with {} reports", merged.command, r.command)));
            }
            if r.config != merged.config {
                *merged.warnings.entry("config_mismatch".into()).or_insert(0) += 1;
            }
            for (k, v) in r.warnings {
                if k != "empty_corpus" && k != "record_errors" {
                    *merged.warnings.entry(k).or_insert(0) += v;
                }
            }
            merged.per_record.extend(r.per_record);
        }
        merged.warnings.remove("empty_corpus");
        merged.warnings.remove("record_errors");
        EvalReport::build(merged.command, merged.config, merged.per_record, merged.warnings)
    }
}

fn metrics_of<T: DeserializeOwned>(rows: &[Value]) -> Result<Vec<T>, CliError> {
    rows.iter()
        .filter(|r| !is_error_row(r))
        .map(|r| {
            let row: Row<T> =
                serde_json::from_value(r.clone()).map_err(|e| CliError::Report(format!("bad row: {e}")))?;
            row.metrics.ok_or_else(|| CliError::Report("row without metrics or error".into()))
        })
        .collect()
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    stable_mean(values)
}

/// Corpus summary recomputed from per-record rows alone.
pub fn aggregate(command: Command, rows: &[Value]) -> Result<Value, CliError> {
    let errors = rows.iter().filter(|r| is_error_row(r)).count();
    let scored = rows.len() - errors;
    let summary = match command {
        Command::ScoreNmr13c | Command::ScoreNmr1h => {
            let scores: Vec<MatchScore> = metrics_of(rows)?;
            json!(aggregate_scores(&scores).ok())
        }
        Command::ScoreIr | Command::ScoreMs => {
            let scores: Vec<VectorScore> = metrics_of(rows)?;
            json!({
                "cosine": mean(scores.iter().map(|s| s.cosine)),
                "dropped_peaks": scores.iter().map(|s| s.dropped_pred + s.dropped_truth).sum::<usize>(),
            })
        }
        Command::ScoreSeq => {
            let scores: Vec<PairScore> = metrics_of(rows)?;
            json!(summarize(&scores).ok())
        }
        Command::Geom => {
            let reports: Vec<GeometryReport> = metrics_of(rows)?;
            json!(geometry::summarize(&reports).ok())
        }
        Command::Fpsim => {
            let sims: Vec<FpSimilarity> = metrics_of(rows)?;
            if sims.is_empty() {
                Value::Null
            } else {
                json!({
                    "rdk_fp_sim": mean(sims.iter().map(|s| s.rdk_fp_sim)),
                    "torsion_sim": mean(sims.iter().map(|s| s.torsion_sim)),
                    "atom_pair_sim": mean(sims.iter().map(|s| s.atom_pair_sim)),
                })
            }
        }
        Command::Serialize | Command::Parse => {
            let conv: Vec<Conversion> = metrics_of(rows)?;
            let mut by_modality: BTreeMap<String, usize> = BTreeMap::new();
            for c in conv {
                *by_modality.entry(c.modality).or_insert(0) += 1;
            }
            json!({ "by_modality": by_modality })
        }
        Command::Taskgen => {
            let mut by_task: BTreeMap<String, usize> = BTreeMap::new();
            let mut by_format: BTreeMap<String, usize> = BTreeMap::new();
            let mut by_split: BTreeMap<String, usize> = BTreeMap::new();
            let mut failures = 0;
            for r in rows.iter().filter(|r| !is_error_row(r)) {
                let inst: InstructionRecord = serde_json::from_value(r.clone())
                    .map_err(|e| CliError::Report(format!("bad instruction row: {e}")))?;
                *by_task.entry(inst.task.to_string()).or_insert(0) += 1;
                *by_format.entry(inst.format.to_string()).or_insert(0) += 1;
                if let Some(s) = r.get("split").and_then(Value::as_str) {
                    *by_split.entry(s.to_string()).or_insert(0) += 1;
                }
                if specbench::taskgen::self_check(&inst).is_err() {
                    failures += 1;
                }
            }
            json!({ "by_task": by_task, "by_format": by_format, "by_split": by_split, "self_check_failures": failures })
        }
    };
    Ok(json!({ "records": rows.len(), "scored": scored, "errors": errors, "summary": summary }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_names() {
        assert_eq!(Command::ScoreNmr13c.to_string(), "score-nmr13c");
        assert_eq!(Command::Fpsim.to_string(), "fpsim");
    }

    #[test]
    fn merge_sums_counts() {
        let row = |id: &str, acc: f64| Row::ok(id, PairScore { token_acc: acc, exact: acc == 1.0 });
        let a =
            EvalReport::build(Command::ScoreSeq, RunConfig::default(), vec![row("a", 1.0)], BTreeMap::new()).unwrap();
        let b = EvalReport::build(
            Command::ScoreSeq,
            RunConfig::default(),
            vec![row("b", 0.0), error_row("c", "bad")],
            BTreeMap::new(),
        )
        .unwrap();
        let m = EvalReport::merge(vec![a, b]).unwrap();
        assert_eq!(m.aggregate["records"], 3);
        assert_eq!(m.aggregate["errors"], 1);
        assert_eq!(m.aggregate["summary"]["seq_acc"], 0.5);
        assert_eq!(m.record_errors(), 1);
    }

    #[test]
    fn empty_corpus_is_flagged() {
        let r = EvalReport::build(Command::Geom, RunConfig::default(), vec![], BTreeMap::new()).unwrap();
        assert_eq!(r.warnings.get("empty_corpus"), Some(&1));
        assert_eq!(r.aggregate["summary"], Value::Null);
    }
}
