use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::stats::{mean, std_dev};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    /// One value per run.
    #[serde(default)]
    pub values: Vec<f64>,
}

impl Condition {
    pub fn from_runs(name: impl Into<String>, metric: impl Into<String>, values: Vec<f64>) -> Self {
        Condition { name: name.into(), metric: metric.into(), mean: mean(&values), std: std_dev(&values), values }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub runs: u32,
    pub seed: u64,
    pub conditions: Vec<Condition>,
    pub artifacts: BTreeMap<String, Value>,
}

impl Report {
    pub fn condition(&self, name: &str, metric: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name && c.metric == metric)
    }

    /// Aligned plain-text table of all conditions.
    pub fn table(&self) -> String {
        let rows: Vec<[String; 4]> = self
            .conditions
            .iter()
            .map(|c| [c.name.clone(), c.metric.clone(), fmt_value(&c.metric, c.mean), fmt_value(&c.metric, c.std)])
            .collect();
        let header = ["condition".to_string(), "metric".into(), "mean".into(), "std".into()];
        let mut widths = header.clone().map(|h| h.len());
        for r in &rows {
            for (w, cell) in widths.iter_mut().zip(r) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[String; 4]| {
            format!(
                "{:<w0$}  {:<w1$}  {:>w2$}  {:>w3$}",
                cells[0],
                cells[1],
                cells[2],
                cells[3],
                w0 = widths[0],
                w1 = widths[1],
                w2 = widths[2],
                w3 = widths[3]
            )
            .trim_end()
            .to_string()
        };
        let mut out = format!("suite {} (runs={}, seed={})\n", self.suite, self.runs, self.seed);
        out.push_str(&line(&header));
        out.push('\n');
        for r in &rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }
}

fn fmt_value(metric: &str, v: f64) -> String {
    if metric.ends_with("accuracy") || matches!(metric, "top1" | "success" | "hit_rate") {
        format!("{:.2}%", v * 100.0)
    } else {
        format!("{v:.3}")
    }
}

/// Writes `<path>` (JSON) and `<path>` with a `.txt` extension (table).
pub fn emit(report: &Report, path: &Path) -> std::io::Result<(PathBuf, PathBuf)> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut json = serde_json::to_string_pretty(report).map_err(std::io::Error::other)?;
    json.push('\n');
    std::fs::write(path, json)?;
    let txt = path.with_extension("txt");
    std::fs::write(&txt, report.table())?;
    Ok((path.to_path_buf(), txt))
}

/// JSON Schema every emitted report conforms to.
pub const REPORT_SCHEMA: &str = r#"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "benchmark report",
  "type": "object",
  "required": ["suite", "runs", "seed", "conditions", "artifacts"],
  "properties": {
    "suite": { "enum": ["route", "sensorbind", "taskparser", "fastthinking", "toolext", "latency"] },
    "runs": { "type": "integer", "minimum": 0 },
    "seed": { "type": "integer", "minimum": 0 },
    "conditions": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["name", "metric", "mean", "std"],
        "properties": {
          "name": { "type": "string", "minLength": 1 },
          "metric": { "type": "string", "minLength": 1 },
          "mean": { "type": "number" },
          "std": { "type": "number", "minimum": 0 },
          "values": { "type": "array", "items": { "type": "number" } }
        }
      }
    },
    "artifacts": { "type": "object" }
  }
}"#;
