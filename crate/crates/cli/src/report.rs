use std::collections::BTreeMap;
use std::time::Instant;

use fortin_core::fortin::{Certificate, Tolerances};
use serde::Serialize;
use serde_json::Value;

use crate::{CliError, Common};

pub const REPORT_VERSION: &str = "fortin-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Serialize)]
pub struct ReportTolerances {
    pub residual: f64,
    pub rank: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_slack: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duality: Option<f64>,
}

impl From<Tolerances> for ReportTolerances {
    fn from(t: Tolerances) -> Self {
        Self {
            residual: t.residual,
            rank: t.rank,
            beta_slack: None,
            duality: None,
        }
    }
}

/// `alpha_fine` is the inf-sup constant of the fine form, a surrogate for the
/// continuous one.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Constants {
    pub norm_a: f64,
    pub alpha_fine: f64,
    pub alpha_hat: f64,
    pub infsup_threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_tilde: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_pi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Entry {
    pub label: String,
    pub input: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<Constants>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub banach: Option<Value>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub timings_ms: BTreeMap<&'static str, f64>,
    /// Columns of the summary table.
    #[serde(skip)]
    pub summary: Vec<(&'static str, String)>,
}

impl Entry {
    pub fn new(label: impl Into<String>, input: Value) -> Self {
        Self {
            label: label.into(),
            input,
            constants: None,
            certificate: None,
            banach: None,
            verdict: Verdict::Pass,
            message: None,
            timings_ms: BTreeMap::new(),
            summary: Vec::new(),
        }
    }

    pub fn fail(&mut self, message: impl Into<String>) {
        self.verdict = Verdict::Fail;
        self.message = Some(message.into());
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub tool: Tool,
    pub command: String,
    pub tolerances: ReportTolerances,
    pub entries: Vec<Entry>,
    pub verdict: Verdict,
    pub timings_ms: BTreeMap<&'static str, f64>,
}

pub fn elapsed_ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

pub fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

impl Report {
    pub fn new(command: &str, tolerances: ReportTolerances, entries: Vec<Entry>, started: Instant) -> Self {
        let verdict = Verdict::from_bool(entries.iter().all(|e| e.verdict == Verdict::Pass));
        let mut timings_ms = BTreeMap::new();
        timings_ms.insert("total", elapsed_ms(started));
        Self {
            version: REPORT_VERSION,
            tool: Tool {
                name: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
            },
            command: command.into(),
            tolerances,
            entries,
            verdict,
            timings_ms,
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let value = serde_json::to_value(self).map_err(|e| CliError::input(e.to_string()))?;
        // serde_json writes non-finite floats as null. Outside the recorded
        // inputs every optional field is skipped, so any null is a non-finite number.
        if let Some(path) = find_null(&value, String::new()) {
            return Err(CliError {
                code: 1,
                message: format!("report field {path} is not finite"),
            });
        }
        serde_json::to_string_pretty(self).map_err(|e| CliError::input(e.to_string()))
    }

    pub fn table(&self) -> String {
        let mut keys: Vec<&'static str> = Vec::new();
        for e in &self.entries {
            for (k, _) in &e.summary {
                if !keys.contains(k) {
                    keys.push(k);
                }
            }
        }
        let mut header = vec!["instance".to_string()];
        header.extend(keys.iter().map(|k| k.to_string()));
        header.push("verdict".into());
        let mut rows = vec![header];
        for e in &self.entries {
            let mut row = vec![e.label.clone()];
            for k in &keys {
                let cell = e.summary.iter().find(|(key, _)| key == k).map(|(_, v)| v.clone());
                row.push(cell.unwrap_or_else(|| "-".into()));
            }
            row.push(format!("{:?}", e.verdict).to_lowercase());
            rows.push(row);
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &rows {
            let cells: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        for e in &self.entries {
            if let Some(m) = &e.message {
                out.push_str(&format!("{}: {m}\n", e.label));
            }
        }
        out.push_str(&format!(
            "{} {}, residual tol {:e}, rank tol {:e}, {:.1} ms\n",
            self.entries.len(),
            if self.entries.len() == 1 { "entry" } else { "entries" },
            self.tolerances.residual,
            self.tolerances.rank,
            self.timings_ms["total"]
        ));
        out.push_str(&format!("verdict: {:?}\n", self.verdict).to_lowercase());
        out
    }

    /// Writes the JSON document and the table. Without `--out` the document
    /// goes to standard output and the table to standard error.
    pub fn emit(&self, common: &Common) -> Result<bool, CliError> {
        let json = self.to_json()?;
        match &common.out {
            Some(path) => {
                std::fs::write(path, json + "\n").map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
                if !common.quiet {
                    print!("{}", self.table());
                }
            }
            None => {
                if !common.quiet {
                    eprint!("{}", self.table());
                }
                println!("{json}");
            }
        }
        Ok(self.verdict == Verdict::Pass)
    }
}

fn find_null(v: &Value, path: String) -> Option<String> {
    match v {
        Value::Null => Some(if path.is_empty() { "<root>".into() } else { path }),
        Value::Array(items) => items.iter().enumerate().find_map(|(i, x)| find_null(x, format!("{path}[{i}]"))),
        Value::Object(map) => map
            .iter()
            .filter(|(k, _)| k.as_str() != "input")
            .find_map(|(k, x)| find_null(x, format!("{path}.{k}"))),
        _ => None,
    }
}
