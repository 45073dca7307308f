//! Report bundles: the machine-readable output of every run.
//!
//! The bundle is deterministic given (plan, seed) except for the timestamp,
//! which is isolated in its own trailing field so consumers can strip it
//! before byte comparison.

use serde::Serialize;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// One named check with its outcome and measured values.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub details: serde_json::Value,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, pass: bool, details: serde_json::Value) -> Self {
        CheckResult { name: name.into(), pass, details }
    }
}

/// The full output of one run.
#[derive(Clone, Debug, Serialize)]
pub struct ReportBundle {
    pub schema_version: u32,
    pub mode: String,
    pub plan_hash: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    /// Mode-specific payload: verdicts, tables, measured constants.
    pub data: serde_json::Value,
    /// True when a resource error cut the run short; the checks collected so
    /// far are still valid.
    pub incomplete: bool,
    /// Wall-clock of report creation; the only nondeterministic field.
    pub timestamp: String,
}

impl ReportBundle {
    pub fn new(mode: &str, plan_hash: String, seed: u64) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| format!("{}", d.as_secs()))
            .unwrap_or_else(|_| "0".into());
        ReportBundle {
            schema_version: SCHEMA_VERSION,
            mode: mode.to_string(),
            plan_hash,
            seed,
            checks: Vec::new(),
            data: serde_json::Value::Null,
            incomplete: false,
            timestamp,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }

    /// CSV rendering: a check table, then the data table when the payload
    /// carries pre-rendered `csv_lines`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name;pass;details\n");
        for c in &self.checks {
            let details = serde_json::to_string(&c.details).unwrap_or_default().replace(';', ",");
            out.push_str(&format!("{};{};{}\n", c.name, c.pass, details));
        }
        if let Some(lines) = self.data.get("csv_lines").and_then(|v| v.as_array()) {
            out.push('\n');
            for l in lines {
                if let Some(s) = l.as_str() {
                    out.push_str(s);
                    out.push('\n');
                }
            }
        }
        out
    }

    /// Writes the bundle to `<out>/report.<ext>`, or to stdout when no
    /// output directory was given.
    pub fn emit(&self, out: Option<&Path>, csv: bool) -> std::io::Result<()> {
        let (text, ext) =
            if csv { (self.to_csv(), "csv") } else { (self.to_json_pretty(), "json") };
        match out {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join(format!("report.{ext}")), text)
            }
            None => {
                println!("{text}");
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamp_is_the_only_varying_field() {
        let mut a = ReportBundle::new("classify", "abc".into(), 1);
        let mut b = ReportBundle::new("classify", "abc".into(), 1);
        a.checks.push(CheckResult::new("x", true, serde_json::json!({"v": 1})));
        b.checks.push(CheckResult::new("x", true, serde_json::json!({"v": 1})));
        a.timestamp = "0".into();
        b.timestamp = "0".into();
        assert_eq!(a.to_json_pretty(), b.to_json_pretty());
        let v: serde_json::Value = serde_json::from_str(&a.to_json_pretty()).unwrap();
        assert!(v.get("timestamp").is_some());
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
    }

    #[test]
    fn csv_renders_checks_and_data_lines() {
        let mut b = ReportBundle::new("enumerate", "h".into(), 0);
        b.checks.push(CheckResult::new("count", true, serde_json::json!(4)));
        b.data = serde_json::json!({"csv_lines": ["w;0;0.5;true"]});
        let csv = b.to_csv();
        assert!(csv.contains("count;true;4"));
        assert!(csv.contains("w;0;0.5;true"));
    }
}
