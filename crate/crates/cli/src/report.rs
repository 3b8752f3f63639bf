//! The versioned JSON envelope every command emits.

use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA: &str = "serieslab.report/1";

const TIMING_KEYS: [&str; 3] = ["wall_ms", "wall_us", "elapsed_ms"];

#[derive(Debug)]
pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    /// Ids (with prime or stage where relevant) of every failed check.
    pub failures: Vec<String>,
    pub results: Vec<Value>,
    /// One line per result for the text view.
    pub lines: Vec<String>,
}

impl Report {
    pub fn new(command: &'static str, config: Value) -> Self {
        Report { command, config, passed: 0, failed: 0, skipped: 0, failures: vec![], results: vec![], lines: vec![] }
    }

    pub fn push(&mut self, item: impl Serialize, pass: Option<bool>, failure: impl FnOnce() -> String, line: String) {
        match pass {
            Some(true) => self.passed += 1,
            Some(false) => {
                self.failed += 1;
                self.failures.push(failure());
            }
            None => self.skipped += 1,
        }
        self.results.push(serde_json::to_value(item).unwrap_or(Value::Null));
        self.lines.push(line);
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self, timing: bool) -> Value {
        let mut v = json!({
            "schema": SCHEMA,
            "command": self.command,
            "config": self.config,
            "summary": {"passed": self.passed, "failed": self.failed, "skipped": self.skipped, "ok": self.ok()},
            "failures": self.failures,
            "results": self.results,
        });
        if !timing {
            strip_timing(&mut v);
        }
        v
    }

    pub fn to_text(&self) -> String {
        let mut out = self.lines.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&format!(
            "{}: {} passed, {} failed, {} skipped\n",
            self.command, self.passed, self.failed, self.skipped
        ));
        for f in &self.failures {
            out.push_str(&format!("  FAILED {f}\n"));
        }
        out
    }
}

fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(m) => {
            for k in TIMING_KEYS {
                m.remove(k);
            }
            m.values_mut().for_each(strip_timing);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timing_is_stripped_everywhere() {
        let mut r = Report::new("x", json!({}));
        r.push(json!({"id": "a", "wall_ms": 3, "inner": [{"wall_us": 1}]}), Some(true), String::new, "a".into());
        let s = r.to_json(false).to_string();
        assert!(!s.contains("wall_"), "{s}");
        assert!(r.to_json(true).to_string().contains("wall_ms"));
    }
}
