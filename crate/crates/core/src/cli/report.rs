//! Text and structured renderings of a run.
//!
//! The structured form is JSON with object keys in sorted order, two-space
//! indentation and every floating-point value written with 17 significant
//! digits, so identical runs give identical bytes. Non-finite values are
//! written as the strings `"inf"`, `"-inf"` and `"nan"`.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use super::config::RunConfig;
use crate::residual::{ResidualSummary, Status};

pub const ENGINE_NAME: &str = env!("CARGO_PKG_NAME");
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct Report {
    pub config: RunConfig,
    /// Sorted by check id.
    pub checks: Vec<ResidualSummary>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
}

impl Report {
    pub fn counts(&self) -> Counts {
        let mut c = Counts::default();
        for s in &self.checks {
            match s.status {
                Status::Pass => c.pass += 1,
                Status::Fail => c.fail += 1,
                Status::Skipped => c.skipped += 1,
            }
        }
        c
    }

    pub fn passed(&self) -> bool {
        self.counts().fail == 0
    }

    /// 0 when nothing failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn find(&self, check_id: &str) -> Option<&ResidualSummary> {
        self.checks.iter().find(|s| s.check_id == check_id)
    }

    pub fn to_value(&self) -> Value {
        let c = self.counts();
        let checks: Vec<Value> = self.checks.iter().map(summary_value).collect();
        json!({
            "engine": { "name": ENGINE_NAME, "version": ENGINE_VERSION },
            "run_config": serde_json::to_value(&self.config).unwrap_or(Value::Null),
            "checks": checks,
            "summary": { "pass": c.pass, "fail": c.fail, "skipped": c.skipped },
            "status": if c.fail == 0 { "pass" } else { "fail" },
        })
    }

    pub fn render_structured(&self) -> String {
        let mut out = String::new();
        write_value(&mut out, &self.to_value(), 0);
        out.push('\n');
        out
    }

    pub fn render_text(&self) -> String {
        let cfg = &self.config;
        let mut out = String::new();
        let _ = writeln!(out, "{ENGINE_NAME} {ENGINE_VERSION}");
        let _ = writeln!(out, "spec: {}", cfg.spec_path.display());
        let checks: Vec<&str> = cfg.checks.iter().map(|g| g.name()).collect();
        let _ = writeln!(out, "checks: {}", checks.join(","));
        let _ = writeln!(
            out,
            "points: {}  seed: {}  tolerance: {:e}  formula: {}",
            cfg.points,
            cfg.seed,
            cfg.tolerance,
            serde_json::to_value(cfg.formula)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default()
        );
        out.push('\n');
        let width = self
            .checks
            .iter()
            .map(|s| s.check_id.len())
            .max()
            .unwrap_or(0);
        for s in &self.checks {
            let status = s.status.as_str().to_ascii_uppercase();
            if s.status == Status::Skipped {
                let _ = writeln!(out, "{status:<7} {}", s.check_id);
            } else {
                let _ = writeln!(
                    out,
                    "{status:<7} {:<width$}  max {:.3e}  tol {:.1e}  points {}",
                    s.check_id, s.max_abs_residual, s.tolerance, s.points
                );
            }
            for n in &s.notes {
                let _ = writeln!(out, "        {n}");
            }
        }
        let c = self.counts();
        let _ = writeln!(
            out,
            "\n{} passed, {} failed, {} skipped",
            c.pass, c.fail, c.skipped
        );
        out
    }
}

fn real(v: f64) -> Value {
    if v.is_finite() {
        Value::from(v)
    } else if v.is_nan() {
        Value::from("nan")
    } else if v > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

fn summary_value(s: &ResidualSummary) -> Value {
    json!({
        "check_id": s.check_id,
        "status": s.status.as_str(),
        "max_abs_residual": real(s.max_abs_residual),
        "worst_point": s.worst_point.iter().copied().map(real).collect::<Vec<_>>(),
        "points": s.points,
        "tolerance": real(s.tolerance),
        "notes": s.notes,
    })
}

/// Formats a float with 17 significant digits.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_value(out: &mut String, v: &Value, level: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => out.push_str(&format_real(x)),
            _ => out.push_str(&n.to_string()),
        },
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                indent(out, level + 1);
                write_value(out, item, level + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            indent(out, level);
            out.push(']');
        }
        Value::Object(map) => write_object(out, map, level),
    }
}

fn write_object(out: &mut String, map: &Map<String, Value>, level: usize) {
    if map.is_empty() {
        out.push_str("{}");
        return;
    }
    let mut keys: Vec<&String> = map.keys().collect();
    keys.sort();
    out.push_str("{\n");
    for (i, k) in keys.iter().enumerate() {
        indent(out, level + 1);
        out.push_str(&Value::String((*k).clone()).to_string());
        out.push_str(": ");
        write_value(out, &map[k.as_str()], level + 1);
        out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
    }
    indent(out, level);
    out.push('}');
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_have_seventeen_significant_digits() {
        assert_eq!(format_real(0.1), "1.0000000000000001e-1");
        assert_eq!(format_real(-2.0), "-2.0000000000000000e0");
        let parsed: f64 = format_real(std::f64::consts::PI).parse().unwrap();
        assert_eq!(parsed, std::f64::consts::PI);
    }

    #[test]
    fn objects_are_written_with_sorted_keys() {
        let mut out = String::new();
        write_value(&mut out, &json!({"b": 1, "a": [0.5, "x"], "c": {}}), 0);
        assert_eq!(out, "{\n  \"a\": [\n    5.0000000000000000e-1,\n    \"x\"\n  ],\n  \"b\": 1,\n  \"c\": {}\n}");
        let back: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(back["a"][0], json!(0.5));
    }

    #[test]
    fn non_finite_values_become_strings() {
        assert_eq!(real(f64::INFINITY), json!("inf"));
        assert_eq!(real(f64::NAN), json!("nan"));
        assert_eq!(real(1.5), json!(1.5));
    }
}
