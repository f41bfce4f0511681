//! Executable worked-example corpus.
//!
//! Each fixture is a directory `fixtures/<name>/` holding `cmd.txt` (the
//! command line, with `{problem}` standing for the fixture's input file),
//! `problem.json` (the input), and `expected.json`:
//!
//! ```json
//! {
//!   "exit": 0,
//!   "stdout_contains": ["\"best\": \"2/5\""],
//!   "stdout_json": { "payoff": "-3/5" }
//! }
//! ```
//!
//! `stdout_contains` entries are substring checks; `stdout_json` is matched
//! structurally as a subset of the parsed output (objects may have extra
//! keys in the actual output, arrays must match element by element).

use std::path::{Path, PathBuf};
use std::process::Command;

use serde::Deserialize;
use serde_json::Value;

#[derive(Debug, Deserialize)]
pub struct Expectation {
    #[serde(default)]
    pub exit: i32,
    #[serde(default)]
    pub stdout_contains: Vec<String>,
    #[serde(default)]
    pub stdout_json: Option<Value>,
}

#[derive(Debug)]
pub struct FixtureResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug)]
pub struct FixtureSummary {
    pub results: Vec<FixtureResult>,
}

impl FixtureSummary {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            out.push_str(&format!(
                "{} {}{}\n",
                if r.passed { "PASS" } else { "FAIL" },
                r.name,
                if r.passed { String::new() } else { format!("\n{}", r.detail) }
            ));
        }
        let passed = self.results.iter().filter(|r| r.passed).count();
        out.push_str(&format!("{passed}/{} fixtures passed\n", self.results.len()));
        out
    }
}

/// Whether `expected` matches `actual` as a structural subset.
pub fn json_subset(expected: &Value, actual: &Value) -> bool {
    match (expected, actual) {
        (Value::Object(e), Value::Object(a)) => {
            e.iter().all(|(k, v)| a.get(k).is_some_and(|av| json_subset(v, av)))
        }
        (Value::Array(e), Value::Array(a)) => {
            e.len() == a.len() && e.iter().zip(a).all(|(x, y)| json_subset(x, y))
        }
        _ => expected == actual,
    }
}

fn run_one(binary: &Path, dir: &Path) -> FixtureResult {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());
    let fail = |detail: String| FixtureResult { name: name.clone(), passed: false, detail };

    let cmd_text = match std::fs::read_to_string(dir.join("cmd.txt")) {
        Ok(text) => text,
        Err(e) => return fail(format!("  cannot read cmd.txt: {e}")),
    };
    let expected: Expectation =
        match std::fs::read_to_string(dir.join("expected.json"))
            .map_err(|e| e.to_string())
            .and_then(|text| serde_json::from_str(&text).map_err(|e| e.to_string()))
        {
            Ok(v) => v,
            Err(e) => return fail(format!("  cannot read expected.json: {e}")),
        };

    let problem = dir.join("problem.json");
    let args: Vec<String> = cmd_text
        .split_whitespace()
        .map(|a| a.replace("{problem}", &problem.display().to_string()))
        .collect();

    let output = match Command::new(binary).args(&args).output() {
        Ok(output) => output,
        Err(e) => return fail(format!("  cannot run {}: {e}", binary.display())),
    };
    let stdout = String::from_utf8_lossy(&output.stdout).into_owned();
    let stderr = String::from_utf8_lossy(&output.stderr).into_owned();
    let code = output.status.code().unwrap_or(-1);

    let mut problems = Vec::new();
    if code != expected.exit {
        problems.push(format!("  exit {code}, expected {}", expected.exit));
    }
    for fragment in &expected.stdout_contains {
        if !stdout.contains(fragment) {
            problems.push(format!("  stdout missing fragment: {fragment}"));
        }
    }
    if let Some(expected_json) = &expected.stdout_json {
        match serde_json::from_str::<Value>(&stdout) {
            Ok(actual) => {
                if !json_subset(expected_json, &actual) {
                    problems.push(format!(
                        "  stdout json mismatch\n  expected subset: {expected_json}\n  actual: {actual}"
                    ));
                }
            }
            Err(e) => problems.push(format!("  stdout is not json: {e}")),
        }
    }
    if problems.is_empty() {
        FixtureResult { name, passed: true, detail: String::new() }
    } else {
        if !stderr.is_empty() {
            problems.push(format!("  stderr: {}", stderr.trim_end()));
        }
        if !stdout.is_empty() && expected.stdout_json.is_none() {
            problems.push(format!("  stdout: {}", stdout.trim_end()));
        }
        fail(problems.join("\n"))
    }
}

/// Runs every fixture under `dir` (or just `name`) against `binary`.
pub fn run_fixtures(binary: &Path, dir: &Path, name: Option<&str>) -> Result<FixtureSummary, String> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| format!("cannot read fixture dir {}: {e}", dir.display()))?
        .filter_map(|entry| entry.ok())
        .map(|entry| entry.path())
        .filter(|path| path.is_dir())
        .collect();
    dirs.sort();
    if let Some(name) = name {
        dirs.retain(|d| d.file_name().is_some_and(|n| n == name));
        if dirs.is_empty() {
            return Err(format!("no fixture named {name}"));
        }
    }
    if dirs.is_empty() {
        return Err(format!("no fixtures under {}", dir.display()));
    }
    Ok(FixtureSummary { results: dirs.iter().map(|d| run_one(binary, d)).collect() })
}
