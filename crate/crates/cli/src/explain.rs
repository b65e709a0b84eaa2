//! Human-readable table of a certificate.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

use crate::certificate::CertificateDocument;
use crate::CliError;

pub fn parse(text: &str) -> Result<CertificateDocument, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        offset: crate::error_offset(text, &e),
        message: e.to_string(),
    })
}

pub fn load(path: &Path) -> Result<CertificateDocument, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn render(doc: &CertificateDocument) -> String {
    let mut out = String::new();
    let failed = doc.suites.iter().flat_map(|s| &s.checks).filter(|c| !c.passed).count();
    let _ = writeln!(
        out,
        "certificate {} (toolkit {}, mode {}, seed {})",
        doc.schema,
        doc.toolkit_version,
        doc.config.mode,
        doc.config.seed.map_or("none".into(), |s| s.to_string())
    );
    for suite in &doc.suites {
        let _ = writeln!(out, "\n[{}] {}", suite.name, if suite.passed { "pass" } else { "FAIL" });
        for c in &suite.checks {
            let _ = writeln!(out, "  {:<4} {}", if c.passed { "ok" } else { "FAIL" }, c.id);
            let _ = writeln!(out, "       checks:   {}", c.statement);
            let _ = writeln!(out, "       observed: {}", c.observed);
            if let Some(m) = &c.margin {
                let _ = writeln!(out, "       margin:   {m}");
            }
        }
        if let Some(Value::Array(verdicts)) = suite.data.get("verdicts") {
            for v in verdicts.iter().filter(|v| v["outcome"] == "violated") {
                let _ = writeln!(
                    out,
                    "  violated verdict: k0 = {}, k = {}, j = {}, floor = {}",
                    v["k0"],
                    v["k"],
                    v["j"],
                    scalar_text(&v["floor"])
                );
            }
        }
    }
    let _ = writeln!(
        out,
        "\nverdict: {} ({failed} violations)",
        if doc.passed() { "pass" } else { "fail" }
    );
    out
}

/// `{"num": 8, "den": 1}` as `8`, `{"num": 1, "den": 4}` as `1/4`, floats as-is.
fn scalar_text(v: &Value) -> String {
    match (v.get("num"), v.get("den")) {
        (Some(n), Some(d)) if d == 1 => n.to_string().trim_matches('"').to_string(),
        (Some(n), Some(d)) => format!("{}/{}", n.to_string().trim_matches('"'), d.to_string().trim_matches('"')),
        _ => v.to_string(),
    }
}

pub fn explain(path: &Path) -> Result<String, CliError> {
    Ok(render(&load(path)?))
}
