//! JSON envelopes, CSV tables and the Markdown summary.

use std::collections::BTreeMap;
use std::path::Path;

use frac_talenti::talenti::claims;
use frac_talenti::VerificationReport;
use serde_json::{json, Value};

use crate::{CliError, RunConfig, SCHEMA_VERSION};

/// Column order of every verification CSV.
pub const REPORT_COLUMNS: [&str; 9] = [
    "claim",
    "N",
    "s",
    "normalization",
    "lhs",
    "rhs",
    "margin",
    "tol",
    "pass",
];

/// A header plus string rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn from_reports(reports: &[VerificationReport]) -> Self {
        let mut t = Table::new(&REPORT_COLUMNS);
        for r in reports {
            t.push(vec![
                r.claim.clone(),
                r.metadata.get("N").cloned().unwrap_or_default(),
                r.metadata.get("s").cloned().unwrap_or_default(),
                r.normalization.as_str().to_string(),
                r.lhs.to_string(),
                r.rhs.to_string(),
                r.margin.to_string(),
                r.tolerance.to_string(),
                r.pass.to_string(),
            ]);
        }
        t
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let io = |e: csv::Error| CliError::Output(format!("{}: {e}", path.display()));
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)
            .map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }
}

/// Standard envelope: schema version, command, the effective configuration,
/// the reports and any command-specific data.
pub fn envelope(
    command: &str,
    claim: Option<&str>,
    config: &RunConfig,
    reports: &[VerificationReport],
    data: Value,
) -> Value {
    let passed = reports.iter().filter(|r| r.pass).count();
    json!({
        "schema": SCHEMA_VERSION,
        "command": command,
        "claim": claim,
        "config": config,
        "reports": reports,
        "summary": {
            "total": reports.len(),
            "passed": passed,
            "failed": reports.len() - passed,
        },
        "data": data,
    })
}

/// Pretty JSON followed by a newline, to `path` or stdout.
pub fn emit_json(value: &Value, path: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    emit_text(&text, path)
}

pub fn emit_text(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io {
            path: p.display().to_string(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

const SECTIONS: [(&str, &str); 11] = [
    (claims::CALIBRATION, "Calibration against the torsion function"),
    (
        claims::REVERSE_BOUNDARY,
        "Reverse boundary Talenti inequality, radial sources, 0 < s < 1",
    ),
    (claims::CROSSING, "Interior crossing near the boundary"),
    (
        claims::BUMP_BOUNDARY,
        "Boundary Talenti inequality for off-centre bumps, 0 < s < 1",
    ),
    (
        claims::GREEN_BOUNDARY,
        "Boundary Talenti inequality for the Green function",
    ),
    (claims::S_GREATER_ONE, "Radial sources with s > 1"),
    (claims::HIGHER_ORDER_BUMP, "Off-centre bumps with 1 < s <= N"),
    (claims::MASS_CONCENTRATION, "Mass concentration"),
    (claims::CLASSICAL_EQUALITY, "Classical case s = 1"),
    (claims::SHARPNESS, "Sharp lower bound"),
    ("exploratory.bump", "Exploratory bump comparisons (no verdict)"),
];

/// Markdown summary of the reports contained in several envelopes, grouped
/// by claim in a fixed order.
pub fn markdown_summary(sources: &[(String, Value)]) -> Result<String, CliError> {
    let mut by_claim: BTreeMap<String, Vec<(String, VerificationReport)>> = BTreeMap::new();
    for (name, v) in sources {
        if v.get("schema").and_then(Value::as_u64) != Some(u64::from(SCHEMA_VERSION)) {
            return Err(CliError::Config(vec![format!(
                "{name}: not a schema {SCHEMA_VERSION} report"
            )]));
        }
        let reports: Vec<VerificationReport> = serde_json::from_value(v.get("reports").cloned().unwrap_or(Value::Null))
            .map_err(|e| CliError::Config(vec![format!("{name}: {e}")]))?;
        for r in reports {
            by_claim.entry(r.claim.clone()).or_default().push((name.clone(), r));
        }
    }
    let total: usize = by_claim.values().map(Vec::len).sum();
    let passed: usize = by_claim.values().flatten().filter(|(_, r)| r.pass).count();
    let mut md = String::from("# frac-talenti verification summary\n\n");
    md.push_str(&format!(
        "{passed} of {total} checks pass across {} file(s).\n",
        sources.len()
    ));
    let mut order: Vec<(String, String)> = SECTIONS.iter().map(|(c, t)| (c.to_string(), t.to_string())).collect();
    for claim in by_claim.keys() {
        if !order.iter().any(|(c, _)| c == claim) {
            order.push((claim.clone(), claim.clone()));
        }
    }
    for (claim, title) in order {
        let Some(rows) = by_claim.get(&claim) else { continue };
        md.push_str(&format!("\n## {title}\n\n`{claim}`\n\n"));
        md.push_str("| source | N | s | normalization | lhs | rhs | margin | pass |\n");
        md.push_str("|---|---|---|---|---|---|---|---|\n");
        for (name, r) in rows {
            md.push_str(&format!(
                "| {} | {} | {} | {} | {:.10e} | {:.10e} | {:.3e} | {} |\n",
                name,
                r.metadata.get("N").map_or("", String::as_str),
                r.metadata.get("s").map_or("", String::as_str),
                r.normalization.as_str(),
                r.lhs,
                r.rhs,
                r.margin,
                if r.pass { "yes" } else { "no" },
            ));
        }
    }
    Ok(md)
}

#[cfg(test)]
mod tests {
    use super::*;
    use frac_talenti::ProblemParams;

    fn report(pass: bool) -> VerificationReport {
        let p = ProblemParams::new(1, 0.5).unwrap();
        let mut r = VerificationReport::new(claims::REVERSE_BOUNDARY, &p, 1.0, 2.0, 1e-7);
        r.pass = pass;
        r
    }

    #[test]
    fn report_table_has_fixed_columns() {
        let t = Table::from_reports(&[report(true)]);
        assert_eq!(t.header, REPORT_COLUMNS);
        assert_eq!(t.rows[0][0], claims::REVERSE_BOUNDARY);
        assert_eq!(t.rows[0][1], "1");
        assert_eq!(t.rows[0][3], "DeltaLimit");
        assert_eq!(t.rows[0][6], "1");
        assert_eq!(t.rows[0][8], "true");
    }

    #[test]
    fn csv_uses_lf_line_endings() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        Table::from_reports(&[report(true), report(false)])
            .write(&path)
            .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("claim,N,s,normalization,lhs,rhs,margin,tol,pass\n"));
    }

    #[test]
    fn envelope_counts_passes() {
        let v = envelope(
            "verify",
            Some("thm1"),
            &RunConfig::default(),
            &[report(true), report(false)],
            Value::Null,
        );
        assert_eq!(v["schema"], 1);
        assert_eq!(v["summary"]["passed"], 1);
        assert_eq!(v["summary"]["failed"], 1);
    }

    #[test]
    fn markdown_groups_by_claim() {
        let v = envelope(
            "verify",
            Some("thm1"),
            &RunConfig::default(),
            &[report(true)],
            Value::Null,
        );
        let md = markdown_summary(&[("a.json".into(), v)]).unwrap();
        assert!(md.contains("1 of 1 checks pass"));
        assert!(md.contains("## Reverse boundary Talenti inequality"));
        assert!(md.contains("| a.json | 1 | 0.5 | DeltaLimit |"));
    }

    #[test]
    fn markdown_rejects_foreign_json() {
        let err = markdown_summary(&[("x.json".into(), json!({"schema": 7}))]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
