//! Structured check results shared by the library and the CLI.

use serde::Serialize;

/// Version of the structured output layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub theory: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residue: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    pub pass: bool,
    /// Number of terms left over after comparison or reduction.
    pub residual_dimension: usize,
}

impl CheckRecord {
    pub fn new(check: &str, theory: &str, pass: bool) -> Self {
        CheckRecord {
            check: check.to_string(),
            theory: theory.to_string(),
            residue: None,
            degree: None,
            subject: None,
            pass,
            residual_dimension: 0,
        }
    }

    pub fn residue(mut self, r: &str) -> Self {
        self.residue = Some(r.to_string());
        self
    }

    pub fn degree(mut self, d: u32) -> Self {
        self.degree = Some(d);
        self
    }

    pub fn subject(mut self, s: impl Into<String>) -> Self {
        self.subject = Some(s.into());
        self
    }

    pub fn residual(mut self, n: usize) -> Self {
        self.residual_dimension = n;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn new() -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, r: CheckRecord) {
        self.records.push(r);
    }

    pub fn extend(&mut self, other: Report) {
        self.records.extend(other.records);
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    /// One line per record, then a totals line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let mut line = format!("{} {}", if r.pass { "PASS" } else { "FAIL" }, r.check);
            if let Some(x) = &r.residue {
                line.push_str(&format!(" residue={x}"));
            }
            if let Some(d) = r.degree {
                line.push_str(&format!(" degree={d}"));
            }
            if let Some(s) = &r.subject {
                line.push_str(&format!(" {s}"));
            }
            if !r.pass {
                line.push_str(&format!(" residual={}", r.residual_dimension));
            }
            out.push_str(&line);
            out.push('\n');
        }
        let failed = self.failures().count();
        out.push_str(&format!(
            "{} checks, {} passed, {} failed\n",
            self.records.len(),
            self.records.len() - failed,
            failed
        ));
        out
    }
}
