//! Check results, the plain-text report and CSV tables.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    /// Spec, glue or curve the check ran on.
    pub subject: String,
    pub passed: bool,
    pub detail: String,
    pub witness: Option<String>,
}

impl Check {
    /// Passes when `value <= tol` (NaN fails).
    pub fn bound(name: &str, subject: &str, value: f64, tol: f64) -> Self {
        let passed = value <= tol;
        Check {
            name: name.into(),
            subject: subject.into(),
            passed,
            detail: format!("max {value:.3e} (tol {tol:.1e})"),
            witness: None,
        }
    }

    pub fn flag(name: &str, subject: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            subject: subject.into(),
            passed,
            detail: detail.into(),
            witness: None,
        }
    }

    pub fn with_witness(mut self, witness: Option<String>) -> Self {
        if !self.passed {
            self.witness = witness;
        }
        self
    }

    pub fn status(&self) -> &'static str {
        if self.passed {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: impl Into<String>, header: &[&str]) -> Self {
        Table {
            file: file.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_header(file: impl Into<String>, header: Vec<String>) -> Self {
        Table {
            file: file.into(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push_numbers(&mut self, values: &[f64]) {
        self.rows.push(values.iter().map(|v| num(*v)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path) -> io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(dir.join(&self.file))?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()
    }
}

/// Fixed-format number for CSV cells.
pub fn num(v: f64) -> String {
    format!("{v:.12e}")
}

/// Everything a scenario produced.
#[derive(Debug, Clone, Default)]
pub struct Section {
    pub scenario: String,
    pub lines: Vec<String>,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
}

impl Section {
    pub fn new(scenario: &str) -> Self {
        Section {
            scenario: scenario.into(),
            ..Default::default()
        }
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    pub sections: Vec<Section>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.sections.iter().all(Section::passed)
    }

    pub fn checks(&self) -> impl Iterator<Item = (&Section, &Check)> {
        self.sections
            .iter()
            .flat_map(|s| s.checks.iter().map(move |c| (s, c)))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "conullity report: scenario = {}, seed = {}",
            self.scenario, self.seed
        );
        for s in &self.sections {
            let _ = writeln!(out, "\n== {} ==", s.scenario);
            for l in &s.lines {
                let _ = writeln!(out, "{l}");
            }
            for c in &s.checks {
                let _ = writeln!(
                    out,
                    "{} {} [{}]: {}",
                    c.status(),
                    c.name,
                    c.subject,
                    c.detail
                );
            }
        }
        let total = self.checks().count();
        let failed: Vec<_> = self.checks().filter(|(_, c)| !c.passed).collect();
        let _ = writeln!(
            out,
            "\nsummary: {} checks, {} PASS, {} FAIL",
            total,
            total - failed.len(),
            failed.len()
        );
        if !failed.is_empty() {
            let _ = writeln!(out, "witnesses:");
            for (s, c) in failed {
                let w = c.witness.as_deref().unwrap_or(&c.detail);
                let _ = writeln!(out, "  {}/{} [{}]: {}", s.scenario, c.name, c.subject, w);
            }
        }
        out
    }

    pub fn write(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.txt"), self.render())?;
        for s in &self.sections {
            for t in &s.tables {
                t.write(dir)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_rejects_nan() {
        assert!(Check::bound("a", "s", 1e-9, 1e-8).passed);
        assert!(!Check::bound("a", "s", f64::NAN, 1e-8).passed);
        assert!(!Check::bound("a", "s", 1e-7, 1e-8).passed);
    }

    #[test]
    fn witness_only_kept_on_failure() {
        let c = Check::flag("a", "s", true, "ok").with_witness(Some("w".into()));
        assert!(c.witness.is_none());
        let c = Check::flag("a", "s", false, "bad").with_witness(Some("w".into()));
        assert_eq!(c.witness.as_deref(), Some("w"));
    }

    #[test]
    fn render_lists_failures() {
        let mut s = Section::new("demo");
        s.check(Check::flag("good", "x", true, "fine"));
        s.check(Check::flag("bad", "x", false, "off").with_witness(Some("at x = 1".into())));
        let r = Report {
            scenario: "demo".into(),
            seed: 1,
            sections: vec![s],
        };
        let text = r.render();
        assert!(text.contains("PASS good [x]: fine"));
        assert!(text.contains("summary: 2 checks, 1 PASS, 1 FAIL"));
        assert!(text.contains("demo/bad [x]: at x = 1"));
        assert!(!r.passed());
    }

    #[test]
    fn tables_use_lf() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("t.csv", &["a", "b"]);
        t.push_numbers(&[1.0, -0.5]);
        t.write(dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert_eq!(text, "a,b\n1.000000000000e0,-5.000000000000e-1\n");
    }
}
