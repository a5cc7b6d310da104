//! Command output shared by the human and machine formats.

use std::fmt::Write as _;

use clap::ValueEnum;

/// Output format selected with `--format`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Human,
    Machine,
}

#[derive(Debug, Clone, PartialEq)]
enum Entry {
    Field(String, String),
    Block(String, Vec<String>),
}

/// Ordered fields and line blocks. Block lines are already `key=value` formatted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    entries: Vec<Entry>,
    /// False when a verification check failed.
    pub passed: bool,
}

impl Report {
    pub fn new() -> Self {
        Self {
            entries: Vec::new(),
            passed: true,
        }
    }

    pub fn field(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push(Entry::Field(key.to_string(), value.to_string()));
        self
    }

    pub fn block(&mut self, title: &str, lines: impl IntoIterator<Item = String>) -> &mut Self {
        self.entries.push(Entry::Block(title.to_string(), lines.into_iter().collect()));
        self
    }

    /// Records a pass/fail check as `check.<name>=pass|fail`.
    pub fn check(&mut self, name: &str, ok: bool) -> &mut Self {
        self.passed &= ok;
        self.field(&format!("check.{name}"), if ok { "pass" } else { "fail" })
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        for e in &self.entries {
            match (e, format) {
                (Entry::Field(k, v), Format::Machine) => {
                    let _ = writeln!(out, "{k}={v}");
                }
                (Entry::Field(k, v), Format::Human) => {
                    let _ = writeln!(out, "{:<24} {v}", format!("{}:", k.replace('_', " ")));
                }
                (Entry::Block(_, lines), Format::Machine) => {
                    for l in lines {
                        let _ = writeln!(out, "{l}");
                    }
                }
                (Entry::Block(title, lines), Format::Human) => {
                    let _ = writeln!(out, "{title}:");
                    for l in lines {
                        let _ = writeln!(out, "  {l}");
                    }
                }
            }
        }
        let verdict = if self.passed { "pass" } else { "fail" };
        match format {
            Format::Machine => {
                let _ = writeln!(out, "verdict={verdict}");
            }
            Format::Human => {
                let _ = writeln!(out, "{:<24} {verdict}", "verdict:");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_share_content() {
        let mut r = Report::new();
        r.field("depth", 13).block("steps", vec!["step=1 rotations=G(0,7)".to_string()]);
        r.check("reconstruction", false);
        let m = r.render(Format::Machine);
        assert_eq!(m, "depth=13\nstep=1 rotations=G(0,7)\ncheck.reconstruction=fail\nverdict=fail\n");
        let h = r.render(Format::Human);
        assert!(h.contains("depth:") && h.contains("13") && h.contains("  step=1 rotations=G(0,7)"));
        assert!(!r.passed);
    }
}
