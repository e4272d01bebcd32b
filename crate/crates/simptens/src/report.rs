//! Validation reports: a list of violations rather than a bare boolean, so
//! callers can show what failed and tests can assert on specific kinds.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Stable machine-readable kind, e.g. "divisibility" or "collapse-linearity".
    pub kind: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, kind: &str, detail: impl Into<String>) {
        self.violations.push(Violation {
            kind: kind.to_string(),
            detail: detail.into(),
        });
    }

    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_kind(&self, kind: &str) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    /// First violation formatted for error messages, or "ok".
    pub fn summary(&self) -> String {
        match self.violations.first() {
            None => "ok".to_string(),
            Some(v) => format!("{} ({} violations total)", v, self.violations.len()),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.kind, self.detail)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            writeln!(f, "valid")?;
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
        }
        Ok(())
    }
}
