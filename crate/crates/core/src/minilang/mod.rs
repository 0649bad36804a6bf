//! MiniLang frontend: a small Java-like language used to produce fact records.

pub mod ast;
mod extract;
mod lexer;
mod parser;

use std::fmt;

pub use extract::extract_facts;
pub use parser::parse;

use crate::source_model::FactRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub pos: Pos,
    pub message: String,
    /// Source file index for diagnostics produced by extraction.
    pub file: Option<usize>,
}

impl Diagnostic {
    pub fn error(pos: Pos, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, pos, message: message.into(), file: None }
    }

    pub fn warning(pos: Pos, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, pos, message: message.into(), file: None }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {sev}: {}", self.pos, self.message)
    }
}

/// Parses and extracts a set of named sources. Returns the first file's
/// syntax errors (tagged with the file index) if any source fails to parse.
pub fn extract_sources(sources: &[(String, String)]) -> Result<(Vec<FactRecord>, Vec<Diagnostic>), Vec<Diagnostic>> {
    let mut units = Vec::with_capacity(sources.len());
    for (i, (_, text)) in sources.iter().enumerate() {
        match parse(text) {
            Ok(u) => units.push(u),
            Err(errs) => {
                return Err(errs.into_iter().map(|d| Diagnostic { file: Some(i), ..d }).collect());
            }
        }
    }
    Ok(extract_facts(&units))
}
