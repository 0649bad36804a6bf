//! The `facts.jsonl` wire format: one JSON record per line, discriminated by `k`.

use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

use super::{FactsError, Receiver, SourceModel, TypeKind, Visibility};

/// Version of the fact record schema, printed by `--version`.
pub const FACTS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "k", rename_all = "lowercase")]
pub enum FactRecord {
    Type(TypeRecord),
    Method(MethodRecord),
    Field(FieldRecord),
    Call(CallRecord),
}

impl FactRecord {
    pub fn id(&self) -> &str {
        match self {
            FactRecord::Type(r) => &r.id,
            FactRecord::Method(r) => &r.id,
            FactRecord::Field(r) => &r.id,
            FactRecord::Call(r) => &r.id,
        }
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn default_ret() -> String {
    "void".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeRecord {
    pub id: String,
    pub name: String,
    pub kind: TypeKind,
    #[serde(rename = "abstract", default)]
    pub is_abstract: bool,
    #[serde(default)]
    pub anon: bool,
    #[serde(default)]
    pub encl: Option<String>,
    #[serde(rename = "super", default)]
    pub supertypes: Vec<String>,
    /// Marks a type synthesized for unresolved references (no source available).
    #[serde(default, skip_serializing_if = "is_false")]
    pub ext: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRecord {
    pub id: String,
    pub owner: String,
    pub name: String,
    #[serde(default)]
    pub params: Vec<String>,
    #[serde(default = "default_ret")]
    pub ret: String,
    #[serde(default)]
    pub vis: Visibility,
    #[serde(rename = "static", default)]
    pub is_static: bool,
    #[serde(rename = "abstract", default)]
    pub is_abstract: bool,
    #[serde(default)]
    pub ctor: bool,
    #[serde(default)]
    pub throws: Vec<String>,
    #[serde(default)]
    pub stmts: u32,
    /// Exception types raised directly by `throw` statements in the body.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub raises: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRecord {
    pub id: String,
    pub owner: String,
    pub name: String,
    #[serde(rename = "type")]
    pub declared_type: String,
    #[serde(default)]
    pub vis: Visibility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallRecord {
    pub id: String,
    pub caller: String,
    pub target: String,
    pub recv: Receiver,
    pub ord: u32,
    #[serde(default)]
    pub pass: Vec<(usize, usize)>,
}

/// Parses a `facts.jsonl` stream. Blank lines are skipped; line numbers in
/// errors are 1-based.
pub fn read_records<R: BufRead>(reader: R) -> Result<Vec<(usize, FactRecord)>, FactsError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let record: FactRecord = serde_json::from_str(trimmed).map_err(|e| FactsError::Malformed {
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push((idx + 1, record));
    }
    Ok(out)
}

/// Reads a fact stream and builds a fully linked model.
pub fn load_facts<R: BufRead>(reader: R) -> Result<SourceModel, FactsError> {
    SourceModel::from_numbered_records(read_records(reader)?)
}

/// Writes records one per line.
pub fn write_records<W: Write>(mut out: W, records: &[FactRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn records_to_string(records: &[FactRecord]) -> String {
    let mut buf = Vec::new();
    write_records(&mut buf, records).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
