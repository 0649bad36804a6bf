//! Bundled MiniLang fixtures modelled on the JHotDraw command and undo code.

use crate::minilang::{extract_sources, Diagnostic};
use crate::source_model::{FactRecord, SourceModel};

/// `(file name, source)` for every bundled fixture.
pub const FILES: &[(&str, &str)] = &[
    ("consistency.mlang", include_str!("../corpus/consistency.mlang")),
    ("decorator.mlang", include_str!("../corpus/decorator.mlang")),
    ("notify.mlang", include_str!("../corpus/notify.mlang")),
    ("progress.mlang", include_str!("../corpus/progress.mlang")),
    ("storage.mlang", include_str!("../corpus/storage.mlang")),
    ("undo.mlang", include_str!("../corpus/undo.mlang")),
];

/// Concern model documenting the fixtures, with names qualified by package.
pub const DEMO_CONCERNS: &str = include_str!("../corpus/concerns.json");

pub fn source(name: &str) -> Option<&'static str> {
    let file = if name.ends_with(".mlang") { name.to_string() } else { format!("{name}.mlang") };
    FILES.iter().find(|(n, _)| *n == file).map(|(_, s)| *s)
}

/// Facts for the named fixtures (all of them when `names` is empty).
pub fn records(names: &[&str]) -> Result<Vec<FactRecord>, Vec<Diagnostic>> {
    let picked: Vec<(String, String)> = FILES
        .iter()
        .filter(|(n, _)| names.is_empty() || names.iter().any(|w| n.trim_end_matches(".mlang") == w.trim_end_matches(".mlang")))
        .map(|(n, s)| (n.to_string(), s.to_string()))
        .collect();
    extract_sources(&picked).map(|(records, _)| records)
}

/// Model of one fixture, e.g. `model("notify")`.
///
/// # Panics
/// If the fixture does not exist or fails to load; the bundled ones never do.
pub fn model(name: &str) -> SourceModel {
    assert!(source(name).is_some(), "no bundled fixture `{name}`");
    let records = records(&[name]).unwrap_or_else(|d| panic!("fixture `{name}` does not parse: {d:?}"));
    SourceModel::from_records(records).expect("bundled fixture facts are consistent")
}

/// Model of all fixtures together.
pub fn full_model() -> SourceModel {
    SourceModel::from_records(records(&[]).expect("bundled fixtures parse")).expect("bundled facts are consistent")
}
