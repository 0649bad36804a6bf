//! Idiom-driven aspect mining: fan-in, grouped calls and redirection layers.

mod grouped;
mod redirect;

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

use crate::ids::{natural_cmp, FieldId, MethodId, TypeId};
use crate::queries::SortKind;
use crate::source_model::{DispatchPolicy, MethodDecl, SourceModel};

pub use grouped::grouped_calls_analysis;
pub use redirect::find_redirectors;

#[derive(Debug, Error, PartialEq)]
pub enum MiningError {
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("invalid mining configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningConfig {
    pub fanin_threshold: usize,
    pub accessor_filter: bool,
    /// Glob patterns (`*` wildcard) matched against method names and
    /// `Owner.name` signatures.
    pub utility_names: Vec<String>,
    pub grouped_min_callers: usize,
    pub grouped_min_group: usize,
    pub redirect_coverage: f64,
    pub redirect_min_methods: usize,
    pub policy: DispatchPolicy,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            fanin_threshold: 10,
            accessor_filter: true,
            utility_names: Vec::new(),
            grouped_min_callers: 3,
            grouped_min_group: 2,
            redirect_coverage: 0.5,
            redirect_min_methods: 2,
            policy: DispatchPolicy::default(),
        }
    }
}

impl MiningConfig {
    pub fn validate(&self) -> Result<(), MiningError> {
        let bad = |m: &str| Err(MiningError::InvalidConfig(m.to_string()));
        if self.fanin_threshold < 1 {
            return bad("fanin_threshold must be at least 1");
        }
        if self.grouped_min_callers < 1 || self.grouped_min_group < 1 || self.redirect_min_methods < 1 {
            return bad("thresholds must be at least 1");
        }
        if !(self.redirect_coverage > 0.0 && self.redirect_coverage <= 1.0) {
            return bad("redirect_coverage must lie in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Technique {
    FanIn,
    GroupedCalls,
    RedirectionLayer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    FanIn { method: MethodId, fan_in: usize, callers: Vec<MethodId> },
    Grouped { group: Vec<MethodId>, callers: Vec<MethodId>, shared_ancestor: TypeId },
    Redirect { redirector: TypeId, field: FieldId, receiver: TypeId, pairs: Vec<(MethodId, MethodId)>, coverage: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub id: String,
    pub sort_hint: SortKind,
    pub elements: Vec<String>,
    pub score: f64,
    pub evidence: Evidence,
    pub technique: Technique,
    pub policy: DispatchPolicy,
}

fn sorted_elements(ids: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut v: Vec<String> = ids.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    v.sort_by(|a, b| natural_cmp(a, b));
    v
}

/// Distinct callers credited with a lifted call to each method, self-calls excluded.
pub fn caller_sets(model: &SourceModel, policy: DispatchPolicy) -> BTreeMap<MethodId, BTreeSet<MethodId>> {
    let mut out: BTreeMap<MethodId, BTreeSet<MethodId>> = BTreeMap::new();
    for (caller, callee) in model.lifted_calls(policy) {
        if caller != callee {
            out.entry(callee).or_default().insert(caller);
        }
    }
    out
}

pub fn fan_in(model: &SourceModel, method: &MethodId, policy: DispatchPolicy) -> Result<usize, MiningError> {
    if model.method(method).is_none() {
        return Err(MiningError::UnknownMethod(method.to_string()));
    }
    Ok(caller_sets(model, policy).get(method).map_or(0, BTreeSet::len))
}

fn has_prefix_word(name: &str, prefix: &str) -> bool {
    match name.strip_prefix(prefix) {
        Some("") => true,
        Some(rest) => rest.starts_with(|c: char| c.is_uppercase() || c == '_'),
        None => false,
    }
}

fn field_stem(name: &str) -> &str {
    let trimmed = name.trim_start_matches('_');
    match trimmed.strip_prefix('f') {
        Some(rest) if rest.starts_with(|c: char| c.is_uppercase()) => rest,
        _ => trimmed,
    }
}

/// Accessor: a get/set/is-named method, or a method named after a field of
/// its owner, with at most one body statement.
pub fn is_accessor(model: &SourceModel, m: &MethodDecl) -> bool {
    if m.body_stmt_count > 1 || m.is_constructor || m.is_abstract {
        return false;
    }
    if ["get", "set", "is"].iter().any(|p| has_prefix_word(&m.name, p)) {
        return true;
    }
    model.fields_of(&m.owner).iter().any(|f| {
        let stem = field_stem(&model.field(f).expect("indexed field").name);
        !stem.is_empty() && stem.eq_ignore_ascii_case(&m.name)
    })
}

pub fn glob_match(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let t: Vec<char> = text.chars().collect();
    let (mut pi, mut ti) = (0, 0);
    let (mut star, mut mark) = (None, 0);
    while ti < t.len() {
        if pi < p.len() && (p[pi] == t[ti] || p[pi] == '?') {
            pi += 1;
            ti += 1;
        } else if pi < p.len() && p[pi] == '*' {
            star = Some(pi);
            pi += 1;
            mark = ti;
        } else if let Some(s) = star {
            pi = s + 1;
            mark += 1;
            ti = mark;
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '*')
}

/// Whether `method` survives the accessor and utility filters of `config`.
pub fn passes_filters(model: &SourceModel, method: &MethodId, config: &MiningConfig) -> bool {
    let m = model.meth(method);
    if config.accessor_filter && is_accessor(model, m) {
        return false;
    }
    let qualified = format!("{}.{}", model.type_name(&m.owner), m.name);
    !config.utility_names.iter().any(|p| glob_match(p, &m.name) || glob_match(p, &qualified))
}

/// One CB seed per method whose fan-in reaches the threshold, highest first.
pub fn fan_in_analysis(model: &SourceModel, config: &MiningConfig) -> Vec<Seed> {
    let callers = caller_sets(model, config.policy);
    let mut rows: Vec<(usize, String, MethodId, Vec<MethodId>)> = callers
        .into_iter()
        .filter(|(m, s)| s.len() >= config.fanin_threshold && passes_filters(model, m, config))
        .map(|(m, s)| {
            let mut callers: Vec<MethodId> = s.into_iter().collect();
            callers.sort();
            (callers.len(), model.method_signature(&m), m, callers)
        })
        .collect();
    rows.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    rows.into_iter()
        .enumerate()
        .map(|(i, (n, _, method, callers))| Seed {
            id: format!("fanin-{}", i + 1),
            sort_hint: SortKind::CB,
            elements: sorted_elements(
                std::iter::once(method.to_string()).chain(callers.iter().map(ToString::to_string)),
            ),
            score: n as f64,
            evidence: Evidence::FanIn { method, fan_in: n, callers },
            technique: Technique::FanIn,
            policy: config.policy,
        })
        .collect()
}
