//! Aspect refactoring plans: template aspects per sort, source edits and
//! risk warnings.
//!
//! Edits are not applied to source text. [`apply_edits`] replays them on the
//! fact model so the effect of a plan can be checked by re-running queries.

pub mod aspect;
mod cb;
pub mod pointcut;
mod sorts;

use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

pub use aspect::{parse_aspect, render_aspect, AdviceKind, Aspect, Member};
pub use pointcut::{parse_pointcut, MethodPattern, Params, PointcutExpr};

use crate::ids::{MethodId, TypeId};
use crate::queries::{resolve_type_ref, QueryBinding, QueryError, QueryResult, Scope, SortKind};
use crate::source_model::{type_names_match, FactRecord, FactsError, SourceModel};

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("the {0} query result is empty; there is nothing to refactor")]
    EmptyResult(String),
    #[error("template slot left unfilled: {0}")]
    UnfilledSlot(String),
    #[error("aspect text line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("edit targets unknown entity `{0}`")]
    UnknownEntity(String),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Facts(#[from] FactsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RiskCode {
    AnonCallers,
    Tangled,
    SuperCall,
    Encapsulation,
    OmissionCheck,
    RedirExtraRoles,
    RedirClients,
    RedirNewMethods,
    VisibilityChange,
    IntroConflict,
    ScNotIntroducible,
    ScBrokenDeps,
    EpTypeLost,
    EpOverrides,
    Precedence,
}

impl RiskCode {
    pub const ALL: [RiskCode; 15] = [
        RiskCode::AnonCallers,
        RiskCode::Tangled,
        RiskCode::SuperCall,
        RiskCode::Encapsulation,
        RiskCode::OmissionCheck,
        RiskCode::RedirExtraRoles,
        RiskCode::RedirClients,
        RiskCode::RedirNewMethods,
        RiskCode::VisibilityChange,
        RiskCode::IntroConflict,
        RiskCode::ScNotIntroducible,
        RiskCode::ScBrokenDeps,
        RiskCode::EpTypeLost,
        RiskCode::EpOverrides,
        RiskCode::Precedence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RiskCode::AnonCallers => "ANON_CALLERS",
            RiskCode::Tangled => "TANGLED",
            RiskCode::SuperCall => "SUPER_CALL",
            RiskCode::Encapsulation => "ENCAPSULATION",
            RiskCode::OmissionCheck => "OMISSION_CHECK",
            RiskCode::RedirExtraRoles => "REDIR_EXTRA_ROLES",
            RiskCode::RedirClients => "REDIR_CLIENTS",
            RiskCode::RedirNewMethods => "REDIR_NEW_METHODS",
            RiskCode::VisibilityChange => "VISIBILITY_CHANGE",
            RiskCode::IntroConflict => "INTRO_CONFLICT",
            RiskCode::ScNotIntroducible => "SC_NOT_INTRODUCIBLE",
            RiskCode::ScBrokenDeps => "SC_BROKEN_DEPS",
            RiskCode::EpTypeLost => "EP_TYPE_LOST",
            RiskCode::EpOverrides => "EP_OVERRIDES",
            RiskCode::Precedence => "PRECEDENCE",
        }
    }

    pub fn default_severity(self) -> RiskSeverity {
        match self {
            RiskCode::IntroConflict => RiskSeverity::Blocker,
            RiskCode::Precedence | RiskCode::RedirNewMethods => RiskSeverity::Info,
            _ => RiskSeverity::Caution,
        }
    }
}

impl std::fmt::Display for RiskCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskSeverity {
    Info,
    Caution,
    Blocker,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct RiskWarning {
    pub code: RiskCode,
    pub severity: RiskSeverity,
    pub message: String,
    pub evidence: Vec<String>,
}

impl RiskWarning {
    pub fn new(code: RiskCode, message: String, evidence: Vec<String>) -> Self {
        RiskWarning { code, severity: code.default_severity(), message, evidence }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EditKind {
    DeleteCallSite,
    DeleteThrowsClause,
    MoveMemberToAspect,
    MoveNestedClassToAspect,
    ReplaceTypeRemoval,
    DeleteParameter,
    DeleteArgument,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SourceEdit {
    pub kind: EditKind,
    /// Id of the type, method or call site the edit applies to.
    pub target: String,
    /// Parameter or argument position for the signature edits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exception: Option<String>,
    pub description: String,
}

impl SourceEdit {
    pub fn new(kind: EditKind, target: &str, description: String) -> Self {
        SourceEdit { kind, target: target.to_string(), index: None, exception: None, description }
    }

    pub fn with_index(mut self, index: usize) -> Self {
        self.index = Some(index);
        self
    }

    pub fn with_exception(mut self, exception: &str) -> Self {
        self.exception = Some(exception.to_string());
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlanOptions {
    /// Overrides the advice kind inferred for CB plans.
    pub advice: Option<AdviceKind>,
    /// Enumerate advised methods instead of a generic pattern.
    pub enumerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefactoringPlan {
    pub instance: String,
    pub sorts: Vec<SortKind>,
    pub aspect_name: String,
    #[serde(skip)]
    pub aspect: Aspect,
    pub aspect_text: String,
    pub edits: Vec<SourceEdit>,
    pub warnings: Vec<RiskWarning>,
    pub notes: Vec<String>,
    /// Dynamic join points the advice touches, for interference checks.
    pub join_points: Vec<String>,
}

impl RefactoringPlan {
    pub fn has_warning(&self, code: RiskCode) -> bool {
        self.warnings.iter().any(|w| w.code == code)
    }

    pub fn warnings_of(&self, code: RiskCode) -> impl Iterator<Item = &RiskWarning> {
        self.warnings.iter().filter(move |w| w.code == code)
    }
}

/// Aspect members and side products of one template instantiation.
#[derive(Debug, Default)]
pub(crate) struct Part {
    pub members: Vec<Member>,
    pub edits: Vec<SourceEdit>,
    pub warnings: Vec<RiskWarning>,
    pub notes: Vec<String>,
    pub join_points: BTreeSet<String>,
    pub privileged: bool,
}

pub(crate) fn simple(model: &SourceModel, ty: &TypeId) -> String {
    model.type_decl(ty).map_or_else(|| ty.to_string(), |t| t.simple_name().to_string())
}

/// Simple name of a type as written in aspect text.
pub(crate) fn short(ty: &str) -> String {
    crate::source_model::simple_name(ty).to_string()
}

pub(crate) fn shorts(tys: &[String]) -> Vec<String> {
    tys.iter().map(|t| short(t)).collect()
}

pub(crate) fn lower_first(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_lowercase().chain(c).collect(),
        None => String::new(),
    }
}

/// `AbstractCommand` → `aCommand`, `PasteCommand` → `aPasteCommand`.
pub(crate) fn this_var(simple: &str) -> String {
    let base = simple.strip_prefix("Abstract").filter(|r| r.starts_with(char::is_uppercase)).unwrap_or(simple);
    format!("a{base}")
}

/// `notify views` → `NotifyViews`.
pub fn upper_camel(s: &str) -> String {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| {
            let mut c = w.chars();
            let f = c.next().expect("nonempty word");
            f.to_uppercase().chain(c).collect::<String>()
        })
        .collect()
}

fn scope_type(model: &SourceModel, scope: &str) -> Result<Option<TypeId>, PlanError> {
    Ok(match Scope::parse(model, scope)? {
        Scope::Type(t) => Some(t),
        _ => None,
    })
}

/// The type a plan is about, used for naming.
fn subject_of(model: &SourceModel, result: &QueryResult) -> Result<Option<TypeId>, PlanError> {
    use crate::queries::Hit;
    Ok(match &result.binding {
        QueryBinding::CB { scope, .. } => scope_type(model, scope)?,
        QueryBinding::RL { redirector, .. } => Some(resolve_type_ref(model, redirector)?),
        QueryBinding::RSI { role, scope } => scope_type(model, scope)?.or(Some(resolve_type_ref(model, role)?)),
        QueryBinding::SC { scope, .. } => scope_type(model, scope)?,
        QueryBinding::EC { .. } => result.hits.iter().find_map(|h| match h {
            Hit::Context { links } => links.first().map(|l| model.meth(&l.method).owner.clone()),
            _ => None,
        }),
        QueryBinding::EP { .. } => result.hits.iter().find_map(|h| match h {
            Hit::Exception { chain } => chain.last().map(|m| model.meth(m).owner.clone()),
            _ => None,
        }),
    })
}

fn part_for(model: &SourceModel, result: &QueryResult, opts: &PlanOptions) -> Result<Part, PlanError> {
    if result.hits.is_empty() {
        return Err(PlanError::EmptyResult(result.sort.as_str().into()));
    }
    match &result.binding {
        QueryBinding::CB { scope, .. } => cb::cb_part(model, &result.hits, scope_type(model, scope)?.as_ref(), opts),
        QueryBinding::RL { redirector, receiver } => sorts::rl_part(
            model,
            &result.hits,
            &resolve_type_ref(model, redirector)?,
            &resolve_type_ref(model, receiver)?,
        ),
        QueryBinding::EC { .. } => sorts::ec_part(model, &result.hits),
        QueryBinding::RSI { role, .. } => sorts::rsi_part(model, &result.hits, &resolve_type_ref(model, role)?),
        QueryBinding::SC { .. } => sorts::sc_part(model, &result.hits),
        QueryBinding::EP { exception, .. } => sorts::ep_part(model, &result.hits, exception),
    }
}

fn leaf(path: &str) -> &str {
    path.rsplit('/').find(|s| !s.trim().is_empty()).unwrap_or("")
}

fn aspect_name(model: &SourceModel, subject: Option<&TypeId>, label: &str) -> String {
    let head = subject.map(|s| upper_camel(&simple(model, s))).unwrap_or_default();
    format!("{head}{}", upper_camel(label))
}

fn finish(
    instance: &str,
    sorts: Vec<SortKind>,
    name: String,
    parts: Vec<Part>,
) -> Result<RefactoringPlan, PlanError> {
    let mut aspect = Aspect { name: name.clone(), privileged: false, members: Vec::new() };
    let mut edits = Vec::new();
    let mut warnings = BTreeSet::new();
    let mut notes = Vec::new();
    let mut join_points = BTreeSet::new();
    for p in parts {
        aspect.privileged |= p.privileged;
        aspect.members.extend(p.members);
        for e in p.edits {
            if !edits.contains(&e) {
                edits.push(e);
            }
        }
        warnings.extend(p.warnings);
        for n in p.notes {
            if !notes.contains(&n) {
                notes.push(n);
            }
        }
        join_points.extend(p.join_points);
    }
    let aspect_text = render_aspect(&aspect)?;
    if parse_aspect(&aspect_text)? != aspect {
        return Err(PlanError::Parse { line: 0, message: "rendered aspect does not round-trip".into() });
    }
    Ok(RefactoringPlan {
        instance: instance.to_string(),
        sorts,
        aspect_name: name,
        aspect,
        aspect_text,
        edits,
        warnings: warnings.into_iter().collect(),
        notes,
        join_points: join_points.into_iter().collect(),
    })
}

/// Instantiates the template aspect for one sort instance.
pub fn plan(
    model: &SourceModel,
    result: &QueryResult,
    instance: &str,
    opts: &PlanOptions,
) -> Result<RefactoringPlan, PlanError> {
    let part = part_for(model, result, opts)?;
    let subject = subject_of(model, result)?;
    let label = match leaf(instance) {
        "" => result.sort.title().to_string(),
        l => l.to_string(),
    };
    finish(instance, vec![result.sort], aspect_name(model, subject.as_ref(), &label), vec![part])
}

/// One aspect for a whole concern group. CB instances advising the same
/// executions share one advice, whose kind is inferred from all their hits.
pub fn plan_group(
    model: &SourceModel,
    group_path: &str,
    results: &[(String, QueryResult)],
    opts: &PlanOptions,
) -> Result<RefactoringPlan, PlanError> {
    if results.is_empty() {
        return Err(PlanError::EmptyResult(format!("group `{group_path}`")));
    }
    let mut subjects = BTreeSet::new();
    for (_, r) in results {
        let scoped = match &r.binding {
            QueryBinding::CB { scope, .. } | QueryBinding::RSI { scope, .. } | QueryBinding::SC { scope, .. } => {
                scope_type(model, scope)?
            }
            QueryBinding::RL { redirector, .. } => Some(resolve_type_ref(model, redirector)?),
            _ => None,
        };
        subjects.extend(scoped);
    }
    let subject = if subjects.len() == 1 { subjects.into_iter().next() } else { None };

    // CB instances keyed by the executions they advise.
    let mut cb_groups: BTreeMap<BTreeSet<MethodId>, (Vec<crate::queries::Hit>, Option<TypeId>)> = BTreeMap::new();
    let mut others: Vec<&QueryResult> = Vec::new();
    for (_, r) in results {
        match &r.binding {
            QueryBinding::CB { scope, .. } => {
                if r.hits.is_empty() {
                    return Err(PlanError::EmptyResult("CB".into()));
                }
                let callers: BTreeSet<MethodId> = r
                    .hits
                    .iter()
                    .filter_map(|h| match h {
                        crate::queries::Hit::Call { caller, .. } => Some(caller.clone()),
                        _ => None,
                    })
                    .collect();
                let entry = cb_groups.entry(callers).or_insert_with(|| (Vec::new(), None));
                entry.0.extend(r.hits.iter().cloned());
                if entry.1.is_none() {
                    entry.1 = scope_type(model, scope)?;
                }
            }
            _ => others.push(r),
        }
    }
    let order = |s: SortKind| [SortKind::SC, SortKind::RSI, SortKind::RL, SortKind::EC, SortKind::EP].iter().position(|k| *k == s);
    others.sort_by_key(|r| order(r.sort));
    let mut parts = Vec::new();
    let mut sorts = BTreeSet::new();
    for r in others {
        sorts.insert(r.sort);
        parts.push(part_for(model, r, opts)?);
    }
    let mut cb_parts = Vec::new();
    for (hits, scope) in cb_groups.into_values() {
        sorts.insert(SortKind::CB);
        let mut unique: Vec<crate::queries::Hit> = hits;
        unique.sort();
        unique.dedup();
        cb_parts.push(cb::cb_part(model, &unique, scope.as_ref(), opts)?);
    }
    let mut overlap = Vec::new();
    for i in 0..cb_parts.len() {
        for j in i + 1..cb_parts.len() {
            let shared: Vec<String> = cb_parts[i].join_points.intersection(&cb_parts[j].join_points).cloned().collect();
            if !shared.is_empty() {
                overlap.extend(shared);
            }
        }
    }
    parts.extend(cb_parts);
    if !overlap.is_empty() {
        overlap.sort();
        overlap.dedup();
        let mut p = Part::default();
        p.warnings.push(RiskWarning::new(
            RiskCode::Precedence,
            "several advices in this aspect share join points; their order is unspecified".into(),
            overlap,
        ));
        parts.push(p);
    }
    let name = aspect_name(model, subject.as_ref(), leaf(group_path));
    finish(group_path, sorts.into_iter().collect(), name, parts)
}

/// Adds a PRECEDENCE warning to every plan whose advice shares join points
/// with another plan's.
pub fn flag_precedence(plans: &mut [RefactoringPlan]) {
    let sets: Vec<BTreeSet<String>> = plans.iter().map(|p| p.join_points.iter().cloned().collect()).collect();
    for i in 0..plans.len() {
        let mut evidence = BTreeSet::new();
        for (j, other) in sets.iter().enumerate() {
            if i == j {
                continue;
            }
            let shared: Vec<&String> = sets[i].intersection(other).collect();
            if !shared.is_empty() {
                evidence.insert(format!("{} ({})", plans[j].aspect_name, shared.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")));
            }
        }
        if !evidence.is_empty() {
            plans[i].warnings.push(RiskWarning::new(
                RiskCode::Precedence,
                "other plans advise the same join points; declare precedence explicitly".into(),
                evidence.into_iter().collect(),
            ));
            plans[i].warnings.sort();
            plans[i].warnings.dedup();
        }
    }
}

/// Replays the fact-level effect of `edits` and rebuilds the model. Moves and
/// type removals leave facts unchanged: the code keeps running, from the aspect.
pub fn apply_edits(model: &SourceModel, edits: &[SourceEdit]) -> Result<SourceModel, PlanError> {
    let mut records = model.to_records();
    for e in edits {
        let exists = records.iter().any(|r| r.id() == e.target);
        if !exists {
            return Err(PlanError::UnknownEntity(e.target.clone()));
        }
        match e.kind {
            EditKind::DeleteCallSite => {
                records.retain(|r| !matches!(r, FactRecord::Call(c) if c.id == e.target));
            }
            EditKind::DeleteThrowsClause => {
                let exc = e.exception.clone().unwrap_or_default();
                for r in records.iter_mut() {
                    if let FactRecord::Method(m) = r {
                        if m.id == e.target {
                            m.throws.retain(|t| !type_names_match(t, &exc));
                        }
                    }
                }
            }
            EditKind::DeleteParameter => {
                let idx = e.index.ok_or_else(|| PlanError::UnknownEntity(format!("{} (no parameter index)", e.target)))?;
                for r in records.iter_mut() {
                    match r {
                        FactRecord::Method(m) if m.id == e.target && idx < m.params.len() => {
                            m.params.remove(idx);
                        }
                        FactRecord::Call(c) if c.caller == e.target => {
                            c.pass.retain(|&(_, p)| p != idx);
                            for (_, p) in c.pass.iter_mut() {
                                if *p > idx {
                                    *p -= 1;
                                }
                            }
                        }
                        _ => {}
                    }
                }
            }
            EditKind::DeleteArgument => {
                let idx = e.index.ok_or_else(|| PlanError::UnknownEntity(format!("{} (no argument index)", e.target)))?;
                for r in records.iter_mut() {
                    if let FactRecord::Call(c) = r {
                        if c.id == e.target {
                            c.pass.retain(|&(a, _)| a != idx);
                            for (a, _) in c.pass.iter_mut() {
                                if *a > idx {
                                    *a -= 1;
                                }
                            }
                        }
                    }
                }
            }
            EditKind::MoveMemberToAspect | EditKind::MoveNestedClassToAspect | EditKind::ReplaceTypeRemoval => {}
        }
    }
    Ok(SourceModel::from_records(records)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naming_helpers() {
        assert_eq!(this_var("AbstractCommand"), "aCommand");
        assert_eq!(this_var("PasteCommand"), "aPasteCommand");
        assert_eq!(this_var("Abstract"), "aAbstract");
        assert_eq!(upper_camel("notify views"), "NotifyViews");
        assert_eq!(upper_camel("Undo"), "Undo");
        assert_eq!(lower_first("Execute"), "execute");
        assert_eq!(RiskCode::ALL.len(), 15);
        let codes: BTreeSet<&str> = RiskCode::ALL.iter().map(|c| c.as_str()).collect();
        assert_eq!(codes.len(), 15);
    }
}
