//! Language-agnostic fact model of an analyzed program.
//!
//! A [`SourceModel`] holds four entity sets (types, methods, fields, call
//! sites) and the relations derived from them: the reflexive-transitive
//! subtype closure, the override relation and the call graph lifted under a
//! [`DispatchPolicy`]. The model is immutable once built; every derived
//! relation is a pure function of the entity sets, so two streams holding the
//! same records in any order produce identical models.

mod facts;
mod hierarchy;

pub use facts::{
    load_facts, read_records, records_to_string, write_records, CallRecord, FactRecord, FieldRecord, MethodRecord,
    TypeRecord, FACTS_SCHEMA_VERSION,
};

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::ids::{CallId, FieldId, MethodId, TypeId};

/// Prefix of ids synthesized for supertypes that name no declared type.
pub const OPAQUE_PREFIX: &str = "ext:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeKind {
    Class,
    Interface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Public,
    Protected,
    #[default]
    Package,
    Private,
}

impl Visibility {
    pub fn keyword(self) -> &'static str {
        match self {
            Visibility::Public => "public",
            Visibility::Protected => "protected",
            Visibility::Package => "",
            Visibility::Private => "private",
        }
    }
}

/// How the receiver of a call was expressed at the call site.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Receiver {
    This,
    Super,
    Field { field: FieldId },
    Param { index: usize },
    Local,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub id: TypeId,
    pub name: String,
    pub kind: TypeKind,
    pub is_abstract: bool,
    pub is_anonymous: bool,
    /// Opaque type: no members, no supertypes, no source.
    pub is_external: bool,
    pub enclosing: Option<TypeId>,
    pub supertypes: Vec<TypeId>,
}

impl TypeDecl {
    /// Last dotted segment of the qualified name.
    pub fn simple_name(&self) -> &str {
        simple_name(&self.name)
    }
}

pub fn simple_name(qualified: &str) -> &str {
    qualified.rsplit('.').next().unwrap_or(qualified)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDecl {
    pub id: MethodId,
    pub owner: TypeId,
    pub name: String,
    pub param_types: Vec<String>,
    pub return_type: String,
    pub visibility: Visibility,
    pub is_static: bool,
    pub is_abstract: bool,
    pub is_constructor: bool,
    pub declared_throws: Vec<String>,
    /// Exception types raised by `throw` statements in the body.
    pub raises: Vec<String>,
    pub body_stmt_count: u32,
}

impl MethodDecl {
    pub fn arity(&self) -> usize {
        self.param_types.len()
    }

    pub fn declares(&self, exception: &str) -> bool {
        self.declared_throws.iter().any(|t| type_names_match(t, exception))
    }

    pub fn raises_directly(&self, exception: &str) -> bool {
        self.raises.iter().any(|t| type_names_match(t, exception))
    }

    fn can_override(&self) -> bool {
        !self.is_constructor && !self.is_static
    }
}

/// Type names match when equal, or when one side is unqualified and equals
/// the other's simple name.
pub fn type_names_match(a: &str, b: &str) -> bool {
    if a == b {
        return true;
    }
    (!a.contains('.') || !b.contains('.')) && simple_name(a) == simple_name(b)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub id: FieldId,
    pub owner: TypeId,
    pub name: String,
    pub declared_type: String,
    pub visibility: Visibility,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallSite {
    pub id: CallId,
    pub caller: MethodId,
    pub static_target: MethodId,
    pub receiver: Receiver,
    pub ordinal: u32,
    /// `(argument index, caller parameter index)` pairs forwarded verbatim.
    pub arg_passthrough: Vec<(usize, usize)>,
}

/// How a call is credited to methods related by overriding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispatchPolicy {
    /// Only the statically bound target.
    StaticOnly,
    /// The static target plus every method it overrides.
    #[default]
    LiftToAncestors,
    /// Additionally every method overriding the static target.
    LiftBoth,
}

impl DispatchPolicy {
    pub const ALL: [DispatchPolicy; 3] =
        [DispatchPolicy::StaticOnly, DispatchPolicy::LiftToAncestors, DispatchPolicy::LiftBoth];

    pub fn as_str(self) -> &'static str {
        match self {
            DispatchPolicy::StaticOnly => "static_only",
            DispatchPolicy::LiftToAncestors => "lift_to_ancestors",
            DispatchPolicy::LiftBoth => "lift_both",
        }
    }
}

impl fmt::Display for DispatchPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DispatchPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().replace('-', "_").as_str() {
            "static_only" | "static" => Ok(DispatchPolicy::StaticOnly),
            "lift_to_ancestors" | "ancestors" => Ok(DispatchPolicy::LiftToAncestors),
            "lift_both" | "both" => Ok(DispatchPolicy::LiftBoth),
            other => Err(format!(
                "unknown dispatch policy `{other}` (expected static_only, lift_to_ancestors or lift_both)"
            )),
        }
    }
}

#[derive(Debug, Error)]
pub enum FactsError {
    #[error("i/o error reading facts: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate id `{id}`")]
    Duplicate { line: usize, id: String },
    #[error("line {line}: `{field}` refers to unknown id `{id}`")]
    Dangling { line: usize, field: &'static str, id: String },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("cycle in {relation}: {}", .types.join(" -> "))]
    Cycle { relation: &'static str, types: Vec<String> },
}

/// Immutable fact database with derived relations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceModel {
    types: BTreeMap<TypeId, TypeDecl>,
    methods: BTreeMap<MethodId, MethodDecl>,
    fields: BTreeMap<FieldId, FieldDecl>,
    calls: BTreeMap<CallId, CallSite>,
    /// Ids synthesized for supertype names that resolve to no declared type.
    opaque: BTreeSet<TypeId>,

    ancestors: BTreeMap<TypeId, BTreeSet<TypeId>>,
    descendants: BTreeMap<TypeId, BTreeSet<TypeId>>,
    methods_of: BTreeMap<TypeId, Vec<MethodId>>,
    fields_of: BTreeMap<TypeId, Vec<FieldId>>,
    nested_of: BTreeMap<TypeId, Vec<TypeId>>,
    calls_from: BTreeMap<MethodId, Vec<CallId>>,
    calls_to: BTreeMap<MethodId, Vec<CallId>>,
    overridden: BTreeMap<MethodId, BTreeSet<MethodId>>,
    overriders: BTreeMap<MethodId, BTreeSet<MethodId>>,
    by_name: BTreeMap<String, TypeId>,
    by_simple_name: BTreeMap<String, Vec<TypeId>>,
}

impl Default for SourceModel {
    fn default() -> Self {
        SourceModel::from_records(Vec::new()).expect("empty model is valid")
    }
}

impl SourceModel {
    pub fn from_records(records: Vec<FactRecord>) -> Result<Self, FactsError> {
        Self::from_numbered_records(records.into_iter().enumerate().map(|(i, r)| (i + 1, r)).collect())
    }

    /// Builds a model from records tagged with their source line numbers.
    pub fn from_numbered_records(records: Vec<(usize, FactRecord)>) -> Result<Self, FactsError> {
        hierarchy::build(records)
    }

    /// Re-emits the entity sets as fact records, sorted by kind then id.
    pub fn to_records(&self) -> Vec<FactRecord> {
        let mut out = Vec::new();
        for t in self.types.values().filter(|t| !self.opaque.contains(&t.id)) {
            out.push(FactRecord::Type(TypeRecord {
                id: t.id.0.clone(),
                name: t.name.clone(),
                kind: t.kind,
                is_abstract: t.is_abstract,
                anon: t.is_anonymous,
                encl: t.enclosing.as_ref().map(|e| e.0.clone()),
                supertypes: t
                    .supertypes
                    .iter()
                    .map(|s| if self.opaque.contains(s) { self.types[s].name.clone() } else { s.0.clone() })
                    .collect(),
                ext: t.is_external,
            }));
        }
        for f in self.fields.values() {
            out.push(FactRecord::Field(FieldRecord {
                id: f.id.0.clone(),
                owner: f.owner.0.clone(),
                name: f.name.clone(),
                declared_type: f.declared_type.clone(),
                vis: f.visibility,
            }));
        }
        for m in self.methods.values() {
            out.push(FactRecord::Method(MethodRecord {
                id: m.id.0.clone(),
                owner: m.owner.0.clone(),
                name: m.name.clone(),
                params: m.param_types.clone(),
                ret: m.return_type.clone(),
                vis: m.visibility,
                is_static: m.is_static,
                is_abstract: m.is_abstract,
                ctor: m.is_constructor,
                throws: m.declared_throws.clone(),
                stmts: m.body_stmt_count,
                raises: m.raises.clone(),
            }));
        }
        for c in self.calls.values() {
            out.push(FactRecord::Call(CallRecord {
                id: c.id.0.clone(),
                caller: c.caller.0.clone(),
                target: c.static_target.0.clone(),
                recv: c.receiver.clone(),
                ord: c.ordinal,
                pass: c.arg_passthrough.clone(),
            }));
        }
        out
    }

    pub fn types(&self) -> impl Iterator<Item = &TypeDecl> {
        self.types.values()
    }

    pub fn methods(&self) -> impl Iterator<Item = &MethodDecl> {
        self.methods.values()
    }

    pub fn fields(&self) -> impl Iterator<Item = &FieldDecl> {
        self.fields.values()
    }

    pub fn calls(&self) -> impl Iterator<Item = &CallSite> {
        self.calls.values()
    }

    pub fn type_count(&self) -> usize {
        self.types.len() - self.opaque.len()
    }

    pub fn method_count(&self) -> usize {
        self.methods.len()
    }

    pub fn field_count(&self) -> usize {
        self.fields.len()
    }

    pub fn call_count(&self) -> usize {
        self.calls.len()
    }

    pub fn type_decl(&self, id: &TypeId) -> Option<&TypeDecl> {
        self.types.get(id)
    }

    pub fn method(&self, id: &MethodId) -> Option<&MethodDecl> {
        self.methods.get(id)
    }

    pub fn field(&self, id: &FieldId) -> Option<&FieldDecl> {
        self.fields.get(id)
    }

    pub fn call(&self, id: &CallId) -> Option<&CallSite> {
        self.calls.get(id)
    }

    /// Panicking lookups for ids already known to be in the model.
    pub fn ty(&self, id: &TypeId) -> &TypeDecl {
        &self.types[id]
    }

    pub fn meth(&self, id: &MethodId) -> &MethodDecl {
        &self.methods[id]
    }

    pub fn is_opaque(&self, id: &TypeId) -> bool {
        self.opaque.contains(id)
    }

    /// `subtype_of*`: the type itself plus all its (transitive) supertypes.
    pub fn ancestors(&self, id: &TypeId) -> &BTreeSet<TypeId> {
        &self.ancestors[id]
    }

    /// The type itself plus all its (transitive) subtypes.
    pub fn descendants(&self, id: &TypeId) -> &BTreeSet<TypeId> {
        &self.descendants[id]
    }

    pub fn is_subtype(&self, sub: &TypeId, sup: &TypeId) -> bool {
        self.ancestors.get(sub).is_some_and(|a| a.contains(sup))
    }

    pub fn methods_of(&self, ty: &TypeId) -> &[MethodId] {
        self.methods_of.get(ty).map_or(&[], Vec::as_slice)
    }

    pub fn fields_of(&self, ty: &TypeId) -> &[FieldId] {
        self.fields_of.get(ty).map_or(&[], Vec::as_slice)
    }

    /// Types whose `enclosing_type` is `ty`.
    pub fn nested_types(&self, ty: &TypeId) -> &[TypeId] {
        self.nested_of.get(ty).map_or(&[], Vec::as_slice)
    }

    pub fn calls_from(&self, method: &MethodId) -> &[CallId] {
        self.calls_from.get(method).map_or(&[], Vec::as_slice)
    }

    /// Call sites whose static target is `method`.
    pub fn calls_to(&self, method: &MethodId) -> &[CallId] {
        self.calls_to.get(method).map_or(&[], Vec::as_slice)
    }

    /// Every method `method` overrides, transitively.
    pub fn overridden_by_method(&self, method: &MethodId) -> &BTreeSet<MethodId> {
        static EMPTY: BTreeSet<MethodId> = BTreeSet::new();
        self.overridden.get(method).unwrap_or(&EMPTY)
    }

    /// Every method that overrides `method`, transitively.
    pub fn overriders_of(&self, method: &MethodId) -> &BTreeSet<MethodId> {
        static EMPTY: BTreeSet<MethodId> = BTreeSet::new();
        self.overriders.get(method).unwrap_or(&EMPTY)
    }

    /// Direct override pairs `(m, m')`: `m` overrides `m'` and no method in
    /// between overrides `m'` on `m`'s behalf.
    pub fn direct_overrides(&self) -> BTreeSet<(MethodId, MethodId)> {
        let mut out = BTreeSet::new();
        for (m, all) in &self.overridden {
            for candidate in all {
                let shadowed = all
                    .iter()
                    .any(|mid| mid != candidate && self.overridden_by_method(mid).contains(candidate));
                if !shadowed {
                    out.insert((m.clone(), candidate.clone()));
                }
            }
        }
        out
    }

    /// Methods a call site is credited to under `policy`.
    pub fn lifted_targets(&self, call: &CallSite, policy: DispatchPolicy) -> BTreeSet<MethodId> {
        let mut out = BTreeSet::new();
        out.insert(call.static_target.clone());
        if policy != DispatchPolicy::StaticOnly {
            out.extend(self.overridden_by_method(&call.static_target).iter().cloned());
        }
        if policy == DispatchPolicy::LiftBoth {
            out.extend(self.overriders_of(&call.static_target).iter().cloned());
        }
        out
    }

    /// Whether `call` is credited to `method` under `policy`, without
    /// building the lifted target set.
    pub fn credits(&self, call: &CallSite, method: &MethodId, policy: DispatchPolicy) -> bool {
        let t = &call.static_target;
        t == method
            || (policy != DispatchPolicy::StaticOnly && self.overridden_by_method(t).contains(method))
            || (policy == DispatchPolicy::LiftBoth && self.overriders_of(t).contains(method))
    }

    /// The lifted call graph as `(caller, callee)` pairs.
    pub fn lifted_calls(&self, policy: DispatchPolicy) -> BTreeSet<(MethodId, MethodId)> {
        let mut out = BTreeSet::new();
        for call in self.calls.values() {
            for t in self.lifted_targets(call, policy) {
                out.insert((call.caller.clone(), t));
            }
        }
        out
    }

    /// Resolves a type by qualified name, then by unique simple name.
    pub fn resolve_type(&self, name: &str) -> Option<TypeId> {
        if let Some(id) = self.by_name.get(name) {
            return Some(id.clone());
        }
        match self.by_simple_name.get(simple_name(name)) {
            Some(ids) if ids.len() == 1 && !name.contains('.') => Some(ids[0].clone()),
            _ => None,
        }
    }

    /// All types whose simple or qualified name equals `name`.
    pub fn types_named(&self, name: &str) -> Vec<TypeId> {
        if let Some(id) = self.by_name.get(name) {
            return vec![id.clone()];
        }
        self.by_simple_name.get(name).cloned().unwrap_or_default()
    }

    pub fn type_name<'a>(&'a self, id: &'a TypeId) -> &'a str {
        self.types.get(id).map_or(id.as_str(), |t| t.name.as_str())
    }

    /// `Owner.name(P1,P2)`, stable across re-extraction.
    pub fn method_signature(&self, id: &MethodId) -> String {
        match self.methods.get(id) {
            Some(m) => format!("{}.{}({})", self.type_name(&m.owner), m.name, m.param_types.join(",")),
            None => id.0.clone(),
        }
    }

    /// Innermost enclosing type that is not anonymous (the type itself if named).
    pub fn named_context(&self, id: &TypeId) -> TypeId {
        let mut cur = id.clone();
        while let Some(t) = self.types.get(&cur) {
            match (&t.enclosing, t.is_anonymous) {
                (Some(e), true) => cur = e.clone(),
                _ => break,
            }
        }
        cur
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(id: &str, name: &str, kind: TypeKind, sup: &[&str]) -> FactRecord {
        FactRecord::Type(TypeRecord {
            id: id.into(),
            name: name.into(),
            kind,
            is_abstract: false,
            anon: false,
            encl: None,
            supertypes: sup.iter().map(|s| s.to_string()).collect(),
            ext: false,
        })
    }

    fn meth(id: &str, owner: &str, name: &str, stmts: u32) -> FactRecord {
        FactRecord::Method(MethodRecord {
            id: id.into(),
            owner: owner.into(),
            name: name.into(),
            params: vec![],
            ret: "void".into(),
            vis: Visibility::Public,
            is_static: false,
            is_abstract: stmts == 0,
            ctor: false,
            throws: vec![],
            stmts,
            raises: vec![],
        })
    }

    fn call(id: &str, caller: &str, target: &str, recv: Receiver) -> FactRecord {
        FactRecord::Call(CallRecord {
            id: id.into(),
            caller: caller.into(),
            target: target.into(),
            recv,
            ord: 1,
            pass: vec![],
        })
    }

    fn small() -> Vec<FactRecord> {
        vec![
            ty("T0", "Command", TypeKind::Interface, &[]),
            ty("T1", "AbstractCommand", TypeKind::Class, &["T0"]),
            ty("T2", "PasteCommand", TypeKind::Class, &["T1"]),
            ty("T3", "Other", TypeKind::Class, &["java.lang.Object"]),
            meth("M0", "T0", "execute", 0),
            meth("M1", "T1", "execute", 2),
            meth("M2", "T2", "execute", 2),
            meth("M3", "T3", "execute", 1),
            call("C1", "M2", "M1", Receiver::Super),
        ]
    }

    #[test]
    fn empty_stream_gives_empty_model() {
        let m = load_facts("".as_bytes()).unwrap();
        assert_eq!(m.type_count() + m.method_count() + m.field_count() + m.call_count(), 0);
        assert!(m.lifted_calls(DispatchPolicy::LiftBoth).is_empty());
        assert!(m.direct_overrides().is_empty());
    }

    #[test]
    fn overrides_follow_the_hierarchy_only() {
        let m = SourceModel::from_records(small()).unwrap();
        let pairs = m.direct_overrides();
        assert!(pairs.contains(&("M2".into(), "M1".into())));
        assert!(pairs.contains(&("M1".into(), "M0".into())));
        // transitive pair is derivable but not direct
        assert!(!pairs.contains(&("M2".into(), "M0".into())));
        assert!(m.overridden_by_method(&"M2".into()).contains(&"M0".into()));
        // unrelated class with the same signature
        assert!(!pairs.iter().any(|(a, b)| a.as_str() == "M3" || b.as_str() == "M3"));
    }

    #[test]
    fn opaque_supertypes_are_kept_as_leaves() {
        let m = SourceModel::from_records(small()).unwrap();
        let other = TypeId::from("T3");
        let opaque = TypeId::from("ext:java.lang.Object");
        assert!(m.is_subtype(&other, &opaque));
        assert!(m.is_opaque(&opaque));
        assert_eq!(m.type_count(), 4);
        assert!(m.to_records().iter().any(|r| matches!(r, FactRecord::Type(t) if t.supertypes == ["java.lang.Object"])));
    }

    #[test]
    fn lifting_policies() {
        let m = SourceModel::from_records(small()).unwrap();
        let c = m.call(&"C1".into()).unwrap();
        let ids = |p| m.lifted_targets(c, p).into_iter().map(|x| x.0).collect::<Vec<_>>();
        assert_eq!(ids(DispatchPolicy::StaticOnly), ["M1"]);
        assert_eq!(ids(DispatchPolicy::LiftToAncestors), ["M0", "M1"]);
        assert_eq!(ids(DispatchPolicy::LiftBoth), ["M0", "M1", "M2"]);
    }

    #[test]
    fn unknown_owner_names_id_and_line() {
        let mut recs = small();
        recs.push(meth("M9", "T42", "x", 1));
        let err = SourceModel::from_records(recs).unwrap_err();
        match err {
            FactsError::Dangling { line, id, .. } => {
                assert_eq!(line, 10);
                assert_eq!(id, "T42");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let mut recs = small();
        recs.push(meth("M1", "T1", "other", 1));
        assert!(matches!(SourceModel::from_records(recs), Err(FactsError::Duplicate { .. })));
    }

    #[test]
    fn supertype_cycle_is_reported() {
        let recs = vec![
            ty("A", "A", TypeKind::Class, &["B"]),
            ty("B", "B", TypeKind::Class, &["C"]),
            ty("C", "C", TypeKind::Class, &["A"]),
        ];
        match SourceModel::from_records(recs).unwrap_err() {
            FactsError::Cycle { types, .. } => {
                assert_eq!(types.first(), types.last());
                assert_eq!(types.len(), 4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ordinal_beyond_body_is_invalid() {
        let mut recs = small();
        if let FactRecord::Call(c) = recs.last_mut().unwrap() {
            c.ord = 5;
        }
        assert!(matches!(SourceModel::from_records(recs), Err(FactsError::Invalid { .. })));
    }

    #[test]
    fn policy_parsing() {
        assert_eq!("lift-both".parse::<DispatchPolicy>().unwrap(), DispatchPolicy::LiftBoth);
        assert_eq!("static_only".parse::<DispatchPolicy>().unwrap(), DispatchPolicy::StaticOnly);
        assert!("dynamic".parse::<DispatchPolicy>().is_err());
    }

    #[test]
    fn type_name_matching() {
        assert!(type_names_match("IOErr", "io.IOErr"));
        assert!(type_names_match("io.IOErr", "io.IOErr"));
        assert!(!type_names_match("a.IOErr", "b.IOErr"));
    }
}
