//! The six concern-sort queries and seed expansion.
//!
//! Bindings name program elements (qualified type names, method signatures)
//! rather than fact ids, so a stored binding survives re-extraction.

mod chains;
mod expand;
mod resolve;

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::ids::{CallId, MethodId, TypeId};
use crate::source_model::{type_names_match, DispatchPolicy, Receiver, SourceModel};

pub use chains::{ec_graph, ep_graph, maximal_chains};
pub use expand::{expand_seed, Suggestion, EXPAND_MIN_COVERAGE};
pub use resolve::{resolve_method, resolve_type_ref};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SortKind {
    CB,
    RL,
    EC,
    RSI,
    SC,
    EP,
}

impl SortKind {
    pub const ALL: [SortKind; 6] = [SortKind::CB, SortKind::RL, SortKind::EC, SortKind::RSI, SortKind::SC, SortKind::EP];

    pub fn as_str(self) -> &'static str {
        match self {
            SortKind::CB => "CB",
            SortKind::RL => "RL",
            SortKind::EC => "EC",
            SortKind::RSI => "RSI",
            SortKind::SC => "SC",
            SortKind::EP => "EP",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            SortKind::CB => "Consistent behavior",
            SortKind::RL => "Redirection layer",
            SortKind::EC => "Expose context",
            SortKind::RSI => "Role superimposition",
            SortKind::SC => "Support classes",
            SortKind::EP => "Exception propagation",
        }
    }
}

impl fmt::Display for SortKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SortKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SortKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown sort `{s}` (expected one of CB, RL, EC, RSI, SC, EP)"))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("`{reference}` is ambiguous: {}", .candidates.join(", "))]
    Ambiguous { reference: String, candidates: Vec<String> },
    #[error("invalid scope `{0}`: not a type, package prefix or `*`")]
    InvalidScope(String),
}

/// A sort query with its parameters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "sort", content = "params")]
pub enum QueryBinding {
    CB { target: String, scope: String },
    RL { redirector: String, receiver: String },
    EC { context: String, scope: String },
    RSI { role: String, scope: String },
    SC {
        scope: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        role: Option<String>,
    },
    EP {
        exception: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        root: Option<String>,
    },
}

impl QueryBinding {
    pub fn sort(&self) -> SortKind {
        match self {
            QueryBinding::CB { .. } => SortKind::CB,
            QueryBinding::RL { .. } => SortKind::RL,
            QueryBinding::EC { .. } => SortKind::EC,
            QueryBinding::RSI { .. } => SortKind::RSI,
            QueryBinding::SC { .. } => SortKind::SC,
            QueryBinding::EP { .. } => SortKind::EP,
        }
    }
}

impl fmt::Display for QueryBinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryBinding::CB { target, scope } => write!(f, "CB({target}, {scope})"),
            QueryBinding::RL { redirector, receiver } => write!(f, "RL({redirector}, {receiver})"),
            QueryBinding::EC { context, scope } => write!(f, "EC({context}, {scope})"),
            QueryBinding::RSI { role, scope } => write!(f, "RSI({role}, {scope})"),
            QueryBinding::SC { scope, role } => match role {
                Some(r) => write!(f, "SC({scope}, {r})"),
                None => write!(f, "SC({scope})"),
            },
            QueryBinding::EP { exception, root } => match root {
                Some(r) => write!(f, "EP({exception}, {r})"),
                None => write!(f, "EP({exception})"),
            },
        }
    }
}

/// Bounds the types a query looks at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scope {
    All,
    /// A type and all its subtypes.
    Type(TypeId),
    /// Types whose qualified name starts with `prefix.`.
    Package(String),
}

impl Scope {
    pub fn parse(model: &SourceModel, text: &str) -> Result<Scope, QueryError> {
        let text = text.trim();
        if text == "*" {
            return Ok(Scope::All);
        }
        if let Some(t) = model.resolve_type(text) {
            return Ok(Scope::Type(t));
        }
        let prefix = text.strip_suffix(".*").unwrap_or(text);
        let dotted = format!("{prefix}.");
        if !prefix.is_empty() && model.types().any(|t| t.name.starts_with(&dotted)) {
            return Ok(Scope::Package(prefix.to_string()));
        }
        let named = model.types_named(text);
        if named.len() > 1 {
            return Err(QueryError::Ambiguous {
                reference: text.to_string(),
                candidates: named.iter().map(|t| model.type_name(t).to_string()).collect(),
            });
        }
        Err(QueryError::InvalidScope(text.to_string()))
    }

    pub fn contains(&self, model: &SourceModel, ty: &TypeId) -> bool {
        match self {
            Scope::All => true,
            Scope::Type(root) => model.is_subtype(ty, root),
            Scope::Package(p) => {
                let name = model.type_name(ty);
                name.len() > p.len() && name.starts_with(p.as_str()) && name.as_bytes()[p.len()] == b'.'
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ContextLink {
    pub method: MethodId,
    /// Index of the context parameter in `method`.
    pub param: usize,
    /// Call forwarding the parameter to the next link; `None` on the last link.
    pub call: Option<CallId>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hit {
    Call { call: CallId, caller: MethodId, target: MethodId, ordinal: u32 },
    Redirect { redirector_method: MethodId, receiver_method: MethodId, call: CallId },
    Context { links: Vec<ContextLink> },
    /// `member: None` is the declare-parents fact for the type itself.
    Role { ty: TypeId, member: Option<MethodId> },
    Support { enclosing: TypeId, nested: TypeId },
    Exception { chain: Vec<MethodId> },
}

impl Hit {
    /// Name-based description, stable across re-extraction of unchanged code.
    pub fn describe(&self, model: &SourceModel) -> String {
        let sig = |m: &MethodId| model.method_signature(m);
        match self {
            Hit::Call { caller, target, ordinal, .. } => format!("{}#{ordinal} -> {}", sig(caller), sig(target)),
            Hit::Redirect { redirector_method, receiver_method, call } => {
                let ord = model.call(call).map_or(0, |c| c.ordinal);
                format!("{}#{ord} -> {}", sig(redirector_method), sig(receiver_method))
            }
            Hit::Context { links } => {
                links.iter().map(|l| format!("{}[{}]", sig(&l.method), l.param)).collect::<Vec<_>>().join(" -> ")
            }
            Hit::Role { ty, member: None } => format!("{} implements role", model.type_name(ty)),
            Hit::Role { ty, member: Some(m) } => format!("{} :: {}", model.type_name(ty), sig(m)),
            Hit::Support { enclosing, nested } => {
                format!("{} encloses {}", model.type_name(enclosing), model.type_name(nested))
            }
            Hit::Exception { chain } => chain.iter().map(sig).collect::<Vec<_>>().join(" -> "),
        }
    }

    /// Call sites the hit is made of.
    pub fn calls(&self) -> Vec<CallId> {
        match self {
            Hit::Call { call, .. } | Hit::Redirect { call, .. } => vec![call.clone()],
            Hit::Context { links } => links.iter().filter_map(|l| l.call.clone()).collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub sort: SortKind,
    pub binding: QueryBinding,
    pub policy: DispatchPolicy,
    pub hits: Vec<Hit>,
}

impl QueryResult {
    fn new(binding: &QueryBinding, policy: DispatchPolicy, hits: BTreeSet<Hit>) -> Self {
        QueryResult { sort: binding.sort(), binding: binding.clone(), policy, hits: hits.into_iter().collect() }
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }

    /// Unique stable keys, one per hit; repeated descriptions get a `~n` suffix.
    pub fn keys(&self, model: &SourceModel) -> Vec<String> {
        let mut seen: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
        self.hits
            .iter()
            .map(|h| {
                let d = h.describe(model);
                let n = seen.entry(d.clone()).or_insert(0);
                *n += 1;
                if *n == 1 {
                    d
                } else {
                    format!("{d} ~{n}")
                }
            })
            .collect()
    }
}

/// Runs a bound query.
pub fn execute(model: &SourceModel, binding: &QueryBinding, policy: DispatchPolicy) -> Result<QueryResult, QueryError> {
    match binding {
        QueryBinding::CB { target, scope } => {
            let target = resolve_method(model, target)?;
            let scope = Scope::parse(model, scope)?;
            Ok(QueryResult::new(binding, policy, query_cb(model, &target, &scope, policy)))
        }
        QueryBinding::RL { redirector, receiver } => {
            let r = resolve_type_ref(model, redirector)?;
            let x = resolve_type_ref(model, receiver)?;
            Ok(QueryResult::new(binding, policy, query_rl(model, &r, &x)))
        }
        QueryBinding::EC { context, scope } => {
            let scope = Scope::parse(model, scope)?;
            Ok(QueryResult::new(binding, policy, query_ec(model, context, &scope)))
        }
        QueryBinding::RSI { role, scope } => {
            let role = resolve_type_ref(model, role)?;
            let scope = Scope::parse(model, scope)?;
            Ok(QueryResult::new(binding, policy, query_rsi(model, &role, &scope)))
        }
        QueryBinding::SC { scope, role } => {
            let scope = Scope::parse(model, scope)?;
            let role = role.as_deref().map(|r| resolve_type_ref(model, r)).transpose()?;
            Ok(QueryResult::new(binding, policy, query_sc(model, &scope, role.as_ref())))
        }
        QueryBinding::EP { exception, root } => {
            let root = root.as_deref().map(|r| resolve_method(model, r)).transpose()?;
            Ok(QueryResult::new(binding, policy, query_ep(model, exception, root.as_ref())))
        }
    }
}

/// Call sites crediting `target` from callers owned by types in scope.
pub fn query_cb(model: &SourceModel, target: &MethodId, scope: &Scope, policy: DispatchPolicy) -> BTreeSet<Hit> {
    model
        .calls()
        .filter(|c| &c.caller != target)
        .filter(|c| scope.contains(model, &model.meth(&c.caller).owner))
        .filter(|c| model.credits(c, target, policy))
        .map(|c| Hit::Call {
            call: c.id.clone(),
            caller: c.caller.clone(),
            target: c.static_target.clone(),
            ordinal: c.ordinal,
        })
        .collect()
}

/// Forwarding calls from methods of `redirector` through a field whose
/// declared type is `receiver` or one of its supertypes.
pub fn query_rl(model: &SourceModel, redirector: &TypeId, receiver: &TypeId) -> BTreeSet<Hit> {
    let mut out = BTreeSet::new();
    for mid in model.methods_of(redirector) {
        let m = model.meth(mid);
        if m.is_constructor {
            continue;
        }
        for cid in model.calls_from(mid) {
            let c = model.call(cid).expect("indexed call");
            let Receiver::Field { field } = &c.receiver else { continue };
            let declared = &model.field(field).expect("indexed field").declared_type;
            let Some(field_ty) = model.resolve_type(declared) else { continue };
            if !model.is_subtype(receiver, &field_ty) {
                continue;
            }
            let t = model.meth(&c.static_target);
            if t.name == m.name && t.arity() == m.arity() {
                out.insert(Hit::Redirect {
                    redirector_method: mid.clone(),
                    receiver_method: t.id.clone(),
                    call: cid.clone(),
                });
            }
        }
    }
    out
}

/// Maximal chains forwarding a parameter of type `context` verbatim.
pub fn query_ec(model: &SourceModel, context: &str, scope: &Scope) -> BTreeSet<Hit> {
    let graph = ec_graph(model, context, scope);
    maximal_chains(&graph)
        .into_iter()
        .map(|path| {
            let mut links: Vec<ContextLink> = Vec::with_capacity(path.nodes.len());
            for (i, (method, param)) in path.nodes.iter().enumerate() {
                links.push(ContextLink { method: method.clone(), param: *param, call: path.edges.get(i).cloned() });
            }
            Hit::Context { links }
        })
        .collect()
}

/// Types in scope taking on `role`, with their members implementing it.
pub fn query_rsi(model: &SourceModel, role: &TypeId, scope: &Scope) -> BTreeSet<Hit> {
    let role_members: BTreeSet<&MethodId> = model.methods_of(role).iter().collect();
    let mut out = BTreeSet::new();
    for t in model.types() {
        if &t.id == role || t.is_external || !scope.contains(model, &t.id) || !model.is_subtype(&t.id, role) {
            continue;
        }
        out.insert(Hit::Role { ty: t.id.clone(), member: None });
        for m in model.methods_of(&t.id) {
            if model.overridden_by_method(m).iter().any(|o| role_members.contains(o)) {
                out.insert(Hit::Role { ty: t.id.clone(), member: Some(m.clone()) });
            }
        }
    }
    out
}

/// Named nested classes of types in scope, optionally restricted to a role.
pub fn query_sc(model: &SourceModel, scope: &Scope, role: Option<&TypeId>) -> BTreeSet<Hit> {
    let mut out = BTreeSet::new();
    for n in model.types() {
        let Some(enclosing) = &n.enclosing else { continue };
        if n.is_anonymous || !scope.contains(model, enclosing) {
            continue;
        }
        if role.is_some_and(|r| !model.is_subtype(&n.id, r)) {
            continue;
        }
        out.insert(Hit::Support { enclosing: enclosing.clone(), nested: n.id.clone() });
    }
    out
}

/// Maximal chains of methods re-throwing `exception`, each ending at its root.
pub fn query_ep(model: &SourceModel, exception: &str, root: Option<&MethodId>) -> BTreeSet<Hit> {
    let graph = ep_graph(model, exception);
    maximal_chains(&graph)
        .into_iter()
        .map(|p| p.nodes.into_iter().map(|(m, _)| m).collect::<Vec<_>>())
        .filter(|chain| root.is_none_or(|r| chain.contains(r)))
        .map(|chain| Hit::Exception { chain })
        .collect()
}

/// Whether a parameter type names the context type.
pub(crate) fn is_context_type(param: &str, context: &str) -> bool {
    type_names_match(param, context)
}
