//! Test support: a seeded random fact generator and brute-force oracles that
//! work on raw records with plain scans, sharing no code with the model.

#![allow(dead_code)]

pub mod equivalence;
pub mod risks;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

use sortweaver_core::source_model::{
    CallRecord, FactRecord, FieldRecord, MethodRecord, Receiver, TypeKind, TypeRecord, Visibility,
};
use sortweaver_core::{DispatchPolicy, FieldId};

pub const PACKAGES: [&str; 2] = ["p0", "p1"];
const NAMES: [&str; 5] = ["a", "b", "c", "run", "step"];
const PARAMS: [&[&str]; 5] = [&[], &["Ctx"], &["int"], &["Ctx", "int"], &["p0.Ctx"]];

/// Limits for [`random_records`].
#[derive(Debug, Clone, Copy)]
pub struct GenLimits {
    pub max_types: usize,
    pub max_methods: usize,
    /// Total entity budget (types, methods, fields and calls).
    pub max_entities: usize,
}

pub const SMALL: GenLimits = GenLimits { max_types: 6, max_methods: 12, max_entities: 60 };
pub const MEDIUM: GenLimits = GenLimits { max_types: 24, max_methods: 80, max_entities: 200 };

/// A valid random fact stream. Hierarchies are acyclic because supertypes
/// and enclosing types always have a lower index.
pub fn random_records(seed: u64, lim: GenLimits) -> Vec<FactRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut budget = lim.max_entities;
    let n_types = rng.gen_range(1..=lim.max_types.min(budget));
    budget -= n_types;

    let mut types: Vec<TypeRecord> = Vec::new();
    for i in 0..n_types {
        let pkg = PACKAGES[rng.gen_range(0..PACKAGES.len())];
        let kind = if rng.gen_bool(0.25) { TypeKind::Interface } else { TypeKind::Class };
        let mut supertypes = BTreeSet::new();
        if i > 0 {
            for _ in 0..rng.gen_range(0..=2) {
                supertypes.insert(format!("T{}", rng.gen_range(0..i)));
            }
        }
        if rng.gen_bool(0.1) {
            supertypes.insert("lib.External".to_string());
        }
        let (mut encl, mut anon) = (None, false);
        let mut name = format!("{pkg}.T{i}");
        if i > 0 && rng.gen_bool(0.2) {
            let e = rng.gen_range(0..i);
            encl = Some(format!("T{e}"));
            anon = rng.gen_bool(0.3);
            name = format!("{}.{}", types[e].name, if anon { format!("{i}") } else { format!("T{i}") });
        }
        types.push(TypeRecord {
            id: format!("T{i}"),
            name,
            kind,
            is_abstract: rng.gen_bool(0.2),
            anon,
            encl,
            supertypes: supertypes.into_iter().collect(),
            ext: false,
        });
    }

    let mut fields: Vec<FieldRecord> = Vec::new();
    for (i, t) in types.iter().enumerate() {
        if budget < 4 {
            break;
        }
        for k in 0..rng.gen_range(0..=1) {
            let declared_type = if rng.gen_bool(0.8) {
                types[rng.gen_range(0..n_types)].name.clone()
            } else {
                "int".to_string()
            };
            fields.push(FieldRecord {
                id: format!("F{i}_{k}"),
                owner: t.id.clone(),
                name: format!("fld{k}"),
                declared_type,
                vis: Visibility::Private,
            });
            budget -= 1;
        }
    }

    let max_methods = lim.max_methods.min(budget / 2);
    let n_methods = if max_methods == 0 { 0 } else { rng.gen_range(1..=max_methods) };
    budget -= n_methods;
    let mut methods: Vec<MethodRecord> = Vec::new();
    let mut sigs = BTreeSet::new();
    for j in 0..n_methods {
        let owner = rng.gen_range(0..n_types);
        let simple = types[owner].name.rsplit('.').next().unwrap().to_string();
        let ctor = rng.gen_bool(0.08);
        let name = if ctor { simple } else { NAMES[rng.gen_range(0..NAMES.len())].to_string() };
        let params: Vec<String> = PARAMS[rng.gen_range(0..PARAMS.len())].iter().map(|s| s.to_string()).collect();
        if !sigs.insert((owner, name.clone(), params.clone())) {
            continue;
        }
        let is_abstract = !ctor && rng.gen_bool(0.1);
        let throws = if rng.gen_bool(0.35) { vec!["E".to_string()] } else { vec![] };
        let raises = if !throws.is_empty() && !is_abstract && rng.gen_bool(0.3) { vec!["E".to_string()] } else { vec![] };
        let vis = match rng.gen_range(0..4) {
            0 => Visibility::Private,
            1 => Visibility::Protected,
            2 => Visibility::Package,
            _ => Visibility::Public,
        };
        methods.push(MethodRecord {
            id: format!("M{j}"),
            owner: types[owner].id.clone(),
            name,
            params,
            ret: "void".into(),
            vis,
            is_static: !ctor && rng.gen_bool(0.08),
            is_abstract,
            ctor,
            throws,
            stmts: if is_abstract { 0 } else { rng.gen_range(1..=6) },
            raises,
        });
    }

    let mut calls: Vec<CallRecord> = Vec::new();
    let callers: Vec<usize> = (0..methods.len()).filter(|&j| methods[j].stmts > 0).collect();
    if !callers.is_empty() {
        let n_calls = rng.gen_range(0..=budget);
        for k in 0..n_calls {
            let from = &methods[callers[rng.gen_range(0..callers.len())]];
            let to = &methods[rng.gen_range(0..methods.len())];
            let own_fields: Vec<&FieldRecord> = fields.iter().filter(|f| f.owner == from.owner).collect();
            let recv = match rng.gen_range(0..5) {
                0 => Receiver::This,
                1 => Receiver::Super,
                2 if !own_fields.is_empty() => {
                    Receiver::Field { field: FieldId::new(own_fields[rng.gen_range(0..own_fields.len())].id.clone()) }
                }
                3 if !from.params.is_empty() => Receiver::Param { index: rng.gen_range(0..from.params.len()) },
                _ => Receiver::Local,
            };
            let mut pass = Vec::new();
            if !from.params.is_empty() && !to.params.is_empty() && rng.gen_bool(0.6) {
                pass.push((rng.gen_range(0..to.params.len()), rng.gen_range(0..from.params.len())));
            }
            calls.push(CallRecord {
                id: format!("C{k}"),
                caller: from.id.clone(),
                target: to.id.clone(),
                recv,
                ord: rng.gen_range(1..=from.stmts),
                pass,
            });
        }
    }

    let mut out: Vec<FactRecord> = types.into_iter().map(FactRecord::Type).collect();
    out.extend(fields.into_iter().map(FactRecord::Field));
    out.extend(methods.into_iter().map(FactRecord::Method));
    out.extend(calls.into_iter().map(FactRecord::Call));
    out
}

/// Oracle scope: `None` is everything.
#[derive(Debug, Clone)]
pub enum OScope {
    All,
    Type(String),
    Package(String),
}

impl OScope {
    pub fn text(&self, raw: &Raw) -> String {
        match self {
            OScope::All => "*".into(),
            OScope::Type(id) => raw.ty(id).name.clone(),
            OScope::Package(p) => format!("{p}.*"),
        }
    }
}

/// Raw records with list-scanning lookups.
pub struct Raw {
    pub types: Vec<TypeRecord>,
    pub methods: Vec<MethodRecord>,
    pub fields: Vec<FieldRecord>,
    pub calls: Vec<CallRecord>,
    sup: BTreeMap<String, BTreeSet<String>>,
    by_id: BTreeMap<String, usize>,
    lifted: BTreeMap<DispatchPolicy, Vec<BTreeSet<String>>>,
}

fn names_match(a: &str, b: &str) -> bool {
    let simple = |s: &str| s.rsplit('.').next().unwrap_or(s).to_string();
    a == b || ((!a.contains('.') || !b.contains('.')) && simple(a) == simple(b))
}

impl Raw {
    pub fn new(records: &[FactRecord]) -> Raw {
        let mut raw = Raw {
            types: vec![],
            methods: vec![],
            fields: vec![],
            calls: vec![],
            sup: BTreeMap::new(),
            by_id: BTreeMap::new(),
            lifted: BTreeMap::new(),
        };
        for r in records {
            match r {
                FactRecord::Type(t) => raw.types.push(t.clone()),
                FactRecord::Method(m) => raw.methods.push(m.clone()),
                FactRecord::Field(f) => raw.fields.push(f.clone()),
                FactRecord::Call(c) => raw.calls.push(c.clone()),
            }
        }
        raw.by_id = raw.methods.iter().enumerate().map(|(i, m)| (m.id.clone(), i)).collect();
        raw.sup = raw.types.iter().map(|t| (t.id.clone(), raw.closure(&t.id))).collect();
        for policy in [DispatchPolicy::StaticOnly, DispatchPolicy::LiftToAncestors, DispatchPolicy::LiftBoth] {
            let sets = raw.calls.iter().map(|c| raw.lift(c, policy)).collect();
            raw.lifted.insert(policy, sets);
        }
        raw
    }

    pub fn ty(&self, id: &str) -> &TypeRecord {
        self.types.iter().find(|t| t.id == id).expect("type")
    }

    pub fn me(&self, id: &str) -> &MethodRecord {
        &self.methods[self.by_id[id]]
    }

    /// Reflexive supertype closure. Undeclared supertypes appear under their
    /// bare name.
    pub fn supers(&self, id: &str) -> &BTreeSet<String> {
        &self.sup[id]
    }

    /// Fixpoint iteration over the whole type list.
    fn closure(&self, id: &str) -> BTreeSet<String> {
        let mut set: BTreeSet<String> = BTreeSet::from([id.to_string()]);
        loop {
            let before = set.len();
            for t in &self.types {
                if set.contains(&t.id) {
                    set.extend(t.supertypes.iter().cloned());
                }
            }
            if set.len() == before {
                return set;
            }
        }
    }

    pub fn in_scope(&self, owner: &str, scope: &OScope) -> bool {
        match scope {
            OScope::All => true,
            OScope::Type(root) => self.supers(owner).contains(root),
            OScope::Package(p) => self.ty(owner).name.starts_with(&format!("{p}.")),
        }
    }

    /// Whether `m` overrides `c`.
    pub fn overrides(&self, m: &str, c: &str) -> bool {
        let (m, c) = (self.me(m), self.me(c));
        m.id != c.id
            && !m.ctor
            && !m.is_static
            && !c.ctor
            && !c.is_static
            && c.vis != Visibility::Private
            && m.name == c.name
            && m.params == c.params
            && m.owner != c.owner
            && self.supers(&m.owner).contains(&c.owner)
    }

    /// Methods credited with the `idx`-th call.
    pub fn lifted(&self, idx: usize, policy: DispatchPolicy) -> &BTreeSet<String> {
        &self.lifted[&policy][idx]
    }

    fn lift(&self, call: &CallRecord, policy: DispatchPolicy) -> BTreeSet<String> {
        let mut out = BTreeSet::from([call.target.clone()]);
        for c in &self.methods {
            let up = policy != DispatchPolicy::StaticOnly && self.overrides(&call.target, &c.id);
            let down = policy == DispatchPolicy::LiftBoth && self.overrides(&c.id, &call.target);
            if up || down {
                out.insert(c.id.clone());
            }
        }
        out
    }

    pub fn fan_in(&self, method: &str, policy: DispatchPolicy) -> usize {
        let callers: BTreeSet<&str> = self
            .calls
            .iter()
            .enumerate()
            .filter(|(i, c)| c.caller != method && self.lifted(*i, policy).contains(method))
            .map(|(_, c)| c.caller.as_str())
            .collect();
        callers.len()
    }

    /// CB hits as call ids.
    pub fn cb(&self, target: &str, scope: &OScope, policy: DispatchPolicy) -> BTreeSet<String> {
        self.calls
            .iter()
            .enumerate()
            .filter(|(_, c)| c.caller != target)
            .filter(|(_, c)| self.in_scope(&self.me(&c.caller).owner, scope))
            .filter(|(i, _)| self.lifted(*i, policy).contains(target))
            .map(|(_, c)| c.id.clone())
            .collect()
    }

    /// RL hits as `(redirector method, receiver method, call)`.
    pub fn rl(&self, redirector: &str, receiver: &str) -> BTreeSet<(String, String, String)> {
        let mut out = BTreeSet::new();
        for c in &self.calls {
            let from = self.me(&c.caller);
            if from.owner != redirector || from.ctor {
                continue;
            }
            let Receiver::Field { field } = &c.recv else { continue };
            let f = self.fields.iter().find(|f| f.id == field.as_str()).expect("field");
            let Some(ft) = self.types.iter().find(|t| t.name == f.declared_type) else { continue };
            if !self.supers(receiver).contains(&ft.id) {
                continue;
            }
            let to = self.me(&c.target);
            if to.name == from.name && to.params.len() == from.params.len() {
                out.insert((from.id.clone(), to.id.clone(), c.id.clone()));
            }
        }
        out
    }

    /// RSI hits as `(type, member)`.
    pub fn rsi(&self, role: &str, scope: &OScope) -> BTreeSet<(String, Option<String>)> {
        let mut out = BTreeSet::new();
        for t in &self.types {
            if t.id == role || !self.in_scope(&t.id, scope) || !self.supers(&t.id).contains(role) {
                continue;
            }
            out.insert((t.id.clone(), None));
            for m in self.methods.iter().filter(|m| m.owner == t.id) {
                if self.methods.iter().any(|r| r.owner == role && self.overrides(&m.id, &r.id)) {
                    out.insert((t.id.clone(), Some(m.id.clone())));
                }
            }
        }
        out
    }

    /// SC hits as `(enclosing, nested)`.
    pub fn sc(&self, scope: &OScope, role: Option<&str>) -> BTreeSet<(String, String)> {
        self.types
            .iter()
            .filter(|t| !t.anon)
            .filter_map(|t| t.encl.as_ref().map(|e| (e.clone(), t)))
            .filter(|(e, _)| self.in_scope(e, scope))
            .filter(|(_, t)| role.is_none_or(|r| self.supers(&t.id).contains(r)))
            .map(|(e, t)| (e, t.id.clone()))
            .collect()
    }

    /// EC chains as lists of `(method, param)` plus the forwarding calls.
    pub fn ec(&self, context: &str, scope: &OScope) -> BTreeSet<(Vec<(String, usize)>, Vec<String>)> {
        let mut nodes = Vec::new();
        for m in &self.methods {
            if !self.in_scope(&m.owner, scope) {
                continue;
            }
            for (i, p) in m.params.iter().enumerate() {
                if names_match(p, context) {
                    nodes.push((m.id.clone(), i));
                }
            }
        }
        let mut edges = BTreeSet::new();
        for c in &self.calls {
            for &(arg, param) in &c.pass {
                let a = (c.caller.clone(), param);
                let b = (c.target.clone(), arg);
                if nodes.contains(&a) && nodes.contains(&b) {
                    edges.insert((a, c.id.clone(), b));
                }
            }
        }
        maximal_paths(&nodes, &edges)
    }

    /// EP chains as method lists.
    pub fn ep(&self, exception: &str) -> BTreeSet<Vec<String>> {
        let declares = |m: &MethodRecord| m.throws.iter().any(|t| names_match(t, exception));
        let nodes: Vec<(String, usize)> =
            self.methods.iter().filter(|m| declares(m)).map(|m| (m.id.clone(), 0)).collect();
        let mut edges = BTreeSet::new();
        let mut seen = BTreeSet::new();
        for c in &self.calls {
            let from = self.me(&c.caller);
            let to = self.me(&c.target);
            if !declares(from) || !declares(to) || from.id == to.id {
                continue;
            }
            if from.raises.iter().any(|t| names_match(t, exception)) {
                continue;
            }
            if seen.insert((from.id.clone(), to.id.clone())) {
                edges.insert(((from.id.clone(), 0), String::new(), (to.id.clone(), 0)));
            }
        }
        maximal_paths(&nodes, &edges).into_iter().map(|(ns, _)| ns.into_iter().map(|(m, _)| m).collect()).collect()
    }
}

type Node = (String, usize);

/// Every path of at least two nodes over distinct methods that no edge can
/// extend at either end. Paths are grown breadth-first from single nodes.
fn maximal_paths(nodes: &[Node], edges: &BTreeSet<(Node, String, Node)>) -> BTreeSet<(Vec<Node>, Vec<String>)> {
    let mut frontier: Vec<(Vec<Node>, Vec<String>)> = nodes.iter().map(|n| (vec![n.clone()], vec![])).collect();
    let mut all = Vec::new();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (ns, es) in frontier {
            for (a, call, b) in edges {
                if a == ns.last().unwrap() && !ns.iter().any(|n| n.0 == b.0) {
                    let mut ns2 = ns.clone();
                    ns2.push(b.clone());
                    let mut es2 = es.clone();
                    es2.push(call.clone());
                    next.push((ns2, es2));
                }
            }
            all.push((ns, es));
        }
        frontier = next;
    }
    all.into_iter()
        .filter(|(ns, _)| ns.len() >= 2)
        .filter(|(ns, _)| {
            let off = |n: &Node| !ns.iter().any(|x| x.0 == n.0);
            let last = ns.last().unwrap();
            !edges.iter().any(|(a, _, b)| (a == last && off(b)) || (b == &ns[0] && off(a)))
        })
        .collect()
}

/// Closed callee groups found by testing every subset of methods.
pub fn grouped_oracle(
    raw: &Raw,
    policy: DispatchPolicy,
    min_group: usize,
    min_callers: usize,
) -> BTreeSet<(BTreeSet<String>, BTreeSet<String>)> {
    let mut tx: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (i, c) in raw.calls.iter().enumerate() {
        for t in raw.lifted(i, policy) {
            if *t != c.caller {
                tx.entry(c.caller.clone()).or_default().insert(t.clone());
            }
        }
    }
    let ids: Vec<String> = raw.methods.iter().map(|m| m.id.clone()).collect();
    assert!(ids.len() <= 16, "exponential oracle needs a small model");
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << ids.len()) {
        let group: BTreeSet<String> =
            (0..ids.len()).filter(|i| mask & (1 << i) != 0).map(|i| ids[i].clone()).collect();
        if group.len() < min_group {
            continue;
        }
        let callers: BTreeSet<String> =
            tx.iter().filter(|(_, t)| group.is_subset(t)).map(|(c, _)| c.clone()).collect();
        if callers.len() < min_callers {
            continue;
        }
        let mut closure: Option<BTreeSet<String>> = None;
        for c in &callers {
            closure = Some(match closure {
                None => tx[c].clone(),
                Some(acc) => acc.intersection(&tx[c]).cloned().collect(),
            });
        }
        if closure.as_ref() != Some(&group) {
            continue;
        }
        let mut common: Option<BTreeSet<String>> = None;
        for c in &callers {
            let s = raw.supers(&raw.me(c).owner);
            common = Some(match common {
                None => s.clone(),
                Some(acc) => acc.intersection(&s).cloned().collect(),
            });
        }
        if common.is_some_and(|c| !c.is_empty()) {
            out.insert((group, callers));
        }
    }
    out
}

/// Counts method-call expressions in MiniLang source by scanning tokens:
/// an identifier followed by `(` that is not a declaration, a keyword, or
/// the type after `new`.
pub fn count_call_statements(src: &str) -> usize {
    let mut toks: Vec<String> = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            i += 2;
            while i + 1 < chars.len() && !(chars[i] == '*' && chars[i + 1] == '/') {
                i += 1;
            }
            i += 2;
        } else if c == '"' {
            i += 1;
            while i < chars.len() && chars[i] != '"' {
                if chars[i] == '\\' {
                    i += 1;
                }
                i += 1;
            }
            i += 1;
            toks.push("\"\"".into());
        } else if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push(chars[start..i].iter().collect());
        } else if c.is_whitespace() {
            i += 1;
        } else {
            toks.push(c.to_string());
            i += 1;
        }
    }
    const KEYWORDS: [&str; 8] = ["if", "while", "for", "catch", "switch", "return", "synchronized", "throw"];
    let mut n = 0;
    for k in 0..toks.len() {
        if toks.get(k + 1).map(String::as_str) != Some("(") {
            continue;
        }
        let t = &toks[k];
        if !t.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_') || KEYWORDS.contains(&t.as_str()) {
            continue;
        }
        let prev = if k > 0 { toks[k - 1].as_str() } else { "" };
        if prev == "new" {
            continue;
        }
        // A declaration: name preceded by a type or modifier token, or a
        // constructor at member level whose body follows the parameter list.
        let prev_is_word = prev.chars().next().is_some_and(|c| c.is_alphanumeric() || c == '_')
            && prev != "return"
            && prev != "throw"
            && prev != "else";
        if prev_is_word || prev == ">" || prev == "]" {
            continue;
        }
        if is_member_ctor(&toks, k) {
            continue;
        }
        n += 1;
    }
    n
}

fn is_member_ctor(toks: &[String], k: usize) -> bool {
    // `Name(...) {` or `Name(...) throws X {` directly after `;`, `{` or `}`.
    let prev = if k > 0 { toks[k - 1].as_str() } else { "" };
    if !matches!(prev, ";" | "{" | "}") {
        return false;
    }
    let mut depth = 0;
    let mut j = k + 1;
    while j < toks.len() {
        match toks[j].as_str() {
            "(" => depth += 1,
            ")" => {
                depth -= 1;
                if depth == 0 {
                    break;
                }
            }
            _ => {}
        }
        j += 1;
    }
    matches!(toks.get(j + 1).map(String::as_str), Some("{") | Some("throws"))
}

/// Everything the pipeline produces for the bundled fixtures, serialized:
/// facts, seeds, query results, plans and the committed concern model.
pub fn pipeline_output() -> String {
    use sortweaver_core::*;
    let m = corpus::full_model();
    let mut out = sortweaver_core::source_model::records_to_string(&m.to_records());
    let cfg = MiningConfig::default();
    for seeds in [
        mining::fan_in_analysis(&m, &cfg),
        mining::grouped_calls_analysis(&m, &cfg),
        mining::find_redirectors(&m, &cfg),
    ] {
        out.push_str(&serde_json::to_string(&seeds).unwrap());
    }
    let mut cm = ConcernModel::from_json(corpus::DEMO_CONCERNS).unwrap();
    for e in cm.run_all(&m, DispatchPolicy::default(), true) {
        let (r, _) = e.outcome.unwrap();
        out.push_str(&serde_json::to_string(&r).unwrap());
        let p = plan(&m, &r, &e.path, &PlanOptions::default()).unwrap();
        out.push_str(&serde_json::to_string(&p).unwrap());
    }
    out.push_str(&cm.to_canonical_json());
    out
}
