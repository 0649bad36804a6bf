//! Model construction: linking, validation and derived relations.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{
    CallSite, FactRecord, FactsError, FieldDecl, MethodDecl, SourceModel, TypeDecl, TypeKind, OPAQUE_PREFIX,
};
use crate::ids::{CallId, FieldId, MethodId, TypeId};
use crate::source_model::Receiver;

pub(super) fn build(records: Vec<(usize, FactRecord)>) -> Result<SourceModel, FactsError> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut type_recs = Vec::new();
    let mut method_recs = Vec::new();
    let mut field_recs = Vec::new();
    let mut call_recs = Vec::new();
    for (line, rec) in records {
        if seen.insert(rec.id().to_string(), line).is_some() {
            return Err(FactsError::Duplicate { line, id: rec.id().to_string() });
        }
        match rec {
            FactRecord::Type(t) => type_recs.push((line, t)),
            FactRecord::Method(m) => method_recs.push((line, m)),
            FactRecord::Field(f) => field_recs.push((line, f)),
            FactRecord::Call(c) => call_recs.push((line, c)),
        }
    }

    let declared: BTreeSet<String> = type_recs.iter().map(|(_, t)| t.id.clone()).collect();
    let mut types = BTreeMap::new();
    let mut opaque = BTreeSet::new();
    for (line, t) in &type_recs {
        let mut supertypes = Vec::new();
        for s in &t.supertypes {
            if declared.contains(s) {
                supertypes.push(TypeId::new(s.clone()));
            } else {
                let id = TypeId::new(format!("{OPAQUE_PREFIX}{s}"));
                opaque.insert(id.clone());
                supertypes.push(id);
            }
        }
        let enclosing = match &t.encl {
            Some(e) if declared.contains(e) => Some(TypeId::new(e.clone())),
            Some(e) => return Err(FactsError::Dangling { line: *line, field: "encl", id: e.clone() }),
            None => None,
        };
        if t.anon && enclosing.is_none() {
            return Err(FactsError::Invalid {
                line: *line,
                message: format!("anonymous type `{}` has no enclosing type", t.id),
            });
        }
        types.insert(
            TypeId::new(t.id.clone()),
            TypeDecl {
                id: TypeId::new(t.id.clone()),
                name: t.name.clone(),
                kind: t.kind,
                is_abstract: t.is_abstract,
                is_anonymous: t.anon,
                is_external: t.ext,
                enclosing,
                supertypes,
            },
        );
    }
    for id in &opaque {
        let name = id.as_str()[OPAQUE_PREFIX.len()..].to_string();
        types.insert(
            id.clone(),
            TypeDecl {
                id: id.clone(),
                name,
                kind: TypeKind::Class,
                is_abstract: false,
                is_anonymous: false,
                is_external: true,
                enclosing: None,
                supertypes: Vec::new(),
            },
        );
    }

    check_acyclic(&types, "supertypes", |t| t.supertypes.clone())?;
    check_acyclic(&types, "enclosing types", |t| t.enclosing.iter().cloned().collect())?;

    let mut methods = BTreeMap::new();
    let mut signatures = BTreeSet::new();
    for (line, m) in method_recs {
        let owner = TypeId::new(m.owner.clone());
        if !types.contains_key(&owner) || opaque.contains(&owner) {
            return Err(FactsError::Dangling { line, field: "owner", id: m.owner });
        }
        if m.is_abstract && m.stmts != 0 {
            return Err(FactsError::Invalid {
                line,
                message: format!("abstract method `{}` has {} body statements", m.id, m.stmts),
            });
        }
        if !signatures.insert((owner.clone(), m.name.clone(), m.params.clone())) {
            return Err(FactsError::Invalid {
                line,
                message: format!("method `{}({})` declared twice in `{}`", m.name, m.params.join(","), m.owner),
            });
        }
        methods.insert(
            MethodId::new(m.id.clone()),
            MethodDecl {
                id: MethodId::new(m.id),
                owner,
                name: m.name,
                param_types: m.params,
                return_type: m.ret,
                visibility: m.vis,
                is_static: m.is_static,
                is_abstract: m.is_abstract,
                is_constructor: m.ctor,
                declared_throws: m.throws,
                raises: m.raises,
                body_stmt_count: m.stmts,
            },
        );
    }

    let mut fields = BTreeMap::new();
    let mut field_names = BTreeSet::new();
    for (line, f) in field_recs {
        let owner = TypeId::new(f.owner.clone());
        if !types.contains_key(&owner) || opaque.contains(&owner) {
            return Err(FactsError::Dangling { line, field: "owner", id: f.owner });
        }
        if !field_names.insert((owner.clone(), f.name.clone())) {
            return Err(FactsError::Invalid {
                line,
                message: format!("field `{}` declared twice in `{}`", f.name, f.owner),
            });
        }
        fields.insert(
            FieldId::new(f.id.clone()),
            FieldDecl {
                id: FieldId::new(f.id),
                owner,
                name: f.name,
                declared_type: f.declared_type,
                visibility: f.vis,
            },
        );
    }

    let mut calls = BTreeMap::new();
    for (line, c) in call_recs {
        let caller_id = MethodId::new(c.caller.clone());
        let target_id = MethodId::new(c.target.clone());
        let caller: &MethodDecl =
            methods.get(&caller_id).ok_or_else(|| FactsError::Dangling { line, field: "caller", id: c.caller.clone() })?;
        let target: &MethodDecl =
            methods.get(&target_id).ok_or_else(|| FactsError::Dangling { line, field: "target", id: c.target.clone() })?;
        if let Receiver::Field { field } = &c.recv {
            if !fields.contains_key(field) {
                return Err(FactsError::Dangling { line, field: "recv.field", id: field.0.clone() });
            }
        }
        if c.ord == 0 || c.ord > caller.body_stmt_count {
            return Err(FactsError::Invalid {
                line,
                message: format!(
                    "call `{}` at statement {} but caller `{}` has {} statements",
                    c.id, c.ord, c.caller, caller.body_stmt_count
                ),
            });
        }
        if let Receiver::Param { index } = c.recv {
            if index >= caller.arity() {
                return Err(FactsError::Invalid {
                    line,
                    message: format!("call `{}` receiver parameter {index} out of range", c.id),
                });
            }
        }
        for &(arg, param) in &c.pass {
            if arg >= target.arity() || param >= caller.arity() {
                return Err(FactsError::Invalid {
                    line,
                    message: format!("call `{}` forwards argument {arg} from parameter {param} out of range", c.id),
                });
            }
        }
        let mut pass = c.pass.clone();
        pass.sort_unstable();
        pass.dedup();
        calls.insert(
            CallId::new(c.id.clone()),
            CallSite {
                id: CallId::new(c.id),
                caller: caller_id,
                static_target: target_id,
                receiver: c.recv,
                ordinal: c.ord,
                arg_passthrough: pass,
            },
        );
    }

    Ok(derive(types, methods, fields, calls, opaque))
}

fn check_acyclic(
    types: &BTreeMap<TypeId, TypeDecl>,
    relation: &'static str,
    edges: impl Fn(&TypeDecl) -> Vec<TypeId>,
) -> Result<(), FactsError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut marks: HashMap<&TypeId, Mark> = HashMap::new();
    for root in types.keys() {
        if marks.contains_key(root) {
            continue;
        }
        // (node, pending successors)
        let mut stack: Vec<(&TypeId, Vec<TypeId>)> = vec![(root, edges(&types[root]))];
        marks.insert(root, Mark::Open);
        while let Some((node, pending)) = stack.last_mut() {
            let node: &TypeId = node;
            match pending.pop() {
                None => {
                    marks.insert(node, Mark::Done);
                    stack.pop();
                }
                Some(next) => {
                    let (key, decl) = types.get_key_value(&next).expect("links were resolved");
                    match marks.get(key) {
                        Some(Mark::Done) => {}
                        Some(Mark::Open) => {
                            let start = stack.iter().position(|(n, _)| *n == key).unwrap_or(0);
                            let mut cycle: Vec<String> =
                                stack[start..].iter().map(|(n, _)| types[*n].name.clone()).collect();
                            cycle.push(types[key].name.clone());
                            return Err(FactsError::Cycle { relation, types: cycle });
                        }
                        None => {
                            marks.insert(key, Mark::Open);
                            stack.push((key, edges(decl)));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn derive(
    types: BTreeMap<TypeId, TypeDecl>,
    methods: BTreeMap<MethodId, MethodDecl>,
    fields: BTreeMap<FieldId, FieldDecl>,
    calls: BTreeMap<CallId, CallSite>,
    opaque: BTreeSet<TypeId>,
) -> SourceModel {
    let mut ancestors: BTreeMap<TypeId, BTreeSet<TypeId>> = BTreeMap::new();
    fn close(
        id: &TypeId,
        types: &BTreeMap<TypeId, TypeDecl>,
        memo: &mut BTreeMap<TypeId, BTreeSet<TypeId>>,
    ) -> BTreeSet<TypeId> {
        if let Some(done) = memo.get(id) {
            return done.clone();
        }
        let mut set = BTreeSet::new();
        set.insert(id.clone());
        for s in &types[id].supertypes {
            set.extend(close(s, types, memo));
        }
        memo.insert(id.clone(), set.clone());
        set
    }
    for id in types.keys() {
        close(id, &types, &mut ancestors);
    }
    let mut descendants: BTreeMap<TypeId, BTreeSet<TypeId>> =
        types.keys().map(|k| (k.clone(), BTreeSet::new())).collect();
    for (t, ups) in &ancestors {
        for a in ups {
            descendants.get_mut(a).expect("ancestor is a type").insert(t.clone());
        }
    }

    let mut methods_of: BTreeMap<TypeId, Vec<MethodId>> = BTreeMap::new();
    for m in methods.values() {
        methods_of.entry(m.owner.clone()).or_default().push(m.id.clone());
    }
    let mut fields_of: BTreeMap<TypeId, Vec<FieldId>> = BTreeMap::new();
    for f in fields.values() {
        fields_of.entry(f.owner.clone()).or_default().push(f.id.clone());
    }
    let mut nested_of: BTreeMap<TypeId, Vec<TypeId>> = BTreeMap::new();
    for t in types.values() {
        if let Some(e) = &t.enclosing {
            nested_of.entry(e.clone()).or_default().push(t.id.clone());
        }
    }
    let mut calls_from: BTreeMap<MethodId, Vec<CallId>> = BTreeMap::new();
    let mut calls_to: BTreeMap<MethodId, Vec<CallId>> = BTreeMap::new();
    for c in calls.values() {
        calls_from.entry(c.caller.clone()).or_default().push(c.id.clone());
        calls_to.entry(c.static_target.clone()).or_default().push(c.id.clone());
    }

    let mut overridden: BTreeMap<MethodId, BTreeSet<MethodId>> = BTreeMap::new();
    let mut overriders: BTreeMap<MethodId, BTreeSet<MethodId>> = BTreeMap::new();
    for m in methods.values().filter(|m| m.can_override()) {
        for anc in &ancestors[&m.owner] {
            if *anc == m.owner {
                continue;
            }
            for cand in methods_of.get(anc).into_iter().flatten() {
                let c = &methods[cand];
                if c.can_override()
                    && c.visibility != super::Visibility::Private
                    && c.name == m.name
                    && c.param_types == m.param_types
                {
                    overridden.entry(m.id.clone()).or_default().insert(c.id.clone());
                    overriders.entry(c.id.clone()).or_default().insert(m.id.clone());
                }
            }
        }
    }

    let mut by_name = BTreeMap::new();
    let mut by_simple_name: BTreeMap<String, Vec<TypeId>> = BTreeMap::new();
    let declared_first = types
        .values()
        .filter(|t| !opaque.contains(&t.id))
        .chain(types.values().filter(|t| opaque.contains(&t.id)));
    for t in declared_first {
        if opaque.contains(&t.id) && by_name.contains_key(&t.name) {
            continue;
        }
        by_name.entry(t.name.clone()).or_insert_with(|| t.id.clone());
        let simple = t.simple_name().to_string();
        let entry = by_simple_name.entry(simple).or_default();
        if !entry.contains(&t.id) {
            entry.push(t.id.clone());
        }
    }

    SourceModel {
        types,
        methods,
        fields,
        calls,
        opaque,
        ancestors,
        descendants,
        methods_of,
        fields_of,
        nested_of,
        calls_from,
        calls_to,
        overridden,
        overriders,
        by_name,
        by_simple_name,
    }
}
