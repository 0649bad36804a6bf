//! Consistent-behavior plans: the crosscutting calls move into one advice on
//! the executions of their callers.

use std::collections::{BTreeMap, BTreeSet};

use super::aspect::{Advice, AdviceKind, Member, PointcutDecl};
use super::pointcut::{MethodPattern, Params, PointcutExpr};
use super::{lower_first, short, shorts, simple, this_var, EditKind, Part, PlanError, PlanOptions, RiskCode, RiskWarning, SourceEdit};
use crate::ids::{MethodId, TypeId};
use crate::queries::Hit;
use crate::source_model::{type_names_match, CallSite, MethodDecl, Receiver, SourceModel, Visibility};

/// Most specific non-opaque type every owner is a subtype of.
pub(crate) fn common_ancestor(model: &SourceModel, owners: &BTreeSet<TypeId>) -> Option<TypeId> {
    let mut iter = owners.iter();
    let first = iter.next()?;
    let mut common: BTreeSet<TypeId> = model.ancestors(first).clone();
    for o in iter {
        common = common.intersection(model.ancestors(o)).cloned().collect();
    }
    common
        .into_iter()
        .filter(|t| !model.is_opaque(t))
        .max_by(|a, b| model.ancestors(a).len().cmp(&model.ancestors(b).len()).then_with(|| b.cmp(a)))
}

/// Outermost enclosing type.
pub(crate) fn top_level(model: &SourceModel, ty: &TypeId) -> TypeId {
    let mut cur = ty.clone();
    while let Some(e) = model.type_decl(&cur).and_then(|t| t.enclosing.clone()) {
        cur = e;
    }
    cur
}

fn same_params(a: &MethodDecl, b: &MethodDecl) -> bool {
    a.param_types.len() == b.param_types.len()
        && a.param_types.iter().zip(&b.param_types).all(|(x, y)| type_names_match(x, y))
}

/// Infers the advice kind from where the hits sit in each caller's body.
pub(crate) fn infer_kind(model: &SourceModel, by_caller: &BTreeMap<MethodId, BTreeSet<u32>>) -> (AdviceKind, Vec<MethodId>) {
    let mut all_before = true;
    let mut all_after = true;
    let mut mid_body = Vec::new();
    for (caller, ords) in by_caller {
        let n = model.meth(caller).body_stmt_count;
        let k = ords.len() as u32;
        let before = ords.iter().copied().eq(1..=k);
        let after = n >= k && ords.iter().copied().eq(n - k + 1..=n);
        all_before &= before;
        all_after &= after;
        if !before && !after {
            mid_body.push(caller.clone());
        }
    }
    let kind = if all_before {
        AdviceKind::Before
    } else if all_after {
        AdviceKind::After
    } else {
        AdviceKind::Around
    };
    (kind, mid_body)
}

fn statement(model: &SourceModel, call: &CallSite, var: &str) -> String {
    let name = &model.meth(&call.static_target).name;
    match &call.receiver {
        Receiver::This => format!("{var}.{name}(..);"),
        Receiver::Super => format!("{var}.{name}(..); // was a super call"),
        Receiver::Field { field } => {
            let f = model.field(field).map_or("field", |f| f.name.as_str());
            format!("{var}.{f}.{name}(..);")
        }
        Receiver::Param { index } => format!("arg{index}.{name}(..);"),
        Receiver::Other => match getter_receiver(model, call) {
            Some(getter) => format!("{var}.{getter}().{name}(..);"),
            None => format!("/* receiver */.{name}(..);"),
        },
        Receiver::Local => format!("/* receiver */.{name}(..);"),
    }
}

/// A zero-argument call on `this` in the same statement whose return type
/// covers the target's owner, as in `view().checkDamage()`.
fn getter_receiver<'a>(model: &'a SourceModel, call: &CallSite) -> Option<&'a str> {
    let owner = &model.meth(&call.static_target).owner;
    model.calls_from(&call.caller).iter().filter_map(|id| model.call(id)).find_map(|c| {
        if c.id == call.id || c.ordinal != call.ordinal || c.receiver != Receiver::This {
            return None;
        }
        let g = model.meth(&c.static_target);
        let ret = model.resolve_type(&g.return_type)?;
        (g.param_types.is_empty() && model.is_subtype(owner, &ret)).then_some(g.name.as_str())
    })
}

/// Builds one advice for `hits`. `scope` is the type the query was bound to.
pub(crate) fn cb_part(
    model: &SourceModel,
    hits: &[Hit],
    scope: Option<&TypeId>,
    opts: &PlanOptions,
) -> Result<Part, PlanError> {
    let calls: Vec<&CallSite> = hits
        .iter()
        .filter_map(|h| match h {
            Hit::Call { call, .. } => model.call(call),
            _ => None,
        })
        .collect();
    if calls.is_empty() {
        return Err(PlanError::EmptyResult("CB".into()));
    }
    let mut by_caller: BTreeMap<MethodId, BTreeSet<u32>> = BTreeMap::new();
    for c in &calls {
        by_caller.entry(c.caller.clone()).or_default().insert(c.ordinal);
    }
    let targets: BTreeSet<&MethodId> = calls.iter().map(|c| &c.static_target).collect();
    let callers: Vec<&MethodDecl> = by_caller.keys().map(|m| model.meth(m)).collect();
    let owners: BTreeSet<TypeId> = callers.iter().map(|m| m.owner.clone()).collect();
    let subject = scope.filter(|s| owners.iter().all(|o| model.is_subtype(o, s))).cloned().or_else(|| common_ancestor(model, &owners));
    let first = callers[0];
    let uniform = callers.iter().all(|m| m.name == first.name && same_params(m, first) && !m.is_constructor);
    let ret = if callers.iter().all(|m| m.return_type == first.return_type) { short(&first.return_type) } else { "*".into() };
    let this_ty = subject.as_ref().map_or_else(|| "Object".to_string(), |s| simple(model, s));
    let var = this_var(&this_ty);
    let mut part = Part::default();

    // Methods a generic pattern would match but that make no such call.
    let mut omissions: Vec<&MethodDecl> = Vec::new();
    let mut subtypes = false;
    if let (true, Some(s)) = (uniform, &subject) {
        subtypes = owners.iter().any(|o| o != s);
        omissions = model
            .methods()
            .filter(|m| m.name == first.name && same_params(m, first) && !m.is_abstract && !m.is_constructor)
            .filter(|m| !model.is_opaque(&m.owner))
            .filter(|m| &m.owner == s || (subtypes && model.is_subtype(&m.owner, s)))
            .filter(|m| !by_caller.contains_key(&m.id) && !targets.contains(&m.id))
            .collect();
    }
    let is_anon = |t: &TypeId| model.type_decl(t).is_some_and(|d| d.is_anonymous);

    let mut exclusions: BTreeSet<String> = BTreeSet::new();
    let mut generic = uniform && subject.is_some() && !opts.enumerate;
    if generic {
        let anon_tops: BTreeSet<TypeId> =
            omissions.iter().filter(|m| is_anon(&m.owner)).map(|m| top_level(model, &m.owner)).collect();
        for t in &anon_tops {
            exclusions.insert(format!("*..{}.*", simple(model, t)));
        }
        for m in omissions.iter().filter(|m| !is_anon(&m.owner)) {
            if !anon_tops.contains(&top_level(model, &m.owner)) {
                exclusions.insert(format!("*..{}", simple(model, &m.owner)));
            }
        }
        let clashing: Vec<String> = callers
            .iter()
            .filter(|c| anon_tops.contains(&top_level(model, &c.owner)))
            .map(|c| model.method_signature(&c.id))
            .collect();
        if !clashing.is_empty() {
            part.notes.push(format!(
                "anonymous-class exclusions would also drop advised callers ({}); pointcut enumerates callers instead",
                clashing.join(", ")
            ));
            generic = false;
            exclusions.clear();
        }
    }

    let params_of = |m: &MethodDecl| Params::List(shorts(&m.param_types));
    let selector = if generic {
        let s = subject.as_ref().expect("generic pointcut has a subject");
        let mut terms = vec![PointcutExpr::Execution(MethodPattern::new(&ret, &simple(model, s), subtypes, &first.name, params_of(first)))];
        terms.extend(exclusions.iter().map(|e| PointcutExpr::not(PointcutExpr::Within(e.clone()))));
        terms
    } else {
        let execs = callers
            .iter()
            .map(|m| {
                let ty = if is_anon(&m.owner) {
                    format!("*..{}.*", simple(model, &top_level(model, &m.owner)))
                } else {
                    simple(model, &m.owner)
                };
                let e = PointcutExpr::Execution(MethodPattern::new(&short(&m.return_type), &ty, false, &m.name, params_of(m)));
                (e.to_string(), e)
            })
            .collect::<BTreeMap<_, _>>()
            .into_values()
            .collect();
        vec![PointcutExpr::or(execs)]
    };
    let mut terms = vec![PointcutExpr::This(var.clone())];
    terms.extend(selector);
    let expr = PointcutExpr::and(terms);
    let pc_name = if uniform {
        format!("{}{}", lower_first(&first.name), if generic || subject.is_some() { this_ty.clone() } else { "Callers".into() })
    } else {
        format!("{}Callers", lower_first(&model.meth(&calls[0].static_target).name))
    };
    part.members.push(Member::Pointcut(PointcutDecl {
        name: pc_name.clone(),
        params: vec![(this_ty.clone(), var.clone())],
        expr,
    }));

    let (inferred, mid_body) = infer_kind(model, &by_caller);
    let kind = opts.advice.unwrap_or(inferred);
    if inferred == AdviceKind::Around {
        part.warnings.push(RiskWarning::new(
            RiskCode::Tangled,
            "crosscutting calls sit mid-body; the around advice needs manual untangling".into(),
            mid_body.iter().map(|m| model.method_signature(m)).collect(),
        ));
    }

    // One statement per distinct target, in body order.
    let mut firsts: BTreeMap<MethodId, &CallSite> = BTreeMap::new();
    for c in &calls {
        let slot = firsts.entry(c.static_target.clone()).or_insert(c);
        if c.ordinal < slot.ordinal {
            *slot = c;
        }
    }
    let mut ordered: Vec<&CallSite> = firsts.into_values().collect();
    ordered.sort_by_key(|c| (c.ordinal, model.method_signature(&c.static_target)));
    let n_sites = calls.len();
    let mut body = vec![format!("// {n_sites} call site{} moved here", if n_sites == 1 { "" } else { "s" })];
    let stmts: Vec<String> = ordered.iter().map(|c| statement(model, c, &var)).collect();
    let ret_ty = if ret == "*" { "Object".to_string() } else { ret.clone() };
    match kind {
        AdviceKind::Around => {
            body.extend(stmts);
            body.push(if ret_ty == "void" { format!("proceed({var});") } else { format!("return proceed({var});") });
        }
        _ => body.extend(stmts),
    }
    part.members.push(Member::Advice(Advice {
        kind,
        ret: (kind == AdviceKind::Around).then(|| ret_ty.clone()),
        params: vec![(this_ty.clone(), var.clone())],
        pointcut: PointcutExpr::Named { name: pc_name, args: vec![var.clone()] },
        body,
    }));

    // Catalog checks.
    let anon: BTreeSet<String> = callers
        .iter()
        .map(|m| &m.owner)
        .chain(omissions.iter().map(|m| &m.owner))
        .filter(|t| is_anon(t))
        .map(|t| model.type_name(t).to_string())
        .collect();
    if !anon.is_empty() {
        part.warnings.push(RiskWarning::new(
            RiskCode::AnonCallers,
            "anonymous classes cannot be named in a pointcut; they are matched or excluded through their enclosing type"
                .into(),
            anon.into_iter().collect(),
        ));
    }
    let supers: Vec<String> =
        calls.iter().filter(|c| c.receiver == Receiver::Super).map(|c| model.method_signature(&c.caller)).collect();
    if !supers.is_empty() {
        part.warnings.push(RiskWarning::new(
            RiskCode::SuperCall,
            "super calls cannot be reproduced in advice; the super body is inlined instead".into(),
            supers,
        ));
    }
    let mut hidden: BTreeSet<String> = BTreeSet::new();
    for c in &calls {
        let t = model.meth(&c.static_target);
        if t.visibility != Visibility::Public {
            hidden.insert(model.method_signature(&t.id));
        }
        if let Receiver::Field { field } = &c.receiver {
            if let Some(f) = model.field(field).filter(|f| f.visibility != Visibility::Public) {
                hidden.insert(format!("{}.{}", model.type_name(&f.owner), f.name));
            }
        }
    }
    if !hidden.is_empty() {
        part.privileged = true;
        part.warnings.push(RiskWarning::new(
            RiskCode::Encapsulation,
            "advice touches non-public members, so the aspect must be privileged".into(),
            hidden.into_iter().collect(),
        ));
    }
    if !omissions.is_empty() {
        let mut ev: Vec<String> = omissions.iter().map(|m| model.method_signature(&m.id)).collect();
        ev.sort();
        part.warnings.push(RiskWarning::new(
            RiskCode::OmissionCheck,
            "these methods match the pointcut pattern but make no such call; confirm the omission is intended".into(),
            ev,
        ));
    }

    let mut seen = BTreeSet::new();
    for c in &calls {
        if seen.insert(c.id.clone()) {
            part.edits.push(SourceEdit::new(
                EditKind::DeleteCallSite,
                c.id.as_str(),
                format!(
                    "delete call to {} at {}#{}",
                    model.method_signature(&c.static_target),
                    model.method_signature(&c.caller),
                    c.ordinal
                ),
            ));
        }
    }
    part.join_points = by_caller.keys().map(|m| format!("exec:{m}")).collect();
    Ok(part)
}
