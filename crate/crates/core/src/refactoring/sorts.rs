//! Plans for the redirection, context, role, support-class and exception sorts.

use std::collections::{BTreeMap, BTreeSet};

use super::aspect::{Advice, AdviceKind, Member, PointcutDecl};
use super::pointcut::{MethodPattern, Params, PointcutExpr};
use super::{short, shorts, simple, EditKind, Part, PlanError, RiskCode, RiskWarning, SourceEdit};
use crate::ids::{CallId, MethodId, TypeId};
use crate::queries::Hit;
use crate::source_model::{MethodDecl, Receiver, SourceModel, TypeKind, Visibility};

fn empty(sort: &str) -> PlanError {
    PlanError::EmptyResult(sort.into())
}

fn pattern_of(model: &SourceModel, m: &MethodDecl) -> MethodPattern {
    MethodPattern::new(&short(&m.return_type), &simple(model, &m.owner), false, &m.name, Params::List(shorts(&m.param_types)))
}

fn proceed_line(ret: &str, args: &str) -> String {
    if ret == "void" {
        format!("proceed({args});")
    } else {
        format!("return proceed({args});")
    }
}

pub(crate) fn rl_part(
    model: &SourceModel,
    hits: &[Hit],
    redirector: &TypeId,
    receiver: &TypeId,
) -> Result<Part, PlanError> {
    let pairs: BTreeSet<(MethodId, MethodId)> = hits
        .iter()
        .filter_map(|h| match h {
            Hit::Redirect { redirector_method, receiver_method, .. } => {
                Some((redirector_method.clone(), receiver_method.clone()))
            }
            _ => None,
        })
        .collect();
    if pairs.is_empty() {
        return Err(empty("RL"));
    }
    let mut part = Part::default();
    let redirecting: BTreeSet<&MethodId> = pairs.iter().map(|(r, _)| r).collect();
    let received: BTreeSet<&MethodId> = pairs.iter().map(|(_, x)| x).collect();

    // Clients reaching the receiver through the redirector.
    let in_redirector = |t: &TypeId| super::cb::top_level(model, t) == super::cb::top_level(model, redirector);
    let clients: BTreeSet<String> = redirecting
        .iter()
        .flat_map(|m| model.calls_to(m).iter())
        .filter_map(|c| model.call(c))
        .map(|c| &model.meth(&c.caller).owner)
        .filter(|t| !in_redirector(t))
        .map(|t| format!("*..{}", simple(model, &super::cb::top_level(model, t))))
        .collect();
    let filter = if clients.is_empty() {
        part.notes.push(format!("no client calls {} directly; the caller filter matches everything", model.type_name(redirector)));
        PointcutExpr::Within("*".into())
    } else {
        PointcutExpr::or(clients.into_iter().map(PointcutExpr::Within).collect())
    };
    part.members.push(Member::Pointcut(PointcutDecl { name: "filteredCallers".into(), params: vec![], expr: filter }));

    for (r, x) in &pairs {
        let xm = model.meth(x);
        part.members.push(Member::Advice(Advice {
            kind: AdviceKind::Around,
            ret: Some(short(&xm.return_type)),
            params: vec![],
            pointcut: PointcutExpr::and(vec![
                PointcutExpr::Call(pattern_of(model, xm)),
                PointcutExpr::Named { name: "filteredCallers".into(), args: vec![] },
            ]),
            body: vec![
                format!("// addBehavior1 from {}", model.method_signature(r)),
                proceed_line(&xm.return_type, ""),
                "// addBehavior2".into(),
            ],
        }));
        part.join_points.insert(format!("call-target:{x}"));
    }
    part.edits.push(SourceEdit::new(
        EditKind::ReplaceTypeRemoval,
        redirector.as_str(),
        format!("remove redirector {}; the aspect replaces it", model.type_name(redirector)),
    ));

    let extra: Vec<String> = model
        .methods_of(redirector)
        .iter()
        .map(|m| model.meth(m))
        .filter(|m| !m.is_constructor && !redirecting.contains(&m.id))
        .map(|m| model.method_signature(&m.id))
        .collect();
    if !extra.is_empty() {
        part.warnings.push(RiskWarning::new(
            RiskCode::RedirExtraRoles,
            format!("{} has members beyond the redirection, which the aspect cannot carry over", model.type_name(redirector)),
            extra,
        ));
    }

    let reached: BTreeSet<MethodId> = received
        .iter()
        .flat_map(|x| std::iter::once((*x).clone()).chain(model.overriders_of(x).iter().cloned()))
        .filter(|m| &model.meth(m).owner != redirector)
        .collect();
    let direct: Vec<String> = model
        .calls()
        .filter(|c| reached.contains(&c.static_target) && !in_redirector(&model.meth(&c.caller).owner))
        .map(|c| format!("{} ({}#{} -> {})", c.id, model.method_signature(&c.caller), c.ordinal, model.method_signature(&c.static_target)))
        .collect();
    if !direct.is_empty() {
        part.warnings.push(RiskWarning::new(
            RiskCode::RedirClients,
            "some clients call the receiver directly; the advice must filter them out".into(),
            direct,
        ));
    }

    let covered: BTreeSet<(String, usize)> =
        received.iter().map(|x| model.meth(x)).map(|m| (m.name.clone(), m.arity())).collect();
    let uncovered: Vec<String> = model
        .ancestors(receiver)
        .iter()
        .filter(|t| !model.is_opaque(t))
        .flat_map(|t| model.methods_of(t).iter())
        .map(|m| model.meth(m))
        .filter(|m| !m.is_constructor && !m.is_static && !covered.contains(&(m.name.clone(), m.arity())))
        .map(|m| model.method_signature(&m.id))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if !uncovered.is_empty() {
        part.warnings.push(RiskWarning::new(
            RiskCode::RedirNewMethods,
            "receiver methods without a redirection are not covered; new ones will not be either".into(),
            uncovered,
        ));
    }
    Ok(part)
}

pub(crate) fn ec_part(model: &SourceModel, hits: &[Hit]) -> Result<Part, PlanError> {
    let chains: Vec<&Vec<crate::queries::ContextLink>> = hits
        .iter()
        .filter_map(|h| match h {
            Hit::Context { links } if !links.is_empty() => Some(links),
            _ => None,
        })
        .collect();
    if chains.is_empty() {
        return Err(empty("EC"));
    }
    let mut part = Part::default();
    let mut groups: BTreeMap<(MethodId, usize), Vec<&Vec<crate::queries::ContextLink>>> = BTreeMap::new();
    for c in &chains {
        groups.entry((c[0].method.clone(), c[0].param)).or_default().push(c);
    }
    let many = groups.len() > 1;
    for (gi, ((head, param), group)) in groups.iter().enumerate() {
        let suffix = if many { (gi + 1).to_string() } else { String::new() };
        let hm = model.meth(head);
        let ctx_ty = short(&hm.param_types[*param]);
        let args: Vec<String> =
            (0..hm.arity()).map(|i| if i == *param { "ctx".to_string() } else { "*".to_string() }).collect();
        let caller_space = format!("callerSpace{suffix}");
        let callee_space = format!("calleeSpace{suffix}");
        part.members.push(Member::Pointcut(PointcutDecl {
            name: caller_space.clone(),
            params: vec![(ctx_ty.clone(), "ctx".into())],
            expr: PointcutExpr::and(vec![PointcutExpr::Execution(pattern_of(model, hm)), PointcutExpr::Args(args)]),
        }));
        let tails: BTreeSet<&MethodId> = group.iter().map(|c| &c.last().expect("nonempty chain").method).collect();
        let tail_terms: BTreeMap<String, PointcutExpr> = tails
            .iter()
            .map(|t| {
                let e = PointcutExpr::Execution(pattern_of(model, model.meth(t)));
                (e.to_string(), e)
            })
            .collect();
        part.members.push(Member::Pointcut(PointcutDecl {
            name: callee_space.clone(),
            params: vec![],
            expr: PointcutExpr::or(tail_terms.into_values().collect()),
        }));
        part.members.push(Member::Advice(Advice {
            kind: AdviceKind::Around,
            ret: Some("Object".into()),
            params: vec![(ctx_ty.clone(), "ctx".into())],
            pointcut: PointcutExpr::and(vec![
                PointcutExpr::Cflow(Box::new(PointcutExpr::Named { name: caller_space, args: vec!["ctx".into()] })),
                PointcutExpr::Named { name: callee_space, args: vec![] },
            ]),
            body: vec![
                format!("// {ctx_ty} from {} is available here", model.method_signature(head)),
                "return proceed(ctx);".into(),
            ],
        }));
        part.join_points.extend(tails.iter().map(|t| format!("exec:{t}")));
    }

    let mut dropped_params: BTreeSet<(MethodId, usize)> = BTreeSet::new();
    let mut dropped_args: BTreeSet<(CallId, usize)> = BTreeSet::new();
    for links in &chains {
        for i in 1..links.len().saturating_sub(1) {
            dropped_params.insert((links[i].method.clone(), links[i].param));
            if let Some(call) = &links[i - 1].call {
                dropped_args.insert((call.clone(), links[i].param));
            }
        }
    }
    if dropped_params.is_empty() {
        part.notes.push("no chain has methods between head and tail; no signature changes".into());
    }
    for (m, p) in &dropped_params {
        part.edits.push(
            SourceEdit::new(
                EditKind::DeleteParameter,
                m.as_str(),
                format!("drop pass-through parameter {p} of {}", model.method_signature(m)),
            )
            .with_index(*p),
        );
    }
    for (c, a) in &dropped_args {
        let site = model.call(c).expect("chain call");
        part.edits.push(
            SourceEdit::new(
                EditKind::DeleteArgument,
                c.as_str(),
                format!("drop argument {a} from the call in {}#{}", model.method_signature(&site.caller), site.ordinal),
            )
            .with_index(*a),
        );
    }
    Ok(part)
}

pub(crate) fn rsi_part(model: &SourceModel, hits: &[Hit], role: &TypeId) -> Result<Part, PlanError> {
    if hits.is_empty() {
        return Err(empty("RSI"));
    }
    let mut part = Part::default();
    let role_simple = simple(model, role);
    let role_ancestors = model.ancestors(role);
    for h in hits {
        let Hit::Role { ty, member } = h else { continue };
        let Some(m) = member else {
            part.members.push(Member::DeclareParents { ty: simple(model, ty), role: role_simple.clone() });
            continue;
        };
        let md = model.meth(m);
        let params: Vec<String> = md.param_types.iter().enumerate().map(|(i, t)| format!("{} p{i}", short(t))).collect();
        part.members.push(Member::Block {
            header: format!("public {} {}.{}({})", short(&md.return_type), simple(model, ty), md.name, params.join(", ")),
            body: vec![format!("// original implementation of {}", model.method_signature(m))],
        });
        part.edits.push(SourceEdit::new(
            EditKind::MoveMemberToAspect,
            m.as_str(),
            format!("move {} into the aspect as an introduction", model.method_signature(m)),
        ));
        if md.visibility != Visibility::Public {
            part.warnings.push(RiskWarning::new(
                RiskCode::VisibilityChange,
                format!(
                    "{} is {} but introductions cannot be; it becomes public",
                    model.method_signature(m),
                    md.visibility.keyword()
                ),
                vec![model.method_signature(m)],
            ));
        }
        let clashes: Vec<String> = model
            .overridden_by_method(m)
            .iter()
            .filter(|o| !role_ancestors.contains(&model.meth(o).owner))
            .map(|o| model.method_signature(o))
            .collect();
        if !clashes.is_empty() {
            let mut ev = vec![model.method_signature(m)];
            ev.extend(clashes);
            part.warnings.push(RiskWarning::new(
                RiskCode::IntroConflict,
                format!("{} also overrides a member outside the role; the introduction would clash", model.method_signature(m)),
                ev,
            ));
        }
    }
    Ok(part)
}

pub(crate) fn sc_part(model: &SourceModel, hits: &[Hit]) -> Result<Part, PlanError> {
    let pairs: Vec<(&TypeId, &TypeId)> = hits
        .iter()
        .filter_map(|h| match h {
            Hit::Support { enclosing, nested } => Some((enclosing, nested)),
            _ => None,
        })
        .collect();
    if pairs.is_empty() {
        return Err(empty("SC"));
    }
    let mut part = Part::default();
    for (enclosing, nested) in &pairs {
        let nd = model.ty(nested);
        let mut header = format!("public static class {}", nd.simple_name());
        let (ifaces, classes): (Vec<&TypeId>, Vec<&TypeId>) = nd
            .supertypes
            .iter()
            .partition(|s| model.type_decl(s).is_some_and(|d| d.kind == TypeKind::Interface));
        if !classes.is_empty() {
            header.push_str(&format!(" extends {}", classes.iter().map(|t| simple(model, t)).collect::<Vec<_>>().join(", ")));
        }
        if !ifaces.is_empty() {
            header.push_str(&format!(" implements {}", ifaces.iter().map(|t| simple(model, t)).collect::<Vec<_>>().join(", ")));
        }
        let mut body = vec![format!("// moved from {}", model.type_name(enclosing))];
        for m in model.methods_of(nested) {
            let md = model.meth(m);
            let ret = if md.is_constructor { String::new() } else { format!("{} ", short(&md.return_type)) };
            body.push(format!("{} {ret}{}({});", md.visibility.keyword(), md.name, shorts(&md.param_types).join(", ")).trim_start().to_string());
        }
        part.members.push(Member::Block { header, body });
        part.edits.push(SourceEdit::new(
            EditKind::MoveNestedClassToAspect,
            nested.as_str(),
            format!("move {} out of {} into the aspect", model.type_name(nested), model.type_name(enclosing)),
        ));

        let mut deps: BTreeSet<String> = BTreeSet::new();
        let inner: Vec<&TypeId> = model.types().filter(|t| top_within(model, &t.id, nested)).map(|t| &t.id).collect();
        for t in inner {
            for m in model.methods_of(t) {
                for cid in model.calls_from(m) {
                    let c = model.call(cid).expect("indexed call");
                    let target = model.meth(&c.static_target);
                    if &target.owner == *enclosing && target.visibility == Visibility::Private {
                        deps.insert(model.method_signature(&target.id));
                    }
                    if let Receiver::Field { field } = &c.receiver {
                        if let Some(f) = model.field(field) {
                            if &f.owner == *enclosing && f.visibility == Visibility::Private {
                                deps.insert(format!("{}.{}", model.type_name(&f.owner), f.name));
                            }
                        }
                    }
                }
            }
        }
        if !deps.is_empty() {
            part.warnings.push(RiskWarning::new(
                RiskCode::ScBrokenDeps,
                format!(
                    "{} uses private members of {}, which must be opened up once the class moves",
                    model.type_name(nested),
                    model.type_name(enclosing)
                ),
                deps.into_iter().collect(),
            ));
        }
    }
    part.warnings.push(RiskWarning::new(
        RiskCode::ScNotIntroducible,
        "nested classes cannot be introduced; they are moved into the aspect instead".into(),
        pairs.iter().map(|(_, n)| model.type_name(n).to_string()).collect(),
    ));
    Ok(part)
}

/// Whether `t` is `root` or nested (at any depth) inside it.
fn top_within(model: &SourceModel, t: &TypeId, root: &TypeId) -> bool {
    let mut cur = Some(t.clone());
    while let Some(c) = cur {
        if &c == root {
            return true;
        }
        cur = model.type_decl(&c).and_then(|d| d.enclosing.clone());
    }
    false
}

pub(crate) fn ep_part(model: &SourceModel, hits: &[Hit], exception: &str) -> Result<Part, PlanError> {
    let chains: Vec<&Vec<MethodId>> = hits
        .iter()
        .filter_map(|h| match h {
            Hit::Exception { chain } if !chain.is_empty() => Some(chain),
            _ => None,
        })
        .collect();
    if chains.is_empty() {
        return Err(empty("EP"));
    }
    let mut part = Part::default();
    let roots: BTreeSet<&MethodId> = chains.iter().map(|c| c.last().expect("nonempty")).collect();
    let heads: BTreeSet<&MethodId> = chains.iter().map(|c| &c[0]).collect();
    let members: BTreeSet<&MethodId> = chains.iter().flat_map(|c| c.iter()).collect();
    let exc_simple = crate::source_model::simple_name(exception).to_string();

    let mut softened = BTreeMap::new();
    for r in &roots {
        let rm = model.meth(r);
        let mut p = MethodPattern::new("*", &simple(model, &rm.owner), false, &rm.name, Params::Any);
        p.throws = Some(exc_simple.clone());
        let e = PointcutExpr::Call(p);
        softened.insert(e.to_string(), e);
    }
    for pointcut in softened.into_values() {
        part.members.push(Member::DeclareSoft { exception: exc_simple.clone(), pointcut });
    }

    let mut stripped = BTreeSet::new();
    for c in &chains {
        if c.len() == 1 {
            part.notes.push(format!("chain of a single method ({}); no throws clauses change", model.method_signature(&c[0])));
        }
        for m in &c[..c.len() - 1] {
            if stripped.insert(m.clone()) {
                part.edits.push(
                    SourceEdit::new(
                        EditKind::DeleteThrowsClause,
                        m.as_str(),
                        format!("remove `throws {exception}` from {}", model.method_signature(m)),
                    )
                    .with_exception(exception),
                );
            }
        }
    }

    for h in &heads {
        let catchers: BTreeSet<String> = model
            .calls_to(h)
            .iter()
            .filter_map(|c| model.call(c))
            .map(|c| model.meth(&c.caller))
            .filter(|m| !m.declares(exception))
            .map(|m| model.method_signature(&m.id))
            .collect();
        if catchers.is_empty() {
            part.notes.push(format!("catch SoftException wherever {} is invoked", model.method_signature(h)));
        }
        for c in catchers {
            let note = format!("catch SoftException in {c} and unwrap the {exc_simple}");
            part.members.push(Member::Comment(note.clone()));
            part.notes.push(note);
        }
    }

    part.warnings.push(RiskWarning::new(
        RiskCode::EpTypeLost,
        format!("callers no longer see {exc_simple} in signatures; it arrives wrapped in SoftException"),
        vec![exception.to_string()],
    ));
    let related: BTreeSet<String> = members
        .iter()
        .flat_map(|m| model.overriders_of(m).iter().chain(model.overridden_by_method(m).iter()))
        .filter(|o| !members.contains(o) && model.meth(o).declares(exception))
        .map(|o| model.method_signature(o))
        .collect();
    if !related.is_empty() {
        part.warnings.push(RiskWarning::new(
            RiskCode::EpOverrides,
            format!("overriding or overridden methods outside the chain also declare {exc_simple}"),
            related.into_iter().collect(),
        ));
    }
    Ok(part)
}
