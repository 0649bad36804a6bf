use std::collections::BTreeMap;

use super::{sorted_elements, Evidence, MiningConfig, Seed, Technique};
use crate::ids::{FieldId, MethodId, TypeId};
use crate::queries::SortKind;
use crate::source_model::{Receiver, SourceModel};

/// For each field of `ty`, the (redirecting method, receiver method) pairs
/// forwarding through it. A method forwards when its body calls a method of
/// the same name and arity on the field.
pub fn forwarding_pairs(model: &SourceModel, ty: &TypeId) -> BTreeMap<FieldId, Vec<(MethodId, MethodId)>> {
    let mut out: BTreeMap<FieldId, Vec<(MethodId, MethodId)>> = BTreeMap::new();
    for mid in model.methods_of(ty) {
        let m = model.meth(mid);
        if m.is_constructor {
            continue;
        }
        let mut seen = Vec::new();
        for cid in model.calls_from(mid) {
            let call = model.call(cid).expect("indexed call");
            let Receiver::Field { field } = &call.receiver else { continue };
            let target = model.meth(&call.static_target);
            if target.name == m.name && target.arity() == m.arity() && !seen.contains(field) {
                seen.push(field.clone());
                out.entry(field.clone()).or_default().push((mid.clone(), target.id.clone()));
            }
        }
    }
    out
}

/// Types whose methods consistently forward to same-named methods of one field.
pub fn find_redirectors(model: &SourceModel, config: &MiningConfig) -> Vec<Seed> {
    let mut rows = Vec::new();
    for t in model.types() {
        if t.is_external {
            continue;
        }
        let total = model.methods_of(&t.id).iter().filter(|m| !model.meth(m).is_constructor).count();
        if total == 0 {
            continue;
        }
        // Field with the most forwarding methods; lowest id on ties.
        let Some((field, pairs)) = forwarding_pairs(model, &t.id)
            .into_iter()
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then_with(|| b.0.cmp(&a.0)))
        else {
            continue;
        };
        let coverage = pairs.len() as f64 / total as f64;
        if pairs.len() < config.redirect_min_methods || coverage < config.redirect_coverage {
            continue;
        }
        let declared = &model.field(&field).expect("indexed field").declared_type;
        let receiver = model.resolve_type(declared).unwrap_or_else(|| model.meth(&pairs[0].1).owner.clone());
        rows.push((coverage, t.name.clone(), t.id.clone(), field, receiver, pairs));
    }
    rows.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    rows.into_iter()
        .enumerate()
        .map(|(i, (coverage, _, redirector, field, receiver, pairs))| {
            let elements = sorted_elements(
                [redirector.to_string(), field.to_string()]
                    .into_iter()
                    .chain(pairs.iter().flat_map(|(a, b)| [a.to_string(), b.to_string()])),
            );
            Seed {
                id: format!("redirect-{}", i + 1),
                sort_hint: SortKind::RL,
                elements,
                score: coverage,
                evidence: Evidence::Redirect { redirector, field, receiver, pairs, coverage },
                technique: Technique::RedirectionLayer,
                policy: config.policy,
            }
        })
        .collect()
}
