use std::collections::{BTreeMap, BTreeSet};

use super::{passes_filters, sorted_elements, Evidence, MiningConfig, Seed, Technique};
use crate::ids::{MethodId, TypeId};
use crate::queries::SortKind;
use crate::source_model::SourceModel;

/// Caller method → filtered set of lifted callees.
pub fn transactions(model: &SourceModel, config: &MiningConfig) -> BTreeMap<MethodId, BTreeSet<MethodId>> {
    let mut out: BTreeMap<MethodId, BTreeSet<MethodId>> = BTreeMap::new();
    for (caller, callee) in model.lifted_calls(config.policy) {
        if caller != callee && passes_filters(model, &callee, config) {
            out.entry(caller).or_default().insert(callee);
        }
    }
    out
}

/// Most specific type that is an ancestor of every caller's owner.
pub fn shared_ancestor(model: &SourceModel, callers: &BTreeSet<MethodId>) -> Option<TypeId> {
    let mut owners = callers.iter().map(|c| &model.meth(c).owner);
    let first = owners.next()?;
    let mut common: BTreeSet<TypeId> = model.ancestors(first).clone();
    for o in owners {
        let a = model.ancestors(o);
        common.retain(|t| a.contains(t));
    }
    common.into_iter().max_by(|a, b| {
        model.ancestors(a).len().cmp(&model.ancestors(b).len()).then_with(|| b.cmp(a))
    })
}

/// Closed callee sets shared by enough hierarchy-coherent callers.
pub fn grouped_calls_analysis(model: &SourceModel, config: &MiningConfig) -> Vec<Seed> {
    let tx = transactions(model, config);
    // Closed itemsets are exactly the intersections of nonempty transaction subsets.
    let mut closed: BTreeSet<BTreeSet<MethodId>> = BTreeSet::new();
    for t in tx.values() {
        if t.len() < config.grouped_min_group {
            continue;
        }
        let mut fresh: Vec<BTreeSet<MethodId>> = vec![t.clone()];
        for g in &closed {
            let i: BTreeSet<MethodId> = g.intersection(t).cloned().collect();
            if i.len() >= config.grouped_min_group {
                fresh.push(i);
            }
        }
        closed.extend(fresh);
    }

    let mut rows = Vec::new();
    for group in closed {
        let callers: BTreeSet<MethodId> =
            tx.iter().filter(|(_, t)| group.is_subset(t)).map(|(c, _)| c.clone()).collect();
        if callers.len() < config.grouped_min_callers {
            continue;
        }
        let Some(ancestor) = shared_ancestor(model, &callers) else { continue };
        let label: Vec<String> = group.iter().map(|m| model.method_signature(m)).collect();
        rows.push((group, callers, ancestor, label.join(" ")));
    }
    rows.sort_by(|a, b| {
        b.1.len().cmp(&a.1.len()).then_with(|| b.0.len().cmp(&a.0.len())).then_with(|| a.3.cmp(&b.3))
    });
    rows.into_iter()
        .enumerate()
        .map(|(i, (group, callers, ancestor, _))| {
            let score = callers.len() as f64;
            Seed {
                id: format!("grouped-{}", i + 1),
                sort_hint: SortKind::CB,
                elements: sorted_elements(group.iter().chain(callers.iter()).map(ToString::to_string)),
                score,
                evidence: Evidence::Grouped {
                    group: group.into_iter().collect(),
                    callers: callers.into_iter().collect(),
                    shared_ancestor: ancestor,
                },
                technique: Technique::GroupedCalls,
                policy: config.policy,
            }
        })
        .collect()
}
