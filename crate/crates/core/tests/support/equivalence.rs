//! Whole-model comparisons of the queries and miners against the oracles.

use std::collections::BTreeSet;

use super::{grouped_oracle, random_records, OScope, Raw, MEDIUM, SMALL};
use sortweaver_core::mining::{self, MiningConfig};
use sortweaver_core::queries::{self, Scope};
use sortweaver_core::{DispatchPolicy, Hit, MethodId, SourceModel, TypeId};

pub const POLICIES: [DispatchPolicy; 3] =
    [DispatchPolicy::StaticOnly, DispatchPolicy::LiftToAncestors, DispatchPolicy::LiftBoth];

fn scopes(raw: &Raw) -> Vec<(OScope, Scope)> {
    let mut out = vec![(OScope::All, Scope::All)];
    for p in super::PACKAGES {
        out.push((OScope::Package(p.into()), Scope::Package(p.into())));
    }
    for t in raw.types.iter().step_by(3) {
        out.push((OScope::Type(t.id.clone()), Scope::Type(TypeId::new(t.id.clone()))));
    }
    out
}

/// Compares every query and fan-in value against the oracles; returns the
/// first disagreement.
pub fn check_model(seed: u64) -> Result<(), String> {
    let records = random_records(seed, MEDIUM);
    let raw = Raw::new(&records);
    let model = SourceModel::from_records(records).map_err(|e| format!("seed {seed}: invalid facts: {e}"))?;
    let scopes = scopes(&raw);

    for policy in POLICIES {
        let sets = mining::caller_sets(&model, policy);
        for m in &raw.methods {
            let got = sets.get(&MethodId::new(m.id.clone())).map_or(0, |s| s.len());
            let want = raw.fan_in(&m.id, policy);
            if got != want {
                return Err(format!("seed {seed}: fan_in({}) under {policy:?}: {got} != {want}", m.id));
            }
        }
        for m in raw.methods.iter().step_by(2) {
            for (os, s) in &scopes {
                let got: BTreeSet<String> = queries::query_cb(&model, &MethodId::new(m.id.clone()), s, policy)
                    .into_iter()
                    .map(|h| match h {
                        Hit::Call { call, .. } => call.to_string(),
                        other => panic!("CB produced {other:?}"),
                    })
                    .collect();
                if got != raw.cb(&m.id, os, policy) {
                    return Err(format!("seed {seed}: CB({}, {os:?}) under {policy:?}", m.id));
                }
            }
        }
    }

    for r in &raw.types {
        for x in &raw.types {
            let got: BTreeSet<(String, String, String)> =
                queries::query_rl(&model, &TypeId::new(r.id.clone()), &TypeId::new(x.id.clone()))
                    .into_iter()
                    .map(|h| match h {
                        Hit::Redirect { redirector_method, receiver_method, call } => {
                            (redirector_method.to_string(), receiver_method.to_string(), call.to_string())
                        }
                        other => panic!("RL produced {other:?}"),
                    })
                    .collect();
            if got != raw.rl(&r.id, &x.id) {
                return Err(format!("seed {seed}: RL({}, {})", r.id, x.id));
            }
        }
    }

    for (os, s) in &scopes {
        for role in &raw.types {
            let got: BTreeSet<(String, Option<String>)> = queries::query_rsi(&model, &TypeId::new(role.id.clone()), s)
                .into_iter()
                .map(|h| match h {
                    Hit::Role { ty, member } => (ty.to_string(), member.map(|m| m.to_string())),
                    other => panic!("RSI produced {other:?}"),
                })
                .collect();
            if got != raw.rsi(&role.id, os) {
                return Err(format!("seed {seed}: RSI({}, {os:?})", role.id));
            }
        }
        let roles: Vec<Option<&str>> =
            std::iter::once(None).chain(raw.types.iter().take(4).map(|t| Some(t.id.as_str()))).collect();
        for role in roles {
            let rid = role.map(|r| TypeId::new(r.to_string()));
            let got: BTreeSet<(String, String)> = queries::query_sc(&model, s, rid.as_ref())
                .into_iter()
                .map(|h| match h {
                    Hit::Support { enclosing, nested } => (enclosing.to_string(), nested.to_string()),
                    other => panic!("SC produced {other:?}"),
                })
                .collect();
            if got != raw.sc(os, role) {
                return Err(format!("seed {seed}: SC({os:?}, {role:?})"));
            }
        }
        for ctx in ["Ctx", "p0.Ctx"] {
            let got: BTreeSet<(Vec<(String, usize)>, Vec<String>)> = queries::query_ec(&model, ctx, s)
                .into_iter()
                .map(|h| match h {
                    Hit::Context { links } => (
                        links.iter().map(|l| (l.method.to_string(), l.param)).collect(),
                        links.iter().filter_map(|l| l.call.as_ref().map(|c| c.to_string())).collect(),
                    ),
                    other => panic!("EC produced {other:?}"),
                })
                .collect();
            if got != raw.ec(ctx, os) {
                return Err(format!("seed {seed}: EC({ctx}, {os:?})"));
            }
        }
    }

    let got: BTreeSet<Vec<String>> = queries::query_ep(&model, "E", None)
        .into_iter()
        .map(|h| match h {
            Hit::Exception { chain } => chain.iter().map(|m| m.to_string()).collect(),
            other => panic!("EP produced {other:?}"),
        })
        .collect();
    if got != raw.ep("E") {
        return Err(format!("seed {seed}: EP(E)"));
    }
    Ok(())
}

/// Grouped-calls mining against subset enumeration on a small model.
pub fn check_grouped(seed: u64) -> Result<(), String> {
    let records = random_records(seed, SMALL);
    let raw = Raw::new(&records);
    let model = SourceModel::from_records(records).map_err(|e| format!("seed {seed}: invalid facts: {e}"))?;
    for policy in POLICIES {
        let cfg = MiningConfig {
            accessor_filter: false,
            grouped_min_callers: 2,
            grouped_min_group: 2,
            policy,
            ..MiningConfig::default()
        };
        let mut got = BTreeSet::new();
        for s in mining::grouped_calls_analysis(&model, &cfg) {
            let mining::Evidence::Grouped { group, callers, shared_ancestor } = s.evidence else {
                return Err(format!("seed {seed}: grouped seed with other evidence"));
            };
            let group: BTreeSet<String> = group.iter().map(|m| m.to_string()).collect();
            let callers: BTreeSet<String> = callers.iter().map(|m| m.to_string()).collect();
            // The reported ancestor is shared and has no shared strict subtype.
            let owners: Vec<String> = callers.iter().map(|c| raw.me(c).owner.clone()).collect();
            let shared: Vec<String> = raw
                .types
                .iter()
                .map(|t| t.id.clone())
                .filter(|t| owners.iter().all(|o| raw.supers(o).contains(t)))
                .collect();
            let anc = shared_ancestor.to_string();
            if raw.types.iter().any(|t| t.id == anc) {
                if !shared.contains(&anc) || shared.iter().any(|t| t != &anc && raw.supers(t).contains(&anc)) {
                    return Err(format!("seed {seed}: ancestor {anc} is not the most specific shared type"));
                }
            }
            got.insert((group, callers));
        }
        let want = grouped_oracle(&raw, policy, 2, 2);
        if got != want {
            return Err(format!("seed {seed}: grouped calls under {policy:?}: {got:?} != {want:?}"));
        }
    }
    Ok(())
}

