//! Seed expansion: from a mining seed to candidate query bindings.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use super::QueryBinding;
use crate::ids::{MethodId, TypeId};
use crate::mining::{Evidence, Seed};
use crate::source_model::SourceModel;

/// Smallest fraction of a seed's callers a suggested CB scope must cover.
pub const EXPAND_MIN_COVERAGE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub binding: QueryBinding,
    /// `(covered, total)` callers for CB scope suggestions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<(usize, usize)>,
}

pub fn expand_seed(model: &SourceModel, seed: &Seed) -> Vec<Suggestion> {
    match &seed.evidence {
        Evidence::FanIn { method, callers, .. } => cb_scopes(model, method, callers),
        Evidence::Grouped { group, shared_ancestor, .. } => group
            .iter()
            .map(|m| Suggestion {
                binding: QueryBinding::CB {
                    target: model.method_signature(m),
                    scope: model.type_name(shared_ancestor).to_string(),
                },
                coverage: None,
            })
            .collect(),
        Evidence::Redirect { redirector, receiver, .. } => vec![Suggestion {
            binding: QueryBinding::RL {
                redirector: model.type_name(redirector).to_string(),
                receiver: model.type_name(receiver).to_string(),
            },
            coverage: None,
        }],
    }
}

/// Minimal ancestor types covering enough of the callers, then `*`.
fn cb_scopes(model: &SourceModel, target: &MethodId, callers: &[MethodId]) -> Vec<Suggestion> {
    let total = callers.len();
    let owners: Vec<&TypeId> = callers.iter().map(|c| &model.meth(c).owner).collect();
    let candidates: BTreeSet<&TypeId> =
        owners.iter().flat_map(|o| model.ancestors(o).iter()).filter(|t| !model.is_opaque(t)).collect();
    let coverage = |t: &TypeId| owners.iter().filter(|o| model.is_subtype(o, t)).count();
    let qualifying: Vec<(&TypeId, usize)> = candidates
        .into_iter()
        .map(|t| (t, coverage(t)))
        .filter(|&(_, n)| n >= 2 && n as f64 >= EXPAND_MIN_COVERAGE * total as f64)
        .collect();
    let mut minimal: Vec<(&TypeId, usize)> = qualifying
        .iter()
        .filter(|(t, n)| !qualifying.iter().any(|(d, m)| d != t && m == n && model.is_subtype(d, t)))
        .cloned()
        .collect();
    minimal.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| model.type_name(a.0).cmp(model.type_name(b.0))));
    let sig = model.method_signature(target);
    minimal
        .into_iter()
        .map(|(t, n)| Suggestion {
            binding: QueryBinding::CB { target: sig.clone(), scope: model.type_name(t).to_string() },
            coverage: Some((n, total)),
        })
        .chain(std::iter::once(Suggestion {
            binding: QueryBinding::CB { target: sig.clone(), scope: "*".to_string() },
            coverage: Some((total, total)),
        }))
        .collect()
}
