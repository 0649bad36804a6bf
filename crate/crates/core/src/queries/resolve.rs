//! Resolution of textual type and method references.

use std::collections::BTreeSet;

use super::QueryError;
use crate::ids::{MethodId, TypeId};
use crate::source_model::{type_names_match, SourceModel};

pub fn resolve_type_ref(model: &SourceModel, text: &str) -> Result<TypeId, QueryError> {
    let text = text.trim();
    if let Some(t) = model.resolve_type(text) {
        return Ok(t);
    }
    let named = model.types_named(text);
    if named.len() > 1 {
        return Err(QueryError::Ambiguous {
            reference: text.to_string(),
            candidates: named.iter().map(|t| model.type_name(t).to_string()).collect(),
        });
    }
    Err(QueryError::UnknownType(text.to_string()))
}

/// Resolves `Type.name(P1,P2)`, `Type.name` or a bare `name`. A type-qualified
/// reference falls back to the nearest ancestors declaring the method.
pub fn resolve_method(model: &SourceModel, text: &str) -> Result<MethodId, QueryError> {
    let text = text.trim();
    let (head, params) = match text.split_once('(') {
        Some((h, rest)) => {
            let inner = rest.strip_suffix(')').ok_or_else(|| QueryError::UnknownMethod(text.to_string()))?;
            let params: Vec<String> =
                inner.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect();
            (h, Some(params))
        }
        None => (text, None),
    };
    let (owner, name) = match head.rsplit_once('.') {
        Some((o, n)) => (Some(o), n),
        None => (None, head),
    };
    let params_match = |m: &MethodId| {
        let decl = model.meth(m);
        decl.name == name
            && params.as_ref().is_none_or(|ps| {
                ps.len() == decl.param_types.len()
                    && ps.iter().zip(&decl.param_types).all(|(a, b)| type_names_match(a, b))
            })
    };

    let candidates: BTreeSet<MethodId> = match owner {
        None => model.methods().map(|m| m.id.clone()).filter(|m| params_match(m)).collect(),
        Some(o) => {
            let owners = match model.resolve_type(o) {
                Some(t) => vec![t],
                None => model.types_named(o),
            };
            if owners.is_empty() {
                return Err(QueryError::UnknownType(o.to_string()));
            }
            let mut found: BTreeSet<MethodId> = BTreeSet::new();
            for t in &owners {
                let own: Vec<MethodId> = model.methods_of(t).iter().filter(|m| params_match(m)).cloned().collect();
                if !own.is_empty() {
                    found.extend(own);
                    continue;
                }
                // Nearest declaring ancestors: those not shadowed by a more specific one.
                let inherited: Vec<MethodId> = model
                    .ancestors(t)
                    .iter()
                    .filter(|a| *a != t)
                    .flat_map(|a| model.methods_of(a).iter().filter(|m| params_match(m)).cloned())
                    .collect();
                let nearest = inherited.iter().filter(|m| {
                    !inherited.iter().any(|o| o != *m && model.overridden_by_method(o).contains(*m))
                });
                found.extend(nearest.cloned());
            }
            found
        }
    };
    match candidates.len() {
        0 => Err(QueryError::UnknownMethod(text.to_string())),
        1 => Ok(candidates.into_iter().next().expect("one candidate")),
        _ => Err(QueryError::Ambiguous {
            reference: text.to_string(),
            candidates: candidates.iter().map(|m| model.method_signature(m)).collect(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::extract_sources;

    fn model(src: &str) -> SourceModel {
        let (records, _) = extract_sources(&[("t".into(), src.into())]).unwrap();
        SourceModel::from_records(records).unwrap()
    }

    #[test]
    fn reference_forms() {
        let m = model(
            "package p;
             class A { void f() { } void f(int x) { } void g() { } }
             class B extends A { void h() { } }",
        );
        let sig = |r: &str| resolve_method(&m, r).map(|id| m.method_signature(&id));
        assert_eq!(sig("g").unwrap(), "p.A.g()");
        assert_eq!(sig("A.f(int)").unwrap(), "p.A.f(int)");
        assert_eq!(sig("p.A.f()").unwrap(), "p.A.f()");
        assert_eq!(sig("B.g").unwrap(), "p.A.g()");
        assert!(matches!(sig("f"), Err(QueryError::Ambiguous { .. })));
        assert!(matches!(sig("zz"), Err(QueryError::UnknownMethod(_))));
        assert!(matches!(sig("Q.f"), Err(QueryError::UnknownType(_))));
    }
}
