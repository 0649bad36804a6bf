//! Text renderings of core results.

use std::fmt::Write;

use sortweaver_core::concern_model::RunEntry;
use sortweaver_core::mining::Evidence;
use sortweaver_core::queries::Suggestion;
use sortweaver_core::{ConcernNode, QueryResult, RefactoringPlan, Seed, SourceModel};

pub fn seed_summary(model: &SourceModel, seed: &Seed) -> String {
    let sig = |m| model.method_signature(m);
    match &seed.evidence {
        Evidence::FanIn { method, fan_in, .. } => format!("{} (fan-in {fan_in})", sig(method)),
        Evidence::Grouped { group, callers, shared_ancestor } => format!(
            "{} ({} callers in {})",
            group.iter().map(sig).collect::<Vec<_>>().join(" + "),
            callers.len(),
            model.type_name(shared_ancestor)
        ),
        Evidence::Redirect { redirector, receiver, pairs, coverage, .. } => format!(
            "{} -> {} ({} forwarding methods, coverage {coverage:.2})",
            model.type_name(redirector),
            model.type_name(receiver),
            pairs.len()
        ),
    }
}

pub fn seeds(model: &SourceModel, seeds: &[Seed]) -> String {
    let mut out = String::new();
    if seeds.is_empty() {
        out.push_str("no seeds\n");
        return out;
    }
    let id_w = seeds.iter().map(|s| s.id.len()).max().unwrap_or(2).max(2);
    let _ = writeln!(out, "{:>4}  {:id_w$}  {:4}  {:>8}  element", "rank", "id", "sort", "score");
    for (i, s) in seeds.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:>4}  {:id_w$}  {:4}  {:>8.2}  {}",
            i + 1,
            s.id,
            s.sort_hint.as_str(),
            s.score,
            seed_summary(model, s)
        );
    }
    out
}

pub fn query(model: &SourceModel, r: &QueryResult) -> String {
    let mut out = String::new();
    let n = r.hits.len();
    let _ = writeln!(out, "{} [{}]: {n} hit{}", r.binding, r.policy, if n == 1 { "" } else { "s" });
    for h in &r.hits {
        let _ = writeln!(out, "  {}", h.describe(model));
    }
    out
}

pub fn suggestions(list: &[Suggestion]) -> String {
    let mut out = String::new();
    if list.is_empty() {
        out.push_str("no suggestions\n");
    }
    for (i, s) in list.iter().enumerate() {
        let _ = match s.coverage {
            Some((covered, total)) => writeln!(out, "{:>3}. {}  covers {covered}/{total} callers", i + 1, s.binding),
            None => writeln!(out, "{:>3}. {}", i + 1, s.binding),
        };
    }
    out
}

/// Warnings and notes of a plan, one per line.
pub fn plan_findings(p: &RefactoringPlan) -> String {
    let mut out = String::new();
    for w in &p.warnings {
        let _ = writeln!(out, "warning[{}] {:?}: {}", w.code, w.severity, w.message);
        for e in &w.evidence {
            let _ = writeln!(out, "    {e}");
        }
    }
    for n in &p.notes {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

pub fn tree(node: &ConcernNode) -> String {
    fn walk(node: &ConcernNode, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        match node {
            ConcernNode::Group { name, children } => {
                let _ = writeln!(out, "{pad}{name}/");
                for c in children {
                    walk(c, depth + 1, out);
                }
            }
            ConcernNode::Instance(i) => {
                let snap = i.snapshot.as_ref().map_or(String::new(), |s| format!("  [{} hits]", s.hits));
                let _ = writeln!(out, "{pad}{}: {}{snap}", i.name, i.binding);
            }
        }
    }
    let mut out = String::new();
    walk(node, 0, &mut out);
    out
}

pub fn run_entries(entries: &[RunEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let _ = match &e.outcome {
            Ok((r, d)) if d.is_clean() => writeln!(out, "{}  {}  {} hits  clean", e.path, r.sort, r.hits.len()),
            Ok((r, d)) => {
                let _ = writeln!(
                    out,
                    "{}  {}  {} hits  drift +{} -{}",
                    e.path,
                    r.sort,
                    r.hits.len(),
                    d.added.len(),
                    d.removed.len()
                );
                for a in &d.added {
                    let _ = writeln!(out, "    + {a}");
                }
                d.removed.iter().try_for_each(|r| writeln!(out, "    - {r}"))
            }
            Err(err) => writeln!(out, "{}  error: {err}", e.path),
        };
    }
    out
}
