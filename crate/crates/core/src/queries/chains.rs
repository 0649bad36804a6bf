//! Maximal-chain enumeration shared by the expose-context and
//! exception-propagation queries.

use std::collections::{BTreeMap, BTreeSet};

use super::{is_context_type, Scope};
use crate::ids::{CallId, MethodId};
use crate::source_model::SourceModel;

/// Directed graph over `(method, parameter index)` nodes with call-site edges.
#[derive(Debug, Default, Clone)]
pub struct ChainGraph {
    pub nodes: Vec<(MethodId, usize)>,
    pub out: Vec<Vec<(CallId, usize)>>,
    pub inc: Vec<Vec<usize>>,
}

impl ChainGraph {
    fn from_parts(nodes: BTreeSet<(MethodId, usize)>, edges: BTreeSet<(usize, CallId, usize)>) -> Self {
        let nodes: Vec<(MethodId, usize)> = nodes.into_iter().collect();
        let mut g = ChainGraph { out: vec![Vec::new(); nodes.len()], inc: vec![Vec::new(); nodes.len()], nodes };
        for (a, call, b) in edges {
            g.out[a].push((call, b));
            g.inc[b].push(a);
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ChainPath {
    pub nodes: Vec<(MethodId, usize)>,
    pub edges: Vec<CallId>,
}

/// Context-passing graph: a node per parameter of type `context` on a method
/// in scope, an edge per call forwarding that parameter into another node.
pub fn ec_graph(model: &SourceModel, context: &str, scope: &Scope) -> ChainGraph {
    let mut nodes = BTreeSet::new();
    for m in model.methods() {
        if !scope.contains(model, &m.owner) {
            continue;
        }
        for (i, p) in m.param_types.iter().enumerate() {
            if is_context_type(p, context) {
                nodes.insert((m.id.clone(), i));
            }
        }
    }
    let index: BTreeMap<&(MethodId, usize), usize> = nodes.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let mut edges = BTreeSet::new();
    for (from, &a) in &index {
        for cid in model.calls_from(&from.0) {
            let call = model.call(cid).expect("indexed call");
            for &(arg, param) in &call.arg_passthrough {
                if param != from.1 {
                    continue;
                }
                if let Some(&b) = index.get(&(call.static_target.clone(), arg)) {
                    edges.insert((a, cid.clone(), b));
                }
            }
        }
    }
    ChainGraph::from_parts(nodes, edges)
}

/// Exception graph: methods declaring `exception`; an edge from a declarer
/// that does not raise it directly to each declarer it calls.
pub fn ep_graph(model: &SourceModel, exception: &str) -> ChainGraph {
    let declarers: BTreeSet<(MethodId, usize)> =
        model.methods().filter(|m| m.declares(exception)).map(|m| (m.id.clone(), 0)).collect();
    let index: BTreeMap<MethodId, usize> = declarers.iter().enumerate().map(|(i, (m, _))| (m.clone(), i)).collect();
    let mut edges = BTreeSet::new();
    let mut linked = BTreeSet::new();
    for (m, &a) in &index {
        if model.meth(m).raises_directly(exception) {
            continue;
        }
        for cid in model.calls_from(m) {
            let target = &model.call(cid).expect("indexed call").static_target;
            if let Some(&b) = index.get(target) {
                if a != b && linked.insert((a, b)) {
                    edges.insert((a, cid.clone(), b));
                }
            }
        }
    }
    ChainGraph::from_parts(declarers, edges)
}

/// All paths of at least two nodes, visiting each method once, that cannot
/// be extended at either end by an edge to a method not already on the path.
pub fn maximal_chains(g: &ChainGraph) -> Vec<ChainPath> {
    let mut out = Vec::new();
    for start in 0..g.nodes.len() {
        let mut nodes = vec![start];
        let mut edges = Vec::new();
        walk(g, &mut nodes, &mut edges, &mut out);
    }
    out.sort();
    out
}

fn walk(g: &ChainGraph, nodes: &mut Vec<usize>, edges: &mut Vec<CallId>, out: &mut Vec<ChainPath>) {
    let on_path = |n: usize, nodes: &[usize]| nodes.iter().any(|&x| g.nodes[x].0 == g.nodes[n].0);
    let last = *nodes.last().expect("nonempty path");
    let mut extended = false;
    for (call, next) in &g.out[last] {
        if on_path(*next, nodes) {
            continue;
        }
        extended = true;
        nodes.push(*next);
        edges.push(call.clone());
        walk(g, nodes, edges, out);
        nodes.pop();
        edges.pop();
    }
    if extended || nodes.len() < 2 {
        return;
    }
    if g.inc[nodes[0]].iter().any(|&p| !on_path(p, nodes)) {
        return;
    }
    out.push(ChainPath { nodes: nodes.iter().map(|&n| g.nodes[n].clone()).collect(), edges: edges.clone() });
}
