//! Persistent hierarchy of concern groups and sort instances.
//!
//! Instances store their query binding plus an optional snapshot of the last
//! committed result, so re-running the model reports drift. The file format
//! is pretty-printed JSON with sorted keys.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::path::Path;
use thiserror::Error;

use crate::queries::{execute, QueryBinding, QueryError, QueryResult};
use crate::source_model::{DispatchPolicy, SourceModel};

/// Version of the concern model file format.
pub const CONCERN_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConcernError {
    #[error("`{name}` already exists in `{parent}`")]
    Duplicate { parent: String, name: String },
    #[error("no concern at path `{0}`")]
    MissingPath(String),
    #[error("`{0}` is not a group")]
    NotAGroup(String),
    #[error("invalid concern name `{0}`: names must be nonempty and contain no `/`")]
    InvalidName(String),
    #[error("cannot read or write concern model: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed concern model: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Query(#[from] QueryError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub digest: String,
    pub hits: usize,
    /// Stable hit keys, sorted; lets drift name what changed.
    #[serde(default)]
    pub members: Vec<String>,
}

impl Snapshot {
    pub fn of_keys(keys: &[String]) -> Snapshot {
        let members: Vec<String> = keys.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        Snapshot { digest: digest(&members), hits: members.len(), members }
    }

    pub fn of_result(model: &SourceModel, result: &QueryResult) -> Snapshot {
        Snapshot::of_keys(&result.keys(model))
    }
}

fn digest(sorted: &[String]) -> String {
    let mut h = Sha256::new();
    for k in sorted {
        h.update(k.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    #[serde(flatten)]
    pub binding: QueryBinding,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<Snapshot>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConcernNode {
    Group { name: String, children: Vec<ConcernNode> },
    Instance(Instance),
}

impl ConcernNode {
    pub fn name(&self) -> &str {
        match self {
            ConcernNode::Group { name, .. } => name,
            ConcernNode::Instance(i) => &i.name,
        }
    }

    fn set_name(&mut self, new: String) {
        match self {
            ConcernNode::Group { name, .. } => *name = new,
            ConcernNode::Instance(i) => i.name = new,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcernModel {
    pub root: ConcernNode,
}

impl Default for ConcernModel {
    fn default() -> Self {
        ConcernModel::new("concerns")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriftReport {
    pub path: String,
    pub added: Vec<String>,
    pub removed: Vec<String>,
    pub unchanged: usize,
}

impl DriftReport {
    pub fn between(path: &str, old: Option<&Snapshot>, new: &Snapshot) -> DriftReport {
        let before: BTreeSet<&String> = old.map(|s| s.members.iter().collect()).unwrap_or_default();
        let after: BTreeSet<&String> = new.members.iter().collect();
        DriftReport {
            path: path.to_string(),
            added: after.difference(&before).map(|s| (*s).clone()).collect(),
            removed: before.difference(&after).map(|s| (*s).clone()).collect(),
            unchanged: after.intersection(&before).count(),
        }
    }

    pub fn is_clean(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct RunEntry {
    pub path: String,
    pub outcome: Result<(QueryResult, DriftReport), QueryError>,
}

fn split_path(path: &str) -> Vec<&str> {
    path.split('/').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn check_name(name: &str) -> Result<(), ConcernError> {
    if name.trim().is_empty() || name.contains('/') {
        return Err(ConcernError::InvalidName(name.to_string()));
    }
    Ok(())
}

impl ConcernModel {
    pub fn new(name: &str) -> Self {
        ConcernModel { root: ConcernNode::Group { name: name.to_string(), children: Vec::new() } }
    }

    pub fn from_json(text: &str) -> Result<Self, ConcernError> {
        let root: ConcernNode = serde_json::from_str(text)?;
        if !matches!(root, ConcernNode::Group { .. }) {
            return Err(ConcernError::NotAGroup("/".to_string()));
        }
        Ok(ConcernModel { root })
    }

    /// Canonical text: sorted keys, two-space indent, trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(&self.root).expect("concern nodes serialize");
        let mut s = serde_json::to_string_pretty(&value).expect("values serialize");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self, ConcernError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Loads `path`, or starts an empty model when the file does not exist.
    pub fn load_or_new(path: &Path) -> Result<Self, ConcernError> {
        if path.exists() {
            Self::load(path)
        } else {
            Ok(Self::default())
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), ConcernError> {
        std::fs::write(path, self.to_canonical_json())?;
        Ok(())
    }

    pub fn node(&self, path: &str) -> Option<&ConcernNode> {
        let mut cur = &self.root;
        for part in split_path(path) {
            let ConcernNode::Group { children, .. } = cur else { return None };
            cur = children.iter().find(|c| c.name() == part)?;
        }
        Some(cur)
    }

    fn node_mut(&mut self, path: &str) -> Option<&mut ConcernNode> {
        let mut cur = &mut self.root;
        for part in split_path(path) {
            let ConcernNode::Group { children, .. } = cur else { return None };
            cur = children.iter_mut().find(|c| c.name() == part)?;
        }
        Some(cur)
    }

    fn group_children_mut(&mut self, path: &str) -> Result<&mut Vec<ConcernNode>, ConcernError> {
        match self.node_mut(path) {
            Some(ConcernNode::Group { children, .. }) => Ok(children),
            Some(_) => Err(ConcernError::NotAGroup(path.to_string())),
            None => Err(ConcernError::MissingPath(path.to_string())),
        }
    }

    fn insert(&mut self, parent: &str, node: ConcernNode) -> Result<(), ConcernError> {
        check_name(node.name())?;
        let children = self.group_children_mut(parent)?;
        if children.iter().any(|c| c.name() == node.name()) {
            return Err(ConcernError::Duplicate { parent: parent.to_string(), name: node.name().to_string() });
        }
        children.push(node);
        Ok(())
    }

    pub fn add_group(&mut self, parent: &str, name: &str) -> Result<(), ConcernError> {
        self.insert(parent, ConcernNode::Group { name: name.to_string(), children: Vec::new() })
    }

    /// Adds an instance. With a source model the binding is checked first.
    pub fn add_instance(
        &mut self,
        parent: &str,
        name: &str,
        binding: QueryBinding,
        note: &str,
        validate_against: Option<&SourceModel>,
    ) -> Result<(), ConcernError> {
        if let Some(model) = validate_against {
            execute(model, &binding, DispatchPolicy::default())?;
        }
        self.insert(
            parent,
            ConcernNode::Instance(Instance { name: name.to_string(), binding, snapshot: None, note: note.to_string() }),
        )
    }

    pub fn remove(&mut self, path: &str) -> Result<ConcernNode, ConcernError> {
        let parts = split_path(path);
        let Some((last, parent)) = parts.split_last() else {
            return Err(ConcernError::MissingPath(path.to_string()));
        };
        let children = self
            .group_children_mut(&parent.join("/"))
            .map_err(|_| ConcernError::MissingPath(path.to_string()))?;
        let idx = children
            .iter()
            .position(|c| c.name() == *last)
            .ok_or_else(|| ConcernError::MissingPath(path.to_string()))?;
        Ok(children.remove(idx))
    }

    pub fn rename(&mut self, path: &str, new_name: &str) -> Result<(), ConcernError> {
        check_name(new_name)?;
        let parts = split_path(path);
        let Some((last, parent)) = parts.split_last() else {
            return Err(ConcernError::MissingPath(path.to_string()));
        };
        let parent_path = parent.join("/");
        let children =
            self.group_children_mut(&parent_path).map_err(|_| ConcernError::MissingPath(path.to_string()))?;
        if !children.iter().any(|c| c.name() == *last) {
            return Err(ConcernError::MissingPath(path.to_string()));
        }
        if *last != new_name && children.iter().any(|c| c.name() == new_name) {
            return Err(ConcernError::Duplicate { parent: parent_path, name: new_name.to_string() });
        }
        let node = children.iter_mut().find(|c| c.name() == *last).expect("checked above");
        node.set_name(new_name.to_string());
        Ok(())
    }

    /// Every instance with its path, in pre-order.
    pub fn instances(&self) -> Vec<(String, &Instance)> {
        fn walk<'a>(node: &'a ConcernNode, prefix: &str, out: &mut Vec<(String, &'a Instance)>) {
            if let ConcernNode::Group { children, .. } = node {
                for c in children {
                    let path = if prefix.is_empty() { c.name().to_string() } else { format!("{prefix}/{}", c.name()) };
                    match c {
                        ConcernNode::Instance(i) => out.push((path, i)),
                        ConcernNode::Group { .. } => walk(c, &path, out),
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, "", &mut out);
        out
    }

    /// Instances under `path` (the instance itself if `path` names one).
    pub fn instances_under(&self, path: &str) -> Result<Vec<(String, &Instance)>, ConcernError> {
        let norm = split_path(path).join("/");
        if self.node(&norm).is_none() {
            return Err(ConcernError::MissingPath(path.to_string()));
        }
        Ok(self
            .instances()
            .into_iter()
            .filter(|(p, _)| norm.is_empty() || *p == norm || p.starts_with(&format!("{norm}/")))
            .collect())
    }

    /// Re-executes every instance and reports drift against stored snapshots.
    /// Snapshots change only when `commit` is set.
    pub fn run_all(&mut self, model: &SourceModel, policy: DispatchPolicy, commit: bool) -> Vec<RunEntry> {
        let mut entries = Vec::new();
        let mut fresh = Vec::new();
        for (path, inst) in self.instances() {
            let outcome = execute(model, &inst.binding, policy).map(|result| {
                let snap = Snapshot::of_result(model, &result);
                let drift = DriftReport::between(&path, inst.snapshot.as_ref(), &snap);
                fresh.push((path.clone(), snap));
                (result, drift)
            });
            entries.push(RunEntry { path, outcome });
        }
        if commit {
            for (path, snap) in fresh {
                if let Some(ConcernNode::Instance(i)) = self.node_mut(&path) {
                    i.snapshot = Some(snap);
                }
            }
        }
        entries
    }
}
