//! Handlers for the non-interactive subcommands.

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;
use std::path::{Path, PathBuf};

use sortweaver_core::minilang::{extract_sources, Diagnostic, Severity};
use sortweaver_core::mining::{self, MiningConfig};
use sortweaver_core::source_model::records_to_string;
use sortweaver_core::{
    execute, plan, plan_group, ConcernModel, ConcernNode, PlanOptions, QueryResult, RefactoringPlan, SourceModel,
};

use crate::args::{Cli, Command, ModelCmd, RunArgs, Technique};
use crate::{emit, read_facts, render, repl, to_json, warn, Console, Opts};

pub(crate) fn dispatch(cli: Cli, console: &mut Console) -> Result<()> {
    let opts = Opts { json: cli.json, policy: cli.policy.unwrap_or_default() };
    match cli.command {
        Command::Extract { files, output } => extract(&files, output.as_deref(), opts, console),
        Command::Mine { technique, facts, threshold, min_group, coverage, keep_accessors, ignore } => {
            let mut config = MiningConfig { policy: opts.policy, accessor_filter: !keep_accessors, ..Default::default() };
            config.utility_names = ignore;
            match (technique, threshold) {
                (Technique::Fanin, Some(n)) => config.fanin_threshold = n,
                (Technique::Grouped, Some(n)) => config.grouped_min_callers = n,
                (Technique::Redirect, Some(n)) => config.redirect_min_methods = n,
                (_, None) => {}
            }
            if let Some(g) = min_group {
                config.grouped_min_group = g;
            }
            if let Some(c) = coverage {
                config.redirect_coverage = c;
            }
            mine(technique, &facts, &config, opts, console)
        }
        Command::Query { query } => {
            let (binding, facts) = query.split();
            let facts = facts.ok_or_else(|| anyhow!("missing facts file"))?;
            let model = read_facts(facts)?;
            let result = execute(&model, &binding, opts.policy)?;
            let text = if opts.json { to_json(&result)? } else { render::query(&model, &result) };
            emit(console, &text)
        }
        Command::Model { action } => model_cmd(action, opts, console),
        Command::Plan { model, path, facts, advice, enumerate, output, edits } => {
            let plan_opts = PlanOptions { advice, enumerate };
            plan_cmd(&model, &path, &facts, &plan_opts, output.as_deref(), edits.as_deref(), opts, console)
        }
        Command::Repl { facts, model } => repl::run(&facts, model.as_deref(), opts, console),
    }
}

fn show_diag(files: &[PathBuf], d: &Diagnostic) -> String {
    match d.file.and_then(|i| files.get(i)) {
        Some(f) => format!("{}:{d}", f.display()),
        None => d.to_string(),
    }
}

fn extract(files: &[PathBuf], output: Option<&Path>, opts: Opts, console: &mut Console) -> Result<()> {
    let mut sources = Vec::with_capacity(files.len());
    for f in files {
        let text = std::fs::read_to_string(f).with_context(|| format!("cannot read {}", f.display()))?;
        sources.push((f.display().to_string(), text));
    }
    let (records, diags) = match extract_sources(&sources) {
        Ok(ok) => ok,
        Err(errs) => {
            for d in &errs {
                warn(console, &show_diag(files, d));
            }
            bail!("{} syntax error{}", errs.len(), if errs.len() == 1 { "" } else { "s" });
        }
    };
    for d in &diags {
        warn(console, &show_diag(files, d));
    }
    let errors = diags.iter().filter(|d| d.severity == Severity::Error).count();
    if errors > 0 {
        bail!("{errors} extraction error{}", if errors == 1 { "" } else { "s" });
    }
    let model = SourceModel::from_records(records.clone()).context("extracted facts do not form a valid model")?;
    let text = records_to_string(&records);
    let Some(out) = output else {
        return emit(console, &text);
    };
    std::fs::write(out, &text).with_context(|| format!("cannot write {}", out.display()))?;
    let summary = if opts.json {
        to_json(&json!({
            "output": out.display().to_string(),
            "types": model.type_count(),
            "methods": model.method_count(),
            "fields": model.field_count(),
            "calls": model.call_count(),
            "warnings": diags.len(),
        }))?
    } else {
        format!(
            "wrote {}: {} types, {} methods, {} fields, {} calls\n",
            out.display(),
            model.type_count(),
            model.method_count(),
            model.field_count(),
            model.call_count()
        )
    };
    emit(console, &summary)
}

fn mine(technique: Technique, facts: &Path, config: &MiningConfig, opts: Opts, console: &mut Console) -> Result<()> {
    config.validate()?;
    let model = read_facts(facts)?;
    let seeds = match technique {
        Technique::Fanin => mining::fan_in_analysis(&model, config),
        Technique::Grouped => mining::grouped_calls_analysis(&model, config),
        Technique::Redirect => mining::find_redirectors(&model, config),
    };
    let text = if opts.json { to_json(&seeds)? } else { render::seeds(&model, &seeds) };
    emit(console, &text)
}

fn load_model(path: &Path) -> Result<ConcernModel> {
    ConcernModel::load(path).with_context(|| format!("cannot load concern model {}", path.display()))
}

fn save_model(cm: &ConcernModel, path: &Path) -> Result<()> {
    cm.save(path).with_context(|| format!("cannot save concern model {}", path.display()))
}

/// `a/b/c` → (`a/b`, `c`).
fn parent_and_name(path: &str) -> (&str, &str) {
    path.trim_matches('/').rsplit_once('/').unwrap_or(("", path.trim_matches('/')))
}

fn model_cmd(action: ModelCmd, opts: Opts, console: &mut Console) -> Result<()> {
    match action {
        ModelCmd::Show { model } => {
            let cm = load_model(&model)?;
            let text = if opts.json { cm.to_canonical_json() } else { render::tree(&cm.root) };
            emit(console, &text)
        }
        ModelCmd::AddGroup { model, path } => {
            let mut cm = ConcernModel::load_or_new(&model)?;
            let (parent, name) = parent_and_name(&path);
            cm.add_group(parent, name)?;
            save_model(&cm, &model)?;
            emit(console, &format!("added group {path}\n"))
        }
        ModelCmd::AddInstance { model, path, note, binding } => {
            let mut cm = ConcernModel::load_or_new(&model)?;
            let (binding, facts) = binding.split();
            let source = facts.map(|f| read_facts(f)).transpose()?;
            let (parent, name) = parent_and_name(&path);
            cm.add_instance(parent, name, binding.clone(), &note, source.as_ref())?;
            save_model(&cm, &model)?;
            emit(console, &format!("added {binding} at {path}\n"))
        }
        ModelCmd::Remove { model, path } => {
            let mut cm = load_model(&model)?;
            cm.remove(&path)?;
            save_model(&cm, &model)?;
            emit(console, &format!("removed {path}\n"))
        }
        ModelCmd::Rename { model, path, name } => {
            let mut cm = load_model(&model)?;
            cm.rename(&path, &name)?;
            save_model(&cm, &model)?;
            emit(console, &format!("renamed {path} to {name}\n"))
        }
        ModelCmd::Run(args) => model_run(&args, opts, console),
    }
}

fn model_run(args: &RunArgs, opts: Opts, console: &mut Console) -> Result<()> {
    let mut cm = load_model(&args.model)?;
    let source = read_facts(&args.facts)?;
    let entries = cm.run_all(&source, opts.policy, args.commit);
    let failed = entries.iter().filter(|e| e.outcome.is_err()).count();
    let text = if opts.json {
        let rows: Vec<_> = entries
            .iter()
            .map(|e| match &e.outcome {
                Ok((r, d)) => json!({
                    "path": e.path,
                    "sort": r.sort,
                    "hits": r.hits.len(),
                    "added": d.added,
                    "removed": d.removed,
                    "unchanged": d.unchanged,
                }),
                Err(err) => json!({ "path": e.path, "error": err.to_string() }),
            })
            .collect();
        to_json(&rows)?
    } else {
        render::run_entries(&entries)
    };
    emit(console, &text)?;
    if args.commit {
        save_model(&cm, &args.model)?;
    }
    if failed > 0 {
        bail!("{failed} instance{} could not be run", if failed == 1 { "" } else { "s" });
    }
    Ok(())
}

fn run_instances(cm: &ConcernModel, path: &str, source: &SourceModel, opts: Opts) -> Result<Vec<(String, QueryResult)>> {
    cm.instances_under(path)?
        .into_iter()
        .map(|(p, i)| {
            let r = execute(source, &i.binding, opts.policy).with_context(|| format!("running {p}"))?;
            Ok((p, r))
        })
        .collect()
}

pub(crate) fn make_plan(
    cm: &ConcernModel,
    path: &str,
    source: &SourceModel,
    plan_opts: &PlanOptions,
    opts: Opts,
) -> Result<RefactoringPlan> {
    let node = cm.node(path).ok_or_else(|| anyhow!("no concern at path `{path}`"))?;
    let results = run_instances(cm, path, source, opts)?;
    let plan = match node {
        ConcernNode::Instance(_) => plan(source, &results[0].1, path, plan_opts)?,
        ConcernNode::Group { .. } => plan_group(source, path, &results, plan_opts)?,
    };
    Ok(plan)
}

#[allow(clippy::too_many_arguments)]
fn plan_cmd(
    model: &Path,
    path: &str,
    facts: &Path,
    plan_opts: &PlanOptions,
    output: Option<&Path>,
    edits: Option<&Path>,
    opts: Opts,
    console: &mut Console,
) -> Result<()> {
    let cm = load_model(model)?;
    let source = read_facts(facts)?;
    let p = make_plan(&cm, path, &source, plan_opts, opts)?;
    if let Some(out) = output {
        std::fs::write(out, &p.aspect_text).with_context(|| format!("cannot write {}", out.display()))?;
    }
    if let Some(e) = edits {
        std::fs::write(e, to_json(&p.edits)?).with_context(|| format!("cannot write {}", e.display()))?;
    }
    if opts.json {
        return emit(console, &to_json(&p)?);
    }
    match output {
        Some(out) => emit(console, &format!("wrote aspect {} to {}\n", p.aspect_name, out.display()))?,
        None => emit(console, &p.aspect_text)?,
    }
    let findings = render::plan_findings(&p);
    if !findings.is_empty() {
        warn(console, findings.trim_end());
    }
    Ok(())
}
