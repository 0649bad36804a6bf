//! Interactive exploration of a facts file. Nothing here writes files.

use anyhow::{anyhow, bail, Result};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sortweaver_core::mining::{self, MiningConfig};
use sortweaver_core::queries::{expand_seed, resolve_method, resolve_type_ref};
use sortweaver_core::refactoring::AdviceKind;
use sortweaver_core::{execute, plan, ConcernModel, PlanOptions, QueryBinding, QueryResult, Seed, SourceModel};

use crate::commands::make_plan;
use crate::{emit, read_facts, render, to_json, warn, Console, Opts};

const HELP: &str = "\
commands:
  callers <method>           call sites crediting a method
  ancestors <type>           supertypes of a type
  members <type>             methods, fields and nested types of a type
  fanin <method>             distinct callers of a method
  seeds [fanin|grouped|redirect]
                             mine seeds with default settings
  seedexpand <seed-id>       candidate sort queries for a seed
  cb <target> <scope>        consistent behavior
  rl <redirector> <receiver> redirection layer
  ec <context> <scope>       expose context
  rsi <role> <scope>         role superimposition
  sc <scope> [role]          support classes
  ep <exception> [root]      exception propagation
  plan [before|after|around] plan for the last query result
  instances                  instances of the loaded concern model
  run <path>                 run a concern model instance or group plan
  history                    commands entered so far
  help, quit
";

pub(crate) struct SessionState {
    pub facts_path: PathBuf,
    pub model_path: Option<PathBuf>,
    pub last: Option<QueryResult>,
    pub history: Vec<String>,
    facts: SourceModel,
    concerns: Option<ConcernModel>,
    seeds: Option<Vec<Seed>>,
}

pub(crate) fn run(facts: &Path, model: Option<&Path>, opts: Opts, console: &mut Console) -> Result<()> {
    let mut state = SessionState {
        facts_path: facts.to_path_buf(),
        model_path: model.map(Path::to_path_buf),
        last: None,
        history: Vec::new(),
        facts: read_facts(facts)?,
        concerns: model.map(ConcernModel::load).transpose()?,
        seeds: None,
    };
    if console.interactive {
        emit(
            console,
            &format!(
                "{}: {} types, {} methods, {} calls{}. Type `help` for commands.\n",
                state.facts_path.display(),
                state.facts.type_count(),
                state.facts.method_count(),
                state.facts.call_count(),
                state.model_path.as_ref().map_or(String::new(), |p| format!("; concerns from {}", p.display()))
            ),
        )?;
    }
    let mut line = String::new();
    loop {
        if console.interactive {
            emit(console, "> ")?;
            console.stdout.flush().ok();
        }
        line.clear();
        if console.stdin.read_line(&mut line)? == 0 {
            break;
        }
        let cmd = line.trim();
        if cmd.is_empty() || cmd.starts_with('#') {
            continue;
        }
        if matches!(cmd, "quit" | "exit") {
            break;
        }
        state.history.push(cmd.to_string());
        match state.handle(cmd, opts) {
            Ok(text) => emit(console, &text)?,
            Err(e) => warn(console, &format!("error: {e:#}")),
        }
    }
    Ok(())
}

/// Splits on whitespace outside parentheses, so `m(int, String)` stays whole.
pub fn tokenize(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0usize;
    for ch in line.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            c if c.is_whitespace() && depth == 0 => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn arg<'a>(args: &'a [String], i: usize, what: &str) -> Result<&'a str> {
    args.get(i).map(String::as_str).ok_or_else(|| anyhow!("missing {what}"))
}

impl SessionState {
    fn handle(&mut self, line: &str, opts: Opts) -> Result<String> {
        let toks = tokenize(line);
        let (cmd, args) = toks.split_first().ok_or_else(|| anyhow!("empty command"))?;
        let m = &self.facts;
        let binding = match cmd.as_str() {
            "help" => return Ok(HELP.to_string()),
            "history" => {
                return Ok(self.history.iter().enumerate().map(|(i, h)| format!("{:>4}  {h}\n", i + 1)).collect())
            }
            "callers" => return self.callers(arg(args, 0, "method")?, opts),
            "ancestors" => {
                let t = resolve_type_ref(m, arg(args, 0, "type")?)?;
                let mut out = String::new();
                for a in m.ancestors(&t).iter().filter(|a| **a != t) {
                    let _ = writeln!(out, "{}", m.type_name(a));
                }
                return Ok(out);
            }
            "members" => return self.members(arg(args, 0, "type")?),
            "fanin" => {
                let target = resolve_method(m, arg(args, 0, "method")?)?;
                let n = mining::fan_in(m, &target, opts.policy)?;
                return Ok(format!("{}: fan-in {n}\n", m.method_signature(&target)));
            }
            "seeds" => return self.list_seeds(args.first().map(String::as_str), opts),
            "seedexpand" => {
                let id = arg(args, 0, "seed id")?;
                let seed = self.all_seeds(opts).iter().find(|s| s.id == id).cloned();
                let seed = seed.ok_or_else(|| anyhow!("no seed `{id}`; run `seeds` to list them"))?;
                let list = expand_seed(&self.facts, &seed);
                return if opts.json { to_json(&list) } else { Ok(render::suggestions(&list)) };
            }
            "plan" => {
                let last = self.last.as_ref().ok_or_else(|| anyhow!("no query result yet"))?;
                let advice = args.first().map(|a| a.parse::<AdviceKind>()).transpose().map_err(|e| anyhow!(e))?;
                let p = plan(&self.facts, last, "", &PlanOptions { advice, enumerate: false })?;
                return Ok(format!("{}{}", p.aspect_text, render::plan_findings(&p)));
            }
            "instances" => {
                let cm = self.concerns.as_ref().ok_or_else(|| anyhow!("no concern model loaded (use --model)"))?;
                return Ok(render::tree(&cm.root));
            }
            "run" => return self.run_path(arg(args, 0, "concern path")?, opts),
            "cb" => QueryBinding::CB { target: arg(args, 0, "target")?.into(), scope: arg(args, 1, "scope")?.into() },
            "rl" => QueryBinding::RL {
                redirector: arg(args, 0, "redirector")?.into(),
                receiver: arg(args, 1, "receiver")?.into(),
            },
            "ec" => QueryBinding::EC { context: arg(args, 0, "context")?.into(), scope: arg(args, 1, "scope")?.into() },
            "rsi" => QueryBinding::RSI { role: arg(args, 0, "role")?.into(), scope: arg(args, 1, "scope")?.into() },
            "sc" => QueryBinding::SC { scope: arg(args, 0, "scope")?.into(), role: args.get(1).cloned() },
            "ep" => QueryBinding::EP { exception: arg(args, 0, "exception")?.into(), root: args.get(1).cloned() },
            other => bail!("unknown command `{other}`; type `help`"),
        };
        let r = execute(&self.facts, &binding, opts.policy)?;
        let text = if opts.json { to_json(&r)? } else { render::query(&self.facts, &r) };
        self.last = Some(r);
        Ok(text)
    }

    fn callers(&self, method: &str, opts: Opts) -> Result<String> {
        let m = &self.facts;
        let target = resolve_method(m, method)?;
        let sites: BTreeSet<(String, u32)> = m
            .calls()
            .filter(|c| m.credits(c, &target, opts.policy))
            .map(|c| (m.method_signature(&c.caller), c.ordinal))
            .collect();
        let callers: BTreeSet<&String> = sites.iter().map(|(s, _)| s).collect();
        let mut out =
            format!("{}: {} call sites from {} callers\n", m.method_signature(&target), sites.len(), callers.len());
        for (caller, ord) in &sites {
            let _ = writeln!(out, "  {caller}#{ord}");
        }
        Ok(out)
    }

    fn members(&self, ty: &str) -> Result<String> {
        let m = &self.facts;
        let t = resolve_type_ref(m, ty)?;
        let mut out = String::new();
        for f in m.fields_of(&t) {
            let f = m.field(f).ok_or_else(|| anyhow!("dangling field"))?;
            let _ = writeln!(out, "  {} {} {}", f.visibility.keyword(), f.declared_type, f.name);
        }
        for id in m.methods_of(&t) {
            let d = m.meth(id);
            let stat = if d.is_static { "static " } else { "" };
            let abs = if d.is_abstract { "abstract " } else { "" };
            let ret = if d.is_constructor { String::new() } else { format!("{} ", d.return_type) };
            let _ = writeln!(
                out,
                "  {} {stat}{abs}{ret}{}({})",
                d.visibility.keyword(),
                d.name,
                d.param_types.join(", ")
            );
        }
        for n in m.nested_types(&t) {
            let _ = writeln!(out, "  class {}", m.type_name(n));
        }
        Ok(out)
    }

    fn all_seeds(&mut self, opts: Opts) -> &[Seed] {
        let m = &self.facts;
        self.seeds.get_or_insert_with(|| {
            let config = MiningConfig { policy: opts.policy, ..Default::default() };
            let mut all = mining::fan_in_analysis(m, &config);
            all.extend(mining::grouped_calls_analysis(m, &config));
            all.extend(mining::find_redirectors(m, &config));
            all
        })
    }

    fn list_seeds(&mut self, technique: Option<&str>, opts: Opts) -> Result<String> {
        let prefix = match technique {
            None => "",
            Some(t @ ("fanin" | "grouped" | "redirect")) => t,
            Some(other) => bail!("unknown technique `{other}` (expected fanin, grouped or redirect)"),
        };
        let seeds: Vec<Seed> = self.all_seeds(opts).iter().filter(|s| s.id.starts_with(prefix)).cloned().collect();
        if opts.json {
            to_json(&seeds)
        } else {
            Ok(render::seeds(&self.facts, &seeds))
        }
    }

    fn run_path(&mut self, path: &str, opts: Opts) -> Result<String> {
        let cm = self.concerns.as_ref().ok_or_else(|| anyhow!("no concern model loaded (use --model)"))?;
        if let Some(sortweaver_core::ConcernNode::Instance(i)) = cm.node(path) {
            let r = execute(&self.facts, &i.binding, opts.policy)?;
            let text = render::query(&self.facts, &r);
            self.last = Some(r);
            return Ok(text);
        }
        let p = make_plan(cm, path, &self.facts, &PlanOptions::default(), opts)?;
        Ok(format!("{}{}", p.aspect_text, render::plan_findings(&p)))
    }
}
