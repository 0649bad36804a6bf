//! Command-line grammar.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

use sortweaver_core::refactoring::AdviceKind;
use sortweaver_core::{DispatchPolicy, QueryBinding};

#[derive(Debug, Parser)]
#[command(name = "sortweaver", about = "Mine, document and plan the migration of crosscutting concerns")]
#[command(arg_required_else_help = true, propagate_version = true)]
pub struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true, conflicts_with = "text")]
    pub json: bool,

    /// Emit text (the default).
    #[arg(long, global = true)]
    pub text: bool,

    /// How calls are credited to overridden or overriding methods.
    #[arg(long, global = true, env = "SORTWEAVER_POLICY", value_parser = parse_policy)]
    pub policy: Option<DispatchPolicy>,

    /// Report timings on stderr.
    #[arg(long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

fn parse_policy(s: &str) -> Result<DispatchPolicy, String> {
    s.parse()
}

fn parse_advice(s: &str) -> Result<AdviceKind, String> {
    s.parse()
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse MiniLang sources into a facts file.
    Extract {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run an aspect mining technique.
    Mine {
        technique: Technique,
        facts: PathBuf,
        /// Fan-in threshold, minimum callers for grouped calls, or minimum
        /// forwarded methods for redirection layers.
        #[arg(long)]
        threshold: Option<usize>,
        /// Minimum group size for grouped calls.
        #[arg(long)]
        min_group: Option<usize>,
        /// Minimum forwarding coverage for redirection layers.
        #[arg(long)]
        coverage: Option<f64>,
        /// Keep accessors in fan-in results.
        #[arg(long)]
        keep_accessors: bool,
        /// Method names or `Type.name` globs to ignore.
        #[arg(long = "ignore")]
        ignore: Vec<String>,
    },
    /// Run one sort query.
    Query {
        #[command(subcommand)]
        query: BindingCmd,
    },
    /// Edit or run a concern model file.
    Model {
        #[command(subcommand)]
        action: ModelCmd,
    },
    /// Generate an aspect refactoring plan for a concern or concern group.
    Plan {
        model: PathBuf,
        path: String,
        facts: PathBuf,
        /// Advice kind for consistent-behavior plans.
        #[arg(long, value_parser = parse_advice)]
        advice: Option<AdviceKind>,
        /// List advised methods instead of a subtype pattern.
        #[arg(long)]
        enumerate: bool,
        /// Write the aspect here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the source edits here as JSON.
        #[arg(long)]
        edits: Option<PathBuf>,
    },
    /// Explore a facts file interactively.
    Repl {
        facts: PathBuf,
        /// Concern model to browse.
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Technique {
    Fanin,
    Grouped,
    Redirect,
}

/// A sort query with its parameters. The trailing facts file is required by
/// `query` and optional for `model add-instance`, where it validates.
#[derive(Debug, Clone, Subcommand)]
pub enum BindingCmd {
    /// Consistent behavior: calls to a method from within a scope.
    Cb {
        #[arg(long)]
        target: String,
        #[arg(long)]
        scope: String,
        facts: Option<PathBuf>,
    },
    /// Redirection layer: forwarding calls from a wrapper to its receiver.
    Rl {
        #[arg(long)]
        redirector: String,
        #[arg(long)]
        receiver: String,
        facts: Option<PathBuf>,
    },
    /// Expose context: chains passing a context parameter along.
    Ec {
        #[arg(long)]
        context: String,
        #[arg(long)]
        scope: String,
        facts: Option<PathBuf>,
    },
    /// Role superimposition: role members implemented in a scope.
    Rsi {
        #[arg(long)]
        role: String,
        #[arg(long)]
        scope: String,
        facts: Option<PathBuf>,
    },
    /// Support classes: nested types in a scope.
    Sc {
        #[arg(long)]
        scope: String,
        #[arg(long)]
        role: Option<String>,
        facts: Option<PathBuf>,
    },
    /// Exception propagation: chains declaring an exception.
    Ep {
        #[arg(long)]
        exception: String,
        #[arg(long)]
        root: Option<String>,
        facts: Option<PathBuf>,
    },
}

impl BindingCmd {
    pub fn split(&self) -> (QueryBinding, Option<&PathBuf>) {
        match self {
            BindingCmd::Cb { target, scope, facts } => {
                (QueryBinding::CB { target: target.clone(), scope: scope.clone() }, facts.as_ref())
            }
            BindingCmd::Rl { redirector, receiver, facts } => {
                (QueryBinding::RL { redirector: redirector.clone(), receiver: receiver.clone() }, facts.as_ref())
            }
            BindingCmd::Ec { context, scope, facts } => {
                (QueryBinding::EC { context: context.clone(), scope: scope.clone() }, facts.as_ref())
            }
            BindingCmd::Rsi { role, scope, facts } => {
                (QueryBinding::RSI { role: role.clone(), scope: scope.clone() }, facts.as_ref())
            }
            BindingCmd::Sc { scope, role, facts } => {
                (QueryBinding::SC { scope: scope.clone(), role: role.clone() }, facts.as_ref())
            }
            BindingCmd::Ep { exception, root, facts } => {
                (QueryBinding::EP { exception: exception.clone(), root: root.clone() }, facts.as_ref())
            }
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum ModelCmd {
    /// Print the concern hierarchy.
    Show { model: PathBuf },
    /// Add a group at `parent/name`; the file is created when missing.
    AddGroup { model: PathBuf, path: String },
    /// Add a sort instance at `parent/name`.
    AddInstance {
        model: PathBuf,
        path: String,
        #[arg(long, default_value = "")]
        note: String,
        #[command(subcommand)]
        binding: BindingCmd,
    },
    /// Remove a group or instance.
    Remove { model: PathBuf, path: String },
    /// Rename a group or instance.
    Rename { model: PathBuf, path: String, name: String },
    /// Re-run every instance and report drift against the stored snapshots.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub model: PathBuf,
    pub facts: PathBuf,
    /// Store the new results as snapshots.
    #[arg(long)]
    pub commit: bool,
}
