//! The `sortweaver` command line: extract, mine, query, model, plan and repl.
//!
//! Exit codes: 0 on success, 1 on user error (bad arguments, unreadable or
//! malformed input, unknown program elements), 2 on internal error.

mod args;
mod commands;
mod render;
mod repl;

use anyhow::Result;
use clap::error::ErrorKind;
use clap::{CommandFactory, FromArgMatches};
use std::ffi::OsString;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::time::Instant;

use sortweaver_core::source_model::load_facts;
use sortweaver_core::{DispatchPolicy, SourceModel, CONCERN_SCHEMA_VERSION, FACTS_SCHEMA_VERSION};

pub use args::Cli;

/// Streams a command reads from and writes to.
pub struct Console<'a> {
    pub stdin: &'a mut dyn BufRead,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
    /// Print a prompt in the REPL.
    pub interactive: bool,
}

/// A failure that is the tool's fault rather than the user's.
#[derive(Debug)]
pub struct Internal(pub String);

impl fmt::Display for Internal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "internal error: {}", self.0)
    }
}

impl std::error::Error for Internal {}

/// Output settings shared by every command.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Opts {
    pub json: bool,
    pub policy: DispatchPolicy,
}

pub fn version_string() -> String {
    format!(
        "{} (facts schema {FACTS_SCHEMA_VERSION}, concern model schema {CONCERN_SCHEMA_VERSION})",
        env!("CARGO_PKG_VERSION")
    )
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, console: &mut Console) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match Cli::command().version(version_string()).try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => return clap_exit(e, console),
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => return clap_exit(e, console),
    };
    let start = Instant::now();
    let verbose = cli.verbose;
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| commands::dispatch(cli, console)));
    let code = match outcome {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            let _ = writeln!(console.stderr, "error: {e:#}");
            if e.downcast_ref::<Internal>().is_some() {
                2
            } else {
                1
            }
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            let _ = writeln!(console.stderr, "internal error: {msg}");
            2
        }
    };
    if verbose {
        let _ = writeln!(console.stderr, "elapsed: {:?}", start.elapsed());
    }
    if console.stdout.flush().is_err() {
        return 2;
    }
    code
}

fn clap_exit(e: clap::Error, console: &mut Console) -> i32 {
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
            let _ = write!(console.stdout, "{}", e.render());
            0
        }
        _ => {
            let _ = write!(console.stderr, "{}", e.render());
            1
        }
    }
}

/// Writes to stdout; a failed write is an internal error.
pub(crate) fn emit(console: &mut Console, text: &str) -> Result<()> {
    console.stdout.write_all(text.as_bytes()).map_err(|e| Internal(format!("cannot write output: {e}")))?;
    Ok(())
}

pub(crate) fn warn(console: &mut Console, text: &str) {
    let _ = writeln!(console.stderr, "{text}");
}

pub(crate) fn read_facts(path: &Path) -> Result<SourceModel> {
    use anyhow::Context;
    let file = std::fs::File::open(path).with_context(|| format!("cannot open facts file {}", path.display()))?;
    let model = load_facts(std::io::BufReader::new(file)).with_context(|| format!("in {}", path.display()))?;
    Ok(model)
}

pub(crate) fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Internal(format!("cannot serialize output: {e}")))?;
    s.push('\n');
    Ok(s)
}
