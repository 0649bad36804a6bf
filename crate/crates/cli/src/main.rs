use std::io::IsTerminal;

use sortweaver_cli::{run, Console};

fn main() {
    let stdin = std::io::stdin();
    let interactive = stdin.is_terminal();
    let mut stdin = stdin.lock();
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr().lock();
    let mut console = Console { stdin: &mut stdin, stdout: &mut stdout, stderr: &mut stderr, interactive };
    let code = run(std::env::args_os(), &mut console);
    drop(console);
    std::process::exit(code);
}
