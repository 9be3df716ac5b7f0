use std::io::Write;

use fidelset_core::frontend::cli::run_command;

fn main() {
    let out = run_command(std::env::args_os());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    std::process::exit(out.code);
}
