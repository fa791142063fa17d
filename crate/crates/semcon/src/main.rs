use std::io::Write;
use std::process;

use clap::Parser;

use semcon::cli::{run, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version arrive here too; they are not failures
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            process::exit(code);
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if let Err(err) = run(cli, &mut out) {
        let _ = out.flush();
        eprintln!("error: {err}");
        process::exit(err.exit_code());
    }
}
