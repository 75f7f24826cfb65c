use std::process::exit;

use clap::Parser;

use rbc_cli::cli::Cli;
use rbc_cli::{commands, UsageError};

fn main() {
    // A closed downstream pipe (rbc encode | head) should end the process
    // quietly instead of panicking inside println.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version print to stdout and exit 0; genuine parse
            // failures print to stderr and exit 1.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            exit(code);
        }
    };
    if let Err(err) = commands::run(cli) {
        if err.is::<UsageError>() {
            eprintln!("error: {err}");
            exit(1);
        }
        eprintln!("error: {err:#}");
        exit(2);
    }
}
