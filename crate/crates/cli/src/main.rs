use std::io::{self, BufRead, BufReader, IsTerminal, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cqc_core::session::{serve, Session};
use cqc_core::vernacular::{parse_program, run_script, Interpreter};
use cqc_core::{Config, Fuel};

/// Checks and builds proofs in the Calculus of Constructions.
///
/// With a FILE, checks it in batch (exit 0 if right, 1 if wrong, 2 on IO
/// errors). Without one, starts a read-eval-print loop on stdin.
#[derive(Parser, Debug)]
#[command(name = "cqc", version)]
struct Cli {
    /// Script to check.
    file: Option<PathBuf>,
    /// Do not run first-order unification after instantiations.
    #[arg(long)]
    no_auto_solve: bool,
    /// `Apply` only tries the first goal.
    #[arg(long)]
    apply_strict: bool,
    /// Reduction steps allowed per check.
    #[arg(long, value_name = "N")]
    fuel: Option<u64>,
    /// Serve the JSON-lines protocol on stdio, or on a TCP port if given.
    #[arg(long, value_name = "PORT", num_args = 0..=1)]
    serve: Option<Option<u16>>,
    /// Only report errors.
    #[arg(long)]
    quiet: bool,
}

impl Cli {
    fn config(&self) -> Config {
        let mut c = Config { auto_solve: !self.no_auto_solve, apply_strict: self.apply_strict, ..Config::default() };
        if let Some(n) = self.fuel {
            c.fuel = Fuel(n);
        }
        c
    }
}

fn batch(cli: &Cli, path: &PathBuf) -> ExitCode {
    let src = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("cqc: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    let run = run_script(&src, cli.config());
    if !cli.quiet {
        print!("{}", run.transcript);
    }
    match &run.error {
        None => ExitCode::SUCCESS,
        Some((line, col, e)) => {
            eprintln!("{}:{line}:{col}: {e}", path.display());
            ExitCode::from(1)
        }
    }
}

fn repl(cli: &Cli) -> io::Result<()> {
    let mut it = Interpreter::new(cli.config());
    let stdin = io::stdin();
    let interactive = stdin.is_terminal();
    let mut out = io::stdout();
    let mut buf = String::new();
    loop {
        if interactive {
            write!(out, "{}", if buf.is_empty() { "cqc> " } else { "...> " })?;
            out.flush()?;
        }
        let mut line = String::new();
        if stdin.lock().read_line(&mut line)? == 0 {
            break;
        }
        buf.push_str(&line);
        if !buf.trim_end().ends_with('.') {
            continue;
        }
        match parse_program(&buf) {
            Ok(cmds) => {
                for c in cmds {
                    match it.execute(&c.command) {
                        Ok(text) => {
                            if !cli.quiet {
                                print!("{text}");
                            }
                        }
                        Err(e) => {
                            println!("Error at {}:{}: {e}", c.line, c.col);
                            break;
                        }
                    }
                }
            }
            Err(e) => println!("Error: {e}"),
        }
        buf.clear();
    }
    Ok(())
}

fn serve_on(cli: &Cli, port: Option<u16>) -> io::Result<()> {
    match port {
        None => serve(&mut Session::new(cli.config()), io::stdin().lock(), io::stdout().lock()),
        Some(port) => {
            let listener = TcpListener::bind(("127.0.0.1", port))?;
            eprintln!("cqc: serving on {}", listener.local_addr()?);
            for stream in listener.incoming() {
                let stream = stream?;
                let reader = BufReader::new(stream.try_clone()?);
                if let Err(e) = serve(&mut Session::new(cli.config()), reader, stream) {
                    eprintln!("cqc: connection closed: {e}");
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match (&cli.file, cli.serve) {
        (Some(path), None) => return batch(&cli, path),
        (None, Some(port)) => serve_on(&cli, port),
        (None, None) => repl(&cli),
        (Some(_), Some(_)) => {
            eprintln!("cqc: --serve does not take a script");
            return ExitCode::from(2);
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cqc: {e}");
            ExitCode::from(2)
        }
    }
}
