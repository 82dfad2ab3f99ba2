use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use covcheck::commands::{combined_exit, execute, exit, Backend, Command, Settings};

/// Coverage type checker.
#[derive(Parser)]
#[command(name = "covcheck", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Type check programs against their goal types.
    Check(Opts),
    /// Print every outcome a program can reach within the window.
    Run(Opts),
    /// Decide membership of a program in its goal type by execution.
    Oracle(Opts),
    /// Compare checker verdicts with the oracle.
    Diff(Opts),
    /// Write each verification condition as an SMT-LIB2 script.
    EmitSmt(Opts),
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Bounded,
    Smt,
}

#[derive(Args)]
struct Opts {
    /// A `.cov` file or a directory of them.
    path: PathBuf,
    /// Integer window [-N, N] for generators and enumeration (default 8).
    #[arg(long)]
    window: Option<i64>,
    #[arg(long, value_enum, default_value = "bounded")]
    backend: BackendArg,
    /// Solver command line, e.g. "z3 -in -smt2".
    #[arg(long)]
    solver_cmd: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    timeout_ms: u64,
    /// Give the solver unbounded integers instead of the window.
    #[arg(long)]
    smt_unbounded: bool,
    /// Machine-readable output, one JSON object per file.
    #[arg(long)]
    json: bool,
    /// Require over-parameter arguments to cover the declared domain.
    #[arg(long)]
    strict_overapp: bool,
    /// `assert` returns `(flag, ())` instead of `(flag, value)`.
    #[arg(long)]
    assert_unit_payload: bool,
    /// Omit timings so output is byte-stable.
    #[arg(long)]
    no_timing: bool,
    /// Output directory for emit-smt.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::ACCEPT
            };
            return ExitCode::from(code as u8);
        }
    };
    let (cmd, o) = match cli.command {
        Cmd::Check(o) => (Command::Check, o),
        Cmd::Run(o) => (Command::Run, o),
        Cmd::Oracle(o) => (Command::Oracle, o),
        Cmd::Diff(o) => (Command::Diff, o),
        Cmd::EmitSmt(o) => (Command::EmitSmt, o),
    };
    if o.window.is_some_and(|w| w < 0) {
        eprintln!("error: --window must be non-negative");
        return ExitCode::from(exit::USAGE as u8);
    }
    let settings = Settings {
        window: o.window,
        backend: match o.backend {
            BackendArg::Bounded => Backend::Bounded,
            BackendArg::Smt => Backend::Smt,
        },
        solver_cmd: o.solver_cmd,
        timeout_ms: o.timeout_ms,
        smt_unbounded: o.smt_unbounded,
        json: o.json,
        strict_overapp: o.strict_overapp,
        assert_unit_payload: o.assert_unit_payload,
        timing: !o.no_timing,
        out: o.out,
    };
    let outputs = execute(cmd, &o.path, &settings);
    for out in &outputs {
        if out.exit == exit::USAGE && !settings.json {
            eprintln!("{}", out.text);
        } else {
            println!("{}", out.text);
        }
    }
    ExitCode::from(combined_exit(&outputs) as u8)
}
