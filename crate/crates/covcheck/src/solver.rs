//! External SMT solver backend.
//!
//! Each VC is rendered to SMT-LIB2 and piped to a fresh solver process.
//! The script asserts the negated VC, so `unsat` means valid.

use std::io::Write;
use std::process::{Command, Stdio};
use std::time::Duration;

use covcore::smt::{emit_smt2_with, SmtOptions};
use covcore::typing::Decider;
use covcore::vc::{Vc, Verdict};
use wait_timeout::ChildExt;

/// Environment variable consulted when no `--solver-cmd` is given.
pub const SOLVER_ENV: &str = "COVCHECK_SOLVER_CMD";

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Program followed by its arguments, e.g. `z3 -in -smt2`.
    pub argv: Vec<String>,
    pub timeout: Duration,
    pub smt: SmtOptions,
}

impl SolverConfig {
    /// From an explicit command line, falling back to the environment.
    pub fn resolve(cmd: Option<&str>, timeout_ms: u64, smt: SmtOptions) -> Option<SolverConfig> {
        let cmd = cmd
            .map(str::to_string)
            .or_else(|| std::env::var(SOLVER_ENV).ok())?;
        let argv: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
        if argv.is_empty() {
            return None;
        }
        Some(SolverConfig {
            argv,
            timeout: Duration::from_millis(timeout_ms),
            smt,
        })
    }
}

/// Run the solver on one script and interpret its first answer line.
pub fn solve(cfg: &SolverConfig, script: &str) -> Verdict {
    let mut child = match Command::new(&cfg.argv[0])
        .args(&cfg.argv[1..])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
    {
        Ok(c) => c,
        Err(e) => return Verdict::Unknown(format!("cannot start `{}`: {e}", cfg.argv[0])),
    };
    if let Some(mut stdin) = child.stdin.take() {
        if let Err(e) = stdin.write_all(script.as_bytes()) {
            let _ = child.kill();
            return Verdict::Unknown(format!("writing to solver: {e}"));
        }
    }
    match child.wait_timeout(cfg.timeout) {
        Ok(Some(_)) => {}
        Ok(None) => {
            let _ = child.kill();
            let _ = child.wait();
            return Verdict::Unknown(format!(
                "solver timed out after {} ms",
                cfg.timeout.as_millis()
            ));
        }
        Err(e) => return Verdict::Unknown(format!("waiting for solver: {e}")),
    }
    let out = match child.wait_with_output() {
        Ok(o) => o,
        Err(e) => return Verdict::Unknown(format!("reading solver output: {e}")),
    };
    let text = String::from_utf8_lossy(&out.stdout);
    match text.lines().map(str::trim).find(|l| !l.is_empty()) {
        Some("unsat") => Verdict::Valid,
        Some("sat") => Verdict::Invalid(None),
        Some(other) => Verdict::Unknown(format!("solver answered `{other}`")),
        None => Verdict::Unknown("solver produced no answer".into()),
    }
}

pub struct SmtDecider {
    pub config: SolverConfig,
}

impl Decider for SmtDecider {
    fn decide(&mut self, vc: &Vc) -> Verdict {
        solve(&self.config, &emit_smt2_with(vc, self.config.smt))
    }

    fn method(&self) -> String {
        match self.config.smt.window {
            Some(w) => format!("smt(w={w})"),
            None => "smt".into(),
        }
    }
}
