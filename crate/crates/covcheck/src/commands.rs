//! The `check`, `run`, `oracle`, `diff` and `emit-smt` commands.
//!
//! Every command works on one file or a directory of `.cov` files. Files
//! are processed in parallel; output is buffered per file and printed in
//! path order, so reports are deterministic.

use std::path::{Path, PathBuf};
use std::time::Instant;

use covcore::interp::{outcomes_with, Env, InterpOptions, Strategy};
use covcore::oracle::{fundamental_check, DiffVerdict, Membership, Oracle};
use covcore::qualifier::{SemanticValue, NU};
use covcore::smt::{emit_smt2_with, SmtOptions};
use covcore::typing::{
    check_program, BoundedDecider, CheckOptions, CheckReport, Decider, TypeError,
};
use covcore::vc::Verdict;
use covcore::DEFAULT_WINDOW;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::solver::{SmtDecider, SolverConfig};
use crate::source::{collect, LoadError, Source};

pub const SCHEMA: &str = "covcheck/1";

pub mod exit {
    pub const ACCEPT: i32 = 0;
    pub const REJECT: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const INCONCLUSIVE: i32 = 3;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Backend {
    #[default]
    Bounded,
    Smt,
}

#[derive(Clone, Debug)]
pub struct Settings {
    /// `None` means the default window.
    pub window: Option<i64>,
    pub backend: Backend,
    pub solver_cmd: Option<String>,
    pub timeout_ms: u64,
    /// Render SMT integers unbounded instead of confined to the window.
    pub smt_unbounded: bool,
    pub json: bool,
    pub strict_overapp: bool,
    pub assert_unit_payload: bool,
    pub timing: bool,
    pub out: Option<PathBuf>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            window: None,
            backend: Backend::Bounded,
            solver_cmd: None,
            timeout_ms: 10_000,
            smt_unbounded: false,
            json: false,
            strict_overapp: false,
            assert_unit_payload: false,
            timing: true,
            out: None,
        }
    }
}

impl Settings {
    /// The window for a file: the larger of the flag and the pragma.
    pub fn window_for(&self, src: &Source) -> i64 {
        let flag = self.window.unwrap_or(DEFAULT_WINDOW);
        src.pragmas.window.map_or(flag, |p| p.max(flag))
    }

    pub fn check_options(&self, src: &Source) -> CheckOptions {
        CheckOptions {
            window: self.window_for(src),
            strict_overapp: self.strict_overapp || src.pragmas.strict_overapp,
            assert_unit_payload: self.assert_unit_payload || src.pragmas.assert_unit_payload,
        }
    }

    pub fn interp_options(&self, src: &Source) -> InterpOptions {
        let mut o = InterpOptions::new(self.window_for(src));
        o.assert_unit_payload = self.assert_unit_payload || src.pragmas.assert_unit_payload;
        o.strategy = Strategy::DepthFirst;
        o
    }

    fn smt_options(&self, window: i64) -> SmtOptions {
        SmtOptions {
            window: if self.smt_unbounded {
                None
            } else {
                Some(window)
            },
        }
    }

    fn decider(&self, window: i64) -> Result<Box<dyn Decider>, String> {
        match self.backend {
            Backend::Bounded => Ok(Box::new(BoundedDecider { window })),
            Backend::Smt => {
                let cfg = SolverConfig::resolve(
                    self.solver_cmd.as_deref(),
                    self.timeout_ms,
                    self.smt_options(window),
                )
                .ok_or_else(|| {
                    format!(
                        "the smt backend needs --solver-cmd or {}",
                        crate::solver::SOLVER_ENV
                    )
                })?;
                Ok(Box::new(SmtDecider { config: cfg }))
            }
        }
    }
}

/// Buffered result of a command on one file.
#[derive(Clone, Debug)]
pub struct FileOutput {
    pub path: PathBuf,
    pub text: String,
    pub exit: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Check,
    Run,
    Oracle,
    Diff,
    EmitSmt,
}

/// Run `cmd` over `path` and return the per-file outputs in path order.
pub fn execute(cmd: Command, path: &Path, settings: &Settings) -> Vec<FileOutput> {
    let files = match collect(path) {
        Ok(f) if !f.is_empty() => f,
        Ok(_) => {
            return vec![FileOutput {
                path: path.to_path_buf(),
                text: format!("{}: no .cov files found", path.display()),
                exit: exit::USAGE,
            }]
        }
        Err(e) => {
            return vec![FileOutput {
                path: path.to_path_buf(),
                text: format!("{}: {e}", path.display()),
                exit: exit::USAGE,
            }]
        }
    };
    files
        .par_iter()
        .map(|f| one_file(cmd, f, settings))
        .collect()
}

/// Combined exit code: usage errors dominate, then rejections (or
/// soundness bugs), then inconclusive results.
pub fn combined_exit(outputs: &[FileOutput]) -> i32 {
    let has = |c| outputs.iter().any(|o| o.exit == c);
    if has(exit::USAGE) {
        exit::USAGE
    } else if has(exit::REJECT) {
        exit::REJECT
    } else if has(exit::INCONCLUSIVE) {
        exit::INCONCLUSIVE
    } else {
        exit::ACCEPT
    }
}

fn one_file(cmd: Command, path: &Path, settings: &Settings) -> FileOutput {
    let src = match Source::load(path) {
        Ok(s) => s,
        Err(e) => return load_failure(path, &e, settings),
    };
    let (text, exit) = match cmd {
        Command::Check => check(&src, settings),
        Command::Run => run(&src, settings),
        Command::Oracle => oracle(&src, settings),
        Command::Diff => diff(&src, settings),
        Command::EmitSmt => emit_smt(&src, settings),
    };
    FileOutput {
        path: path.to_path_buf(),
        text,
        exit,
    }
}

fn load_failure(path: &Path, e: &LoadError, settings: &Settings) -> FileOutput {
    let text = if settings.json {
        let code = match e {
            LoadError::Io(..) => "io",
            LoadError::Parse(..) => "parse",
            LoadError::Pragma(..) => "pragma",
        };
        render(json!({
            "schema": SCHEMA,
            "file": path.display().to_string(),
            "result": "error",
            "error": { "code": code, "message": e.to_string() },
        }))
    } else {
        format!("error: {e}")
    };
    FileOutput {
        path: path.to_path_buf(),
        text,
        exit: exit::USAGE,
    }
}

fn render(v: Value) -> String {
    serde_json::to_string(&v).expect("JSON values always serialize")
}

/// JSON encoding of runtime values: unit is `null`, pairs are arrays.
pub fn value_json(v: &SemanticValue) -> Value {
    match v {
        SemanticValue::Unit => Value::Null,
        SemanticValue::Bool(b) => json!(b),
        SemanticValue::Int(n) => json!(n),
        SemanticValue::Pair(a, b) => json!([value_json(a), value_json(b)]),
    }
}

fn witness_json(w: &[(String, SemanticValue)]) -> Value {
    let mut m = Map::new();
    for (x, v) in w {
        m.insert(if x == NU { "v".into() } else { x.clone() }, value_json(v));
    }
    Value::Object(m)
}

fn error_json(e: &TypeError) -> Value {
    let mut m = Map::new();
    m.insert("code".into(), json!(e.code()));
    m.insert("message".into(), json!(e.to_string()));
    if let Some(s) = e.span() {
        m.insert("line".into(), json!(s.line));
        m.insert("col".into(), json!(s.col));
    }
    match e {
        TypeError::VcInvalid {
            rule, id, witness, ..
        } => {
            m.insert("rule".into(), json!(rule));
            m.insert("vc".into(), json!(id));
            if let Some(w) = witness {
                m.insert("witness".into(), witness_json(w));
            }
        }
        TypeError::Inconclusive { rule, id, .. } => {
            m.insert("rule".into(), json!(rule));
            m.insert("vc".into(), json!(id));
        }
        _ => {}
    }
    Value::Object(m)
}

fn result_label(r: &Result<(), TypeError>) -> (&'static str, i32) {
    match r {
        Ok(()) => ("accepted", exit::ACCEPT),
        Err(e) if e.is_inconclusive() => ("inconclusive", exit::INCONCLUSIVE),
        Err(_) => ("rejected", exit::REJECT),
    }
}

/// Type check a loaded source with the configured backend.
pub fn run_checker(src: &Source, settings: &Settings) -> Result<CheckReport, String> {
    let opts = settings.check_options(src);
    let mut decider = settings.decider(opts.window)?;
    let e = &src.elaborated;
    Ok(check_program(
        &e.term,
        &e.goal,
        &e.spans,
        opts,
        decider.as_mut(),
    ))
}

fn check(src: &Source, settings: &Settings) -> (String, i32) {
    let start = Instant::now();
    let report = match run_checker(src, settings) {
        Ok(r) => r,
        Err(msg) => return (format!("error: {msg}"), exit::USAGE),
    };
    let elapsed = start.elapsed();
    let (label, code) = result_label(&report.result);
    let window = settings.window_for(src);
    let file = src.path.display().to_string();
    if settings.json {
        let vcs: Vec<Value> = report
            .vcs
            .iter()
            .map(|r| {
                let mut m = Map::new();
                m.insert("id".into(), json!(r.id));
                m.insert("rule".into(), json!(r.rule));
                m.insert("verdict".into(), json!(r.verdict.label()));
                m.insert("method".into(), json!(r.method));
                if let Verdict::Invalid(Some(w)) = &r.verdict {
                    m.insert("witness".into(), witness_json(w));
                }
                Value::Object(m)
            })
            .collect();
        let mut m = Map::new();
        m.insert("schema".into(), json!(SCHEMA));
        m.insert("file".into(), json!(file));
        m.insert("window".into(), json!(window));
        m.insert("goal".into(), json!(src.elaborated.goal.to_string()));
        m.insert("result".into(), json!(label));
        m.insert(
            "error".into(),
            report.result.as_ref().err().map_or(Value::Null, error_json),
        );
        m.insert("vcs".into(), Value::Array(vcs));
        if settings.timing {
            m.insert("elapsed_ms".into(), json!(elapsed.as_millis() as u64));
        }
        (render(Value::Object(m)), code)
    } else {
        let n = report.vcs.len();
        let text = match &report.result {
            Ok(()) => format!("{file}: accepted (window {window}, {n} VCs)"),
            Err(e) => {
                let at = e.span().map(|s| format!(" at {s}")).unwrap_or_default();
                format!("{file}: {label} [{}]{at}: {e}", e.code())
            }
        };
        (text, code)
    }
}

fn run(src: &Source, settings: &Settings) -> (String, i32) {
    let opts = settings.interp_options(src);
    match outcomes_with(&src.elaborated.term, &Env::new(), opts) {
        Ok(set) => {
            let values: Vec<Value> = set.values.iter().map(value_json).collect();
            let text = if settings.json {
                render(json!({
                    "schema": SCHEMA,
                    "file": src.path.display().to_string(),
                    "window": opts.window,
                    "values": values,
                    "stuck": set.stuck,
                }))
            } else {
                render(json!({ "values": values }))
            };
            (text, exit::ACCEPT)
        }
        Err(e) => (
            format!("{}: evaluation failed: {e}", src.path.display()),
            exit::REJECT,
        ),
    }
}

fn membership_json(m: &Membership) -> Value {
    match m {
        Membership::Member => json!({ "result": "member" }),
        Membership::NonMember(r) => json!({ "result": "nonmember", "reason": r }),
        Membership::Inconclusive(r) => json!({ "result": "inconclusive", "reason": r }),
    }
}

fn membership_text(m: &Membership) -> String {
    match m {
        Membership::Member => "member".into(),
        Membership::NonMember(r) => format!("nonmember ({r})"),
        Membership::Inconclusive(r) => format!("inconclusive ({r})"),
    }
}

fn oracle(src: &Source, settings: &Settings) -> (String, i32) {
    let opts = settings.interp_options(src);
    let e = &src.elaborated;
    let mut o = Oracle::with_options(opts);
    o.observe(&e.term, &[&e.goal]);
    let result = o
        .member_type(&e.term, &e.goal)
        .and_then(|m| Ok((m, o.corollary(&e.term, &e.goal)?)));
    let file = src.path.display().to_string();
    let (m, corollary) = match result {
        Ok(r) => r,
        Err(err) => return (format!("{file}: oracle failed: {err}"), exit::INCONCLUSIVE),
    };
    let code = match &m {
        Membership::Member => exit::ACCEPT,
        Membership::NonMember(_) => exit::REJECT,
        Membership::Inconclusive(_) => exit::INCONCLUSIVE,
    };
    let text = if settings.json {
        render(json!({
            "schema": SCHEMA,
            "file": file,
            "window": opts.window,
            "goal": e.goal.to_string(),
            "membership": membership_json(&m),
            "corollary": corollary.as_ref().map_or(Value::Null, membership_json),
        }))
    } else {
        let cor = corollary
            .map(|c| format!(", corollary {}", membership_text(&c)))
            .unwrap_or_default();
        format!("{file}: {}{cor}", membership_text(&m))
    };
    (text, code)
}

fn diff(src: &Source, settings: &Settings) -> (String, i32) {
    let file = src.path.display().to_string();
    let report = match run_checker(src, settings) {
        Ok(r) => r,
        Err(msg) => return (format!("error: {msg}"), exit::USAGE),
    };
    let e = &src.elaborated;
    let opts = settings.interp_options(src);
    let fr = match fundamental_check(&e.term, &e.goal, &[], report.result, opts) {
        Ok(r) => r,
        Err(err) => return (format!("{file}: oracle failed: {err}"), exit::INCONCLUSIVE),
    };
    let code = match fr.verdict {
        DiffVerdict::SoundnessBug => exit::REJECT,
        DiffVerdict::Inconclusive => exit::INCONCLUSIVE,
        DiffVerdict::Consistent | DiffVerdict::Incomplete => exit::ACCEPT,
    };
    let checker = if fr.checker.is_ok() { "ok" } else { "err" };
    let text = if settings.json {
        render(json!({
            "schema": SCHEMA,
            "file": file,
            "window": opts.window,
            "checker": checker,
            "checker_error": fr.checker.as_ref().err().map_or(Value::Null, error_json),
            "oracle": membership_json(&fr.oracle),
            "corollary": fr.corollary.as_ref().map_or(Value::Null, membership_json),
            "verdict": fr.verdict.label(),
        }))
    } else {
        format!(
            "{file}: checker={checker} oracle={} verdict={}",
            fr.oracle.label(),
            fr.verdict.label()
        )
    };
    (text, code)
}

/// Deterministic file name for VC `id` of `stem`.
pub fn smt_file_name(stem: &str, id: usize, rule: &str) -> String {
    format!("{stem}.vc{id:03}.{rule}.smt2")
}

fn emit_smt(src: &Source, settings: &Settings) -> (String, i32) {
    let Some(out) = &settings.out else {
        return ("error: emit-smt needs --out DIR".into(), exit::USAGE);
    };
    let opts = settings.check_options(src);
    let mut bounded = BoundedDecider {
        window: opts.window,
    };
    let e = &src.elaborated;
    let report = check_program(&e.term, &e.goal, &e.spans, opts, &mut bounded);
    if let Err(err) = std::fs::create_dir_all(out) {
        return (format!("error: {}: {err}", out.display()), exit::USAGE);
    }
    let stem = src
        .path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "vc".into());
    let smt = settings.smt_options(opts.window);
    let mut written = Vec::new();
    for r in &report.vcs {
        let name = smt_file_name(&stem, r.id, r.rule);
        let p = out.join(&name);
        if let Err(err) = std::fs::write(&p, emit_smt2_with(&r.vc, smt)) {
            return (format!("error: {}: {err}", p.display()), exit::USAGE);
        }
        written.push(p.display().to_string());
    }
    let text = if settings.json {
        render(
            json!({ "schema": SCHEMA, "file": src.path.display().to_string(), "files": written }),
        )
    } else {
        written.join("\n")
    };
    (text, exit::ACCEPT)
}
