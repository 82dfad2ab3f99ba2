//! Loading `.cov` files and their header pragmas.

use std::fmt;
use std::path::{Path, PathBuf};

use covcore::anf::{elaborate_program, Elaborated};
use covcore::parser::parse_program;
use covcore::syntax::SurfaceProgram;

/// Settings read from `(* covcheck: key=value ... *)` comments.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Pragmas {
    pub window: Option<i64>,
    pub strict_overapp: bool,
    pub assert_unit_payload: bool,
}

/// Expected checker verdict, from `(* expect: accept *)` or
/// `(* expect: reject <code> *)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expectation {
    Accept,
    Reject(Option<String>),
}

#[derive(Debug)]
pub enum LoadError {
    Io(PathBuf, std::io::Error),
    Parse(PathBuf, String),
    Pragma(PathBuf, String),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            LoadError::Parse(p, e) => write!(f, "{}:{e}", p.display()),
            LoadError::Pragma(p, e) => write!(f, "{}: bad pragma: {e}", p.display()),
        }
    }
}

impl std::error::Error for LoadError {}

#[derive(Clone, Debug)]
pub struct Source {
    pub path: PathBuf,
    pub text: String,
    pub pragmas: Pragmas,
    pub expect: Option<Expectation>,
    pub program: SurfaceProgram,
    pub elaborated: Elaborated,
}

/// Bodies of the top-level `(* ... *)` comments that start with `key:`.
fn directives<'a>(text: &'a str, key: &str) -> Vec<&'a str> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find("(*") {
        let after = &rest[start + 2..];
        let Some(end) = after.find("*)") else { break };
        let body = after[..end].trim();
        if let Some(v) = body.strip_prefix(key).and_then(|b| b.strip_prefix(':')) {
            out.push(v.trim());
        }
        rest = &after[end + 2..];
    }
    out
}

pub fn parse_pragmas(text: &str) -> Result<Pragmas, String> {
    let mut p = Pragmas::default();
    for d in directives(text, "covcheck") {
        for item in d.split_whitespace() {
            match item.split_once('=') {
                Some(("window", v)) => {
                    let w: i64 = v
                        .parse()
                        .map_err(|_| format!("window `{v}` is not a number"))?;
                    if w < 0 {
                        return Err(format!("window {w} is negative"));
                    }
                    p.window = Some(w);
                }
                None if item == "strict-overapp" => p.strict_overapp = true,
                None if item == "assert-unit-payload" => p.assert_unit_payload = true,
                _ => return Err(format!("unknown setting `{item}`")),
            }
        }
    }
    Ok(p)
}

pub fn parse_expectation(text: &str) -> Result<Option<Expectation>, String> {
    let ds = directives(text, "expect");
    let Some(d) = ds.first() else { return Ok(None) };
    let mut words = d.split_whitespace();
    match (words.next(), words.next()) {
        (Some("accept"), None) => Ok(Some(Expectation::Accept)),
        (Some("reject"), code) => Ok(Some(Expectation::Reject(code.map(str::to_string)))),
        _ => Err(format!("unknown expectation `{d}`")),
    }
}

impl Source {
    pub fn load(path: &Path) -> Result<Source, LoadError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| LoadError::Io(path.to_path_buf(), e))?;
        Source::from_text(path, text)
    }

    pub fn from_text(path: &Path, text: String) -> Result<Source, LoadError> {
        let pragmas = parse_pragmas(&text).map_err(|e| LoadError::Pragma(path.to_path_buf(), e))?;
        let expect =
            parse_expectation(&text).map_err(|e| LoadError::Pragma(path.to_path_buf(), e))?;
        let program = parse_program(&text)
            .map_err(|e| LoadError::Parse(path.to_path_buf(), e.to_string()))?;
        let elaborated = elaborate_program(&program)
            .map_err(|e| LoadError::Parse(path.to_path_buf(), e.to_string()))?;
        Ok(Source {
            path: path.to_path_buf(),
            text,
            pragmas,
            expect,
            program,
            elaborated,
        })
    }
}

/// `.cov` files under `path` (or `path` itself), sorted.
pub fn collect(path: &Path) -> std::io::Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut out = Vec::new();
    for entry in std::fs::read_dir(path)? {
        let p = entry?.path();
        if p.is_dir() {
            out.extend(collect(&p)?);
        } else if p.extension().is_some_and(|e| e == "cov") {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pragmas_and_expectations() {
        let text = "(* covcheck: window=64 strict-overapp *)\n(* expect: reject linearity *)\ncheck 1 : [int | true]";
        let p = parse_pragmas(text).unwrap();
        assert_eq!(p.window, Some(64));
        assert!(p.strict_overapp && !p.assert_unit_payload);
        assert_eq!(
            parse_expectation(text).unwrap(),
            Some(Expectation::Reject(Some("linearity".into())))
        );
        assert!(parse_pragmas("(* covcheck: window=x *)").is_err());
        assert_eq!(parse_expectation("(* plain *)").unwrap(), None);
    }
}
