//! DIMACS CNF text and an adapter for external solver binaries.

use std::fmt::Write as _;
use std::io::Write as _;
use std::process::Command;

use thiserror::Error;

use super::{Cnf, Lit, Model, SatResult};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `p cnf` header")]
    NoHeader,
    #[error("header declares {declared} clauses, found {found}")]
    ClauseCount { declared: usize, found: usize },
}

pub fn write_dimacs(cnf: &Cnf) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "p cnf {} {}", cnf.num_vars, cnf.clauses.len());
    for c in &cnf.clauses {
        for l in c {
            let _ = write!(s, "{} ", l.to_dimacs());
        }
        s.push_str("0\n");
    }
    s
}

pub fn parse_dimacs(text: &str) -> Result<Cnf, DimacsError> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('c') || t.starts_with('%') {
            continue;
        }
        if let Some(rest) = t.strip_prefix('p') {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            let bad = || DimacsError::Syntax {
                line: line_no,
                msg: format!("bad header `{t}`"),
            };
            if parts.len() != 3 || parts[0] != "cnf" || header.is_some() {
                return Err(bad());
            }
            let v = parts[1].parse().map_err(|_| bad())?;
            let c = parts[2].parse().map_err(|_| bad())?;
            header = Some((v, c));
            continue;
        }
        let (num_vars, _) = header.ok_or(DimacsError::NoHeader)?;
        for tok in t.split_whitespace() {
            let x: i64 = tok.parse().map_err(|_| DimacsError::Syntax {
                line: line_no,
                msg: format!("bad literal `{tok}`"),
            })?;
            match Lit::from_dimacs(x) {
                None => clauses.push(std::mem::take(&mut current)),
                Some(l) if l.var().0 < num_vars => current.push(l),
                Some(_) => {
                    return Err(DimacsError::Syntax {
                        line: line_no,
                        msg: format!("literal {x} exceeds {num_vars} variables"),
                    })
                }
            }
        }
    }
    let (num_vars, declared) = header.ok_or(DimacsError::NoHeader)?;
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != declared {
        return Err(DimacsError::ClauseCount {
            declared,
            found: clauses.len(),
        });
    }
    Ok(Cnf { num_vars, clauses })
}

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("empty solver command")]
    EmptyCommand,
    #[error("could not run `{cmd}`: {source}")]
    Spawn {
        cmd: String,
        source: std::io::Error,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver output has no `s` line (exit status {status})")]
    NoStatus { status: String },
    #[error("unparsable solver output: {0}")]
    Parse(String),
    #[error("solver reported UNKNOWN")]
    Unknown,
    #[error("solver model violates clause {0}")]
    BadModel(usize),
}

/// Writes `cnf` to a temporary file, runs `cmd <file>`, and reads back the
/// standard `s`/`v` lines. `cmd` is split on whitespace. SAT models are
/// checked against every clause before being returned.
pub fn solve_external(cnf: &Cnf, cmd: &str) -> Result<SatResult, ExternalError> {
    let mut parts = cmd.split_whitespace();
    let program = parts.next().ok_or(ExternalError::EmptyCommand)?;
    let mut file = tempfile::Builder::new().suffix(".cnf").tempfile()?;
    file.write_all(write_dimacs(cnf).as_bytes())?;
    file.flush()?;
    let out = Command::new(program)
        .args(parts)
        .arg(file.path())
        .output()
        .map_err(|source| ExternalError::Spawn {
            cmd: cmd.to_string(),
            source,
        })?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    let mut status = None;
    let mut model = vec![false; cnf.num_vars as usize];
    for line in stdout.lines() {
        let t = line.trim();
        if let Some(s) = t.strip_prefix("s ") {
            status = Some(s.trim().to_string());
        } else if let Some(v) = t.strip_prefix("v ") {
            for tok in v.split_whitespace() {
                let x: i64 = tok
                    .parse()
                    .map_err(|_| ExternalError::Parse(format!("bad model literal `{tok}`")))?;
                if let Some(l) = Lit::from_dimacs(x) {
                    let slot = model
                        .get_mut(l.var().index())
                        .ok_or_else(|| ExternalError::Parse(format!("model literal {x} out of range")))?;
                    *slot = !l.is_neg();
                }
            }
        }
    }
    match status.as_deref() {
        Some("SATISFIABLE") => {
            let m = Model(model);
            if let Some(i) = cnf.clauses.iter().position(|c| !c.iter().any(|&l| m.lit(l))) {
                return Err(ExternalError::BadModel(i));
            }
            Ok(SatResult::Sat(m))
        }
        Some("UNSATISFIABLE") => Ok(SatResult::Unsat),
        Some("UNKNOWN") => Err(ExternalError::Unknown),
        Some(other) => Err(ExternalError::Parse(format!("status `{other}`"))),
        None => Err(ExternalError::NoStatus {
            status: out.status.to_string(),
        }),
    }
}
