//! BENCH subset: `INPUT(a)`, `OUTPUT(y)`, `y = OP(a, b, ...)`, `#` comments.
//!
//! Comment lines of the form `#pragma <key> <args...>` carry metadata that
//! plain BENCH readers ignore (`name`, and for locked files `relation_bits`,
//! `locked`, `origin`).

use std::fmt::Write as _;

use super::{GateOp, GateSpec, Netlist, NetlistBuilder, NetlistError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Pragma {
    pub key: String,
    pub args: Vec<String>,
    pub line: usize,
}

pub fn parse_bench(text: &str) -> Result<Netlist, NetlistError> {
    parse_with_pragmas(text).map(|(net, _)| net)
}

pub(crate) fn parse_with_pragmas(text: &str) -> Result<(Netlist, Vec<Pragma>), NetlistError> {
    let mut builder = NetlistBuilder::new("top");
    let mut pragmas = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let (code, comment) = match raw.find('#') {
            Some(p) => (&raw[..p], Some(&raw[p + 1..])),
            None => (raw, None),
        };
        if let Some(c) = comment {
            let c = c.trim();
            if let Some(rest) = c.strip_prefix("pragma") {
                let mut parts = rest.split_whitespace();
                if let Some(key) = parts.next() {
                    let args: Vec<String> = parts.map(str::to_string).collect();
                    if key == "name" {
                        if let Some(n) = args.first() {
                            builder.set_name(n.clone());
                        }
                    }
                    pragmas.push(Pragma {
                        key: key.to_string(),
                        args,
                        line: line_no,
                    });
                }
            }
        }
        let code = code.trim();
        if code.is_empty() {
            continue;
        }
        parse_statement(code, line_no, &mut builder)?;
    }
    Ok((builder.build()?, pragmas))
}

fn syntax(line: usize, msg: impl Into<String>) -> NetlistError {
    NetlistError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn valid_ident(s: &str) -> bool {
    !s.is_empty()
        && !s
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | ',' | '=' | '#'))
}

/// Splits `OP(a, b)` into `("OP", ["a", "b"])`. A bare `OP` has no args.
fn split_call(s: &str, line: usize) -> Result<(&str, Vec<&str>), NetlistError> {
    let s = s.trim();
    let Some(open) = s.find('(') else {
        return Ok((s, Vec::new()));
    };
    let head = s[..open].trim();
    let rest = &s[open + 1..];
    let close = rest
        .rfind(')')
        .ok_or_else(|| syntax(line, "missing `)`"))?;
    if !rest[close + 1..].trim().is_empty() {
        return Err(syntax(line, "trailing text after `)`"));
    }
    let inner = rest[..close].trim();
    let args = if inner.is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(str::trim).collect()
    };
    for a in &args {
        if !valid_ident(a) {
            return Err(syntax(line, format!("bad wire name `{a}`")));
        }
    }
    Ok((head, args))
}

fn parse_statement(code: &str, line: usize, b: &mut NetlistBuilder) -> Result<(), NetlistError> {
    if let Some(eq) = code.find('=') {
        let out = code[..eq].trim();
        if !valid_ident(out) {
            return Err(syntax(line, format!("bad wire name `{out}`")));
        }
        let (op_name, args) = split_call(&code[eq + 1..], line)?;
        let op = GateOp::from_name(op_name).ok_or_else(|| NetlistError::UnknownOp {
            op: op_name.to_string(),
            line: Some(line),
        })?;
        if !op.arity_ok(args.len()) {
            return Err(NetlistError::Arity {
                op,
                got: args.len(),
                line: Some(line),
            });
        }
        b.gate_spec(GateSpec {
            out: out.to_string(),
            op,
            args: args.into_iter().map(str::to_string).collect(),
            line: Some(line),
        });
        return Ok(());
    }
    let (kw, args) = split_call(code, line)?;
    if args.len() != 1 {
        return Err(syntax(line, format!("`{kw}` takes exactly one wire")));
    }
    match kw.to_ascii_uppercase().as_str() {
        "INPUT" => b.input_at(args[0], line),
        "OUTPUT" => b.output_at(args[0], line),
        _ => return Err(syntax(line, format!("unknown statement `{kw}`"))),
    };
    Ok(())
}

pub fn emit_bench(net: &Netlist) -> String {
    emit_with_pragmas(net, &[])
}

pub(crate) fn emit_with_pragmas(net: &Netlist, extra: &[(String, Vec<String>)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "#pragma name {}", net.name());
    for (key, args) in extra {
        let _ = writeln!(s, "#pragma {} {}", key, args.join(" "));
    }
    let _ = writeln!(
        s,
        "# {} inputs, {} outputs, {} gates",
        net.inputs().len(),
        net.outputs().len(),
        net.gates().len()
    );
    for name in net.input_names() {
        let _ = writeln!(s, "INPUT({name})");
    }
    for name in net.output_names() {
        let _ = writeln!(s, "OUTPUT({name})");
    }
    for g in net.gates() {
        let args: Vec<&str> = g.args.iter().map(|&a| net.wire_name(a)).collect();
        let _ = writeln!(s, "{} = {}({})", net.wire_name(g.out), g.op, args.join(", "));
    }
    s
}
