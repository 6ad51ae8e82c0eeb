//! `.keyrel` files: one term per line, `#` comments.
//!
//! ```text
//! r0 = IN(x1)
//! r2 = CONST(0)
//! r3 = AND(r0, r1)
//! ```
//!
//! `RAND` is accepted as a stimulus and compiled to a constant.

use super::{KeyRelError, KeyRelation, LatentOp, Term};

pub fn parse_keyrel(text: &str) -> Result<KeyRelation, KeyRelError> {
    parse_keyrel_with(text, false)
}

/// Like [`parse_keyrel`], with `RAND` stimuli fixed to `rand_value`.
pub fn parse_keyrel_with(text: &str, rand_value: bool) -> Result<KeyRelation, KeyRelError> {
    let mut terms = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let code = raw.split('#').next().unwrap_or("").trim();
        if code.is_empty() {
            continue;
        }
        let syntax = |msg: String| KeyRelError::Syntax { line, msg };
        let (bit, rhs) = code
            .split_once('=')
            .ok_or_else(|| syntax("expected `bit = TERM(...)`".into()))?;
        let bit = bit.trim();
        if bit.is_empty() || bit.contains(char::is_whitespace) {
            return Err(syntax(format!("bad relation bit `{bit}`")));
        }
        let rhs = rhs.trim();
        let (head, args) = match rhs.find('(') {
            Some(open) => {
                let inner = rhs[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| syntax("missing `)`".into()))?;
                let args: Vec<&str> = if inner.trim().is_empty() {
                    Vec::new()
                } else {
                    inner.split(',').map(str::trim).collect()
                };
                (rhs[..open].trim(), args)
            }
            None => (rhs, Vec::new()),
        };
        let term = match head.to_ascii_uppercase().as_str() {
            "IN" => match args.as_slice() {
                [x] if !x.is_empty() => Term::input(bit, *x),
                _ => return Err(syntax("IN takes one input name".into())),
            },
            "CONST" => match args.as_slice() {
                ["0"] => Term::constant(bit, false),
                ["1"] => Term::constant(bit, true),
                _ => return Err(syntax("CONST takes 0 or 1".into())),
            },
            "RAND" if args.is_empty() => Term::constant(bit, rand_value),
            other => {
                let op = LatentOp::from_name(other).ok_or_else(|| syntax(format!("unknown term `{head}`")))?;
                if args.len() != op.arity() {
                    return Err(syntax(format!("{op} takes {} argument(s), got {}", op.arity(), args.len())));
                }
                Term::latent(bit, op, args)
            }
        };
        terms.push(term);
    }
    KeyRelation::new(terms)
}

pub fn emit_keyrel(psi: &KeyRelation) -> String {
    let mut s = String::new();
    for t in psi.terms() {
        s.push_str(&t.to_string());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fixture_and_round_trips() {
        let text = include_str!("../../fixtures/adder.keyrel");
        let psi = parse_keyrel(text).unwrap();
        assert_eq!(psi.relation_bits(), ["r0", "r1", "r2", "r3", "r4"]);
        assert_eq!(parse_keyrel(&emit_keyrel(&psi)).unwrap(), psi);
        assert!(emit_keyrel(&psi).contains("r3 = AND(r0, r1)\n"));
    }

    #[test]
    fn rand_is_a_constant() {
        let psi = parse_keyrel("r2 = RAND\n").unwrap();
        assert_eq!(emit_keyrel(&psi), "r2 = CONST(0)\n");
        let psi = parse_keyrel_with("r2 = RAND()\n", true).unwrap();
        assert_eq!(emit_keyrel(&psi), "r2 = CONST(1)\n");
    }

    #[test]
    fn syntax_errors_carry_lines() {
        for bad in ["r0 IN(x)", "r0 = IN()", "r0 = CONST(2)", "r0 = MUX(a, b)", "r1 = AND(r0)", "r0 = IN(x"] {
            let text = format!("# header\n{bad}\n");
            assert!(
                matches!(parse_keyrel(&text), Err(KeyRelError::Syntax { line: 2, .. })),
                "{bad}"
            );
        }
    }
}
