//! Key relations: ordered stimulus and latent terms over relation bits.
//!
//! A relation is kept in functional form. Every relation bit is assigned by
//! exactly one term and terms only read bits defined before them, so a
//! relation is a total function from circuit inputs to relation bits.

mod sketch;
mod sop;
mod text;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{GateOp, LockedCircuit, Netlist, NetlistBuilder, NetlistError};

pub use sketch::{
    Budget, ExprNode, ExprSketch, Grammar, LockedExpr, Operand, RelationSketch, SketchError,
};
pub use sop::{bit_sop, emit_pla, to_sop, SopEntry, SopTable, DEFAULT_SUPPORT_LIMIT};
pub use text::{emit_keyrel, parse_keyrel, parse_keyrel_with};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LatentOp {
    And,
    Or,
    Xor,
    Not,
    Copy,
}

impl LatentOp {
    pub const ALL: [LatentOp; 5] = [
        LatentOp::And,
        LatentOp::Or,
        LatentOp::Xor,
        LatentOp::Not,
        LatentOp::Copy,
    ];

    pub fn arity(self) -> usize {
        match self {
            LatentOp::Not | LatentOp::Copy => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LatentOp::And => "AND",
            LatentOp::Or => "OR",
            LatentOp::Xor => "XOR",
            LatentOp::Not => "NOT",
            LatentOp::Copy => "COPY",
        }
    }

    pub fn from_name(s: &str) -> Option<LatentOp> {
        let up = s.to_ascii_uppercase();
        LatentOp::ALL.iter().copied().find(|op| op.name() == up)
    }

    pub fn eval(self, a: bool, b: bool) -> bool {
        match self {
            LatentOp::And => a && b,
            LatentOp::Or => a || b,
            LatentOp::Xor => a ^ b,
            LatentOp::Not => !a,
            LatentOp::Copy => a,
        }
    }

    pub fn gate_op(self) -> GateOp {
        match self {
            LatentOp::And => GateOp::And,
            LatentOp::Or => GateOp::Or,
            LatentOp::Xor => GateOp::Xor,
            LatentOp::Not => GateOp::Not,
            LatentOp::Copy => GateOp::Buf,
        }
    }
}

impl fmt::Display for LatentOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    Input(String),
    Const(bool),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TermKind {
    Stimulus(Source),
    Latent { op: LatentOp, args: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Term {
    pub bit: String,
    pub kind: TermKind,
}

impl Term {
    pub fn input(bit: impl Into<String>, x: impl Into<String>) -> Term {
        Term {
            bit: bit.into(),
            kind: TermKind::Stimulus(Source::Input(x.into())),
        }
    }

    pub fn constant(bit: impl Into<String>, v: bool) -> Term {
        Term {
            bit: bit.into(),
            kind: TermKind::Stimulus(Source::Const(v)),
        }
    }

    pub fn latent<S: Into<String>>(bit: impl Into<String>, op: LatentOp, args: impl IntoIterator<Item = S>) -> Term {
        Term {
            bit: bit.into(),
            kind: TermKind::Latent {
                op,
                args: args.into_iter().map(Into::into).collect(),
            },
        }
    }

    pub fn is_latent(&self) -> bool {
        matches!(self.kind, TermKind::Latent { .. })
    }

    pub fn args(&self) -> &[String] {
        match &self.kind {
            TermKind::Latent { args, .. } => args,
            TermKind::Stimulus(_) => &[],
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            TermKind::Stimulus(Source::Input(x)) => write!(f, "{} = IN({x})", self.bit),
            TermKind::Stimulus(Source::Const(v)) => write!(f, "{} = CONST({})", self.bit, u8::from(*v)),
            TermKind::Latent { op, args } => write!(f, "{} = {op}({})", self.bit, args.join(", ")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyRelError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("relation bit `{0}` assigned twice")]
    Duplicate(String),
    #[error("relation bit `{bit}` is read before it is defined")]
    Undefined { bit: String },
    #[error("{op} takes {expected} argument(s), got {got} (bit `{bit}`)")]
    Arity {
        bit: String,
        op: LatentOp,
        expected: usize,
        got: usize,
    },
    #[error("stimulus source `{0}` is not provided")]
    MissingSource(String),
    #[error("relation does not define flagged relation bit `{0}`")]
    MissingBit(String),
    #[error("unknown relation bit `{0}`")]
    UnknownBit(String),
    #[error("bit `{bit}` has a support of {size} bits, over the limit of {limit}")]
    SupportTooLarge { bit: String, size: usize, limit: usize },
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

/// Size measures of a relation. `gate_count` counts latent AND/OR/XOR/NOT
/// terms; each term is one shared node, so a bit read by several terms is
/// counted once. COPY is wiring and costs nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Cost {
    pub latent_terms: usize,
    pub stimulus_terms: usize,
    pub relation_bits: usize,
    pub gate_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KeyRelation {
    terms: Vec<Term>,
}

impl KeyRelation {
    pub fn empty() -> KeyRelation {
        KeyRelation::default()
    }

    /// Validates single assignment, define-before-use, and arities.
    pub fn new(terms: Vec<Term>) -> Result<KeyRelation, KeyRelError> {
        let mut defined: HashSet<&str> = HashSet::new();
        for t in &terms {
            if let TermKind::Latent { op, args } = &t.kind {
                if args.len() != op.arity() {
                    return Err(KeyRelError::Arity {
                        bit: t.bit.clone(),
                        op: *op,
                        expected: op.arity(),
                        got: args.len(),
                    });
                }
                for a in args {
                    if !defined.contains(a.as_str()) {
                        return Err(KeyRelError::Undefined { bit: a.clone() });
                    }
                }
            }
            if !defined.insert(&t.bit) {
                return Err(KeyRelError::Duplicate(t.bit.clone()));
            }
        }
        Ok(KeyRelation { terms })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Relation bits in term order.
    pub fn relation_bits(&self) -> Vec<&str> {
        self.terms.iter().map(|t| t.bit.as_str()).collect()
    }

    pub fn position(&self, bit: &str) -> Option<usize> {
        self.terms.iter().position(|t| t.bit == bit)
    }

    pub fn term(&self, bit: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.bit == bit)
    }

    pub fn is_latent_bit(&self, bit: &str) -> bool {
        self.term(bit).is_some_and(Term::is_latent)
    }

    /// Circuit inputs read by stimulus terms, first use first.
    pub fn sources(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for t in &self.terms {
            if let TermKind::Stimulus(Source::Input(x)) = &t.kind {
                if !out.contains(&x.as_str()) {
                    out.push(x);
                }
            }
        }
        out
    }

    pub fn cost(&self) -> Cost {
        let latent = self.terms.iter().filter(|t| t.is_latent()).count();
        let gates = self
            .terms
            .iter()
            .filter(|t| matches!(&t.kind, TermKind::Latent { op, .. } if *op != LatentOp::Copy))
            .count();
        Cost {
            latent_terms: latent,
            stimulus_terms: self.terms.len() - latent,
            relation_bits: self.terms.len(),
            gate_count: gates,
        }
    }

    /// Evaluates every bit, in term order, from named input values.
    pub fn eval_with<F>(&self, mut input: F) -> Result<Vec<bool>, KeyRelError>
    where
        F: FnMut(&str) -> Option<bool>,
    {
        let mut vals: Vec<bool> = Vec::with_capacity(self.terms.len());
        let mut index: HashMap<&str, usize> = HashMap::new();
        for t in &self.terms {
            let v = match &t.kind {
                TermKind::Stimulus(Source::Input(x)) => {
                    input(x).ok_or_else(|| KeyRelError::MissingSource(x.clone()))?
                }
                TermKind::Stimulus(Source::Const(c)) => *c,
                TermKind::Latent { op, args } => {
                    let a = vals[index[args[0].as_str()]];
                    let b = args.get(1).is_some_and(|r| vals[index[r.as_str()]]);
                    op.eval(a, b)
                }
            };
            index.insert(&t.bit, vals.len());
            vals.push(v);
        }
        Ok(vals)
    }

    /// Evaluates with `x[i]` bound to input `names[i]`.
    pub fn eval(&self, names: &[String], x: &[bool]) -> Result<Vec<bool>, KeyRelError> {
        assert_eq!(names.len(), x.len());
        self.eval_with(|s| names.iter().position(|n| n == s).map(|i| x[i]))
    }

    /// Values of the named bits.
    pub fn eval_bits(&self, bits: &[String], names: &[String], x: &[bool]) -> Result<Vec<bool>, KeyRelError> {
        let all = self.eval(names, x)?;
        bits.iter()
            .map(|b| {
                self.position(b)
                    .map(|i| all[i])
                    .ok_or_else(|| KeyRelError::UnknownBit(b.clone()))
            })
            .collect()
    }

    /// `self` followed by `more`.
    pub fn extend(&self, more: &KeyRelation) -> Result<KeyRelation, KeyRelError> {
        let mut terms = self.terms.clone();
        terms.extend(more.terms.iter().cloned());
        KeyRelation::new(terms)
    }

    /// Bits needed to compute `roots`.
    pub fn support_closure<'a>(&'a self, roots: impl IntoIterator<Item = &'a str>) -> BTreeSet<&'a str> {
        let mut need: BTreeSet<&str> = roots.into_iter().collect();
        for t in self.terms.iter().rev() {
            if need.contains(t.bit.as_str()) {
                need.extend(t.args().iter().map(String::as_str));
            }
        }
        need
    }

    /// Only the terms needed for `roots`, in their original order.
    pub fn prune<'a>(&'a self, roots: impl IntoIterator<Item = &'a str>) -> KeyRelation {
        let need = self.support_closure(roots);
        KeyRelation {
            terms: self
                .terms
                .iter()
                .filter(|t| need.contains(t.bit.as_str()))
                .cloned()
                .collect(),
        }
    }

    /// Renames bits through `f`; arguments follow.
    pub fn rename(&self, mut f: impl FnMut(&str) -> String) -> KeyRelation {
        let map: HashMap<&str, String> = self.terms.iter().map(|t| (t.bit.as_str(), f(&t.bit))).collect();
        KeyRelation {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    bit: map[t.bit.as_str()].clone(),
                    kind: match &t.kind {
                        TermKind::Latent { op, args } => TermKind::Latent {
                            op: *op,
                            args: args.iter().map(|a| map[a.as_str()].clone()).collect(),
                        },
                        s => s.clone(),
                    },
                })
                .collect(),
        }
    }
}

impl fmt::Display for KeyRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|t| format!("({t})")).collect();
        f.write_str(&parts.join(", "))
    }
}

/// Name of relation bit `bit` inside an activated netlist: flagged bits keep
/// their name, internal ones get a `psi$` prefix.
fn inlined_name(bit: &str, flagged: &HashSet<String>) -> String {
    if flagged.contains(bit) {
        bit.to_string()
    } else {
        format!("psi${bit}")
    }
}

/// Activates `locked` with `psi`: a netlist over the non-relation inputs in
/// which every flagged relation bit is computed by the relation.
pub fn inline_relation(locked: &LockedCircuit, psi: &KeyRelation) -> Result<Netlist, KeyRelError> {
    let flagged: Vec<String> = locked.relation_names();
    let flagged_set: HashSet<String> = flagged.iter().cloned().collect();
    for r in &flagged {
        if psi.term(r).is_none() {
            return Err(KeyRelError::MissingBit(r.clone()));
        }
    }
    let xs = locked.x_names();
    let net = &locked.circuit;
    let mut b = NetlistBuilder::new(net.name());
    for x in &xs {
        b.input(x.clone());
    }
    for o in net.output_names() {
        b.output(o);
    }
    let needed = psi.prune(flagged.iter().map(String::as_str));
    for t in needed.terms() {
        let out = inlined_name(&t.bit, &flagged_set);
        match &t.kind {
            TermKind::Stimulus(Source::Input(x)) => {
                if !xs.contains(x) {
                    return Err(KeyRelError::MissingSource(x.clone()));
                }
                b.gate(out, GateOp::Buf, [x.clone()]);
            }
            TermKind::Stimulus(Source::Const(v)) => {
                let op = if *v { GateOp::Const1 } else { GateOp::Const0 };
                b.gate(out, op, Vec::<String>::new());
            }
            TermKind::Latent { op, args } => {
                b.gate(
                    out,
                    op.gate_op(),
                    args.iter().map(|a| inlined_name(a, &flagged_set)),
                );
            }
        }
    }
    for g in net.gates() {
        b.gate(
            net.wire_name(g.out),
            g.op,
            g.args.iter().map(|&a| net.wire_name(a).to_string()),
        );
    }
    Ok(b.build()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{format_vector, parse_bench, parse_locked_bench, parse_vector, TruthTable};

    pub(crate) fn adder_key() -> KeyRelation {
        parse_keyrel(include_str!("../../fixtures/adder.keyrel")).unwrap()
    }

    fn generated_key() -> KeyRelation {
        parse_keyrel(include_str!("../../fixtures/adder_generated.keyrel")).unwrap()
    }

    fn locked() -> LockedCircuit {
        parse_locked_bench(include_str!("../../fixtures/adder_locked.bench")).unwrap()
    }

    fn adder() -> Netlist {
        parse_bench(include_str!("../../fixtures/adder.bench")).unwrap()
    }

    fn adder_inputs() -> Vec<String> {
        ["x3", "x2", "x1", "x0"].map(String::from).to_vec()
    }

    #[test]
    fn adder_key_evaluation() {
        let psi = adder_key();
        // x1 = x2 = 1.
        let r = psi.eval(&adder_inputs(), &parse_vector("0110").unwrap()).unwrap();
        assert_eq!(r, [true, true, false, true, true]);
    }

    #[test]
    fn constant_relation_ignores_inputs() {
        let psi = KeyRelation::new(vec![Term::constant("a", true), Term::latent("b", LatentOp::Not, ["a"])]).unwrap();
        for p in 0..16u8 {
            let x: Vec<bool> = (0..4).map(|i| p >> i & 1 == 1).collect();
            assert_eq!(psi.eval(&adder_inputs(), &x).unwrap(), [true, false]);
        }
    }

    #[test]
    fn generated_key_at_0101() {
        let psi = generated_key();
        let x = parse_vector("0101").unwrap();
        let r = psi.eval_bits(&["r3".into(), "r4".into()], &adder_inputs(), &x).unwrap();
        assert_eq!(r, [true, false]);
        let act = inline_relation(&locked(), &psi).unwrap();
        assert_eq!(format_vector(&act.eval(&x).unwrap()), "110");
    }

    #[test]
    fn inlining_adder_key_restores_the_adder() {
        let act = inline_relation(&locked(), &adder_key()).unwrap();
        assert_eq!(TruthTable::of(&act).unwrap(), TruthTable::of(&adder()).unwrap());
    }

    #[test]
    fn inlining_generated_key_differs_where_expected() {
        let act = inline_relation(&locked(), &generated_key()).unwrap();
        let a = adder();
        for row in ["1111", "1001", "0000", "1100"] {
            let x = parse_vector(row).unwrap();
            assert_eq!(act.eval(&x).unwrap(), a.eval(&x).unwrap(), "row {row}");
        }
        let x = parse_vector("0101").unwrap();
        assert_ne!(act.eval(&x).unwrap(), a.eval(&x).unwrap());
    }

    #[test]
    fn pass_through_lock_with_empty_relation() {
        let a = adder();
        let act = inline_relation(&LockedCircuit::unlocked(&a), &KeyRelation::empty()).unwrap();
        assert_eq!(act, a);
    }

    #[test]
    fn missing_flagged_bit_is_rejected() {
        let psi = KeyRelation::new(vec![Term::input("r2", "x0")]).unwrap();
        assert_eq!(
            inline_relation(&locked(), &psi),
            Err(KeyRelError::MissingBit("r3".into()))
        );
    }

    #[test]
    fn adder_key_cost() {
        let c = adder_key().cost();
        assert_eq!((c.stimulus_terms, c.latent_terms, c.relation_bits), (3, 2, 5));
        assert_eq!(KeyRelation::empty().cost(), Cost::default());
    }

    #[test]
    fn shared_subterm_gate_counts() {
        // Nested terms are flattened through fresh bits (r6, r7 stand for the
        // repeated r0 & r1).
        let without = parse_keyrel(
            "r0 = IN(x1)\nr1 = IN(x2)\nr2 = IN(x0)\nr5 = AND(r0, r1)\n\
             r6 = AND(r0, r1)\nr4 = AND(r6, r2)\nr7 = AND(r0, r1)\nr3 = OR(r7, r2)\n",
        )
        .unwrap();
        let with = parse_keyrel(
            "r0 = IN(x1)\nr1 = IN(x2)\nr2 = IN(x0)\nr5 = AND(r0, r1)\n\
             r3 = OR(r5, r2)\nr4 = AND(r5, r2)\n",
        )
        .unwrap();
        assert_eq!(without.cost().gate_count, 5);
        assert_eq!(with.cost().gate_count, 3);
        let names = ["x0", "x1", "x2"].map(String::from);
        for p in 0..8u8 {
            let x: Vec<bool> = (0..3).map(|i| p >> i & 1 == 1).collect();
            let bits = ["r3".to_string(), "r4".to_string()];
            assert_eq!(
                without.eval_bits(&bits, &names, &x).unwrap(),
                with.eval_bits(&bits, &names, &x).unwrap()
            );
        }
    }

    #[test]
    fn validation_errors() {
        let e = KeyRelation::new(vec![Term::latent("a", LatentOp::And, ["b", "c"])]);
        assert!(matches!(e, Err(KeyRelError::Undefined { .. })));
        let e = KeyRelation::new(vec![Term::constant("a", false), Term::constant("a", true)]);
        assert_eq!(e, Err(KeyRelError::Duplicate("a".into())));
        let e = KeyRelation::new(vec![Term::constant("a", false), Term::latent("b", LatentOp::Not, ["a", "a"])]);
        assert!(matches!(e, Err(KeyRelError::Arity { .. })));
    }

    #[test]
    fn prune_keeps_needed_terms() {
        let psi = adder_key();
        let p = psi.prune(["r3"]);
        assert_eq!(p.relation_bits(), ["r0", "r1", "r3"]);
    }
}
