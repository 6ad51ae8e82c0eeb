//! Budgeted program spaces for key relations and locked expressions, encoded
//! as choice variables in CNF.
//!
//! A relation sketch has stimulus slots (pick a circuit input, the constant 1,
//! or nothing, which means the constant 0) followed by latent slots. A latent
//! slot picks at most one grammar operator and one-hot operands among all
//! earlier bits. A slot with no operator decodes to `CONST(0)`.
//!
//! A locked-expression sketch is a straight-line program of `k` nodes over
//! circuit wires, relation bits, and earlier nodes; the last node is the
//! output. It can be required to read some latent relation bit along a path
//! to the output, which keeps a lock from collapsing back to the original
//! expression.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{LatentOp, Source, Term, TermKind};
use crate::cnf::{Encoder, Lit, Model};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SketchError {
    #[error("budget must be positive: {0}")]
    ZeroCapacity(&'static str),
    #[error("sketch has no terminals")]
    NoTerminals,
    #[error("ill-formed choice: {0}")]
    IllFormed(String),
    #[error("not expressible in this sketch: {0}")]
    NotExpressible(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grammar {
    pub ops: Vec<LatentOp>,
}

impl Default for Grammar {
    fn default() -> Self {
        Grammar {
            ops: LatentOp::ALL.to_vec(),
        }
    }
}

impl Grammar {
    pub fn new(ops: impl IntoIterator<Item = LatentOp>) -> Grammar {
        let mut ops: Vec<LatentOp> = ops.into_iter().collect();
        ops.sort();
        ops.dedup();
        Grammar { ops }
    }
}

/// Size caps. `max_latent_terms` is the primary metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_latent_terms: usize,
    pub max_relation_bits: usize,
    /// Node count of each locked expression.
    pub max_expr_nodes: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_latent_terms: 12,
            max_relation_bits: 32,
            max_expr_nodes: 4,
        }
    }
}

impl Budget {
    pub fn validate(&self) -> Result<(), SketchError> {
        if self.max_latent_terms == 0 {
            return Err(SketchError::ZeroCapacity("max_latent_terms"));
        }
        if self.max_relation_bits == 0 {
            return Err(SketchError::ZeroCapacity("max_relation_bits"));
        }
        if self.max_expr_nodes == 0 {
            return Err(SketchError::ZeroCapacity("max_expr_nodes"));
        }
        Ok(())
    }
}

/// Operator and operand choices of one latent slot or expression node.
/// Operands at index `limit` or later are ruled out.
#[derive(Debug, Clone)]
struct Slot {
    op: Vec<Lit>,
    lhs: Vec<Lit>,
    rhs: Vec<Lit>,
    limit: usize,
}

/// Decoded slot: `None` for the empty (constant 0) choice.
type SlotChoice = Option<(LatentOp, usize, Option<usize>)>;

fn commutative(op: LatentOp) -> bool {
    matches!(op, LatentOp::And | LatentOp::Or | LatentOp::Xor)
}

impl Slot {
    fn build(enc: &mut Encoder, grammar: &Grammar, operands: usize, limit: usize) -> Slot {
        let op: Vec<Lit> = grammar.ops.iter().map(|_| enc.new_lit()).collect();
        let lhs: Vec<Lit> = (0..operands).map(|_| enc.new_lit()).collect();
        let rhs: Vec<Lit> = (0..operands).map(|_| enc.new_lit()).collect();
        enc.at_most_one(&op);
        enc.at_most_one(&lhs);
        enc.at_most_one(&rhs);
        for k in limit..operands {
            enc.unit(!lhs[k]);
            enc.unit(!rhs[k]);
        }
        let valid_l: Vec<Lit> = lhs[..limit.min(operands)].to_vec();
        let valid_r: Vec<Lit> = rhs[..limit.min(operands)].to_vec();
        let binary: Vec<Lit> = grammar
            .ops
            .iter()
            .zip(&op)
            .filter(|(o, _)| o.arity() == 2)
            .map(|(_, &l)| l)
            .collect();
        for &o in &op {
            let mut c = vec![!o];
            c.extend(&valid_l);
            enc.add_clause(c);
        }
        for (g, &o) in grammar.ops.iter().zip(&op) {
            if g.arity() == 2 {
                let mut c = vec![!o];
                c.extend(&valid_r);
                enc.add_clause(c);
            }
        }
        for &l in &lhs {
            let mut c = vec![!l];
            c.extend(&op);
            enc.add_clause(c);
        }
        for &r in &rhs {
            let mut c = vec![!r];
            c.extend(&binary);
            enc.add_clause(c);
        }
        // Commutative operators take their operands in index order.
        let comm: Vec<Lit> = grammar
            .ops
            .iter()
            .zip(&op)
            .filter(|(o, _)| commutative(**o))
            .map(|(_, &l)| l)
            .collect();
        if !comm.is_empty() {
            for i in 1..limit.min(operands) {
                for j in 0..i {
                    enc.add_clause([!lhs[i], !rhs[j]]);
                }
            }
        }
        Slot { op, lhs, rhs, limit }
    }

    fn any_op(&self, enc: &mut Encoder) -> Lit {
        enc.or(&self.op)
    }

    fn eval(&self, enc: &mut Encoder, grammar: &Grammar, operands: &[Lit]) -> Lit {
        let n = self.limit.min(operands.len());
        let pick = |enc: &mut Encoder, sel: &[Lit]| {
            let terms: Vec<Lit> = (0..n).map(|k| enc.and(&[sel[k], operands[k]])).collect();
            enc.or(&terms)
        };
        let l = pick(enc, &self.lhs);
        let needs_r = grammar.ops.iter().any(|o| o.arity() == 2);
        let r = if needs_r { pick(enc, &self.rhs) } else { enc.constant(false) };
        let mut cases = Vec::with_capacity(grammar.ops.len());
        for (g, &o) in grammar.ops.iter().zip(&self.op) {
            let v = match g {
                LatentOp::And => enc.and(&[l, r]),
                LatentOp::Or => enc.or(&[l, r]),
                LatentOp::Xor => enc.xor2(l, r),
                LatentOp::Not => !l,
                LatentOp::Copy => l,
            };
            cases.push(enc.and(&[o, v]));
        }
        enc.or(&cases)
    }

    fn decode(&self, grammar: &Grammar, model: &Model, what: &str) -> Result<SlotChoice, SketchError> {
        let ill = |m: String| SketchError::IllFormed(format!("{what}: {m}"));
        let ones = |lits: &[Lit]| -> Vec<usize> {
            lits.iter()
                .enumerate()
                .filter(|(_, &l)| model.lit(l))
                .map(|(i, _)| i)
                .collect()
        };
        let ops = ones(&self.op);
        let lhs = ones(&self.lhs);
        let rhs = ones(&self.rhs);
        if ops.len() > 1 || lhs.len() > 1 || rhs.len() > 1 {
            return Err(ill("more than one choice in a selector".into()));
        }
        for &k in lhs.iter().chain(&rhs) {
            if k >= self.limit {
                return Err(ill(format!("operand {k} points forward")));
            }
        }
        let Some(&o) = ops.first() else {
            if !lhs.is_empty() || !rhs.is_empty() {
                return Err(ill("operands without an operator".into()));
            }
            return Ok(None);
        };
        let op = grammar.ops[o];
        let l = *lhs.first().ok_or_else(|| ill(format!("{op} without an operand")))?;
        let r = match (op.arity(), rhs.first()) {
            (2, Some(&r)) => Some(r),
            (1, None) => None,
            _ => return Err(ill(format!("wrong operand count for {op}"))),
        };
        Ok(Some((op, l, r)))
    }

    fn witness(&self, grammar: &Grammar, choice: SlotChoice, out: &mut Vec<Lit>, what: &str) -> Result<(), SketchError> {
        let (op_idx, l, r) = match choice {
            None => (None, None, None),
            Some((op, l, r)) => {
                let i = grammar
                    .ops
                    .iter()
                    .position(|&g| g == op)
                    .ok_or_else(|| SketchError::NotExpressible(format!("{what}: {op} not in grammar")))?;
                let (l, r) = match r {
                    Some(r) if commutative(op) && r < l => (r, Some(l)),
                    _ => (l, r),
                };
                if l >= self.limit || r.is_some_and(|r| r >= self.limit) {
                    return Err(SketchError::NotExpressible(format!("{what}: operand out of scope")));
                }
                (Some(i), Some(l), r)
            }
        };
        for (i, &v) in self.op.iter().enumerate() {
            out.push(v.with(op_idx == Some(i)));
        }
        for (k, &v) in self.lhs.iter().enumerate() {
            out.push(v.with(l == Some(k)));
        }
        for (k, &v) in self.rhs.iter().enumerate() {
            out.push(v.with(r == Some(k)));
        }
        Ok(())
    }
}

/// Program space for new relation terms on top of already committed bits.
///
/// Bit order is: committed bits, stimulus slots, latent slots.
#[derive(Debug, Clone)]
pub struct RelationSketch {
    grammar: Grammar,
    sources: Vec<String>,
    fixed: Vec<String>,
    fixed_latent: Vec<bool>,
    stim_names: Vec<String>,
    latent_names: Vec<String>,
    /// Per stimulus slot: one selector per source, then CONST(1).
    stim: Vec<Vec<Lit>>,
    latent: Vec<Slot>,
    any_op: Vec<Lit>,
}

impl RelationSketch {
    /// `fixed` lists committed bits with whether each is latent. New bits get
    /// the names in `stim_names` and `latent_names`, one slot each.
    pub fn build(
        enc: &mut Encoder,
        grammar: &Grammar,
        sources: &[String],
        fixed: &[(String, bool)],
        stim_names: &[String],
        latent_names: &[String],
    ) -> RelationSketch {
        let stim: Vec<Vec<Lit>> = stim_names
            .iter()
            .map(|_| {
                let sel: Vec<Lit> = (0..=sources.len()).map(|_| enc.new_lit()).collect();
                enc.at_most_one(&sel);
                sel
            })
            .collect();
        let total = fixed.len() + stim_names.len() + latent_names.len();
        let base = fixed.len() + stim_names.len();
        let latent: Vec<Slot> = (0..latent_names.len())
            .map(|i| Slot::build(enc, grammar, total, base + i))
            .collect();
        let any_op = latent.iter().map(|s| s.any_op(enc)).collect();
        RelationSketch {
            grammar: grammar.clone(),
            sources: sources.to_vec(),
            fixed: fixed.iter().map(|(n, _)| n.clone()).collect(),
            fixed_latent: fixed.iter().map(|&(_, l)| l).collect(),
            stim_names: stim_names.to_vec(),
            latent_names: latent_names.to_vec(),
            stim,
            latent,
            any_op,
        }
    }

    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    /// Names of all bits in sketch order.
    pub fn bit_names(&self) -> Vec<String> {
        self.fixed
            .iter()
            .chain(&self.stim_names)
            .chain(&self.latent_names)
            .cloned()
            .collect()
    }

    pub fn num_stimulus_slots(&self) -> usize {
        self.stim.len()
    }

    pub fn num_latent_slots(&self) -> usize {
        self.latent.len()
    }

    /// Literals that are true when the bit is (or decodes to) a latent term.
    pub fn latent_flags(&self, enc: &mut Encoder) -> Vec<Lit> {
        let mut out: Vec<Lit> = self.fixed_latent.iter().map(|&l| enc.constant(l)).collect();
        let f = enc.constant(false);
        out.extend(self.stim.iter().map(|_| f));
        out.extend(&self.any_op);
        out
    }

    /// Selectors of stimulus slot `i`: one per source, then CONST(1). None
    /// set means CONST(0).
    pub fn stimulus_selectors(&self, i: usize) -> &[Lit] {
        &self.stim[i]
    }

    /// Literal for "latent slot `i` is used".
    pub fn slot_used(&self, i: usize) -> Lit {
        self.any_op[i]
    }

    /// Values of all bits given source and committed-bit values.
    pub fn eval(&self, enc: &mut Encoder, sources: &[Lit], fixed: &[Lit]) -> Vec<Lit> {
        assert_eq!(sources.len(), self.sources.len());
        assert_eq!(fixed.len(), self.fixed.len());
        let mut vals: Vec<Lit> = fixed.to_vec();
        let t = enc.constant(true);
        for sel in &self.stim {
            let mut terms: Vec<Lit> = sources
                .iter()
                .zip(sel)
                .map(|(&s, &c)| enc.and(&[c, s]))
                .collect();
            terms.push(enc.and(&[sel[sources.len()], t]));
            let v = enc.or(&terms);
            vals.push(v);
        }
        let total = self.fixed.len() + self.stim.len() + self.latent.len();
        for slot in &self.latent {
            let mut ops = vals.clone();
            ops.resize(total, enc.constant(false));
            let v = slot.eval(enc, &self.grammar, &ops);
            vals.push(v);
        }
        vals
    }

    /// New terms chosen by `model`, in slot order (stimulus slots first).
    pub fn decode(&self, model: &Model) -> Result<Vec<Term>, SketchError> {
        let names = self.bit_names();
        let mut terms = Vec::new();
        for (j, sel) in self.stim.iter().enumerate() {
            let on: Vec<usize> = (0..sel.len()).filter(|&k| model.lit(sel[k])).collect();
            let bit = self.stim_names[j].clone();
            let term = match on.as_slice() {
                [] => Term::constant(bit, false),
                [k] if *k == self.sources.len() => Term::constant(bit, true),
                [k] => Term::input(bit, self.sources[*k].clone()),
                _ => {
                    return Err(SketchError::IllFormed(format!("stimulus slot {bit} selects several sources")));
                }
            };
            terms.push(term);
        }
        for (i, slot) in self.latent.iter().enumerate() {
            let bit = self.latent_names[i].clone();
            let term = match slot.decode(&self.grammar, model, &bit)? {
                None => Term::constant(bit, false),
                Some((op, l, r)) => {
                    let mut args = vec![names[l].clone()];
                    args.extend(r.map(|r| names[r].clone()));
                    Term::latent(bit, op, args)
                }
            };
            terms.push(term);
        }
        Ok(terms)
    }

    /// Assumptions that force the sketch to `terms`: the stimulus terms fill
    /// the stimulus slots and the latent terms the latent slots, both in
    /// order. Unfilled slots are left empty. Term bits are matched to slots by
    /// position; arguments may name committed bits or earlier terms.
    pub fn witness(&self, terms: &[Term]) -> Result<Vec<Lit>, SketchError> {
        let stim: Vec<&Term> = terms.iter().filter(|t| !t.is_latent()).collect();
        let lat: Vec<&Term> = terms.iter().filter(|t| t.is_latent()).collect();
        if stim.len() > self.stim.len() || lat.len() > self.latent.len() {
            return Err(SketchError::NotExpressible(format!(
                "{} stimulus and {} latent terms do not fit {} + {} slots",
                stim.len(),
                lat.len(),
                self.stim.len(),
                self.latent.len()
            )));
        }
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, f) in self.fixed.iter().enumerate() {
            index.insert(f, i);
        }
        let base = self.fixed.len();
        for (j, t) in stim.iter().enumerate() {
            index.insert(&t.bit, base + j);
        }
        for (i, t) in lat.iter().enumerate() {
            index.insert(&t.bit, base + self.stim.len() + i);
        }
        let mut out = Vec::new();
        for (j, sel) in self.stim.iter().enumerate() {
            let pick = match stim.get(j).map(|t| &t.kind) {
                None | Some(TermKind::Stimulus(Source::Const(false))) => None,
                Some(TermKind::Stimulus(Source::Const(true))) => Some(self.sources.len()),
                Some(TermKind::Stimulus(Source::Input(x))) => Some(
                    self.sources
                        .iter()
                        .position(|s| s == x)
                        .ok_or_else(|| SketchError::NotExpressible(format!("source {x}")))?,
                ),
                Some(TermKind::Latent { .. }) => unreachable!(),
            };
            for (k, &l) in sel.iter().enumerate() {
                out.push(l.with(pick == Some(k)));
            }
        }
        for (i, slot) in self.latent.iter().enumerate() {
            let choice = match lat.get(i) {
                None => None,
                Some(t) => {
                    let TermKind::Latent { op, args } = &t.kind else { unreachable!() };
                    let idx = |a: &String| {
                        index
                            .get(a.as_str())
                            .copied()
                            .ok_or_else(|| SketchError::NotExpressible(format!("unknown bit {a}")))
                    };
                    let l = idx(&args[0])?;
                    let r = args.get(1).map(idx).transpose()?;
                    Some((*op, l, r))
                }
            };
            slot.witness(&self.grammar, choice, &mut out, &self.latent_names[i])?;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operand {
    Wire(String),
    Bit(String),
    Node(usize),
}

/// One node of a locked expression; `op: None` is the constant 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExprNode {
    pub op: Option<LatentOp>,
    pub args: Vec<Operand>,
}

/// Straight-line replacement for the expression driving `target`; the last
/// node is the value of `target`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LockedExpr {
    pub target: String,
    pub nodes: Vec<ExprNode>,
}

impl LockedExpr {
    pub fn eval(&self, wire: impl Fn(&str) -> bool, bit: impl Fn(&str) -> bool) -> bool {
        let mut vals: Vec<bool> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let arg = |o: &Operand| match o {
                Operand::Wire(w) => wire(w),
                Operand::Bit(b) => bit(b),
                Operand::Node(k) => vals[*k],
            };
            let v = match n.op {
                None => false,
                Some(op) => {
                    let a = arg(&n.args[0]);
                    let b = n.args.get(1).is_some_and(arg);
                    op.eval(a, b)
                }
            };
            vals.push(v);
        }
        vals.last().copied().unwrap_or(false)
    }

    /// Relation bits read by the expression, first use first.
    pub fn bits(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for n in &self.nodes {
            for a in &n.args {
                if let Operand::Bit(b) = a {
                    if !out.contains(&b.as_str()) {
                        out.push(b);
                    }
                }
            }
        }
        out
    }

    /// Drops nodes the output does not depend on.
    pub fn pruned(&self) -> LockedExpr {
        let n = self.nodes.len();
        if n == 0 {
            return self.clone();
        }
        let mut live = vec![false; n];
        live[n - 1] = true;
        for k in (0..n).rev() {
            if live[k] {
                for a in &self.nodes[k].args {
                    if let Operand::Node(j) = a {
                        live[*j] = true;
                    }
                }
            }
        }
        let mut remap = vec![usize::MAX; n];
        let mut nodes = Vec::new();
        for k in 0..n {
            if live[k] {
                remap[k] = nodes.len();
                let mut node = self.nodes[k].clone();
                for a in &mut node.args {
                    if let Operand::Node(j) = a {
                        *j = remap[*j];
                    }
                }
                nodes.push(node);
            }
        }
        LockedExpr {
            target: self.target.clone(),
            nodes,
        }
    }
}

impl fmt::Display for LockedExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn show(e: &LockedExpr, k: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let n = &e.nodes[k];
            let Some(op) = n.op else {
                return f.write_str("0");
            };
            write!(f, "{op}(")?;
            for (i, a) in n.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                match a {
                    Operand::Wire(w) | Operand::Bit(w) => f.write_str(w)?,
                    Operand::Node(j) => show(e, *j, f)?,
                }
            }
            f.write_str(")")
        }
        write!(f, "{} = ", self.target)?;
        if self.nodes.is_empty() {
            return f.write_str("0");
        }
        show(self, self.nodes.len() - 1, f)
    }
}

/// Program space for one locked expression.
///
/// Operand order is: circuit wires, relation bits, nodes.
#[derive(Debug, Clone)]
pub struct ExprSketch {
    target: String,
    grammar: Grammar,
    wires: Vec<String>,
    bits: Vec<String>,
    nodes: Vec<Slot>,
}

impl ExprSketch {
    /// `latent` gives, per relation bit, a literal that is true when the bit
    /// is latent. With `require_latent`, some node on a path to the output
    /// must read a latent bit.
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        enc: &mut Encoder,
        target: &str,
        grammar: &Grammar,
        wires: &[String],
        bits: &[String],
        latent: &[Lit],
        nodes: usize,
        require_latent: bool,
    ) -> Result<ExprSketch, SketchError> {
        if nodes == 0 {
            return Err(SketchError::ZeroCapacity("max_expr_nodes"));
        }
        if wires.is_empty() && bits.is_empty() {
            return Err(SketchError::NoTerminals);
        }
        assert_eq!(latent.len(), bits.len());
        let base = wires.len() + bits.len();
        let total = base + nodes;
        let slots: Vec<Slot> = (0..nodes)
            .map(|k| Slot::build(enc, grammar, total, base + k))
            .collect();
        if require_latent {
            let mut reach = vec![enc.constant(true); nodes];
            for j in (0..nodes.saturating_sub(1)).rev() {
                let mut uses = Vec::new();
                for m in j + 1..nodes {
                    let by = enc.or(&[slots[m].lhs[base + j], slots[m].rhs[base + j]]);
                    uses.push(enc.and(&[reach[m], by]));
                }
                reach[j] = enc.or(&uses);
            }
            let mut witnesses = Vec::new();
            for (j, slot) in slots.iter().enumerate() {
                for (b, &is_latent) in latent.iter().enumerate() {
                    let k = wires.len() + b;
                    let reads = enc.or(&[slot.lhs[k], slot.rhs[k]]);
                    witnesses.push(enc.and(&[reach[j], reads, is_latent]));
                }
            }
            enc.add_clause(witnesses);
        }
        Ok(ExprSketch {
            target: target.to_string(),
            grammar: grammar.clone(),
            wires: wires.to_vec(),
            bits: bits.to_vec(),
            nodes: slots,
        })
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn wires(&self) -> &[String] {
        &self.wires
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Output literal given wire and relation-bit values.
    pub fn eval(&self, enc: &mut Encoder, wires: &[Lit], bits: &[Lit]) -> Lit {
        assert_eq!(wires.len(), self.wires.len());
        assert_eq!(bits.len(), self.bits.len());
        let total = wires.len() + bits.len() + self.nodes.len();
        let mut vals: Vec<Lit> = wires.iter().chain(bits).copied().collect();
        let mut out = enc.constant(false);
        for slot in &self.nodes {
            let mut ops = vals.clone();
            ops.resize(total, enc.constant(false));
            out = slot.eval(enc, &self.grammar, &ops);
            vals.push(out);
        }
        out
    }

    fn operand(&self, k: usize) -> Operand {
        if k < self.wires.len() {
            Operand::Wire(self.wires[k].clone())
        } else if k < self.wires.len() + self.bits.len() {
            Operand::Bit(self.bits[k - self.wires.len()].clone())
        } else {
            Operand::Node(k - self.wires.len() - self.bits.len())
        }
    }

    /// The full node list chosen by `model` (not pruned).
    pub fn decode(&self, model: &Model) -> Result<LockedExpr, SketchError> {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (k, slot) in self.nodes.iter().enumerate() {
            let what = format!("{} node {k}", self.target);
            let node = match slot.decode(&self.grammar, model, &what)? {
                None => ExprNode { op: None, args: vec![] },
                Some((op, l, r)) => {
                    let mut args = vec![self.operand(l)];
                    args.extend(r.map(|r| self.operand(r)));
                    ExprNode { op: Some(op), args }
                }
            };
            nodes.push(node);
        }
        Ok(LockedExpr {
            target: self.target.clone(),
            nodes,
        })
    }

    /// Assumptions forcing this sketch to `expr`, whose nodes are placed in
    /// the last slots.
    pub fn witness(&self, expr: &LockedExpr) -> Result<Vec<Lit>, SketchError> {
        let k = self.nodes.len();
        let n = expr.nodes.len();
        if n > k || n == 0 {
            return Err(SketchError::NotExpressible(format!("{n} nodes in a {k}-node sketch")));
        }
        let shift = k - n;
        let base = self.wires.len() + self.bits.len();
        let index = |o: &Operand| -> Result<usize, SketchError> {
            match o {
                Operand::Wire(w) => self
                    .wires
                    .iter()
                    .position(|x| x == w)
                    .ok_or_else(|| SketchError::NotExpressible(format!("wire {w} not in scope"))),
                Operand::Bit(b) => self
                    .bits
                    .iter()
                    .position(|x| x == b)
                    .map(|i| self.wires.len() + i)
                    .ok_or_else(|| SketchError::NotExpressible(format!("bit {b} not in scope"))),
                Operand::Node(j) => Ok(base + shift + j),
            }
        };
        let mut out = Vec::new();
        for (s, slot) in self.nodes.iter().enumerate() {
            let what = format!("{} node {s}", self.target);
            let choice = if s < shift {
                None
            } else {
                let node = &expr.nodes[s - shift];
                match node.op {
                    None => None,
                    Some(op) => {
                        let l = index(&node.args[0])?;
                        let r = node.args.get(1).map(index).transpose()?;
                        Some((op, l, r))
                    }
                }
            };
            slot.witness(&self.grammar, choice, &mut out, &what)?;
        }
        Ok(out)
    }
}
