//! Gate-level combinational netlists.
//!
//! A [`Netlist`] is kept in a canonical dense form: primary inputs occupy the
//! first wire ids in declaration order, and every gate output follows in
//! topological order, so `gates()[k].out == WireId(inputs().len() + k)`.
//! Every construction path goes through [`NetlistBuilder`], which validates
//! and sorts, so the invariants below hold for any `Netlist` value:
//!
//! * the circuit is acyclic and every gate's arguments precede it;
//! * every non-input wire is driven by exactly one gate;
//! * every output names an input or a gate output.
//!
//! Wires whose name contains `$` are expression temporaries: they belong to
//! the variable named by the prefix (`y2$0` is part of the expression that
//! defines `y2`). The dependency graph folds them into their owner.

mod bench;
mod graph;
mod locked;
mod miter;
pub mod random;
mod sim;

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bench::{emit_bench, parse_bench};
pub use graph::{induced_subcircuit, DepGraph};
pub use locked::{emit_locked_bench, parse_locked_bench, LockedCircuit};
pub use miter::build_miter;
pub use sim::{format_vector, parse_vector, TruthTable};

/// Dense index of a named wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WireId(pub u32);

impl WireId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for WireId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateOp {
    And,
    Or,
    Xor,
    Nand,
    Nor,
    Not,
    Buf,
    Const0,
    Const1,
}

impl GateOp {
    pub const ALL: [GateOp; 9] = [
        GateOp::And,
        GateOp::Or,
        GateOp::Xor,
        GateOp::Nand,
        GateOp::Nor,
        GateOp::Not,
        GateOp::Buf,
        GateOp::Const0,
        GateOp::Const1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateOp::And => "AND",
            GateOp::Or => "OR",
            GateOp::Xor => "XOR",
            GateOp::Nand => "NAND",
            GateOp::Nor => "NOR",
            GateOp::Not => "NOT",
            GateOp::Buf => "BUF",
            GateOp::Const0 => "CONST0",
            GateOp::Const1 => "CONST1",
        }
    }

    /// Case-insensitive lookup; accepts the ISCAS spelling `BUFF`.
    pub fn from_name(name: &str) -> Option<GateOp> {
        let upper = name.to_ascii_uppercase();
        match upper.as_str() {
            "BUFF" => Some(GateOp::Buf),
            _ => GateOp::ALL.iter().copied().find(|op| op.name() == upper),
        }
    }

    pub fn arity_ok(self, n: usize) -> bool {
        match self {
            GateOp::Const0 | GateOp::Const1 => n == 0,
            GateOp::Not | GateOp::Buf => n == 1,
            _ => n >= 2,
        }
    }

    pub fn eval<I: IntoIterator<Item = bool>>(self, args: I) -> bool {
        let mut it = args.into_iter();
        match self {
            GateOp::And => it.all(|b| b),
            GateOp::Or => it.any(|b| b),
            GateOp::Xor => it.fold(false, |acc, b| acc ^ b),
            GateOp::Nand => !it.all(|b| b),
            GateOp::Nor => !it.any(|b| b),
            GateOp::Not => !it.next().unwrap_or(false),
            GateOp::Buf => it.next().unwrap_or(false),
            GateOp::Const0 => false,
            GateOp::Const1 => true,
        }
    }

    /// Bit-parallel evaluation over 64 patterns at once.
    pub fn eval_words<I: IntoIterator<Item = u64>>(self, args: I) -> u64 {
        let mut it = args.into_iter();
        match self {
            GateOp::And => it.fold(!0, |acc, w| acc & w),
            GateOp::Or => it.fold(0, |acc, w| acc | w),
            GateOp::Xor => it.fold(0, |acc, w| acc ^ w),
            GateOp::Nand => !it.fold(!0, |acc, w| acc & w),
            GateOp::Nor => !it.fold(0, |acc, w| acc | w),
            GateOp::Not => !it.next().unwrap_or(0),
            GateOp::Buf => it.next().unwrap_or(0),
            GateOp::Const0 => 0,
            GateOp::Const1 => !0,
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gate {
    pub out: WireId,
    pub op: GateOp,
    pub args: Vec<WireId>,
}

fn at_line(line: &Option<usize>) -> String {
    match line {
        Some(l) => format!("line {l}: "),
        None => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetlistError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{}undefined wire `{name}`", at_line(.line))]
    Undefined { name: String, line: Option<usize> },
    #[error("{}duplicate definition of `{name}`", at_line(.line))]
    Duplicate { name: String, line: Option<usize> },
    #[error("{}combinational cycle through `{name}`", at_line(.line))]
    Cycle { name: String, line: Option<usize> },
    #[error("{}unknown gate `{op}`", at_line(.line))]
    UnknownOp { op: String, line: Option<usize> },
    #[error("{}gate {op} cannot take {got} argument(s)", at_line(.line))]
    Arity {
        op: GateOp,
        got: usize,
        line: Option<usize>,
    },
    #[error("unknown wire `{0}`")]
    UnknownWire(String),
    #[error("wire set is not dependency-closed: `{wire}` needs `{missing}`")]
    NotClosed { wire: String, missing: String },
    #[error("output arity mismatch: {left} vs {right}")]
    OutputArity { left: usize, right: usize },
    #[error("expected {expected} input bits, got {got}")]
    InputWidth { expected: usize, got: usize },
    #[error("bad vector `{0}`: only 0 and 1 are allowed")]
    BadVector(String),
    #[error("circuit has {0} inputs; exhaustive simulation is limited to 24")]
    TooWide(usize),
}

/// A validated combinational circuit. See the module docs for the invariants.
#[derive(Debug, Clone)]
pub struct Netlist {
    name: String,
    inputs: Vec<WireId>,
    outputs: Vec<WireId>,
    gates: Vec<Gate>,
    wire_names: Vec<String>,
    index: HashMap<String, WireId>,
}

impl PartialEq for Netlist {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.inputs == other.inputs
            && self.outputs == other.outputs
            && self.gates == other.gates
            && self.wire_names == other.wire_names
    }
}

impl Eq for Netlist {}

impl Netlist {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &[WireId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[WireId] {
        &self.outputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn num_wires(&self) -> usize {
        self.wire_names.len()
    }

    pub fn wire_name(&self, id: WireId) -> &str {
        &self.wire_names[id.index()]
    }

    pub fn wire(&self, name: &str) -> Option<WireId> {
        self.index.get(name).copied()
    }

    pub fn wire_or_err(&self, name: &str) -> Result<WireId, NetlistError> {
        self.wire(name)
            .ok_or_else(|| NetlistError::UnknownWire(name.to_string()))
    }

    pub fn is_input(&self, id: WireId) -> bool {
        id.index() < self.inputs.len()
    }

    /// The gate driving `id`, or `None` for primary inputs.
    pub fn driver(&self, id: WireId) -> Option<&Gate> {
        id.index()
            .checked_sub(self.inputs.len())
            .and_then(|k| self.gates.get(k))
    }

    pub fn is_temporary(&self, id: WireId) -> bool {
        self.wire_name(id).contains('$')
    }

    pub fn input_names(&self) -> impl Iterator<Item = &str> + '_ {
        self.inputs.iter().map(|&w| self.wire_name(w))
    }

    pub fn output_names(&self) -> impl Iterator<Item = &str> + '_ {
        self.outputs.iter().map(|&w| self.wire_name(w))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Name-based editable copy of this netlist.
    pub fn to_builder(&self) -> NetlistBuilder {
        let mut b = NetlistBuilder::new(self.name.clone());
        for &i in &self.inputs {
            b.input(self.wire_name(i));
        }
        for &o in &self.outputs {
            b.output(self.wire_name(o));
        }
        for g in &self.gates {
            b.gate(
                self.wire_name(g.out),
                g.op,
                g.args.iter().map(|&a| self.wire_name(a).to_string()),
            );
        }
        b
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateSpec {
    pub out: String,
    pub op: GateOp,
    pub args: Vec<String>,
    pub line: Option<usize>,
}

/// Order-insensitive, name-based netlist construction. [`NetlistBuilder::build`]
/// validates, topologically sorts, and assigns canonical wire ids.
#[derive(Debug, Clone, Default)]
pub struct NetlistBuilder {
    name: String,
    inputs: Vec<(String, Option<usize>)>,
    outputs: Vec<(String, Option<usize>)>,
    gates: Vec<GateSpec>,
}

impl NetlistBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        NetlistBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn set_name(&mut self, name: impl Into<String>) -> &mut Self {
        self.name = name.into();
        self
    }

    pub fn input(&mut self, name: impl Into<String>) -> &mut Self {
        self.inputs.push((name.into(), None));
        self
    }

    pub fn input_at(&mut self, name: impl Into<String>, line: usize) -> &mut Self {
        self.inputs.push((name.into(), Some(line)));
        self
    }

    pub fn output(&mut self, name: impl Into<String>) -> &mut Self {
        self.outputs.push((name.into(), None));
        self
    }

    pub fn output_at(&mut self, name: impl Into<String>, line: usize) -> &mut Self {
        self.outputs.push((name.into(), Some(line)));
        self
    }

    pub fn gate<S, I>(&mut self, out: impl Into<String>, op: GateOp, args: I) -> &mut Self
    where
        S: Into<String>,
        I: IntoIterator<Item = S>,
    {
        self.gates.push(GateSpec {
            out: out.into(),
            op,
            args: args.into_iter().map(Into::into).collect(),
            line: None,
        });
        self
    }

    pub fn gate_spec(&mut self, spec: GateSpec) -> &mut Self {
        self.gates.push(spec);
        self
    }

    pub fn input_names(&self) -> impl Iterator<Item = &str> {
        self.inputs.iter().map(|(n, _)| n.as_str())
    }

    pub fn has_input(&self, name: &str) -> bool {
        self.inputs.iter().any(|(n, _)| n == name)
    }

    pub fn gate_specs(&self) -> &[GateSpec] {
        &self.gates
    }

    pub fn has_wire(&self, name: &str) -> bool {
        self.has_input(name) || self.gates.iter().any(|g| g.out == name)
    }

    /// Removes the gate driving `name`, returning it.
    pub fn remove_gate(&mut self, name: &str) -> Option<GateSpec> {
        let pos = self.gates.iter().position(|g| g.out == name)?;
        Some(self.gates.remove(pos))
    }

    /// Drops temporaries (`$` wires) that no longer feed anything.
    pub fn sweep_dead_temporaries(&mut self) {
        loop {
            let used: HashSet<&str> = self
                .gates
                .iter()
                .flat_map(|g| g.args.iter().map(String::as_str))
                .chain(self.outputs.iter().map(|(n, _)| n.as_str()))
                .collect();
            let dead: Vec<usize> = self
                .gates
                .iter()
                .enumerate()
                .filter(|(_, g)| g.out.contains('$') && !used.contains(g.out.as_str()))
                .map(|(i, _)| i)
                .collect();
            if dead.is_empty() {
                return;
            }
            for i in dead.into_iter().rev() {
                self.gates.remove(i);
            }
        }
    }

    pub fn build(&self) -> Result<Netlist, NetlistError> {
        // Definitions: inputs first, then gate outputs.
        let mut def: HashMap<&str, Def> = HashMap::new();
        for (k, (name, line)) in self.inputs.iter().enumerate() {
            if def.insert(name, Def::Input(k)).is_some() {
                return Err(NetlistError::Duplicate {
                    name: name.clone(),
                    line: *line,
                });
            }
        }
        for (k, g) in self.gates.iter().enumerate() {
            if !g.op.arity_ok(g.args.len()) {
                return Err(NetlistError::Arity {
                    op: g.op,
                    got: g.args.len(),
                    line: g.line,
                });
            }
            if def.insert(&g.out, Def::Gate(k)).is_some() {
                return Err(NetlistError::Duplicate {
                    name: g.out.clone(),
                    line: g.line,
                });
            }
        }
        for g in &self.gates {
            for a in &g.args {
                if !def.contains_key(a.as_str()) {
                    return Err(NetlistError::Undefined {
                        name: a.clone(),
                        line: g.line,
                    });
                }
            }
        }
        for (o, line) in &self.outputs {
            if !def.contains_key(o.as_str()) {
                return Err(NetlistError::Undefined {
                    name: o.clone(),
                    line: *line,
                });
            }
        }

        // Depth-first post-order in definition order keeps an already sorted
        // file in its original order.
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let mut mark = vec![Mark::New; self.gates.len()];
        let mut order = Vec::with_capacity(self.gates.len());
        for root in 0..self.gates.len() {
            if mark[root] != Mark::New {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
            mark[root] = Mark::Active;
            while let Some(&mut (g, ref mut next)) = stack.last_mut() {
                let spec = &self.gates[g];
                if *next < spec.args.len() {
                    let a = &spec.args[*next];
                    *next += 1;
                    if let Some(Def::Gate(dep)) = def.get(a.as_str()).copied() {
                        match mark[dep] {
                            Mark::New => {
                                mark[dep] = Mark::Active;
                                stack.push((dep, 0));
                            }
                            Mark::Active => {
                                return Err(NetlistError::Cycle {
                                    name: self.gates[dep].out.clone(),
                                    line: self.gates[dep].line,
                                })
                            }
                            Mark::Done => {}
                        }
                    }
                } else {
                    mark[g] = Mark::Done;
                    order.push(g);
                    stack.pop();
                }
            }
        }

        let n_in = self.inputs.len();
        let mut wire_names = Vec::with_capacity(n_in + order.len());
        let mut index = HashMap::with_capacity(n_in + order.len());
        for (name, _) in &self.inputs {
            index.insert(name.clone(), WireId(wire_names.len() as u32));
            wire_names.push(name.clone());
        }
        for &g in &order {
            let name = &self.gates[g].out;
            index.insert(name.clone(), WireId(wire_names.len() as u32));
            wire_names.push(name.clone());
        }
        let gates = order
            .iter()
            .map(|&g| {
                let spec = &self.gates[g];
                Gate {
                    out: index[&spec.out],
                    op: spec.op,
                    args: spec.args.iter().map(|a| index[a]).collect(),
                }
            })
            .collect();
        Ok(Netlist {
            name: self.name.clone(),
            inputs: (0..n_in as u32).map(WireId).collect(),
            outputs: self.outputs.iter().map(|(o, _)| index[o]).collect(),
            gates,
            wire_names,
            index,
        })
    }
}

#[derive(Clone, Copy)]
enum Def {
    #[allow(dead_code)]
    Input(usize),
    Gate(usize),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_sorts_out_of_order_gates() {
        let mut b = NetlistBuilder::new("t");
        b.input("a").input("b").output("y");
        b.gate("y", GateOp::Or, ["m", "b"]);
        b.gate("m", GateOp::And, ["a", "b"]);
        let net = b.build().unwrap();
        assert_eq!(net.wire_name(net.gates()[0].out), "m");
        assert_eq!(net.wire_name(net.gates()[1].out), "y");
        for (k, g) in net.gates().iter().enumerate() {
            assert_eq!(g.out.index(), net.inputs().len() + k);
            assert!(g.args.iter().all(|a| a.index() < g.out.index()));
        }
    }

    #[test]
    fn builder_rejects_cycles() {
        let mut b = NetlistBuilder::new("t");
        b.input("a").output("y");
        b.gate("y", GateOp::And, ["a", "z"]);
        b.gate("z", GateOp::Not, ["y"]);
        assert!(matches!(b.build(), Err(NetlistError::Cycle { .. })));
    }

    #[test]
    fn builder_rejects_duplicates_and_undefined() {
        let mut b = NetlistBuilder::new("t");
        b.input("a").input("a");
        assert!(matches!(b.build(), Err(NetlistError::Duplicate { .. })));

        let mut b = NetlistBuilder::new("t");
        b.input("a").output("y");
        b.gate("y", GateOp::And, ["a", "q"]);
        assert!(matches!(b.build(), Err(NetlistError::Undefined { .. })));
    }

    #[test]
    fn sweep_keeps_live_temporaries() {
        let mut b = NetlistBuilder::new("t");
        b.input("a").input("b").output("y");
        b.gate("y$0", GateOp::And, ["a", "b"]);
        b.gate("y$1", GateOp::Or, ["a", "b"]);
        b.gate("y", GateOp::Not, ["y$0"]);
        b.sweep_dead_temporaries();
        let net = b.build().unwrap();
        assert!(net.wire("y$0").is_some());
        assert!(net.wire("y$1").is_none());
    }

    #[test]
    fn op_names_round_trip() {
        for op in GateOp::ALL {
            assert_eq!(GateOp::from_name(op.name()), Some(op));
        }
        assert_eq!(GateOp::from_name("buff"), Some(GateOp::Buf));
        assert_eq!(GateOp::from_name("MUX"), None);
    }
}
