//! Locked circuits: a netlist over `X ∪ R` with the relation-bit inputs flagged.

use std::collections::BTreeSet;

use super::bench::{emit_with_pragmas, parse_with_pragmas};
use super::{Netlist, NetlistError, WireId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LockedCircuit {
    pub circuit: Netlist,
    /// Relation-bit inputs, in pragma order.
    pub relation_bits: Vec<WireId>,
    pub locked_wires: BTreeSet<WireId>,
    pub origin: String,
}

impl LockedCircuit {
    /// Checks that every flagged wire is a distinct primary input.
    pub fn new(
        circuit: Netlist,
        relation_bits: Vec<WireId>,
        locked_wires: BTreeSet<WireId>,
        origin: impl Into<String>,
    ) -> Result<LockedCircuit, NetlistError> {
        let mut seen = BTreeSet::new();
        for &r in &relation_bits {
            if !circuit.is_input(r) {
                return Err(NetlistError::UnknownWire(format!(
                    "relation bit `{}` is not a primary input",
                    circuit.wire_name(r)
                )));
            }
            if !seen.insert(r) {
                return Err(NetlistError::Duplicate {
                    name: circuit.wire_name(r).to_string(),
                    line: None,
                });
            }
        }
        for &w in &locked_wires {
            if w.index() >= circuit.num_wires() {
                return Err(NetlistError::UnknownWire(w.to_string()));
            }
        }
        Ok(LockedCircuit {
            circuit,
            relation_bits,
            locked_wires,
            origin: origin.into(),
        })
    }

    /// A lock that adds nothing: the original circuit with no relation bits.
    pub fn unlocked(net: &Netlist) -> LockedCircuit {
        LockedCircuit {
            circuit: net.clone(),
            relation_bits: Vec::new(),
            locked_wires: BTreeSet::new(),
            origin: net.name().to_string(),
        }
    }

    pub fn is_relation_bit(&self, w: WireId) -> bool {
        self.relation_bits.contains(&w)
    }

    /// Primary inputs that are not relation bits, in declaration order.
    pub fn x_inputs(&self) -> Vec<WireId> {
        self.circuit
            .inputs()
            .iter()
            .copied()
            .filter(|w| !self.is_relation_bit(*w))
            .collect()
    }

    pub fn x_names(&self) -> Vec<String> {
        self.x_inputs()
            .into_iter()
            .map(|w| self.circuit.wire_name(w).to_string())
            .collect()
    }

    pub fn relation_names(&self) -> Vec<String> {
        self.relation_bits
            .iter()
            .map(|&w| self.circuit.wire_name(w).to_string())
            .collect()
    }

    pub fn locked_names(&self) -> Vec<String> {
        self.locked_wires
            .iter()
            .map(|&w| self.circuit.wire_name(w).to_string())
            .collect()
    }

    /// Evaluates with `x` over the non-relation inputs and `r` over the
    /// relation bits (both in their declaration order).
    pub fn eval(&self, x: &[bool], r: &[bool]) -> Result<Vec<bool>, NetlistError> {
        let xs = self.x_inputs();
        if x.len() != xs.len() {
            return Err(NetlistError::InputWidth {
                expected: xs.len(),
                got: x.len(),
            });
        }
        if r.len() != self.relation_bits.len() {
            return Err(NetlistError::InputWidth {
                expected: self.relation_bits.len(),
                got: r.len(),
            });
        }
        let mut full = vec![false; self.circuit.inputs().len()];
        for (w, &v) in xs.iter().zip(x) {
            full[w.index()] = v;
        }
        for (w, &v) in self.relation_bits.iter().zip(r) {
            full[w.index()] = v;
        }
        self.circuit.eval(&full)
    }
}

pub fn parse_locked_bench(text: &str) -> Result<LockedCircuit, NetlistError> {
    let (net, pragmas) = parse_with_pragmas(text)?;
    let mut relation = Vec::new();
    let mut locked = BTreeSet::new();
    let mut origin = net.name().to_string();
    for p in pragmas {
        let lookup = |name: &String| {
            net.wire(name).ok_or_else(|| NetlistError::Undefined {
                name: name.clone(),
                line: Some(p.line),
            })
        };
        match p.key.as_str() {
            "relation_bits" => {
                for a in &p.args {
                    relation.push(lookup(a)?);
                }
            }
            "locked" => {
                for a in &p.args {
                    locked.insert(lookup(a)?);
                }
            }
            "origin" => {
                if let Some(o) = p.args.first() {
                    origin = o.clone();
                }
            }
            _ => {}
        }
    }
    LockedCircuit::new(net, relation, locked, origin)
}

pub fn emit_locked_bench(lc: &LockedCircuit) -> String {
    let extra = vec![
        ("origin".to_string(), vec![lc.origin.clone()]),
        ("relation_bits".to_string(), lc.relation_names()),
        ("locked".to_string(), lc.locked_names()),
    ];
    emit_with_pragmas(&lc.circuit, &extra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{parse_bench, parse_vector};

    const LOCKED: &str = include_str!("../../fixtures/adder_locked.bench");

    #[test]
    fn pragmas_flag_relation_bits() {
        let lc = parse_locked_bench(LOCKED).unwrap();
        assert_eq!(lc.relation_names(), ["r2", "r3", "r4"]);
        assert_eq!(lc.x_names(), ["x3", "x2", "x1", "x0"]);
        assert_eq!(lc.locked_names(), ["t1", "t2"]);
        assert_eq!(lc.origin, "adder");
    }

    #[test]
    fn locked_round_trip_keeps_flags() {
        let lc = parse_locked_bench(LOCKED).unwrap();
        let again = parse_locked_bench(&emit_locked_bench(&lc)).unwrap();
        assert_eq!(lc, again);
    }

    #[test]
    fn plain_reader_ignores_pragmas() {
        let net = parse_bench(LOCKED).unwrap();
        assert_eq!(net.inputs().len(), 7);
    }

    #[test]
    fn flagged_wire_must_be_input() {
        let text = "#pragma relation_bits y\nINPUT(a)\nOUTPUT(y)\ny = NOT(a)\n";
        assert!(parse_locked_bench(text).is_err());
        let text = "#pragma relation_bits q\nINPUT(a)\nOUTPUT(a)\n";
        assert!(matches!(
            parse_locked_bench(text),
            Err(NetlistError::Undefined { line: Some(1), .. })
        ));
    }

    #[test]
    fn split_evaluation() {
        let lc = parse_locked_bench(LOCKED).unwrap();
        // x = 0101: r3 = x1 & x2 = 0 gives the adder's 010, r3 = 1 gives 110.
        let x = parse_vector("0101").unwrap();
        let y = lc.eval(&x, &[false, false, false]).unwrap();
        assert_eq!(y, parse_vector("010").unwrap());
        let y = lc.eval(&x, &[false, true, false]).unwrap();
        assert_eq!(y, parse_vector("110").unwrap());
    }
}
