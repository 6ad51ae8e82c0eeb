use std::collections::{BTreeSet, HashSet};

use crate::keyrel::{LatentOp, LockedExpr, Operand};
use crate::netlist::{GateOp, LockedCircuit, NetlistBuilder, NetlistError};

/// Replaces the gate of each expression's target with the expression and adds
/// `new_bits` as relation-bit inputs. Inner nodes become `target$k` helper
/// wires.
pub fn splice(locked: &LockedCircuit, exprs: &[LockedExpr], new_bits: &[String]) -> Result<LockedCircuit, NetlistError> {
    let net = &locked.circuit;
    let targets: HashSet<&str> = exprs.iter().map(|e| e.target.as_str()).collect();
    let mut used: HashSet<String> = (0..net.num_wires())
        .map(|i| net.wire_name(crate::netlist::WireId(i as u32)).to_string())
        .collect();
    let mut b = NetlistBuilder::new(net.name());
    for i in net.input_names() {
        b.input(i);
    }
    for r in new_bits {
        if !used.insert(r.clone()) {
            return Err(NetlistError::Duplicate {
                name: r.clone(),
                line: None,
            });
        }
        b.input(r.clone());
    }
    for o in net.output_names() {
        b.output(o);
    }
    for g in net.gates() {
        if !targets.contains(net.wire_name(g.out)) {
            b.gate(
                net.wire_name(g.out),
                g.op,
                g.args.iter().map(|&a| net.wire_name(a).to_string()),
            );
        }
    }
    for e in exprs {
        if e.nodes.is_empty() {
            b.gate(e.target.clone(), GateOp::Const0, Vec::<String>::new());
            continue;
        }
        let last = e.nodes.len() - 1;
        let mut names = Vec::with_capacity(e.nodes.len());
        let mut k = 0;
        for i in 0..e.nodes.len() {
            if i == last {
                names.push(e.target.clone());
                continue;
            }
            let name = loop {
                let n = format!("{}${k}", e.target);
                k += 1;
                if used.insert(n.clone()) {
                    break n;
                }
            };
            names.push(name);
        }
        for (i, node) in e.nodes.iter().enumerate() {
            let args: Vec<String> = node
                .args
                .iter()
                .map(|a| match a {
                    Operand::Wire(w) | Operand::Bit(w) => w.clone(),
                    Operand::Node(j) => names[*j].clone(),
                })
                .collect();
            let op = match node.op {
                None => GateOp::Const0,
                Some(LatentOp::Copy) => GateOp::Buf,
                Some(op) => op.gate_op(),
            };
            let args = if node.op.is_none() { Vec::new() } else { args };
            b.gate(names[i].clone(), op, args);
        }
    }
    b.sweep_dead_temporaries();
    let out = b.build()?;
    let mut bits: Vec<String> = locked.relation_names();
    bits.extend(new_bits.iter().cloned());
    let rb = bits
        .iter()
        .map(|r| out.wire_or_err(r))
        .collect::<Result<Vec<_>, _>>()?;
    let mut lw: BTreeSet<String> = locked.locked_names().into_iter().collect();
    lw.extend(targets.iter().map(|t| t.to_string()));
    let lw = lw
        .iter()
        .map(|n| out.wire_or_err(n))
        .collect::<Result<BTreeSet<_>, _>>()?;
    LockedCircuit::new(out, rb, lw, locked.origin.clone())
}
