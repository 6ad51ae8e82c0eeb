//! Seeded random netlists for property tests and benchmarks.

use rand::Rng;

use super::{GateOp, Netlist, NetlistBuilder};

#[derive(Debug, Clone, Copy)]
pub struct RandomSpec {
    pub inputs: usize,
    pub outputs: usize,
    pub gates: usize,
    /// Upper bound on fan-in for AND/OR/XOR/NAND/NOR.
    pub max_fanin: usize,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            inputs: 6,
            outputs: 2,
            gates: 12,
            max_fanin: 3,
        }
    }
}

const OPS: [GateOp; 6] = [
    GateOp::And,
    GateOp::Or,
    GateOp::Xor,
    GateOp::Nand,
    GateOp::Nor,
    GateOp::Not,
];

/// Inputs `x0..`, gates `g0..`. Arguments lean towards recent wires so the
/// circuit grows some depth; outputs are the last `outputs` gates.
pub fn random_netlist<R: Rng + ?Sized>(rng: &mut R, spec: RandomSpec) -> Netlist {
    assert!(spec.inputs >= 1 && spec.gates >= spec.outputs.max(1));
    let mut b = NetlistBuilder::new("random");
    let mut wires: Vec<String> = (0..spec.inputs).map(|i| format!("x{i}")).collect();
    for w in &wires {
        b.input(w.clone());
    }
    for k in 0..spec.gates {
        let op = OPS[rng.random_range(0..OPS.len())];
        let arity = if op == GateOp::Not {
            1
        } else {
            rng.random_range(2..=spec.max_fanin.max(2))
        };
        let mut args: Vec<String> = Vec::with_capacity(arity);
        while args.len() < arity {
            let n = wires.len();
            let pick = if rng.random_bool(0.5) {
                rng.random_range(n.saturating_sub(4)..n)
            } else {
                rng.random_range(0..n)
            };
            if !args.contains(&wires[pick]) || args.len() >= n {
                args.push(wires[pick].clone());
            }
        }
        let name = format!("g{k}");
        b.gate(name.clone(), op, args);
        wires.push(name);
    }
    for k in spec.gates - spec.outputs..spec.gates {
        b.output(format!("g{k}"));
    }
    b.build().expect("generated netlist is well formed")
}
