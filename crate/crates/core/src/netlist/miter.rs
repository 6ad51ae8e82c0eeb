use std::collections::HashSet;

use super::{GateOp, Netlist, NetlistBuilder, NetlistError};

/// Single-output circuit that is 1 exactly when some output pair of `a` and
/// `b` differs.
///
/// Inputs named in `shared` are unified by name and come first, in the given
/// order. Every other input stays free: `a:name` for `a`'s, then `b:name` for
/// `b`'s. Internal wires are prefixed the same way. The output is `miter`.
pub fn build_miter(a: &Netlist, b: &Netlist, shared: &[String]) -> Result<Netlist, NetlistError> {
    if a.outputs().len() != b.outputs().len() {
        return Err(NetlistError::OutputArity {
            left: a.outputs().len(),
            right: b.outputs().len(),
        });
    }
    let shared_set: HashSet<&str> = shared.iter().map(String::as_str).collect();
    for s in shared {
        if a.wire(s).is_none_or(|w| !a.is_input(w)) || b.wire(s).is_none_or(|w| !b.is_input(w)) {
            return Err(NetlistError::UnknownWire(s.clone()));
        }
    }
    let mut m = NetlistBuilder::new(format!("miter_{}_{}", a.name(), b.name()));
    for s in shared {
        m.input(s.clone());
    }
    let rename = |prefix: &str, net: &Netlist, w| {
        let name = net.wire_name(w);
        if net.is_input(w) && shared_set.contains(name) {
            name.to_string()
        } else {
            format!("{prefix}:{name}")
        }
    };
    for (prefix, net) in [("a", a), ("b", b)] {
        for &i in net.inputs() {
            if !shared_set.contains(net.wire_name(i)) {
                m.input(rename(prefix, net, i));
            }
        }
    }
    for (prefix, net) in [("a", a), ("b", b)] {
        for g in net.gates() {
            m.gate(
                rename(prefix, net, g.out),
                g.op,
                g.args.iter().map(|&x| rename(prefix, net, x)),
            );
        }
    }
    let mut diffs = Vec::new();
    for (k, (&oa, &ob)) in a.outputs().iter().zip(b.outputs()).enumerate() {
        let d = format!("miter$d{k}");
        m.gate(d.clone(), GateOp::Xor, [rename("a", a, oa), rename("b", b, ob)]);
        diffs.push(d);
    }
    match diffs.len() {
        0 => m.gate("miter", GateOp::Const0, Vec::<String>::new()),
        1 => m.gate("miter", GateOp::Buf, diffs),
        _ => m.gate("miter", GateOp::Or, diffs),
    };
    m.output("miter");
    m.build()
}
