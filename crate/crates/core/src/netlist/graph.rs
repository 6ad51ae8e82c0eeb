//! Variable dependency graph, backslices, and induced subcircuits.

use std::collections::{BTreeSet, VecDeque};

use super::{Netlist, NetlistBuilder, NetlistError, WireId};

/// Dependency graph over circuit variables (every wire except `$`
/// temporaries, which are folded into the variable that owns them).
///
/// An edge `v -> u` means `v` is computed from `u`. Inputs have depth 0 and
/// every other variable sits one level above its deepest dependency.
#[derive(Debug, Clone)]
pub struct DepGraph {
    nodes: Vec<WireId>,
    deps: Vec<BTreeSet<WireId>>,
    users: Vec<BTreeSet<WireId>>,
    depth: Vec<u32>,
    is_node: Vec<bool>,
    is_input: Vec<bool>,
}

impl DepGraph {
    pub fn new(net: &Netlist) -> DepGraph {
        let n = net.num_wires();
        let mut deps: Vec<BTreeSet<WireId>> = vec![BTreeSet::new(); n];
        let mut depth = vec![0u32; n];
        let mut is_node = vec![false; n];
        let mut is_input = vec![false; n];
        for &i in net.inputs() {
            is_node[i.index()] = true;
            is_input[i.index()] = true;
        }
        // Gates are topologically ordered, so temporaries are resolved before
        // their users.
        for g in net.gates() {
            let mut d = BTreeSet::new();
            for &a in &g.args {
                if net.is_temporary(a) {
                    d.extend(deps[a.index()].iter().copied());
                } else {
                    d.insert(a);
                }
            }
            depth[g.out.index()] = 1 + d.iter().map(|u| depth[u.index()]).max().unwrap_or(0);
            deps[g.out.index()] = d;
            is_node[g.out.index()] = !net.is_temporary(g.out);
        }
        let mut users: Vec<BTreeSet<WireId>> = vec![BTreeSet::new(); n];
        for v in 0..n {
            if !is_node[v] {
                deps[v].clear();
                continue;
            }
            for u in &deps[v] {
                users[u.index()].insert(WireId(v as u32));
            }
        }
        let nodes = (0..n as u32)
            .map(WireId)
            .filter(|w| is_node[w.index()])
            .collect();
        DepGraph {
            nodes,
            deps,
            users,
            depth,
            is_node,
            is_input,
        }
    }

    pub fn nodes(&self) -> &[WireId] {
        &self.nodes
    }

    pub fn contains(&self, w: WireId) -> bool {
        self.is_node.get(w.index()).copied().unwrap_or(false)
    }

    pub fn is_input(&self, w: WireId) -> bool {
        self.is_input.get(w.index()).copied().unwrap_or(false)
    }

    pub fn deps(&self, w: WireId) -> &BTreeSet<WireId> {
        &self.deps[w.index()]
    }

    pub fn depth(&self, w: WireId) -> u32 {
        self.depth[w.index()]
    }

    fn check(&self, w: WireId) -> Result<(), NetlistError> {
        if self.contains(w) {
            Ok(())
        } else {
            Err(NetlistError::UnknownWire(w.to_string()))
        }
    }

    /// Non-input variables whose depth lies in `[lo, hi]`, by wire id.
    pub fn candidates(&self, lo: u32, hi: u32) -> Vec<WireId> {
        self.nodes
            .iter()
            .copied()
            .filter(|&w| !self.is_input(w) && (lo..=hi).contains(&self.depth(w)))
            .collect()
    }

    /// Union of the transitive dependencies of `targets`. A target appears in
    /// the result only when another target depends on it.
    pub fn backslice(&self, targets: &[WireId]) -> Result<BTreeSet<WireId>, NetlistError> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        for &t in targets {
            self.check(t)?;
            queue.extend(self.deps(t).iter().copied());
        }
        while let Some(w) = queue.pop_front() {
            if seen.insert(w) {
                queue.extend(self.deps(w).iter().copied());
            }
        }
        Ok(seen)
    }

    /// Variables within `levels` dependency steps below `w` (excluding `w`).
    pub fn cone(&self, w: WireId, levels: usize) -> BTreeSet<WireId> {
        let mut out = BTreeSet::new();
        let mut frontier: Vec<WireId> = vec![w];
        for _ in 0..levels {
            let mut next = Vec::new();
            for f in frontier {
                for &d in self.deps(f) {
                    if out.insert(d) {
                        next.push(d);
                    }
                }
            }
            frontier = next;
        }
        out
    }

    /// Shortest path lengths from `from`, treating edges as undirected.
    /// Unreachable variables get `None`.
    pub fn undirected_distances(&self, from: WireId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.is_node.len()];
        if !self.contains(from) {
            return dist;
        }
        dist[from.index()] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v.index()].unwrap();
            for &u in self.deps[v.index()].iter().chain(&self.users[v.index()]) {
                if dist[u.index()].is_none() {
                    dist[u.index()] = Some(d + 1);
                    queue.push_back(u);
                }
            }
        }
        dist
    }
}

/// The part of `net` spanned by the variables in `keep`, with `outputs` as the
/// new primary outputs. Temporaries feeding a kept gate come along with it.
/// `keep` must be closed under dependencies.
pub fn induced_subcircuit(
    net: &Netlist,
    keep: &BTreeSet<WireId>,
    outputs: &[WireId],
) -> Result<Netlist, NetlistError> {
    let graph = DepGraph::new(net);
    for &w in keep {
        if !graph.contains(w) {
            return Err(NetlistError::UnknownWire(w.to_string()));
        }
        for d in graph.deps(w) {
            if !keep.contains(d) {
                return Err(NetlistError::NotClosed {
                    wire: net.wire_name(w).to_string(),
                    missing: net.wire_name(*d).to_string(),
                });
            }
        }
    }
    for o in outputs {
        if !keep.contains(o) {
            return Err(NetlistError::NotClosed {
                wire: "<outputs>".into(),
                missing: net.wire_name(*o).to_string(),
            });
        }
    }
    // Pull in temporaries reachable from kept gates without crossing another
    // variable.
    let mut live = vec![false; net.num_wires()];
    for &w in keep {
        live[w.index()] = true;
    }
    for g in net.gates().iter().rev() {
        if live[g.out.index()] {
            for &a in &g.args {
                if net.is_temporary(a) {
                    live[a.index()] = true;
                }
            }
        }
    }
    let mut b = NetlistBuilder::new(net.name());
    for &i in net.inputs() {
        if live[i.index()] {
            b.input(net.wire_name(i));
        }
    }
    for &o in outputs {
        b.output(net.wire_name(o));
    }
    for g in net.gates() {
        if live[g.out.index()] {
            b.gate(
                net.wire_name(g.out),
                g.op,
                g.args.iter().map(|&a| net.wire_name(a).to_string()),
            );
        }
    }
    b.build()
}
