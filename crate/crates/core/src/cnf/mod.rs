//! CNF formulas, Tseitin encoding of netlists, and SAT solving.

mod dimacs;
mod solver;

use std::fmt;
use std::ops::Not;

use crate::netlist::{GateOp, Netlist, WireId};

pub use dimacs::{parse_dimacs, solve_external, write_dimacs, DimacsError, ExternalError};
pub use solver::{solve, solve_portfolio, Limit, SolveError, SolveLimits, Solver, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn pos(self) -> Lit {
        Lit(self.0 << 1)
    }

    #[inline]
    pub fn neg(self) -> Lit {
        Lit(self.0 << 1 | 1)
    }
}

/// `2 * var + sign`, sign 1 for negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    #[inline]
    pub fn new(var: Var, negative: bool) -> Lit {
        Lit(var.0 << 1 | negative as u32)
    }

    #[inline]
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    #[inline]
    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub fn code(self) -> usize {
        self.0 as usize
    }

    /// Literal with polarity `value`: `self` when true, `!self` when false.
    #[inline]
    pub fn with(self, value: bool) -> Lit {
        if value {
            self
        } else {
            !self
        }
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var().0 as i64 + 1;
        if self.is_neg() {
            -v
        } else {
            v
        }
    }

    pub fn from_dimacs(x: i64) -> Option<Lit> {
        if x == 0 {
            return None;
        }
        let var = Var((x.unsigned_abs() - 1) as u32);
        Some(Lit::new(var, x < 0))
    }
}

impl Not for Lit {
    type Output = Lit;
    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
}

impl Cnf {
    pub fn new() -> Cnf {
        Cnf::default()
    }

    pub fn new_var(&mut self) -> Var {
        self.num_vars += 1;
        Var(self.num_vars - 1)
    }

    pub fn add_clause(&mut self, lits: impl Into<Vec<Lit>>) {
        let lits = lits.into();
        for l in &lits {
            assert!(l.var().0 < self.num_vars, "literal {l} out of range");
        }
        self.clauses.push(lits);
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Whether `model` (indexed by variable) satisfies every clause.
    pub fn satisfied_by(&self, model: &Model) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|&l| model.lit(l)))
    }
}

/// Total assignment over solver variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model(pub Vec<bool>);

impl Model {
    pub fn var(&self, v: Var) -> bool {
        self.0.get(v.index()).copied().unwrap_or(false)
    }

    pub fn lit(&self, l: Lit) -> bool {
        self.var(l.var()) != l.is_neg()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    Sat(Model),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn model(&self) -> Option<&Model> {
        match self {
            SatResult::Sat(m) => Some(m),
            SatResult::Unsat => None,
        }
    }
}

/// Gate-level CNF builder.
///
/// With `fold` on, constants and trivial gates are simplified away as they
/// are built, so concrete examples shrink to almost nothing. With it off the
/// encoding is the textbook one, one fresh variable per gate output.
#[derive(Debug, Clone)]
pub struct Encoder {
    cnf: Cnf,
    fold: bool,
    true_lit: Option<Lit>,
    flushed: usize,
}

impl Encoder {
    pub fn new(fold: bool) -> Encoder {
        Encoder {
            cnf: Cnf::new(),
            fold,
            true_lit: None,
            flushed: 0,
        }
    }

    pub fn cnf(&self) -> &Cnf {
        &self.cnf
    }

    pub fn into_cnf(self) -> Cnf {
        self.cnf
    }

    pub fn num_vars(&self) -> u32 {
        self.cnf.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.cnf.clauses.len()
    }

    pub fn new_lit(&mut self) -> Lit {
        self.cnf.new_var().pos()
    }

    pub fn true_lit(&mut self) -> Lit {
        match self.true_lit {
            Some(t) => t,
            None => {
                let t = self.new_lit();
                self.cnf.add_clause([t]);
                self.true_lit = Some(t);
                t
            }
        }
    }

    pub fn constant(&mut self, value: bool) -> Lit {
        self.true_lit().with(value)
    }

    /// The constant value of `l`, if it is the shared true/false literal.
    pub fn value_of(&self, l: Lit) -> Option<bool> {
        let t = self.true_lit?;
        if l == t {
            Some(true)
        } else if l == !t {
            Some(false)
        } else {
            None
        }
    }

    pub fn add_clause(&mut self, lits: impl Into<Vec<Lit>>) {
        let mut lits: Vec<Lit> = lits.into();
        if self.fold {
            if lits.iter().any(|&l| self.value_of(l) == Some(true)) {
                return;
            }
            lits.retain(|&l| self.value_of(l) != Some(false));
            lits.sort_unstable();
            lits.dedup();
            if lits.windows(2).any(|w| w[0] == !w[1]) {
                return;
            }
        }
        self.cnf.add_clause(lits);
    }

    pub fn unit(&mut self, l: Lit) {
        self.add_clause([l]);
    }

    pub fn and(&mut self, args: &[Lit]) -> Lit {
        let mut args = args.to_vec();
        if self.fold {
            if args.iter().any(|&a| self.value_of(a) == Some(false)) {
                return self.constant(false);
            }
            args.retain(|&a| self.value_of(a) != Some(true));
            args.sort_unstable();
            args.dedup();
            if args.windows(2).any(|w| w[0] == !w[1]) {
                return self.constant(false);
            }
        }
        match args.len() {
            0 => return self.constant(true),
            1 => return args[0],
            _ => {}
        }
        let out = self.new_lit();
        let mut big = Vec::with_capacity(args.len() + 1);
        for &a in &args {
            self.cnf.add_clause([!out, a]);
            big.push(!a);
        }
        big.push(out);
        self.cnf.add_clause(big);
        out
    }

    pub fn or(&mut self, args: &[Lit]) -> Lit {
        let neg: Vec<Lit> = args.iter().map(|&a| !a).collect();
        !self.and(&neg)
    }

    pub fn xor2(&mut self, a: Lit, b: Lit) -> Lit {
        if self.fold {
            match (self.value_of(a), self.value_of(b)) {
                (Some(x), _) => return b.with(!x),
                (_, Some(y)) => return a.with(!y),
                _ => {}
            }
            if a == b {
                return self.constant(false);
            }
            if a == !b {
                return self.constant(true);
            }
        }
        let out = self.new_lit();
        self.cnf.add_clause([!out, a, b]);
        self.cnf.add_clause([!out, !a, !b]);
        self.cnf.add_clause([out, !a, b]);
        self.cnf.add_clause([out, a, !b]);
        out
    }

    /// N-ary XOR as a chain of binary XORs.
    pub fn xor(&mut self, args: &[Lit]) -> Lit {
        let Some((&first, rest)) = args.split_first() else {
            return self.constant(false);
        };
        rest.iter().fold(first, |acc, &a| self.xor2(acc, a))
    }

    pub fn equiv(&mut self, a: Lit, b: Lit) -> Lit {
        !self.xor2(a, b)
    }

    /// `if s then t else e`.
    pub fn ite(&mut self, s: Lit, t: Lit, e: Lit) -> Lit {
        if self.fold {
            if let Some(v) = self.value_of(s) {
                return if v { t } else { e };
            }
            if t == e {
                return t;
            }
            match (self.value_of(t), self.value_of(e)) {
                (Some(true), Some(false)) => return s,
                (Some(false), Some(true)) => return !s,
                (Some(true), _) => return self.or(&[s, e]),
                (Some(false), _) => return self.and(&[!s, e]),
                (_, Some(true)) => return self.or(&[!s, t]),
                (_, Some(false)) => return self.and(&[s, t]),
                _ => {}
            }
        }
        let out = self.new_lit();
        self.cnf.add_clause([!s, !t, out]);
        self.cnf.add_clause([!s, t, !out]);
        self.cnf.add_clause([s, !e, out]);
        self.cnf.add_clause([s, e, !out]);
        out
    }

    pub fn gate(&mut self, op: GateOp, args: &[Lit]) -> Lit {
        match op {
            GateOp::And => self.and(args),
            GateOp::Or => self.or(args),
            GateOp::Xor => self.xor(args),
            GateOp::Nand => !self.and(args),
            GateOp::Nor => !self.or(args),
            GateOp::Not => !args[0],
            GateOp::Buf => args[0],
            GateOp::Const0 => self.constant(false),
            GateOp::Const1 => self.constant(true),
        }
    }

    /// At most one of `lits` is true: pairwise for short lists, a sequential
    /// counter otherwise.
    pub fn at_most_one(&mut self, lits: &[Lit]) {
        let lits: Vec<Lit> = if self.fold {
            lits.iter()
                .copied()
                .filter(|&l| self.value_of(l) != Some(false))
                .collect()
        } else {
            lits.to_vec()
        };
        if lits.len() <= 1 {
            return;
        }
        if lits.len() <= 6 {
            for i in 0..lits.len() {
                for j in i + 1..lits.len() {
                    self.add_clause([!lits[i], !lits[j]]);
                }
            }
            return;
        }
        // s_i: some of lits[0..=i] is true.
        let mut prev = lits[0];
        for (i, &l) in lits.iter().enumerate().skip(1) {
            self.add_clause([!prev, !l]);
            if i + 1 < lits.len() {
                let s = self.new_lit();
                self.add_clause([!prev, s]);
                self.add_clause([!l, s]);
                prev = s;
            }
        }
    }

    pub fn exactly_one(&mut self, lits: &[Lit]) {
        self.at_most_one(lits);
        self.add_clause(lits.to_vec());
    }

    /// Encodes `net` with the given input literals. `hook` may supply the
    /// literal for a gate-driven wire instead of the gate itself; it sees the
    /// literals of all earlier wires.
    pub fn encode_netlist_with<F>(&mut self, net: &Netlist, inputs: &[Lit], mut hook: F) -> Vec<Lit>
    where
        F: FnMut(&mut Encoder, WireId, &[Lit]) -> Option<Lit>,
    {
        assert_eq!(inputs.len(), net.inputs().len(), "input literal count");
        let mut lits = Vec::with_capacity(net.num_wires());
        lits.extend_from_slice(inputs);
        for g in net.gates() {
            let l = match hook(self, g.out, &lits) {
                Some(l) => l,
                None => {
                    let args: Vec<Lit> = g.args.iter().map(|a| lits[a.index()]).collect();
                    self.gate(g.op, &args)
                }
            };
            lits.push(l);
        }
        lits
    }

    pub fn encode_netlist(&mut self, net: &Netlist, inputs: &[Lit]) -> Vec<Lit> {
        self.encode_netlist_with(net, inputs, |_, _, _| None)
    }

    /// Hands clauses added since the last flush to `solver`.
    pub fn flush(&mut self, solver: &mut Solver) {
        solver.reserve_vars(self.cnf.num_vars);
        for c in &self.cnf.clauses[self.flushed..] {
            solver.add_clause(c);
        }
        self.flushed = self.cnf.clauses.len();
    }
}

/// Tseitin encoding of a whole netlist.
#[derive(Debug, Clone)]
pub struct CircuitCnf {
    pub cnf: Cnf,
    /// Literal of every wire, indexed by `WireId`.
    pub wire_lits: Vec<Lit>,
}

impl CircuitCnf {
    pub fn wire(&self, w: WireId) -> Lit {
        self.wire_lits[w.index()]
    }

    /// Input values of `net` read from `model`.
    pub fn inputs_of(&self, net: &Netlist, model: &Model) -> Vec<bool> {
        net.inputs().iter().map(|&i| model.lit(self.wire(i))).collect()
    }
}

/// Plain Tseitin encoding, optionally with a unit clause fixing one wire.
pub fn tseitin(net: &Netlist, root: Option<(WireId, bool)>) -> CircuitCnf {
    let mut enc = Encoder::new(false);
    let inputs: Vec<Lit> = net.inputs().iter().map(|_| enc.new_lit()).collect();
    let wire_lits = enc.encode_netlist(net, &inputs);
    if let Some((w, v)) = root {
        enc.unit(wire_lits[w.index()].with(v));
    }
    CircuitCnf {
        cnf: enc.into_cnf(),
        wire_lits,
    }
}

/// Input values of a single-output miter that drive its output to 1, or
/// `None` when none exist.
pub fn miter_witness(miter: &Netlist, limits: &SolveLimits) -> Result<Option<Vec<bool>>, SolveError> {
    let out = miter.outputs()[0];
    let enc = tseitin(miter, Some((out, true)));
    Ok(match solve(&enc.cnf, limits)? {
        SatResult::Sat(model) => Some(enc.inputs_of(miter, &model)),
        SatResult::Unsat => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{build_miter, parse_bench};

    #[test]
    fn literal_codes() {
        let v = Var(4);
        assert_eq!(v.pos().to_dimacs(), 5);
        assert_eq!(v.neg().to_dimacs(), -5);
        assert_eq!(!v.pos(), v.neg());
        assert_eq!(Lit::from_dimacs(-5), Some(v.neg()));
        assert_eq!(Lit::from_dimacs(0), None);
    }

    #[test]
    fn single_and_gate_is_three_clauses() {
        let net = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n").unwrap();
        let enc = tseitin(&net, None);
        assert_eq!(enc.cnf.num_clauses(), 3);
        let enc = tseitin(&net, Some((net.wire("y").unwrap(), true)));
        assert_eq!(enc.cnf.num_clauses(), 4);
    }

    #[test]
    fn adder_self_miter_is_unsat() {
        let a = parse_bench(include_str!("../../fixtures/adder.bench")).unwrap();
        let shared: Vec<String> = a.input_names().map(str::to_string).collect();
        let m = build_miter(&a, &a, &shared).unwrap();
        let enc = tseitin(&m, Some((m.outputs()[0], true)));
        assert_eq!(solve(&enc.cnf, &SolveLimits::none()).unwrap(), SatResult::Unsat);
    }

    #[test]
    fn folding_collapses_constant_inputs() {
        let a = parse_bench(include_str!("../../fixtures/adder.bench")).unwrap();
        let mut enc = Encoder::new(true);
        let x: Vec<Lit> = [true, true, false, true]
            .iter()
            .map(|&b| enc.constant(b))
            .collect();
        let lits = enc.encode_netlist(&a, &x);
        let outs: Vec<Option<bool>> = a.outputs().iter().map(|o| enc.value_of(lits[o.index()])).collect();
        let expect = a.eval(&[true, true, false, true]).unwrap();
        assert_eq!(outs, expect.into_iter().map(Some).collect::<Vec<_>>());
        assert_eq!(enc.num_clauses(), 1);
    }

    #[test]
    fn at_most_one_ladder_is_exact() {
        for n in 1..10usize {
            for mask in 0u32..1 << n {
                let mut enc = Encoder::new(false);
                let xs: Vec<Lit> = (0..n).map(|_| enc.new_lit()).collect();
                enc.at_most_one(&xs);
                for (i, &x) in xs.iter().enumerate() {
                    enc.unit(x.with(mask >> i & 1 == 1));
                }
                let sat = solve(enc.cnf(), &SolveLimits::none()).unwrap().is_sat();
                assert_eq!(sat, mask.count_ones() <= 1, "n={n} mask={mask:b}");
            }
        }
    }

    #[test]
    fn ite_matches_truth_table() {
        for fold in [false, true] {
            for bits in 0..8u32 {
                let mut enc = Encoder::new(fold);
                let (s, t, e) = (enc.new_lit(), enc.new_lit(), enc.new_lit());
                let o = enc.ite(s, t, e);
                let (sv, tv, ev) = (bits & 1 == 1, bits & 2 == 2, bits & 4 == 4);
                enc.unit(s.with(sv));
                enc.unit(t.with(tv));
                enc.unit(e.with(ev));
                enc.unit(o.with(!(if sv { tv } else { ev })));
                assert!(!solve(enc.cnf(), &SolveLimits::none()).unwrap().is_sat());
            }
        }
    }
}
