//! Counterexample-guided synthesis of key relations and locked expressions.
//!
//! The inductive phase asks for sketch choices that make the locked circuit
//! match the original on every collected input. Each input is concrete, so the
//! encoder folds everything except the sketches and the logic downstream of
//! the targets. The verify phase checks a decoded candidate against the
//! original with a miter and returns a new input when they differ.

mod splice;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::{self, Write};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::cnf::{miter_witness, Encoder, Limit, Lit, Model, SatResult, SolveError, SolveLimits, Solver, SolverConfig};
use crate::keyrel::{
    inline_relation, ExprSketch, Grammar, KeyRelError, KeyRelation, LockedExpr, Operand, RelationSketch, SketchError,
    Source, Term, TermKind,
};
use crate::netlist::{build_miter, induced_subcircuit, DepGraph, LockedCircuit, Netlist, NetlistBuilder, NetlistError, WireId};

pub use splice::splice;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    KeyRel(#[from] KeyRelError),
    #[error(transparent)]
    Sketch(#[from] SketchError),
    #[error("bad synthesis spec: {0}")]
    Spec(String),
    #[error("solver limit reached ({0:?})")]
    Limit(Limit),
}

impl From<SolveError> for SynthError {
    fn from(e: SolveError) -> Self {
        let SolveError::LimitHit(l) = e;
        SynthError::Limit(l)
    }
}

/// One synthesis problem: replace `targets` in `locked` so that, with the
/// committed relation `fixed` extended by new terms, the circuit equals
/// `original`.
#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub original: Netlist,
    pub locked: LockedCircuit,
    pub targets: Vec<String>,
    pub fixed: KeyRelation,
}

impl SynthSpec {
    pub fn new(
        original: Netlist,
        locked: LockedCircuit,
        fixed: KeyRelation,
        targets: Vec<String>,
    ) -> Result<SynthSpec, SynthError> {
        let spec_err = |m: String| SynthError::Spec(m);
        let xs = locked.x_names();
        let orig: Vec<String> = original.input_names().map(str::to_string).collect();
        if xs != orig {
            return Err(spec_err(format!("locked inputs {xs:?} differ from original inputs {orig:?}")));
        }
        if original.outputs().len() != locked.circuit.outputs().len() {
            return Err(spec_err("output counts differ".into()));
        }
        for r in locked.relation_names() {
            if fixed.term(&r).is_none() {
                return Err(spec_err(format!("relation bit {r} has no term")));
            }
        }
        let mut seen = HashSet::new();
        for t in &targets {
            let w = locked
                .circuit
                .wire(t)
                .ok_or_else(|| spec_err(format!("unknown target {t}")))?;
            if locked.circuit.driver(w).is_none() || locked.circuit.is_temporary(w) {
                return Err(spec_err(format!("target {t} is not a gate output")));
            }
            if !seen.insert(t) {
                return Err(spec_err(format!("duplicate target {t}")));
            }
        }
        Ok(SynthSpec {
            original,
            locked,
            targets,
            fixed,
        })
    }

    /// The same problem restricted to the backslice of the targets: both
    /// circuits keep only the logic the targets depend on and output the
    /// targets themselves.
    pub fn sliced(&self) -> Result<SynthSpec, SynthError> {
        let work = &self.locked.circuit;
        let ids = |net: &Netlist| -> Result<Vec<WireId>, SynthError> {
            self.targets
                .iter()
                .map(|t| {
                    net.wire(t)
                        .ok_or_else(|| SynthError::Spec(format!("target {t} not in {}", net.name())))
                })
                .collect()
        };
        let keep = |net: &Netlist, ids: &[WireId]| -> Result<BTreeSet<WireId>, SynthError> {
            let mut k = DepGraph::new(net).backslice(ids)?;
            k.extend(ids.iter().copied());
            Ok(k)
        };
        let oid = ids(&self.original)?;
        let wid = ids(work)?;
        let ref_slice = induced_subcircuit(&self.original, &keep(&self.original, &oid)?, &oid)?;
        let work_slice = induced_subcircuit(work, &keep(work, &wid)?, &wid)?;
        let bits: Vec<String> = self
            .locked
            .relation_names()
            .into_iter()
            .filter(|r| work_slice.wire(r).is_some())
            .collect();
        let mut need: HashSet<String> = ref_slice.input_names().map(str::to_string).collect();
        need.extend(
            work_slice
                .input_names()
                .filter(|n| !bits.iter().any(|b| b == n))
                .map(str::to_string),
        );
        for s in self.fixed.prune(bits.iter().map(String::as_str)).sources() {
            need.insert(s.to_string());
        }
        let xs: Vec<String> = self
            .original
            .input_names()
            .filter(|n| need.contains(*n))
            .map(str::to_string)
            .collect();
        let ref_slice = with_inputs(&ref_slice, &xs)?;
        let mut wins = xs.clone();
        wins.extend(bits.iter().cloned());
        let work_slice = with_inputs(&work_slice, &wins)?;
        let rb = bits.iter().map(|b| work_slice.wire(b).unwrap()).collect();
        let lw = self
            .locked
            .locked_names()
            .iter()
            .filter_map(|n| work_slice.wire(n))
            .collect();
        let locked = LockedCircuit::new(work_slice, rb, lw, self.locked.origin.clone())?;
        SynthSpec::new(ref_slice, locked, self.fixed.clone(), self.targets.clone())
    }
}

/// `net` with exactly `inputs` as primary inputs, in that order. Inputs
/// not used by any gate may be added.
fn with_inputs(net: &Netlist, inputs: &[String]) -> Result<Netlist, NetlistError> {
    let mut b = NetlistBuilder::new(net.name());
    for i in inputs {
        b.input(i.clone());
    }
    for o in net.output_names() {
        b.output(o);
    }
    for g in net.gates() {
        b.gate(
            net.wire_name(g.out),
            g.op,
            g.args.iter().map(|&a| net.wire_name(a).to_string()),
        );
    }
    b.build()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SynthConfig {
    pub relation_grammar: Grammar,
    pub expr_grammar: Grammar,
    pub stimulus_slots: usize,
    pub latent_slots: usize,
    pub expr_nodes: usize,
    /// Dependency levels below a target whose wires an expression may read.
    pub cone_levels: usize,
    /// Every locked expression must read a latent bit on a path to its
    /// output.
    pub require_latent: bool,
    pub bit_prefix: String,
    /// Index of the first new relation bit name.
    pub next_bit: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            relation_grammar: Grammar::default(),
            expr_grammar: Grammar::default(),
            stimulus_slots: 3,
            latent_slots: 2,
            expr_nodes: 3,
            cone_levels: 2,
            require_latent: true,
            bit_prefix: "r".into(),
            next_bit: 0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn bit_name(&self, k: usize) -> String {
        format!("{}{}", self.bit_prefix, self.next_bit + k)
    }
}

/// Wires an expression for `target` may read: its dependency cone, minus
/// relation bits.
pub fn terminals(locked: &LockedCircuit, graph: &DepGraph, target: WireId, levels: usize) -> Vec<WireId> {
    graph
        .cone(target, levels)
        .into_iter()
        .filter(|&w| !locked.is_relation_bit(w))
        .collect()
}

/// Committed bits whose value only depends on `xs`, with latent flags.
fn usable_bits(fixed: &KeyRelation, xs: &[String]) -> Vec<(String, bool)> {
    let mut ok: HashMap<&str, bool> = HashMap::new();
    let mut out = Vec::new();
    for t in fixed.terms() {
        let good = match &t.kind {
            TermKind::Stimulus(Source::Input(x)) => xs.contains(x),
            TermKind::Stimulus(Source::Const(_)) => true,
            TermKind::Latent { args, .. } => args.iter().all(|a| ok[a.as_str()]),
        };
        ok.insert(&t.bit, good);
        if good {
            out.push((t.bit.clone(), t.is_latent()));
        }
    }
    out
}

/// Inductive query state: the sketches and one circuit copy per example.
struct Inductive {
    enc: Encoder,
    rel: RelationSketch,
    exprs: Vec<ExprSketch>,
    xs: Vec<String>,
    usable: Vec<String>,
    targets: Vec<WireId>,
    terminals: Vec<Vec<WireId>>,
}

impl Inductive {
    /// `None` when the expression space is empty.
    fn build(spec: &SynthSpec, cfg: &SynthConfig) -> Result<Option<Inductive>, SynthError> {
        let net = &spec.locked.circuit;
        let xs = spec.locked.x_names();
        let usable = usable_bits(&spec.fixed, &xs);
        let stim: Vec<String> = (0..cfg.stimulus_slots).map(|k| cfg.bit_name(k)).collect();
        let lat: Vec<String> = (0..cfg.latent_slots)
            .map(|k| cfg.bit_name(cfg.stimulus_slots + k))
            .collect();
        for n in stim.iter().chain(&lat) {
            if spec.fixed.term(n).is_some() || net.wire(n).is_some() {
                return Err(SynthError::Spec(format!("new relation bit {n} clashes with an existing name")));
            }
        }
        let mut enc = Encoder::new(true);
        let rel = RelationSketch::build(&mut enc, &cfg.relation_grammar, &xs, &usable, &stim, &lat);
        let latent = rel.latent_flags(&mut enc);
        let bits = rel.bit_names();
        let graph = DepGraph::new(net);
        let mut targets: Vec<WireId> = spec.targets.iter().map(|t| net.wire(t).unwrap()).collect();
        targets.sort();
        let mut exprs = Vec::new();
        let mut terms = Vec::new();
        for &t in &targets {
            let wires = terminals(&spec.locked, &graph, t, cfg.cone_levels);
            let names: Vec<String> = wires.iter().map(|&w| net.wire_name(w).to_string()).collect();
            match ExprSketch::build(
                &mut enc,
                net.wire_name(t),
                &cfg.expr_grammar,
                &names,
                &bits,
                &latent,
                cfg.expr_nodes,
                cfg.require_latent,
            ) {
                Ok(e) => exprs.push(e),
                Err(SketchError::NoTerminals) => return Ok(None),
                Err(e) => return Err(e.into()),
            }
            terms.push(wires);
        }
        Ok(Some(Inductive {
            enc,
            rel,
            exprs,
            xs,
            usable: usable.into_iter().map(|(b, _)| b).collect(),
            targets,
            terminals: terms,
        }))
    }

    fn add_example(&mut self, spec: &SynthSpec, x: &[bool]) -> Result<(), SynthError> {
        let enc = &mut self.enc;
        let xmap: HashMap<&str, bool> = self.xs.iter().map(String::as_str).zip(x.iter().copied()).collect();
        let hvals = spec.fixed.eval_with(|s| Some(xmap.get(s).copied().unwrap_or(false)))?;
        let hval = |b: &str| hvals[spec.fixed.position(b).unwrap()];
        let src: Vec<Lit> = x.iter().map(|&v| enc.constant(v)).collect();
        let fixed: Vec<Lit> = self.usable.iter().map(|b| enc.constant(hval(b))).collect();
        let bits = self.rel.eval(enc, &src, &fixed);
        let net = &spec.locked.circuit;
        let inputs: Vec<Lit> = net
            .inputs()
            .iter()
            .map(|&w| {
                let name = net.wire_name(w);
                let v = if spec.locked.is_relation_bit(w) { hval(name) } else { xmap[name] };
                enc.constant(v)
            })
            .collect();
        let targets = &self.targets;
        let exprs = &self.exprs;
        let terms = &self.terminals;
        let lits = enc.encode_netlist_with(net, &inputs, |enc, w, lits| {
            let j = targets.iter().position(|&t| t == w)?;
            let ws: Vec<Lit> = terms[j].iter().map(|t| lits[t.index()]).collect();
            Some(exprs[j].eval(enc, &ws, &bits))
        });
        let want = spec.original.eval(x)?;
        for (&o, v) in net.outputs().iter().zip(want) {
            enc.unit(lits[o.index()].with(v));
        }
        Ok(())
    }

    fn decode(&self, model: &Model) -> Result<(Vec<Term>, Vec<LockedExpr>), SketchError> {
        let terms = self.rel.decode(model)?;
        let exprs = self
            .exprs
            .iter()
            .map(|e| e.decode(model).map(|x| x.pruned()))
            .collect::<Result<_, _>>()?;
        Ok((terms, exprs))
    }
}

/// CNF of the inductive query over `examples`, as used by
/// [`cegis_synthesize`]; `None` when the expression space is empty.
pub fn inductive_cnf(
    spec: &SynthSpec,
    cfg: &SynthConfig,
    examples: &[Vec<bool>],
) -> Result<Option<crate::cnf::Cnf>, SynthError> {
    let Some(mut ind) = Inductive::build(spec, cfg)? else {
        return Ok(None);
    };
    for x in examples {
        ind.add_example(spec, x)?;
    }
    Ok(Some(ind.enc.into_cnf()))
}

/// A verified lock increment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthResult {
    /// New terms, appended to the committed relation.
    pub delta: Vec<Term>,
    pub exprs: Vec<LockedExpr>,
    /// Committed relation followed by `delta`.
    pub relation: KeyRelation,
    /// Relation bits that became circuit inputs in this increment.
    pub new_bits: Vec<String>,
    /// `SynthSpec::locked` with `exprs` spliced in.
    pub locked: LockedCircuit,
    /// First unused bit index.
    pub next_bit: usize,
}

impl SynthResult {
    pub fn latent_terms(&self) -> usize {
        self.delta.iter().filter(|t| t.is_latent()).count()
    }
}

/// Prunes unused new terms, renames the kept ones consecutively, and splices
/// the expressions.
fn assemble(
    spec: &SynthSpec,
    cfg: &SynthConfig,
    terms: Vec<Term>,
    exprs: Vec<LockedExpr>,
) -> Result<SynthResult, SynthError> {
    let mut all = spec.fixed.terms().to_vec();
    all.extend(terms.iter().cloned());
    let full = KeyRelation::new(all)?;
    let mut roots: Vec<String> = spec.locked.relation_names();
    for e in &exprs {
        roots.extend(e.bits().into_iter().map(str::to_string));
    }
    let need = full.support_closure(roots.iter().map(String::as_str));
    let kept: Vec<&Term> = terms.iter().filter(|t| need.contains(t.bit.as_str())).collect();
    let map: HashMap<&str, String> = kept
        .iter()
        .enumerate()
        .map(|(i, t)| (t.bit.as_str(), cfg.bit_name(i)))
        .collect();
    let ren = |b: &str| map.get(b).cloned().unwrap_or_else(|| b.to_string());
    let delta: Vec<Term> = kept
        .iter()
        .map(|t| Term {
            bit: ren(&t.bit),
            kind: match &t.kind {
                TermKind::Latent { op, args } => TermKind::Latent {
                    op: *op,
                    args: args.iter().map(|a| ren(a)).collect(),
                },
                k => k.clone(),
            },
        })
        .collect();
    let exprs: Vec<LockedExpr> = exprs
        .into_iter()
        .map(|mut e| {
            for n in &mut e.nodes {
                for a in &mut n.args {
                    if let Operand::Bit(b) = a {
                        *b = ren(b);
                    }
                }
            }
            e
        })
        .collect();
    let mut all = spec.fixed.terms().to_vec();
    all.extend(delta.iter().cloned());
    let relation = KeyRelation::new(all)?;
    let new_bits = new_bits(&spec.locked, &relation, &exprs);
    let locked = splice(&spec.locked, &exprs, &new_bits)?;
    Ok(SynthResult {
        delta,
        exprs,
        relation,
        new_bits,
        locked,
        next_bit: cfg.next_bit + kept.len(),
    })
}

/// Bits read by `exprs` that are not yet inputs of `locked`, in relation
/// order.
pub fn new_bits(locked: &LockedCircuit, psi: &KeyRelation, exprs: &[LockedExpr]) -> Vec<String> {
    let old: HashSet<String> = locked.relation_names().into_iter().collect();
    let read: HashSet<&str> = exprs.iter().flat_map(|e| e.bits()).collect();
    psi.terms()
        .iter()
        .filter(|t| read.contains(t.bit.as_str()) && !old.contains(&t.bit))
        .map(|t| t.bit.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    /// Original-input values on which the circuits differ.
    Counterexample(Vec<bool>),
}

/// Checks that `locked` activated by `psi` equals `original` on every input.
pub fn verify_lock(
    original: &Netlist,
    locked: &LockedCircuit,
    psi: &KeyRelation,
    limits: &SolveLimits,
) -> Result<Verdict, SynthError> {
    let active = inline_relation(locked, psi)?;
    let xs: Vec<String> = original.input_names().map(str::to_string).collect();
    let m = build_miter(original, &active, &xs)?;
    Ok(match miter_witness(&m, limits)? {
        None => Verdict::Valid,
        Some(v) => Verdict::Counterexample(v[..xs.len()].to_vec()),
    })
}

/// Splices `exprs` into `spec.locked` and verifies it with `psi`.
pub fn verify_candidate(
    spec: &SynthSpec,
    psi: &KeyRelation,
    exprs: &[LockedExpr],
    limits: &SolveLimits,
) -> Result<Verdict, SynthError> {
    for e in exprs {
        for b in e.bits() {
            if psi.term(b).is_none() {
                return Err(KeyRelError::MissingBit(b.to_string()).into());
            }
        }
    }
    let locked = splice(&spec.locked, exprs, &new_bits(&spec.locked, psi, exprs))?;
    verify_lock(&spec.original, &locked, psi, limits)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SynthOutcome {
    Found(SynthResult),
    /// The inductive query is UNSAT: no program in the sketch fits.
    Infeasible,
    LimitHit(Limit),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CegisState {
    pub counterexamples: Vec<Vec<bool>>,
    pub iterations: usize,
    pub inductive_ms: f64,
    pub verify_ms: f64,
    pub cnf_vars: u32,
    pub cnf_clauses: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseEvent {
    pub phase: &'static str,
    pub iteration: usize,
    pub ms: f64,
    pub result: &'static str,
}

#[derive(Debug, Clone)]
pub struct CegisRun {
    pub outcome: SynthOutcome,
    pub state: CegisState,
    pub events: Vec<PhaseEvent>,
}

/// Writes `events` as JSON lines.
pub fn write_log(events: &[PhaseEvent], mut w: impl Write) -> io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs CEGIS on `spec`. Every `Found` result has passed the miter check.
pub fn cegis_synthesize(spec: &SynthSpec, cfg: &SynthConfig, limits: &SolveLimits) -> Result<CegisRun, SynthError> {
    let mut state = CegisState::default();
    let mut events = Vec::new();
    let done = |outcome, state, events| Ok(CegisRun { outcome, state, events });
    if spec.targets.is_empty() {
        let t = Instant::now();
        let v = match verify_lock(&spec.original, &spec.locked, &spec.fixed, limits) {
            Err(SynthError::Limit(l)) => return done(SynthOutcome::LimitHit(l), state, events),
            r => r?,
        };
        events.push(PhaseEvent {
            phase: "verify",
            iteration: 0,
            ms: ms(t),
            result: if v == Verdict::Valid { "valid" } else { "counterexample" },
        });
        if v != Verdict::Valid {
            return done(SynthOutcome::Infeasible, state, events);
        }
        let r = assemble(spec, cfg, Vec::new(), Vec::new())?;
        return done(SynthOutcome::Found(r), state, events);
    }
    let Some(mut ind) = Inductive::build(spec, cfg)? else {
        return done(SynthOutcome::Infeasible, state, events);
    };
    let mut solver = Solver::new(SolverConfig {
        seed: cfg.seed,
        ..SolverConfig::default()
    });
    loop {
        state.iterations += 1;
        let it = state.iterations;
        ind.enc.flush(&mut solver);
        state.cnf_vars = ind.enc.num_vars();
        state.cnf_clauses = ind.enc.num_clauses();
        let t = Instant::now();
        let r = solver.solve_with(&[], limits);
        let dt = ms(t);
        state.inductive_ms += dt;
        let model = match r {
            Err(SolveError::LimitHit(l)) => {
                events.push(PhaseEvent { phase: "inductive", iteration: it, ms: dt, result: "limit" });
                return done(SynthOutcome::LimitHit(l), state, events);
            }
            Ok(SatResult::Unsat) => {
                events.push(PhaseEvent { phase: "inductive", iteration: it, ms: dt, result: "unsat" });
                return done(SynthOutcome::Infeasible, state, events);
            }
            Ok(SatResult::Sat(m)) => m,
        };
        events.push(PhaseEvent { phase: "inductive", iteration: it, ms: dt, result: "candidate" });
        let (terms, exprs) = ind.decode(&model)?;
        let cand = assemble(spec, cfg, terms, exprs)?;
        let active = inline_relation(&cand.locked, &cand.relation)?;
        for x in &state.counterexamples {
            assert_eq!(
                active.eval(x)?,
                spec.original.eval(x)?,
                "inductive candidate violates a collected example"
            );
        }
        let t = Instant::now();
        let v = verify_lock(&spec.original, &cand.locked, &cand.relation, limits);
        let dt = ms(t);
        state.verify_ms += dt;
        match v {
            Err(SynthError::Limit(l)) => {
                events.push(PhaseEvent { phase: "verify", iteration: it, ms: dt, result: "limit" });
                return done(SynthOutcome::LimitHit(l), state, events);
            }
            Err(e) => return Err(e),
            Ok(Verdict::Valid) => {
                events.push(PhaseEvent { phase: "verify", iteration: it, ms: dt, result: "valid" });
                return done(SynthOutcome::Found(cand), state, events);
            }
            Ok(Verdict::Counterexample(x)) => {
                events.push(PhaseEvent { phase: "verify", iteration: it, ms: dt, result: "counterexample" });
                assert!(!state.counterexamples.contains(&x), "repeated counterexample");
                ind.add_example(spec, &x)?;
                state.counterexamples.push(x);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Probe {
    pub latent_slots: usize,
    pub result: &'static str,
}

#[derive(Debug, Clone)]
pub struct Minimized {
    pub best: SynthResult,
    pub probes: Vec<Probe>,
}

/// Descending search on the number of latent terms, starting below
/// `found`. Stops at the first budget that is infeasible or hits a limit.
pub fn minimize_budget(
    spec: &SynthSpec,
    cfg: &SynthConfig,
    found: SynthResult,
    limits: &SolveLimits,
) -> Result<Minimized, SynthError> {
    let mut best = found;
    let mut probes = Vec::new();
    while best.latent_terms() > 0 {
        let slots = best.latent_terms() - 1;
        let c = SynthConfig {
            latent_slots: slots,
            ..cfg.clone()
        };
        match cegis_synthesize(spec, &c, limits)?.outcome {
            SynthOutcome::Found(r) => {
                probes.push(Probe { latent_slots: slots, result: "found" });
                best = r;
            }
            SynthOutcome::Infeasible => {
                probes.push(Probe { latent_slots: slots, result: "infeasible" });
                break;
            }
            SynthOutcome::LimitHit(_) => {
                probes.push(Probe { latent_slots: slots, result: "limit" });
                break;
            }
        }
    }
    Ok(Minimized { best, probes })
}

#[cfg(test)]
mod tests;
