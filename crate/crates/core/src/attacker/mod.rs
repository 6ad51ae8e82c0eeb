//! Oracle-guided recovery of a key relation.
//!
//! Two candidate relations drawn from one guessed sketch space are kept
//! consistent with every oracle answer seen so far. While some input makes
//! the locked circuit disagree under the two candidates, that input is sent
//! to the oracle and its answer is added for both. Once no such input exists,
//! any consistent candidate activates the oracle's function, provided the
//! guessed space holds a relation that does.

mod oracle;

use std::collections::HashMap;
use std::io::{self, Write};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cnf::{miter_witness, Encoder, Limit, Lit, Model, SatResult, SolveError, SolveLimits, Solver, SolverConfig};
use crate::keyrel::{inline_relation, Budget, Grammar, KeyRelError, KeyRelation, LatentOp, RelationSketch, SketchError, Source, Term, TermKind};
use crate::netlist::{build_miter, format_vector, LockedCircuit, Netlist, NetlistError};

pub use oracle::{CommandOracle, FnOracle, NetlistOracle, Oracle, OracleError};

#[derive(Debug, Error)]
pub enum AttackError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Sketch(#[from] SketchError),
    #[error(transparent)]
    KeyRel(#[from] KeyRelError),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error("bad attack setup: {0}")]
    Spec(String),
    #[error("solver limit reached ({0:?})")]
    Limit(Limit),
}

impl From<SolveError> for AttackError {
    fn from(e: SolveError) -> Self {
        let SolveError::LimitHit(l) = e;
        AttackError::Limit(l)
    }
}

/// The attacker's guess of the relation space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttackerConfig {
    pub grammar: Grammar,
    pub stimulus_slots: usize,
    pub latent_slots: usize,
    pub seed: u64,
}

impl Default for AttackerConfig {
    fn default() -> Self {
        AttackerConfig::from_budget(Grammar::default(), &Budget::default(), 4)
    }
}

impl AttackerConfig {
    /// A space with the budget's latent-term count and `stimulus_slots`
    /// stimulus terms, capped by the budget's relation-bit count.
    pub fn from_budget(grammar: Grammar, budget: &Budget, stimulus_slots: usize) -> AttackerConfig {
        let latent = budget.max_latent_terms.min(budget.max_relation_bits);
        AttackerConfig {
            grammar,
            stimulus_slots: stimulus_slots.min(budget.max_relation_bits - latent),
            latent_slots: latent,
            seed: 0,
        }
    }
}

/// One guessed relation over the locked circuit's inputs. Sketch bits are
/// hidden; each relation bit of the circuit is bound to one of them.
#[derive(Debug, Clone)]
struct BoundSketch {
    rel: RelationSketch,
    /// Per circuit relation bit, one selector per sketch bit.
    bind: Vec<Vec<Lit>>,
    circuit_bits: Vec<String>,
    hidden: Vec<String>,
    sorted: bool,
}

/// Whether `slots` distinct stimulus choices exist over `sources` inputs.
fn sorted_stimulus(slots: usize, sources: usize) -> bool {
    slots <= sources + 2
}

#[derive(Debug, Clone, Copy)]
enum Place {
    /// Stimulus choice: 0 for CONST(0), `k + 1` for source `k`, then CONST(1).
    Stim(usize),
    Latent(usize),
}

/// A prefix `p` such that no `p{k}` names a wire of `net`.
fn hidden_prefix(net: &Netlist, count: usize) -> String {
    let mut p = String::from("h");
    while (0..count).any(|k| net.wire(&format!("{p}{k}")).is_some()) {
        p.push('_');
    }
    p
}

impl BoundSketch {
    /// COPY is left out of the grammar since a binding already aliases bits.
    /// Stimulus slots hold strictly increasing choices (CONST(0) lowest,
    /// CONST(1) highest) and used latent slots come first; neither
    /// restriction loses a function.
    fn build(enc: &mut Encoder, locked: &LockedCircuit, cfg: &AttackerConfig) -> BoundSketch {
        let total = cfg.stimulus_slots + cfg.latent_slots;
        let p = hidden_prefix(&locked.circuit, total);
        let hidden: Vec<String> = (0..total).map(|k| format!("{p}{k}")).collect();
        let xs = locked.x_names();
        let mut grammar = cfg.grammar.clone();
        grammar.ops.retain(|&op| op != LatentOp::Copy);
        if grammar.ops.is_empty() {
            grammar = cfg.grammar.clone();
        }
        let rel = RelationSketch::build(
            enc,
            &grammar,
            &xs,
            &[],
            &hidden[..cfg.stimulus_slots],
            &hidden[cfg.stimulus_slots..],
        );
        let sorted = sorted_stimulus(cfg.stimulus_slots, xs.len());
        if sorted {
            for k in 1..cfg.stimulus_slots {
                let prev = rel.stimulus_selectors(k - 1);
                let cur = rel.stimulus_selectors(k);
                enc.add_clause(cur.to_vec());
                for (ia, &a) in prev.iter().enumerate() {
                    for &b in &cur[..=ia] {
                        enc.add_clause([!a, !b]);
                    }
                }
            }
        }
        for i in 1..cfg.latent_slots {
            enc.add_clause([!rel.slot_used(i), rel.slot_used(i - 1)]);
        }
        let circuit_bits = locked.relation_names();
        let bind = circuit_bits
            .iter()
            .map(|_| {
                let sel: Vec<Lit> = (0..total).map(|_| enc.new_lit()).collect();
                enc.exactly_one(&sel);
                sel
            })
            .collect();
        BoundSketch {
            rel,
            bind,
            circuit_bits,
            hidden,
            sorted,
        }
    }

    /// Values of the circuit's relation bits.
    fn eval(&self, enc: &mut Encoder, xs: &[Lit]) -> Vec<Lit> {
        let vals = self.rel.eval(enc, xs, &[]);
        self.bind
            .iter()
            .map(|sel| {
                let terms: Vec<Lit> = sel.iter().zip(&vals).map(|(&s, &v)| enc.and(&[s, v])).collect();
                enc.or(&terms)
            })
            .collect()
    }

    fn decode(&self, model: &Model) -> Result<KeyRelation, AttackError> {
        let terms = self.rel.decode(model)?;
        let mut name: HashMap<&str, String> = HashMap::new();
        let mut copies = Vec::new();
        for (j, sel) in self.bind.iter().enumerate() {
            let k = sel
                .iter()
                .position(|&s| model.lit(s))
                .ok_or_else(|| SketchError::IllFormed(format!("relation bit {} is unbound", self.circuit_bits[j])))?;
            let bit = &self.circuit_bits[j];
            match name.get(self.hidden[k].as_str()) {
                Some(first) => copies.push(Term::latent(bit.clone(), LatentOp::Copy, [first.clone()])),
                None => {
                    name.insert(&self.hidden[k], bit.clone());
                }
            }
        }
        let rename = |b: &str| name.get(b).cloned().unwrap_or_else(|| b.to_string());
        let mut out: Vec<Term> = terms
            .iter()
            .map(|t| Term {
                bit: rename(&t.bit),
                kind: match &t.kind {
                    TermKind::Latent { op, args } => TermKind::Latent {
                        op: *op,
                        args: args.iter().map(|a| rename(a)).collect(),
                    },
                    k => k.clone(),
                },
            })
            .collect();
        out.extend(copies);
        let psi = KeyRelation::new(out)?;
        Ok(psi.prune(self.circuit_bits.iter().map(String::as_str)))
    }

    /// Assumptions that force this sketch to `psi`, restricted to the terms
    /// the circuit's relation bits need. Stimulus terms are deduplicated and
    /// sorted, COPY terms become aliases.
    fn witness(&self, psi: &KeyRelation) -> Result<Vec<Lit>, AttackError> {
        let needed = psi.prune(self.circuit_bits.iter().map(String::as_str));
        for b in &self.circuit_bits {
            if needed.term(b).is_none() {
                return Err(KeyRelError::MissingBit(b.clone()).into());
            }
        }
        let sources = self.rel.sources();
        let n = sources.len();
        let unfit = |m: &str| AttackError::Sketch(SketchError::NotExpressible(m.to_string()));
        let mut place: HashMap<&str, Place> = HashMap::new();
        let mut latent: Vec<(LatentOp, &[String])> = Vec::new();
        for t in needed.terms() {
            let p = match &t.kind {
                TermKind::Stimulus(Source::Const(false)) => Place::Stim(0),
                TermKind::Stimulus(Source::Const(true)) => Place::Stim(n + 1),
                TermKind::Stimulus(Source::Input(x)) => {
                    Place::Stim(1 + sources.iter().position(|s| s == x).ok_or_else(|| unfit(x))?)
                }
                TermKind::Latent { op: LatentOp::Copy, args } => place[args[0].as_str()],
                TermKind::Latent { op, args } => {
                    latent.push((*op, args));
                    Place::Latent(latent.len() - 1)
                }
            };
            place.insert(&t.bit, p);
        }
        let stim_slots = self.rel.num_stimulus_slots();
        let mut keys: Vec<usize> = place
            .values()
            .filter_map(|p| match p {
                Place::Stim(k) => Some(*k),
                Place::Latent(_) => None,
            })
            .collect();
        keys.sort_unstable();
        keys.dedup();
        if keys.len() > stim_slots || latent.len() > self.rel.num_latent_slots() {
            return Err(unfit("relation has more terms than slots"));
        }
        if self.sorted {
            let mut k = 0;
            while keys.len() < stim_slots {
                if !keys.contains(&k) {
                    keys.push(k);
                }
                k += 1;
            }
            keys.sort_unstable();
        }
        let slot = |p: Place| match p {
            Place::Stim(k) => keys.iter().position(|&x| x == k).expect("stimulus key"),
            Place::Latent(i) => stim_slots + i,
        };
        let mut terms: Vec<Term> = keys
            .iter()
            .enumerate()
            .map(|(j, &k)| match k {
                0 => Term::constant(self.hidden[j].clone(), false),
                k if k == n + 1 => Term::constant(self.hidden[j].clone(), true),
                k => Term::input(self.hidden[j].clone(), sources[k - 1].clone()),
            })
            .collect();
        for (i, (op, args)) in latent.iter().enumerate() {
            let args: Vec<String> = args.iter().map(|a| self.hidden[slot(place[a.as_str()])].clone()).collect();
            terms.push(Term::latent(self.hidden[stim_slots + i].clone(), *op, args));
        }
        let mut out = self.rel.witness(&terms)?;
        for (j, sel) in self.bind.iter().enumerate() {
            let k = slot(place[self.circuit_bits[j].as_str()]);
            out.extend(sel.iter().enumerate().map(|(i, &v)| v.with(i == k)));
        }
        Ok(out)
    }
}

/// Output literals of one instance of `locked`.
fn instance(enc: &mut Encoder, locked: &LockedCircuit, xs: &[Lit], rs: &[Lit]) -> Vec<Lit> {
    let net = &locked.circuit;
    let mut xi = xs.iter();
    let pos: HashMap<_, usize> = locked.relation_bits.iter().enumerate().map(|(k, &w)| (w, k)).collect();
    let inputs: Vec<Lit> = net
        .inputs()
        .iter()
        .map(|w| match pos.get(w) {
            Some(&k) => rs[k],
            None => *xi.next().expect("input count"),
        })
        .collect();
    let lits = enc.encode_netlist(net, &inputs);
    net.outputs().iter().map(|o| lits[o.index()]).collect()
}

/// Clauses one instance of `locked` adds to an encoder.
pub fn circuit_clauses(locked: &LockedCircuit) -> usize {
    let mut enc = Encoder::new(true);
    enc.true_lit();
    let before = enc.num_clauses();
    let xs: Vec<Lit> = locked.x_inputs().iter().map(|_| enc.new_lit()).collect();
    let rs: Vec<Lit> = locked.relation_bits.iter().map(|_| enc.new_lit()).collect();
    instance(&mut enc, locked, &xs, &rs);
    enc.num_clauses() - before
}

fn check_oracle(locked: &LockedCircuit, oracle: &dyn Oracle) -> Result<(), AttackError> {
    let (xi, yo) = (locked.x_inputs().len(), locked.circuit.outputs().len());
    if oracle.num_inputs() != xi || oracle.num_outputs() != yo {
        return Err(AttackError::Spec(format!(
            "oracle has {}/{} inputs/outputs, locked circuit {xi}/{yo}",
            oracle.num_inputs(),
            oracle.num_outputs()
        )));
    }
    Ok(())
}

fn check_space(locked: &LockedCircuit, cfg: &AttackerConfig) -> Result<(), AttackError> {
    if !locked.relation_bits.is_empty() && cfg.stimulus_slots + cfg.latent_slots == 0 {
        return Err(SketchError::ZeroCapacity("attacker relation slots").into());
    }
    Ok(())
}

/// Two candidate relations that disagree on `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distinguishing {
    pub x: Vec<bool>,
    pub psi1: KeyRelation,
    pub psi2: KeyRelation,
}

/// Solver state of one attack: both candidate sketches, the collected
/// examples, and the distinguishing-input query guarded by an activation
/// literal.
pub struct AttackState {
    locked: LockedCircuit,
    enc: Encoder,
    solver: Solver,
    psi1: BoundSketch,
    psi2: BoundSketch,
    xs: Vec<Lit>,
    act: Lit,
    examples: Vec<(Vec<bool>, Vec<bool>)>,
    q_clauses: usize,
}

impl AttackState {
    pub fn new(locked: &LockedCircuit, cfg: &AttackerConfig) -> Result<AttackState, AttackError> {
        check_space(locked, cfg)?;
        let mut enc = Encoder::new(true);
        enc.true_lit();
        let psi1 = BoundSketch::build(&mut enc, locked, cfg);
        let psi2 = BoundSketch::build(&mut enc, locked, cfg);
        let xs: Vec<Lit> = locked.x_inputs().iter().map(|_| enc.new_lit()).collect();
        let r1 = psi1.eval(&mut enc, &xs);
        let r2 = psi2.eval(&mut enc, &xs);
        let y1 = instance(&mut enc, locked, &xs, &r1);
        let y2 = instance(&mut enc, locked, &xs, &r2);
        let diffs: Vec<Lit> = y1.iter().zip(&y2).map(|(&a, &b)| enc.xor2(a, b)).collect();
        let diff = enc.or(&diffs);
        let act = enc.new_lit();
        enc.add_clause([!act, diff]);
        let solver = Solver::new(SolverConfig {
            seed: cfg.seed,
            ..SolverConfig::default()
        });
        Ok(AttackState {
            locked: locked.clone(),
            enc,
            solver,
            psi1,
            psi2,
            xs,
            act,
            examples: Vec::new(),
            q_clauses: 0,
        })
    }

    pub fn examples(&self) -> &[(Vec<bool>, Vec<bool>)] {
        &self.examples
    }

    /// Clauses contributed by the collected examples.
    pub fn q_clauses(&self) -> usize {
        self.q_clauses
    }

    /// An input on which two example-consistent candidates make the locked
    /// circuit disagree, or `None` when no such input exists.
    pub fn find_distinguishing_input(&mut self, limits: &SolveLimits) -> Result<Option<Distinguishing>, AttackError> {
        self.enc.flush(&mut self.solver);
        let model = match self.solver.solve_with(&[self.act], limits)? {
            SatResult::Unsat => return Ok(None),
            SatResult::Sat(m) => m,
        };
        let x: Vec<bool> = self.xs.iter().map(|&l| model.lit(l)).collect();
        debug_assert!(self.examples.iter().all(|(e, _)| *e != x), "repeated input");
        Ok(Some(Distinguishing {
            x,
            psi1: self.psi1.decode(&model)?,
            psi2: self.psi2.decode(&model)?,
        }))
    }

    /// Requires both candidates to produce `y` on `x`.
    pub fn add_example(&mut self, x: &[bool], y: &[bool]) {
        let before = self.enc.num_clauses();
        let enc = &mut self.enc;
        let xl: Vec<Lit> = x
            .iter()
            .map(|&v| {
                let l = enc.new_lit();
                enc.unit(l.with(v));
                l
            })
            .collect();
        for sk in [&self.psi1, &self.psi2] {
            let rs = sk.eval(enc, &xl);
            let out = instance(enc, &self.locked, &xl, &rs);
            for (&o, &v) in out.iter().zip(y) {
                enc.unit(o.with(v));
            }
        }
        self.q_clauses += enc.num_clauses() - before;
        let mut block = vec![!self.act];
        block.extend(self.xs.iter().zip(x).map(|(&l, &v)| l.with(!v)));
        enc.add_clause(block);
        self.examples.push((x.to_vec(), y.to_vec()));
    }

    /// Some first candidate consistent with every example.
    pub fn synthesize(&mut self, limits: &SolveLimits) -> Result<Option<KeyRelation>, AttackError> {
        self.enc.flush(&mut self.solver);
        match self.solver.solve_with(&[!self.act], limits)? {
            SatResult::Unsat => Ok(None),
            SatResult::Sat(m) => Ok(Some(self.psi1.decode(&m)?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackOutcome {
    Recovered,
    /// No relation in the guessed space fits the oracle answers.
    Infeasible,
    LimitHit(Limit),
}

impl AttackOutcome {
    pub fn label(self) -> &'static str {
        match self {
            AttackOutcome::Recovered => "recovered",
            AttackOutcome::Infeasible => "infeasible",
            AttackOutcome::LimitHit(Limit::Conflicts) => "limit-conflicts",
            AttackOutcome::LimitHit(Limit::Time) => "limit-time",
            AttackOutcome::LimitHit(Limit::Stopped) => "limit-stopped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Iteration {
    pub index: usize,
    #[serde(serialize_with = "ser_vector")]
    pub x: Vec<bool>,
    #[serde(serialize_with = "ser_vector")]
    pub y: Vec<bool>,
    pub t_ms: f64,
    pub cumulative_ms: f64,
    /// Example clauses after this iteration.
    pub q_clauses: usize,
}

fn ser_vector<S: serde::Serializer>(v: &[bool], s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_vector(v))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackTrace {
    pub iterations: Vec<Iteration>,
    pub total_ms: f64,
    pub outcome: AttackOutcome,
    /// The last distinguishing-input query was UNSAT.
    pub final_query_unsat: bool,
    /// Clauses of one locked-circuit instance.
    pub circuit_clauses: usize,
}

impl AttackTrace {
    pub fn n(&self) -> usize {
        self.iterations.len()
    }

    pub fn inputs(&self) -> impl Iterator<Item = &[bool]> {
        self.iterations.iter().map(|i| i.x.as_slice())
    }
}

#[derive(Debug, Clone)]
pub struct AttackRun {
    pub psi: Option<KeyRelation>,
    pub trace: AttackTrace,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Queries distinguishing inputs until none is left, then returns a
/// relation consistent with every answer. That relation activates `locked`
/// into the oracle's function whenever the guessed space holds one that
/// does; `verify_recovered` checks it. A limit hit ends the run with the
/// partial trace.
pub fn synth_attack(
    locked: &LockedCircuit,
    oracle: &mut dyn Oracle,
    cfg: &AttackerConfig,
    limits: &SolveLimits,
) -> Result<AttackRun, AttackError> {
    let start = Instant::now();
    check_oracle(locked, oracle)?;
    let mut state = AttackState::new(locked, cfg)?;
    let mut trace = AttackTrace {
        iterations: Vec::new(),
        total_ms: 0.0,
        outcome: AttackOutcome::Infeasible,
        final_query_unsat: false,
        circuit_clauses: circuit_clauses(locked),
    };
    let mut cumulative = 0.0;
    let finish = |mut trace: AttackTrace, outcome, psi| {
        trace.outcome = outcome;
        trace.total_ms = ms(start);
        Ok(AttackRun { psi, trace })
    };
    loop {
        let t = Instant::now();
        let d = match state.find_distinguishing_input(limits) {
            Err(AttackError::Limit(l)) => return finish(trace, AttackOutcome::LimitHit(l), None),
            r => r?,
        };
        let Some(d) = d else {
            trace.final_query_unsat = true;
            break;
        };
        let y = oracle.evaluate(&d.x)?;
        state.add_example(&d.x, &y);
        let t_ms = ms(t);
        cumulative += t_ms;
        log::debug!("iteration {}: {} -> {}", trace.n() + 1, format_vector(&d.x), format_vector(&y));
        trace.iterations.push(Iteration {
            index: trace.n() + 1,
            x: d.x,
            y,
            t_ms,
            cumulative_ms: cumulative,
            q_clauses: state.q_clauses(),
        });
    }
    match state.synthesize(limits) {
        Err(AttackError::Limit(l)) => finish(trace, AttackOutcome::LimitHit(l), None),
        Err(e) => Err(e),
        Ok(None) => finish(trace, AttackOutcome::Infeasible, None),
        Ok(Some(psi)) => finish(trace, AttackOutcome::Recovered, Some(psi)),
    }
}

/// Relations fitting a fixed set of oracle samples, with no check beyond
/// them.
pub struct SampleQuery {
    locked: LockedCircuit,
    enc: Encoder,
    sketch: BoundSketch,
    seed: u64,
}

impl SampleQuery {
    pub fn new(locked: &LockedCircuit, cfg: &AttackerConfig) -> Result<SampleQuery, AttackError> {
        check_space(locked, cfg)?;
        let mut enc = Encoder::new(true);
        let sketch = BoundSketch::build(&mut enc, locked, cfg);
        Ok(SampleQuery {
            locked: locked.clone(),
            enc,
            sketch,
            seed: cfg.seed,
        })
    }

    pub fn add_sample(&mut self, x: &[bool], y: &[bool]) {
        let xl: Vec<Lit> = x.iter().map(|&v| self.enc.constant(v)).collect();
        let rs = self.sketch.eval(&mut self.enc, &xl);
        let out = instance(&mut self.enc, &self.locked, &xl, &rs);
        for (&o, &v) in out.iter().zip(y) {
            self.enc.unit(o.with(v));
        }
    }

    fn solve(&self, assumptions: &[Lit], limits: &SolveLimits) -> Result<Option<Model>, AttackError> {
        let mut solver = Solver::from_cnf(
            self.enc.cnf(),
            SolverConfig {
                seed: self.seed,
                ..SolverConfig::default()
            },
        );
        Ok(solver.solve_with(assumptions, limits)?.model().cloned())
    }

    pub fn fit(&self, limits: &SolveLimits) -> Result<Option<KeyRelation>, AttackError> {
        self.solve(&[], limits)?.map(|m| self.sketch.decode(&m)).transpose()
    }

    /// Whether `psi` lies in the space and fits every sample.
    pub fn admits(&self, psi: &KeyRelation, limits: &SolveLimits) -> Result<bool, AttackError> {
        let w = match self.sketch.witness(psi) {
            Ok(w) => w,
            Err(AttackError::Sketch(_)) => return Ok(false),
            Err(e) => return Err(e),
        };
        Ok(self.solve(&w, limits)?.is_some())
    }
}

/// Fits a relation to the oracle's answers on `samples` only. `None` means
/// no relation in the space fits.
pub fn naive_sample_attack(
    locked: &LockedCircuit,
    oracle: &mut dyn Oracle,
    samples: &[Vec<bool>],
    cfg: &AttackerConfig,
    limits: &SolveLimits,
) -> Result<Option<KeyRelation>, AttackError> {
    if samples.is_empty() {
        return Err(AttackError::Spec("no samples".into()));
    }
    check_oracle(locked, oracle)?;
    let mut q = SampleQuery::new(locked, cfg)?;
    for x in samples {
        let y = oracle.evaluate(x)?;
        q.add_sample(x, &y);
    }
    q.fit(limits)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Recovery {
    Equivalent {
        checked: u64,
        exhaustive: bool,
        /// A miter against the reference netlist was UNSAT.
        miter: bool,
    },
    Mismatch {
        #[serde(serialize_with = "ser_vector")]
        x: Vec<bool>,
        #[serde(serialize_with = "ser_vector")]
        oracle: Vec<bool>,
        #[serde(serialize_with = "ser_vector")]
        recovered: Vec<bool>,
    },
}

/// Inputs up to this width are checked exhaustively.
pub const EXHAUSTIVE_INPUTS: usize = 12;
const SAMPLED_QUERIES: u64 = 4096;

fn pattern(n: usize, p: u64) -> Vec<bool> {
    (0..n).map(|i| p >> (n - 1 - i) & 1 == 1).collect()
}

/// Compares `locked` activated with `psi` against the oracle: on every input
/// for narrow circuits, else on random samples plus a miter against
/// `reference` when one is available.
pub fn verify_recovered(
    locked: &LockedCircuit,
    psi: &KeyRelation,
    oracle: &mut dyn Oracle,
    reference: Option<&Netlist>,
    seed: u64,
    limits: &SolveLimits,
) -> Result<Recovery, AttackError> {
    check_oracle(locked, oracle)?;
    let active = inline_relation(locked, psi)?;
    let n = active.inputs().len();
    let exhaustive = n <= EXHAUSTIVE_INPUTS;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = if exhaustive { 1u64 << n } else { SAMPLED_QUERIES };
    for p in 0..count {
        let x = if exhaustive {
            pattern(n, p)
        } else {
            (0..n).map(|_| rng.random::<bool>()).collect()
        };
        let want = oracle.evaluate(&x)?;
        let got = active.eval(&x)?;
        if want != got {
            return Ok(Recovery::Mismatch {
                x,
                oracle: want,
                recovered: got,
            });
        }
    }
    let mut miter = false;
    if let Some(r) = reference {
        let xs: Vec<String> = locked.x_names();
        let m = build_miter(r, &active, &xs)?;
        if let Some(x) = miter_witness(&m, limits)? {
            return Ok(Recovery::Mismatch {
                oracle: r.eval(&x)?,
                recovered: active.eval(&x)?,
                x,
            });
        }
        miter = true;
    }
    Ok(Recovery::Equivalent {
        checked: count,
        exhaustive,
        miter,
    })
}

/// Time series of one attack.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResilienceReport {
    pub n: usize,
    pub total_ms: f64,
    pub sum_t_ms: f64,
    pub cumulative_ms: Vec<f64>,
    /// The attack ran to the end rather than hitting a limit.
    pub complete: bool,
    pub outcome: &'static str,
    pub final_query_unsat: bool,
    pub circuit_clauses: usize,
    pub iterations: Vec<Iteration>,
}

pub fn resilience_report(trace: &AttackTrace) -> ResilienceReport {
    ResilienceReport {
        n: trace.n(),
        total_ms: trace.total_ms,
        sum_t_ms: trace.iterations.iter().map(|i| i.t_ms).sum(),
        cumulative_ms: trace.iterations.iter().map(|i| i.cumulative_ms).collect(),
        complete: !matches!(trace.outcome, AttackOutcome::LimitHit(_)),
        outcome: trace.outcome.label(),
        final_query_unsat: trace.final_query_unsat,
        circuit_clauses: trace.circuit_clauses,
        iterations: trace.iterations.clone(),
    }
}

impl ResilienceReport {
    pub fn write_csv(&self, w: &mut dyn Write) -> io::Result<()> {
        writeln!(w, "iteration,t_i_ms,cumulative_ms,input_vector")?;
        for i in &self.iterations {
            writeln!(w, "{},{:.3},{:.3},{}", i.index, i.t_ms, i.cumulative_ms, format_vector(&i.x))?;
        }
        Ok(())
    }

    /// One JSON object per iteration.
    pub fn write_jsonl(&self, w: &mut dyn Write) -> io::Result<()> {
        for i in &self.iterations {
            serde_json::to_writer(&mut *w, i)?;
            writeln!(w)?;
        }
        Ok(())
    }
}
