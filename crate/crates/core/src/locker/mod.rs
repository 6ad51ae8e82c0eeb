//! The locking loop: pick expressions, synthesize locked replacements and
//! relation terms for them, check the relation stays within budget, and
//! reject locks that ignore their relation bits.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cnf::{miter_witness, Limit, SolveLimits};
use crate::keyrel::{Budget, Cost, KeyRelation, SketchError};
use crate::netlist::{build_miter, DepGraph, LockedCircuit, Netlist, WireId};
use crate::synth::{
    cegis_synthesize, minimize_budget, new_bits, splice, verify_lock, SynthConfig, SynthError, SynthOutcome, SynthSpec, Verdict,
};

#[derive(Debug, Error)]
pub enum LockError {
    #[error("invalid budget: {0}")]
    Budget(#[from] SketchError),
    #[error("selection: {0}")]
    Selection(String),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("lock timed out after {attempts} attempt(s)")]
    Timeout { attempts: usize },
    #[error("no correct and secure lock after {attempts} attempt(s); last failure: {last}")]
    Exhausted { attempts: usize, last: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelectionConfig {
    /// Inclusive depth range `[lo, hi]` of candidate expressions.
    pub depth: (u32, u32),
    pub count: usize,
    pub seed: u64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            depth: (2, 4),
            count: 2,
            seed: 0,
        }
    }
}

/// Which selection rule produced a pick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rule {
    First,
    Dependency,
    Farthest,
}

/// Candidate expressions: variables in the depth range that some output
/// depends on (or that are outputs).
pub fn candidate_set(net: &Netlist, graph: &DepGraph, depth: (u32, u32)) -> Vec<WireId> {
    let outs: Vec<WireId> = net.outputs().iter().copied().filter(|&o| graph.contains(o)).collect();
    let mut live = graph.backslice(&outs).unwrap_or_default();
    live.extend(outs);
    graph
        .candidates(depth.0, depth.1)
        .into_iter()
        .filter(|w| live.contains(w))
        .collect()
}

/// Picks `count` distinct expressions. The first is uniform over the
/// candidates; after that a fair coin chooses between a random dependency of
/// the current picks and the candidate farthest from the first pick.
pub fn select_expressions<R: Rng + ?Sized>(
    net: &Netlist,
    graph: &DepGraph,
    cfg: &SelectionConfig,
    rng: &mut R,
) -> Result<Vec<(WireId, Rule)>, LockError> {
    let (lo, hi) = cfg.depth;
    if lo < 1 || lo > hi {
        return Err(LockError::Selection(format!("bad depth range {lo}:{hi}")));
    }
    if cfg.count == 0 {
        return Err(LockError::Selection("count must be at least 1".into()));
    }
    let z = candidate_set(net, graph, cfg.depth);
    if z.is_empty() {
        return Err(LockError::Selection(format!("no candidates with depth in {lo}:{hi}")));
    }
    if cfg.count > z.len() {
        return Err(LockError::Selection(format!(
            "{} expressions requested, only {} candidates",
            cfg.count,
            z.len()
        )));
    }
    let z0 = z[rng.random_range(0..z.len())];
    let dist = graph.undirected_distances(z0);
    let mut picks = vec![(z0, Rule::First)];
    while picks.len() < cfg.count {
        let chosen: Vec<WireId> = picks.iter().map(|p| p.0).collect();
        let deps: Vec<WireId> = graph
            .backslice(&chosen)
            .expect("picks are graph nodes")
            .into_iter()
            .filter(|w| z.contains(w) && !chosen.contains(w))
            .collect();
        let use_deps = rng.random_bool(0.5);
        if use_deps && !deps.is_empty() {
            picks.push((deps[rng.random_range(0..deps.len())], Rule::Dependency));
            continue;
        }
        let far = z
            .iter()
            .copied()
            .filter(|w| !chosen.contains(w))
            .max_by_key(|w| (dist[w.index()].unwrap_or(u32::MAX), std::cmp::Reverse(*w)))
            .expect("count <= |Z|");
        picks.push((far, Rule::Farthest));
    }
    Ok(picks)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LockConfig {
    pub selection: SelectionConfig,
    /// Grammars, cone depth and the latent-read rule. Slot counts, bit names
    /// and solver seed are filled in per increment.
    pub synth: SynthConfig,
    pub stimulus_per_expr: usize,
    pub latent_per_expr: usize,
    /// One expression per synthesis call, committed relation reused.
    pub incremental: bool,
    /// Synthesize on the backslice of the targets.
    pub backslice: bool,
    /// Shrink each increment's latent-term count.
    pub minimize: bool,
    pub max_retries: usize,
}

impl Default for LockConfig {
    fn default() -> Self {
        LockConfig {
            selection: SelectionConfig::default(),
            synth: SynthConfig::default(),
            stimulus_per_expr: 2,
            latent_per_expr: 2,
            incremental: true,
            backslice: true,
            minimize: true,
            max_retries: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Security {
    /// Inputs `x` and relation-bit values `r` on which the locked circuit
    /// differs from the original.
    Secure { x: Vec<bool>, r: Vec<bool> },
    /// No relation-bit values change the function: the lock is trivial.
    Trivial,
}

/// Looks for `x, r` with `locked(x, r) != original(x)`.
pub fn check_security(original: &Netlist, locked: &LockedCircuit, limits: &SolveLimits) -> Result<Security, SynthError> {
    let xs: Vec<String> = original.input_names().map(str::to_string).collect();
    let m = build_miter(original, &locked.circuit, &xs)?;
    let Some(v) = miter_witness(&m, limits)? else {
        return Ok(Security::Trivial);
    };
    let x = v[..xs.len()].to_vec();
    let r = locked
        .relation_names()
        .iter()
        .map(|n| {
            let name = format!("b:{n}");
            let k = m.inputs().iter().position(|&w| m.wire_name(w) == name).unwrap();
            v[k]
        })
        .collect();
    Ok(Security::Secure { x, r })
}

/// Lock under construction: the current locked circuit and relation.
#[derive(Debug, Clone)]
pub struct LockState {
    pub original: Netlist,
    pub graph: DepGraph,
    pub locked: LockedCircuit,
    pub psi: KeyRelation,
    pub next_bit: usize,
    pub bit_prefix: String,
}

impl LockState {
    pub fn new(original: &Netlist) -> LockState {
        LockState {
            graph: DepGraph::new(original),
            locked: LockedCircuit::unlocked(original),
            psi: KeyRelation::empty(),
            next_bit: 0,
            bit_prefix: bit_prefix(original),
            original: original.clone(),
        }
    }
}

/// `r` unless some wire is already named like a relation bit.
pub fn bit_prefix(net: &Netlist) -> String {
    let clash = |p: &str| {
        (0..net.num_wires()).any(|i| {
            let n = net.wire_name(WireId(i as u32));
            n.strip_prefix(p).is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
        })
    };
    ["r", "rb", "key_r"]
        .into_iter()
        .map(str::to_string)
        .chain((0..).map(|k| format!("r{k}_")))
        .find(|p| !clash(p))
        .unwrap()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub targets: Vec<String>,
    /// `found`, `infeasible` or `limit`.
    pub result: &'static str,
    pub latent_terms: usize,
    pub iterations: usize,
    pub cnf_clauses: usize,
    pub ms: f64,
}

/// Synthesizes `targets` into `state`. In incremental mode they are handled
/// one at a time in ascending depth, each seeing the relation committed so
/// far; otherwise in a single call. Stops at the first failing step.
pub fn synthesize_increment(
    state: &mut LockState,
    targets: &[WireId],
    cfg: &LockConfig,
    budget: &Budget,
    limits: &SolveLimits,
) -> Result<Vec<StepReport>, LockError> {
    if cfg.incremental {
        for w in targets.windows(2) {
            if state.graph.depth(w[0]) > state.graph.depth(w[1]) {
                return Err(LockError::Selection("expressions must come in ascending depth".into()));
            }
        }
    }
    let groups: Vec<Vec<WireId>> = if cfg.incremental {
        targets.iter().map(|&t| vec![t]).collect()
    } else {
        vec![targets.to_vec()]
    };
    let mut reports = Vec::new();
    for group in groups {
        let report = synth_step(state, &group, cfg, budget, limits)?;
        let ok = report.result == "found";
        reports.push(report);
        if !ok {
            break;
        }
    }
    Ok(reports)
}

fn synth_step(
    state: &mut LockState,
    group: &[WireId],
    cfg: &LockConfig,
    budget: &Budget,
    limits: &SolveLimits,
) -> Result<StepReport, LockError> {
    let t0 = Instant::now();
    let names: Vec<String> = group.iter().map(|&w| state.original.wire_name(w).to_string()).collect();
    let cost = state.psi.cost();
    let room_latent = budget.max_latent_terms.saturating_sub(cost.latent_terms);
    let room_bits = budget.max_relation_bits.saturating_sub(cost.relation_bits);
    let latent = (cfg.latent_per_expr * group.len()).min(room_latent).min(room_bits);
    let stim = (cfg.stimulus_per_expr * group.len()).min(room_bits - latent);
    let sc = SynthConfig {
        stimulus_slots: stim,
        latent_slots: latent,
        expr_nodes: budget.max_expr_nodes,
        bit_prefix: state.bit_prefix.clone(),
        next_bit: state.next_bit,
        ..cfg.synth.clone()
    };
    let full = SynthSpec::new(state.original.clone(), state.locked.clone(), state.psi.clone(), names.clone())?;
    let spec = if cfg.backslice { full.sliced()? } else { full };
    let run = cegis_synthesize(&spec, &sc, limits)?;
    let mut report = StepReport {
        targets: names,
        result: "found",
        latent_terms: 0,
        iterations: run.state.iterations,
        cnf_clauses: run.state.cnf_clauses,
        ms: 0.0,
    };
    let found = match run.outcome {
        SynthOutcome::Found(r) => r,
        SynthOutcome::Infeasible => {
            report.result = "infeasible";
            report.ms = t0.elapsed().as_secs_f64() * 1e3;
            return Ok(report);
        }
        SynthOutcome::LimitHit(Limit::Time) => return Err(SynthError::Limit(Limit::Time).into()),
        SynthOutcome::LimitHit(_) => {
            report.result = "limit";
            report.ms = t0.elapsed().as_secs_f64() * 1e3;
            return Ok(report);
        }
    };
    let found = if cfg.minimize {
        minimize_budget(&spec, &sc, found, limits)?.best
    } else {
        found
    };
    let psi = found.relation.clone();
    assert!(psi.cost().latent_terms <= budget.max_latent_terms, "increment exceeds the budget");
    state.locked = if cfg.backslice {
        let bits = new_bits(&state.locked, &found.relation, &found.exprs);
        splice(&state.locked, &found.exprs, &bits).map_err(SynthError::from)?
    } else {
        found.locked.clone()
    };
    state.psi = psi;
    state.next_bit = found.next_bit;
    report.latent_terms = found.latent_terms();
    report.ms = t0.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttemptReport {
    pub attempt: usize,
    pub selected: Vec<String>,
    pub rules: Vec<Rule>,
    pub steps: Vec<StepReport>,
    /// `ok`, `synthesis` or `trivial`.
    pub result: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LockStats {
    pub attempts: Vec<AttemptReport>,
    pub cost: Cost,
    pub total_ms: f64,
    pub security_witness_x: Vec<bool>,
    pub security_witness_r: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct LockResult {
    pub locked: LockedCircuit,
    pub psi: KeyRelation,
    pub selected: Vec<String>,
    pub stats: LockStats,
}

/// Locks `original` within `budget`. The result has passed the
/// all-inputs correctness check and the security check.
pub fn lock(original: &Netlist, budget: &Budget, cfg: &LockConfig, limits: &SolveLimits) -> Result<LockResult, LockError> {
    budget.validate()?;
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.selection.seed);
    let mut attempts = Vec::new();
    let mut last = String::new();
    for attempt in 0..=cfg.max_retries {
        let mut state = LockState::new(original);
        let picks = select_expressions(original, &state.graph, &cfg.selection, &mut rng)?;
        let mut order: Vec<WireId> = picks.iter().map(|p| p.0).collect();
        order.sort_by_key(|&w| (state.graph.depth(w), w));
        let mut report = AttemptReport {
            attempt,
            selected: picks.iter().map(|p| original.wire_name(p.0).to_string()).collect(),
            rules: picks.iter().map(|p| p.1).collect(),
            steps: Vec::new(),
            result: "ok",
        };
        let mut c = cfg.clone();
        c.synth.seed = cfg.synth.seed.wrapping_add(attempt as u64);
        let steps = match synthesize_increment(&mut state, &order, &c, budget, limits) {
            Err(LockError::Synth(SynthError::Limit(Limit::Time))) => {
                return Err(LockError::Timeout { attempts: attempt + 1 })
            }
            r => r?,
        };
        let complete = steps.len() == if c.incremental { order.len() } else { 1 }
            && steps.iter().all(|s| s.result == "found");
        report.steps = steps;
        if !complete {
            report.result = "synthesis";
            last = format!("synthesis failed for {:?}", report.selected);
            attempts.push(report);
            continue;
        }
        match verify_lock(original, &state.locked, &state.psi, limits) {
            Ok(Verdict::Valid) => {}
            Ok(Verdict::Counterexample(x)) => panic!("verified increments produced an incorrect lock at {x:?}"),
            Err(SynthError::Limit(Limit::Time)) => return Err(LockError::Timeout { attempts: attempt + 1 }),
            Err(e) => return Err(e.into()),
        }
        let sec = match check_security(original, &state.locked, limits) {
            Err(SynthError::Limit(Limit::Time)) => return Err(LockError::Timeout { attempts: attempt + 1 }),
            r => r?,
        };
        let Security::Secure { x, r } = sec else {
            report.result = "trivial";
            last = format!("lock of {:?} is trivial", report.selected);
            attempts.push(report);
            continue;
        };
        let selected = report.selected.clone();
        attempts.push(report);
        let stats = LockStats {
            attempts,
            cost: state.psi.cost(),
            total_ms: t0.elapsed().as_secs_f64() * 1e3,
            security_witness_x: x,
            security_witness_r: r,
        };
        let locked = LockedCircuit {
            circuit: state.locked.circuit.clone().with_name(format!("{}_locked", original.name())),
            ..state.locked
        };
        return Ok(LockResult {
            locked,
            psi: state.psi,
            selected,
            stats,
        });
    }
    Err(LockError::Exhausted {
        attempts: cfg.max_retries + 1,
        last,
    })
}

#[cfg(test)]
mod tests;
