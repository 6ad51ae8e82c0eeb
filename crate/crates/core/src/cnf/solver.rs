//! Conflict-driven clause learning.
//!
//! Two watched literals with blockers, first-UIP learning with local
//! minimization, VSIDS on a binary heap, phase saving, Luby restarts, and
//! activity-based learnt clause deletion. Clauses may be added between calls
//! and each call can take assumptions, so one instance can serve a whole
//! CEGIS run.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Cnf, Lit, Model, SatResult, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    Conflicts,
    Time,
    Stopped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("solver resource limit reached ({0:?})")]
    LimitHit(Limit),
}

/// Per-call resource limits. A limit hit is reported as an error, never as
/// UNSAT.
#[derive(Debug, Clone, Default)]
pub struct SolveLimits {
    pub conflicts: Option<u64>,
    pub deadline: Option<Instant>,
    pub stop: Option<Arc<AtomicBool>>,
}

impl SolveLimits {
    pub fn none() -> SolveLimits {
        SolveLimits::default()
    }

    pub fn conflicts(n: u64) -> SolveLimits {
        SolveLimits {
            conflicts: Some(n),
            ..Default::default()
        }
    }

    fn check(&self, conflicts: u64) -> Result<(), SolveError> {
        if self.conflicts.is_some_and(|c| conflicts >= c) {
            return Err(SolveError::LimitHit(Limit::Conflicts));
        }
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(SolveError::LimitHit(Limit::Time));
        }
        if self.stop.as_ref().is_some_and(|s| s.load(Ordering::Relaxed)) {
            return Err(SolveError::LimitHit(Limit::Stopped));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub seed: u64,
    pub restart_base: u64,
    pub var_decay: f64,
    pub clause_decay: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 0,
            restart_base: 100,
            var_decay: 0.95,
            clause_decay: 0.999,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    Undef,
    True,
    False,
}

#[derive(Debug, Clone)]
struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    activity: f64,
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    cref: u32,
    blocker: Lit,
}

/// Max-heap of variables keyed by activity.
#[derive(Debug, Clone, Default)]
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn grow(&mut self, n: usize) {
        self.pos.resize(n, None);
    }

    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize].is_some()
    }

    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        self.pos[v as usize] = Some(self.heap.len() - 1);
        self.up(self.heap.len() - 1, act);
    }

    fn bumped(&mut self, v: u32, act: &[f64]) {
        if let Some(i) = self.pos[v as usize] {
            self.up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.pos[top as usize] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = Some(0);
            self.down(0, act);
        }
        Some(top)
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if act[p as usize] >= act[v as usize] {
                break;
            }
            self.heap[i] = p;
            self.pos[p as usize] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        loop {
            let l = 2 * i + 1;
            if l >= self.heap.len() {
                break;
            }
            let r = l + 1;
            let c = if r < self.heap.len() && act[self.heap[r] as usize] > act[self.heap[l] as usize] {
                r
            } else {
                l
            };
            if act[self.heap[c] as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i] as usize] = Some(i);
            i = c;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }
}

fn luby(y: f64, mut x: u64) -> f64 {
    let (mut size, mut seq) = (1u64, 0u32);
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq as i32)
}

#[derive(Debug, Clone, Default)]
pub struct SolverStats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
}

#[derive(Debug, Clone)]
pub struct Solver {
    config: SolverConfig,
    rng: ChaCha8Rng,
    ok: bool,
    clauses: Vec<Clause>,
    /// Every clause as added, for model checking.
    original: Vec<Vec<Lit>>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<Value>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    polarity: Vec<bool>,
    activity: Vec<f64>,
    seen: Vec<bool>,
    heap: VarHeap,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    var_inc: f64,
    cla_inc: f64,
    num_learnts: usize,
    max_learnts: f64,
    pub stats: SolverStats,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new(SolverConfig::default())
    }
}

impl Solver {
    pub fn new(config: SolverConfig) -> Solver {
        Solver {
            config,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            ok: true,
            clauses: Vec::new(),
            original: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            polarity: Vec::new(),
            activity: Vec::new(),
            seen: Vec::new(),
            heap: VarHeap::default(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            var_inc: 1.0,
            cla_inc: 1.0,
            num_learnts: 0,
            max_learnts: 0.0,
            stats: SolverStats::default(),
        }
    }

    pub fn from_cnf(cnf: &Cnf, config: SolverConfig) -> Solver {
        let mut s = Solver::new(config);
        s.reserve_vars(cnf.num_vars);
        for c in &cnf.clauses {
            s.add_clause(c);
        }
        s
    }

    pub fn num_vars(&self) -> u32 {
        self.assigns.len() as u32
    }

    pub fn num_clauses(&self) -> usize {
        self.original.len()
    }

    /// Makes sure variables `0..n` exist.
    pub fn reserve_vars(&mut self, n: u32) {
        while self.num_vars() < n {
            self.new_var();
        }
    }

    pub fn new_var(&mut self) -> Var {
        let v = self.assigns.len();
        self.assigns.push(Value::Undef);
        self.level.push(0);
        self.reason.push(None);
        self.polarity.push(false);
        // A tiny seeded perturbation decides the initial branching order.
        self.activity.push(self.rng.random::<f64>() * 1e-6);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.heap.grow(v + 1);
        self.heap.insert(v as u32, &self.activity);
        Var(v as u32)
    }

    #[inline]
    fn value(&self, l: Lit) -> Value {
        match self.assigns[l.var().index()] {
            Value::Undef => Value::Undef,
            Value::True if l.is_neg() => Value::False,
            Value::False if l.is_neg() => Value::True,
            v => v,
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<u32>) {
        let v = l.var().index();
        debug_assert_eq!(self.assigns[v], Value::Undef);
        self.assigns[v] = if l.is_neg() { Value::False } else { Value::True };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Adds a clause. Returns false once the formula is known UNSAT.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        for l in lits {
            assert!(l.var().0 < self.num_vars(), "literal {l} out of range");
        }
        self.original.push(lits.to_vec());
        if !self.ok {
            return false;
        }
        self.cancel_until(0);
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) || c.iter().any(|&l| self.value(l) == Value::True) {
            return true;
        }
        c.retain(|&l| self.value(l) != Value::False);
        match c.len() {
            0 => {
                self.ok = false;
            }
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(c, false);
            }
        }
        self.ok
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[lits[0].code()].push(Watcher {
            cref,
            blocker: lits[1],
        });
        self.watches[lits[1].code()].push(Watcher {
            cref,
            blocker: lits[0],
        });
        if learnt {
            self.num_learnts += 1;
        }
        self.clauses.push(Clause {
            lits,
            learnt,
            activity: 0.0,
        });
        cref
    }

    /// Unit propagation; returns a conflicting clause.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let (mut i, mut j) = (0, 0);
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == Value::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref as usize;
                {
                    let c = &mut self.clauses[cref].lits;
                    if c[0] == false_lit {
                        c.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                if first != w.blocker && self.value(first) == Value::True {
                    ws[j] = Watcher {
                        cref: w.cref,
                        blocker: first,
                    };
                    j += 1;
                    continue;
                }
                let len = self.clauses[cref].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let l = self.clauses[cref].lits[k];
                    if self.value(l) != Value::False {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[l.code()].push(Watcher {
                            cref: w.cref,
                            blocker: first,
                        });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = Watcher {
                    cref: w.cref,
                    blocker: first,
                };
                j += 1;
                if self.value(first) == Value::False {
                    conflict = Some(w.cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(w.cref));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(v as u32, &self.activity);
    }

    fn bump_clause(&mut self, cref: usize) {
        let c = &mut self.clauses[cref];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for c in &mut self.clauses {
                c.activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit::new(Var(0), false)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level();
        loop {
            self.bump_clause(confl as usize);
            let start = usize::from(p.is_some());
            for k in start..self.clauses[confl as usize].lits.len() {
                let q = self.clauses[confl as usize].lits[k];
                let v = q.var().index();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var().index()] {
                    break;
                }
            }
            let pl = self.trail[idx];
            p = Some(pl);
            self.seen[pl.var().index()] = false;
            path -= 1;
            if path == 0 {
                break;
            }
            confl = self.reason[pl.var().index()].expect("implied literal has a reason");
        }
        learnt[0] = !p.unwrap();

        // Local minimization: drop literals implied by the rest of the clause.
        let mut keep = vec![learnt[0]];
        for &q in &learnt[1..] {
            let v = q.var().index();
            let redundant = match self.reason[v] {
                None => false,
                Some(r) => self.clauses[r as usize].lits[1..].iter().all(|l| {
                    let u = l.var().index();
                    self.seen[u] || self.level[u] == 0
                }),
            };
            if !redundant {
                keep.push(q);
            }
        }
        for &q in &learnt {
            self.seen[q.var().index()] = false;
        }
        let mut learnt = keep;

        let mut bt = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().index()] > self.level[learnt[max_i].var().index()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[learnt[1].var().index()];
        }
        (learnt, bt)
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for k in (lim..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = l.var().index();
            self.assigns[v] = Value::Undef;
            self.reason[v] = None;
            self.polarity[v] = !l.is_neg();
            self.heap.insert(v as u32, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v as usize] == Value::Undef {
                return Some(Lit::new(Var(v), !self.polarity[v as usize]));
            }
        }
        None
    }

    fn is_locked(&self, cref: usize) -> bool {
        let l = self.clauses[cref].lits[0];
        self.value(l) == Value::True && self.reason[l.var().index()] == Some(cref as u32)
    }

    /// Drops the less active half of the learnt clauses and compacts the
    /// clause arena.
    fn reduce_db(&mut self) {
        let mut learnts: Vec<usize> = (0..self.clauses.len())
            .filter(|&c| self.clauses[c].learnt && self.clauses[c].lits.len() > 2 && !self.is_locked(c))
            .collect();
        learnts.sort_by(|&a, &b| {
            self.clauses[a]
                .activity
                .total_cmp(&self.clauses[b].activity)
                .then(a.cmp(&b))
        });
        let mut remove = vec![false; self.clauses.len()];
        for &c in &learnts[..learnts.len() / 2] {
            remove[c] = true;
        }
        let mut remap = vec![u32::MAX; self.clauses.len()];
        let old = std::mem::take(&mut self.clauses);
        self.num_learnts = 0;
        for (i, c) in old.into_iter().enumerate() {
            if !remove[i] {
                remap[i] = self.clauses.len() as u32;
                self.num_learnts += usize::from(c.learnt);
                self.clauses.push(c);
            }
        }
        for r in self.reason.iter_mut() {
            if let Some(c) = *r {
                *r = (remap[c as usize] != u32::MAX).then(|| remap[c as usize]);
            }
        }
        for w in &mut self.watches {
            w.clear();
        }
        for (i, c) in self.clauses.iter().enumerate() {
            self.watches[c.lits[0].code()].push(Watcher {
                cref: i as u32,
                blocker: c.lits[1],
            });
            self.watches[c.lits[1].code()].push(Watcher {
                cref: i as u32,
                blocker: c.lits[0],
            });
        }
    }

    pub fn solve(&mut self, limits: &SolveLimits) -> Result<SatResult, SolveError> {
        self.solve_with(&[], limits)
    }

    /// Decides the formula under `assumptions`. UNSAT under assumptions does
    /// not poison later calls.
    pub fn solve_with(&mut self, assumptions: &[Lit], limits: &SolveLimits) -> Result<SatResult, SolveError> {
        for a in assumptions {
            assert!(a.var().0 < self.num_vars(), "assumption {a} out of range");
        }
        if !self.ok {
            return Ok(SatResult::Unsat);
        }
        self.cancel_until(0);
        if self.propagate().is_some() {
            self.ok = false;
            return Ok(SatResult::Unsat);
        }
        self.max_learnts = (self.clauses.len() as f64 / 3.0).max(2000.0);
        let start_conflicts = self.stats.conflicts;
        let mut restart = 0u64;
        loop {
            let budget = (luby(2.0, restart) * self.config.restart_base as f64) as u64;
            match self.search(budget, assumptions, limits, start_conflicts)? {
                Some(result) => {
                    self.cancel_until(0);
                    return Ok(result);
                }
                None => {
                    restart += 1;
                    self.stats.restarts += 1;
                    self.cancel_until(0);
                    if self.num_learnts as f64 > self.max_learnts {
                        self.reduce_db();
                        self.max_learnts *= 1.1;
                    }
                }
            }
        }
    }

    /// One restart interval. `Ok(None)` means restart.
    fn search(
        &mut self,
        budget: u64,
        assumptions: &[Lit],
        limits: &SolveLimits,
        start_conflicts: u64,
    ) -> Result<Option<SatResult>, SolveError> {
        let mut local = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                local += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Ok(Some(SatResult::Unsat));
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let asserting = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.bump_clause(cref as usize);
                    self.enqueue(asserting, Some(cref));
                }
                self.var_inc /= self.config.var_decay;
                self.cla_inc /= self.config.clause_decay;
                limits.check(self.stats.conflicts - start_conflicts)?;
                continue;
            }
            if local >= budget {
                return Ok(None);
            }
            if self.stats.decisions.is_multiple_of(512) {
                limits.check(self.stats.conflicts - start_conflicts)?;
            }
            // Assumptions occupy the first decision levels.
            let mut next = None;
            while (self.decision_level() as usize) < assumptions.len() {
                let a = assumptions[self.decision_level() as usize];
                match self.value(a) {
                    Value::True => self.trail_lim.push(self.trail.len()),
                    Value::False => return Ok(Some(SatResult::Unsat)),
                    Value::Undef => {
                        next = Some(a);
                        break;
                    }
                }
            }
            let lit = match next {
                Some(a) => a,
                None => match self.pick_branch() {
                    Some(l) => l,
                    None => {
                        let model = Model(self.assigns.iter().map(|&v| v == Value::True).collect());
                        self.check_model(&model, assumptions);
                        return Ok(Some(SatResult::Sat(model)));
                    }
                },
            };
            self.stats.decisions += 1;
            self.trail_lim.push(self.trail.len());
            self.enqueue(lit, None);
        }
    }

    fn check_model(&self, model: &Model, assumptions: &[Lit]) {
        for c in &self.original {
            assert!(
                c.iter().any(|&l| model.lit(l)),
                "internal solver produced a model violating clause {c:?}"
            );
        }
        for &a in assumptions {
            assert!(model.lit(a), "model violates assumption {a}");
        }
    }
}

/// One-shot decision with the default configuration.
pub fn solve(cnf: &Cnf, limits: &SolveLimits) -> Result<SatResult, SolveError> {
    Solver::from_cnf(cnf, SolverConfig::default()).solve(limits)
}

/// Runs one solver per seed on the same formula; the first to finish wins
/// and stops the others. The verdict is deterministic, the model is not.
/// Any `stop` flag in `limits` is replaced by the portfolio's own.
pub fn solve_portfolio(cnf: &Cnf, seeds: &[u64], limits: &SolveLimits) -> Result<SatResult, SolveError> {
    assert!(!seeds.is_empty());
    let stop = Arc::new(AtomicBool::new(false));
    std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let stop = stop.clone();
                let mut lim = limits.clone();
                lim.stop = Some(stop.clone());
                scope.spawn(move || {
                    let cfg = SolverConfig {
                        seed,
                        ..SolverConfig::default()
                    };
                    let mut s = Solver::from_cnf(cnf, cfg);
                    let r = s.solve(&lim);
                    if r.is_ok() {
                        stop.store(true, Ordering::Relaxed);
                    }
                    r
                })
            })
            .collect();
        let results: Vec<_> = handles.into_iter().map(|h| h.join().expect("solver thread")).collect();
        results
            .iter()
            .find(|r| r.is_ok())
            .cloned()
            .unwrap_or_else(|| results[0].clone())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(x: i64) -> Lit {
        Lit::from_dimacs(x).unwrap()
    }

    fn cnf(n: u32, clauses: &[&[i64]]) -> Cnf {
        Cnf {
            num_vars: n,
            clauses: clauses.iter().map(|c| c.iter().map(|&x| lit(x)).collect()).collect(),
        }
    }

    #[test]
    fn tiny_unsat_and_sat() {
        let f = cnf(2, &[&[1, 2], &[-1], &[-2]]);
        assert_eq!(solve(&f, &SolveLimits::none()).unwrap(), SatResult::Unsat);
        let f = cnf(1, &[&[1]]);
        let r = solve(&f, &SolveLimits::none()).unwrap();
        assert!(r.model().unwrap().lit(lit(1)));
    }

    #[test]
    fn empty_clause_is_unsat() {
        let f = cnf(1, &[&[]]);
        assert_eq!(solve(&f, &SolveLimits::none()).unwrap(), SatResult::Unsat);
    }

    #[test]
    fn luby_sequence() {
        let seq: Vec<f64> = (0..15).map(|i| luby(2.0, i)).collect();
        assert_eq!(seq, [1., 1., 2., 1., 1., 2., 4., 1., 1., 2., 1., 1., 2., 4., 8.]);
    }

    fn pigeonhole(n: u32) -> Cnf {
        // n + 1 pigeons, n holes.
        let v = |p: u32, h: u32| (p * n + h + 1) as i64;
        let mut f = Cnf {
            num_vars: (n + 1) * n,
            clauses: Vec::new(),
        };
        for p in 0..=n {
            f.clauses.push((0..n).map(|h| lit(v(p, h))).collect());
        }
        for h in 0..n {
            for p in 0..=n {
                for q in p + 1..=n {
                    f.clauses.push(vec![lit(-v(p, h)), lit(-v(q, h))]);
                }
            }
        }
        f
    }

    #[test]
    fn pigeonhole_is_unsat() {
        assert_eq!(solve(&pigeonhole(6), &SolveLimits::none()).unwrap(), SatResult::Unsat);
    }

    #[test]
    fn conflict_limit_is_not_unsat() {
        let r = solve(&pigeonhole(9), &SolveLimits::conflicts(10));
        assert_eq!(r, Err(SolveError::LimitHit(Limit::Conflicts)));
    }

    #[test]
    fn assumptions_do_not_stick() {
        let mut s = Solver::default();
        s.reserve_vars(2);
        s.add_clause(&[lit(1), lit(2)]);
        let r = s.solve_with(&[lit(-1), lit(-2)], &SolveLimits::none()).unwrap();
        assert_eq!(r, SatResult::Unsat);
        let r = s.solve_with(&[lit(-1)], &SolveLimits::none()).unwrap();
        assert!(r.model().unwrap().lit(lit(2)));
        s.add_clause(&[lit(-2)]);
        let r = s.solve(&SolveLimits::none()).unwrap();
        assert!(r.model().unwrap().lit(lit(1)));
    }

    #[test]
    fn same_seed_same_model() {
        let f = cnf(4, &[&[1, 2, 3], &[-1, 4], &[-2, -4], &[3, 4]]);
        let a = Solver::from_cnf(&f, SolverConfig { seed: 5, ..Default::default() }).solve(&SolveLimits::none());
        let b = Solver::from_cnf(&f, SolverConfig { seed: 5, ..Default::default() }).solve(&SolveLimits::none());
        assert_eq!(a, b);
    }

    #[test]
    fn portfolio_agrees() {
        assert_eq!(
            solve_portfolio(&pigeonhole(5), &[1, 2, 3], &SolveLimits::none()).unwrap(),
            SatResult::Unsat
        );
        let f = cnf(2, &[&[1, 2], &[-1]]);
        assert!(solve_portfolio(&f, &[1, 2], &SolveLimits::none()).unwrap().is_sat());
    }
}
