#![allow(dead_code)]

use std::time::{Duration, Instant};

use holl::cnf::SolveLimits;
use holl::keyrel::{inline_relation, parse_keyrel, Budget, KeyRelation};
use holl::locker::{lock, LockConfig, LockResult, SelectionConfig};
use holl::netlist::random::{random_netlist, RandomSpec};
use holl::netlist::{parse_bench, parse_locked_bench, LockedCircuit, Netlist, TruthTable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const ADDER: &str = include_str!("../../fixtures/adder.bench");
pub const ADDER_LOCKED: &str = include_str!("../../fixtures/adder_locked.bench");
pub const ADDER_KEY: &str = include_str!("../../fixtures/adder.keyrel");
pub const ADDER_GENERATED_KEY: &str = include_str!("../../fixtures/adder_generated.keyrel");
pub const ADDER_DEAD_LOCK: &str = include_str!("../../fixtures/adder_dead_lock.bench");

pub fn adder() -> Netlist {
    parse_bench(ADDER).unwrap()
}

pub fn adder_locked() -> LockedCircuit {
    parse_locked_bench(ADDER_LOCKED).unwrap()
}

pub fn adder_key() -> KeyRelation {
    parse_keyrel(ADDER_KEY).unwrap()
}

/// Input vector `p` with the first input as the most significant bit.
pub fn pattern(n: usize, p: u64) -> Vec<bool> {
    (0..n).map(|i| (p >> (n - 1 - i)) & 1 == 1).collect()
}

pub fn deadline(secs: u64) -> SolveLimits {
    SolveLimits {
        deadline: Some(Instant::now() + Duration::from_secs(secs)),
        ..SolveLimits::none()
    }
}

/// Exhaustive comparison of `locked` activated by `psi` with `original`.
pub fn activates_to(original: &Netlist, locked: &LockedCircuit, psi: &KeyRelation) -> bool {
    let active = inline_relation(locked, psi).unwrap();
    TruthTable::of(original).unwrap().first_difference(&TruthTable::of(&active).unwrap()).is_none()
}

/// Shape of the random circuits used for lock and attack runs.
#[derive(Debug, Clone, Copy)]
pub struct RandomLock {
    pub inputs: usize,
    pub outputs: usize,
    pub gates: usize,
    pub budget: Budget,
    pub count: usize,
}

impl RandomLock {
    /// Circuits small enough for the attack to finish in seconds.
    pub fn attackable() -> RandomLock {
        RandomLock {
            inputs: 6,
            outputs: 3,
            gates: 20,
            budget: Budget {
                max_latent_terms: 2,
                max_relation_bits: 12,
                max_expr_nodes: 3,
            },
            count: 2,
        }
    }

    pub fn circuit(&self, seed: u64) -> Netlist {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_netlist(
            &mut rng,
            RandomSpec {
                inputs: self.inputs,
                outputs: self.outputs,
                gates: self.gates,
                max_fanin: 3,
            },
        )
    }

    /// Locks circuit `seed`; `None` when the locker gives up on it.
    pub fn lock(&self, seed: u64) -> Option<(Netlist, LockResult)> {
        let net = self.circuit(seed);
        let cfg = LockConfig {
            selection: SelectionConfig {
                depth: (1, 3),
                count: self.count,
                seed,
            },
            ..LockConfig::default()
        };
        let r = lock(&net, &self.budget, &cfg, &deadline(30)).ok()?;
        Some((net, r))
    }
}
