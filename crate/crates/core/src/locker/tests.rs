use super::*;
use crate::keyrel::{inline_relation, parse_keyrel};
use crate::netlist::random::{random_netlist, RandomSpec};
use crate::netlist::{parse_bench, parse_locked_bench, TruthTable};

fn adder() -> Netlist {
    parse_bench(include_str!("../../fixtures/adder.bench")).unwrap()
}

fn names(net: &Netlist, ws: impl IntoIterator<Item = WireId>) -> Vec<String> {
    ws.into_iter().map(|w| net.wire_name(w).to_string()).collect()
}

fn small_budget() -> Budget {
    Budget {
        max_latent_terms: 5,
        max_relation_bits: 12,
        max_expr_nodes: 3,
    }
}

fn assert_sound(original: &Netlist, r: &LockResult) {
    let active = inline_relation(&r.locked, &r.psi).unwrap();
    assert_eq!(TruthTable::of(original).unwrap(), TruthTable::of(&active).unwrap());
    let Security::Secure { x, r: bits } = check_security(original, &r.locked, &SolveLimits::none()).unwrap() else {
        panic!("lock is trivial");
    };
    assert_ne!(r.locked.eval(&x, &bits).unwrap(), original.eval(&x).unwrap());
}

#[test]
fn candidate_set_of_the_adder() {
    let net = adder();
    let g = DepGraph::new(&net);
    let mut z = names(&net, candidate_set(&net, &g, (1, 3)));
    z.sort();
    assert_eq!(z, ["t0", "t1", "t2", "y0", "y1", "y2"]);
}

#[test]
fn rule_walkthrough_on_the_adder() {
    // First pick y2, two dependency picks, then the candidate farthest from
    // y2. The farthest one is y0 (distance 4), which the rules select.
    let net = adder();
    let g = DepGraph::new(&net);
    let cfg = SelectionConfig {
        depth: (1, 3),
        count: 4,
        seed: 253,
    };
    let picks = select_expressions(&net, &g, &cfg, &mut ChaCha8Rng::seed_from_u64(cfg.seed)).unwrap();
    assert_eq!(names(&net, picks.iter().map(|p| p.0)), ["y2", "t2", "t0", "y0"]);
    assert_eq!(
        picks.iter().map(|p| p.1).collect::<Vec<_>>(),
        [Rule::First, Rule::Dependency, Rule::Dependency, Rule::Farthest]
    );
}

#[test]
fn single_pick_and_bad_requests() {
    let net = adder();
    let g = DepGraph::new(&net);
    let one = SelectionConfig {
        depth: (1, 3),
        count: 1,
        seed: 9,
    };
    let p = select_expressions(&net, &g, &one, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(p.len(), 1);
    assert_eq!(p[0].1, Rule::First);
    for bad in [
        SelectionConfig { count: 7, ..one.clone() },
        SelectionConfig { depth: (5, 9), ..one.clone() },
        SelectionConfig { depth: (0, 2), ..one.clone() },
    ] {
        assert!(matches!(
            select_expressions(&net, &g, &bad, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(LockError::Selection(_))
        ));
    }
}

#[test]
fn farthest_rule_breaks_ties_by_wire_index() {
    // Two candidates at equal distance from the first pick.
    let net = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(p)\nOUTPUT(q)\nm = AND(a, b)\np = NOT(m)\nq = BUF(m)\n").unwrap();
    let g = DepGraph::new(&net);
    for seed in 0..20 {
        let cfg = SelectionConfig { depth: (1, 2), count: 2, seed };
        let picks = select_expressions(&net, &g, &cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        if net.wire_name(picks[0].0) == "m" && picks[1].1 == Rule::Farthest {
            assert_eq!(net.wire_name(picks[1].0), "p");
        }
    }
}

#[test]
fn locks_the_adder() {
    let net = adder();
    let cfg = LockConfig {
        selection: SelectionConfig {
            depth: (1, 3),
            count: 2,
            seed: 7,
        },
        ..LockConfig::default()
    };
    let r = lock(&net, &small_budget(), &cfg, &SolveLimits::none()).unwrap();
    assert_sound(&net, &r);
    assert_eq!(r.locked.locked_wires.len(), 2);
    assert!(r.psi.cost().latent_terms <= 5);
    let g = DepGraph::new(&net);
    for s in &r.selected {
        let d = g.depth(net.wire(s).unwrap());
        assert!((1..=3).contains(&d));
    }
}

#[test]
fn zero_budget_is_rejected() {
    let b = Budget {
        max_latent_terms: 0,
        ..small_budget()
    };
    assert!(matches!(
        lock(&adder(), &b, &LockConfig::default(), &SolveLimits::none()),
        Err(LockError::Budget(_))
    ));
}

#[test]
fn security_of_fixture_locks() {
    let net = adder();
    let locked = parse_locked_bench(include_str!("../../fixtures/adder_locked.bench")).unwrap();
    let Security::Secure { x, r } = check_security(&net, &locked, &SolveLimits::none()).unwrap() else {
        panic!("fixture lock must be secure");
    };
    assert_ne!(locked.eval(&x, &r).unwrap(), net.eval(&x).unwrap());
    let dead = parse_locked_bench(include_str!("../../fixtures/adder_dead_lock.bench")).unwrap();
    assert_eq!(check_security(&net, &dead, &SolveLimits::none()).unwrap(), Security::Trivial);
    let psi = parse_keyrel(include_str!("../../fixtures/adder.keyrel")).unwrap();
    assert_eq!(
        verify_lock(&net, &locked, &psi, &SolveLimits::none()).unwrap(),
        Verdict::Valid
    );
}

#[test]
fn out_of_order_increments_are_rejected() {
    let net = adder();
    let mut st = LockState::new(&net);
    let t0 = net.wire("t0").unwrap();
    let t1 = net.wire("t1").unwrap();
    let e = synthesize_increment(&mut st, &[t1, t0], &LockConfig::default(), &small_budget(), &SolveLimits::none());
    assert!(matches!(e, Err(LockError::Selection(_))));
}

#[test]
fn increments_reuse_committed_terms() {
    let net = adder();
    let t0 = net.wire("t0").unwrap();
    let t2 = net.wire("t2").unwrap();
    let cfg = LockConfig::default();
    let lim = SolveLimits::none();
    let mut both = LockState::new(&net);
    let steps = synthesize_increment(&mut both, &[t0, t2], &cfg, &small_budget(), &lim).unwrap();
    assert!(steps.iter().all(|s| s.result == "found"));
    let mut separate = 0;
    for t in [t0, t2] {
        let mut st = LockState::new(&net);
        synthesize_increment(&mut st, &[t], &cfg, &small_budget(), &lim).unwrap();
        separate += st.psi.cost().gate_count;
    }
    assert!(both.psi.cost().gate_count < separate, "{} vs {separate}", both.psi.cost().gate_count);
    assert_eq!(steps[1].latent_terms, 0);
    assert_eq!(
        verify_lock(&net, &both.locked, &both.psi, &lim).unwrap(),
        Verdict::Valid
    );
}

#[test]
fn slicing_and_full_synthesis_both_verify() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for k in 0..4 {
        let net = random_netlist(
            &mut rng,
            RandomSpec {
                inputs: 8,
                outputs: 2,
                gates: 16,
                max_fanin: 3,
            },
        );
        for backslice in [true, false] {
            let cfg = LockConfig {
                selection: SelectionConfig {
                    depth: (1, 3),
                    count: 2,
                    seed: k,
                },
                backslice,
                ..LockConfig::default()
            };
            let r = lock(&net, &small_budget(), &cfg, &SolveLimits::none()).unwrap();
            assert_sound(&net, &r);
        }
    }
}

#[test]
fn same_seed_same_lock() {
    let net = adder();
    let cfg = LockConfig {
        selection: SelectionConfig {
            depth: (1, 3),
            count: 3,
            seed: 3,
        },
        ..LockConfig::default()
    };
    let a = lock(&net, &small_budget(), &cfg, &SolveLimits::none()).unwrap();
    let b = lock(&net, &small_budget(), &cfg, &SolveLimits::none()).unwrap();
    assert_eq!(a.locked, b.locked);
    assert_eq!(a.psi, b.psi);
}

#[test]
fn prefix_avoids_clashes() {
    assert_eq!(bit_prefix(&adder()), "r");
    let net = parse_bench("INPUT(r0)\nOUTPUT(y)\ny = NOT(r0)\n").unwrap();
    assert_eq!(bit_prefix(&net), "rb");
}
