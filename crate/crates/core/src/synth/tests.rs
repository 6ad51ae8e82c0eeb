use super::*;
use crate::keyrel::{parse_keyrel, ExprNode, LatentOp};
use crate::netlist::{parse_bench, parse_locked_bench, TruthTable};

fn adder() -> Netlist {
    parse_bench(include_str!("../../fixtures/adder.bench")).unwrap()
}

fn unlocked_spec(net: &Netlist, targets: &[&str]) -> SynthSpec {
    SynthSpec::new(
        net.clone(),
        LockedCircuit::unlocked(net),
        KeyRelation::empty(),
        targets.iter().map(|t| t.to_string()).collect(),
    )
    .unwrap()
}

fn activated_equals(original: &Netlist, r: &SynthResult) -> bool {
    let active = inline_relation(&r.locked, &r.relation).unwrap();
    TruthTable::of(original).unwrap() == TruthTable::of(&active).unwrap()
}

fn found(run: CegisRun) -> SynthResult {
    match run.outcome {
        SynthOutcome::Found(r) => r,
        other => panic!("expected a result, got {other:?}"),
    }
}

#[test]
fn locks_t1_and_t2_of_the_adder() {
    let net = adder();
    let spec = unlocked_spec(&net, &["t1", "t2"]);
    let run = cegis_synthesize(&spec, &SynthConfig::default(), &SolveLimits::none()).unwrap();
    assert!(run.state.iterations as u32 <= 1 + 16);
    let r = found(run);
    assert!(activated_equals(&net, &r));
    assert_eq!(r.exprs.len(), 2);
    for e in &r.exprs {
        assert!(!e.bits().is_empty(), "{e}");
    }
    assert!(r.latent_terms() >= 1);
    let mut names = r.locked.locked_names();
    names.sort();
    assert_eq!(names, ["t1", "t2"]);
    assert_eq!(r.next_bit, r.delta.len());
}

#[test]
fn no_targets_is_trivial() {
    let net = adder();
    let r = found(cegis_synthesize(&unlocked_spec(&net, &[]), &SynthConfig::default(), &SolveLimits::none()).unwrap());
    assert!(r.delta.is_empty() && r.exprs.is_empty());
    assert_eq!(r.locked.circuit, net);
}

#[test]
fn empty_relation_space_is_infeasible() {
    let cfg = SynthConfig {
        stimulus_slots: 0,
        latent_slots: 0,
        ..SynthConfig::default()
    };
    let run = cegis_synthesize(&unlocked_spec(&adder(), &["t2"]), &cfg, &SolveLimits::none()).unwrap();
    assert_eq!(run.outcome, SynthOutcome::Infeasible);
}

#[test]
fn verify_fixture_locks() {
    let net = adder();
    let locked = parse_locked_bench(include_str!("../../fixtures/adder_locked.bench")).unwrap();
    let good = parse_keyrel(include_str!("../../fixtures/adder.keyrel")).unwrap();
    let bad = parse_keyrel(include_str!("../../fixtures/adder_generated.keyrel")).unwrap();
    let lim = SolveLimits::none();
    assert_eq!(verify_lock(&net, &locked, &good, &lim).unwrap(), Verdict::Valid);
    let Verdict::Counterexample(x) = verify_lock(&net, &locked, &bad, &lim).unwrap() else {
        panic!("generated relation must fail");
    };
    let active = inline_relation(&locked, &bad).unwrap();
    assert_ne!(active.eval(&x).unwrap(), net.eval(&x).unwrap());
}

#[test]
fn verify_candidate_with_fixture_expressions() {
    // The fixture lock, written as locked expressions over the unlocked adder.
    let net = adder();
    let spec = unlocked_spec(&net, &["t1", "t2"]);
    let w = |s: &str| Operand::Wire(s.into());
    let b = |s: &str| Operand::Bit(s.into());
    let node = |op, args| ExprNode { op: Some(op), args };
    let t1 = LockedExpr {
        target: "t1".into(),
        nodes: vec![
            node(LatentOp::Xor, vec![b("r4"), b("r2")]),
            node(LatentOp::And, vec![w("x0"), Operand::Node(0)]),
            node(LatentOp::And, vec![Operand::Node(1), w("x3")]),
        ],
    };
    let t2 = LockedExpr {
        target: "t2".into(),
        nodes: vec![node(LatentOp::And, vec![w("x0"), b("r3")])],
    };
    let good = parse_keyrel(include_str!("../../fixtures/adder.keyrel")).unwrap();
    let bad = parse_keyrel(include_str!("../../fixtures/adder_generated.keyrel")).unwrap();
    let lim = SolveLimits::none();
    let exprs = [t1, t2];
    assert_eq!(verify_candidate(&spec, &good, &exprs, &lim).unwrap(), Verdict::Valid);
    assert!(matches!(
        verify_candidate(&spec, &bad, &exprs, &lim).unwrap(),
        Verdict::Counterexample(_)
    ));
    assert_eq!(
        verify_candidate(&unlocked_spec(&net, &[]), &KeyRelation::empty(), &[], &lim).unwrap(),
        Verdict::Valid
    );
}

#[test]
fn slice_of_t2_is_two_gates() {
    let spec = unlocked_spec(&adder(), &["t2"]).sliced().unwrap();
    assert_eq!(spec.original.gates().len(), 2);
    assert_eq!(spec.original.input_names().collect::<Vec<_>>(), ["x2", "x1", "x0"]);
    assert_eq!(spec.locked.circuit, spec.original);
    let r = found(cegis_synthesize(&spec, &SynthConfig::default(), &SolveLimits::none()).unwrap());
    assert!(activated_equals(&spec.original, &r));
}

#[test]
fn sliced_cnf_is_smaller() {
    let full = unlocked_spec(&adder(), &["t0"]);
    let sliced = full.sliced().unwrap();
    let cfg = SynthConfig::default();
    let xs: Vec<Vec<bool>> = (0..16u32).map(|p| (0..4).map(|i| p >> (3 - i) & 1 == 1).collect()).collect();
    let a = inductive_cnf(&full, &cfg, &xs).unwrap().unwrap();
    let sx: Vec<Vec<bool>> = xs
        .iter()
        .map(|x| {
            let names: Vec<&str> = full.original.input_names().collect();
            sliced
                .original
                .input_names()
                .map(|n| x[names.iter().position(|m| *m == n).unwrap()])
                .collect()
        })
        .collect();
    let b = inductive_cnf(&sliced, &cfg, &sx).unwrap().unwrap();
    assert!(b.num_clauses() < a.num_clauses(), "{} vs {}", b.num_clauses(), a.num_clauses());
}

/// Outputs that only a relation can provide: each output must be a copy of
/// one relation bit, so the relation has to compute `(x1 & x2) | x0` and
/// `(x1 & x2) & x0` itself.
fn shared_subterm_spec() -> SynthSpec {
    let net = parse_bench(
        "INPUT(x0)\nINPUT(x1)\nINPUT(x2)\nOUTPUT(y3)\nOUTPUT(y4)\n\
         a = AND(x1, x2)\ny3 = OR(a, x0)\ny4 = AND(a, x0)\n",
    )
    .unwrap();
    unlocked_spec(&net, &["y3", "y4"])
}

fn copy_only(latent_slots: usize) -> SynthConfig {
    SynthConfig {
        expr_grammar: Grammar::new([LatentOp::Copy]),
        expr_nodes: 1,
        cone_levels: 0,
        latent_slots,
        ..SynthConfig::default()
    }
}

#[test]
fn minimization_finds_the_shared_form() {
    let spec = shared_subterm_spec();
    let lim = SolveLimits::none();
    // Four latent terms allow the unshared form.
    let start = found(cegis_synthesize(&spec, &copy_only(4), &lim).unwrap());
    assert!(start.latent_terms() <= 4);
    let m = minimize_budget(&spec, &copy_only(4), start, &lim).unwrap();
    assert_eq!(m.best.latent_terms(), 3);
    assert_eq!(m.best.relation.cost().gate_count, 3);
    assert!(activated_equals(&spec.original, &m.best));
    assert_eq!(m.probes.last().unwrap().result, "infeasible");
    assert_eq!(cegis_synthesize(&spec, &copy_only(2), &lim).unwrap().outcome, SynthOutcome::Infeasible);
}

#[test]
fn minimal_budget_for_t2() {
    // Smallest latent count that admits a lock of t2 alone.
    let spec = unlocked_spec(&adder(), &["t2"]);
    let lim = SolveLimits::none();
    let first = (0..=4)
        .find(|&l| {
            let cfg = SynthConfig {
                latent_slots: l,
                ..SynthConfig::default()
            };
            matches!(cegis_synthesize(&spec, &cfg, &lim).unwrap().outcome, SynthOutcome::Found(_))
        })
        .unwrap();
    assert_eq!(first, 1);
}

#[test]
fn log_lines_are_json() {
    let run = cegis_synthesize(&unlocked_spec(&adder(), &["t2"]), &SynthConfig::default(), &SolveLimits::none()).unwrap();
    let mut buf = Vec::new();
    write_log(&run.events, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["phase"] == "inductive" || v["phase"] == "verify");
    }
    assert_eq!(text.lines().last().map(|l| l.contains("\"valid\"")), Some(true));
}

#[test]
fn conflict_limit_is_not_infeasible() {
    let spec = unlocked_spec(&adder(), &["t1", "t2", "y1"]);
    let run = cegis_synthesize(&spec, &SynthConfig::default(), &SolveLimits::conflicts(0)).unwrap();
    assert!(matches!(
        run.outcome,
        SynthOutcome::LimitHit(Limit::Conflicts) | SynthOutcome::Found(_)
    ));
}

#[test]
fn same_seed_same_result() {
    let spec = unlocked_spec(&adder(), &["t1", "t2"]);
    let a = found(cegis_synthesize(&spec, &SynthConfig::default(), &SolveLimits::none()).unwrap());
    let b = found(cegis_synthesize(&spec, &SynthConfig::default(), &SolveLimits::none()).unwrap());
    assert_eq!(a, b);
}
