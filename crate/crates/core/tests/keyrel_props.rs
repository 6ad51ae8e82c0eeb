use holl::cnf::{Encoder, Lit, SatResult, SolveLimits, Solver, SolverConfig};
use holl::keyrel::{
    emit_keyrel, parse_keyrel, to_sop, Grammar, KeyRelation, LatentOp, RelationSketch, Source, Term, TermKind,
    DEFAULT_SUPPORT_LIMIT,
};
use proptest::prelude::*;

const XS: [&str; 4] = ["x0", "x1", "x2", "x3"];

/// Per term: a kind selector and two operand picks. The first term is
/// always a stimulus so latent terms have something to read.
fn relation() -> impl Strategy<Value = KeyRelation> {
    prop::collection::vec((0u8..10, 0usize..64, 0usize..64), 1..10).prop_map(|raw| {
        let mut terms = Vec::new();
        for (i, (kind, a, b)) in raw.into_iter().enumerate() {
            let bit = format!("r{i}");
            let t = match kind {
                _ if i == 0 || kind < 3 => Term::input(bit, XS[a % XS.len()]),
                3 => Term::constant(bit, a % 2 == 1),
                k => {
                    let op = LatentOp::ALL[(k as usize - 4) % LatentOp::ALL.len()];
                    let mut args = vec![format!("r{}", a % i)];
                    if op.arity() == 2 {
                        args.push(format!("r{}", b % i));
                    }
                    Term::latent(bit, op, args)
                }
            };
            terms.push(t);
        }
        KeyRelation::new(terms).unwrap()
    })
}

/// The same relation with each input stimulus reading its own input, named
/// after the bit, so every support point is reachable.
fn independent_leaves(psi: &KeyRelation) -> KeyRelation {
    let terms = psi
        .terms()
        .iter()
        .map(|t| match &t.kind {
            TermKind::Stimulus(Source::Input(_)) => Term::input(t.bit.clone(), t.bit.clone()),
            _ => t.clone(),
        })
        .collect();
    KeyRelation::new(terms).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn text_round_trip(psi in relation()) {
        let text = emit_keyrel(&psi);
        prop_assert_eq!(parse_keyrel(&text).unwrap(), psi);
    }

    #[test]
    fn sop_matches_evaluation(psi in relation()) {
        let psi = independent_leaves(&psi);
        let table = to_sop(&psi, DEFAULT_SUPPORT_LIMIT).unwrap();
        for e in &table.entries {
            let n = e.support.len();
            for m in 0..1u64 << n {
                let bit_of = |s: &str| {
                    e.support.iter().position(|x| x == s).map(|i| (m >> (n - 1 - i)) & 1 == 1)
                };
                let vals = psi.eval_with(|s| Some(bit_of(s).unwrap_or(false))).unwrap();
                let v = vals[psi.position(&e.bit).unwrap()];
                prop_assert_eq!(v, e.minterms.contains(&m), "bit {} at {}", e.bit, e.cube(m));
            }
        }
    }

    #[test]
    fn decoded_sketch_fits_its_slots(
        stim in 0usize..4,
        lat in 0usize..4,
        seed in any::<u64>(),
        picks in prop::collection::vec(any::<(u8, bool)>(), 0..4),
    ) {
        let xs: Vec<String> = XS[..3].iter().map(|s| s.to_string()).collect();
        let stim_names: Vec<String> = (0..stim).map(|i| format!("s{i}")).collect();
        let lat_names: Vec<String> = (0..lat).map(|i| format!("l{i}")).collect();
        let mut enc = Encoder::new(false);
        let sk = RelationSketch::build(&mut enc, &Grammar::default(), &xs, &[], &stim_names, &lat_names);
        // Sketch outputs on all eight input patterns, read back from the model.
        let mut outs: Vec<Vec<Lit>> = Vec::new();
        for p in 0..8u32 {
            let src: Vec<Lit> = (0..3).map(|i| enc.constant((p >> (2 - i)) & 1 == 1)).collect();
            outs.push(sk.eval(&mut enc, &src, &[]));
        }
        let mut assume = Vec::new();
        for (k, on) in picks {
            let k = k as usize;
            if lat > 0 && k.is_multiple_of(2) {
                assume.push(sk.slot_used(k / 2 % lat).with(on));
            } else if stim > 0 {
                let sel = sk.stimulus_selectors(k % stim);
                assume.push(sel[k / 3 % sel.len()].with(on));
            }
        }
        let mut solver = Solver::from_cnf(enc.cnf(), SolverConfig { seed, ..SolverConfig::default() });
        let SatResult::Sat(model) = solver.solve_with(&assume, &SolveLimits::none()).unwrap() else {
            return Ok(());
        };
        let terms = sk.decode(&model).unwrap();
        let psi = KeyRelation::new(terms).unwrap();
        let cost = psi.cost();
        prop_assert!(cost.latent_terms <= lat);
        // An unused latent slot decodes to CONST(0), which is not latent.
        prop_assert_eq!(cost.relation_bits, stim + lat);
        for (p, lits) in outs.iter().enumerate() {
            let x: Vec<bool> = (0..3).map(|i| (p >> (2 - i)) & 1 == 1).collect();
            let want = psi.eval(&xs, &x).unwrap();
            let got: Vec<bool> = lits.iter().map(|&l| model.lit(l)).collect();
            prop_assert_eq!(got, want, "pattern {}", p);
        }
    }
}
