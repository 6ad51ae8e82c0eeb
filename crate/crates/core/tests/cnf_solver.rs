use holl::cnf::{solve, tseitin, Cnf, Lit, SatResult, SolveLimits, Solver, SolverConfig, Var};
use holl::netlist::random::{random_netlist, RandomSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_3cnf(rng: &mut ChaCha8Rng, vars: u32, clauses: usize) -> Cnf {
    let mut f = Cnf::new();
    for _ in 0..vars {
        f.new_var();
    }
    for _ in 0..clauses {
        let c: Vec<Lit> = (0..3)
            .map(|_| Lit::new(Var(rng.random_range(0..vars)), rng.random_bool(0.5)))
            .collect();
        f.add_clause(c);
    }
    f
}

fn brute_force(f: &Cnf) -> bool {
    (0u64..1 << f.num_vars).any(|m| {
        f.clauses.iter().all(|c| {
            c.iter()
                .any(|l| ((m >> l.var().0) & 1 == 1) != l.is_neg())
        })
    })
}

#[test]
fn random_3cnf_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut sat = 0;
    for k in 0..200 {
        let vars = rng.random_range(3..=16);
        // Around the 4.26 ratio so both verdicts show up.
        let clauses = (vars as f64 * rng.random_range(3.0..5.5)) as usize;
        let f = random_3cnf(&mut rng, vars, clauses);
        let r = solve(&f, &SolveLimits::none()).unwrap();
        assert_eq!(r.is_sat(), brute_force(&f), "instance {k}");
        if let SatResult::Sat(m) = &r {
            assert!(f.satisfied_by(m));
            sat += 1;
        }
    }
    assert!(sat > 20 && sat < 180, "unbalanced sample: {sat} SAT");
}

#[test]
fn incremental_solving_matches_fresh_solving() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..40 {
        let f = random_3cnf(&mut rng, 14, 50);
        let mut s = Solver::new(SolverConfig::default());
        s.reserve_vars(f.num_vars);
        let mut prefix = Cnf {
            num_vars: f.num_vars,
            clauses: Vec::new(),
        };
        for chunk in f.clauses.chunks(10) {
            for c in chunk {
                s.add_clause(c);
                prefix.clauses.push(c.clone());
            }
            let a = Lit::new(Var(rng.random_range(0..14)), rng.random_bool(0.5));
            let got = s.solve_with(&[a], &SolveLimits::none()).unwrap().is_sat();
            let mut with_a = prefix.clone();
            with_a.clauses.push(vec![a]);
            assert_eq!(got, brute_force(&with_a));
            assert_eq!(s.solve(&SolveLimits::none()).unwrap().is_sat(), brute_force(&prefix));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn tseitin_is_equisatisfiable(seed in any::<u64>(), out_value in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = RandomSpec { inputs: 8, outputs: 1, gates: 20, max_fanin: 3 };
        let net = random_netlist(&mut rng, spec);
        let out = net.outputs()[0];
        let reachable = (0u64..256).any(|p| {
            let x: Vec<bool> = (0..8).map(|i| (p >> (7 - i)) & 1 == 1).collect();
            net.eval(&x).unwrap()[0] == out_value
        });
        let enc = tseitin(&net, Some((out, out_value)));
        let r = solve(&enc.cnf, &SolveLimits::none()).unwrap();
        prop_assert_eq!(r.is_sat(), reachable);
        if let SatResult::Sat(m) = r {
            let x = enc.inputs_of(&net, &m);
            prop_assert_eq!(net.eval(&x).unwrap()[0], out_value);
        }
    }

    #[test]
    fn fixed_seed_is_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_3cnf(&mut rng, 20, 80);
        let cfg = SolverConfig { seed, ..SolverConfig::default() };
        let a = Solver::from_cnf(&f, cfg).solve(&SolveLimits::none()).unwrap();
        let b = Solver::from_cnf(&f, cfg).solve(&SolveLimits::none()).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn larger_instances_agree_across_seeds() {
    // Big enough to exercise restarts and learnt-clause deletion.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..12 {
        let f = random_3cnf(&mut rng, 150, 639);
        let verdicts: Vec<bool> = [1u64, 2, 3]
            .iter()
            .map(|&seed| {
                let cfg = SolverConfig { seed, ..SolverConfig::default() };
                Solver::from_cnf(&f, cfg).solve(&SolveLimits::none()).unwrap().is_sat()
            })
            .collect();
        assert!(verdicts.iter().all(|&v| v == verdicts[0]));
    }
}
