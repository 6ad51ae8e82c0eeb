//! `holl`: lock, attack, verify, simulate and export combinational netlists.
//!
//! Exit codes: 0 ok, 1 verification or security failure, 2 usage or input
//! error, 3 resource limit, 4 oracle protocol violation.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use holl::attacker::{
    naive_sample_attack, resilience_report, synth_attack, verify_recovered, AttackError, AttackOutcome, AttackerConfig,
    CommandOracle, NetlistOracle, Oracle, OracleError, Recovery,
};
use holl::cnf::{parse_dimacs, solve_external, solve_portfolio, Limit, SatResult, SolveError, SolveLimits};
use holl::keyrel::{emit_keyrel, emit_pla, inline_relation, parse_keyrel_with, to_sop, Budget, Grammar, KeyRelError, KeyRelation, LatentOp};
use holl::locker::{check_security, lock, LockConfig, LockError, SelectionConfig, Security};
use holl::netlist::{emit_locked_bench, format_vector, parse_bench, parse_locked_bench, parse_vector, LockedCircuit, Netlist};
use holl::synth::{verify_lock, SynthError, Verdict};

const SCHEMA: u32 = 1;

#[derive(Debug, Parser, Serialize)]
#[command(name = "holl", version, about = "Higher-order logic locking toolkit")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    #[serde(skip)]
    verbose: u8,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Cmd {
    /// Lock a netlist with a synthesized key relation.
    Lock(LockArgs),
    /// Recover a key relation from a locked netlist and an oracle.
    Attack(AttackArgs),
    /// Check a locked netlist and key relation against the original.
    Verify(VerifyArgs),
    /// Simulate a netlist on input vectors (from arguments or stdin).
    Sim(SimArgs),
    /// Write the latent bits of a key relation as sum-of-products tables.
    ExportSop(ExportArgs),
    /// Decide a DIMACS CNF file.
    Solve(SolveArgs),
}

#[derive(Debug, Args, Serialize, Clone)]
struct LimitArgs {
    /// Wall-clock limit for the whole command, e.g. `20min`, `500ms`.
    #[arg(long, value_parser = humantime::parse_duration)]
    #[serde(serialize_with = "ser_duration")]
    time_limit: Option<Duration>,
    /// Conflict limit per solver call.
    #[arg(long)]
    conflicts: Option<u64>,
}

fn ser_duration<S: serde::Serializer>(d: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
    match d {
        Some(d) => s.serialize_str(&humantime::format_duration(*d).to_string()),
        None => s.serialize_none(),
    }
}

impl LimitArgs {
    fn limits(&self, start: Instant) -> SolveLimits {
        SolveLimits {
            conflicts: self.conflicts,
            deadline: self.time_limit.map(|d| start + d),
            stop: None,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct LockArgs {
    input: PathBuf,
    /// Maximum latent terms in the key relation.
    #[arg(long, default_value_t = 12)]
    latent_max: usize,
    #[arg(long, default_value_t = 32)]
    relation_bits_max: usize,
    /// Maximum nodes per locked expression.
    #[arg(long, default_value_t = 4)]
    expr_nodes_max: usize,
    /// Depth range of candidate expressions, `lo:hi`.
    #[arg(long, default_value = "2:4", value_parser = parse_depth)]
    depth: (u32, u32),
    /// Number of expressions to lock.
    #[arg(long, default_value_t = 2)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    stimulus_per_expr: usize,
    #[arg(long, default_value_t = 2)]
    latent_per_expr: usize,
    /// Synthesize all expressions in one call.
    #[arg(long)]
    monolithic: bool,
    /// Synthesize on the whole circuit instead of the backslice.
    #[arg(long)]
    no_backslice: bool,
    /// Keep the first relation found instead of shrinking it.
    #[arg(long)]
    no_minimize: bool,
    #[arg(long, default_value_t = 8)]
    retries: usize,
    #[command(flatten)]
    limits: LimitArgs,
    /// Output prefix; defaults to the input path with `.locked`.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct AttackArgs {
    locked: PathBuf,
    /// `bench:PATH` for an activated netlist, `cmd:COMMAND` for a process
    /// answering one vector per line.
    #[arg(long)]
    oracle: String,
    /// Guessed relation grammar, comma separated.
    #[arg(long, default_value = "and,or,xor,not,copy", value_parser = parse_grammar)]
    #[serde(serialize_with = "ser_grammar")]
    grammar: Grammar,
    #[arg(long, default_value_t = 4)]
    stimulus_slots: usize,
    #[arg(long, default_value_t = 12)]
    latent_slots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fit the relation to these input vectors only, without the
    /// distinguishing-input loop.
    #[arg(long, num_args = 1.., value_name = "VECTOR")]
    naive: Option<Vec<String>>,
    #[command(flatten)]
    limits: LimitArgs,
    /// Output prefix; defaults to the locked path with `.attack`.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct VerifyArgs {
    original: PathBuf,
    locked: PathBuf,
    keyrel: PathBuf,
    /// Value used for `RAND` stimuli.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    rand: u8,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Debug, Args, Serialize)]
struct SimArgs {
    bench: PathBuf,
    /// Activate a locked netlist with this key relation first.
    #[arg(long)]
    keyrel: Option<PathBuf>,
    /// Input vectors, first declared input leftmost. Read from stdin when
    /// absent.
    vectors: Vec<String>,
}

#[derive(Debug, Args, Serialize)]
struct ExportArgs {
    keyrel: PathBuf,
    #[arg(long, default_value_t = holl::keyrel::DEFAULT_SUPPORT_LIMIT)]
    support_limit: usize,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct SolveArgs {
    cnf: PathBuf,
    /// Run an external DIMACS solver instead: `COMMAND <file>`.
    #[arg(long)]
    external: Option<String>,
    /// Number of differently seeded solvers racing on the formula.
    #[arg(long, default_value_t = 1)]
    portfolio: u64,
    #[command(flatten)]
    limits: LimitArgs,
}

fn parse_depth(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi = b.trim().parse().map_err(|e| format!("{e}"))?;
    if lo > hi {
        return Err("lo must not exceed hi".into());
    }
    Ok((lo, hi))
}

fn parse_grammar(s: &str) -> Result<Grammar, String> {
    let ops = s
        .split(',')
        .map(|t| LatentOp::from_name(t.trim()).ok_or_else(|| format!("unknown operator `{t}`")))
        .collect::<Result<Vec<_>, _>>()?;
    if ops.is_empty() {
        return Err("empty grammar".into());
    }
    Ok(Grammar::new(ops))
}

fn ser_grammar<S: serde::Serializer>(g: &Grammar, s: S) -> Result<S::Ok, S::Error> {
    let names: Vec<&str> = g.ops.iter().map(|o| o.name()).collect();
    s.serialize_str(&names.join(","))
}

/// A failed command: exit code plus a short machine-readable kind.
#[derive(Debug)]
struct Failure {
    code: u8,
    kind: &'static str,
    msg: String,
}

impl Failure {
    fn new(code: u8, kind: &'static str, msg: impl Into<String>) -> Failure {
        Failure {
            code,
            kind,
            msg: msg.into(),
        }
    }

    fn input(msg: impl std::fmt::Display) -> Failure {
        Failure::new(2, "input", msg.to_string())
    }

    fn limit(l: Limit) -> Failure {
        Failure::new(3, "limit", format!("resource limit reached ({l:?})"))
    }
}

type Run = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(2, "io", format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::new(2, "io", format!("{}: {e}", path.display())))
}

fn parse_net(path: &Path) -> Result<Netlist, Failure> {
    parse_bench(&read(path)?).map_err(|e| Failure::new(2, "parse", format!("{}: {e}", path.display())))
}

fn parse_locked(path: &Path) -> Result<LockedCircuit, Failure> {
    parse_locked_bench(&read(path)?).map_err(|e| Failure::new(2, "parse", format!("{}: {e}", path.display())))
}

fn parse_psi(path: &Path, rand: bool) -> Result<KeyRelation, Failure> {
    parse_keyrel_with(&read(path)?, rand).map_err(|e| Failure::new(2, "parse", format!("{}: {e}", path.display())))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn default_prefix(input: &Path, tag: &str) -> PathBuf {
    with_suffix(&input.with_extension(""), tag)
}

/// The invocation as recorded in every artifact.
fn run_config(cli: &Cli) -> serde_json::Value {
    json!({
        "tool": "holl",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command,
    })
}

fn header(run: &serde_json::Value) -> String {
    format!("# run: {run}\n")
}

fn synth_failure(e: SynthError) -> Failure {
    match e {
        SynthError::Limit(l) => Failure::limit(l),
        e => Failure::new(1, "synthesis", e.to_string()),
    }
}

fn cmd_lock(a: &LockArgs, run: &serde_json::Value) -> Run {
    let start = Instant::now();
    let net = parse_net(&a.input)?;
    let budget = Budget {
        max_latent_terms: a.latent_max,
        max_relation_bits: a.relation_bits_max,
        max_expr_nodes: a.expr_nodes_max,
    };
    budget.validate().map_err(|e| Failure::new(2, "budget", e.to_string()))?;
    let cfg = LockConfig {
        selection: SelectionConfig {
            depth: a.depth,
            count: a.count,
            seed: a.seed,
        },
        stimulus_per_expr: a.stimulus_per_expr,
        latent_per_expr: a.latent_per_expr,
        incremental: !a.monolithic,
        backslice: !a.no_backslice,
        minimize: !a.no_minimize,
        max_retries: a.retries,
        ..LockConfig::default()
    };
    let r = lock(&net, &budget, &cfg, &a.limits.limits(start)).map_err(|e| match e {
        LockError::Budget(e) => Failure::new(2, "budget", e.to_string()),
        LockError::Selection(m) => Failure::new(2, "selection", m),
        LockError::Timeout { .. } => Failure::new(3, "timeout", e.to_string()),
        LockError::Synth(e) => synth_failure(e),
        LockError::Exhausted { .. } => Failure::new(1, "security-fail", e.to_string()),
    })?;
    let prefix = a.out.clone().unwrap_or_else(|| default_prefix(&a.input, ".locked"));
    let h = header(run);
    write(&with_suffix(&prefix, ".bench"), &(h.clone() + &emit_locked_bench(&r.locked)))?;
    write(&with_suffix(&prefix, ".keyrel"), &(h + &emit_keyrel(&r.psi)))?;
    let stats = json!({
        "schema": SCHEMA,
        "run": run,
        "selected": r.selected,
        "budget": budget,
        "stats": r.stats,
        "verified": true,
        "secure": true,
    });
    write(&with_suffix(&prefix, ".stats.json"), &(serde_json::to_string_pretty(&stats).unwrap() + "\n"))?;
    println!("locked {} -> {}", r.selected.join(" "), with_suffix(&prefix, ".bench").display());
    println!("CORRECT");
    println!("SECURE");
    Ok(())
}

enum OracleKind {
    Bench(Netlist),
    Command(String),
}

fn parse_oracle(spec: &str) -> Result<OracleKind, Failure> {
    if let Some(p) = spec.strip_prefix("bench:") {
        Ok(OracleKind::Bench(parse_net(Path::new(p))?))
    } else if let Some(c) = spec.strip_prefix("cmd:") {
        Ok(OracleKind::Command(c.to_string()))
    } else {
        Err(Failure::input(format!("oracle must be bench:PATH or cmd:COMMAND, got `{spec}`")))
    }
}

fn attack_failure(e: AttackError) -> Failure {
    match e {
        AttackError::Oracle(OracleError::Arity { .. }) | AttackError::Spec(_) => Failure::input(e),
        AttackError::Oracle(e) => Failure::new(4, "oracle-protocol", e.to_string()),
        AttackError::Limit(l) => Failure::limit(l),
        e => Failure::new(1, "attack", e.to_string()),
    }
}

fn cmd_attack(a: &AttackArgs, run: &serde_json::Value) -> Run {
    let start = Instant::now();
    let locked = parse_locked(&a.locked)?;
    let kind = parse_oracle(&a.oracle)?;
    let (xi, yo) = (locked.x_inputs().len(), locked.circuit.outputs().len());
    let mut oracle: Box<dyn Oracle> = match &kind {
        OracleKind::Bench(n) => Box::new(NetlistOracle::new(n.clone())),
        OracleKind::Command(c) => Box::new(
            CommandOracle::spawn(c, xi, yo).map_err(|e| Failure::new(4, "oracle-protocol", e.to_string()))?,
        ),
    };
    let reference = match &kind {
        OracleKind::Bench(n) => Some(n),
        OracleKind::Command(_) => None,
    };
    let cfg = AttackerConfig {
        grammar: a.grammar.clone(),
        stimulus_slots: a.stimulus_slots,
        latent_slots: a.latent_slots,
        seed: a.seed,
    };
    let limits = a.limits.limits(start);
    let prefix = a.out.clone().unwrap_or_else(|| default_prefix(&a.locked, ".attack"));
    let h = header(run);

    if let Some(vs) = &a.naive {
        let samples = vs
            .iter()
            .map(|v| parse_vector(v).map_err(Failure::input))
            .collect::<Result<Vec<_>, _>>()?;
        let fit = naive_sample_attack(&locked, oracle.as_mut(), &samples, &cfg, &limits).map_err(attack_failure)?;
        let Some(psi) = fit else {
            println!("INFEASIBLE");
            return Err(Failure::new(1, "infeasible", "no relation in the guessed space fits the samples"));
        };
        write(&with_suffix(&prefix, ".keyrel"), &(h + &emit_keyrel(&psi)))?;
        let rec = verify_recovered(&locked, &psi, oracle.as_mut(), reference, a.seed, &limits).map_err(attack_failure)?;
        return report_recovery(&rec);
    }

    let out = synth_attack(&locked, oracle.as_mut(), &cfg, &limits).map_err(attack_failure)?;
    let rep = resilience_report(&out.trace);
    let mut csv = Vec::new();
    rep.write_csv(&mut csv).unwrap();
    write(&with_suffix(&prefix, ".trace.csv"), &String::from_utf8(csv).unwrap())?;
    let mut jl = Vec::new();
    rep.write_jsonl(&mut jl).unwrap();
    write(&with_suffix(&prefix, ".trace.jsonl"), &String::from_utf8(jl).unwrap())?;
    let mut recovery = None;
    let result = match out.trace.outcome {
        AttackOutcome::LimitHit(l) => Err(Failure::limit(l)),
        AttackOutcome::Infeasible => Err(Failure::new(1, "infeasible", "no relation in the guessed space fits the oracle")),
        AttackOutcome::Recovered => {
            let psi = out.psi.as_ref().expect("recovered relation");
            write(&with_suffix(&prefix, ".keyrel"), &(h + &emit_keyrel(psi)))?;
            match verify_recovered(&locked, psi, oracle.as_mut(), reference, a.seed, &limits) {
                Ok(r) => {
                    let res = report_recovery(&r);
                    recovery = Some(r);
                    res
                }
                Err(e) => Err(attack_failure(e)),
            }
        }
    };
    let stats = json!({
        "schema": SCHEMA,
        "run": run,
        "outcome": out.trace.outcome.label(),
        "queries": oracle.queries(),
        "recovery": recovery,
        "report": rep,
    });
    write(&with_suffix(&prefix, ".stats.json"), &(serde_json::to_string_pretty(&stats).unwrap() + "\n"))?;
    println!("iterations {} outcome {}", rep.n, rep.outcome);
    for it in &rep.iterations {
        println!("{} {} -> {}", it.index, format_vector(&it.x), format_vector(&it.y));
    }
    result
}

fn report_recovery(r: &Recovery) -> Run {
    match r {
        Recovery::Equivalent { .. } => {
            println!("RECOVERED");
            Ok(())
        }
        Recovery::Mismatch { x, oracle, recovered } => {
            let msg = format!(
                "recovered relation differs at {}: oracle {} recovered {}",
                format_vector(x),
                format_vector(oracle),
                format_vector(recovered)
            );
            println!("MISMATCH {}", format_vector(x));
            Err(Failure::new(1, "verification", msg))
        }
    }
}

fn cmd_verify(a: &VerifyArgs) -> Run {
    let start = Instant::now();
    let original = parse_net(&a.original)?;
    let locked = parse_locked(&a.locked)?;
    let psi = parse_psi(&a.keyrel, a.rand == 1)?;
    let limits = a.limits.limits(start);
    let correct = match verify_lock(&original, &locked, &psi, &limits) {
        Ok(v) => v,
        Err(SynthError::KeyRel(e)) => return Err(Failure::input(e)),
        Err(SynthError::Netlist(e)) => return Err(Failure::input(e)),
        Err(e) => return Err(synth_failure(e)),
    };
    let ok_correct = match &correct {
        Verdict::Valid => {
            println!("CORRECT");
            true
        }
        Verdict::Counterexample(x) => {
            let active = inline_relation(&locked, &psi).map_err(Failure::input)?;
            println!(
                "INCORRECT {} expected {} got {}",
                format_vector(x),
                format_vector(&original.eval(x).map_err(Failure::input)?),
                format_vector(&active.eval(x).map_err(Failure::input)?)
            );
            false
        }
    };
    let ok_secure = match check_security(&original, &locked, &limits).map_err(synth_failure)? {
        Security::Secure { x, r } => {
            println!("SECURE {} {}", format_vector(&x), format_vector(&r));
            true
        }
        Security::Trivial => {
            println!("TRIVIAL");
            false
        }
    };
    if ok_correct && ok_secure {
        Ok(())
    } else {
        Err(Failure::new(
            1,
            if ok_correct { "security-fail" } else { "verification" },
            "lock check failed",
        ))
    }
}

fn cmd_sim(a: &SimArgs) -> Run {
    let net = match &a.keyrel {
        Some(k) => {
            let locked = parse_locked(&a.bench)?;
            let psi = parse_psi(k, false)?;
            inline_relation(&locked, &psi).map_err(|e: KeyRelError| Failure::input(e))?
        }
        None => parse_net(&a.bench)?,
    };
    let eval = |line: &str| -> Result<String, Failure> {
        let x = parse_vector(line).map_err(Failure::input)?;
        let y = net.eval(&x).map_err(Failure::input)?;
        Ok(format_vector(&y))
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let io_err = |e: io::Error| Failure::new(2, "io", e.to_string());
    if a.vectors.is_empty() {
        for line in io::stdin().lock().lines() {
            let line = line.map_err(io_err)?;
            if line.trim().is_empty() {
                continue;
            }
            writeln!(out, "{}", eval(&line)?).map_err(io_err)?;
            out.flush().map_err(io_err)?;
        }
    } else {
        for v in &a.vectors {
            writeln!(out, "{}", eval(v)?).map_err(io_err)?;
        }
    }
    Ok(())
}

fn cmd_export(a: &ExportArgs, run: &serde_json::Value) -> Run {
    let psi = parse_psi(&a.keyrel, false)?;
    let table = to_sop(&psi, a.support_limit).map_err(|e| match e {
        KeyRelError::SupportTooLarge { .. } => Failure::new(2, "support-limit", e.to_string()),
        e => Failure::input(e),
    })?;
    let text = header(run) + &emit_pla(&table);
    match &a.out {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_solve(a: &SolveArgs) -> Run {
    let start = Instant::now();
    let cnf = parse_dimacs(&read(&a.cnf)?).map_err(|e| Failure::new(2, "parse", e.to_string()))?;
    let result = match &a.external {
        Some(cmd) => solve_external(&cnf, cmd).map_err(|e| Failure::new(2, "external", e.to_string()))?,
        None => {
            let seeds: Vec<u64> = (0..a.portfolio.max(1)).collect();
            match solve_portfolio(&cnf, &seeds, &a.limits.limits(start)) {
                Ok(r) => r,
                Err(SolveError::LimitHit(l)) => {
                    println!("s UNKNOWN");
                    return Err(Failure::limit(l));
                }
            }
        }
    };
    match result {
        SatResult::Sat(m) => {
            println!("s SATISFIABLE");
            let lits: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .map(|(i, &v)| if v { format!("{}", i + 1) } else { format!("-{}", i + 1) })
                .collect();
            println!("v {} 0", lits.join(" "));
        }
        SatResult::Unsat => println!("s UNSATISFIABLE"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let run = run_config(&cli);
    let r = match &cli.command {
        Cmd::Lock(a) => cmd_lock(a, &run),
        Cmd::Attack(a) => cmd_attack(a, &run),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Sim(a) => cmd_sim(a),
        Cmd::ExportSop(a) => cmd_export(a, &run),
        Cmd::Solve(a) => cmd_solve(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("holl: error[{}]: {}", f.kind, f.msg);
            ExitCode::from(f.code)
        }
    }
}
