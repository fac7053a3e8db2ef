//! Command-line front end: solves SMT-LIB scripts over prime fields,
//! prints models, exposes per-module statistics, and runs benchmark
//! directories in batch mode with CSV output.
//!
//! Exit codes follow solver-competition conventions: 10 sat, 20 unsat,
//! 0 unknown, 1 error.

use clap::Parser;
use ffsmt_core::theory::TheoryStats;
use ffsmt_core::{
    revalidate_model, Model, ModuleMask, MonomialOrder, RunOutcome, Solver, SolverConfig,
    UnknownReason, Verdict,
};
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Duration;

#[derive(Parser, Debug)]
#[command(
    name = "ffsmt",
    about = "SMT solver for polynomial equations over prime fields (QF_FF)"
)]
struct Args {
    /// Input files (.smt2); reads stdin when none is given
    files: Vec<PathBuf>,

    /// Run every .smt2 file in a directory and emit CSV on stdout
    #[arg(long, value_name = "DIR")]
    bench: Option<PathBuf>,

    /// Wall-clock timeout per instance, in seconds
    #[arg(long, value_name = "SECS")]
    timeout: Option<u64>,

    /// Random seed (decision phases, model search)
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Enabled theory modules: C3.1..C3.6 or a comma list such as
    /// "groebner,linear,equiv,int-linear,clause-infer,real-nl"
    #[arg(long, value_name = "SPEC")]
    modules: Option<String>,

    /// Monomial order for the Gröbner module
    #[arg(long, value_name = "ORDER", default_value = "grevlex")]
    gb_order: String,

    /// Print per-module statistics after the verdict
    #[arg(long)]
    stats: bool,

    /// Re-evaluate any sat model against the parsed input; mismatch exits 1
    #[arg(long)]
    validate_model: bool,

    /// Print the model after a sat verdict even without (get-model)
    #[arg(long)]
    dump_model: bool,

    /// Disable restarts (reproducible runs)
    #[arg(long)]
    no_restarts: bool,

    /// Offset the deterministic value choice of the linear module
    #[arg(long, value_name = "SEED", default_value_t = 0)]
    randomize_values: u64,

    /// Encode overflowing constraints with fresh integer variables
    #[arg(long)]
    overflow_encoding: bool,

    /// Conflict budget before giving up with unknown
    #[arg(long, value_name = "N")]
    conflict_limit: Option<u64>,

    /// External QF_LIA solver command (reads SMT-LIB on stdin, answers
    /// sat/unsat plus an unsat core); the internal solver is the fallback
    #[arg(long, value_name = "CMD")]
    external_lia: Option<String>,

    /// External QF_NRA solver command (answers sat plus a model)
    #[arg(long, value_name = "CMD")]
    external_nra: Option<String>,

    /// Timeout in seconds for each external backend call
    #[arg(long, value_name = "SECS", default_value_t = 10)]
    external_timeout: u64,
}

fn main() {
    let args = Args::parse();
    let code = match run(&args) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            1
        }
    };
    std::process::exit(code);
}

fn config_from(args: &Args) -> Result<SolverConfig, String> {
    let modules = match &args.modules {
        Some(spec) => ModuleMask::parse(spec)?,
        None => ModuleMask::all(),
    };
    let gb_order: MonomialOrder = args.gb_order.parse()?;
    Ok(SolverConfig {
        seed: args.seed,
        timeout: args.timeout.map(Duration::from_secs),
        conflict_limit: args.conflict_limit,
        modules,
        restarts: !args.no_restarts,
        gb_order,
        value_randomization: args.randomize_values,
        overflow_encoding: args.overflow_encoding,
        external_lia: args.external_lia.clone(),
        external_nra: args.external_nra.clone(),
        external_timeout: Duration::from_secs(args.external_timeout),
        ..SolverConfig::default()
    })
}

fn run(args: &Args) -> Result<i32, String> {
    let config = config_from(args)?;
    if let Some(dir) = &args.bench {
        return bench(dir, &config, args);
    }
    let text = if args.files.is_empty() {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| e.to_string())?;
        buf
    } else if args.files.len() == 1 {
        std::fs::read_to_string(&args.files[0]).map_err(|e| e.to_string())?
    } else {
        // multiple files: solve each, report the last exit code
        let mut last = 0;
        for f in &args.files {
            let text = std::fs::read_to_string(f).map_err(|e| e.to_string())?;
            println!("; {}", f.display());
            last = solve_one(&text, &config, args)?;
        }
        return Ok(last);
    };
    solve_one(&text, &config, args)
}

fn solve_one(text: &str, config: &SolverConfig, args: &Args) -> Result<i32, String> {
    let (script, atoms) =
        ffsmt_core::parse(text).map_err(|e| e.to_string())?;
    let mut solver = Solver::new(script, atoms, config.clone());
    let out = solver.run();
    println!("{}", out.verdict);
    if out.verdict == Verdict::Sat {
        let model = out.model.as_ref().expect("sat verdict carries a model");
        if args.validate_model && !revalidate_model(&solver.script, &solver.atoms, model) {
            eprintln!("error: model failed re-validation against the input");
            return Ok(1);
        }
        if solver.script.wants_model || args.dump_model {
            print_model(model, &solver);
        }
    }
    if args.stats {
        print_stats(&out);
    }
    Ok(exit_code(&out.verdict))
}

fn exit_code(v: &Verdict) -> i32 {
    match v {
        Verdict::Sat => 10,
        Verdict::Unsat => 20,
        Verdict::Unknown(_) => 0,
    }
}

fn print_model(model: &Model, solver: &Solver) {
    let p = solver.atoms.field().modulus().clone();
    println!("(");
    for (name, value) in &model.values {
        println!("  (define-fun {name} () (_ FiniteField {p}) #f{value})");
    }
    println!(")");
}

fn print_stats(out: &RunOutcome) {
    let s = &out.stats;
    println!("; wall_time_ms        {}", s.wall.as_millis());
    println!("; decisions           {}", s.sat.decisions);
    println!("; conflicts           {}", s.sat.conflicts);
    println!("; propagations        {}", s.sat.propagations);
    println!("; restarts            {}", s.sat.restarts);
    println!("; learnt_clauses      {}", s.sat.learnt_clauses);
    println!("; partial_checks      {}", s.theory.partial_checks);
    println!("; final_checks        {}", s.theory.final_checks);
    println!("; module               calls conflicts props clauses time_ms skipped");
    for (name, m) in module_rows(&s.theory) {
        println!(
            "; {name:<20} {:>5} {:>9} {:>5} {:>7} {:>7} {:>7}",
            m.calls,
            m.conflicts,
            m.propagations,
            m.clauses,
            m.time.as_millis(),
            m.skipped
        );
    }
    println!("; equiv_derived       {}", s.theory.equiv_derived);
    println!("; gb_partial_calls    {}", s.theory.groebner_partial_calls);
    println!("; realnl_partial_calls {}", s.theory.real_nl_partial_calls);
    println!(
        "; gb_certificates     {} checked, {} failures",
        s.theory.groebner_certificates_checked, s.theory.groebner_certificate_failures
    );
    println!("; linear_models       {}", s.theory.linear_models);
    println!("; realnl_models       {}", s.theory.real_nl_models);
}

fn module_rows(t: &TheoryStats) -> Vec<(&'static str, &ffsmt_core::theory::ModuleStats)> {
    vec![
        ("equiv", &t.equiv),
        ("linear", &t.linear),
        ("int-linear", &t.int_linear),
        ("clause-infer", &t.clause_infer),
        ("groebner", &t.groebner),
        ("real-nl", &t.real_nl),
    ]
}

/// Batch mode: one CSV row per instance. Schema (documented in the README):
/// file,verdict,time_ms,decisions,conflicts,equiv_calls,linear_calls,
/// intlinear_calls,clauseinfer_calls,groebner_calls,realnl_calls,
/// equiv_conflicts,linear_conflicts,intlinear_conflicts,
/// clauseinfer_conflicts,groebner_conflicts,equiv_derived,realnl_models
fn bench(dir: &Path, config: &SolverConfig, args: &Args) -> Result<i32, String> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "smt2"))
        .collect();
    files.sort();
    println!(
        "file,verdict,time_ms,decisions,conflicts,equiv_calls,linear_calls,intlinear_calls,\
         clauseinfer_calls,groebner_calls,realnl_calls,equiv_conflicts,linear_conflicts,\
         intlinear_conflicts,clauseinfer_conflicts,groebner_conflicts,equiv_derived,realnl_models"
    );
    for f in &files {
        let text = match std::fs::read_to_string(f) {
            Ok(t) => t,
            Err(e) => {
                println!("{},error:{e},,,,,,,,,,,,,,,,", f.display());
                continue;
            }
        };
        let row = match ffsmt_core::parse(&text) {
            Err(e) => {
                // per-instance isolation: a parse failure is one bad row
                let msg = e.to_string().replace(',', ";");
                format!("{},error:{msg},,,,,,,,,,,,,,,,", f.display())
            }
            Ok((script, atoms)) => {
                let mut solver = Solver::new(script, atoms, config.clone());
                let out = solver.run();
                let verdict = match &out.verdict {
                    Verdict::Sat => {
                        let ok = out
                            .model
                            .as_ref()
                            .map(|m| revalidate_model(&solver.script, &solver.atoms, m))
                            .unwrap_or(false);
                        if args.validate_model && !ok {
                            "invalid-model".to_string()
                        } else {
                            "sat".to_string()
                        }
                    }
                    Verdict::Unsat => "unsat".to_string(),
                    Verdict::Unknown(UnknownReason::Timeout) => "timeout".to_string(),
                    Verdict::Unknown(_) => "unknown".to_string(),
                };
                let t = &out.stats.theory;
                format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    f.display(),
                    verdict,
                    out.stats.wall.as_millis(),
                    out.stats.sat.decisions,
                    out.stats.sat.conflicts,
                    t.equiv.calls,
                    t.linear.calls,
                    t.int_linear.calls,
                    t.clause_infer.calls,
                    t.groebner.calls,
                    t.real_nl.calls,
                    t.equiv.conflicts,
                    t.linear.conflicts,
                    t.int_linear.conflicts,
                    t.clause_infer.conflicts,
                    t.groebner.conflicts,
                    t.equiv_derived,
                    t.real_nl_models,
                )
            }
        };
        println!("{row}");
    }
    Ok(0)
}
