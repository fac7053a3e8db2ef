//! Top-level solver: parses a script, clausifies it, and runs the CDCL(T)
//! search loop coordinating the SAT core and the theory orchestrator.

use crate::field::Fe;
use crate::frontend::atoms::{AtomTable, TheoryAtom};
use crate::frontend::parser::{FrontendError, InputScript};
use crate::frontend::{clausify, validate_model};
use crate::poly::{MonomialOrder, VarId};
use crate::sat::{AddClause, LBool, Lit, Reason, SatCore, SatStats};
use crate::theory::{Budgets, CheckMode, ModuleMask, Orchestrator, TheoryStats, TheoryVerdict};
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
    Unknown(UnknownReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownReason {
    /// Some leaf could not be decided by any module.
    Incomplete,
    Timeout,
    ConflictLimit,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Sat => write!(f, "sat"),
            Verdict::Unsat => write!(f, "unsat"),
            Verdict::Unknown(_) => write!(f, "unknown"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub seed: u64,
    pub timeout: Option<Duration>,
    pub conflict_limit: Option<u64>,
    pub modules: ModuleMask,
    pub budgets: Budgets,
    pub restarts: bool,
    pub gb_order: MonomialOrder,
    /// Offset for the deterministic repaired-value search of the linear
    /// module (0 keeps the smallest-residue rule).
    pub value_randomization: u64,
    pub overflow_encoding: bool,
    /// External QF_LIA solver command (reads SMT-LIB on stdin), optional.
    pub external_lia: Option<String>,
    /// External QF_NRA solver command, optional.
    pub external_nra: Option<String>,
    pub external_timeout: Duration,
    /// Test instrumentation: brute-force every theory conflict explanation
    /// on small instances.
    pub validate_explanations: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 0,
            timeout: None,
            conflict_limit: None,
            modules: ModuleMask::all(),
            budgets: Budgets::default(),
            restarts: true,
            gb_order: MonomialOrder::Grevlex,
            value_randomization: 0,
            overflow_encoding: false,
            external_lia: None,
            external_nra: None,
            external_timeout: Duration::from_secs(10),
            validate_explanations: false,
        }
    }
}

/// A satisfying assignment for the declared variables.
#[derive(Debug, Clone)]
pub struct Model {
    pub values: Vec<(String, Fe)>,
}

#[derive(Debug, Clone, Default)]
pub struct RunStats {
    pub sat: SatStats,
    pub theory: TheoryStats,
    pub wall: Duration,
}

pub struct Solver {
    pub atoms: AtomTable,
    pub script: InputScript,
    sat: SatCore,
    theory: Orchestrator,
    config: SolverConfig,
    theory_synced: usize,
    saw_unknown_leaf: bool,
    model: Option<BTreeMap<VarId, Fe>>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub verdict: Verdict,
    pub model: Option<Model>,
    pub stats: RunStats,
}

/// Parses and solves a script in one call.
pub fn run_script(text: &str, config: &SolverConfig) -> Result<RunOutcome, FrontendError> {
    let (script, atoms) = crate::frontend::parse(text)?;
    let mut solver = Solver::new(script, atoms, config.clone());
    Ok(solver.run())
}

impl Solver {
    pub fn new(script: InputScript, atoms: AtomTable, config: SolverConfig) -> Self {
        let mut theory = Orchestrator::new(
            &atoms,
            config.modules,
            config.budgets,
            config.seed,
            config.value_randomization,
            config.overflow_encoding,
        );
        theory.gb_order = config.gb_order;
        let backend = |cmd: &Option<String>| {
            cmd.as_ref().map(|command| crate::theory::bridge::ExternalBackend {
                command: command.clone(),
                timeout: config.external_timeout,
            })
        };
        theory.set_external_lia(backend(&config.external_lia));
        theory.external_nra = backend(&config.external_nra);
        Solver {
            sat: SatCore::new(config.seed, config.restarts),
            theory,
            atoms,
            script,
            config,
            theory_synced: 0,
            saw_unknown_leaf: false,
            model: None,
        }
    }

    pub fn run(&mut self) -> RunOutcome {
        let started = Instant::now();
        let verdict = self.solve(started);
        let model = self.user_model();
        let stats = RunStats {
            sat: self.sat.stats.clone(),
            theory: self.theory.stats.clone(),
            wall: started.elapsed(),
        };
        RunOutcome {
            verdict,
            model,
            stats,
        }
    }

    fn user_model(&self) -> Option<Model> {
        let m = self.model.as_ref()?;
        if self.script.declared.is_empty() {
            return Some(Model { values: Vec::new() });
        }
        let field = self.atoms.field();
        let mut values = Vec::new();
        for &v in &self.script.declared {
            let name = self.atoms.vars.name(v).to_string();
            let val = m.get(&v).cloned().unwrap_or_else(|| field.zero());
            values.push((name, val));
        }
        Some(Model { values })
    }

    /// Internal full model (all variables), for validation in tests.
    pub fn full_model(&self) -> Option<&BTreeMap<VarId, Fe>> {
        self.model.as_ref()
    }

    pub fn stats(&self) -> (&SatStats, &TheoryStats) {
        (&self.sat.stats, &self.theory.stats)
    }

    fn solve(&mut self, started: Instant) -> Verdict {
        if !self.atoms.has_field() {
            // no field sort means no theory atoms; an empty script is sat
            self.model = Some(BTreeMap::new());
            return Verdict::Sat;
        }
        let deadline = self.config.timeout.map(|t| started + t);
        self.theory.deadline = deadline;

        let cnf = clausify(&self.script.assertions.clone(), &mut self.atoms);
        self.sat.ensure_atoms(self.atoms.num_atoms());
        if cnf.trivially_unsat {
            return Verdict::Unsat;
        }
        for clause in cnf.clauses {
            match self.sat.add_clause(clause, false) {
                AddClause::Unsat => return Verdict::Unsat,
                AddClause::Conflicting(_) => unreachable!("input clauses added at level 0"),
                _ => {}
            }
        }

        loop {
            if let Some(dl) = deadline {
                if Instant::now() > dl {
                    return Verdict::Unknown(UnknownReason::Timeout);
                }
            }
            if let Some(limit) = self.config.conflict_limit {
                if self.sat.stats.conflicts >= limit {
                    return Verdict::Unknown(UnknownReason::ConflictLimit);
                }
            }

            if let Some(ci) = self.sat.propagate() {
                let conflict = self.sat.clause_lits(ci).to_vec();
                if !self.resolve_conflict(&conflict) {
                    return self.exhausted_verdict();
                }
                continue;
            }

            // restarts only between conflicts, at a propagation fixpoint
            if self.sat.should_restart() {
                self.sat.backjump(0);
                self.theory.backtrack(self.sat.trail().len());
                self.theory_synced = self.theory_synced.min(self.sat.trail().len());
            }

            self.sync_theory_trail();
            let mode = if self.sat.all_assigned() {
                CheckMode::Final
            } else {
                CheckMode::Partial
            };
            let verdict = {
                let sat = &self.sat;
                let value_of = |a: u32| {
                    if (a as usize) < sat.num_atoms() {
                        sat.value_atom(a)
                    } else {
                        LBool::Undef
                    }
                };
                self.theory.check(mode, &mut self.atoms, &value_of)
            };
            self.sat.ensure_atoms(self.atoms.num_atoms());

            match verdict {
                TheoryVerdict::Consistent => {
                    debug_assert_eq!(mode, CheckMode::Partial);
                    match self.sat.pick_branch() {
                        Some(l) => self.sat.decide(l),
                        None => {
                            // all atoms assigned: next iteration runs final
                        }
                    }
                }
                TheoryVerdict::Conflict(expl) => {
                    self.check_explanation(&expl);
                    let conflict: Vec<Lit> = expl.iter().map(|l| l.negate()).collect();
                    if !self.resolve_conflict(&conflict) {
                        return self.exhausted_verdict();
                    }
                }
                TheoryVerdict::Propagations(props) => {
                    for l in props {
                        match self.sat.value(l) {
                            LBool::Undef => {
                                let ok = self.sat.enqueue(l, Reason::Theory);
                                debug_assert!(ok);
                            }
                            LBool::True => {}
                            LBool::False => {
                                // propagation of a false literal: conflict
                                let mut conflict: Vec<Lit> = self
                                    .theory
                                    .explain(l)
                                    .iter()
                                    .map(|e| e.negate())
                                    .collect();
                                conflict.push(l);
                                if !self.resolve_conflict(&conflict) {
                                    return self.exhausted_verdict();
                                }
                                break;
                            }
                        }
                    }
                }
                TheoryVerdict::NewClauses(clauses) => {
                    for cl in clauses {
                        // guard the inferred clause with its source literal
                        // so the lemma is valid independently of the branch
                        let mut lits = vec![cl.source.negate()];
                        lits.extend(cl.lits.iter().copied());
                        match self.sat.add_clause(lits, true) {
                            AddClause::Unsat => return self.exhausted_verdict(),
                            AddClause::Conflicting(ci) => {
                                let conflict = self.sat.clause_lits(ci).to_vec();
                                if !self.resolve_conflict(&conflict) {
                                    return self.exhausted_verdict();
                                }
                                break;
                            }
                            _ => {}
                        }
                    }
                }
                TheoryVerdict::Sat(model) => {
                    debug_assert!(self.model_respects_trail(&model));
                    self.model = Some(model);
                    return Verdict::Sat;
                }
                TheoryVerdict::Unknown => {
                    debug_assert_eq!(mode, CheckMode::Final);
                    self.saw_unknown_leaf = true;
                    if self.sat.decision_level() == 0 {
                        return Verdict::Unknown(UnknownReason::Incomplete);
                    }
                    // block this leaf by flipping a decision
                    let blocking: Vec<Lit> = self
                        .sat
                        .trail()
                        .iter()
                        .copied()
                        .filter(|l| self.sat.reason_of(l.atom()) == Reason::Decision)
                        .map(Lit::negate)
                        .collect();
                    if !self.resolve_conflict(&blocking) {
                        return self.exhausted_verdict();
                    }
                }
            }
        }
    }

    fn sync_theory_trail(&mut self) {
        let trail = self.sat.trail();
        for pos in self.theory_synced..trail.len() {
            let lit = trail[pos];
            if self.atoms.theory(lit.atom()).is_some() {
                self.theory.assert_literal(lit, pos);
            }
        }
        self.theory_synced = trail.len();
    }

    /// Analyzes a falsified clause, learns, backjumps, and rewinds the
    /// theory. Returns false when the conflict is fatal.
    fn resolve_conflict(&mut self, conflict: &[Lit]) -> bool {
        let theory = &self.theory;
        let analyzed = self.sat.analyze(conflict, |l| theory.explain(l));
        match analyzed {
            None => false,
            Some((learnt, level)) => {
                self.sat.backjump(level);
                self.theory.backtrack(self.sat.trail().len());
                self.theory_synced = self.theory_synced.min(self.sat.trail().len());
                self.sat.learn_and_assert(learnt);
                true
            }
        }
    }

    fn exhausted_verdict(&self) -> Verdict {
        if self.saw_unknown_leaf {
            Verdict::Unknown(UnknownReason::Incomplete)
        } else {
            Verdict::Unsat
        }
    }

    /// Hard gate before reporting sat: the model must satisfy every
    /// asserted theory literal in its domain form.
    fn model_respects_trail(&self, model: &BTreeMap<VarId, Fe>) -> bool {
        self.theory.trail().iter().all(|l| {
            let Some(TheoryAtom { var, value, .. }) = self.atoms.theory(l.atom()) else {
                return true;
            };
            match model.get(var) {
                Some(v) => (v == value) == l.is_positive(),
                None => false,
            }
        })
    }

    /// Test instrumentation: enumerate the explanation over the original
    /// variables and panic if it is satisfiable.
    fn check_explanation(&self, expl: &[Lit]) {
        if !self.config.validate_explanations {
            return;
        }
        use num_traits::ToPrimitive;
        let field = self.atoms.field().clone();
        let Some(p) = field.modulus().to_u64() else {
            return;
        };
        let originals: Vec<VarId> = self
            .atoms
            .vars
            .iter()
            .filter(|(_, k)| matches!(k, crate::poly::VarKind::Original(_)))
            .map(|(v, _)| v)
            .collect();
        if p > 13 || originals.len() > 4 {
            return;
        }
        let mut vals = vec![0u64; originals.len()];
        loop {
            let assign: BTreeMap<VarId, Fe> = originals
                .iter()
                .zip(&vals)
                .map(|(v, k)| (*v, field.elem_u64(*k)))
                .collect();
            let all_hold = expl.iter().all(|l| {
                let Some(t) = self.atoms.theory(l.atom()) else {
                    return false; // boolean literals cannot appear here
                };
                match t.expanded.evaluate(&field, |v| assign.get(&v).cloned()) {
                    Ok(v) => v.is_zero() == l.is_positive(),
                    Err(_) => false,
                }
            });
            assert!(
                !all_hold,
                "unsound theory explanation {:?} satisfied by {:?}",
                expl, vals
            );
            let mut i = 0;
            loop {
                if i == vals.len() {
                    return;
                }
                vals[i] += 1;
                if vals[i] < p {
                    break;
                }
                vals[i] = 0;
                i += 1;
            }
        }
    }
}

/// Re-evaluates a model against the parsed script (the external model gate).
pub fn revalidate_model(script: &InputScript, atoms: &AtomTable, model: &Model) -> bool {
    let mut assignment = BTreeMap::new();
    for (name, val) in &model.values {
        match atoms.lookup_name(name) {
            Some(v) => {
                assignment.insert(v, val.clone());
            }
            None => return false,
        }
    }
    // every declared variable must be covered
    for &v in &script.declared {
        if !assignment.contains_key(&v) {
            return false;
        }
    }
    validate_model(script, atoms, &assignment)
}
