//! The theory solver: a trail of asserted domain-constraint literals and six
//! sub-modules dispatched in a fixed priority order. Cheap incremental
//! reasoning (equivalence inference, the linear tableau) runs at every
//! check; the integer linear module and clause inference run per check; the
//! Gröbner and real non-linear modules run only at leaves of the search.

pub mod bridge;
pub mod clause_infer;
pub mod equiv;
pub mod groebner;
pub mod int_linear;
pub mod lia;
pub mod linear;
pub mod real_nl;

use crate::field::Fe;
use crate::frontend::atoms::{AtomId, AtomTable, Interned};
use crate::poly::{Polynomial, VarId};
use crate::sat::{LBool, Lit};
use clause_infer::{ClauseInfer, InferredClause};
use equiv::EquivInfer;
use groebner::{GbBudget, GbCheck, Groebner};
use int_linear::{IntLinear, IntLinearOutcome};
use linear::{HeavyOutcome, LinearFf};
use real_nl::RealNl;
use std::collections::{BTreeMap, HashMap};
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Partial,
    Final,
}

#[derive(Debug)]
pub enum TheoryVerdict {
    Consistent,
    Conflict(Vec<Lit>),
    Propagations(Vec<Lit>),
    NewClauses(Vec<InferredClause>),
    Sat(BTreeMap<VarId, Fe>),
    Unknown,
}

/// Which sub-modules are enabled. Disabling a module skips it in the fixed
/// orchestration order; it never reorders the remaining ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModuleMask(u8);

impl ModuleMask {
    pub const GROEBNER: u8 = 1;
    pub const LINEAR: u8 = 2;
    pub const EQUIV: u8 = 4;
    pub const INT_LINEAR: u8 = 8;
    pub const CLAUSE_INFER: u8 = 16;
    pub const REAL_NL: u8 = 32;

    pub fn all() -> Self {
        ModuleMask(0x3f)
    }

    pub fn none() -> Self {
        ModuleMask(0)
    }

    pub fn with(self, m: u8) -> Self {
        ModuleMask(self.0 | m)
    }

    pub fn has(self, m: u8) -> bool {
        self.0 & m != 0
    }

    /// Cumulative configuration `C3.n`: modules in presentation order
    /// (Gröbner, linear, equivalence, integer linear, clause inference,
    /// real non-linear).
    pub fn cumulative(n: u8) -> Self {
        let order = [
            Self::GROEBNER,
            Self::LINEAR,
            Self::EQUIV,
            Self::INT_LINEAR,
            Self::CLAUSE_INFER,
            Self::REAL_NL,
        ];
        let mut m = ModuleMask::none();
        for &bit in order.iter().take(n as usize) {
            m = m.with(bit);
        }
        m
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        if let Some(rest) = s.strip_prefix("C3.") {
            let n: u8 = rest
                .parse()
                .map_err(|_| format!("invalid configuration `{s}`"))?;
            if !(1..=6).contains(&n) {
                return Err(format!("configuration `{s}` out of range (C3.1..C3.6)"));
            }
            return Ok(Self::cumulative(n));
        }
        let mut m = ModuleMask::none();
        for part in s.split(',') {
            m = match part.trim() {
                "groebner" => m.with(Self::GROEBNER),
                "linear" => m.with(Self::LINEAR),
                "equiv" => m.with(Self::EQUIV),
                "int-linear" => m.with(Self::INT_LINEAR),
                "clause-infer" => m.with(Self::CLAUSE_INFER),
                "real-nl" => m.with(Self::REAL_NL),
                other => return Err(format!("unknown module `{other}`")),
            };
        }
        Ok(m)
    }
}

#[derive(Debug, Default, Clone)]
pub struct ModuleStats {
    pub calls: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub clauses: u64,
    pub time: Duration,
    pub skipped: u64,
}

#[derive(Debug, Default, Clone)]
pub struct TheoryStats {
    pub equiv: ModuleStats,
    pub linear: ModuleStats,
    pub int_linear: ModuleStats,
    pub clause_infer: ModuleStats,
    pub groebner: ModuleStats,
    pub real_nl: ModuleStats,
    pub equiv_derived: u64,
    pub partial_checks: u64,
    pub final_checks: u64,
    pub groebner_partial_calls: u64,
    pub real_nl_partial_calls: u64,
    pub groebner_certificates_checked: u64,
    pub groebner_certificate_failures: u64,
    pub real_nl_models: u64,
    pub linear_models: u64,
}

/// Per-call time budgets for the potentially expensive sub-modules.
#[derive(Debug, Clone, Copy)]
pub struct Budgets {
    pub groebner: Duration,
    pub real_nl: Duration,
    pub int_linear: Duration,
    pub gb_pair_limit: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            groebner: Duration::from_secs(5),
            real_nl: Duration::from_secs(5),
            int_linear: Duration::from_secs(2),
            gb_pair_limit: 10_000,
        }
    }
}

pub struct Orchestrator {
    pub mask: ModuleMask,
    pub budgets: Budgets,
    pub gb_order: crate::poly::MonomialOrder,
    trail: Vec<Lit>,
    sat_pos: Vec<usize>,
    processed: usize,
    marks: Vec<(usize, usize)>,
    linear: LinearFf,
    equiv: EquivInfer,
    groebner: Groebner,
    clause_infer: ClauseInfer,
    int_linear: IntLinear,
    real_nl: RealNl,
    rng: rand_chacha::ChaCha8Rng,
    slack_rows_installed: usize,
    prop_expl: HashMap<Lit, Vec<Lit>>,
    pub stats: TheoryStats,
    pub deadline: Option<Instant>,
    pub external_nra: Option<bridge::ExternalBackend>,
}

impl Orchestrator {
    pub fn new(
        atoms: &AtomTable,
        mask: ModuleMask,
        budgets: Budgets,
        seed: u64,
        value_offset: u64,
        overflow_encoding: bool,
    ) -> Self {
        use rand::SeedableRng;
        // scripts with no field sort never reach the theory; use a stand-in
        let field = if atoms.has_field() {
            atoms.field().clone()
        } else {
            crate::field::PrimeField::new(num_bigint::BigUint::from(3u32)).unwrap()
        };
        Orchestrator {
            mask,
            budgets,
            gb_order: atoms.order(),
            trail: Vec::new(),
            sat_pos: Vec::new(),
            processed: 0,
            marks: Vec::new(),
            linear: LinearFf::new(field.clone(), value_offset),
            equiv: EquivInfer::new(field, atoms.order()),
            groebner: Groebner::new(),
            clause_infer: ClauseInfer::new(),
            int_linear: IntLinear::new(overflow_encoding, lia::LiaLimits::default()),
            real_nl: RealNl::default(),
            rng: rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed),
            slack_rows_installed: 0,
            prop_expl: HashMap::new(),
            stats: TheoryStats::default(),
            deadline: None,
            external_nra: None,
        }
    }

    pub fn set_external_lia(&mut self, backend: Option<bridge::ExternalBackend>) {
        self.int_linear.external = backend;
    }

    pub fn trail(&self) -> &[Lit] {
        &self.trail
    }

    /// Records a newly asserted theory literal (boolean selectors are
    /// filtered by the caller).
    pub fn assert_literal(&mut self, lit: Lit, sat_pos: usize) {
        self.trail.push(lit);
        self.sat_pos.push(sat_pos);
    }

    /// Rewinds the theory trail to entries below the given SAT trail length.
    pub fn backtrack(&mut self, sat_len: usize) {
        let keep = self
            .sat_pos
            .iter()
            .position(|&p| p >= sat_len)
            .unwrap_or(self.trail.len());
        if keep < self.processed {
            let (lmark, emark) = self.marks[keep];
            self.linear.undo_to(lmark);
            self.equiv.undo_to(emark);
            self.marks.truncate(keep);
            self.processed = keep;
        }
        self.trail.truncate(keep);
        self.sat_pos.truncate(keep);
    }

    pub fn explain(&self, lit: Lit) -> Vec<Lit> {
        self.prop_expl
            .get(&lit)
            .cloned()
            .expect("explanation requested for unknown propagation")
    }

    fn module_deadline(&self, per_call: Duration) -> Option<Instant> {
        let call = Instant::now() + per_call;
        Some(match self.deadline {
            Some(global) => call.min(global),
            None => call,
        })
    }

    /// The main dispatch. `value_of` reports the SAT assignment of existing
    /// atoms (Undef for atoms created during this very check).
    pub fn check(
        &mut self,
        mode: CheckMode,
        atoms: &mut AtomTable,
        value_of: &dyn Fn(AtomId) -> LBool,
    ) -> TheoryVerdict {
        match mode {
            CheckMode::Partial => self.stats.partial_checks += 1,
            CheckMode::Final => self.stats.final_checks += 1,
        }
        self.linear.ensure_vars(atoms.vars.len());
        self.equiv.ensure_vars(atoms.vars.len());
        // install newly created slack definitions as tableau rows
        while self.slack_rows_installed < atoms.slack_defs().len() {
            let (s, g) = atoms.slack_defs()[self.slack_rows_installed].clone();
            self.linear.add_row(s, &g);
            self.slack_rows_installed += 1;
        }

        // register monomial definitions with the equivalence engine
        let mut derived = Vec::new();
        if self.mask.has(ModuleMask::EQUIV) {
            let field = atoms.field().clone();
            let order = atoms.order();
            let defs: Vec<(VarId, Polynomial)> = atoms
                .monomial_defs()
                .iter()
                .map(|(v, m)| {
                    (
                        *v,
                        Polynomial::from_terms(vec![(m.clone(), field.one())], &field, &order),
                    )
                })
                .collect();
            for (v, body) in defs {
                self.equiv.register_monomial_def(v, &body, &mut derived);
            }
        }

        // process new trail literals: lightweight linear checks and
        // equivalence bookkeeping
        while self.processed < self.trail.len() {
            let lit = self.trail[self.processed];
            self.marks.push((self.linear.mark(), self.equiv.mark()));
            self.processed += 1;
            let Some(t) = atoms.theory(lit.atom()).cloned() else {
                continue;
            };
            if self.mask.has(ModuleMask::LINEAR) {
                let started = Instant::now();
                let r = if lit.is_positive() {
                    self.linear.assert_eq(t.var, &t.value, lit)
                } else {
                    self.linear.assert_neq(t.var, &t.value, lit)
                };
                self.stats.linear.time += started.elapsed();
                if let Err(expl) = r {
                    self.stats.linear.conflicts += 1;
                    return TheoryVerdict::Conflict(expl);
                }
            }
            if self.mask.has(ModuleMask::EQUIV) && lit.is_positive() {
                let started = Instant::now();
                self.equiv.process_equation(&t.expanded, lit, &mut derived);
                self.stats.equiv.time += started.elapsed();
            }
        }

        // 1. equivalence inference verdicts
        if self.mask.has(ModuleMask::EQUIV) {
            self.stats.equiv.calls += 1;
            let started = Instant::now();
            let mut props: Vec<Lit> = Vec::new();
            for d in &derived {
                self.stats.equiv_derived += 1;
                let field = atoms.field().clone();
                let order = atoms.order();
                let poly = Polynomial::var(d.a, &field).sub(
                    &Polynomial::var(d.b, &field),
                    &field,
                    &order,
                );
                match atoms.intern_equation(&poly) {
                    Interned::True => {}
                    Interned::False => {
                        self.stats.equiv.conflicts += 1;
                        self.stats.equiv.time += started.elapsed();
                        return TheoryVerdict::Conflict(d.explanation.clone());
                    }
                    Interned::Atom(a) => match value_of(a) {
                        LBool::True => {}
                        LBool::False => {
                            let mut expl = d.explanation.clone();
                            expl.push(Lit::new(a, false));
                            self.stats.equiv.conflicts += 1;
                            self.stats.equiv.time += started.elapsed();
                            return TheoryVerdict::Conflict(expl);
                        }
                        LBool::Undef => {
                            let l = Lit::new(a, true);
                            if !props.contains(&l) {
                                self.prop_expl.insert(l, d.explanation.clone());
                                props.push(l);
                            }
                        }
                    },
                }
            }
            self.stats.equiv.time += started.elapsed();
            if !props.is_empty() {
                self.stats.equiv.propagations += props.len() as u64;
                return TheoryVerdict::Propagations(props);
            }
        }

        // 2. prime field linear module
        let mut linear_exhausted = false;
        if self.mask.has(ModuleMask::LINEAR) {
            self.stats.linear.calls += 1;
            let started = Instant::now();
            let outcome = self.linear.heavy_check();
            self.stats.linear.time += started.elapsed();
            match outcome {
                HeavyOutcome::Conflict(expl) => {
                    self.stats.linear.conflicts += 1;
                    return TheoryVerdict::Conflict(expl);
                }
                HeavyOutcome::Exhausted => {
                    self.stats.linear.skipped += 1;
                    linear_exhausted = true;
                }
                HeavyOutcome::SatCandidate => {
                    if mode == CheckMode::Final
                        && self
                            .linear
                            .spurious_definitions(atoms.monomial_defs())
                            .is_empty()
                    {
                        self.stats.linear_models += 1;
                        return TheoryVerdict::Sat(self.linear_model(atoms));
                    }
                    match self.linear_propagations(atoms, value_of) {
                        Ok(props) => {
                            if !props.is_empty() {
                                self.stats.linear.propagations += props.len() as u64;
                                return TheoryVerdict::Propagations(props);
                            }
                        }
                        Err(conflict) => {
                            self.stats.linear.conflicts += 1;
                            return TheoryVerdict::Conflict(conflict);
                        }
                    }
                }
            }
        }
        let _ = linear_exhausted;

        // 3. integer linear module
        if self.mask.has(ModuleMask::INT_LINEAR) {
            self.stats.int_linear.calls += 1;
            let started = Instant::now();
            let deadline = self.module_deadline(self.budgets.int_linear);
            let outcome = self.int_linear.check(&self.trail, atoms, deadline);
            self.stats.int_linear.time += started.elapsed();
            match outcome {
                IntLinearOutcome::Conflict(expl) => {
                    self.stats.int_linear.conflicts += 1;
                    return TheoryVerdict::Conflict(expl);
                }
                IntLinearOutcome::Unknown => self.stats.int_linear.skipped += 1,
                IntLinearOutcome::Consistent => {}
            }
        }

        // 4. linear clause inference
        if self.mask.has(ModuleMask::CLAUSE_INFER) {
            self.stats.clause_infer.calls += 1;
            let started = Instant::now();
            let clauses = self.clause_infer.infer(&self.trail, atoms);
            self.stats.clause_infer.time += started.elapsed();
            if !clauses.is_empty() {
                // a clause falsified by the current assignment is a conflict
                for cl in &clauses {
                    let falsified = !cl.lits.is_empty()
                        && cl.lits.iter().all(|l| value_of(l.atom()) == lbool_of(*l, false));
                    if falsified || cl.lits.is_empty() {
                        let mut expl = vec![cl.source];
                        expl.extend(cl.lits.iter().map(|l| l.negate()));
                        self.stats.clause_infer.conflicts += 1;
                        return TheoryVerdict::Conflict(expl);
                    }
                }
                for cl in &clauses {
                    self.clause_infer.mark_processed(cl.source.atom());
                }
                self.stats.clause_infer.clauses += clauses.len() as u64;
                return TheoryVerdict::NewClauses(clauses);
            }
        }

        if mode == CheckMode::Partial {
            return TheoryVerdict::Consistent;
        }

        // 5. Gröbner bases (leaves only)
        if self.mask.has(ModuleMask::GROEBNER) {
            self.stats.groebner.calls += 1;
            if mode == CheckMode::Partial {
                self.stats.groebner_partial_calls += 1;
            }
            let started = Instant::now();
            let budget = GbBudget {
                pair_limit: self.budgets.gb_pair_limit,
                deadline: self.module_deadline(self.budgets.groebner),
            };
            let order = self.gb_order;
            let outcome = self
                .groebner
                .check_consistency(&self.trail, atoms, &order, &budget);
            self.stats.groebner.time += started.elapsed();
            match outcome {
                GbCheck::Conflict {
                    explanation,
                    generators,
                    certificate,
                } => {
                    self.stats.groebner_certificates_checked += 1;
                    let field = atoms.field().clone();
                    if !groebner::verify_certificate(&generators, &certificate, &field, &order) {
                        self.stats.groebner_certificate_failures += 1;
                        debug_assert!(false, "certificate verification failed");
                        // fall through: treat as unknown rather than emit an
                        // unverified conflict
                    } else {
                        self.stats.groebner.conflicts += 1;
                        return TheoryVerdict::Conflict(explanation);
                    }
                }
                GbCheck::Unknown => {}
            }
        }

        // 6. real non-linear model search (leaves only)
        if self.mask.has(ModuleMask::REAL_NL) {
            self.stats.real_nl.calls += 1;
            if mode == CheckMode::Partial {
                self.stats.real_nl_partial_calls += 1;
            }
            let started = Instant::now();
            let deadline = self.module_deadline(self.budgets.real_nl);
            // route (i): the asserted literals themselves
            let constraints: Vec<(Polynomial, bool)> = self
                .trail
                .iter()
                .filter_map(|l| {
                    atoms
                        .theory(l.atom())
                        .map(|t| (t.expanded.clone(), l.is_positive()))
                })
                .collect();
            let trail = self.trail.clone();
            // external NRA backend first, when configured
            if let Some(backend) = &self.external_nra {
                let field = atoms.field().clone();
                let script = bridge::emit_nra_script(&constraints, &field, &atoms.vars);
                if let Some(resp) = bridge::run_backend(backend, &script) {
                    if let Some(values) = bridge::parse_nra_model(&resp) {
                        if let Some(model) =
                            self.real_nl.try_external_model(&values, &trail, atoms)
                        {
                            self.stats.real_nl.time += started.elapsed();
                            self.stats.real_nl_models += 1;
                            return TheoryVerdict::Sat(model);
                        }
                    }
                }
            }
            if let Some(model) =
                self.real_nl
                    .try_model(&constraints, &trail, atoms, &mut self.rng, deadline)
            {
                self.stats.real_nl.time += started.elapsed();
                self.stats.real_nl_models += 1;
                return TheoryVerdict::Sat(model);
            }
            // route (ii): the reduced basis of the asserted equations plus
            // the asserted disequations
            if self.mask.has(ModuleMask::GROEBNER) {
                let budget = GbBudget {
                    pair_limit: self.budgets.gb_pair_limit,
                    deadline,
                };
                let order = self.gb_order;
                if let Some(basis) = self.groebner.equation_basis(&trail, atoms, &order, &budget)
                {
                    let mut constraints: Vec<(Polynomial, bool)> =
                        basis.into_iter().map(|p| (p, true)).collect();
                    constraints.extend(self.trail.iter().filter(|l| !l.is_positive()).filter_map(
                        |l| {
                            atoms
                                .theory(l.atom())
                                .map(|t| (t.expanded.clone(), false))
                        },
                    ));
                    if let Some(model) = self.real_nl.try_model(
                        &constraints,
                        &trail,
                        atoms,
                        &mut self.rng,
                        deadline,
                    ) {
                        self.stats.real_nl.time += started.elapsed();
                        self.stats.real_nl_models += 1;
                        return TheoryVerdict::Sat(model);
                    }
                }
            }
            self.stats.real_nl.time += started.elapsed();
        }

        TheoryVerdict::Unknown
    }

    fn linear_model(&self, atoms: &AtomTable) -> BTreeMap<VarId, Fe> {
        let mut m = BTreeMap::new();
        for (v, _) in atoms.vars.iter() {
            if v.index() < self.linear.num_vars() {
                m.insert(v, self.linear.sigma(v).clone());
            }
        }
        m
    }

    /// Limited theory propagation from the linear state: disequations
    /// implied by fixed values, monomial values forced by their variables,
    /// and row-implied values when all but one variable is fixed.
    fn linear_propagations(
        &mut self,
        atoms: &mut AtomTable,
        value_of: &dyn Fn(AtomId) -> LBool,
    ) -> Result<Vec<Lit>, Vec<Lit>> {
        let field = atoms.field().clone();
        let mut props: Vec<Lit> = Vec::new();
        let mut seen: std::collections::BTreeSet<Lit> = std::collections::BTreeSet::new();
        let mut conflict: Option<Vec<Lit>> = None;

        let push = |lit: Lit,
                        expl: Vec<Lit>,
                        prop_expl: &mut HashMap<Lit, Vec<Lit>>,
                        props: &mut Vec<Lit>,
                        seen: &mut std::collections::BTreeSet<Lit>,
                        conflict: &mut Option<Vec<Lit>>| {
            match value_of(lit.atom()) {
                LBool::Undef => {
                    if seen.insert(lit) {
                        prop_expl.insert(lit, expl);
                        props.push(lit);
                    }
                }
                LBool::True | LBool::False => {
                    let holds = (value_of(lit.atom()) == LBool::True) == lit.is_positive();
                    if !holds && conflict.is_none() {
                        let mut e = expl;
                        e.push(lit.negate());
                        *conflict = Some(e);
                    }
                }
            }
        };

        // (a) x = k implies x != l for existing atoms on the same variable
        for v in 0..atoms.vars.len() {
            let v = VarId(v as u32);
            let Some(k) = self.linear.is_fixed(v).cloned() else {
                continue;
            };
            let fix_lit = self.linear.fixing_lit(v).unwrap();
            for &a in atoms.atoms_with_domain_var(v) {
                if value_of(a) != LBool::Undef {
                    continue;
                }
                let t = atoms.theory(a).unwrap();
                if t.value != k {
                    push(
                        Lit::new(a, false),
                        vec![fix_lit],
                        &mut self.prop_expl,
                        &mut props,
                        &mut seen,
                        &mut conflict,
                    );
                }
            }
        }

        // (b), (c): monomial variables forced by their variables
        let defs: Vec<(VarId, crate::poly::Monomial)> = atoms.monomial_defs().to_vec();
        for (v, m) in defs {
            // (b) some variable fixed to zero
            let zero_var = m
                .vars()
                .find(|w| self.linear.is_fixed(*w).map(|k| k.is_zero()) == Some(true));
            if let Some(w) = zero_var {
                let expl = vec![self.linear.fixing_lit(w).unwrap()];
                match atoms.intern_domain(v, &field.zero()) {
                    Interned::Atom(a) => push(
                        Lit::new(a, true),
                        expl,
                        &mut self.prop_expl,
                        &mut props,
                        &mut seen,
                        &mut conflict,
                    ),
                    Interned::True => {}
                    Interned::False => unreachable!("v = 0 cannot be trivially false"),
                }
                continue;
            }
            // (c) all variables fixed
            if m.vars().all(|w| self.linear.is_fixed(w).is_some()) {
                let mut val = field.one();
                let mut expl = Vec::new();
                for &(w, e) in m.exps() {
                    let k = self.linear.is_fixed(w).unwrap().clone();
                    val = field.mul(&val, &field.pow(&k, &num_bigint::BigUint::from(e)));
                    expl.push(self.linear.fixing_lit(w).unwrap());
                }
                match atoms.intern_domain(v, &val) {
                    Interned::Atom(a) => push(
                        Lit::new(a, true),
                        expl,
                        &mut self.prop_expl,
                        &mut props,
                        &mut seen,
                        &mut conflict,
                    ),
                    Interned::True => {}
                    Interned::False => unreachable!("v = k cannot be trivially false"),
                }
            }
        }

        // (d) rows with all but one variable fixed imply a value
        let rows: Vec<(VarId, Vec<(VarId, Fe)>, Fe)> = self
            .linear
            .rows_view()
            .map(|(_, b, t, c)| (b, t.to_vec(), c.clone()))
            .collect();
        for (basic, terms, constant) in rows {
            let mut unfixed: Vec<VarId> = Vec::new();
            if self.linear.is_fixed(basic).is_none() {
                unfixed.push(basic);
            }
            for &(w, _) in &terms {
                if self.linear.is_fixed(w).is_none() {
                    unfixed.push(w);
                }
            }
            if unfixed.len() != 1 {
                continue;
            }
            let target = unfixed[0];
            let mut expl = Vec::new();
            let mut rhs = constant.clone();
            let mut target_coeff = field.neg(&field.one()); // basic appears as -1 on the LHS
            for &(w, ref c) in &terms {
                if w == target {
                    target_coeff = c.clone();
                    continue;
                }
                let k = self.linear.is_fixed(w).unwrap().clone();
                rhs = field.add(&rhs, &field.mul(c, &k));
                expl.push(self.linear.fixing_lit(w).unwrap());
            }
            let val = if target == basic {
                rhs
            } else {
                // basic = target_coeff * target + rhs  =>  solve for target
                let k_basic = self.linear.is_fixed(basic).unwrap().clone();
                expl.push(self.linear.fixing_lit(basic).unwrap());
                field.mul(
                    &field.sub(&k_basic, &rhs),
                    &field.inverse(&target_coeff).expect("nonzero row coefficient"),
                )
            };
            match atoms.intern_domain(target, &val) {
                Interned::Atom(a) => push(
                    Lit::new(a, true),
                    expl,
                    &mut self.prop_expl,
                    &mut props,
                    &mut seen,
                    &mut conflict,
                ),
                Interned::True => {}
                Interned::False => unreachable!("x = k cannot be trivially false"),
            }
        }

        match conflict {
            Some(c) => Err(c),
            None => Ok(props),
        }
    }
}

fn lbool_of(l: Lit, truth: bool) -> LBool {
    if l.is_positive() == truth {
        LBool::True
    } else {
        LBool::False
    }
}
