//! CDCL SAT engine: two-watched-literal propagation, VSIDS decisions with
//! phase saving, 1UIP conflict analysis with backjumping, Luby restarts, and
//! dynamic atom/clause addition for the DPLL(T) loop.

use crate::frontend::atoms::AtomId;
use rand::Rng;

/// A boolean literal: atom id plus polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(atom: AtomId, positive: bool) -> Lit {
        Lit(atom << 1 | (!positive) as u32)
    }

    pub fn atom(self) -> AtomId {
        self.0 >> 1
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn negate(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for Lit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", if self.is_positive() { "+" } else { "-" }, self.atom())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LBool {
    True,
    False,
    Undef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reason {
    None,
    Decision,
    Clause(usize),
    /// Propagated by the theory solver; the explanation is queried lazily
    /// during conflict analysis.
    Theory,
}

#[derive(Debug)]
struct Clause {
    lits: Vec<Lit>,
    #[allow(dead_code)]
    learnt: bool,
}

#[derive(Debug, PartialEq, Eq)]
pub enum AddClause {
    Added,
    Duplicate,
    Tautology,
    /// Every literal is false under the current assignment; the caller must
    /// treat the stored clause as a conflict.
    Conflicting(usize),
    /// The empty clause (or one falsified at level 0) was derived.
    Unsat,
}

#[derive(Debug, Default, Clone)]
pub struct SatStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learnt_clauses: u64,
}

pub struct SatCore {
    clauses: Vec<Clause>,
    clause_keys: std::collections::HashSet<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    values: Vec<LBool>,
    levels: Vec<u32>,
    reasons: Vec<Reason>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    act_inc: f64,
    phase: Vec<bool>,
    num_assigned: usize,
    rng: rand_chacha::ChaCha8Rng,
    restarts_enabled: bool,
    conflicts_since_restart: u64,
    luby_index: u64,
    pub stats: SatStats,
}

const ACT_DECAY: f64 = 1.0 / 0.95;
const ACT_LIMIT: f64 = 1e100;
const RESTART_BASE: u64 = 100;

impl SatCore {
    pub fn new(seed: u64, restarts_enabled: bool) -> Self {
        use rand::SeedableRng;
        SatCore {
            clauses: Vec::new(),
            clause_keys: std::collections::HashSet::new(),
            watches: Vec::new(),
            values: Vec::new(),
            levels: Vec::new(),
            reasons: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            act_inc: 1.0,
            phase: Vec::new(),
            num_assigned: 0,
            rng: rand_chacha::ChaCha8Rng::seed_from_u64(seed),
            restarts_enabled,
            conflicts_since_restart: 0,
            luby_index: 0,
            stats: SatStats::default(),
        }
    }

    /// Grows the variable arrays to cover `n` atoms.
    pub fn ensure_atoms(&mut self, n: usize) {
        while self.values.len() < n {
            self.values.push(LBool::Undef);
            self.levels.push(0);
            self.reasons.push(Reason::None);
            self.activity.push(0.0);
            self.phase.push(self.rng.gen_bool(0.5));
            self.watches.push(Vec::new());
            self.watches.push(Vec::new());
        }
    }

    pub fn num_atoms(&self) -> usize {
        self.values.len()
    }

    pub fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    pub fn all_assigned(&self) -> bool {
        self.num_assigned == self.values.len()
    }

    pub fn value_atom(&self, a: AtomId) -> LBool {
        self.values[a as usize]
    }

    pub fn value(&self, l: Lit) -> LBool {
        match self.values[l.atom() as usize] {
            LBool::Undef => LBool::Undef,
            LBool::True => {
                if l.is_positive() {
                    LBool::True
                } else {
                    LBool::False
                }
            }
            LBool::False => {
                if l.is_positive() {
                    LBool::False
                } else {
                    LBool::True
                }
            }
        }
    }

    pub fn level_of(&self, a: AtomId) -> u32 {
        self.levels[a as usize]
    }

    pub fn trail(&self) -> &[Lit] {
        &self.trail
    }

    pub fn clause_lits(&self, c: usize) -> &[Lit] {
        &self.clauses[c].lits
    }

    fn assign(&mut self, l: Lit, reason: Reason) {
        debug_assert_eq!(self.value(l), LBool::Undef);
        let a = l.atom() as usize;
        self.values[a] = if l.is_positive() {
            LBool::True
        } else {
            LBool::False
        };
        self.levels[a] = self.decision_level();
        self.reasons[a] = reason;
        self.phase[a] = l.is_positive();
        self.trail.push(l);
        self.num_assigned += 1;
    }

    /// Enqueues a literal implied by `reason`. Returns false when the
    /// literal is already false (the caller must produce a conflict).
    pub fn enqueue(&mut self, l: Lit, reason: Reason) -> bool {
        match self.value(l) {
            LBool::True => true,
            LBool::False => false,
            LBool::Undef => {
                self.assign(l, reason);
                true
            }
        }
    }

    pub fn decide(&mut self, l: Lit) {
        self.trail_lim.push(self.trail.len());
        self.stats.decisions += 1;
        self.assign(l, Reason::Decision);
    }

    /// Highest-activity unassigned atom with its saved phase.
    pub fn pick_branch(&self) -> Option<Lit> {
        let mut best: Option<usize> = None;
        for a in 0..self.values.len() {
            if self.values[a] == LBool::Undef {
                match best {
                    None => best = Some(a),
                    Some(b) => {
                        if self.activity[a] > self.activity[b] {
                            best = Some(a);
                        }
                    }
                }
            }
        }
        best.map(|a| Lit::new(a as AtomId, self.phase[a]))
    }

    pub fn add_clause(&mut self, mut lits: Vec<Lit>, learnt: bool) -> AddClause {
        lits.sort();
        lits.dedup();
        for w in lits.windows(2) {
            if w[0].atom() == w[1].atom() {
                return AddClause::Tautology;
            }
        }
        if lits.is_empty() {
            return AddClause::Unsat;
        }
        if self.clause_keys.contains(&lits) {
            return AddClause::Duplicate;
        }
        self.clause_keys.insert(lits.clone());

        // order lits so the two best watch candidates come first:
        // non-false before false, false ones by descending level
        lits.sort_by_key(|&l| match self.value(l) {
            LBool::True => (0u8, 0i64),
            LBool::Undef => (1, 0),
            LBool::False => (2, -(self.levels[l.atom() as usize] as i64)),
        });

        if lits.len() == 1 {
            // unit input clauses are only added at the root level
            debug_assert_eq!(self.decision_level(), 0);
            let l = lits[0];
            let idx = self.clauses.len();
            self.clauses.push(Clause { lits, learnt });
            if learnt {
                self.stats.learnt_clauses += 1;
            }
            return match self.value(l) {
                LBool::True => AddClause::Added,
                LBool::Undef => {
                    self.assign(l, Reason::Clause(idx));
                    AddClause::Added
                }
                LBool::False => AddClause::Unsat,
            };
        }

        let idx = self.clauses.len();
        let (w0, w1) = (lits[0], lits[1]);
        self.clauses.push(Clause { lits, learnt });
        if learnt {
            self.stats.learnt_clauses += 1;
        }
        self.watches[w0.negate().code()].push(idx);
        self.watches[w1.negate().code()].push(idx);

        match (self.value(w0), self.value(w1)) {
            (LBool::False, _) => {
                // every literal false
                if self.decision_level() == 0 {
                    AddClause::Unsat
                } else {
                    AddClause::Conflicting(idx)
                }
            }
            (LBool::Undef, LBool::False) => {
                // unit under the current assignment
                self.assign(w0, Reason::Clause(idx));
                AddClause::Added
            }
            _ => AddClause::Added,
        }
    }

    /// Unit propagation to fixpoint. Returns the index of a falsified clause
    /// on conflict.
    pub fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let mut ws = std::mem::take(&mut self.watches[p.code()]);
            let mut i = 0;
            while i < ws.len() {
                let ci = ws[i];
                let false_lit = p.negate();
                {
                    let clause = &mut self.clauses[ci];
                    if clause.lits[0] == false_lit {
                        clause.lits.swap(0, 1);
                    }
                    debug_assert_eq!(clause.lits[1], false_lit);
                }
                if self.value(self.clauses[ci].lits[0]) == LBool::True {
                    i += 1;
                    continue;
                }
                // look for a replacement watch
                let mut moved = false;
                for k in 2..self.clauses[ci].lits.len() {
                    let lk = self.clauses[ci].lits[k];
                    if self.value(lk) != LBool::False {
                        self.clauses[ci].lits.swap(1, k);
                        self.watches[lk.negate().code()].push(ci);
                        ws.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                let first = self.clauses[ci].lits[0];
                match self.value(first) {
                    LBool::False => {
                        // conflict: restore the remaining watches
                        self.watches[p.code()] = ws;
                        self.qhead = self.trail.len();
                        return Some(ci);
                    }
                    LBool::Undef => {
                        self.assign(first, Reason::Clause(ci));
                        i += 1;
                    }
                    LBool::True => unreachable!(),
                }
            }
            self.watches[p.code()] = ws;
        }
        None
    }

    pub fn backjump(&mut self, level: u32) {
        while self.decision_level() > level {
            let start = self.trail_lim.pop().unwrap();
            while self.trail.len() > start {
                let l = self.trail.pop().unwrap();
                let a = l.atom() as usize;
                self.values[a] = LBool::Undef;
                self.reasons[a] = Reason::None;
                self.num_assigned -= 1;
            }
        }
        self.qhead = self.qhead.min(self.trail.len());
    }

    fn bump(&mut self, a: usize) {
        self.activity[a] += self.act_inc;
        if self.activity[a] > ACT_LIMIT {
            for act in &mut self.activity {
                *act *= 1.0 / ACT_LIMIT;
            }
            self.act_inc *= 1.0 / ACT_LIMIT;
        }
    }

    fn decay_activities(&mut self) {
        self.act_inc *= ACT_DECAY;
    }

    /// 1UIP conflict analysis. `conflict` is a set of currently-false
    /// literals; `explain` maps a theory-propagated literal to the true
    /// literals implying it. Returns the learnt clause (asserting literal
    /// first) and the backjump level, or None when the conflict is fatal
    /// (level 0).
    pub fn analyze<F>(&mut self, conflict: &[Lit], mut explain: F) -> Option<(Vec<Lit>, u32)>
    where
        F: FnMut(Lit) -> Vec<Lit>,
    {
        self.stats.conflicts += 1;
        self.conflicts_since_restart += 1;
        debug_assert!(conflict.iter().all(|&l| self.value(l) == LBool::False));

        // make sure the conflict involves the current decision level
        let max_level = conflict
            .iter()
            .map(|&l| self.levels[l.atom() as usize])
            .max()
            .unwrap_or(0);
        if max_level == 0 {
            return None;
        }
        if max_level < self.decision_level() {
            self.backjump(max_level);
        }

        let current = self.decision_level();
        let mut seen = vec![false; self.values.len()];
        let mut learnt: Vec<Lit> = vec![Lit::new(0, true)]; // slot for the asserting literal
        let mut counter = 0usize;
        let mut reason_lits: Vec<Lit> = conflict.to_vec();
        let mut idx = self.trail.len();
        let p;

        loop {
            for &q in &reason_lits {
                let a = q.atom() as usize;
                if !seen[a] && self.levels[a] > 0 {
                    seen[a] = true;
                    self.bump(a);
                    if self.levels[a] == current {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            // walk back to the next marked trail literal
            loop {
                idx -= 1;
                if seen[self.trail[idx].atom() as usize] {
                    break;
                }
            }
            let pl = self.trail[idx];
            seen[pl.atom() as usize] = false;
            counter -= 1;
            if counter == 0 {
                p = pl;
                break;
            }
            reason_lits = match self.reasons[pl.atom() as usize] {
                Reason::Clause(ci) => self.clauses[ci]
                    .lits
                    .iter()
                    .copied()
                    .filter(|&l| l != pl)
                    .collect(),
                Reason::Theory => explain(pl).into_iter().map(Lit::negate).collect(),
                Reason::Decision | Reason::None => unreachable!("reached a decision mid-analysis"),
            };
        }

        learnt[0] = p.negate();
        let backjump_level = learnt[1..]
            .iter()
            .map(|&l| self.levels[l.atom() as usize])
            .max()
            .unwrap_or(0);
        self.decay_activities();
        Some((learnt, backjump_level))
    }

    /// Learns the clause produced by `analyze` and asserts its first
    /// literal. The caller must already have backjumped to the clause's
    /// assertion level (so the theory trail can be rewound in between).
    pub fn learn_and_assert(&mut self, learnt: Vec<Lit>) {
        let level = self.decision_level();
        let asserting = learnt[0];
        if learnt.len() == 1 {
            let idx = self.clauses.len();
            self.clause_keys.insert(learnt.clone());
            self.clauses.push(Clause {
                lits: learnt,
                learnt: true,
            });
            self.stats.learnt_clauses += 1;
            if self.value(asserting) == LBool::Undef {
                self.assign(asserting, Reason::Clause(idx));
            }
            return;
        }
        let idx = self.clauses.len();
        self.clause_keys.insert({
            let mut k = learnt.clone();
            k.sort();
            k
        });
        // watch the asserting literal and one literal from the backjump level
        let mut lits = learnt;
        let snd = lits[1..]
            .iter()
            .position(|&l| self.levels[l.atom() as usize] == level)
            .map(|i| i + 1)
            .unwrap_or(1);
        lits.swap(1, snd);
        self.watches[lits[0].negate().code()].push(idx);
        self.watches[lits[1].negate().code()].push(idx);
        self.clauses.push(Clause { lits, learnt: true });
        self.stats.learnt_clauses += 1;
        if self.value(asserting) == LBool::Undef {
            self.assign(asserting, Reason::Clause(idx));
        }
    }

    /// True when the Luby-paced restart threshold has been reached.
    pub fn should_restart(&mut self) -> bool {
        if !self.restarts_enabled {
            return false;
        }
        let limit = luby(self.luby_index) * RESTART_BASE;
        if self.conflicts_since_restart >= limit {
            self.luby_index += 1;
            self.conflicts_since_restart = 0;
            self.stats.restarts += 1;
            true
        } else {
            false
        }
    }

    pub fn reason_of(&self, a: AtomId) -> Reason {
        self.reasons[a as usize]
    }
}

fn luby(i: u64) -> u64 {
    // 1,1,2,1,1,2,4,1,1,2,1,1,2,4,8,...
    let mut i = i + 1;
    loop {
        let mut k = 1u32;
        while (1u64 << k) - 1 < i {
            k += 1;
        }
        if (1u64 << k) - 1 == i {
            return 1 << (k - 1);
        }
        i -= (1u64 << (k - 1)) - 1;
    }
}
