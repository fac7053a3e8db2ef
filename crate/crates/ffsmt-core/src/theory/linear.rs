//! Prime field linear module: incremental consistency of domain constraints
//! against the fixed linear system G, kept in a solved-form tableau.
//!
//! State: the solution map sigma (total over all variables), per-variable
//! fixed/disequation records with their asserting literals, and the tableau.
//! Invariant: sigma satisfies every tableau row and the domain constraints
//! of every non-basic variable. Assertions run lightweight checks; the heavy
//! check repairs basic-variable violations by pivoting (for violated
//! equations) or value search (for violated disequations).

use crate::field::{Fe, PrimeField};
use crate::poly::{Polynomial, VarId};
use crate::sat::Lit;
use num_traits::ToPrimitive;
use std::collections::BTreeSet;

#[derive(Debug, Clone)]
struct Row {
    basic: VarId,
    /// Right-hand side: `basic = sum coeff*var + constant`.
    terms: Vec<(VarId, Fe)>,
    constant: Fe,
}

#[derive(Debug)]
enum Undo {
    Fix(VarId),
    Diseq(VarId),
}

#[derive(Debug, PartialEq, Eq)]
pub enum HeavyOutcome {
    SatCandidate,
    Conflict(Vec<Lit>),
    /// Iteration budget exceeded; the orchestrator skips this module's
    /// verdict for the current check.
    Exhausted,
}

#[derive(Debug)]
pub struct LinearFf {
    field: PrimeField,
    rows: Vec<Row>,
    basic_row: Vec<Option<usize>>,
    /// Rows whose right-hand side mentions the variable.
    occurs: Vec<BTreeSet<usize>>,
    sigma: Vec<Fe>,
    fixed: Vec<Option<(Fe, Lit)>>,
    diseqs: Vec<Vec<(Fe, Lit)>>,
    undo: Vec<Undo>,
    /// Smallest-unforbidden-value search can be offset by a seed to vary
    /// repaired values between runs.
    value_offset: u64,
}

impl LinearFf {
    pub fn new(field: PrimeField, value_offset: u64) -> Self {
        LinearFf {
            field,
            rows: Vec::new(),
            basic_row: Vec::new(),
            occurs: Vec::new(),
            sigma: Vec::new(),
            fixed: Vec::new(),
            diseqs: Vec::new(),
            undo: Vec::new(),
            value_offset,
        }
    }

    pub fn ensure_vars(&mut self, n: usize) {
        while self.sigma.len() < n {
            self.sigma.push(self.field.zero());
            self.basic_row.push(None);
            self.occurs.push(BTreeSet::new());
            self.fixed.push(None);
            self.diseqs.push(Vec::new());
        }
    }

    pub fn sigma(&self, v: VarId) -> &Fe {
        &self.sigma[v.index()]
    }

    pub fn is_fixed(&self, v: VarId) -> Option<&Fe> {
        self.fixed[v.index()].as_ref().map(|(k, _)| k)
    }

    pub fn fixing_lit(&self, v: VarId) -> Option<Lit> {
        self.fixed[v.index()].as_ref().map(|&(_, l)| l)
    }

    pub fn num_vars(&self) -> usize {
        self.sigma.len()
    }

    pub fn mark(&self) -> usize {
        self.undo.len()
    }

    /// Rewinds fixed/disequation records; sigma is kept as a search hint.
    pub fn undo_to(&mut self, mark: usize) {
        while self.undo.len() > mark {
            match self.undo.pop().unwrap() {
                Undo::Fix(v) => self.fixed[v.index()] = None,
                Undo::Diseq(v) => {
                    self.diseqs[v.index()].pop();
                }
            }
        }
    }

    /// Installs a row `basic = g`, substituting current basic variables out
    /// of the right-hand side first.
    pub fn add_row(&mut self, basic: VarId, g: &Polynomial) {
        self.ensure_vars(self.sigma.len().max(basic.index() + 1));
        let mut terms: Vec<(VarId, Fe)> = Vec::new();
        let mut constant = self.field.zero();
        for (m, c) in g.terms() {
            if m.is_one() {
                constant = self.field.add(&constant, c);
            } else {
                let v = m.vars().next().unwrap();
                debug_assert_eq!(m.total_degree(), 1, "tableau rows must be linear");
                self.ensure_vars(v.index() + 1);
                terms.push((v, c.clone()));
            }
        }
        // substitute basic variables until the RHS mentions only non-basics
        loop {
            let Some(pos) = terms
                .iter()
                .position(|&(v, _)| self.basic_row[v.index()].is_some())
            else {
                break;
            };
            let (v, c) = terms.remove(pos);
            let ri = self.basic_row[v.index()].unwrap();
            let row = self.rows[ri].clone();
            for (w, cw) in &row.terms {
                terms.push((*w, self.field.mul(&c, cw)));
            }
            constant = self.field.add(&constant, &self.field.mul(&c, &row.constant));
            terms = combine(terms, &self.field);
        }
        terms = combine(terms, &self.field);
        let ri = self.rows.len();
        for &(v, _) in &terms {
            self.occurs[v.index()].insert(ri);
        }
        self.rows.push(Row {
            basic,
            terms,
            constant,
        });
        self.basic_row[basic.index()] = Some(ri);
        self.recompute_basic(ri);
    }

    fn eval_row(&self, ri: usize) -> Fe {
        let row = &self.rows[ri];
        let mut acc = row.constant.clone();
        for (v, c) in &row.terms {
            acc = self.field.add(&acc, &self.field.mul(c, &self.sigma[v.index()]));
        }
        acc
    }

    fn recompute_basic(&mut self, ri: usize) {
        let val = self.eval_row(ri);
        let b = self.rows[ri].basic;
        self.sigma[b.index()] = val;
    }

    /// Updates a non-basic variable's value and re-evaluates the basics that
    /// depend on it.
    fn set_nonbasic(&mut self, v: VarId, val: Fe) {
        debug_assert!(self.basic_row[v.index()].is_none());
        self.sigma[v.index()] = val;
        let rows: Vec<usize> = self.occurs[v.index()].iter().copied().collect();
        for ri in rows {
            self.recompute_basic(ri);
        }
    }

    /// Lightweight assertion of `v = k`. Detects trivial conflicts and keeps
    /// the non-basic invariant.
    pub fn assert_eq(&mut self, v: VarId, k: &Fe, lit: Lit) -> Result<(), Vec<Lit>> {
        self.ensure_vars(v.index() + 1);
        if let Some((k2, lit2)) = &self.fixed[v.index()] {
            if k2 != k {
                return Err(vec![lit, *lit2]);
            }
            return Ok(());
        }
        if let Some((_, dlit)) = self.diseqs[v.index()].iter().find(|(d, _)| d == k) {
            return Err(vec![lit, *dlit]);
        }
        self.fixed[v.index()] = Some((k.clone(), lit));
        self.undo.push(Undo::Fix(v));
        if self.basic_row[v.index()].is_none() {
            self.set_nonbasic(v, k.clone());
        }
        Ok(())
    }

    /// Lightweight assertion of `v != k`, repairing sigma for non-basics.
    pub fn assert_neq(&mut self, v: VarId, k: &Fe, lit: Lit) -> Result<(), Vec<Lit>> {
        self.ensure_vars(v.index() + 1);
        if let Some((k2, elit)) = &self.fixed[v.index()] {
            if k2 == k {
                return Err(vec![*elit, lit]);
            }
        }
        self.diseqs[v.index()].push((k.clone(), lit));
        self.undo.push(Undo::Diseq(v));
        if self.basic_row[v.index()].is_none() && self.sigma[v.index()] == *k {
            let forbidden: Vec<Fe> = self.diseqs[v.index()].iter().map(|(d, _)| d.clone()).collect();
            match self.find_value_avoiding(&forbidden) {
                Some(val) => self.set_nonbasic(v, val),
                None => {
                    // every residue is forbidden: the disequations alone conflict
                    return Err(self.diseqs[v.index()].iter().map(|&(_, l)| l).collect());
                }
            }
        }
        Ok(())
    }

    /// Smallest residue outside `forbidden` (offset deterministically by the
    /// seed). None when the forbidden set covers the whole field.
    pub fn find_value_avoiding(&self, forbidden: &[Fe]) -> Option<Fe> {
        let p = self.field.modulus();
        let attempts = (forbidden.len() as u64).saturating_add(1);
        let start = if self.value_offset == 0 {
            num_bigint::BigUint::ZERO
        } else {
            num_bigint::BigUint::from(self.value_offset) % p
        };
        let mut c = self.field.elem(start);
        let mut tried = num_bigint::BigUint::ZERO;
        for _ in 0..attempts {
            if tried >= *p {
                return None;
            }
            if !forbidden.contains(&c) {
                return Some(c);
            }
            c = self.field.add(&c, &self.field.one());
            tried += 1u32;
        }
        // attempts exceeded but pigeonhole says a candidate exists unless the
        // field is tiny and fully covered; finish the scan for tiny p
        while tried < *p {
            if !forbidden.contains(&c) {
                return Some(c);
            }
            c = self.field.add(&c, &self.field.one());
            tried += 1u32;
        }
        None
    }

    /// Debug-build check of the module's state invariant: sigma satisfies
    /// every tableau row and the domain constraints of every non-basic
    /// variable.
    #[cfg(debug_assertions)]
    fn assert_invariant(&self) {
        for ri in 0..self.rows.len() {
            let b = self.rows[ri].basic;
            debug_assert_eq!(
                self.sigma[b.index()],
                self.eval_row(ri),
                "sigma violates row {ri}"
            );
        }
        for v in 0..self.sigma.len() {
            if self.basic_row[v].is_some() {
                continue;
            }
            if let Some((k, _)) = &self.fixed[v] {
                debug_assert_eq!(self.sigma[v], *k, "non-basic fixed var {v} off value");
            }
            debug_assert!(
                !self.diseqs[v].iter().any(|(d, _)| *d == self.sigma[v]),
                "non-basic var {v} sits on a forbidden value"
            );
        }
    }

    #[cfg(not(debug_assertions))]
    fn assert_invariant(&self) {}

    fn violated(&self, ri: usize) -> Option<Violation> {
        let b = self.rows[ri].basic;
        let val = &self.sigma[b.index()];
        if let Some((k, _)) = &self.fixed[b.index()] {
            if k != val {
                return Some(Violation::Eq(k.clone()));
            }
        }
        if let Some((_, dlit)) = self.diseqs[b.index()].iter().find(|(d, _)| d == val) {
            return Some(Violation::Neq(*dlit));
        }
        None
    }

    /// The heavy consistency check: repairs or refutes basic-variable
    /// domain violations.
    pub fn heavy_check(&mut self) -> HeavyOutcome {
        let cap = 50 * (self.rows.len() + self.sigma.len()) + 1000;
        for _ in 0..cap {
            let Some((ri, viol)) = (0..self.rows.len()).find_map(|ri| {
                self.violated(ri).map(|v| (ri, v))
            }) else {
                return HeavyOutcome::SatCandidate;
            };
            match viol {
                Violation::Eq(k) => {
                    let row = &self.rows[ri];
                    let y = row
                        .terms
                        .iter()
                        .map(|&(v, _)| v)
                        .find(|v| self.fixed[v.index()].is_none());
                    match y {
                        Some(y) => {
                            let b = self.rows[ri].basic;
                            self.pivot(ri, y);
                            self.set_nonbasic(b, k);
                        }
                        None => {
                            let row = &self.rows[ri];
                            let mut expl: Vec<Lit> = row
                                .terms
                                .iter()
                                .map(|&(v, _)| self.fixed[v.index()].as_ref().unwrap().1)
                                .collect();
                            expl.push(self.fixed[row.basic.index()].as_ref().unwrap().1);
                            return HeavyOutcome::Conflict(expl);
                        }
                    }
                }
                Violation::Neq(vlit) => match self.repair_diseq(ri, vlit) {
                    RepairOutcome::Repaired => {}
                    RepairOutcome::Conflict(e) => return HeavyOutcome::Conflict(e),
                    RepairOutcome::Exhausted => return HeavyOutcome::Exhausted,
                },
            }
        }
        HeavyOutcome::Exhausted
    }

    fn repair_diseq(&mut self, ri: usize, vlit: Lit) -> RepairOutcome {
        let basic = self.rows[ri].basic;
        let basic_val = self.sigma[basic.index()].clone();
        let d_basic: Vec<Fe> = self.diseqs[basic.index()]
            .iter()
            .map(|(d, _)| d.clone())
            .collect();
        let free: Vec<(VarId, Fe)> = self.rows[ri]
            .terms
            .iter()
            .filter(|(v, _)| self.fixed[v.index()].is_none())
            .cloned()
            .collect();
        if free.is_empty() {
            let row = &self.rows[ri];
            let mut expl: Vec<Lit> = row
                .terms
                .iter()
                .map(|&(v, _)| self.fixed[v.index()].as_ref().unwrap().1)
                .collect();
            expl.push(vlit);
            return RepairOutcome::Conflict(expl);
        }
        // single-variable repair: pick l for y with l outside y's
        // disequations and the induced basic value outside the basic's
        for (y, a) in &free {
            let d_y: Vec<Fe> = self.diseqs[y.index()].iter().map(|(d, _)| d.clone()).collect();
            // basic = a*y + rest, rest = basic_val - a*sigma(y)
            let rest = self
                .field
                .sub(&basic_val, &self.field.mul(a, &self.sigma[y.index()]));
            let p = self.field.modulus();
            let attempts_needed = (d_y.len() + d_basic.len() + 1) as u64;
            let mut c = self.field.zero();
            let mut tried = num_bigint::BigUint::ZERO;
            while tried < *p && tried < num_bigint::BigUint::from(attempts_needed) {
                if !d_y.contains(&c) {
                    let induced = self.field.add(&self.field.mul(a, &c), &rest);
                    if !d_basic.contains(&induced) {
                        let y = *y;
                        self.set_nonbasic(y, c);
                        return RepairOutcome::Repaired;
                    }
                }
                c = self.field.add(&c, &self.field.one());
                tried += 1u32;
            }
        }
        // joint enumeration over the row's free variables (tiny fields only)
        let Some(p) = self.field.modulus().to_u64() else {
            return RepairOutcome::Exhausted;
        };
        if p > 101 || free.len() > 6 || (p as f64).powi(free.len() as i32) > 2e5 {
            return RepairOutcome::Exhausted;
        }
        let mut assignment: Vec<u64> = vec![0; free.len()];
        loop {
            // evaluate the candidate
            let mut ok = true;
            let mut val = self.rows[ri].constant.clone();
            for (slot, (y, a)) in assignment.iter().zip(&free) {
                let cand = self.field.elem_u64(*slot);
                if self.diseqs[y.index()].iter().any(|(d, _)| *d == cand) {
                    ok = false;
                    break;
                }
                val = self.field.add(&val, &self.field.mul(a, &cand));
            }
            if ok {
                for (v, c) in &self.rows[ri].terms {
                    if self.fixed[v.index()].is_some() {
                        val = self.field.add(&val, &self.field.mul(c, &self.sigma[v.index()]));
                    }
                }
                if !d_basic.contains(&val) {
                    let vals: Vec<(VarId, Fe)> = assignment
                        .iter()
                        .zip(&free)
                        .map(|(slot, (y, _))| (*y, self.field.elem_u64(*slot)))
                        .collect();
                    for (y, cand) in vals {
                        self.set_nonbasic(y, cand);
                    }
                    return RepairOutcome::Repaired;
                }
            }
            // next tuple
            let mut i = 0;
            loop {
                if i == assignment.len() {
                    // exhaustive search failed: the row plus the involved
                    // domain constraints are jointly unsatisfiable
                    let row = &self.rows[ri];
                    let mut expl: Vec<Lit> = row
                        .terms
                        .iter()
                        .filter(|(v, _)| self.fixed[v.index()].is_some())
                        .map(|&(v, _)| self.fixed[v.index()].as_ref().unwrap().1)
                        .collect();
                    expl.extend(self.diseqs[basic.index()].iter().map(|&(_, l)| l));
                    for (y, _) in &free {
                        expl.extend(self.diseqs[y.index()].iter().map(|&(_, l)| l));
                    }
                    return RepairOutcome::Conflict(expl);
                }
                assignment[i] += 1;
                if assignment[i] < p {
                    break;
                }
                assignment[i] = 0;
                i += 1;
            }
        }
    }

    /// Swaps basic variable of row `ri` with the non-basic `y` appearing in
    /// it, then substitutes `y` out of every other row.
    fn pivot(&mut self, ri: usize, y: VarId) {
        let row = self.rows[ri].clone();
        let a = row
            .terms
            .iter()
            .find(|&&(v, _)| v == y)
            .map(|(_, c)| c.clone())
            .expect("pivot variable must appear in the row");
        let inv_a = self.field.inverse(&a).expect("nonzero coefficient");
        let b = row.basic;

        // y = (1/a)*b - sum (c/a)*v - const/a
        let mut new_terms: Vec<(VarId, Fe)> = vec![(b, inv_a.clone())];
        for (v, c) in &row.terms {
            if *v == y {
                continue;
            }
            new_terms.push((*v, self.field.neg(&self.field.mul(c, &inv_a))));
        }
        let new_const = self.field.neg(&self.field.mul(&row.constant, &inv_a));

        for &(v, _) in &row.terms {
            self.occurs[v.index()].remove(&ri);
        }
        self.rows[ri] = Row {
            basic: y,
            terms: combine(new_terms, &self.field),
            constant: new_const,
        };
        for &(v, _) in &self.rows[ri].terms {
            self.occurs[v.index()].insert(ri);
        }
        self.basic_row[b.index()] = None;
        self.basic_row[y.index()] = Some(ri);

        // substitute y in the other rows
        let y_rows: Vec<usize> = self.occurs[y.index()]
            .iter()
            .copied()
            .filter(|&r| r != ri)
            .collect();
        let y_rhs = self.rows[ri].clone();
        for rj in y_rows {
            let old_members: Vec<VarId> =
                self.rows[rj].terms.iter().map(|&(v, _)| v).collect();
            let c_y = {
                let row_j = &self.rows[rj];
                row_j
                    .terms
                    .iter()
                    .find(|&&(v, _)| v == y)
                    .map(|(_, c)| c.clone())
                    .unwrap()
            };
            let row_j = &mut self.rows[rj];
            row_j.terms.retain(|&(v, _)| v != y);
            let mut terms = std::mem::take(&mut row_j.terms);
            for (w, cw) in &y_rhs.terms {
                terms.push((*w, self.field.mul(&c_y, cw)));
            }
            row_j.constant = self
                .field
                .add(&row_j.constant, &self.field.mul(&c_y, &y_rhs.constant));
            row_j.terms = combine(terms, &self.field);
            // cancellation during substitution can drop variables: sync the
            // column index against the actual membership
            let members: Vec<VarId> = self.rows[rj].terms.iter().map(|&(v, _)| v).collect();
            for v in old_members {
                if !members.contains(&v) {
                    self.occurs[v.index()].remove(&rj);
                }
            }
            for v in members {
                self.occurs[v.index()].insert(rj);
            }
        }
    }

    /// All rows with every variable of the RHS fixed except possibly one,
    /// for equation-implied value propagation. Returns
    /// (row index, basic var, unfixed RHS var if any).
    pub fn rows_view(&self) -> impl Iterator<Item = (usize, VarId, &[(VarId, Fe)], &Fe)> {
        self.rows
            .iter()
            .enumerate()
            .map(|(ri, r)| (ri, r.basic, r.terms.as_slice(), &r.constant))
    }

    pub fn diseq_lits(&self, v: VarId) -> &[(Fe, Lit)] {
        &self.diseqs[v.index()]
    }

    /// Checks the monomial definitions H under the current solution.
    pub fn spurious_definitions(
        &self,
        defs: &[(VarId, crate::poly::Monomial)],
    ) -> Vec<(VarId, crate::poly::Monomial)> {
        let mut bad = Vec::new();
        for (v, m) in defs {
            if v.index() >= self.sigma.len() {
                continue;
            }
            let mut prod = self.field.one();
            for &(w, e) in m.exps() {
                let base = if w.index() < self.sigma.len() {
                    self.sigma[w.index()].clone()
                } else {
                    self.field.zero()
                };
                prod = self
                    .field
                    .mul(&prod, &self.field.pow(&base, &num_bigint::BigUint::from(e)));
            }
            if prod != self.sigma[v.index()] {
                bad.push((*v, m.clone()));
            }
        }
        bad
    }
}

enum Violation {
    Eq(Fe),
    Neq(Lit),
}

enum RepairOutcome {
    Repaired,
    Conflict(Vec<Lit>),
    Exhausted,
}

fn combine(terms: Vec<(VarId, Fe)>, field: &PrimeField) -> Vec<(VarId, Fe)> {
    let mut map: std::collections::BTreeMap<VarId, Fe> = std::collections::BTreeMap::new();
    for (v, c) in terms {
        let entry = map.entry(v).or_insert_with(|| field.zero());
        *entry = field.add(entry, &c);
    }
    map.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}
