//! Atom registry shared by the parser, the SAT core and the theory solver.
//!
//! Every theory atom denotes a polynomial equation `f = 0` over the original
//! variables, normalized monic so structurally equal equations share one id.
//! At creation time each atom is also decomposed into its domain-constraint
//! form `x = k` (introducing monomial-abstraction variables `v_m` and slack
//! variables `s_g` as needed), so during search all theory literals are
//! domain constraints, the slack definitions form the fixed linear system G,
//! and the monomial definitions form H.

use crate::field::{Fe, PrimeField};
use crate::poly::{Monomial, MonomialOrder, Polynomial, VarId, VarKind, VarTable};
use std::collections::HashMap;

pub type AtomId = u32;

/// Theory payload of an atom.
#[derive(Debug, Clone)]
pub struct TheoryAtom {
    /// Normalized equation over original variables (the atom's identity).
    pub expanded: Polynomial,
    /// Domain-constraint form: the atom holds iff `var = value`.
    pub var: VarId,
    pub value: Fe,
    /// Linear form over original and monomial variables (slacks substituted
    /// by their definitions); the atom holds iff this is zero.
    pub linear: Polynomial,
}

#[derive(Debug, Clone)]
pub enum AtomKind {
    Theory(TheoryAtom),
    /// Pure boolean selector introduced by clausification.
    Bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interned {
    /// The equation was identically true (zero polynomial).
    True,
    /// The equation was identically false (nonzero constant).
    False,
    Atom(AtomId),
}

#[derive(Debug, Default)]
pub struct AtomTable {
    field: Option<PrimeField>,
    pub vars: VarTable,
    atoms: Vec<AtomKind>,
    by_poly: HashMap<Polynomial, AtomId>,
    /// H: monomial definitions `v_m = m`, in creation order.
    monomials: Vec<(VarId, Monomial)>,
    monomial_index: HashMap<Monomial, VarId>,
    /// G: slack definitions `s_g = g`, in creation order.
    slacks: Vec<(VarId, Polynomial)>,
    slack_index: HashMap<Polynomial, VarId>,
    /// Per variable: its expansion over original variables (None for
    /// original and Rabinowitsch variables).
    expansions: Vec<Option<Polynomial>>,
    /// Per variable: atoms whose domain form mentions it.
    domain_index: Vec<Vec<AtomId>>,
    name_index: HashMap<String, VarId>,
}

impl AtomTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_field(&mut self, field: PrimeField) {
        debug_assert!(self.field.is_none());
        self.field = Some(field);
    }

    pub fn has_field(&self) -> bool {
        self.field.is_some()
    }

    pub fn field(&self) -> &PrimeField {
        self.field.as_ref().expect("field sort not declared yet")
    }

    pub fn order(&self) -> MonomialOrder {
        MonomialOrder::Grevlex
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn kind(&self, a: AtomId) -> &AtomKind {
        &self.atoms[a as usize]
    }

    pub fn theory(&self, a: AtomId) -> Option<&TheoryAtom> {
        match &self.atoms[a as usize] {
            AtomKind::Theory(t) => Some(t),
            AtomKind::Bool => None,
        }
    }

    pub fn declare_original(&mut self, name: &str) -> Option<VarId> {
        if self.name_index.contains_key(name) {
            return None;
        }
        let v = self.alloc_var(VarKind::Original(name.to_string()));
        self.name_index.insert(name.to_string(), v);
        Some(v)
    }

    pub fn lookup_name(&self, name: &str) -> Option<VarId> {
        self.name_index.get(name).copied()
    }

    fn alloc_var(&mut self, kind: VarKind) -> VarId {
        let v = self.vars.alloc(kind);
        self.expansions.push(None);
        self.domain_index.push(Vec::new());
        v
    }

    pub fn new_bool_atom(&mut self) -> AtomId {
        let id = self.atoms.len() as AtomId;
        self.atoms.push(AtomKind::Bool);
        id
    }

    /// Fresh Rabinowitsch variable (Gröbner-module disequation witness).
    pub fn new_rabinowitsch_var(&mut self) -> VarId {
        self.alloc_var(VarKind::Rabinowitsch)
    }

    pub fn monomial_defs(&self) -> &[(VarId, Monomial)] {
        &self.monomials
    }

    pub fn slack_defs(&self) -> &[(VarId, Polynomial)] {
        &self.slacks
    }

    pub fn monomial_var(&self, m: &Monomial) -> Option<VarId> {
        self.monomial_index.get(m).copied()
    }

    /// Definition of a slack variable, if `v` is one.
    pub fn slack_def(&self, v: VarId) -> Option<&Polynomial> {
        match self.vars.kind(v) {
            VarKind::Slack => self.expansion_linear(v),
            _ => None,
        }
    }

    fn expansion_linear(&self, v: VarId) -> Option<&Polynomial> {
        self.slacks
            .iter()
            .find(|(s, _)| *s == v)
            .map(|(_, g)| g)
    }

    pub fn atoms_with_domain_var(&self, v: VarId) -> &[AtomId] {
        &self.domain_index[v.index()]
    }

    /// Substitutes monomial and slack definitions until only original (and
    /// Rabinowitsch) variables remain.
    pub fn expand(&self, poly: &Polynomial) -> Polynomial {
        let field = self.field();
        let order = self.order();
        let mut out = poly.clone();
        loop {
            let mut target = None;
            'scan: for v in out.vars() {
                if self.expansions[v.index()].is_some() {
                    target = Some(v);
                    break 'scan;
                }
            }
            match target {
                None => return out,
                Some(v) => {
                    let rep = self.expansions[v.index()].clone().unwrap();
                    out = out.substitute(v, &rep, field, &order);
                }
            }
        }
    }

    /// Interns the equation `poly = 0`. Returns the canonical atom, or a
    /// truth constant when the equation is trivial. Newly created atoms may
    /// allocate monomial and slack variables as a side effect.
    pub fn intern_equation(&mut self, poly: &Polynomial) -> Interned {
        let field = self.field().clone();
        let order = self.order();
        let expanded = self.expand(poly).reordered(&order);
        if expanded.is_zero() {
            return Interned::True;
        }
        if expanded.is_constant() {
            return Interned::False;
        }
        let key = expanded.monic(&field);
        if let Some(&id) = self.by_poly.get(&key) {
            return Interned::Atom(id);
        }

        // abstract non-linear monomials
        let mut pairs = Vec::new();
        for (m, c) in key.terms() {
            if m.total_degree() >= 2 {
                let v = self.monomial_abstraction(m);
                pairs.push((Monomial::var(v), c.clone()));
            } else {
                pairs.push((m.clone(), c.clone()));
            }
        }
        let linear = Polynomial::from_terms(pairs, &field, &order).monic(&field);

        // split off the constant: linear = g + c, atom means g = -c
        let c = linear.constant_term(&field);
        let g = linear.sub(&Polynomial::constant(c.clone()), &field, &order);
        let value = field.neg(&c);
        let var = if g.terms().len() == 1
            && g.terms()[0].0.total_degree() == 1
            && g.terms()[0].1.is_one()
        {
            g.terms()[0].0.vars().next().unwrap()
        } else {
            self.slack_for(&g)
        };

        let id = self.atoms.len() as AtomId;
        self.atoms.push(AtomKind::Theory(TheoryAtom {
            expanded: key.clone(),
            var,
            value,
            linear,
        }));
        self.by_poly.insert(key, id);
        self.domain_index[var.index()].push(id);
        Interned::Atom(id)
    }

    fn monomial_abstraction(&mut self, m: &Monomial) -> VarId {
        if let Some(v) = self.monomial_index.get(m) {
            return *v;
        }
        let v = self.alloc_var(VarKind::Monomial(m.clone()));
        self.expansions[v.index()] = Some(Polynomial::from_terms(
            vec![(m.clone(), self.field().one())],
            self.field(),
            &self.order(),
        ));
        self.monomials.push((v, m.clone()));
        self.monomial_index.insert(m.clone(), v);
        v
    }

    fn slack_for(&mut self, g: &Polynomial) -> VarId {
        if let Some(v) = self.slack_index.get(g) {
            return *v;
        }
        let v = self.alloc_var(VarKind::Slack);
        let expanded = self.expand(g);
        self.expansions[v.index()] = Some(expanded);
        self.slacks.push((v, g.clone()));
        self.slack_index.insert(g.clone(), v);
        v
    }

    /// Domain-constraint atom `var = value`, interned through the usual
    /// normalization so it unifies with structurally equal atoms.
    pub fn intern_domain(&mut self, var: VarId, value: &Fe) -> Interned {
        let field = self.field().clone();
        let order = self.order();
        let poly = Polynomial::var(var, &field).sub(
            &Polynomial::constant(value.clone()),
            &field,
            &order,
        );
        self.intern_equation(&poly)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn table(p: u64) -> AtomTable {
        let mut t = AtomTable::new();
        t.set_field(PrimeField::new(BigUint::from(p)).unwrap());
        t
    }

    #[test]
    fn hash_consing_and_normalization() {
        let mut t = table(7);
        let x = t.declare_original("x").unwrap();
        let y = t.declare_original("y").unwrap();
        let f = t.field().clone();
        let ord = t.order();
        let px = Polynomial::var(x, &f);
        let py = Polynomial::var(y, &f);
        // x - y and 2y - 2x should intern to the same atom
        let a = t.intern_equation(&px.sub(&py, &f, &ord));
        let b = t.intern_equation(&py.sub(&px, &f, &ord).scale(&f.elem_u64(2), &f));
        assert_eq!(a, b);
        // trivial equations
        assert_eq!(t.intern_equation(&Polynomial::zero()), Interned::True);
        assert_eq!(
            t.intern_equation(&Polynomial::constant(f.elem_u64(3))),
            Interned::False
        );
    }

    #[test]
    fn abstraction_and_slack_structure() {
        let mut t = table(7);
        let x = t.declare_original("x").unwrap();
        let f = t.field().clone();
        let ord = t.order();
        let px = Polynomial::var(x, &f);
        // x^2 - 3 = 0 becomes the domain constraint v_{x^2} = 3 with one
        // monomial definition and no slack
        let x2m3 = px
            .mul(&px, &f, &ord)
            .sub(&Polynomial::constant(f.elem_u64(3)), &f, &ord);
        let Interned::Atom(a) = t.intern_equation(&x2m3) else {
            panic!()
        };
        let ta = t.theory(a).unwrap().clone();
        assert_eq!(t.monomial_defs().len(), 1);
        assert_eq!(t.slack_defs().len(), 0);
        assert_eq!(ta.value, f.elem_u64(3));
        assert!(matches!(t.vars.kind(ta.var), VarKind::Monomial(_)));
        // interning the domain form hits the same atom
        assert_eq!(t.intern_domain(ta.var, &ta.value), Interned::Atom(a));
        // expansion reconstructs the original polynomial
        assert_eq!(t.expand(&ta.linear), x2m3.monic(&f));
    }

    #[test]
    fn idempotent_abstraction() {
        let mut t = table(7);
        let x = t.declare_original("x").unwrap();
        let y = t.declare_original("y").unwrap();
        let f = t.field().clone();
        let ord = t.order();
        let px = Polynomial::var(x, &f);
        let py = Polynomial::var(y, &f);
        // x*y + x = 0
        let fxy = px.mul(&py, &f, &ord).add(&px, &f, &ord);
        let a = t.intern_equation(&fxy);
        let (nm, ns, na) = (t.monomial_defs().len(), t.slack_defs().len(), t.num_atoms());
        // re-interning changes nothing
        assert_eq!(t.intern_equation(&fxy), a);
        assert_eq!(t.monomial_defs().len(), nm);
        assert_eq!(t.slack_defs().len(), ns);
        assert_eq!(t.num_atoms(), na);
    }
}
