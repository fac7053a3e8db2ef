//! Equivalence inference: union-find over variables plus a signature table
//! on canonicalized polynomial definitions. When two definitions
//! `y = f(...)` and `y' = f'(...)` have the same body after replacing every
//! variable by its class representative, `y = y'` is derived.
//!
//! Explanations are extracted from a proof forest whose edges carry either
//! the asserting literal or, for internally derived equalities, the already
//! expanded literal set.

use crate::field::PrimeField;
use crate::poly::{MonomialOrder, Polynomial, VarId};
use crate::sat::Lit;
use std::collections::HashMap;

#[derive(Debug, Clone)]
enum EdgeReason {
    Literal(Lit),
    Derived(Vec<Lit>),
}

#[derive(Debug, Clone)]
struct Def {
    var: VarId,
    body: Polynomial,
    /// Asserting literal; None for up-front monomial definitions.
    lit: Option<Lit>,
    canon: Polynomial,
}

#[derive(Debug)]
enum Undo {
    Union {
        child_root: VarId,
        parent_root: VarId,
        old_rank: u32,
    },
    ForestEdge {
        node: VarId,
        old: Option<(VarId, usize)>,
    },
    SigInsert(Polynomial),
    SigReplace(Polynomial, usize),
    DefPushed,
    DefRecanon(usize, Polynomial),
    MonomialReg(VarId),
}

/// A derived equality with its proof-forest explanation.
#[derive(Debug, Clone)]
pub struct DerivedEq {
    pub a: VarId,
    pub b: VarId,
    pub explanation: Vec<Lit>,
}

#[derive(Debug)]
pub struct EquivInfer {
    field: PrimeField,
    order: MonomialOrder,
    parent: Vec<VarId>,
    rank: Vec<u32>,
    forest: Vec<Option<(VarId, usize)>>,
    edge_reasons: Vec<EdgeReason>,
    defs: Vec<Def>,
    sig: HashMap<Polynomial, usize>,
    undo: Vec<Undo>,
    registered_monomials: std::collections::BTreeSet<VarId>,
    pub derived_count: u64,
}

impl EquivInfer {
    pub fn new(field: PrimeField, order: MonomialOrder) -> Self {
        EquivInfer {
            field,
            order,
            parent: Vec::new(),
            rank: Vec::new(),
            forest: Vec::new(),
            edge_reasons: Vec::new(),
            defs: Vec::new(),
            sig: HashMap::new(),
            undo: Vec::new(),
            registered_monomials: std::collections::BTreeSet::new(),
            derived_count: 0,
        }
    }

    pub fn ensure_vars(&mut self, n: usize) {
        while self.parent.len() < n {
            let v = VarId(self.parent.len() as u32);
            self.parent.push(v);
            self.rank.push(0);
            self.forest.push(None);
        }
    }

    pub fn mark(&self) -> usize {
        self.undo.len()
    }

    pub fn undo_to(&mut self, mark: usize) {
        while self.undo.len() > mark {
            match self.undo.pop().unwrap() {
                Undo::Union {
                    child_root,
                    parent_root,
                    old_rank,
                } => {
                    self.parent[child_root.index()] = child_root;
                    self.rank[parent_root.index()] = old_rank;
                }
                Undo::ForestEdge { node, old } => self.forest[node.index()] = old,
                Undo::SigInsert(key) => {
                    self.sig.remove(&key);
                }
                Undo::SigReplace(key, idx) => {
                    self.sig.insert(key, idx);
                }
                Undo::DefPushed => {
                    self.defs.pop();
                }
                Undo::DefRecanon(idx, old) => self.defs[idx].canon = old,
                Undo::MonomialReg(v) => {
                    self.registered_monomials.remove(&v);
                }
            }
        }
    }

    /// Registers a global monomial definition `v = m` once; re-registered
    /// automatically after backtracking past the registration point.
    pub fn register_monomial_def(
        &mut self,
        v: VarId,
        body: &Polynomial,
        out: &mut Vec<DerivedEq>,
    ) {
        if self.registered_monomials.contains(&v) {
            return;
        }
        self.registered_monomials.insert(v);
        self.undo.push(Undo::MonomialReg(v));
        self.register_definition(v, body, None, out);
    }

    pub fn find(&self, v: VarId) -> VarId {
        let mut cur = v;
        while self.parent[cur.index()] != cur {
            cur = self.parent[cur.index()];
        }
        cur
    }

    fn canonicalize(&self, body: &Polynomial) -> Polynomial {
        let pairs = body
            .terms()
            .iter()
            .map(|(m, c)| {
                let exps = m
                    .exps()
                    .iter()
                    .map(|&(v, e)| (self.find(v), e))
                    .collect::<Vec<_>>();
                // renaming can merge variables within a monomial
                let mut merged: std::collections::BTreeMap<VarId, u32> =
                    std::collections::BTreeMap::new();
                for (v, e) in exps {
                    *merged.entry(v).or_insert(0) += e;
                }
                (
                    crate::poly::Monomial::from_exps(merged.into_iter().collect()),
                    c.clone(),
                )
            })
            .collect();
        Polynomial::from_terms(pairs, &self.field, &self.order)
    }

    /// Registers `y = body`. A collision in the signature table derives an
    /// equality between the defined variables.
    pub fn register_definition(
        &mut self,
        y: VarId,
        body: &Polynomial,
        lit: Option<Lit>,
        out: &mut Vec<DerivedEq>,
    ) {
        self.ensure_vars(y.index() + 1);
        for v in body.vars() {
            self.ensure_vars(v.index() + 1);
        }
        let canon = self.canonicalize(body);
        let idx = self.defs.len();
        self.defs.push(Def {
            var: y,
            body: body.clone(),
            lit,
            canon: canon.clone(),
        });
        self.undo.push(Undo::DefPushed);
        self.collide(idx, canon, out);
    }

    fn collide(&mut self, idx: usize, canon: Polynomial, out: &mut Vec<DerivedEq>) {
        match self.sig.get(&canon) {
            None => {
                self.sig.insert(canon.clone(), idx);
                self.undo.push(Undo::SigInsert(canon));
            }
            Some(&other) => {
                if other == idx {
                    return;
                }
                let (y, y2) = (self.defs[idx].var, self.defs[other].var);
                if self.find(y) == self.find(y2) {
                    return;
                }
                let expl = self.definition_match_explanation(idx, other);
                self.derived_count += 1;
                // merge internally so cascades fire within one call
                self.merge_with_reason(y, y2, EdgeReason::Derived(expl.clone()), out);
                out.push(DerivedEq {
                    a: y,
                    b: y2,
                    explanation: expl,
                });
            }
        }
    }

    /// Explanation for two definitions matching: both defining literals plus
    /// proof-forest explanations connecting the variables of the two bodies
    /// class by class.
    fn definition_match_explanation(&self, i: usize, j: usize) -> Vec<Lit> {
        let mut expl = Vec::new();
        if let Some(l) = self.defs[i].lit {
            expl.push(l);
        }
        if let Some(l) = self.defs[j].lit {
            expl.push(l);
        }
        // group variables of both bodies by representative; within each
        // class, explain the equality of all members to the first
        let mut classes: std::collections::BTreeMap<VarId, Vec<VarId>> =
            std::collections::BTreeMap::new();
        for v in self.defs[i].body.vars().iter().chain(self.defs[j].body.vars().iter()) {
            classes.entry(self.find(*v)).or_default().push(*v);
        }
        for (_, members) in classes {
            let first = members[0];
            for &m in &members[1..] {
                if m != first {
                    self.explain(first, m, &mut expl);
                }
            }
        }
        expl.sort();
        expl.dedup();
        expl
    }

    /// Asserted equality `a = b` justified by `lit`.
    pub fn merge_literal(&mut self, a: VarId, b: VarId, lit: Lit, out: &mut Vec<DerivedEq>) {
        self.ensure_vars(a.index().max(b.index()) + 1);
        self.merge_with_reason(a, b, EdgeReason::Literal(lit), out);
    }

    fn merge_with_reason(
        &mut self,
        a: VarId,
        b: VarId,
        reason: EdgeReason,
        out: &mut Vec<DerivedEq>,
    ) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return;
        }
        // proof forest: make a the root of its tree, then hang it on b
        self.reroot(a);
        let ridx = self.edge_reasons.len();
        self.edge_reasons.push(reason);
        self.undo.push(Undo::ForestEdge {
            node: a,
            old: self.forest[a.index()],
        });
        self.forest[a.index()] = Some((b, ridx));

        // union by rank
        let (child, parent) = if self.rank[ra.index()] < self.rank[rb.index()] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.undo.push(Undo::Union {
            child_root: child,
            parent_root: parent,
            old_rank: self.rank[parent.index()],
        });
        self.parent[child.index()] = parent;
        if self.rank[parent.index()] == self.rank[child.index()] {
            self.rank[parent.index()] += 1;
        }

        // eagerly re-canonicalize definitions touching the merged class
        let stale: Vec<usize> = (0..self.defs.len())
            .filter(|&i| {
                self.defs[i]
                    .canon
                    .vars()
                    .iter()
                    .any(|v| self.find(*v) != *v)
            })
            .collect();
        for i in stale {
            let old_canon = self.defs[i].canon.clone();
            let new_canon = self.canonicalize(&self.defs[i].body);
            if new_canon == old_canon {
                continue;
            }
            if self.sig.get(&old_canon) == Some(&i) {
                self.sig.remove(&old_canon);
                self.undo.push(Undo::SigReplace(old_canon.clone(), i));
            }
            self.undo.push(Undo::DefRecanon(i, old_canon));
            self.defs[i].canon = new_canon.clone();
            self.collide(i, new_canon, out);
        }
    }

    /// Reverses forest edges so `v` becomes the root of its proof tree.
    fn reroot(&mut self, v: VarId) {
        let mut chain = Vec::new();
        let mut cur = v;
        while let Some((next, ridx)) = self.forest[cur.index()] {
            chain.push((cur, next, ridx));
            cur = next;
        }
        for (from, to, ridx) in chain.into_iter().rev() {
            self.undo.push(Undo::ForestEdge {
                node: to,
                old: self.forest[to.index()],
            });
            self.forest[to.index()] = Some((from, ridx));
        }
        self.undo.push(Undo::ForestEdge {
            node: v,
            old: self.forest[v.index()],
        });
        self.forest[v.index()] = None;
    }

    /// Collects the literals along the proof-forest path between two
    /// equivalent variables.
    pub fn explain(&self, a: VarId, b: VarId, out: &mut Vec<Lit>) {
        debug_assert_eq!(self.find(a), self.find(b));
        if a == b {
            return;
        }
        // ancestors of a with depth
        let mut seen: HashMap<VarId, usize> = HashMap::new();
        let mut cur = a;
        let mut depth = 0;
        loop {
            seen.insert(cur, depth);
            match self.forest[cur.index()] {
                Some((next, _)) => {
                    cur = next;
                    depth += 1;
                }
                None => break,
            }
        }
        // walk from b until the common ancestor
        let mut lca = b;
        while !seen.contains_key(&lca) {
            let (next, ridx) = self.forest[lca.index()].expect("same component");
            self.push_reason(ridx, out);
            lca = next;
        }
        // then from a down to the lca
        let mut cur = a;
        while cur != lca {
            let (next, ridx) = self.forest[cur.index()].expect("same component");
            self.push_reason(ridx, out);
            cur = next;
        }
    }

    fn push_reason(&self, ridx: usize, out: &mut Vec<Lit>) {
        match &self.edge_reasons[ridx] {
            EdgeReason::Literal(l) => out.push(*l),
            EdgeReason::Derived(ls) => out.extend(ls.iter().copied()),
        }
    }

    /// Processes an asserted equation (already expanded over original
    /// variables): recognizes variable equalities and definitions.
    pub fn process_equation(
        &mut self,
        poly: &Polynomial,
        lit: Lit,
        out: &mut Vec<DerivedEq>,
    ) {
        for v in poly.vars() {
            self.ensure_vars(v.index() + 1);
        }
        // x - x' = 0 up to scale: merge the classes
        if poly.is_linear() && poly.terms().len() == 2 && poly.constant_term(&self.field).is_zero()
        {
            let (m1, c1) = &poly.terms()[0];
            let (m2, c2) = &poly.terms()[1];
            if self.field.add(c1, c2).is_zero() {
                let a = m1.vars().next().unwrap();
                let b = m2.vars().next().unwrap();
                self.merge_literal(a, b, lit, out);
            }
        }
        // y = f: every variable occurring only as a standalone linear
        // monomial yields a definition y := -(poly - c*y)/c
        let order = self.order;
        let field = self.field.clone();
        let candidates: Vec<VarId> = poly
            .vars()
            .into_iter()
            .filter(|&y| {
                poly.terms().iter().all(|(m, _)| {
                    m.degree_of(y) == 0 || (m.degree_of(y) == 1 && m.total_degree() == 1)
                })
            })
            .collect();
        for y in candidates {
            let cy = poly.coeff(&crate::poly::Monomial::var(y), &field);
            debug_assert!(!cy.is_zero());
            let rest = poly.sub(
                &Polynomial::var(y, &field).scale(&cy, &field),
                &field,
                &order,
            );
            let inv = field.inverse(&cy).unwrap();
            let body = rest.scale(&field.neg(&inv), &field);
            self.register_definition(y, &body, Some(lit), out);
        }
    }
}
