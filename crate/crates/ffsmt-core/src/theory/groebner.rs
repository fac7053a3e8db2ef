//! Gröbner bases with ideal-membership certificates.
//!
//! Buchberger's algorithm with the product and chain criteria and
//! sugar-based pair selection. Every basis element carries its expression as
//! a combination of the original generators, so when the reduced basis
//! collapses to `{1}` the cofactors are a directly checkable certificate
//! `sum g_i * f_i = 1`. Disequations enter through the Rabinowitsch
//! encoding `u*f - 1 = 0` with a fresh witness variable per literal.

use crate::field::PrimeField;
use crate::frontend::atoms::{AtomId, AtomTable};
use crate::poly::{reduce, MonomialOrder, Polynomial};
use crate::sat::Lit;
use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

/// A polynomial together with its representation in terms of the original
/// generators: `poly = sum cofactors[i] * generators[i]`.
#[derive(Debug, Clone)]
pub struct Tracked {
    pub poly: Polynomial,
    pub cofactors: Vec<Polynomial>,
    sugar: u32,
}

#[derive(Debug)]
pub enum GbOutcome {
    Basis(Vec<Tracked>),
    /// Pair limit or deadline exceeded.
    Budget,
}

#[derive(Debug, Clone, Copy)]
pub struct GbBudget {
    pub pair_limit: usize,
    pub deadline: Option<Instant>,
}

impl Default for GbBudget {
    fn default() -> Self {
        GbBudget {
            pair_limit: 10_000,
            deadline: None,
        }
    }
}

/// Reduced Gröbner basis with cofactor history.
pub fn buchberger(
    generators: &[Polynomial],
    field: &PrimeField,
    order: &MonomialOrder,
    budget: &GbBudget,
) -> GbOutcome {
    let n = generators.len();
    let mut basis: Vec<Tracked> = Vec::new();
    for (i, g) in generators.iter().enumerate() {
        if g.is_zero() {
            continue;
        }
        let g = g.reordered(order);
        let lc = g.leading().unwrap().1.clone();
        let inv = field.inverse(&lc).expect("nonzero leading coefficient");
        let mut cof = vec![Polynomial::zero(); n];
        cof[i] = Polynomial::constant(inv.clone());
        let sugar = g.total_degree();
        basis.push(Tracked {
            poly: g.scale(&inv, field),
            cofactors: cof,
            sugar,
        });
        if let Some(t) = constant_early_exit(&mut basis, field) {
            return GbOutcome::Basis(vec![t]);
        }
    }
    if basis.is_empty() {
        return GbOutcome::Basis(Vec::new());
    }

    let mut pairs: BTreeSet<(u32, u32, usize, usize)> = BTreeSet::new(); // (sugar, lcm deg, i, j)
    let mut processed: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            insert_pair(&mut pairs, &basis, i, j);
        }
    }

    let mut handled = 0usize;
    while let Some(&(s, d, i, j)) = pairs.iter().next() {
        pairs.remove(&(s, d, i, j));
        handled += 1;
        if handled > budget.pair_limit {
            return GbOutcome::Budget;
        }
        if let Some(dl) = budget.deadline {
            if Instant::now() > dl {
                return GbOutcome::Budget;
            }
        }
        processed.insert((i, j));

        let (lmi, _) = basis[i].poly.leading().unwrap();
        let (lmj, _) = basis[j].poly.leading().unwrap();
        // product criterion
        if lmi.coprime(lmj) {
            continue;
        }
        let lcm = lmi.lcm(lmj);
        // chain criterion
        let mut skip = false;
        for (k, t) in basis.iter().enumerate() {
            if k == i || k == j {
                continue;
            }
            let (lmk, _) = t.poly.leading().unwrap();
            if lmk.divides(&lcm)
                && processed.contains(&key(i, k))
                && processed.contains(&key(j, k))
            {
                skip = true;
                break;
            }
        }
        if skip {
            continue;
        }

        // S-polynomial (basis elements are monic)
        let ui = lcm.div(lmi).unwrap();
        let uj = lcm.div(lmj).unwrap();
        let one = field.one();
        let spoly = basis[i]
            .poly
            .mul_term(&ui, &one, field, order)
            .sub(&basis[j].poly.mul_term(&uj, &one, field, order), field, order);
        let mut cof: Vec<Polynomial> = Vec::with_capacity(n);
        for k in 0..n {
            let a = basis[i].cofactors[k].mul_term(&ui, &one, field, order);
            let b = basis[j].cofactors[k].mul_term(&uj, &one, field, order);
            cof.push(a.sub(&b, field, order));
        }
        let sugar = (basis[i].sugar + ui.total_degree()).max(basis[j].sugar + uj.total_degree());

        let reduced = reduce_tracked(
            Tracked {
                poly: spoly,
                cofactors: cof,
                sugar,
            },
            &basis,
            field,
            order,
        );
        if reduced.poly.is_zero() {
            continue;
        }
        let reduced = make_monic(reduced, field);
        basis.push(reduced);
        if let Some(t) = constant_early_exit(&mut basis, field) {
            return GbOutcome::Basis(vec![t]);
        }
        let new = basis.len() - 1;
        for i in 0..new {
            insert_pair(&mut pairs, &basis, i, new);
        }
    }

    GbOutcome::Basis(reduce_basis(basis, field, order))
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn insert_pair(
    pairs: &mut BTreeSet<(u32, u32, usize, usize)>,
    basis: &[Tracked],
    i: usize,
    j: usize,
) {
    let (lmi, _) = basis[i].poly.leading().unwrap();
    let (lmj, _) = basis[j].poly.leading().unwrap();
    let lcm = lmi.lcm(lmj);
    let sugar = (basis[i].sugar + lcm.div(lmi).unwrap().total_degree())
        .max(basis[j].sugar + lcm.div(lmj).unwrap().total_degree());
    pairs.insert((sugar, lcm.total_degree(), i, j));
}

fn make_monic(mut t: Tracked, field: &PrimeField) -> Tracked {
    let lc = t.poly.leading().unwrap().1.clone();
    if !lc.is_one() {
        let inv = field.inverse(&lc).unwrap();
        t.poly = t.poly.scale(&inv, field);
        for c in &mut t.cofactors {
            *c = c.scale(&inv, field);
        }
    }
    t
}

/// If some basis element is a nonzero constant the whole ideal is (1);
/// normalize it into the canonical singleton basis.
fn constant_early_exit(basis: &mut Vec<Tracked>, field: &PrimeField) -> Option<Tracked> {
    let idx = basis.iter().position(|t| t.poly.is_constant() && !t.poly.is_zero())?;
    let t = basis.swap_remove(idx);
    Some(make_monic(t, field))
}

fn reduce_tracked(
    t: Tracked,
    basis: &[Tracked],
    field: &PrimeField,
    order: &MonomialOrder,
) -> Tracked {
    let divisors: Vec<Polynomial> = basis.iter().map(|b| b.poly.clone()).collect();
    let (rem, div_cofs) = reduce(&t.poly, &divisors, field, order);
    let mut cof = t.cofactors;
    for (q, b) in div_cofs.iter().zip(basis) {
        if q.is_zero() {
            continue;
        }
        for (k, bc) in b.cofactors.iter().enumerate() {
            if bc.is_zero() {
                continue;
            }
            cof[k] = cof[k].sub(&q.mul(bc, field, order), field, order);
        }
    }
    Tracked {
        poly: rem,
        cofactors: cof,
        sugar: t.sugar,
    }
}

/// Minimizes and tail-reduces the basis into the unique reduced basis.
fn reduce_basis(
    mut basis: Vec<Tracked>,
    field: &PrimeField,
    order: &MonomialOrder,
) -> Vec<Tracked> {
    // minimize: drop elements whose leading monomial is divisible by another
    let mut keep: Vec<bool> = vec![true; basis.len()];
    for i in 0..basis.len() {
        if !keep[i] {
            continue;
        }
        let (lmi, _) = basis[i].poly.leading().unwrap();
        for j in 0..basis.len() {
            if i == j || !keep[j] {
                continue;
            }
            let (lmj, _) = basis[j].poly.leading().unwrap();
            if lmj.divides(lmi) && !(lmi == lmj && j > i) {
                keep[i] = false;
                break;
            }
        }
    }
    let mut kept: Vec<Tracked> = basis
        .drain(..)
        .zip(keep)
        .filter_map(|(t, k)| if k { Some(t) } else { None })
        .collect();

    // tail-reduce to fixpoint
    loop {
        let mut changed = false;
        for i in 0..kept.len() {
            let others: Vec<Tracked> = kept
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, t)| t.clone())
                .collect();
            let t = kept[i].clone();
            let before = t.poly.clone();
            let r = reduce_tracked(t, &others, field, order);
            if r.poly != before {
                kept[i] = make_monic(r, field);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    kept.sort_by(|a, b| order.cmp(b.poly.leading().unwrap().0, a.poly.leading().unwrap().0));
    kept
}

/// Checks a membership certificate exactly: `sum cofactors[i]*generators[i]`
/// must be the polynomial 1.
pub fn verify_certificate(
    generators: &[Polynomial],
    cofactors: &[Polynomial],
    field: &PrimeField,
    order: &MonomialOrder,
) -> bool {
    if generators.len() != cofactors.len() {
        return false;
    }
    let mut acc = Polynomial::zero();
    for (g, c) in generators.iter().zip(cofactors) {
        acc = acc.add(&c.mul(g, field, order), field, order);
    }
    acc == Polynomial::constant(field.one())
}

#[derive(Debug)]
pub enum GbCheck {
    Conflict {
        explanation: Vec<Lit>,
        generators: Vec<Polynomial>,
        certificate: Vec<Polynomial>,
    },
    Unknown,
}

/// The Gröbner consistency module. Stateless per call apart from the
/// Rabinowitsch witness cache (one variable per disequation literal).
#[derive(Debug, Default)]
pub struct Groebner {
    rab_cache: HashMap<AtomId, crate::poly::VarId>,
}

impl Groebner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Consistency of the asserted literals: equations enter as they are,
    /// disequations via Rabinowitsch. A `{1}` basis is a conflict whose
    /// explanation keeps exactly the literals with nonzero cofactor.
    pub fn check_consistency(
        &mut self,
        trail: &[Lit],
        atoms: &mut AtomTable,
        order: &MonomialOrder,
        budget: &GbBudget,
    ) -> GbCheck {
        let field = atoms.field().clone();
        let mut generators = Vec::new();
        let mut origin: Vec<Lit> = Vec::new();
        for &lit in trail {
            let Some(t) = atoms.theory(lit.atom()) else {
                continue;
            };
            let poly = t.expanded.clone();
            if lit.is_positive() {
                generators.push(poly.reordered(order));
            } else {
                let u = *self
                    .rab_cache
                    .entry(lit.atom())
                    .or_insert_with(|| atoms.new_rabinowitsch_var());
                let uf = Polynomial::var(u, &field)
                    .mul(&poly, &field, order)
                    .sub(&Polynomial::constant(field.one()), &field, order);
                generators.push(uf);
            }
            origin.push(lit);
        }
        if generators.is_empty() {
            return GbCheck::Unknown;
        }
        match buchberger(&generators, &field, order, budget) {
            GbOutcome::Budget => GbCheck::Unknown,
            GbOutcome::Basis(basis) => {
                if basis.len() == 1 && basis[0].poly == Polynomial::constant(field.one()) {
                    let certificate = basis[0].cofactors.clone();
                    let explanation: Vec<Lit> = origin
                        .iter()
                        .zip(&certificate)
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(&l, _)| l)
                        .collect();
                    GbCheck::Conflict {
                        explanation,
                        generators,
                        certificate,
                    }
                } else {
                    GbCheck::Unknown
                }
            }
        }
    }

    /// Reduced basis of the asserted equations only (no Rabinowitsch),
    /// used to hand simplified constraints to the real non-linear search.
    pub fn equation_basis(
        &self,
        trail: &[Lit],
        atoms: &AtomTable,
        order: &MonomialOrder,
        budget: &GbBudget,
    ) -> Option<Vec<Polynomial>> {
        let field = atoms.field().clone();
        let mut generators = Vec::new();
        for &lit in trail {
            if !lit.is_positive() {
                continue;
            }
            if let Some(t) = atoms.theory(lit.atom()) {
                generators.push(t.expanded.reordered(order));
            }
        }
        match buchberger(&generators, &field, order, budget) {
            GbOutcome::Budget => None,
            GbOutcome::Basis(basis) => Some(basis.into_iter().map(|t| t.poly).collect()),
        }
    }
}
