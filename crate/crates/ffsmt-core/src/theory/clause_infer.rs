//! Linear clause inference from non-linear asserted equations.
//!
//! Three deductions: splitting a product of two linear factors (found by
//! common-variable extraction, Tonelli-Shanks quadratic factoring, or a
//! perfect-square discriminant), expanding a syntactic product of roots into
//! a value disjunction, and pulling a common variable out of a sum. Each
//! source equation is processed at most once per solve.

use crate::frontend::atoms::{AtomTable, Interned};
use crate::poly::factor::{
    extract_common_variable, factor_quadratic_univariate, match_product_of_roots,
    perfect_square_root,
};
use crate::poly::{Monomial, Polynomial};
use crate::sat::Lit;
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InferenceRule {
    ProductSplit,
    RootsSplit,
    CommonFactor,
}

/// A clause of linear equations implied by a single non-linear source.
#[derive(Debug, Clone)]
pub struct InferredClause {
    pub source: Lit,
    pub lits: Vec<Lit>,
    pub rule: InferenceRule,
}

#[derive(Debug, Default)]
pub struct ClauseInfer {
    processed: BTreeSet<u32>,
    pub clauses_inferred: u64,
}

impl ClauseInfer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Marks a source as processed. Done after its clause was actually
    /// handed to the SAT engine, so a source whose clause turned into an
    /// immediate conflict is revisited after backtracking.
    pub fn mark_processed(&mut self, atom: u32) {
        self.processed.insert(atom);
    }

    pub fn is_processed(&self, atom: u32) -> bool {
        self.processed.contains(&atom)
    }

    /// Inference over the asserted (positive) non-linear equations.
    pub fn infer(&mut self, trail: &[Lit], atoms: &mut AtomTable) -> Vec<InferredClause> {
        let field = atoms.field().clone();
        let order = atoms.order();
        let mut out = Vec::new();
        let source_atoms: Vec<Lit> = trail
            .iter()
            .copied()
            .filter(|l| l.is_positive() && !self.processed.contains(&l.atom()))
            .collect();
        for lit in source_atoms {
            let Some(t) = atoms.theory(lit.atom()) else {
                continue;
            };
            let f = t.expanded.clone();
            if f.total_degree() < 2 {
                continue;
            }

            // common variable: f = x * g with g linear gives x=0 or g=0
            let common = extract_common_variable(&f, &field, &order)
                .filter(|(_, g)| g.is_linear() && !g.is_constant());
            if let Some((x, g)) = common {
                let xpoly = Polynomial::var(x, &field);
                let lits = vec![
                    intern_lit(&xpoly, atoms),
                    intern_lit(&g, atoms),
                ];
                if let Some(lits) = flatten(lits) {
                    out.push(InferredClause {
                        source: lit,
                        lits,
                        rule: InferenceRule::CommonFactor,
                    });
                }
                continue;
            }

            // product of roots: (x1-a1)...(xn-an) = 0
            if let Some(factors) = match_product_of_roots(&f, &field, &order) {
                let mut lits = Vec::new();
                for (x, alpha) in factors {
                    let p = Polynomial::var(x, &field).sub(
                        &Polynomial::constant(alpha),
                        &field,
                        &order,
                    );
                    lits.push(intern_lit(&p, atoms));
                }
                if let Some(mut lits) = flatten(lits) {
                    lits.sort();
                    lits.dedup();
                    let rule = if f.vars().len() == 1 {
                        InferenceRule::ProductSplit
                    } else {
                        InferenceRule::RootsSplit
                    };
                    out.push(InferredClause {
                        source: lit,
                        lits,
                        rule,
                    });
                }
                continue;
            }

            // quadratic in one variable with a perfect-square discriminant
            if let Some((lhs, rhs)) = split_quadratic(&f, atoms) {
                let lits = vec![intern_lit(&lhs, atoms), intern_lit(&rhs, atoms)];
                if let Some(mut lits) = flatten(lits) {
                    lits.sort();
                    lits.dedup();
                    out.push(InferredClause {
                        source: lit,
                        lits,
                        rule: InferenceRule::ProductSplit,
                    });
                }
            }
        }
        self.clauses_inferred += out.len() as u64;
        out
    }

    pub fn reset(&mut self) {
        self.processed.clear();
    }
}

/// Positive literal for `poly = 0`, or None markers folded by `flatten`.
fn intern_lit(poly: &Polynomial, atoms: &mut AtomTable) -> Option<Option<Lit>> {
    match atoms.intern_equation(poly) {
        Interned::Atom(a) => Some(Some(Lit::new(a, true))),
        // a factor that is identically zero makes the clause true: drop it
        Interned::True => None,
        // an identically-false factor disappears from the disjunction
        Interned::False => Some(None),
    }
}

fn flatten(lits: Vec<Option<Option<Lit>>>) -> Option<Vec<Lit>> {
    let mut out = Vec::new();
    for l in lits {
        match l {
            None => return None, // clause trivially true
            Some(None) => {}
            Some(Some(l)) => out.push(l),
        }
    }
    Some(out)
}

/// Tries to factor a quadratic `q*x^2 + l*x + r` (constant `q`) into two
/// linear polynomials via its discriminant.
fn split_quadratic(f: &Polynomial, atoms: &AtomTable) -> Option<(Polynomial, Polynomial)> {
    let field = atoms.field().clone();
    let order = atoms.order();
    let vars = f.vars();
    if vars.len() == 1 {
        // pure univariate quadratic: direct root split
        let x = *vars.iter().next().unwrap();
        if f.degree_of(x) != 2 {
            return None;
        }
        let (r1, r2) = factor_quadratic_univariate(f, &field)?;
        let px = Polynomial::var(x, &field);
        return Some((
            px.sub(&Polynomial::constant(r1), &field, &order),
            px.sub(&Polynomial::constant(r2), &field, &order),
        ));
    }
    for &x in &vars {
        if f.degree_of(x) != 2 {
            continue;
        }
        // f = q*x^2 + l(y)*x + r(y); require constant q and linear l, r
        let mut q = field.zero();
        let mut l = Polynomial::zero();
        let mut r = Polynomial::zero();
        let mut shape_ok = true;
        for (m, c) in f.terms() {
            match m.degree_of(x) {
                2 => {
                    if m.total_degree() != 2 {
                        shape_ok = false;
                        break;
                    }
                    q = c.clone();
                }
                1 => {
                    let rest = m.div(&Monomial::var(x)).unwrap();
                    l = l.add(
                        &Polynomial::from_terms(vec![(rest, c.clone())], &field, &order),
                        &field,
                        &order,
                    );
                }
                0 => {
                    r = r.add(
                        &Polynomial::from_terms(vec![(m.clone(), c.clone())], &field, &order),
                        &field,
                        &order,
                    );
                }
                _ => {
                    shape_ok = false;
                    break;
                }
            }
        }
        if !shape_ok || q.is_zero() || !l.is_linear() || r.total_degree() > 2 {
            continue;
        }
        // discriminant l^2 - 4qr must be the square of a linear polynomial
        let disc = l.mul(&l, &field, &order).sub(
            &r.scale(&field.mul(&field.elem_u64(4), &q), &field),
            &field,
            &order,
        );
        let Some(d) = perfect_square_root(&disc, &field, &order) else {
            continue;
        };
        // roots (-l +- d) / (2q)
        let inv2q = field
            .inverse(&field.mul(&field.elem_u64(2), &q))
            .expect("2q nonzero");
        let neg_l = l.neg(&field);
        let root1 = neg_l.add(&d, &field, &order).scale(&inv2q, &field);
        let root2 = neg_l.sub(&d, &field, &order).scale(&inv2q, &field);
        let px = Polynomial::var(x, &field);
        let f1 = px.sub(&root1, &field, &order);
        let f2 = px.sub(&root2, &field, &order);
        // contract: q * f1 * f2 must reproduce f
        let prod = f1.mul(&f2, &field, &order).scale(&q, &field);
        if prod == f.reordered(&order) {
            return Some((f1, f2));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::atoms::AtomTable;
    use crate::poly::VarId;
    use crate::PrimeField;
    use num_bigint::BigUint;

    fn table(p: u64, names: &[&str]) -> AtomTable {
        let mut t = AtomTable::new();
        t.set_field(PrimeField::new(BigUint::from(p)).unwrap());
        for n in names {
            t.declare_original(n);
        }
        t
    }

    fn assert_eq_poly(atoms: &mut AtomTable, poly: &Polynomial) -> Lit {
        match atoms.intern_equation(poly) {
            Interned::Atom(a) => Lit::new(a, true),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn factored_sum_yields_clause() {
        let mut atoms = table(7, &["x", "y"]);
        let field = atoms.field().clone();
        let ord = atoms.order();
        let x = Polynomial::var(VarId(0), &field);
        let y = Polynomial::var(VarId(1), &field);
        // x*y + x = 0 -> (x = 0 \/ y + 1 = 0)
        let f = x.mul(&y, &field, &ord).add(&x, &field, &ord);
        let src = assert_eq_poly(&mut atoms, &f);
        let mut ci = ClauseInfer::new();
        let clauses = ci.infer(&[src], &mut atoms);
        assert_eq!(clauses.len(), 1);
        assert_eq!(clauses[0].rule, InferenceRule::CommonFactor);
        assert_eq!(clauses[0].lits.len(), 2);
        // literal atoms are x = 0 and y = -1
        for l in &clauses[0].lits {
            assert!(l.is_positive());
            let t = atoms.theory(l.atom()).unwrap();
            assert!(t.expanded.is_linear());
        }
    }

    #[test]
    fn binary_encoding_yields_value_split() {
        let mut atoms = table(7, &["x"]);
        let field = atoms.field().clone();
        let ord = atoms.order();
        let x = Polynomial::var(VarId(0), &field);
        let f = x.mul(&x.sub(&Polynomial::constant(field.one()), &field, &ord), &field, &ord);
        let src = assert_eq_poly(&mut atoms, &f);
        let mut ci = ClauseInfer::new();
        let clauses = ci.infer(&[src], &mut atoms);
        assert_eq!(clauses.len(), 1);
        let vals: Vec<_> = clauses[0]
            .lits
            .iter()
            .map(|l| atoms.theory(l.atom()).unwrap().value.clone())
            .collect();
        assert_eq!(vals, vec![field.elem_u64(0), field.elem_u64(1)]);
    }

    #[test]
    fn irreducible_quadratic_yields_nothing() {
        let mut atoms = table(7, &["x"]);
        let field = atoms.field().clone();
        let ord = atoms.order();
        let x = Polynomial::var(VarId(0), &field);
        // x^2 + 1 is irreducible mod 7
        let f = x.mul(&x, &field, &ord).add(&Polynomial::constant(field.one()), &field, &ord);
        let src = assert_eq_poly(&mut atoms, &f);
        let mut ci = ClauseInfer::new();
        assert!(ci.infer(&[src], &mut atoms).is_empty());
    }

    #[test]
    fn difference_of_squares_splits() {
        let mut atoms = table(7, &["x", "y"]);
        let field = atoms.field().clone();
        let ord = atoms.order();
        let x = Polynomial::var(VarId(0), &field);
        let y = Polynomial::var(VarId(1), &field);
        let f = x.mul(&x, &field, &ord).sub(&y.mul(&y, &field, &ord), &field, &ord);
        let src = assert_eq_poly(&mut atoms, &f);
        let mut ci = ClauseInfer::new();
        let clauses = ci.infer(&[src], &mut atoms);
        assert_eq!(clauses.len(), 1);
        assert_eq!(clauses[0].rule, InferenceRule::ProductSplit);
        assert_eq!(clauses[0].lits.len(), 2);
    }

    #[test]
    fn cache_prevents_reprocessing() {
        let mut atoms = table(7, &["x", "y"]);
        let field = atoms.field().clone();
        let ord = atoms.order();
        let x = Polynomial::var(VarId(0), &field);
        let y = Polynomial::var(VarId(1), &field);
        let f = x.mul(&y, &field, &ord).add(&x, &field, &ord);
        let src = assert_eq_poly(&mut atoms, &f);
        let mut ci = ClauseInfer::new();
        assert_eq!(ci.infer(&[src], &mut atoms).len(), 1);
        ci.mark_processed(src.atom());
        assert!(ci.infer(&[src], &mut atoms).is_empty());
    }

    #[test]
    fn implication_validity_on_random_sources() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(0xc1a);
        for p in [5u64, 13] {
            for _ in 0..120 {
                let mut atoms = table(p, &["x", "y"]);
                let field = atoms.field().clone();
                let ord = atoms.order();
                // random product of two linear factors over x, y
                let lin = |rng: &mut StdRng| {
                    let mut g = Polynomial::zero();
                    for v in 0..2u32 {
                        let c = field.elem_u64(rng.gen_range(0..p));
                        g = g.add(
                            &Polynomial::var(VarId(v), &field).scale(&c, &field),
                            &field,
                            &ord,
                        );
                    }
                    g.add(&Polynomial::constant(field.elem_u64(rng.gen_range(0..p))), &field, &ord)
                };
                let f = lin(&mut rng).mul(&lin(&mut rng), &field, &ord);
                if f.is_zero() || f.is_constant() || f.total_degree() < 2 {
                    continue;
                }
                let src = assert_eq_poly(&mut atoms, &f);
                let mut ci = ClauseInfer::new();
                let clauses = ci.infer(&[src], &mut atoms);
                for cl in &clauses {
                    // source = 0 implies the clause, for every assignment
                    for a in 0..p {
                        for b in 0..p {
                            let assign = |v: VarId| {
                                Some(field.elem_u64(if v.index() == 0 { a } else { b }))
                            };
                            let src_val = f.evaluate(&field, assign).unwrap();
                            if !src_val.is_zero() {
                                continue;
                            }
                            let any = cl.lits.iter().any(|l| {
                                let t = atoms.theory(l.atom()).unwrap();
                                t.expanded.evaluate(&field, assign).unwrap().is_zero()
                                    == l.is_positive()
                            });
                            assert!(any, "clause not implied at ({a},{b}): f={f:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn univariate_split_is_equivalent_to_source() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(0xe0);
        for p in [5u64, 13] {
            for _ in 0..80 {
                let mut atoms = table(p, &["x"]);
                let field = atoms.field().clone();
                let ord = atoms.order();
                let x = Polynomial::var(VarId(0), &field);
                let a = rng.gen_range(0..p);
                let b = rng.gen_range(0..p);
                let f = x
                    .sub(&Polynomial::constant(field.elem_u64(a)), &field, &ord)
                    .mul(&x.sub(&Polynomial::constant(field.elem_u64(b)), &field, &ord), &field, &ord);
                let src = assert_eq_poly(&mut atoms, &f);
                let mut ci = ClauseInfer::new();
                let clauses = ci.infer(&[src], &mut atoms);
                assert_eq!(clauses.len(), 1);
                let cl = &clauses[0];
                for v in 0..p {
                    let assign = |_| Some(field.elem_u64(v));
                    let src_holds = f.evaluate(&field, assign).unwrap().is_zero();
                    let clause_holds = cl.lits.iter().any(|l| {
                        let t = atoms.theory(l.atom()).unwrap();
                        t.expanded.evaluate(&field, assign).unwrap().is_zero() == l.is_positive()
                    });
                    assert_eq!(src_holds, clause_holds, "not equivalent at {v}");
                }
            }
        }
    }
}
