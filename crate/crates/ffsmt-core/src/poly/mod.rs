//! Sparse multivariate polynomials over `Z_p`.
//!
//! Terms are kept sorted descending under an explicitly supplied
//! [`MonomialOrder`], so the leading term is `terms[0]`. The order is never
//! global state: every operation that needs it takes it as an argument.

pub mod factor;
pub mod monomial;
pub mod order;

pub use monomial::{Monomial, VarId, VarKind, VarTable};
pub use order::MonomialOrder;

use crate::field::{Fe, PrimeField};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolyError {
    /// A variable of the polynomial is missing from the evaluation map.
    UnboundVariable(VarId),
}

impl fmt::Display for PolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyError::UnboundVariable(v) => write!(f, "unbound variable #{}", v.0),
        }
    }
}

impl std::error::Error for PolyError {}

/// Sparse polynomial: nonzero coefficients only; the zero polynomial has no
/// terms. Two polynomials compare equal iff their term maps are equal, which
/// is independent of the order they were built under.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    terms: Vec<(Monomial, Fe)>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { terms: Vec::new() }
    }

    pub fn constant(c: Fe) -> Self {
        if c.is_zero() {
            Polynomial::zero()
        } else {
            Polynomial {
                terms: vec![(Monomial::one(), c)],
            }
        }
    }

    pub fn var(v: VarId, field: &PrimeField) -> Self {
        Polynomial {
            terms: vec![(Monomial::var(v), field.one())],
        }
    }

    /// Builds from unsorted (monomial, coefficient) pairs, merging duplicates
    /// and dropping zeros.
    pub fn from_terms(
        pairs: Vec<(Monomial, Fe)>,
        field: &PrimeField,
        order: &MonomialOrder,
    ) -> Self {
        let mut map: std::collections::HashMap<Monomial, Fe> =
            std::collections::HashMap::with_capacity(pairs.len());
        for (m, c) in pairs {
            if c.is_zero() {
                continue;
            }
            match map.entry(m) {
                std::collections::hash_map::Entry::Occupied(mut e) => {
                    let sum = field.add(e.get(), &c);
                    if sum.is_zero() {
                        e.remove();
                    } else {
                        *e.get_mut() = sum;
                    }
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(c);
                }
            }
        }
        let mut terms: Vec<(Monomial, Fe)> = map.into_iter().collect();
        terms.sort_by(|a, b| order.cmp(&b.0, &a.0));
        Polynomial { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Monomial, Fe)] {
        &self.terms
    }

    /// Leading (monomial, coefficient) under the construction order.
    pub fn leading(&self) -> Option<(&Monomial, &Fe)> {
        self.terms.first().map(|(m, c)| (m, c))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(m, _)| m.total_degree())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_of(&self, v: VarId) -> u32 {
        self.terms
            .iter()
            .map(|(m, _)| m.degree_of(v))
            .max()
            .unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.iter().all(|(m, _)| m.is_one())
    }

    pub fn constant_value(&self, field: &PrimeField) -> Option<Fe> {
        if self.is_zero() {
            Some(field.zero())
        } else if self.is_constant() {
            Some(self.terms[0].1.clone())
        } else {
            None
        }
    }

    /// Constant term (coefficient of the monomial 1).
    pub fn constant_term(&self, field: &PrimeField) -> Fe {
        self.terms
            .iter()
            .find(|(m, _)| m.is_one())
            .map(|(_, c)| c.clone())
            .unwrap_or_else(|| field.zero())
    }

    /// True when every monomial has total degree <= 1.
    pub fn is_linear(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.total_degree() <= 1)
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        let mut s = BTreeSet::new();
        for (m, _) in &self.terms {
            s.extend(m.vars());
        }
        s
    }

    /// Coefficient of a specific monomial (zero if absent).
    pub fn coeff(&self, m: &Monomial, field: &PrimeField) -> Fe {
        self.terms
            .iter()
            .find(|(mm, _)| mm == m)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(|| field.zero())
    }

    pub fn add(&self, other: &Polynomial, field: &PrimeField, order: &MonomialOrder) -> Polynomial {
        let mut pairs = self.terms.clone();
        pairs.extend(other.terms.iter().cloned());
        Polynomial::from_terms(pairs, field, order)
    }

    pub fn sub(&self, other: &Polynomial, field: &PrimeField, order: &MonomialOrder) -> Polynomial {
        self.add(&other.neg(field), field, order)
    }

    pub fn neg(&self, field: &PrimeField) -> Polynomial {
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), field.neg(c)))
                .collect(),
        }
    }

    pub fn scale(&self, k: &Fe, field: &PrimeField) -> Polynomial {
        if k.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), field.mul(c, k)))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial, field: &PrimeField, order: &MonomialOrder) -> Polynomial {
        let mut pairs = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                pairs.push((ma.mul(mb), field.mul(ca, cb)));
            }
        }
        Polynomial::from_terms(pairs, field, order)
    }

    /// Multiplies by a single term.
    pub fn mul_term(
        &self,
        m: &Monomial,
        c: &Fe,
        field: &PrimeField,
        order: &MonomialOrder,
    ) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        let terms: Vec<(Monomial, Fe)> = self
            .terms
            .iter()
            .map(|(mm, cc)| (mm.mul(m), field.mul(cc, c)))
            .collect();
        // multiplying every monomial by the same factor preserves relative
        // order, so no re-sort is needed
        let _ = order;
        Polynomial { terms }
    }

    /// Rescales so the leading coefficient is 1. No-op on zero.
    pub fn monic(&self, field: &PrimeField) -> Polynomial {
        match self.leading() {
            Some((_, c)) if !c.is_one() => {
                let inv = field.inverse(c).expect("nonzero leading coefficient");
                self.scale(&inv, field)
            }
            _ => self.clone(),
        }
    }

    /// Re-sorts the terms under a different order.
    pub fn reordered(&self, order: &MonomialOrder) -> Polynomial {
        let mut terms = self.terms.clone();
        terms.sort_by(|a, b| order.cmp(&b.0, &a.0));
        Polynomial { terms }
    }

    /// Evaluates at a total assignment.
    pub fn evaluate<F>(&self, field: &PrimeField, lookup: F) -> Result<Fe, PolyError>
    where
        F: Fn(VarId) -> Option<Fe>,
    {
        let mut acc = field.zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for &(v, e) in m.exps() {
                let val = lookup(v).ok_or(PolyError::UnboundVariable(v))?;
                term = field.mul(&term, &field.pow(&val, &num_bigint::BigUint::from(e)));
            }
            acc = field.add(&acc, &term);
        }
        Ok(acc)
    }

    /// Substitutes a polynomial for a variable.
    pub fn substitute(
        &self,
        v: VarId,
        replacement: &Polynomial,
        field: &PrimeField,
        order: &MonomialOrder,
    ) -> Polynomial {
        let mut acc = Polynomial::zero();
        for (m, c) in &self.terms {
            let e = m.degree_of(v);
            let rest =
                Monomial::from_exps(m.exps().iter().copied().filter(|&(w, _)| w != v).collect());
            let mut term = Polynomial::constant(c.clone()).mul_term(&rest, &field.one(), field, order);
            for _ in 0..e {
                term = term.mul(replacement, field, order);
            }
            acc = acc.add(&term, field, order);
        }
        acc
    }

    pub fn render(&self, vars: &VarTable) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                s.push_str(" + ");
            }
            if m.is_one() {
                s.push_str(&c.to_string());
            } else if c.is_one() {
                s.push_str(&m.render(vars));
            } else {
                s.push_str(&format!("{}*{}", c, m.render(vars)));
            }
        }
        s
    }
}

/// Multivariate division: returns `(remainder, cofactors)` with
/// `f = sum(cofactors[i] * divisors[i]) + remainder` and no remainder term
/// divisible by any divisor's leading monomial.
pub fn reduce(
    f: &Polynomial,
    divisors: &[Polynomial],
    field: &PrimeField,
    order: &MonomialOrder,
) -> (Polynomial, Vec<Polynomial>) {
    let mut cofactors = vec![Polynomial::zero(); divisors.len()];
    let mut rem_terms: Vec<(Monomial, Fe)> = Vec::new();
    let mut work = f.reordered(order);

    'outer: while let Some((lm, lc)) = work.leading().map(|(m, c)| (m.clone(), c.clone())) {
        for (i, g) in divisors.iter().enumerate() {
            let Some((gm, gc)) = g.leading() else { continue };
            if let Some(q) = lm.div(gm) {
                let qc = field.mul(&lc, &field.inverse(gc).expect("nonzero leading coefficient"));
                let qpoly = Polynomial {
                    terms: vec![(q.clone(), qc.clone())],
                };
                cofactors[i] = cofactors[i].add(&qpoly, field, order);
                let sub = g.mul_term(&q, &qc, field, order);
                work = work.sub(&sub, field, order);
                continue 'outer;
            }
        }
        // leading term irreducible: move it to the remainder
        rem_terms.push((lm.clone(), lc.clone()));
        work.terms.remove(0);
    }

    let remainder = Polynomial::from_terms(rem_terms, field, order);
    (remainder, cofactors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn f7() -> PrimeField {
        PrimeField::new(BigUint::from(7u32)).unwrap()
    }

    fn pvar(v: u32, field: &PrimeField) -> Polynomial {
        Polynomial::var(VarId(v), field)
    }

    #[test]
    fn difference_of_squares() {
        let zp = f7();
        let ord = MonomialOrder::Grevlex;
        let x = pvar(0, &zp);
        let one = Polynomial::constant(zp.one());
        let lhs = x.add(&one, &zp, &ord).mul(&x.sub(&one, &zp, &ord), &zp, &ord);
        let x2 = x.mul(&x, &zp, &ord);
        let expect = x2.add(&Polynomial::constant(zp.elem_u64(6)), &zp, &ord);
        assert_eq!(lhs, expect);
    }

    #[test]
    fn additive_inverse_and_zero_scale() {
        let zp = f7();
        let ord = MonomialOrder::Grevlex;
        let x = pvar(0, &zp);
        let y = pvar(1, &zp);
        let f = x.mul(&y, &zp, &ord).add(&x, &zp, &ord);
        assert!(f.add(&f.neg(&zp), &zp, &ord).is_zero());
        assert!(f.scale(&zp.zero(), &zp).is_zero());
    }

    #[test]
    fn evaluation() {
        let zp = f7();
        let ord = MonomialOrder::Grevlex;
        let x = pvar(0, &zp);
        let y = pvar(1, &zp);
        // x^2 - y at {x:3, y:2} = 0 mod 7
        let f = x.mul(&x, &zp, &ord).sub(&y, &zp, &ord);
        let val = f
            .evaluate(&zp, |v| {
                Some(if v == VarId(0) {
                    zp.elem_u64(3)
                } else {
                    zp.elem_u64(2)
                })
            })
            .unwrap();
        assert!(val.is_zero());
        // constant evaluates with an empty map
        let c = Polynomial::constant(zp.one());
        assert!(c.evaluate(&zp, |_| None).unwrap().is_one());
        // x*y + 1 at {x:5, y:5} mod 13 = 0
        let z13 = PrimeField::new(BigUint::from(13u32)).unwrap();
        let f = pvar(0, &z13)
            .mul(&pvar(1, &z13), &z13, &ord)
            .add(&Polynomial::constant(z13.one()), &z13, &ord);
        let val = f.evaluate(&z13, |_| Some(z13.elem_u64(5))).unwrap();
        assert!(val.is_zero());
        // unbound variable error
        let err = pvar(0, &zp).evaluate(&zp, |_| None);
        assert_eq!(err, Err(PolyError::UnboundVariable(VarId(0))));
    }

    #[test]
    fn reduce_examples() {
        let zp = f7();
        let ord = MonomialOrder::Lex;
        let x = pvar(0, &zp);
        let y = pvar(1, &zp);
        // x^2*y divided by [x^2 - 1]: remainder y, cofactor [y]
        let f = x.mul(&x, &zp, &ord).mul(&y, &zp, &ord);
        let g = x
            .mul(&x, &zp, &ord)
            .sub(&Polynomial::constant(zp.one()), &zp, &ord);
        let (rem, cof) = reduce(&f, &[g.clone()], &zp, &ord);
        assert_eq!(rem, y);
        assert_eq!(cof, vec![y.clone()]);
        // zero reduces to zero
        let (rem, cof) = reduce(&Polynomial::zero(), &[g.clone()], &zp, &ord);
        assert!(rem.is_zero());
        assert!(cof[0].is_zero());
        // self-reduction
        let (rem, cof) = reduce(&g, &[g.clone()], &zp, &ord);
        assert!(rem.is_zero());
        assert_eq!(cof, vec![Polynomial::constant(zp.one())]);
    }

    fn random_poly(rng: &mut StdRng, field: &PrimeField, nvars: u32, maxdeg: u32) -> Polynomial {
        let ord = MonomialOrder::Grevlex;
        let nterms = rng.gen_range(0..6);
        let p: u64 = field.modulus().try_into().unwrap();
        let pairs = (0..nterms)
            .map(|_| {
                let mut exps = Vec::new();
                let mut budget = maxdeg;
                for v in 0..nvars {
                    if budget == 0 {
                        break;
                    }
                    let e = rng.gen_range(0..=budget.min(2));
                    if e > 0 {
                        exps.push((VarId(v), e));
                        budget -= e;
                    }
                }
                (Monomial::from_exps(exps), field.elem_u64(rng.gen_range(0..p)))
            })
            .collect();
        Polynomial::from_terms(pairs, field, &ord)
    }

    #[test]
    fn reduce_remultiplication_identity() {
        let mut rng = StdRng::seed_from_u64(0xfeed01);
        let ord = MonomialOrder::Grevlex;
        for p in [5u64, 13, 101] {
            let zp = PrimeField::new(BigUint::from(p)).unwrap();
            for _ in 0..80 {
                let f = random_poly(&mut rng, &zp, 3, 4);
                let mut gs = Vec::new();
                for _ in 0..rng.gen_range(1..=3usize) {
                    let g = random_poly(&mut rng, &zp, 3, 3);
                    if !g.is_zero() {
                        gs.push(g);
                    }
                }
                if gs.is_empty() {
                    continue;
                }
                let (rem, cof) = reduce(&f, &gs, &zp, &ord);
                let mut recon = rem.clone();
                for (c, g) in cof.iter().zip(&gs) {
                    recon = recon.add(&c.mul(g, &zp, &ord), &zp, &ord);
                }
                assert_eq!(recon, f.reordered(&ord));
                // no remainder term divisible by a leading monomial
                for g in &gs {
                    let (gm, _) = g.leading().unwrap();
                    for (m, _) in rem.terms() {
                        assert!(!gm.divides(m));
                    }
                }
            }
        }
    }

    #[test]
    fn debug_rendering() {
        use crate::poly::monomial::{VarKind, VarTable};
        let zp = f7();
        let ord = MonomialOrder::Grevlex;
        let mut vars = VarTable::new();
        let x = vars.alloc(VarKind::Original("x".into()));
        let y = vars.alloc(VarKind::Original("y".into()));
        // 3*x^2*y + 6
        let f = Polynomial::from_terms(
            vec![
                (
                    Monomial::from_exps(vec![(x, 2), (y, 1)]),
                    zp.elem_u64(3),
                ),
                (Monomial::one(), zp.elem_u64(6)),
            ],
            &zp,
            &ord,
        );
        assert_eq!(f.render(&vars), "3*x^2*y + 6");
        assert_eq!(Polynomial::zero().render(&vars), "0");
    }

    #[test]
    fn substitution() {
        let zp = f7();
        let ord = MonomialOrder::Grevlex;
        let x = pvar(0, &zp);
        let y = pvar(1, &zp);
        // (x^2 + y) [x := y + 1] = y^2 + 3y + 1
        let f = x.mul(&x, &zp, &ord).add(&y, &zp, &ord);
        let rep = y.add(&Polynomial::constant(zp.one()), &zp, &ord);
        let got = f.substitute(VarId(0), &rep, &zp, &ord);
        let expect = y
            .mul(&y, &zp, &ord)
            .add(&y.scale(&zp.elem_u64(3), &zp), &zp, &ord)
            .add(&Polynomial::constant(zp.one()), &zp, &ord);
        assert_eq!(got, expect);
    }
}
