//! Real non-linear module: searches for a model over the rationals (with
//! single square-root extensions), translates it into the prime field, and
//! validates it against the asserted literals. The only module besides the
//! linear one that can produce models; its failures are always `None`,
//! never a wrong verdict.

use crate::field::{Fe, PrimeField};
use crate::frontend::atoms::AtomTable;
use crate::poly::{Monomial, Polynomial, VarId, VarKind};
use crate::sat::Lit;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use std::collections::BTreeMap;
use std::time::Instant;

/// A model value over the reals: a rational or a square root of a
/// non-negative rational. The sign of a root is resolved during lifting,
/// where both field square roots are tried.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgebraicValue {
    Rational(BigRational),
    Root(BigRational),
}

/// Internal candidate value with the sign of the root kept for real-side
/// evaluation.
#[derive(Debug, Clone, PartialEq)]
enum Cand {
    Rat(BigRational),
    Rt(bool, BigRational), // (negative?, alpha)
}

impl Cand {
    fn to_algebraic(&self) -> AlgebraicValue {
        match self {
            Cand::Rat(q) => AlgebraicValue::Rational(q.clone()),
            Cand::Rt(_, a) => AlgebraicValue::Root(a.clone()),
        }
    }

    fn to_qext(&self) -> QExt {
        match self {
            Cand::Rat(q) => QExt::from_rat(q.clone()),
            Cand::Rt(neg, a) => QExt::from_root(*neg, a.clone()),
        }
    }
}

/// Element of a quadratic extension `a + b*sqrt(alpha)`. Mixing two
/// different non-trivial radicals is unrepresentable and aborts the
/// evaluation (the candidate is then discarded).
#[derive(Debug, Clone, PartialEq)]
struct QExt {
    a: BigRational,
    b: BigRational,
    alpha: BigRational,
}

impl QExt {
    fn from_rat(q: BigRational) -> QExt {
        QExt {
            a: q,
            b: BigRational::zero(),
            alpha: BigRational::zero(),
        }
    }

    fn from_root(negative: bool, alpha: BigRational) -> QExt {
        debug_assert!(!alpha.is_negative());
        if let Some(r) = rational_sqrt(&alpha) {
            return QExt::from_rat(if negative { -r } else { r });
        }
        QExt {
            a: BigRational::zero(),
            b: if negative {
                -BigRational::one()
            } else {
                BigRational::one()
            },
            alpha,
        }
    }

    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn compatible_alpha(&self, other: &QExt) -> Option<BigRational> {
        if self.b.is_zero() {
            return Some(other.alpha.clone());
        }
        if other.b.is_zero() || self.alpha == other.alpha {
            return Some(self.alpha.clone());
        }
        None
    }

    fn add(&self, other: &QExt) -> Option<QExt> {
        let alpha = self.compatible_alpha(other)?;
        Some(QExt {
            a: &self.a + &other.a,
            b: &self.b + &other.b,
            alpha: if (&self.b + &other.b).is_zero() {
                BigRational::zero()
            } else {
                alpha
            },
        })
    }

    fn mul(&self, other: &QExt) -> Option<QExt> {
        let alpha = self.compatible_alpha(other)?;
        let a = &self.a * &other.a + &self.b * &other.b * &alpha;
        let b = &self.a * &other.b + &self.b * &other.a;
        Some(QExt {
            a,
            alpha: if b.is_zero() { BigRational::zero() } else { alpha },
            b,
        })
    }
}

/// Exact square root of a non-negative rational, if it is one.
fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let num = q.numer().magnitude();
    let den = q.denom().magnitude();
    let rn = num.sqrt();
    let rd = den.sqrt();
    if &(&rn * &rn) == num && &(&rd * &rd) == den {
        Some(BigRational::new(BigInt::from(rn), BigInt::from(rd)))
    } else {
        None
    }
}

/// Sparse polynomial with rational coefficients, obtained from a field
/// polynomial by the balanced lift of its coefficients.
#[derive(Debug, Clone, PartialEq)]
struct QPoly {
    terms: Vec<(Monomial, BigRational)>,
}

impl QPoly {
    fn from_field(poly: &Polynomial, field: &PrimeField) -> QPoly {
        QPoly {
            terms: poly
                .terms()
                .iter()
                .map(|(m, c)| (m.clone(), BigRational::from(field.balanced(c))))
                .collect(),
        }
    }

    fn normalize(mut terms: Vec<(Monomial, BigRational)>) -> QPoly {
        let mut map: BTreeMap<Vec<(VarId, u32)>, BigRational> = BTreeMap::new();
        for (m, c) in terms.drain(..) {
            *map.entry(m.exps().to_vec()).or_insert_with(BigRational::zero) += c;
        }
        QPoly {
            terms: map
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(e, c)| (Monomial::from_exps(e), c))
                .collect(),
        }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn constant(&self) -> Option<&BigRational> {
        match self.terms.as_slice() {
            [] => None,
            [(m, c)] if m.is_one() => Some(c),
            _ => None,
        }
    }

    fn vars(&self) -> std::collections::BTreeSet<VarId> {
        let mut s = std::collections::BTreeSet::new();
        for (m, _) in &self.terms {
            s.extend(m.vars());
        }
        s
    }

    fn degree_of(&self, v: VarId) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree_of(v)).max().unwrap_or(0)
    }

    fn is_linear(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.total_degree() <= 1)
    }

    /// Substitutes an affine expression for a variable.
    fn substitute(&self, v: VarId, rep: &QPoly) -> QPoly {
        let mut out: Vec<(Monomial, BigRational)> = Vec::new();
        for (m, c) in &self.terms {
            let e = m.degree_of(v);
            if e == 0 {
                out.push((m.clone(), c.clone()));
                continue;
            }
            let rest = Monomial::from_exps(
                m.exps().iter().copied().filter(|&(w, _)| w != v).collect(),
            );
            // rep^e, expanded
            let mut pw = QPoly {
                terms: vec![(Monomial::one(), BigRational::one())],
            };
            for _ in 0..e {
                let mut next = Vec::new();
                for (ma, ca) in &pw.terms {
                    for (mb, cb) in &rep.terms {
                        next.push((ma.mul(mb), ca * cb));
                    }
                }
                pw = QPoly::normalize(next);
            }
            for (mm, cc) in &pw.terms {
                out.push((mm.mul(&rest), c * cc));
            }
        }
        QPoly::normalize(out)
    }

    fn eval(&self, values: &BTreeMap<VarId, Cand>) -> Option<QExt> {
        let mut acc = QExt::from_rat(BigRational::zero());
        for (m, c) in &self.terms {
            let mut term = QExt::from_rat(c.clone());
            for &(v, e) in m.exps() {
                let val = values.get(&v)?.to_qext();
                for _ in 0..e {
                    term = term.mul(&val)?;
                }
            }
            acc = acc.add(&term)?;
        }
        Some(acc)
    }
}

pub struct RealNl {
    pub pool: Vec<BigRational>,
    pub restarts: usize,
}

impl Default for RealNl {
    fn default() -> Self {
        let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        RealNl {
            pool: vec![q(0, 1), q(1, 1), q(-1, 1), q(2, 1), q(-2, 1), q(1, 2)],
            restarts: 64,
        }
    }
}

impl RealNl {
    /// Full pipeline: real model search over the given constraints, lift to
    /// the field, totalization over auxiliary variables, and validation of
    /// every asserted literal. Returns a full variable assignment on
    /// success.
    pub fn try_model(
        &self,
        constraints: &[(Polynomial, bool)],
        trail: &[Lit],
        atoms: &AtomTable,
        rng: &mut rand_chacha::ChaCha8Rng,
        deadline: Option<Instant>,
    ) -> Option<BTreeMap<VarId, Fe>> {
        let field = atoms.field().clone();
        let eqs: Vec<QPoly> = constraints
            .iter()
            .filter(|(_, is_eq)| *is_eq)
            .map(|(p, _)| QPoly::from_field(p, &field))
            .collect();
        let all: Vec<(QPoly, bool)> = constraints
            .iter()
            .map(|(p, is_eq)| (QPoly::from_field(p, &field), *is_eq))
            .collect();
        let candidate = self.search_real_model(eqs, &all, rng, deadline)?;
        self.lift_and_validate(&candidate, trail, atoms)
    }

    /// Searches for an assignment over the reals satisfying all constraints:
    /// Gaussian elimination on the linear equations, exact solving of
    /// univariate linear/quadratic equations, then bounded randomized
    /// assignment of the remaining free variables.
    fn search_real_model(
        &self,
        eqs: Vec<QPoly>,
        all: &[(QPoly, bool)],
        rng: &mut rand_chacha::ChaCha8Rng,
        deadline: Option<Instant>,
    ) -> Option<BTreeMap<VarId, Cand>> {
        let mut budget = self.restarts;
        self.solve_rec(eqs, BTreeMap::new(), Vec::new(), all, rng, &mut budget, deadline)
    }

    #[allow(clippy::too_many_arguments)]
    fn solve_rec(
        &self,
        mut eqs: Vec<QPoly>,
        assigned: BTreeMap<VarId, Cand>,
        mut solved: Vec<(VarId, QPoly)>,
        all: &[(QPoly, bool)],
        rng: &mut rand_chacha::ChaCha8Rng,
        budget: &mut usize,
        deadline: Option<Instant>,
    ) -> Option<BTreeMap<VarId, Cand>> {
        if *budget == 0 {
            return None;
        }
        if let Some(dl) = deadline {
            if Instant::now() > dl {
                return None;
            }
        }
        // simplification loop
        loop {
            eqs.retain(|e| !e.is_zero());
            if eqs.iter().any(|e| e.constant().is_some()) {
                return None; // nonzero constant equation: dead branch
            }
            // linear equation: eliminate its first variable
            if let Some(idx) = eqs.iter().position(|e| e.is_linear() && !e.is_zero()) {
                let eq = eqs.remove(idx);
                let v = *eq.vars().iter().next().unwrap();
                let cv = eq
                    .terms
                    .iter()
                    .find(|(m, _)| m.degree_of(v) == 1)
                    .map(|(_, c)| c.clone())
                    .unwrap();
                // v = -(eq - cv*v)/cv
                let rest: Vec<(Monomial, BigRational)> = eq
                    .terms
                    .iter()
                    .filter(|(m, _)| m.degree_of(v) == 0)
                    .map(|(m, c)| (m.clone(), -(c / &cv)))
                    .collect();
                let rep = QPoly::normalize(rest);
                for e in &mut eqs {
                    *e = e.substitute(v, &rep);
                }
                for (_, expr) in &mut solved {
                    *expr = expr.substitute(v, &rep);
                }
                solved.push((v, rep));
                continue;
            }
            // univariate quadratic over a still-free variable
            let uni = eqs.iter().position(|e| {
                let vars = e.vars();
                vars.len() == 1 && {
                    let v = *vars.iter().next().unwrap();
                    e.degree_of(v) == 2 && !assigned.contains_key(&v)
                }
            });
            if let Some(idx) = uni {
                let eq = eqs.remove(idx);
                let v = *eq.vars().iter().next().unwrap();
                let mut qa = BigRational::zero();
                let mut qb = BigRational::zero();
                let mut qc = BigRational::zero();
                for (m, c) in &eq.terms {
                    match m.degree_of(v) {
                        2 => qa = c.clone(),
                        1 => qb = c.clone(),
                        0 => qc = c.clone(),
                        _ => unreachable!(),
                    }
                }
                let disc = &qb * &qb - BigRational::from(BigInt::from(4)) * &qa * &qc;
                if disc.is_negative() {
                    return None; // no real root
                }
                let two_a = BigRational::from(BigInt::from(2)) * &qa;
                let roots: Vec<Cand> = if let Some(sq) = rational_sqrt(&disc) {
                    let r1 = (-&qb + &sq) / &two_a;
                    let r2 = (-&qb - &sq) / &two_a;
                    let mut rs = vec![Cand::Rat(r1.clone())];
                    if r2 != r1 {
                        rs.push(Cand::Rat(r2));
                    }
                    rs
                } else if qb.is_zero() {
                    // x^2 = -c/a: the two signs of the same radical
                    let alpha = -(&qc / &qa);
                    if alpha.is_negative() {
                        return None;
                    }
                    vec![Cand::Rt(false, alpha.clone()), Cand::Rt(true, alpha)]
                } else {
                    // value would need a nested a + b*sqrt(d) model value:
                    // not representable, leave the equation for checking
                    Vec::new()
                };
                if roots.is_empty() {
                    // fall through to random assignment with this equation
                    // only checked at validation time
                    return self.random_stage(&eqs, assigned, solved, all, rng, budget, deadline);
                }
                for r in roots {
                    let mut eqs2 = eqs.clone();
                    let mut solved2 = solved.clone();
                    let mut assigned2 = assigned.clone();
                    if let Cand::Rat(q) = &r {
                        let rep = QPoly::normalize(vec![(Monomial::one(), q.clone())]);
                        for e in &mut eqs2 {
                            *e = e.substitute(v, &rep);
                        }
                        for (_, expr) in &mut solved2 {
                            *expr = expr.substitute(v, &rep);
                        }
                    }
                    assigned2.insert(v, r);
                    if let Some(m) =
                        self.solve_rec(eqs2, assigned2, solved2, all, rng, budget, deadline)
                    {
                        return Some(m);
                    }
                    if *budget == 0 {
                        return None;
                    }
                }
                return None;
            }
            break;
        }
        self.random_stage(&eqs, assigned, solved, all, rng, budget, deadline)
    }

    #[allow(clippy::too_many_arguments)]
    fn random_stage(
        &self,
        eqs: &[QPoly],
        assigned: BTreeMap<VarId, Cand>,
        solved: Vec<(VarId, QPoly)>,
        all: &[(QPoly, bool)],
        rng: &mut rand_chacha::ChaCha8Rng,
        budget: &mut usize,
        deadline: Option<Instant>,
    ) -> Option<BTreeMap<VarId, Cand>> {
        // free variables: anything mentioned anywhere but not yet valued
        let mut free: std::collections::BTreeSet<VarId> = std::collections::BTreeSet::new();
        for (p, _) in all {
            free.extend(p.vars());
        }
        for e in eqs {
            free.extend(e.vars());
        }
        for (_, expr) in &solved {
            free.extend(expr.vars());
        }
        for (v, _) in &solved {
            free.remove(v);
        }
        for v in assigned.keys() {
            free.remove(v);
        }
        let free: Vec<VarId> = free.into_iter().collect();

        let tries = if free.is_empty() {
            1
        } else {
            (*budget).min(self.restarts)
        };
        for attempt in 0..tries.max(1) {
            if *budget == 0 {
                return None;
            }
            *budget -= 1;
            if let Some(dl) = deadline {
                if Instant::now() > dl {
                    return None;
                }
            }
            let mut values = assigned.clone();
            for v in &free {
                let pick = if attempt == 0 {
                    self.pool[0].clone() // first try all zeros
                } else {
                    self.pool[rng.gen_range(0..self.pool.len())].clone()
                };
                values.insert(*v, Cand::Rat(pick));
            }
            // back-substitute the solved chain (later entries were fully
            // substituted, so evaluation order does not matter)
            let mut ok = true;
            for (v, expr) in &solved {
                match expr.eval(&values) {
                    Some(q) if q.b.is_zero() => {
                        values.insert(*v, Cand::Rat(q.a));
                    }
                    Some(q) => {
                        // a + b*sqrt(alpha): representable only when a = 0
                        if q.a.is_zero() {
                            values.insert(*v, Cand::Rt(q.b.is_negative(), q.alpha));
                        } else {
                            ok = false;
                            break;
                        }
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            // check every constraint over the reals
            let holds = all.iter().all(|(p, is_eq)| match p.eval(&values) {
                Some(v) => v.is_zero() == *is_eq,
                None => false,
            });
            if holds {
                return Some(values);
            }
        }
        None
    }

    /// Lifts a model reported by an external NRA solver. Unknown names or
    /// unrepresentable values discard the model.
    pub fn try_external_model(
        &self,
        values: &[(String, super::bridge::NraValue)],
        trail: &[Lit],
        atoms: &AtomTable,
    ) -> Option<BTreeMap<VarId, Fe>> {
        use super::bridge::NraValue;
        let mut candidate = BTreeMap::new();
        for (name, v) in values {
            let var = atoms.lookup_name(name)?;
            let cand = match v {
                NraValue::Rational(q) => Cand::Rat(q.clone()),
                NraValue::Root { negative, alpha } => {
                    if alpha.is_negative() {
                        return None;
                    }
                    Cand::Rt(*negative, alpha.clone())
                }
            };
            candidate.insert(var, cand);
        }
        self.lift_and_validate(&candidate, trail, atoms)
    }

    /// Lifts a real candidate into the field and validates the asserted
    /// literals, trying both square roots of each radical value.
    fn lift_and_validate(
        &self,
        candidate: &BTreeMap<VarId, Cand>,
        trail: &[Lit],
        atoms: &AtomTable,
    ) -> Option<BTreeMap<VarId, Fe>> {
        let field = atoms.field().clone();
        // per-variable candidate field values
        let mut choices: Vec<(VarId, Vec<Fe>)> = Vec::new();
        for (v, cand) in candidate {
            let vals = match cand.to_algebraic() {
                AlgebraicValue::Rational(q) => vec![lift_rational(&q, &field)?],
                AlgebraicValue::Root(alpha) => {
                    let a = lift_rational(&alpha, &field)?;
                    let (r, s) = field.sqrt(&a)?;
                    if r == s {
                        vec![r]
                    } else {
                        vec![r, s]
                    }
                }
            };
            choices.push((*v, vals));
        }
        // cap the sign combinations
        let combos: usize = choices.iter().map(|(_, v)| v.len()).product();
        if combos > 16 {
            return None;
        }
        let mut idx = vec![0usize; choices.len()];
        loop {
            let model: BTreeMap<VarId, Fe> = choices
                .iter()
                .zip(&idx)
                .map(|((v, vals), &i)| (*v, vals[i].clone()))
                .collect();
            if let Some(full) = self.validate(&model, trail, atoms) {
                return Some(full);
            }
            // next combination
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return None;
                }
                idx[k] += 1;
                if idx[k] < choices[k].1.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    /// Totalizes the model over all variables (missing originals default to
    /// zero, monomial and slack variables are computed from their
    /// definitions) and checks every asserted literal.
    fn validate(
        &self,
        model: &BTreeMap<VarId, Fe>,
        trail: &[Lit],
        atoms: &AtomTable,
    ) -> Option<BTreeMap<VarId, Fe>> {
        let field = atoms.field().clone();
        let mut full: BTreeMap<VarId, Fe> = BTreeMap::new();
        for (v, kind) in atoms.vars.iter() {
            match kind {
                VarKind::Original(_) => {
                    full.insert(v, model.get(&v).cloned().unwrap_or_else(|| field.zero()));
                }
                _ => {}
            }
        }
        for (v, kind) in atoms.vars.iter() {
            match kind {
                VarKind::Monomial(m) => {
                    let mut prod = field.one();
                    for &(w, e) in m.exps() {
                        let base = full.get(&w)?.clone();
                        prod = field.mul(&prod, &field.pow(&base, &BigUint::from(e)));
                    }
                    full.insert(v, prod);
                }
                _ => {}
            }
        }
        for (v, g) in atoms.slack_defs() {
            let val = g
                .evaluate(&field, |w| full.get(&w).cloned())
                .ok()?;
            full.insert(*v, val);
        }
        for &lit in trail {
            let t = atoms.theory(lit.atom())?;
            let holds = full.get(&t.var)? == &t.value;
            if holds != lit.is_positive() {
                return None;
            }
        }
        Some(full)
    }
}

/// Rational to field element: discard when the denominator vanishes mod p.
pub fn lift_rational(q: &BigRational, field: &PrimeField) -> Option<Fe> {
    let den = field.elem_int(q.denom());
    if den.is_zero() {
        return None;
    }
    let num = field.elem_int(q.numer());
    Some(field.mul(&num, &field.inverse(&den).ok()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::atoms::Interned;
    use rand::SeedableRng;

    fn table(p: u64, names: &[&str]) -> AtomTable {
        let mut t = AtomTable::new();
        t.set_field(PrimeField::new(BigUint::from(p)).unwrap());
        for n in names {
            t.declare_original(n);
        }
        t
    }

    fn rng() -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(42)
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn linear_solve_finds_one_half() {
        let atoms = table(7, &["x"]);
        let field = atoms.field().clone();
        let ord = atoms.order();
        // 2x - 1 = 0
        let x = Polynomial::var(VarId(0), &field);
        let f = x
            .scale(&field.elem_u64(2), &field)
            .sub(&Polynomial::constant(field.one()), &field, &ord);
        let nl = RealNl::default();
        let eqs = vec![QPoly::from_field(&f, &field)];
        let all = vec![(QPoly::from_field(&f, &field), true)];
        let m = nl
            .search_real_model(eqs, &all, &mut rng(), None)
            .unwrap();
        assert_eq!(m[&VarId(0)], Cand::Rat(q(1, 2)));
    }

    #[test]
    fn quadratic_solve_finds_radical() {
        let atoms = table(7, &["x"]);
        let field = atoms.field().clone();
        let ord = atoms.order();
        let x = Polynomial::var(VarId(0), &field);
        // x^2 - 2 = 0
        let f = x
            .mul(&x, &field, &ord)
            .sub(&Polynomial::constant(field.elem_u64(2)), &field, &ord);
        let nl = RealNl::default();
        let eqs = vec![QPoly::from_field(&f, &field)];
        let all = vec![(QPoly::from_field(&f, &field), true)];
        let m = nl.search_real_model(eqs, &all, &mut rng(), None).unwrap();
        assert_eq!(m[&VarId(0)], Cand::Rt(false, q(2, 1)));
        // x^2 + 1 = 0 has no real solution
        let g = x
            .mul(&x, &field, &ord)
            .add(&Polynomial::constant(field.one()), &field, &ord);
        let eqs = vec![QPoly::from_field(&g, &field)];
        let all = vec![(QPoly::from_field(&g, &field), true)];
        assert!(nl.search_real_model(eqs, &all, &mut rng(), None).is_none());
    }

    #[test]
    fn lift_examples() {
        let field = PrimeField::new(BigUint::from(7u32)).unwrap();
        assert_eq!(lift_rational(&q(1, 2), &field), Some(field.elem_u64(4)));
        assert_eq!(lift_rational(&q(1, 7), &field), None);
        assert_eq!(lift_rational(&q(-1, 1), &field), Some(field.elem_u64(6)));
        // root(2) lifts to 3 or 4
        let a = lift_rational(&q(2, 1), &field).unwrap();
        let (r, s) = field.sqrt(&a).unwrap();
        assert_eq!((r, s), (field.elem_u64(3), field.elem_u64(4)));
    }

    #[test]
    fn full_pipeline_on_disequations() {
        // x != 0 and x != 1 over p=7: the model search assigns from the
        // pool and lifting validates
        let mut atoms = table(7, &["x"]);
        let field = atoms.field().clone();
        let ord = atoms.order();
        let x = Polynomial::var(VarId(0), &field);
        let Interned::Atom(a0) = atoms.intern_equation(&x) else {
            panic!()
        };
        let xm1 = x.sub(&Polynomial::constant(field.one()), &field, &ord);
        let Interned::Atom(a1) = atoms.intern_equation(&xm1) else {
            panic!()
        };
        let trail = vec![Lit::new(a0, false), Lit::new(a1, false)];
        let constraints = vec![(x.clone(), false), (xm1.clone(), false)];
        let nl = RealNl::default();
        let model = nl
            .try_model(&constraints, &trail, &atoms, &mut rng(), None)
            .unwrap();
        let got = &model[&VarId(0)];
        assert!(!got.is_zero() && *got != field.one());
    }

    #[test]
    fn spurious_candidates_are_rejected() {
        // x = 0 asserted but candidate forced through validation fails if
        // a disequation x != 0 is also asserted (contradictory trail)
        let mut atoms = table(7, &["x"]);
        let field = atoms.field().clone();
        let x = Polynomial::var(VarId(0), &field);
        let Interned::Atom(a0) = atoms.intern_equation(&x) else {
            panic!()
        };
        let trail = vec![Lit::new(a0, true), Lit::new(a0, false)];
        let constraints = vec![(x.clone(), true), (x.clone(), false)];
        let nl = RealNl::default();
        assert!(nl
            .try_model(&constraints, &trail, &atoms, &mut rng(), None)
            .is_none());
    }

    #[test]
    fn lift_is_a_partial_homomorphism() {
        use rand::Rng;
        let mut r = rng();
        for p in [5u64, 13, 101] {
            let field = PrimeField::new(BigUint::from(p)).unwrap();
            for _ in 0..200 {
                let q1 = q(r.gen_range(-20..20), r.gen_range(1..12));
                let q2 = q(r.gen_range(-20..20), r.gen_range(1..12));
                let sum = &q1 + &q2;
                let prod = &q1 * &q2;
                if let (Some(l1), Some(l2), Some(ls), Some(lp)) = (
                    lift_rational(&q1, &field),
                    lift_rational(&q2, &field),
                    lift_rational(&sum, &field),
                    lift_rational(&prod, &field),
                ) {
                    assert_eq!(field.add(&l1, &l2), ls);
                    assert_eq!(field.mul(&l1, &l2), lp);
                }
            }
        }
    }

    #[test]
    fn qext_rejects_mixed_radicals() {
        let a = QExt::from_root(false, q(2, 1));
        let b = QExt::from_root(false, q(3, 1));
        assert!(a.mul(&b).is_none());
        assert!(a.add(&b).is_none());
        let r = QExt::from_rat(q(5, 1));
        assert!(a.mul(&r).is_some());
        // perfect squares collapse to rationals
        let c = QExt::from_root(true, q(9, 4));
        assert_eq!(c, QExt::from_rat(q(-3, 2)));
    }
}
