//! Factoring utilities: quadratic root extraction via Tonelli-Shanks,
//! common-variable extraction, and syntactic product-of-roots matching.

use super::{Monomial, MonomialOrder, Polynomial, VarId};
use crate::field::{Fe, PrimeField};

/// Roots of a univariate quadratic `a*x^2 + b*x + c` (a != 0), via the
/// quadratic formula. Returns `None` when the discriminant is a non-residue;
/// a double root is returned twice. Roots come back sorted ascending.
pub fn factor_quadratic_univariate(f: &Polynomial, field: &PrimeField) -> Option<(Fe, Fe)> {
    let vars = f.vars();
    if vars.len() != 1 {
        return None;
    }
    let x = *vars.iter().next().unwrap();
    if f.degree_of(x) != 2 {
        return None;
    }
    let mut a = field.zero();
    let mut b = field.zero();
    let mut c = field.zero();
    for (m, coef) in f.terms() {
        match m.degree_of(x) {
            2 => a = coef.clone(),
            1 => b = coef.clone(),
            0 => c = coef.clone(),
            _ => unreachable!(),
        }
    }
    debug_assert!(!a.is_zero());
    let disc = field.sub(&field.mul(&b, &b), &field.mul(&field.elem_u64(4), &field.mul(&a, &c)));
    let (r1, r2) = field.sqrt(&disc)?;
    let inv_2a = field
        .inverse(&field.mul(&field.elem_u64(2), &a))
        .expect("2a nonzero for odd p");
    let root1 = field.mul(&field.sub(&field.neg(&b), &r1), &inv_2a);
    let root2 = field.mul(&field.sub(&field.neg(&b), &r2), &inv_2a);
    Some(if root1 <= root2 {
        (root1, root2)
    } else {
        (root2, root1)
    })
}

/// If some variable divides every term of `f`, returns the highest-precedence
/// such variable (smallest id) and the quotient.
pub fn extract_common_variable(
    f: &Polynomial,
    field: &PrimeField,
    order: &MonomialOrder,
) -> Option<(VarId, Polynomial)> {
    let (first, _) = f.terms().first()?;
    let candidates: Vec<VarId> = first
        .vars()
        .filter(|&v| f.terms().iter().all(|(m, _)| m.degree_of(v) >= 1))
        .collect();
    let x = *candidates.first()?;
    let xm = Monomial::var(x);
    let pairs = f
        .terms()
        .iter()
        .map(|(m, c)| (m.div(&xm).expect("x divides every term"), c.clone()))
        .collect();
    Some((x, Polynomial::from_terms(pairs, field, order)))
}

/// Syntactic product-of-roots matcher: succeeds when `f` equals, up to a
/// nonzero leading scalar, either a product of linear factors over distinct
/// variables or a univariate polynomial of degree at most two. The returned
/// factor list `(x_i, alpha_i)` multiplies back to `f` up to that scalar.
pub fn match_product_of_roots(
    f: &Polynomial,
    field: &PrimeField,
    order: &MonomialOrder,
) -> Option<Vec<(VarId, Fe)>> {
    if f.is_zero() || f.is_constant() {
        return None;
    }
    let vars = f.vars();
    let factors = if vars.len() == 1 {
        let x = *vars.iter().next().unwrap();
        match f.degree_of(x) {
            1 => {
                // a*x + b = a*(x - (-b/a))
                let a = f.coeff(&Monomial::var(x), field);
                let b = f.constant_term(field);
                let root = field.neg(&field.mul(&b, &field.inverse(&a).ok()?));
                vec![(x, root)]
            }
            2 => {
                let (r1, r2) = factor_quadratic_univariate(f, field)?;
                vec![(x, r1), (x, r2)]
            }
            _ => return None,
        }
    } else {
        peel_multilinear(f, field, order)?
    };
    // contract check: the factors must re-multiply to a scalar multiple of f
    let mut prod = Polynomial::constant(field.one());
    for (x, alpha) in &factors {
        let lin = Polynomial::var(*x, field).sub(&Polynomial::constant(alpha.clone()), field, order);
        prod = prod.mul(&lin, field, order);
    }
    let scalar = f.leading().map(|(_, c)| c.clone())?;
    if prod.scale(&scalar, field) == f.reordered(order) {
        Some(factors)
    } else {
        None
    }
}

/// Peels `f = c * prod (x_i - alpha_i)` over distinct variables, requiring
/// degree one in every variable. Works by writing `f = A*x + B` for the
/// smallest variable and checking `B = -alpha * A`.
fn peel_multilinear(
    f: &Polynomial,
    field: &PrimeField,
    order: &MonomialOrder,
) -> Option<Vec<(VarId, Fe)>> {
    let vars = f.vars();
    for &v in &vars {
        if f.degree_of(v) != 1 {
            return None;
        }
    }
    let mut factors = Vec::new();
    let mut current = f.clone();
    loop {
        let vars = current.vars();
        if vars.is_empty() {
            break;
        }
        let x = *vars.iter().next().unwrap();
        let mut a_terms = Vec::new();
        let mut b_terms = Vec::new();
        for (m, c) in current.terms() {
            if m.degree_of(x) == 1 {
                let rest = m.div(&Monomial::var(x)).unwrap();
                a_terms.push((rest, c.clone()));
            } else {
                b_terms.push((m.clone(), c.clone()));
            }
        }
        let a = Polynomial::from_terms(a_terms, field, order);
        let b = Polynomial::from_terms(b_terms, field, order);
        if a.is_zero() {
            return None;
        }
        let alpha = if b.is_zero() {
            field.zero()
        } else {
            // need b = -alpha * a term for term
            if a.terms().len() != b.terms().len() {
                return None;
            }
            let ratio = field.mul(
                &b.terms()[0].1,
                &field.inverse(&a.coeff(&b.terms()[0].0, field)).ok()?,
            );
            for (m, c) in b.terms() {
                let ac = a.coeff(m, field);
                if ac.is_zero() || field.mul(&ac, &ratio) != *c {
                    return None;
                }
            }
            field.neg(&ratio)
        };
        factors.push((x, alpha));
        current = a;
    }
    Some(factors)
}

/// If `d` is the square of a polynomial of degree <= 1, returns that linear
/// polynomial. Supports constant and univariate-quadratic `d`; anything else
/// returns `None`. Used to split quadratics whose discriminant is itself a
/// perfect square.
pub fn perfect_square_root(
    d: &Polynomial,
    field: &PrimeField,
    order: &MonomialOrder,
) -> Option<Polynomial> {
    if d.is_zero() {
        return Some(Polynomial::zero());
    }
    if let Some(c) = d.constant_value(field) {
        let (r, _) = field.sqrt(&c)?;
        return Some(Polynomial::constant(r));
    }
    let vars = d.vars();
    if vars.len() != 1 {
        return None;
    }
    let y = *vars.iter().next().unwrap();
    if d.degree_of(y) != 2 {
        return None;
    }
    // d = a*y^2 + b*y + c = (s*y + t)^2 requires s^2 = a, 2st = b, t^2 = c
    let a = d.coeff(&Monomial::from_exps(vec![(y, 2)]), field);
    let b = d.coeff(&Monomial::var(y), field);
    let c = d.constant_term(field);
    let (s, _) = field.sqrt(&a)?;
    if s.is_zero() {
        return None;
    }
    let t = field.mul(&b, &field.inverse(&field.mul(&field.elem_u64(2), &s)).ok()?);
    if field.mul(&t, &t) != c {
        return None;
    }
    let root = Polynomial::var(y, field)
        .scale(&s, field)
        .add(&Polynomial::constant(t), field, order);
    Some(root)
}
