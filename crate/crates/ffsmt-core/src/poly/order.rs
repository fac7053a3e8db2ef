//! Monomial orders.
//!
//! Variable precedence is the `VarId` order: lower ids rank higher. The
//! solver allocates input variables first, so a script declaring `x`, `u`,
//! `v` gets the precedence `x > u > v`.

use super::monomial::Monomial;
use std::cmp::Ordering;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MonomialOrder {
    /// Graded reverse lexicographic. Default for Gröbner computation.
    #[default]
    Grevlex,
    /// Lexicographic.
    Lex,
}

impl MonomialOrder {
    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        match self {
            MonomialOrder::Lex => cmp_lex(a, b),
            MonomialOrder::Grevlex => cmp_grevlex(a, b),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MonomialOrder::Grevlex => "grevlex",
            MonomialOrder::Lex => "lex",
        }
    }
}

impl std::str::FromStr for MonomialOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "grevlex" => Ok(MonomialOrder::Grevlex),
            "lex" => Ok(MonomialOrder::Lex),
            other => Err(format!("unknown monomial order `{other}`")),
        }
    }
}

fn cmp_lex(a: &Monomial, b: &Monomial) -> Ordering {
    // walk exponents from the highest-precedence variable down
    let (mut i, mut j) = (0, 0);
    let ea = a.exps();
    let eb = b.exps();
    loop {
        match (ea.get(i), eb.get(j)) {
            (None, None) => return Ordering::Equal,
            (Some(_), None) => return Ordering::Greater,
            (None, Some(_)) => return Ordering::Less,
            (Some(&(va, xa)), Some(&(vb, xb))) => match va.cmp(&vb) {
                Ordering::Less => return Ordering::Greater, // a has the higher var
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => {
                    if xa != xb {
                        return xa.cmp(&xb);
                    }
                    i += 1;
                    j += 1;
                }
            },
        }
    }
}

fn cmp_grevlex(a: &Monomial, b: &Monomial) -> Ordering {
    let da = a.total_degree();
    let db = b.total_degree();
    if da != db {
        return da.cmp(&db);
    }
    // equal degree: compare from the lowest-precedence variable upward;
    // the first difference decides, with the larger exponent losing.
    let ea = a.exps();
    let eb = b.exps();
    let (mut i, mut j) = (ea.len(), eb.len());
    loop {
        match (i, j) {
            (0, 0) => return Ordering::Equal,
            (_, 0) => return Ordering::Less, // a still has low-precedence vars
            (0, _) => return Ordering::Greater,
            _ => {
                let (va, xa) = ea[i - 1];
                let (vb, xb) = eb[j - 1];
                match va.cmp(&vb) {
                    Ordering::Greater => return Ordering::Less, // a's tail var is lower
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Equal => {
                        if xa != xb {
                            return xb.cmp(&xa);
                        }
                        i -= 1;
                        j -= 1;
                    }
                }
            }
        }
    }
}
