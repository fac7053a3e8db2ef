//! Input handling: SMT-LIB parsing, atom interning, and clausification.

pub mod atoms;
pub mod parser;
pub mod preprocess;
pub mod sexp;

pub use atoms::{AtomId, AtomKind, AtomTable, Interned, TheoryAtom};
pub use parser::{parse, Formula, FrontendError, InputScript};
pub use preprocess::{clausify, PreprocessedFormula};

use crate::field::Fe;
use crate::poly::VarId;
use std::collections::BTreeMap;

/// Evaluates a formula under a total assignment of the original variables.
/// Used by model validation and by test oracles; works on the parsed tree,
/// not on solver state.
pub fn eval_formula(
    f: &Formula,
    atoms: &AtomTable,
    assignment: &BTreeMap<VarId, Fe>,
) -> Option<bool> {
    match f {
        Formula::True => Some(true),
        Formula::False => Some(false),
        Formula::Not(g) => eval_formula(g, atoms, assignment).map(|b| !b),
        Formula::And(gs) => {
            let mut all = true;
            for g in gs {
                all &= eval_formula(g, atoms, assignment)?;
            }
            Some(all)
        }
        Formula::Or(gs) => {
            let mut any = false;
            for g in gs {
                any |= eval_formula(g, atoms, assignment)?;
            }
            Some(any)
        }
        Formula::Atom(a, pol) => {
            let t = atoms.theory(*a)?;
            let field = atoms.field();
            let v = t
                .expanded
                .evaluate(field, |v| assignment.get(&v).cloned())
                .ok()?;
            Some(v.is_zero() == *pol)
        }
    }
}

/// Re-evaluates every assertion of the script under a model of the declared
/// variables. This is the external model gate: it goes back to the parsed
/// input, not to any internal solver state.
pub fn validate_model(
    script: &InputScript,
    atoms: &AtomTable,
    model: &BTreeMap<VarId, Fe>,
) -> bool {
    script
        .assertions
        .iter()
        .all(|f| eval_formula(f, atoms, model) == Some(true))
}
