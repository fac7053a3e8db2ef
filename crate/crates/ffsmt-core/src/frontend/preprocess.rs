//! Clausification of the parsed boolean structure.
//!
//! Together with the atom table's monomial abstraction and slack naming this
//! completes the decomposition of the input into F (a CNF over domain
//! constraints), G (slack definitions) and H (monomial definitions).
//! Assertions that are already conjunctions of clauses are distributed
//! directly; non-clausal structure gets fresh boolean selectors with full
//! defining clauses.

use super::atoms::AtomTable;
use super::parser::Formula;
use crate::sat::Lit;

/// CNF of the input formula. G and H live in the [`AtomTable`].
#[derive(Debug, Clone, Default)]
pub struct PreprocessedFormula {
    pub clauses: Vec<Vec<Lit>>,
    /// True when some assertion reduced to the constant false.
    pub trivially_unsat: bool,
}

pub fn clausify(assertions: &[Formula], atoms: &mut AtomTable) -> PreprocessedFormula {
    let mut out = PreprocessedFormula::default();
    for f in assertions {
        let nnf = to_nnf(f, false);
        add_assertion(&nnf, atoms, &mut out);
    }
    out
}

/// Negation normal form; `neg` asks for the negation of `f`.
fn to_nnf(f: &Formula, neg: bool) -> Formula {
    match (f, neg) {
        (Formula::True, false) | (Formula::False, true) => Formula::True,
        (Formula::True, true) | (Formula::False, false) => Formula::False,
        (Formula::Atom(a, pol), _) => Formula::Atom(*a, *pol != neg),
        (Formula::Not(g), _) => to_nnf(g, !neg),
        (Formula::And(gs), false) => Formula::And(gs.iter().map(|g| to_nnf(g, false)).collect()),
        (Formula::And(gs), true) => Formula::Or(gs.iter().map(|g| to_nnf(g, true)).collect()),
        (Formula::Or(gs), false) => Formula::Or(gs.iter().map(|g| to_nnf(g, false)).collect()),
        (Formula::Or(gs), true) => Formula::And(gs.iter().map(|g| to_nnf(g, true)).collect()),
    }
}

fn add_assertion(f: &Formula, atoms: &mut AtomTable, out: &mut PreprocessedFormula) {
    match f {
        Formula::True => {}
        Formula::False => out.trivially_unsat = true,
        Formula::And(gs) => {
            for g in gs {
                add_assertion(g, atoms, out);
            }
        }
        other => {
            let clause = clause_of(other, atoms, out);
            push_clause(clause, out);
        }
    }
}

fn push_clause(mut clause: Vec<Lit>, out: &mut PreprocessedFormula) {
    clause.sort();
    clause.dedup();
    if clause.is_empty() {
        out.trivially_unsat = true;
    } else {
        out.clauses.push(clause);
    }
}

/// Turns an NNF disjunct (literal or Or-node) into one clause, introducing
/// selector variables for nested conjunctions.
fn clause_of(f: &Formula, atoms: &mut AtomTable, out: &mut PreprocessedFormula) -> Vec<Lit> {
    let disjuncts: Vec<&Formula> = match f {
        Formula::Or(gs) => gs.iter().collect(),
        other => vec![other],
    };
    let mut clause = Vec::new();
    for d in disjuncts {
        clause.push(lit_of(d, atoms, out));
    }
    clause
}

fn lit_of(f: &Formula, atoms: &mut AtomTable, out: &mut PreprocessedFormula) -> Lit {
    match f {
        Formula::Atom(a, pol) => Lit::new(*a, *pol),
        Formula::And(gs) => {
            // selector b with b <-> conjunction
            let b = atoms.new_bool_atom();
            let blit = Lit::new(b, true);
            let mut back = vec![blit];
            let child_lits: Vec<Lit> = gs.iter().map(|g| lit_of(g, atoms, out)).collect();
            for &cl in &child_lits {
                push_clause(vec![blit.negate(), cl], out);
                back.push(cl.negate());
            }
            push_clause(back, out);
            blit
        }
        Formula::Or(gs) => {
            let b = atoms.new_bool_atom();
            let blit = Lit::new(b, true);
            let child_lits: Vec<Lit> = gs.iter().map(|g| lit_of(g, atoms, out)).collect();
            let mut fwd = vec![blit.negate()];
            fwd.extend(child_lits.iter().copied());
            push_clause(fwd, out);
            for &cl in &child_lits {
                push_clause(vec![cl.negate(), blit], out);
            }
            blit
        }
        Formula::True | Formula::False | Formula::Not(_) => {
            unreachable!("constants folded and negations pushed before clausification")
        }
    }
}
