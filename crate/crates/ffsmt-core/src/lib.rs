//! SMT solving for quantifier-free polynomial equations and disequations
//! over a prime field `Z_p`.
//!
//! The engine is a CDCL(T) loop whose theory solver coordinates six
//! sub-solvers with different cost/completeness trade-offs: equivalence
//! inference, a prime-field linear tableau, an integer linear module, linear
//! clause inference, Gröbner bases with ideal-membership certificates, and a
//! model-producing search over the reals. Input is an SMT-LIB 2 dialect for
//! the `QF_FF` logic.

pub mod field;
pub mod frontend;
pub mod poly;
pub mod sat;
pub mod solver;
pub mod theory;

pub use field::{Fe, FieldError, PrimeField};
pub use frontend::{parse, AtomId, AtomTable, FrontendError, InputScript};
pub use poly::{Monomial, MonomialOrder, Polynomial, VarId, VarKind, VarTable};
pub use sat::Lit;
pub use solver::{
    revalidate_model, run_script, Model, RunOutcome, RunStats, Solver, SolverConfig,
    UnknownReason, Verdict,
};
pub use theory::{Budgets, ModuleMask};
