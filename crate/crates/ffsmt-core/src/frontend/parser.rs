//! SMT-LIB 2 front end for the QF_FF dialect.
//!
//! Supported commands: `set-logic QF_FF`, `set-info`, `set-option`,
//! `declare-fun` (arity 0) / `declare-const` over `(_ FiniteField p)`,
//! `assert`, `check-sat`, `get-model`, `exit`. Field terms are built from
//! `ff.add`, `ff.mul`, `ff.neg`, declared constants, and literals written
//! `#fK`, `#fKmP` or `(as ffK S)`. Boolean structure: `=`, `distinct`,
//! `not`, `and`, `or`, `=>`, and `ite` over booleans.

use super::atoms::{AtomId, AtomTable, Interned};
use super::sexp::{read_all, Pos, SExp};
use crate::field::PrimeField;
use crate::poly::{Polynomial, VarId};
use num_bigint::BigUint;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum FrontendError {
    Parse { pos: Option<Pos>, msg: String },
    Sort { pos: Option<Pos>, msg: String },
    Unsupported { pos: Option<Pos>, msg: String },
}

impl fmt::Display for FrontendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (tag, pos, msg) = match self {
            FrontendError::Parse { pos, msg } => ("parse error", pos, msg),
            FrontendError::Sort { pos, msg } => ("sort error", pos, msg),
            FrontendError::Unsupported { pos, msg } => ("unsupported", pos, msg),
        };
        match pos {
            Some(p) => write!(f, "{tag} at {p}: {msg}"),
            None => write!(f, "{tag}: {msg}"),
        }
    }
}

impl std::error::Error for FrontendError {}

fn perr<T>(pos: Pos, msg: impl Into<String>) -> Result<T, FrontendError> {
    Err(FrontendError::Parse {
        pos: Some(pos),
        msg: msg.into(),
    })
}

fn serr<T>(pos: Pos, msg: impl Into<String>) -> Result<T, FrontendError> {
    Err(FrontendError::Sort {
        pos: Some(pos),
        msg: msg.into(),
    })
}

fn uerr<T>(pos: Pos, msg: impl Into<String>) -> Result<T, FrontendError> {
    Err(FrontendError::Unsupported {
        pos: Some(pos),
        msg: msg.into(),
    })
}

/// Boolean formula tree over interned atoms.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    False,
    Atom(AtomId, bool),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn negated(self) -> Formula {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Atom(a, pol) => Formula::Atom(a, !pol),
            Formula::Not(f) => *f,
            other => Formula::Not(Box::new(other)),
        }
    }

    fn and(fs: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for f in fs {
            match f {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(gs) => out.extend(gs),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    fn or(fs: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for f in fs {
            match f {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(gs) => out.extend(gs),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }
}

/// A parsed input script.
#[derive(Debug, Clone, Default)]
pub struct InputScript {
    /// Declared field variables, in declaration order.
    pub declared: Vec<VarId>,
    pub assertions: Vec<Formula>,
    pub has_check_sat: bool,
    pub wants_model: bool,
}

pub fn parse(text: &str) -> Result<(InputScript, AtomTable), FrontendError> {
    let exprs = read_all(text).map_err(|e| FrontendError::Parse {
        pos: Some(e.pos),
        msg: e.msg,
    })?;
    let mut atoms = AtomTable::new();
    let mut script = InputScript::default();
    for e in &exprs {
        let pos = e.pos();
        let Some(items) = e.as_list() else {
            return perr(pos, "expected a command");
        };
        let Some(head) = items.first().and_then(|h| h.as_sym()) else {
            return perr(pos, "expected a command name");
        };
        match head {
            "set-logic" => {
                let logic = items.get(1).and_then(|s| s.as_sym()).unwrap_or("");
                if logic != "QF_FF" {
                    return uerr(pos, format!("logic `{logic}` (only QF_FF is supported)"));
                }
            }
            "set-info" | "set-option" => {}
            "declare-fun" => {
                if items.len() != 4 {
                    return perr(pos, "declare-fun expects (declare-fun name () sort)");
                }
                let name = sym_at(&items[1])?;
                match items[2].as_list() {
                    Some([]) => {}
                    _ => {
                        return uerr(pos, "declare-fun with arguments (only constants supported)")
                    }
                }
                declare(&mut script, &mut atoms, name, &items[3])?;
            }
            "declare-const" => {
                if items.len() != 3 {
                    return perr(pos, "declare-const expects (declare-const name sort)");
                }
                let name = sym_at(&items[1])?;
                declare(&mut script, &mut atoms, name, &items[2])?;
            }
            "assert" => {
                if items.len() != 2 {
                    return perr(pos, "assert expects one argument");
                }
                let f = build_formula(&items[1], &script, &mut atoms)?;
                script.assertions.push(f);
            }
            "check-sat" => {
                if script.has_check_sat {
                    return uerr(pos, "incremental solving (multiple check-sat)");
                }
                script.has_check_sat = true;
            }
            "get-model" => script.wants_model = true,
            "exit" => break,
            "define-sort" | "define-fun" | "push" | "pop" | "get-unsat-core" | "get-value" => {
                return uerr(pos, format!("command `{head}`"))
            }
            other => return uerr(pos, format!("command `{other}`")),
        }
    }
    Ok((script, atoms))
}

fn sym_at<'a>(e: &'a SExp) -> Result<&'a str, FrontendError> {
    e.as_sym()
        .ok_or(())
        .or_else(|_| perr(e.pos(), "expected a symbol"))
}

fn declare(
    script: &mut InputScript,
    atoms: &mut AtomTable,
    name: &str,
    sort: &SExp,
) -> Result<(), FrontendError> {
    check_field_sort(sort, atoms)?;
    match atoms.declare_original(name) {
        Some(v) => {
            script.declared.push(v);
            Ok(())
        }
        None => perr(sort.pos(), format!("`{name}` is already declared")),
    }
}

/// Parses `(_ FiniteField p)` and installs/checks the solver-global prime.
fn check_field_sort(sort: &SExp, atoms: &mut AtomTable) -> Result<(), FrontendError> {
    let pos = sort.pos();
    let items = match sort.as_list() {
        Some(items) => items,
        None => {
            let name = sort.as_sym().unwrap_or("?");
            if name == "Bool" {
                return uerr(pos, "Bool constants (only field variables are supported)");
            }
            return serr(pos, format!("unknown sort `{name}`"));
        }
    };
    match items {
        [u, ff, n] if u.as_sym() == Some("_") && ff.as_sym() == Some("FiniteField") => {
            let digits = sym_at(n)?;
            let p: BigUint = digits
                .parse()
                .map_err(|_| FrontendError::Parse {
                    pos: Some(n.pos()),
                    msg: format!("invalid field size `{digits}`"),
                })?;
            install_prime(atoms, p, pos)
        }
        _ => serr(pos, "expected the sort (_ FiniteField p)"),
    }
}

fn install_prime(atoms: &mut AtomTable, p: BigUint, pos: Pos) -> Result<(), FrontendError> {
    if atoms.has_field() {
        if *atoms.field().modulus() != p {
            return serr(
                pos,
                format!(
                    "mixed field sorts: {} vs {}",
                    atoms.field().modulus(),
                    p
                ),
            );
        }
        return Ok(());
    }
    if p == BigUint::from(2u32) {
        return serr(pos, "the field GF(2) is not supported (odd primes only)");
    }
    match PrimeField::new(p) {
        Ok(f) => {
            atoms.set_field(f);
            Ok(())
        }
        Err(e) => serr(pos, e.to_string()),
    }
}

fn build_formula(
    e: &SExp,
    script: &InputScript,
    atoms: &mut AtomTable,
) -> Result<Formula, FrontendError> {
    let pos = e.pos();
    if let Some(s) = e.as_sym() {
        return match s {
            "true" => Ok(Formula::True),
            "false" => Ok(Formula::False),
            other => perr(pos, format!("expected a boolean term, found `{other}`")),
        };
    }
    let items = e.as_list().unwrap();
    let Some(head) = items.first().and_then(|h| h.as_sym()) else {
        return perr(pos, "expected a boolean operator");
    };
    match head {
        "not" => {
            if items.len() != 2 {
                return perr(pos, "not expects one argument");
            }
            Ok(build_formula(&items[1], script, atoms)?.negated())
        }
        "and" => {
            let fs = items[1..]
                .iter()
                .map(|x| build_formula(x, script, atoms))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Formula::and(fs))
        }
        "or" => {
            let fs = items[1..]
                .iter()
                .map(|x| build_formula(x, script, atoms))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Formula::or(fs))
        }
        "=>" => {
            if items.len() < 3 {
                return perr(pos, "=> expects at least two arguments");
            }
            // right-associative: (=> a b c) is a -> (b -> c)
            let mut f = build_formula(items.last().unwrap(), script, atoms)?;
            for x in items[1..items.len() - 1].iter().rev() {
                let a = build_formula(x, script, atoms)?;
                f = Formula::or(vec![a.negated(), f]);
            }
            Ok(f)
        }
        "ite" => {
            if items.len() != 4 {
                return perr(pos, "ite expects three arguments");
            }
            if classify(&items[2]) != TermSort::Bool {
                return uerr(pos, "ite over field terms");
            }
            let c = build_formula(&items[1], script, atoms)?;
            let t = build_formula(&items[2], script, atoms)?;
            let e2 = build_formula(&items[3], script, atoms)?;
            Ok(Formula::and(vec![
                Formula::or(vec![c.clone().negated(), t]),
                Formula::or(vec![c, e2]),
            ]))
        }
        "=" => {
            if items.len() < 3 {
                return perr(pos, "= expects at least two arguments");
            }
            if classify(&items[1]) == TermSort::Bool {
                // boolean equivalence, chained pairwise
                let fs = items[1..]
                    .iter()
                    .map(|x| build_formula(x, script, atoms))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut conj = Vec::new();
                for w in fs.windows(2) {
                    conj.push(Formula::or(vec![w[0].clone().negated(), w[1].clone()]));
                    conj.push(Formula::or(vec![w[1].clone().negated(), w[0].clone()]));
                }
                return Ok(Formula::and(conj));
            }
            let ts = items[1..]
                .iter()
                .map(|x| build_field_term(x, script, atoms))
                .collect::<Result<Vec<_>, _>>()?;
            let mut conj = Vec::new();
            for w in ts.windows(2) {
                conj.push(equation(&w[0], &w[1], atoms));
            }
            Ok(Formula::and(conj))
        }
        "distinct" => {
            if items.len() < 3 {
                return perr(pos, "distinct expects at least two arguments");
            }
            if classify(&items[1]) == TermSort::Bool {
                return uerr(pos, "distinct over booleans");
            }
            let ts = items[1..]
                .iter()
                .map(|x| build_field_term(x, script, atoms))
                .collect::<Result<Vec<_>, _>>()?;
            let mut conj = Vec::new();
            for i in 0..ts.len() {
                for j in i + 1..ts.len() {
                    conj.push(equation(&ts[i], &ts[j], atoms).negated());
                }
            }
            Ok(Formula::and(conj))
        }
        "forall" | "exists" => uerr(pos, "quantifiers"),
        other => perr(pos, format!("unknown boolean operator `{other}`")),
    }
}

fn equation(a: &Polynomial, b: &Polynomial, atoms: &mut AtomTable) -> Formula {
    let field = atoms.field().clone();
    let order = atoms.order();
    let diff = a.sub(b, &field, &order);
    match atoms.intern_equation(&diff) {
        Interned::True => Formula::True,
        Interned::False => Formula::False,
        Interned::Atom(id) => Formula::Atom(id, true),
    }
}

#[derive(PartialEq, Eq, Debug, Clone, Copy)]
enum TermSort {
    Bool,
    Field,
}

fn classify(e: &SExp) -> TermSort {
    match e {
        SExp::Sym(s, _) => match s.as_str() {
            "true" | "false" => TermSort::Bool,
            _ => TermSort::Field,
        },
        SExp::Str(_, _) => TermSort::Field,
        SExp::List(items, _) => match items.first().and_then(|h| h.as_sym()) {
            Some("not") | Some("and") | Some("or") | Some("=>") | Some("=")
            | Some("distinct") | Some("ite") | Some("forall") | Some("exists") => TermSort::Bool,
            _ => TermSort::Field,
        },
    }
}

fn build_field_term(
    e: &SExp,
    script: &InputScript,
    atoms: &mut AtomTable,
) -> Result<Polynomial, FrontendError> {
    let pos = e.pos();
    match e {
        SExp::Sym(s, _) => {
            if let Some(rest) = s.strip_prefix("#f") {
                return field_literal(rest, atoms, pos);
            }
            if s.chars().all(|c| c.is_ascii_digit()) {
                return perr(
                    pos,
                    format!("raw numeral `{s}`: field constants are written #fK or (as ffK S)"),
                );
            }
            match atoms.lookup_name(s) {
                Some(v) => Ok(Polynomial::var(v, atoms.field())),
                None => perr(pos, format!("undeclared variable `{s}`")),
            }
        }
        SExp::Str(_, _) => perr(pos, "unexpected string literal"),
        SExp::List(items, _) => {
            let Some(head) = items.first().and_then(|h| h.as_sym()) else {
                return perr(pos, "expected a field operator");
            };
            let field = || -> Result<PrimeField, FrontendError> {
                if atoms.has_field() {
                    Ok(atoms.field().clone())
                } else {
                    perr(pos, "no field sort declared yet")
                }
            };
            match head {
                "ff.add" | "ff.mul" => {
                    if items.len() < 2 {
                        return perr(pos, format!("{head} expects arguments"));
                    }
                    let f = field()?;
                    let order = atoms.order();
                    let ts = items[1..]
                        .iter()
                        .map(|x| build_field_term(x, script, atoms))
                        .collect::<Result<Vec<_>, _>>()?;
                    let mut acc = ts[0].clone();
                    for t in &ts[1..] {
                        acc = if head == "ff.add" {
                            acc.add(t, &f, &order)
                        } else {
                            acc.mul(t, &f, &order)
                        };
                    }
                    Ok(acc)
                }
                "ff.neg" => {
                    if items.len() != 2 {
                        return perr(pos, "ff.neg expects one argument");
                    }
                    let f = field()?;
                    Ok(build_field_term(&items[1], script, atoms)?.neg(&f))
                }
                "as" => {
                    if items.len() != 3 {
                        return perr(pos, "as expects a value and a sort");
                    }
                    let lit = sym_at(&items[1])?;
                    let Some(digits) = lit.strip_prefix("ff") else {
                        return perr(items[1].pos(), format!("unknown as-value `{lit}`"));
                    };
                    check_field_sort(&items[2], atoms)?;
                    parse_signed_constant(digits, atoms, items[1].pos())
                }
                "ff.bitsum" => uerr(pos, "ff.bitsum"),
                other => perr(pos, format!("unknown field operator `{other}`")),
            }
        }
    }
}

/// `#fK` or `#fKmP` literals.
fn field_literal(
    rest: &str,
    atoms: &mut AtomTable,
    pos: Pos,
) -> Result<Polynomial, FrontendError> {
    let (val, modulus) = match rest.split_once('m') {
        Some((v, m)) => (v, Some(m)),
        None => (rest, None),
    };
    if let Some(m) = modulus {
        let p: BigUint = m
            .parse()
            .map_err(|_| FrontendError::Parse {
                pos: Some(pos),
                msg: format!("invalid modulus in field literal `#f{rest}`"),
            })?;
        install_prime(atoms, p, pos)?;
    }
    if !atoms.has_field() {
        return perr(pos, "field literal before any field sort is known");
    }
    parse_signed_constant(val, atoms, pos)
}

fn parse_signed_constant(
    digits: &str,
    atoms: &AtomTable,
    pos: Pos,
) -> Result<Polynomial, FrontendError> {
    let (neg, body) = match digits.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, digits),
    };
    let n: BigUint = body.parse().map_err(|_| FrontendError::Parse {
        pos: Some(pos),
        msg: format!("invalid field constant `{digits}`"),
    })?;
    let f = atoms.field();
    let mut c = f.elem(n);
    if neg {
        c = f.neg(&c);
    }
    Ok(Polynomial::constant(c))
}
