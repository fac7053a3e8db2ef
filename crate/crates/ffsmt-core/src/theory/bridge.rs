//! Optional external-solver bridges, off by default.
//!
//! The integer linear module can delegate to an external QF_LIA solver via
//! named assertions and `get-unsat-core`; the real non-linear module can ask
//! an external QF_NRA solver for a model. Both speak plain SMT-LIB over a
//! subprocess pipe; any response that does not parse makes the caller fall
//! back to the internal implementation, so a broken or missing tool can
//! never flip a verdict.

use super::lia::{LiaConstraint, LiaOp};
use crate::field::PrimeField;
use crate::poly::{Polynomial, VarId, VarTable};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use std::io::Write;
use std::process::{Command, Stdio};
use std::time::Duration;

#[derive(Debug, Clone)]
pub struct ExternalBackend {
    /// Shell command reading SMT-LIB on stdin and answering on stdout.
    pub command: String,
    pub timeout: Duration,
}

/// Runs the backend on a script. None on spawn failure, timeout, or a
/// non-zero exit.
pub fn run_backend(backend: &ExternalBackend, script: &str) -> Option<String> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&backend.command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .ok()?;
    child
        .stdin
        .take()?
        .write_all(script.as_bytes())
        .ok()?;
    let deadline = std::time::Instant::now() + backend.timeout;
    loop {
        match child.try_wait().ok()? {
            Some(status) => {
                if !status.success() {
                    return None;
                }
                break;
            }
            None => {
                if std::time::Instant::now() > deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    return None;
                }
                std::thread::sleep(Duration::from_millis(5));
            }
        }
    }
    let mut out = String::new();
    use std::io::Read;
    child.stdout.take()?.read_to_string(&mut out).ok()?;
    Some(out)
}

fn lia_term(terms: &[(usize, BigInt)]) -> String {
    let parts: Vec<String> = terms
        .iter()
        .map(|(v, c)| {
            if *c == BigInt::from(1) {
                format!("v{v}")
            } else if c.is_negative() {
                format!("(* (- {}) v{v})", c.magnitude())
            } else {
                format!("(* {c} v{v})")
            }
        })
        .collect();
    match parts.len() {
        0 => "0".to_string(),
        1 => parts.into_iter().next().unwrap(),
        _ => format!("(+ {})", parts.join(" ")),
    }
}

fn int_lit(k: &BigInt) -> String {
    if k.is_negative() {
        format!("(- {})", k.magnitude())
    } else {
        k.to_string()
    }
}

/// QF_LIA script with one named assertion per constraint (`c0`, `c1`, ...).
pub fn emit_lia_script(nvars: usize, constraints: &[LiaConstraint]) -> String {
    let mut s = String::from(
        "(set-logic QF_LIA)\n(set-option :produce-unsat-cores true)\n",
    );
    for v in 0..nvars {
        s.push_str(&format!("(declare-fun v{v} () Int)\n"));
    }
    for (i, c) in constraints.iter().enumerate() {
        let lhs = lia_term(&c.terms);
        let k = int_lit(&c.k);
        let body = match c.op {
            LiaOp::Eq => format!("(= {lhs} {k})"),
            LiaOp::Neq => format!("(not (= {lhs} {k}))"),
            LiaOp::Le => format!("(<= {lhs} {k})"),
            LiaOp::Ge => format!("(>= {lhs} {k})"),
        };
        s.push_str(&format!("(assert (! {body} :named c{i}))\n"));
    }
    s.push_str("(check-sat)\n(get-unsat-core)\n");
    s
}

#[derive(Debug, PartialEq, Eq)]
pub enum LiaBridgeAnswer {
    Sat,
    /// Indices of the named assertions in the reported core.
    Unsat(Vec<usize>),
    Unusable,
}

pub fn parse_lia_response(text: &str) -> LiaBridgeAnswer {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    match lines.next() {
        Some("sat") => LiaBridgeAnswer::Sat,
        Some("unsat") => {
            let rest: String = lines.collect::<Vec<_>>().join(" ");
            let inner = rest.trim().trim_start_matches('(').trim_end_matches(')');
            let mut core = Vec::new();
            for name in inner.split_whitespace() {
                let Some(idx) = name.strip_prefix('c').and_then(|n| n.parse::<usize>().ok())
                else {
                    return LiaBridgeAnswer::Unusable;
                };
                core.push(idx);
            }
            LiaBridgeAnswer::Unsat(core)
        }
        _ => LiaBridgeAnswer::Unusable,
    }
}

/// QF_NRA script over the reals: balanced-lift of the field constraints.
pub fn emit_nra_script(
    constraints: &[(Polynomial, bool)],
    field: &PrimeField,
    vars: &VarTable,
) -> String {
    let mut s = String::from("(set-logic QF_NRA)\n(set-option :produce-models true)\n");
    let mut declared: std::collections::BTreeSet<VarId> = std::collections::BTreeSet::new();
    for (p, _) in constraints {
        declared.extend(p.vars());
    }
    for v in &declared {
        s.push_str(&format!("(declare-fun {} () Real)\n", vars.name(*v)));
    }
    for (p, is_eq) in constraints {
        let mut terms = Vec::new();
        for (m, c) in p.terms() {
            let coeff = field.balanced(c);
            let mono: Vec<String> = m
                .exps()
                .iter()
                .flat_map(|&(v, e)| {
                    std::iter::repeat(vars.name(v).to_string()).take(e as usize)
                })
                .collect();
            let body = if mono.is_empty() {
                int_lit(&coeff)
            } else if coeff == BigInt::from(1) {
                if mono.len() == 1 {
                    mono[0].clone()
                } else {
                    format!("(* {})", mono.join(" "))
                }
            } else {
                format!("(* {} {})", int_lit(&coeff), mono.join(" "))
            };
            terms.push(body);
        }
        let lhs = match terms.len() {
            0 => "0".to_string(),
            1 => terms.into_iter().next().unwrap(),
            _ => format!("(+ {})", terms.join(" ")),
        };
        if *is_eq {
            s.push_str(&format!("(assert (= {lhs} 0))\n"));
        } else {
            s.push_str(&format!("(assert (not (= {lhs} 0)))\n"));
        }
    }
    s.push_str("(check-sat)\n(get-model)\n");
    s
}

/// A value reported by the external NRA solver.
#[derive(Debug, Clone, PartialEq)]
pub enum NraValue {
    Rational(BigRational),
    /// `sqrt(alpha)` with an explicit sign.
    Root { negative: bool, alpha: BigRational },
}

/// Extracts `(define-fun name () Real value)` entries. Rational values and
/// square-root algebraic numbers written as
/// `(root-obj (+ (* x x) (- c)) idx)` are understood; anything else makes
/// the whole model unusable.
pub fn parse_nra_model(text: &str) -> Option<Vec<(String, NraValue)>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    if lines.next() != Some("sat") {
        return None;
    }
    let rest: String = lines.collect::<Vec<_>>().join(" ");
    let exprs = crate::frontend::sexp::read_all(&rest).ok()?;
    let mut out = Vec::new();
    for e in &exprs {
        let Some(items) = e.as_list() else { continue };
        // either (model (define-fun ..) ..) or a bare list of define-funs
        let entries: Vec<&crate::frontend::sexp::SExp> =
            if items.first().and_then(|h| h.as_sym()) == Some("model") {
                items[1..].iter().collect()
            } else {
                items.iter().collect()
            };
        for d in entries {
            let Some(parts) = d.as_list() else { continue };
            if parts.first().and_then(|h| h.as_sym()) != Some("define-fun") {
                continue;
            }
            if parts.len() != 5 {
                return None;
            }
            let name = parts[1].as_sym()?.to_string();
            let value = parse_nra_value(&parts[4])?;
            out.push((name, value));
        }
    }
    Some(out)
}

fn parse_nra_value(e: &crate::frontend::sexp::SExp) -> Option<NraValue> {
    parse_rational(e).map(NraValue::Rational).or_else(|| {
        let items = e.as_list()?;
        if items.first()?.as_sym()? != "root-obj" {
            return None;
        }
        // (root-obj (+ (* x x) (- c)) idx): the roots of x^2 - c sorted
        // ascending, so index 1 is the negative root
        let idx: u32 = items.get(2)?.as_sym()?.parse().ok()?;
        let poly = items.get(1)?.as_list()?;
        if poly.first()?.as_sym()? != "+" || poly.len() != 3 {
            return None;
        }
        let sq = poly.get(1)?.as_list()?;
        if sq.first()?.as_sym()? != "*" || sq.len() != 3 {
            return None;
        }
        let x1 = sq.get(1)?.as_sym()?;
        let x2 = sq.get(2)?.as_sym()?;
        if x1 != x2 {
            return None;
        }
        let c = parse_rational(items[1].as_list()?.get(2)?)?;
        let alpha = -c;
        if alpha.is_negative() {
            return None;
        }
        Some(NraValue::Root {
            negative: idx == 1,
            alpha,
        })
    })
}

fn parse_rational(e: &crate::frontend::sexp::SExp) -> Option<BigRational> {
    match e {
        crate::frontend::sexp::SExp::Sym(s, _) => {
            let n: BigInt = s.parse().ok()?;
            Some(BigRational::from(n))
        }
        crate::frontend::sexp::SExp::List(items, _) => {
            match items.first()?.as_sym()? {
                "-" if items.len() == 2 => Some(-parse_rational(&items[1])?),
                "/" if items.len() == 3 => {
                    let a = parse_rational(&items[1])?;
                    let b = parse_rational(&items[2])?;
                    Some(a / b)
                }
                _ => None,
            }
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    #[test]
    fn lia_script_roundtrip() {
        let cs = vec![
            LiaConstraint {
                terms: vec![(0, BigInt::from(1)), (1, BigInt::from(-2))],
                op: LiaOp::Eq,
                k: BigInt::from(3),
            },
            LiaConstraint {
                terms: vec![(0, BigInt::from(1))],
                op: LiaOp::Neq,
                k: BigInt::from(0),
            },
        ];
        let script = emit_lia_script(2, &cs);
        assert!(script.contains("(set-logic QF_LIA)"));
        assert!(script.contains("(assert (! (= (+ v0 (* (- 2) v1)) 3) :named c0))"));
        assert!(script.contains("(assert (! (not (= v0 0)) :named c1))"));
        assert!(script.contains("(get-unsat-core)"));

        assert_eq!(parse_lia_response("sat\n"), LiaBridgeAnswer::Sat);
        assert_eq!(
            parse_lia_response("unsat\n(c0 c1)\n"),
            LiaBridgeAnswer::Unsat(vec![0, 1])
        );
        assert_eq!(
            parse_lia_response("unknown\n"),
            LiaBridgeAnswer::Unusable
        );
        assert_eq!(
            parse_lia_response("unsat\n(weird)\n"),
            LiaBridgeAnswer::Unusable
        );
    }

    #[test]
    fn nra_script_and_model_parse() {
        let field = PrimeField::new(BigUint::from(7u32)).unwrap();
        let mut vars = VarTable::new();
        let x = vars.alloc(crate::poly::VarKind::Original("x".into()));
        let ord = crate::poly::MonomialOrder::Grevlex;
        let px = Polynomial::var(x, &field);
        let f = px
            .mul(&px, &field, &ord)
            .sub(&Polynomial::constant(field.elem_u64(2)), &field, &ord);
        let script = emit_nra_script(&[(f, true)], &field, &vars);
        assert!(script.contains("(set-logic QF_NRA)"));
        assert!(script.contains("(declare-fun x () Real)"));
        assert!(script.contains("(assert (= (+ (* x x) (- 2)) 0))"));

        let model = parse_nra_model(
            "sat\n((define-fun x () Real (root-obj (+ (* x x) (- 2)) 2)))\n",
        )
        .unwrap();
        assert_eq!(model.len(), 1);
        assert_eq!(
            model[0].1,
            NraValue::Root {
                negative: false,
                alpha: BigRational::from(BigInt::from(2)),
            }
        );
        let model = parse_nra_model(
            "sat\n(model (define-fun y () Real (- (/ 1 2))))\n",
        )
        .unwrap();
        assert_eq!(
            model[0].1,
            NraValue::Rational(BigRational::new(BigInt::from(-1), BigInt::from(2)))
        );
        // unparseable values discard the model
        assert!(parse_nra_model("sat\n((define-fun x () Real (exp 1)))\n").is_none());
        assert!(parse_nra_model("unsat\n").is_none());
    }

    #[test]
    fn backend_runner_times_out() {
        let backend = ExternalBackend {
            command: "sleep 5".into(),
            timeout: Duration::from_millis(50),
        };
        assert!(run_backend(&backend, "(check-sat)").is_none());
        let echo = ExternalBackend {
            command: "cat >/dev/null; echo sat".into(),
            timeout: Duration::from_secs(5),
        };
        assert_eq!(run_backend(&echo, "x").as_deref().map(str::trim), Some("sat"));
    }
}
