//! Shared test utilities: an exhaustive-enumeration oracle for small scripts
//! and generators for the regression and randomized instances.

use ffsmt_core::frontend::{eval_formula, parse};
use ffsmt_core::{Fe, VarId};
use num_traits::ToPrimitive;
use rand::rngs::StdRng;
use rand::Rng;
use std::collections::BTreeMap;
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleVerdict {
    Sat,
    Unsat,
}

/// Decides a script by enumerating every assignment of the declared
/// variables. Independent of the solver's search: it walks the parsed
/// formula tree with polynomial evaluation only.
pub fn brute_force(text: &str) -> OracleVerdict {
    let (script, atoms) = parse(text).expect("oracle parse");
    let field = atoms.field().clone();
    let p = field.modulus().to_u64().expect("oracle needs a small prime");
    let vars: Vec<VarId> = script.declared.clone();
    assert!(
        (p as f64).powi(vars.len() as i32) <= 5e6,
        "oracle instance too large"
    );
    let mut vals = vec![0u64; vars.len()];
    loop {
        let assignment: BTreeMap<VarId, Fe> = vars
            .iter()
            .zip(&vals)
            .map(|(v, k)| (*v, field.elem_u64(*k)))
            .collect();
        let ok = script
            .assertions
            .iter()
            .all(|f| eval_formula(f, &atoms, &assignment) == Some(true));
        if ok {
            return OracleVerdict::Sat;
        }
        let mut i = 0;
        loop {
            if i == vals.len() {
                return OracleVerdict::Unsat;
            }
            vals[i] += 1;
            if vals[i] < p {
                break;
            }
            vals[i] = 0;
            i += 1;
        }
    }
}

pub fn header(p: u64, vars: &[&str]) -> String {
    let mut s = String::from("(set-logic QF_FF)\n");
    for v in vars {
        let _ = writeln!(s, "(declare-fun {v} () (_ FiniteField {p}))");
    }
    s
}

/// The binary-constraint instance: x(x-1) = 0, x != 0, x != 1.
pub fn binary_unsat(p: u64) -> String {
    let mut s = header(p, &["x"]);
    s.push_str(
        "(assert (= (ff.mul x (ff.add x (ff.neg #f1))) #f0))\n\
         (assert (not (= x #f0)))\n\
         (assert (not (= x #f1)))\n\
         (check-sat)\n",
    );
    s
}

/// The retracted variant: x != 0, x != 1 alone.
pub fn binary_retracted_sat(p: u64) -> String {
    let mut s = header(p, &["x"]);
    s.push_str(
        "(assert (not (= x #f0)))\n\
         (assert (not (= x #f1)))\n\
         (check-sat)\n",
    );
    s
}

/// The abstracted-cycle instance: x - y^2 != 0, y^2 - yz = 0, yz - x = 0.
pub fn linearized_cycle_unsat(p: u64) -> String {
    let mut s = header(p, &["x", "y", "z"]);
    s.push_str(
        "(assert (not (= x (ff.mul y y))))\n\
         (assert (= (ff.mul y y) (ff.mul y z)))\n\
         (assert (= (ff.mul y z) x))\n\
         (check-sat)\n",
    );
    s
}

/// Duplicated squares/sum/difference circuit with equal inputs and a
/// disjunction of output disequations (the weak-safety query; unsat).
pub fn circuit_unsat(p: u64) -> String {
    let vars = [
        "i1", "i2", "t1", "t2", "o1", "o2", "j1", "j2", "u1", "u2", "q1", "q2",
    ];
    let mut s = header(p, &vars);
    s.push_str(
        "(assert (= t1 (ff.mul i1 i1)))\n\
         (assert (= t2 (ff.mul i2 i2)))\n\
         (assert (= o1 (ff.add t1 t2)))\n\
         (assert (= o2 (ff.add t1 (ff.neg t2))))\n\
         (assert (= u1 (ff.mul j1 j1)))\n\
         (assert (= u2 (ff.mul j2 j2)))\n\
         (assert (= q1 (ff.add u1 u2)))\n\
         (assert (= q2 (ff.add u1 (ff.neg u2))))\n\
         (assert (= i1 j1))\n\
         (assert (= i2 j2))\n\
         (assert (or (not (= o1 q1)) (not (= o2 q2))))\n\
         (check-sat)\n",
    );
    s
}

/// Bitsum instance: two n-bit decompositions of one input and a flipped bit.
pub fn bitsum_unsat(n: u32, p: u64, flipped_bit: u32) -> String {
    let mut names: Vec<String> = vec!["in".to_string()];
    for i in 0..n {
        names.push(format!("x{i}"));
    }
    for i in 0..n {
        names.push(format!("y{i}"));
    }
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let mut s = header(p, &refs);
    for b in 0..n {
        for v in ["x", "y"] {
            let _ = writeln!(
                s,
                "(assert (= (ff.mul {v}{b} (ff.add {v}{b} (ff.neg #f1))) #f0))"
            );
        }
    }
    for v in ["x", "y"] {
        let mut sum = String::new();
        for b in 0..n {
            let _ = write!(sum, " (ff.mul #f{} {v}{b})", 1u64 << b);
        }
        let _ = writeln!(s, "(assert (= in (ff.add{sum})))");
    }
    let _ = writeln!(s, "(assert (not (= x{flipped_bit} y{flipped_bit})))");
    s.push_str("(check-sat)\n");
    s
}

/// Shared-sum variant: both decompositions equal in1 + in2, which overflows
/// individually; only the difference rule applies.
pub fn shared_sum_unsat(n: u32, p: u64, flipped_bit: u32) -> String {
    let mut names: Vec<String> = vec!["in1".to_string(), "in2".to_string()];
    for i in 0..n {
        names.push(format!("x{i}"));
    }
    for i in 0..n {
        names.push(format!("y{i}"));
    }
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let mut s = header(p, &refs);
    for b in 0..n {
        for v in ["x", "y"] {
            let _ = writeln!(
                s,
                "(assert (= (ff.mul {v}{b} (ff.add {v}{b} (ff.neg #f1))) #f0))"
            );
        }
    }
    for v in ["x", "y"] {
        let mut sum = String::new();
        for b in 0..n {
            let _ = write!(sum, " (ff.mul #f{} {v}{b})", 1u64 << b);
        }
        let _ = writeln!(s, "(assert (= (ff.add in1 in2) (ff.add{sum})))");
    }
    let _ = writeln!(s, "(assert (not (= x{flipped_bit} y{flipped_bit})))");
    s.push_str("(check-sat)\n");
    s
}

/// Factoring example: xy + x = 0, x != 0, y + 1 != 0.
pub fn factoring_unsat(p: u64) -> String {
    let mut s = header(p, &["x", "y"]);
    s.push_str(
        "(assert (= (ff.add (ff.mul x y) x) #f0))\n\
         (assert (not (= x #f0)))\n\
         (assert (not (= (ff.add y #f1) #f0)))\n\
         (check-sat)\n",
    );
    s
}

/// Non-residue square: x^2 = a for a fixed quadratic non-residue a.
pub fn non_residue_unknown(p: u64, a: u64) -> String {
    let mut s = header(p, &["x"]);
    let _ = writeln!(s, "(assert (= (ff.mul x x) #f{a}))");
    s.push_str("(check-sat)\n");
    s
}

/// Random instance generator for the oracle-equivalence gate. Non-linear
/// atoms appear only as positive unit assertions (products of linear
/// factors the clause-inference module can split completely); linear and
/// domain atoms combine into small random clauses of either polarity, so
/// unsatisfiable leaves always fall inside the complete linear fragment.
pub fn random_instance(rng: &mut StdRng) -> String {
    let p = *[5u64, 7, 13][..].iter().nth(rng.gen_range(0..3)).unwrap();
    let nvars = rng.gen_range(1..=4usize);
    let names = ["a", "b", "c", "d"];
    let vars = &names[..nvars];
    let mut s = header(p, vars);

    let var = |rng: &mut StdRng| names[rng.gen_range(0..nvars)];
    let lin_term = |rng: &mut StdRng| -> String {
        let mut parts: Vec<String> = Vec::new();
        for &v in vars.iter() {
            let c = rng.gen_range(0..p);
            if c == 1 {
                parts.push(v.to_string());
            } else if c != 0 {
                parts.push(format!("(ff.mul #f{c} {v})"));
            }
        }
        let k = rng.gen_range(0..p);
        if k != 0 || parts.is_empty() {
            parts.push(format!("#f{k}"));
        }
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            format!("(ff.add {})", parts.join(" "))
        }
    };

    let n_nonlinear = rng.gen_range(0..=2usize);
    for _ in 0..n_nonlinear {
        match rng.gen_range(0..3) {
            0 => {
                // (x - alpha)(x - beta) = 0
                let x = var(rng);
                let alpha = rng.gen_range(0..p);
                let beta = rng.gen_range(0..p);
                let _ = writeln!(
                    s,
                    "(assert (= (ff.mul (ff.add {x} (ff.neg #f{alpha})) (ff.add {x} (ff.neg #f{beta}))) #f0))"
                );
            }
            1 if nvars >= 2 => {
                // product of distinct-variable root factors
                let k = rng.gen_range(2..=nvars.min(3));
                let factors: Vec<String> = vars
                    .iter()
                    .take(k)
                    .map(|v| format!("(ff.add {v} (ff.neg #f{}))", rng.gen_range(0..p)))
                    .collect();
                let _ = writeln!(s, "(assert (= (ff.mul {}) #f0))", factors.join(" "));
            }
            1 => {
                let x = var(rng);
                let alpha = rng.gen_range(0..p);
                let _ = writeln!(
                    s,
                    "(assert (= (ff.mul {x} (ff.add {x} (ff.neg #f{alpha}))) #f0))"
                );
            }
            _ => {
                // product of two general linear polynomials over <= 2 vars
                let x = names[0];
                let y = names[nvars.min(2) - 1];
                let mk = |rng: &mut StdRng| {
                    format!(
                        "(ff.add (ff.mul #f{} {x}) (ff.mul #f{} {y}) #f{})",
                        rng.gen_range(0..p),
                        rng.gen_range(0..p),
                        rng.gen_range(0..p)
                    )
                };
                let (l1, l2) = (mk(rng), mk(rng));
                let _ = writeln!(s, "(assert (= (ff.mul {l1} {l2}) #f0))");
            }
        }
    }

    // up to 3 linear atoms combined into clauses with random polarity
    let n_linear = rng.gen_range(1..=3usize);
    let mut linear_atoms: Vec<String> = Vec::new();
    for _ in 0..n_linear {
        if rng.gen_bool(0.3) {
            let x = var(rng);
            let k = rng.gen_range(0..p);
            linear_atoms.push(format!("(= {x} #f{k})"));
        } else {
            linear_atoms.push(format!("(= {} #f{})", lin_term(rng), rng.gen_range(0..p)));
        }
    }
    let n_clauses = rng.gen_range(1..=2usize);
    for _ in 0..n_clauses {
        let width = rng.gen_range(1..=2usize.min(linear_atoms.len()));
        let mut lits = Vec::new();
        for _ in 0..width {
            let a = &linear_atoms[rng.gen_range(0..linear_atoms.len())];
            if rng.gen_bool(0.5) {
                lits.push(a.clone());
            } else {
                lits.push(format!("(not {a})"));
            }
        }
        if lits.len() == 1 {
            let _ = writeln!(s, "(assert {})", lits[0]);
        } else {
            let _ = writeln!(s, "(assert (or {}))", lits.join(" "));
        }
    }
    s.push_str("(check-sat)\n");
    s
}
