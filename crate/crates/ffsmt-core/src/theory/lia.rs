//! Internal linear integer arithmetic solver: a bounded rational simplex in
//! the style of Dutertre-de Moura with branch-and-bound on fractional
//! variables and case splits for disequalities. Depth and node caps turn
//! hard instances into `Unknown`, never into a wrong verdict.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LiaOp {
    Eq,
    Neq,
    Le,
    Ge,
}

/// `sum terms <op> k` over integer variables.
#[derive(Debug, Clone)]
pub struct LiaConstraint {
    pub terms: Vec<(usize, BigInt)>,
    pub op: LiaOp,
    pub k: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LiaVerdict {
    Sat(Vec<BigInt>),
    Unsat,
    Unknown,
}

#[derive(Debug, Clone, Copy)]
pub struct LiaLimits {
    pub max_nodes: usize,
    pub max_depth: usize,
    pub max_pivots: usize,
    pub deadline: Option<Instant>,
}

impl Default for LiaLimits {
    fn default() -> Self {
        LiaLimits {
            max_nodes: 5000,
            max_depth: 80,
            max_pivots: 20_000,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone)]
struct Row {
    basic: usize,
    /// basic = sum coeff * var over non-basic vars
    terms: Vec<(usize, BigRational)>,
}

struct Simplex {
    nvars: usize,
    rows: Vec<Row>,
    basic_row: Vec<Option<usize>>,
    lower: Vec<Option<BigRational>>,
    upper: Vec<Option<BigRational>>,
    beta: Vec<BigRational>,
    pivots: usize,
}

impl Simplex {
    fn new(nvars: usize) -> Self {
        Simplex {
            nvars,
            rows: Vec::new(),
            basic_row: vec![None; nvars],
            lower: vec![None; nvars],
            upper: vec![None; nvars],
            beta: vec![BigRational::zero(); nvars],
            pivots: 0,
        }
    }

    fn add_var(&mut self) -> usize {
        let v = self.nvars;
        self.nvars += 1;
        self.basic_row.push(None);
        self.lower.push(None);
        self.upper.push(None);
        self.beta.push(BigRational::zero());
        v
    }

    /// Adds a definition row `s = expr` for a fresh variable `s`.
    fn add_row(&mut self, s: usize, terms: Vec<(usize, BigRational)>) {
        // substitute existing basic vars so the RHS is over non-basics
        let mut work = terms;
        loop {
            let Some(pos) = work.iter().position(|&(v, _)| self.basic_row[v].is_some()) else {
                break;
            };
            let (v, c) = work.remove(pos);
            let ri = self.basic_row[v].unwrap();
            for (w, cw) in self.rows[ri].terms.clone() {
                work.push((w, &c * cw));
            }
            work = combine(work);
        }
        let ri = self.rows.len();
        self.rows.push(Row {
            basic: s,
            terms: combine(work),
        });
        self.basic_row[s] = Some(ri);
        self.beta[s] = self.eval_row(ri);
    }

    fn eval_row(&self, ri: usize) -> BigRational {
        self.rows[ri]
            .terms
            .iter()
            .map(|(v, c)| c * &self.beta[*v])
            .sum()
    }

    fn update_nonbasic(&mut self, v: usize, val: BigRational) {
        let delta = &val - &self.beta[v];
        if delta.is_zero() {
            return;
        }
        for ri in 0..self.rows.len() {
            if let Some((_, c)) = self.rows[ri].terms.iter().find(|&&(w, _)| w == v) {
                let b = self.rows[ri].basic;
                let add = c * &delta;
                self.beta[b] += add;
            }
        }
        self.beta[v] = val;
    }

    fn set_lower(&mut self, v: usize, b: BigRational) -> bool {
        if let Some(u) = &self.upper[v] {
            if b > *u {
                return false;
            }
        }
        let tighter = match &self.lower[v] {
            Some(l) => b > *l,
            None => true,
        };
        if tighter {
            self.lower[v] = Some(b.clone());
            if self.basic_row[v].is_none() && self.beta[v] < b {
                self.update_nonbasic(v, b);
            }
        }
        true
    }

    fn set_upper(&mut self, v: usize, b: BigRational) -> bool {
        if let Some(l) = &self.lower[v] {
            if b < *l {
                return false;
            }
        }
        let tighter = match &self.upper[v] {
            Some(u) => b < *u,
            None => true,
        };
        if tighter {
            self.upper[v] = Some(b.clone());
            if self.basic_row[v].is_none() && self.beta[v] > b {
                self.update_nonbasic(v, b);
            }
        }
        true
    }

    /// Integer interval propagation over the rows: tightens variable bounds
    /// to fixpoint (or detects infeasibility) before the simplex runs.
    /// Sound because every variable is integer-valued.
    fn propagate_bounds(&mut self) -> bool {
        for _ in 0..12 {
            let mut changed = false;
            for ri in 0..self.rows.len() {
                let row = self.rows[ri].clone();
                // interval of the right-hand side
                let mut lo_all: Option<BigRational> = Some(BigRational::zero());
                let mut hi_all: Option<BigRational> = Some(BigRational::zero());
                for (v, c) in &row.terms {
                    let (vlo, vhi) = (self.lower[*v].clone(), self.upper[*v].clone());
                    let (tlo, thi) = if c.is_positive() {
                        (vlo.map(|b| c * b), vhi.map(|b| c * b))
                    } else {
                        (vhi.map(|b| c * b), vlo.map(|b| c * b))
                    };
                    lo_all = lo_all.zip(tlo).map(|(a, b)| a + b);
                    hi_all = hi_all.zip(thi).map(|(a, b)| a + b);
                }
                // tighten the basic variable
                if let Some(lo) = &lo_all {
                    let lo = lo.ceil();
                    if self.lower[row.basic].as_ref().is_none_or(|b| lo > *b) {
                        if !self.set_lower(row.basic, lo) {
                            return false;
                        }
                        changed = true;
                    }
                }
                if let Some(hi) = &hi_all {
                    let hi = hi.floor();
                    if self.upper[row.basic].as_ref().is_none_or(|b| hi < *b) {
                        if !self.set_upper(row.basic, hi) {
                            return false;
                        }
                        changed = true;
                    }
                }
                // tighten each right-hand variable against the residual
                let (blo, bhi) = (
                    self.lower[row.basic].clone(),
                    self.upper[row.basic].clone(),
                );
                for (v, c) in &row.terms {
                    // residual interval of the other terms
                    let mut rlo: Option<BigRational> = Some(BigRational::zero());
                    let mut rhi: Option<BigRational> = Some(BigRational::zero());
                    for (w, cw) in &row.terms {
                        if w == v {
                            continue;
                        }
                        let (wlo, whi) = (self.lower[*w].clone(), self.upper[*w].clone());
                        let (tlo, thi) = if cw.is_positive() {
                            (wlo.map(|b| cw * b), whi.map(|b| cw * b))
                        } else {
                            (whi.map(|b| cw * b), wlo.map(|b| cw * b))
                        };
                        rlo = rlo.zip(tlo).map(|(a, b)| a + b);
                        rhi = rhi.zip(thi).map(|(a, b)| a + b);
                    }
                    // c*v = basic - rest
                    let num_lo = blo.clone().zip(rhi).map(|(b, r)| b - r);
                    let num_hi = bhi.clone().zip(rlo).map(|(b, r)| b - r);
                    let (vlo, vhi) = if c.is_positive() {
                        (num_lo.map(|n| n / c), num_hi.map(|n| n / c))
                    } else {
                        (num_hi.map(|n| n / c), num_lo.map(|n| n / c))
                    };
                    if let Some(lo) = vlo {
                        let lo = lo.ceil();
                        if self.lower[*v].as_ref().is_none_or(|b| lo > *b) {
                            if !self.set_lower(*v, lo) {
                                return false;
                            }
                            changed = true;
                        }
                    }
                    if let Some(hi) = vhi {
                        let hi = hi.floor();
                        if self.upper[*v].as_ref().is_none_or(|b| hi < *b) {
                            if !self.set_upper(*v, hi) {
                                return false;
                            }
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return true;
            }
        }
        true
    }

    /// Feasibility loop with Bland's rule. Ok(()) when feasible.
    fn check(&mut self, limits: &LiaLimits) -> Result<(), CheckFail> {
        loop {
            self.pivots += 1;
            if self.pivots > limits.max_pivots {
                return Err(CheckFail::Budget);
            }
            if let Some(dl) = limits.deadline {
                if Instant::now() > dl {
                    return Err(CheckFail::Budget);
                }
            }
            // smallest basic variable violating a bound
            let mut viol: Option<(usize, bool)> = None; // (var, need_increase)
            for ri in 0..self.rows.len() {
                let b = self.rows[ri].basic;
                if let Some(l) = &self.lower[b] {
                    if self.beta[b] < *l {
                        viol = match viol {
                            Some((w, _)) if w < b => viol,
                            _ => Some((b, true)),
                        };
                    }
                }
                if let Some(u) = &self.upper[b] {
                    if self.beta[b] > *u {
                        viol = match viol {
                            Some((w, _)) if w < b => viol,
                            _ => Some((b, false)),
                        };
                    }
                }
            }
            let Some((xb, increase)) = viol else {
                return Ok(());
            };
            let ri = self.basic_row[xb].unwrap();
            let target = if increase {
                self.lower[xb].clone().unwrap()
            } else {
                self.upper[xb].clone().unwrap()
            };
            // smallest suitable non-basic
            let mut pivot_var: Option<(usize, BigRational)> = None;
            let mut terms: Vec<(usize, BigRational)> = self.rows[ri].terms.clone();
            terms.sort_by_key(|&(v, _)| v);
            for (v, c) in &terms {
                let can = if increase {
                    (c.is_positive() && self.below_upper(*v)) || (c.is_negative() && self.above_lower(*v))
                } else {
                    (c.is_positive() && self.above_lower(*v)) || (c.is_negative() && self.below_upper(*v))
                };
                if can {
                    pivot_var = Some((*v, c.clone()));
                    break;
                }
            }
            let Some((xj, a)) = pivot_var else {
                return Err(CheckFail::Infeasible);
            };
            self.pivot_and_update(ri, xb, xj, a, target);
        }
    }

    fn below_upper(&self, v: usize) -> bool {
        match &self.upper[v] {
            Some(u) => self.beta[v] < *u,
            None => true,
        }
    }

    fn above_lower(&self, v: usize) -> bool {
        match &self.lower[v] {
            Some(l) => self.beta[v] > *l,
            None => true,
        }
    }

    fn pivot_and_update(
        &mut self,
        ri: usize,
        xb: usize,
        xj: usize,
        a: BigRational,
        target: BigRational,
    ) {
        let theta = (&target - &self.beta[xb]) / &a;
        self.beta[xb] = target;
        self.beta[xj] = &self.beta[xj] + &theta;
        for rk in 0..self.rows.len() {
            if rk == ri {
                continue;
            }
            if let Some((_, c)) = self.rows[rk].terms.iter().find(|&&(w, _)| w == xj) {
                let b = self.rows[rk].basic;
                let add = c * &theta;
                self.beta[b] += add;
            }
        }
        // rewrite row ri: xb = a*xj + rest  =>  xj = (xb - rest)/a
        let inv = BigRational::one() / &a;
        let mut new_terms: Vec<(usize, BigRational)> = vec![(xb, inv.clone())];
        for (v, c) in self.rows[ri].terms.clone() {
            if v == xj {
                continue;
            }
            new_terms.push((v, -(c * &inv)));
        }
        let new_terms = combine(new_terms);
        self.rows[ri] = Row {
            basic: xj,
            terms: new_terms.clone(),
        };
        self.basic_row[xb] = None;
        self.basic_row[xj] = Some(ri);
        // substitute xj in the other rows
        for rk in 0..self.rows.len() {
            if rk == ri {
                continue;
            }
            let Some(pos) = self.rows[rk].terms.iter().position(|&(w, _)| w == xj) else {
                continue;
            };
            let c = self.rows[rk].terms.remove(pos).1;
            let mut terms = std::mem::take(&mut self.rows[rk].terms);
            for (w, cw) in &new_terms {
                terms.push((*w, &c * cw));
            }
            self.rows[rk].terms = combine(terms);
        }
    }
}

enum CheckFail {
    Infeasible,
    Budget,
}

fn combine(terms: Vec<(usize, BigRational)>) -> Vec<(usize, BigRational)> {
    let mut map: std::collections::BTreeMap<usize, BigRational> = std::collections::BTreeMap::new();
    for (v, c) in terms {
        let e = map.entry(v).or_insert_with(BigRational::zero);
        *e += c;
    }
    map.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

/// Decides an integer-feasibility problem. `nvars` structural variables.
pub fn solve_lia(nvars: usize, constraints: &[LiaConstraint], limits: &LiaLimits) -> LiaVerdict {
    let mut sx = Simplex::new(nvars);
    // (variable, forbidden integer value) pairs from disequalities
    let mut neqs: Vec<(usize, BigInt)> = Vec::new();

    for c in constraints {
        let terms = combine(
            c.terms
                .iter()
                .map(|(v, k)| (*v, BigRational::from(k.clone())))
                .collect(),
        );
        let k = BigRational::from(c.k.clone());
        let var = if terms.len() == 1 && terms[0].1 == BigRational::one() {
            terms[0].0
        } else if terms.is_empty() {
            // constant constraint
            let holds = match c.op {
                LiaOp::Eq => k.is_zero(),
                LiaOp::Neq => !k.is_zero(),
                LiaOp::Le => !k.is_negative(),
                LiaOp::Ge => !k.is_positive(),
            };
            if holds {
                continue;
            }
            return LiaVerdict::Unsat;
        } else {
            let s = sx.add_var();
            sx.add_row(s, terms);
            s
        };
        let ok = match c.op {
            LiaOp::Eq => sx.set_lower(var, k.clone()) && sx.set_upper(var, k),
            LiaOp::Le => sx.set_upper(var, k),
            LiaOp::Ge => sx.set_lower(var, k),
            LiaOp::Neq => {
                if k.is_integer() {
                    neqs.push((var, k.to_integer()));
                }
                // non-integer disequality over integers is vacuous
                true
            }
        };
        if !ok {
            return LiaVerdict::Unsat;
        }
    }

    let mut nodes = 0usize;
    let verdict = branch(&mut sx, &neqs, limits, 0, &mut nodes);
    match verdict {
        BranchResult::Sat(model) => LiaVerdict::Sat(model.into_iter().take(nvars).collect()),
        BranchResult::Unsat => LiaVerdict::Unsat,
        BranchResult::Unknown => LiaVerdict::Unknown,
    }
}

enum BranchResult {
    Sat(Vec<BigInt>),
    Unsat,
    Unknown,
}

fn branch(
    sx: &mut Simplex,
    neqs: &[(usize, BigInt)],
    limits: &LiaLimits,
    depth: usize,
    nodes: &mut usize,
) -> BranchResult {
    *nodes += 1;
    if *nodes > limits.max_nodes || depth > limits.max_depth {
        return BranchResult::Unknown;
    }
    // interval propagation is worthwhile once per solve; per node the
    // rational arithmetic costs more than the pruning saves
    if depth == 0 && !sx.propagate_bounds() {
        return BranchResult::Unsat;
    }
    match sx.check(limits) {
        Err(CheckFail::Infeasible) => return BranchResult::Unsat,
        Err(CheckFail::Budget) => return BranchResult::Unknown,
        Ok(()) => {}
    }
    // branch on the smallest fractional variable
    if let Some(v) = (0..sx.nvars).find(|&v| !sx.beta[v].is_integer()) {
        let val = sx.beta[v].clone();
        let fl = val.floor();
        return split(
            sx,
            neqs,
            limits,
            depth,
            nodes,
            v,
            fl.to_integer(),
            fl.to_integer() + BigInt::one(),
        );
    }
    // all integral: resolve violated disequalities
    if let Some(&(v, ref k)) = neqs
        .iter()
        .find(|(v, k)| sx.beta[*v] == BigRational::from(k.clone()))
    {
        return split(
            sx,
            neqs,
            limits,
            depth,
            nodes,
            v,
            k - BigInt::one(),
            k + BigInt::one(),
        );
    }
    BranchResult::Sat(sx.beta.iter().map(|b| b.to_integer()).collect())
}

/// Explores `v <= lo_branch` then `v >= hi_branch`.
#[allow(clippy::too_many_arguments)]
fn split(
    sx: &mut Simplex,
    neqs: &[(usize, BigInt)],
    limits: &LiaLimits,
    depth: usize,
    nodes: &mut usize,
    v: usize,
    lo_branch: BigInt,
    hi_branch: BigInt,
) -> BranchResult {
    let saved_lower = sx.lower.clone();
    let saved_upper = sx.upper.clone();
    let saved_beta = sx.beta.clone();

    let mut saw_unknown = false;
    // left: v <= lo_branch
    if sx.set_upper(v, BigRational::from(lo_branch)) {
        match branch(sx, neqs, limits, depth + 1, nodes) {
            BranchResult::Sat(m) => return BranchResult::Sat(m),
            BranchResult::Unknown => saw_unknown = true,
            BranchResult::Unsat => {}
        }
    }
    sx.lower = saved_lower.clone();
    sx.upper = saved_upper.clone();
    sx.beta = saved_beta.clone();

    // right: v >= hi_branch
    if sx.set_lower(v, BigRational::from(hi_branch)) {
        match branch(sx, neqs, limits, depth + 1, nodes) {
            BranchResult::Sat(m) => return BranchResult::Sat(m),
            BranchResult::Unknown => saw_unknown = true,
            BranchResult::Unsat => {}
        }
    }
    sx.lower = saved_lower;
    sx.upper = saved_upper;
    sx.beta = saved_beta;

    if saw_unknown {
        BranchResult::Unknown
    } else {
        BranchResult::Unsat
    }
}
