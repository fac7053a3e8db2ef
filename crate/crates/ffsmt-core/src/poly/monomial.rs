//! Variables and sparse monomials.

use std::fmt::Write as _;

/// Identifier of a solver variable. Ids are dense, allocated once and never
/// reused; lower ids have higher precedence in monomial orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// What a variable stands for. Auxiliary kinds are introduced by
/// preprocessing (monomial abstraction, slack naming) or by the Gröbner
/// module (Rabinowitsch encoding of disequations).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarKind {
    /// Declared in the input script, with its source name.
    Original(String),
    /// Stands for the non-linear monomial it abstracts.
    Monomial(Monomial),
    /// Names a linear expression so atoms become domain constraints.
    Slack,
    /// Fresh inverse witness for a disequation.
    Rabinowitsch,
}

/// Registry of all variables of a solve, indexed by `VarId`.
#[derive(Debug, Clone, Default)]
pub struct VarTable {
    kinds: Vec<VarKind>,
    names: Vec<String>,
}

impl VarTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn alloc(&mut self, kind: VarKind) -> VarId {
        let id = VarId(self.kinds.len() as u32);
        let name = match &kind {
            VarKind::Original(n) => n.clone(),
            VarKind::Monomial(_) => format!("_m{}", id.0),
            VarKind::Slack => format!("_s{}", id.0),
            VarKind::Rabinowitsch => format!("_u{}", id.0),
        };
        self.kinds.push(kind);
        self.names.push(name);
        id
    }

    pub fn kind(&self, v: VarId) -> &VarKind {
        &self.kinds[v.index()]
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.index()]
    }

    pub fn is_original(&self, v: VarId) -> bool {
        matches!(self.kinds[v.index()], VarKind::Original(_))
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &VarKind)> {
        self.kinds
            .iter()
            .enumerate()
            .map(|(i, k)| (VarId(i as u32), k))
    }
}

/// A sparse power product: exponent map with no zero entries, kept sorted
/// by variable id. The empty product is the monomial 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    exps: Vec<(VarId, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { exps: Vec::new() }
    }

    pub fn var(v: VarId) -> Self {
        Monomial { exps: vec![(v, 1)] }
    }

    pub fn from_exps(mut exps: Vec<(VarId, u32)>) -> Self {
        exps.retain(|&(_, e)| e > 0);
        exps.sort_by_key(|&(v, _)| v);
        Monomial { exps }
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exps(&self) -> &[(VarId, u32)] {
        &self.exps
    }

    pub fn total_degree(&self) -> u32 {
        self.exps.iter().map(|&(_, e)| e).sum()
    }

    pub fn degree_of(&self, v: VarId) -> u32 {
        self.exps
            .iter()
            .find(|&&(w, _)| w == v)
            .map_or(0, |&(_, e)| e)
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.exps.iter().map(|&(v, _)| v)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.exps.len() + other.exps.len());
        let (mut i, mut j) = (0, 0);
        while i < self.exps.len() && j < other.exps.len() {
            let (va, ea) = self.exps[i];
            let (vb, eb) = other.exps[j];
            match va.cmp(&vb) {
                std::cmp::Ordering::Less => {
                    out.push((va, ea));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((vb, eb));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((va, ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.exps[i..]);
        out.extend_from_slice(&other.exps[j..]);
        Monomial { exps: out }
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.exps.len());
        let mut j = 0;
        for &(v, e) in &self.exps {
            let mut rem = e;
            while j < other.exps.len() && other.exps[j].0 < v {
                return None; // divisor has a variable we lack
            }
            if j < other.exps.len() && other.exps[j].0 == v {
                let eb = other.exps[j].1;
                if eb > e {
                    return None;
                }
                rem = e - eb;
                j += 1;
            }
            if rem > 0 {
                out.push((v, rem));
            }
        }
        if j < other.exps.len() {
            return None;
        }
        Some(Monomial { exps: out })
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        other.div(self).is_some()
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.exps.len() && j < other.exps.len() {
            let (va, ea) = self.exps[i];
            let (vb, eb) = other.exps[j];
            match va.cmp(&vb) {
                std::cmp::Ordering::Less => {
                    out.push((va, ea));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((vb, eb));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((va, ea.max(eb)));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.exps[i..]);
        out.extend_from_slice(&other.exps[j..]);
        Monomial { exps: out }
    }

    /// True when the leading monomials have no variable in common.
    pub fn coprime(&self, other: &Monomial) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.exps.len() && j < other.exps.len() {
            match self.exps[i].0.cmp(&other.exps[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn render(&self, vars: &VarTable) -> String {
        if self.is_one() {
            return "1".to_string();
        }
        let mut s = String::new();
        for (i, &(v, e)) in self.exps.iter().enumerate() {
            if i > 0 {
                s.push('*');
            }
            s.push_str(vars.name(v));
            if e > 1 {
                let _ = write!(s, "^{}", e);
            }
        }
        s
    }
}
