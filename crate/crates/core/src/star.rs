//! Closed terms over `0` and one `n`-ary constructor `V`, ordered by the
//! structural criterion of the fixed-point-free Veblen function: every
//! application is a fresh value, so two terms are equal only when they are
//! syntactically identical.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sexpr::Sexp;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum VeblenStarTerm {
    Zero,
    V(Arc<[VeblenStarTerm]>),
}

impl VeblenStarTerm {
    pub fn app(args: Vec<VeblenStarTerm>) -> Self {
        assert!(!args.is_empty(), "V needs at least one argument");
        VeblenStarTerm::V(args.into())
    }

    /// `V(0, …, 0, t)` with `n` arguments, the immediate successor of `t`.
    pub fn successor(n: usize, t: &VeblenStarTerm) -> Self {
        let mut args = vec![VeblenStarTerm::Zero; n - 1];
        args.push(t.clone());
        Self::app(args)
    }

    pub fn args(&self) -> &[VeblenStarTerm] {
        match self {
            VeblenStarTerm::Zero => &[],
            VeblenStarTerm::V(a) => a,
        }
    }

    /// Number of `V` nodes.
    pub fn size(&self) -> usize {
        match self {
            VeblenStarTerm::Zero => 0,
            VeblenStarTerm::V(a) => 1 + a.iter().map(Self::size).sum::<usize>(),
        }
    }

    /// Arity of the constructor, or `None` for `0`. Mixed arities are
    /// reported as an error.
    pub fn arity(&self) -> Result<Option<usize>> {
        match self {
            VeblenStarTerm::Zero => Ok(None),
            VeblenStarTerm::V(a) => {
                let n = a.len();
                for child in a.iter() {
                    if let Some(m) = child.arity()? {
                        if m != n {
                            return Err(Error::ArityMismatch { expected: n, found: m });
                        }
                    }
                }
                Ok(Some(n))
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let t = from_sexp(&Sexp::parse(text)?)?;
        t.arity()?;
        Ok(t)
    }
}

fn from_sexp(s: &Sexp) -> Result<VeblenStarTerm> {
    match s {
        Sexp::Atom(a) if a == "0" => Ok(VeblenStarTerm::Zero),
        Sexp::Atom(a) => Err(Error::Parse(format!("unknown star-term atom {a:?}"))),
        Sexp::List(_) => match s.as_call() {
            Some(("V", rest)) if !rest.is_empty() => Ok(VeblenStarTerm::app(
                rest.iter().map(from_sexp).collect::<Result<Vec<_>>>()?,
            )),
            _ => Err(Error::Parse(format!("malformed star term {s}"))),
        },
    }
}

impl fmt::Display for VeblenStarTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VeblenStarTerm::Zero => f.write_str("0"),
            VeblenStarTerm::V(args) => {
                f.write_str("(V")?;
                for a in args.iter() {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// `a < b` iff `b = V(β̄)` and either `a ≤ β_i` for some `i`, or
/// `a = V(ᾱ)`, `α_i < β_i` at the first differing position and every later
/// `α_j < b`.
fn lt(a: &VeblenStarTerm, b: &VeblenStarTerm) -> bool {
    let VeblenStarTerm::V(beta) = b else {
        return false;
    };
    if beta.iter().any(|bi| a == bi || lt(a, bi)) {
        return true;
    }
    let VeblenStarTerm::V(alpha) = a else {
        return false;
    };
    let Some(i) = alpha.iter().zip(beta.iter()).position(|(x, y)| x != y) else {
        return false;
    };
    lt(&alpha[i], &beta[i]) && alpha[i + 1..].iter().all(|aj| lt(aj, b))
}

fn cmp_unchecked(a: &VeblenStarTerm, b: &VeblenStarTerm) -> Ordering {
    if a == b {
        Ordering::Equal
    } else if lt(a, b) {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

pub fn star_compare(a: &VeblenStarTerm, b: &VeblenStarTerm) -> Result<Ordering> {
    if let (Some(m), Some(n)) = (a.arity()?, b.arity()?) {
        if m != n {
            return Err(Error::ArityMismatch { expected: m, found: n });
        }
    }
    Ok(cmp_unchecked(a, b))
}

/// Total order wrapper for sorting terms of one arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StarOrd(pub VeblenStarTerm);

impl PartialOrd for StarOrd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for StarOrd {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_unchecked(&self.0, &other.0)
    }
}

/// Every term of arity `n` with exactly `s` applications, for `s ≤ max_size`.
pub fn terms_by_size(n: usize, max_size: usize) -> Vec<Vec<VeblenStarTerm>> {
    assert!(n >= 1, "arity must be positive");
    let mut by_size: Vec<Vec<VeblenStarTerm>> = vec![vec![VeblenStarTerm::Zero]];
    for s in 1..=max_size {
        let mut level = Vec::new();
        for split in crate::generator::compositions(s - 1, n) {
            let pools: Vec<Vec<&VeblenStarTerm>> = split.iter().map(|&c| by_size[c].iter().collect()).collect();
            for args in crate::ordinal::cartesian(&pools) {
                level.push(VeblenStarTerm::app(args.into_iter().cloned().collect()));
            }
        }
        by_size.push(level);
    }
    by_size
}

/// All terms with at most `size_bound` applications, ascending.
pub fn star_enumerate(n: usize, size_bound: usize) -> Vec<VeblenStarTerm> {
    let mut all: Vec<StarOrd> = terms_by_size(n, size_bound).into_iter().flatten().map(StarOrd).collect();
    all.sort();
    all.into_iter().map(|s| s.0).collect()
}

/// The first `count` terms in order of size, then serialization; the first
/// is always `0`. Grows the size bound until enough terms exist.
pub fn enumerate_by_size(n: usize, count: usize) -> Vec<VeblenStarTerm> {
    let mut out: Vec<VeblenStarTerm> = Vec::with_capacity(count);
    let mut size = 0;
    while out.len() < count {
        let level = terms_by_size(n, size).pop().expect("level exists");
        let mut keyed: Vec<(String, VeblenStarTerm)> = level.into_iter().map(|t| (t.to_string(), t)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        out.extend(keyed.into_iter().map(|(_, t)| t).take(count - out.len()));
        size += 1;
    }
    out
}

/// Checks that `V(0, …, 0, t)` immediately follows `t` among all terms up
/// to `search_size` applications, for every `t` with at most `size`
/// applications. Returns the counterexamples `(t, u)` with
/// `t < u < V(0, …, 0, t)`.
pub fn successor_law_violations(n: usize, size: usize, search_size: usize) -> Vec<(VeblenStarTerm, VeblenStarTerm)> {
    let universe: Vec<VeblenStarTerm> = terms_by_size(n, search_size).into_iter().flatten().collect();
    let mut bad = Vec::new();
    for t in universe.iter().filter(|t| t.size() <= size) {
        let succ = VeblenStarTerm::successor(n, t);
        for u in &universe {
            if lt(t, u) && lt(u, &succ) {
                bad.push((t.clone(), u.clone()));
            }
        }
    }
    bad
}
