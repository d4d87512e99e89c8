//! Ordinal notations below the small Veblen ordinal.
//!
//! An [`OrdinalTerm`] is a finite sum of principal terms `φ(α_1, …, α_k)`
//! written in nonincreasing order; the empty sum is `0`, `φ(0,0) = 1` and
//! `φ(0, γ) = ω^γ`. Leading zero arguments are insignificant and are
//! stripped down to arity two. In normal form every argument is strictly
//! below the principal term it occurs in, which makes the representation
//! unique, so equality is structural.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::sexpr::Sexp;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct OrdinalTerm {
    summands: Vec<Principal>,
}

/// `φ(args)` with at least two arguments, the first nonzero when there
/// are more than two.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Principal {
    args: Vec<OrdinalTerm>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitClass {
    Zero,
    Successor,
    Limit,
}

impl LimitClass {
    pub fn as_str(self) -> &'static str {
        match self {
            LimitClass::Zero => "zero",
            LimitClass::Successor => "successor",
            LimitClass::Limit => "limit",
        }
    }
}

impl Principal {
    pub fn args(&self) -> &[OrdinalTerm] {
        &self.args
    }

    fn one() -> Self {
        Principal {
            args: vec![OrdinalTerm::zero(), OrdinalTerm::zero()],
        }
    }

    pub fn is_one(&self) -> bool {
        self.args.iter().all(OrdinalTerm::is_zero)
    }

    /// `γ` when this is `ω^γ`.
    fn omega_exponent(&self) -> Option<&OrdinalTerm> {
        (self.args.len() == 2 && self.args[0].is_zero()).then(|| &self.args[1])
    }

    /// The exponent `γ` with `self = ω^γ`; an ε-number is its own exponent.
    pub fn log(&self) -> OrdinalTerm {
        match self.omega_exponent() {
            Some(g) => g.clone(),
            None => OrdinalTerm::from(self.clone()),
        }
    }

    fn arg_padded(&self, width: usize, i: usize) -> Option<&OrdinalTerm> {
        let offset = width - self.args.len();
        i.checked_sub(offset).map(|j| &self.args[j])
    }
}

impl From<Principal> for OrdinalTerm {
    fn from(p: Principal) -> Self {
        OrdinalTerm { summands: vec![p] }
    }
}

fn cmp_principal(a: &Principal, b: &Principal) -> Ordering {
    if a == b {
        Ordering::Equal
    } else if lt_principal(a, b) {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// `φ(ᾱ) < φ(β̄)` iff `φ(ᾱ) ≤ β_j` for some `j`, or `ᾱ` is below `β̄` at
/// the first position where they differ and every later `α_j < φ(β̄)`.
fn lt_principal(a: &Principal, b: &Principal) -> bool {
    if b.args.iter().any(|beta| cmp_principal_term(a, beta) != Ordering::Greater) {
        return true;
    }
    let width = a.args.len().max(b.args.len());
    let zero = OrdinalTerm::zero();
    let at = |p: &'_ Principal, i: usize| -> OrdinalTerm { p.arg_padded(width, i).unwrap_or(&zero).clone() };
    let Some(i) = (0..width).find(|&i| at(a, i) != at(b, i)) else {
        return false;
    };
    if compare(&at(a, i), &at(b, i)) != Ordering::Less {
        return false;
    }
    ((i + 1)..width).all(|j| cmp_term_principal(&at(a, j), b) == Ordering::Less)
}

fn cmp_principal_term(a: &Principal, t: &OrdinalTerm) -> Ordering {
    match t.summands.first() {
        None => Ordering::Greater,
        Some(first) => match cmp_principal(a, first) {
            Ordering::Equal if t.summands.len() > 1 => Ordering::Less,
            other => other,
        },
    }
}

fn cmp_term_principal(t: &OrdinalTerm, b: &Principal) -> Ordering {
    cmp_principal_term(b, t).reverse()
}

/// The order of ordinal values on normal-form terms.
pub fn compare(a: &OrdinalTerm, b: &OrdinalTerm) -> Ordering {
    for (x, y) in a.summands.iter().zip(&b.summands) {
        match cmp_principal(x, y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.summands.len().cmp(&b.summands.len())
}

impl PartialOrd for OrdinalTerm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdinalTerm {
    fn cmp(&self, other: &Self) -> Ordering {
        compare(self, other)
    }
}

impl OrdinalTerm {
    pub fn zero() -> Self {
        OrdinalTerm::default()
    }

    pub fn one() -> Self {
        Principal::one().into()
    }

    pub fn nat(k: usize) -> Self {
        OrdinalTerm {
            summands: vec![Principal::one(); k],
        }
    }

    pub fn omega() -> Self {
        Self::omega_pow(Self::one())
    }

    /// `ω^γ`.
    pub fn omega_pow(gamma: OrdinalTerm) -> Self {
        Self::phi(vec![OrdinalTerm::zero(), gamma])
    }

    /// `φ(args)` for normal-form arguments, reduced to normal form. Leading
    /// zeros are dropped, and when the last nonzero argument is already a
    /// fixed point of the function it occupies, the application collapses
    /// to that argument.
    pub fn phi(mut args: Vec<OrdinalTerm>) -> Self {
        while args.len() < 2 {
            args.insert(0, OrdinalTerm::zero());
        }
        let lead = args.iter().position(|a| !a.is_zero()).unwrap_or(args.len());
        let keep_from = lead.min(args.len() - 2);
        args.drain(..keep_from);
        let Some(p) = args.iter().rposition(|a| !a.is_zero()) else {
            return OrdinalTerm::one();
        };
        if let [xi] = args[p].summands.as_slice() {
            let width = args.len().max(xi.args.len());
            let pad_a = width - args.len();
            let zero = OrdinalTerm::zero();
            let a_at = |i: usize| i.checked_sub(pad_a).map(|j| &args[j]).unwrap_or(&zero);
            let g_at = |i: usize| xi.arg_padded(width, i).unwrap_or(&zero);
            let p_pad = p + pad_a;
            if let Some(i) = (0..width).find(|&i| a_at(i) != g_at(i)) {
                let absorbed = i < p_pad
                    && compare(a_at(i), g_at(i)) == Ordering::Less
                    && ((i + 1)..p_pad).all(|j| cmp_term_principal(a_at(j), xi) == Ordering::Less);
                if absorbed {
                    return args[p].clone();
                }
            }
        }
        Principal { args }.into()
    }

    pub fn summands(&self) -> &[Principal] {
        &self.summands
    }

    pub fn is_zero(&self) -> bool {
        self.summands.is_empty()
    }

    /// Ordinary (non-commutative) ordinal addition.
    pub fn add(&self, other: &OrdinalTerm) -> OrdinalTerm {
        let mut summands = self.summands.clone();
        if let Some(head) = other.summands.first() {
            while summands
                .last()
                .is_some_and(|s| cmp_principal(s, head) == Ordering::Less)
            {
                summands.pop();
            }
        }
        summands.extend(other.summands.iter().cloned());
        OrdinalTerm { summands }
    }

    pub fn is_normal(&self) -> bool {
        self.summands
            .windows(2)
            .all(|w| cmp_principal(&w[0], &w[1]) != Ordering::Less)
            && self.summands.iter().all(|p| {
                let stripped = p.args.len() == 2 || !p.args[0].is_zero();
                stripped
                    && p.args.len() >= 2
                    && p.args.iter().all(|a| a.is_normal() && cmp_term_principal(a, p) == Ordering::Less)
            })
    }

    /// Number of `φ` nodes.
    pub fn size(&self) -> usize {
        self.summands
            .iter()
            .map(|p| 1 + p.args.iter().map(OrdinalTerm::size).sum::<usize>())
            .sum()
    }

    pub fn to_sexpr(&self) -> String {
        self.to_string()
    }

    /// Reads the s-expression syntax `0`, `(phi a b …)`, `(+ p q …)`. Bare
    /// natural numbers and `omega` are accepted as shorthands. The input must
    /// already be in normal form.
    pub fn parse(text: &str) -> Result<Self> {
        let term = Self::parse_normalizing(text)?;
        let literal = parse_literal(&Sexp::parse(text)?)?;
        if literal != term || !literal.is_normal() {
            return Err(Error::NonNormal(format!("{text} (normal form is {term})")));
        }
        Ok(term)
    }

    /// Like [`OrdinalTerm::parse`] but reduces the input to normal form.
    pub fn parse_normalizing(text: &str) -> Result<Self> {
        from_sexp(&Sexp::parse(text)?)
    }

    /// Human-readable rendering with `ω`, `ε`, `Γ` and `φ_α(β)`.
    pub fn pretty(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < self.summands.len() {
            let p = &self.summands[i];
            let mut k = 1;
            while i + k < self.summands.len() && self.summands[i + k] == *p {
                k += 1;
            }
            if p.is_one() {
                parts.push(k.to_string());
            } else if k > 1 {
                parts.push(format!("{}·{k}", pretty_principal(p)));
            } else {
                parts.push(pretty_principal(p));
            }
            i += k;
        }
        parts.join(" + ")
    }
}

fn pretty_atomic(t: &OrdinalTerm) -> String {
    let s = t.pretty();
    if t.summands.len() > 1 && !t.summands.iter().all(Principal::is_one) {
        format!("({s})")
    } else {
        s
    }
}

fn pretty_principal(p: &Principal) -> String {
    if p.is_one() {
        return "1".into();
    }
    if let Some(g) = p.omega_exponent() {
        return if *g == OrdinalTerm::one() {
            "ω".into()
        } else {
            format!("ω^{}", pretty_atomic(g))
        };
    }
    match p.args.as_slice() {
        [a, b] if *a == OrdinalTerm::one() => format!("ε_{}", pretty_atomic(b)),
        [a, b] => format!("φ_{}({})", pretty_atomic(a), b.pretty()),
        [a, z, b] if *a == OrdinalTerm::one() && z.is_zero() => format!("Γ_{}", pretty_atomic(b)),
        args => format!(
            "φ({})",
            args.iter().map(OrdinalTerm::pretty).collect::<Vec<_>>().join(", ")
        ),
    }
}

impl fmt::Display for OrdinalTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.summands.as_slice() {
            [] => f.write_str("0"),
            [p] => write!(f, "{p}"),
            many => {
                f.write_str("(+")?;
                for p in many {
                    write!(f, " {p}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Principal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(phi")?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

fn from_sexp(s: &Sexp) -> Result<OrdinalTerm> {
    match s {
        Sexp::Atom(a) => atom(a),
        Sexp::List(_) => {
            let (head, rest) = s
                .as_call()
                .ok_or_else(|| Error::Parse(format!("malformed ordinal term {s}")))?;
            let args = rest.iter().map(from_sexp).collect::<Result<Vec<_>>>()?;
            match head {
                "phi" => {
                    if args.len() < 2 {
                        return Err(Error::Parse(format!("phi needs at least two arguments in {s}")));
                    }
                    Ok(OrdinalTerm::phi(args))
                }
                "+" => Ok(args.iter().fold(OrdinalTerm::zero(), |acc, t| acc.add(t))),
                other => Err(Error::Parse(format!("unknown ordinal constructor {other:?}"))),
            }
        }
    }
}

/// Reads the term exactly as written, without absorption or collapse, so
/// that [`OrdinalTerm::parse`] can detect non-normal input.
fn parse_literal(s: &Sexp) -> Result<OrdinalTerm> {
    match s {
        Sexp::Atom(a) => atom(a),
        Sexp::List(_) => {
            let (head, rest) = s
                .as_call()
                .ok_or_else(|| Error::Parse(format!("malformed ordinal term {s}")))?;
            let args = rest.iter().map(parse_literal).collect::<Result<Vec<_>>>()?;
            match head {
                "phi" => Ok(Principal { args }.into()),
                "+" => Ok(OrdinalTerm {
                    summands: args.into_iter().flat_map(|t| t.summands).collect(),
                }),
                other => Err(Error::Parse(format!("unknown ordinal constructor {other:?}"))),
            }
        }
    }
}

fn atom(a: &str) -> Result<OrdinalTerm> {
    match a {
        "omega" | "ω" => Ok(OrdinalTerm::omega()),
        digits => digits
            .parse::<usize>()
            .map(OrdinalTerm::nat)
            .map_err(|_| Error::Parse(format!("unknown ordinal atom {digits:?}"))),
    }
}

/// Natural (Hessenberg) sum: all summands merged in nonincreasing order.
pub fn nat_sum(a: &OrdinalTerm, b: &OrdinalTerm) -> OrdinalTerm {
    let mut summands: Vec<Principal> = a.summands.iter().chain(&b.summands).cloned().collect();
    summands.sort_by(|x, y| cmp_principal(y, x));
    OrdinalTerm { summands }
}

/// Natural product: `⊕_{i,j} ω^{log a_i ⊕ log b_j}`.
pub fn nat_prod(a: &OrdinalTerm, b: &OrdinalTerm) -> OrdinalTerm {
    let mut summands = Vec::new();
    for x in &a.summands {
        for y in &b.summands {
            let e = nat_sum(&x.log(), &y.log());
            summands.extend(OrdinalTerm::omega_pow(e).summands);
        }
    }
    summands.sort_by(|x, y| cmp_principal(y, x));
    OrdinalTerm { summands }
}

pub fn classify_limit(a: &OrdinalTerm) -> LimitClass {
    match a.summands.last() {
        None => LimitClass::Zero,
        Some(p) if p.is_one() => LimitClass::Successor,
        Some(_) => LimitClass::Limit,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderTypeKind {
    /// Order type of `F_n`, namely `φ_{n−1}(0)`.
    Fusible,
    /// Order type reachable by a continuous monotone `n`-ary function,
    /// namely `φ(1, 0, …, 0)` with `n` zeros.
    Continuous,
}

pub fn expected_order_type(kind: OrderTypeKind, n: usize) -> Result<OrdinalTerm> {
    match kind {
        OrderTypeKind::Fusible if n >= 2 => Ok(OrdinalTerm::phi(vec![
            OrdinalTerm::nat(n - 1),
            OrdinalTerm::zero(),
        ])),
        OrderTypeKind::Continuous if n >= 3 => {
            let mut args = vec![OrdinalTerm::one()];
            args.extend(std::iter::repeat(OrdinalTerm::zero()).take(n));
            Ok(OrdinalTerm::phi(args))
        }
        _ => Err(Error::Precondition(format!("no expected order type for {kind:?} with n = {n}"))),
    }
}

/// All normal-form terms with at most `size` `φ` nodes and arities at most
/// `max_arity`, sorted ascending.
pub fn enumerate_terms(max_arity: usize, size: usize) -> Vec<OrdinalTerm> {
    assert!(max_arity >= 2, "arity must be at least 2");
    // by_size[s] holds every normal term with exactly s nodes
    let mut by_size: Vec<BTreeSet<OrdinalTerm>> = vec![BTreeSet::from([OrdinalTerm::zero()])];
    for s in 1..=size {
        let mut level: BTreeSet<OrdinalTerm> = BTreeSet::new();
        // a single principal term with s nodes
        for k in 2..=max_arity {
            for split in crate::generator::compositions(s - 1, k) {
                let pools: Vec<Vec<&OrdinalTerm>> = split.iter().map(|&c| by_size[c].iter().collect()).collect();
                for args in cartesian(&pools) {
                    let t = OrdinalTerm::phi(args.into_iter().cloned().collect());
                    level.insert(t);
                }
            }
        }
        // sums: a principal head followed by a nonempty tail
        for head_size in 1..s {
            let heads: Vec<OrdinalTerm> = by_size[head_size]
                .iter()
                .filter(|t| t.summands.len() == 1)
                .cloned()
                .collect();
            let tails: Vec<OrdinalTerm> = by_size[s - head_size].iter().cloned().collect();
            for h in &heads {
                for t in &tails {
                    if t.summands.first().is_some_and(|f| cmp_principal(&h.summands[0], f) != Ordering::Less) {
                        level.insert(h.add(t));
                    }
                }
            }
        }
        level.retain(|t| t.size() == s);
        by_size.push(level);
    }
    let mut all: Vec<OrdinalTerm> = by_size.into_iter().flatten().collect();
    all.sort();
    all.dedup();
    all
}

pub(crate) fn cartesian<'a, T>(pools: &[Vec<&'a T>]) -> Vec<Vec<&'a T>> {
    let mut out: Vec<Vec<&T>> = vec![vec![]];
    for pool in pools {
        let mut next = Vec::with_capacity(out.len() * pool.len());
        for prefix in &out {
            for item in pool {
                let mut p = prefix.clone();
                p.push(*item);
                next.push(p);
            }
        }
        out = next;
    }
    out
}
