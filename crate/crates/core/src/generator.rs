//! Systems `(G, P)` of monotone functions with constants and breadth-first
//! generation of the values of monotone terms over them.
//!
//! A term is monotone when every application node evaluates strictly above
//! each of its children. Generation proceeds level by level: level `s` holds
//! the values whose cheapest witness uses exactly `s` function applications.
//! Every value reachable with at most `budget` applications therefore appears
//! after `budget` levels, whatever its magnitude.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::numbers::Extended;
use crate::scalar::Scalar;
use crate::sexpr::Sexp;

/// A monotone function usable as a generator.
///
/// `eval` returns `None` for argument tuples outside the function's domain;
/// generation simply skips them.
pub trait MonotoneFn<S: Scalar> {
    fn arity(&self) -> usize;
    fn eval(&self, args: &[S]) -> Option<S>;
    fn describe(&self) -> Value {
        json!({ "arity": self.arity() })
    }
    /// True when `eval` is defined everywhere and nondecreasing in each
    /// argument. Lets a generator with a value ceiling skip tuples early.
    fn is_nondecreasing(&self) -> bool {
        false
    }
}

/// `x ↦ Σ aᵢ xᵢ + b` with every `aᵢ ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearFunction<S> {
    coefficients: Vec<S>,
    constant: S,
}

impl<S: Scalar> LinearFunction<S> {
    pub fn new(coefficients: Vec<S>, constant: S) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Precondition("linear function needs arity ≥ 1".into()));
        }
        if let Some(neg) = coefficients.iter().find(|a| a.is_negative()) {
            return Err(Error::Precondition(format!(
                "coefficient {} is negative, function would not be monotone",
                neg.canonical()
            )));
        }
        Ok(LinearFunction {
            coefficients,
            constant,
        })
    }

    /// `g_n(x₁,…,xₙ) = (x₁ + ⋯ + xₙ + 1)/n`.
    pub fn g_n(n: usize) -> Self {
        assert!(n >= 1, "g_n needs n ≥ 1");
        let w = S::one() / S::int(n as i64);
        LinearFunction {
            coefficients: vec![w.clone(); n],
            constant: w,
        }
    }

    pub fn arity(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[S] {
        &self.coefficients
    }

    pub fn constant(&self) -> &S {
        &self.constant
    }

    pub fn apply(&self, args: &[S]) -> S {
        assert_eq!(args.len(), self.arity(), "argument count");
        self.coefficients
            .iter()
            .zip(args)
            .fold(self.constant.clone(), |acc, (a, x)| acc + a.clone() * x.clone())
    }

    /// Evaluation on extended arguments; every coefficient must be positive
    /// wherever an infinite argument appears.
    pub fn apply_extended(&self, args: &[Extended<S>]) -> Result<Extended<S>> {
        assert_eq!(args.len(), self.arity(), "argument count");
        let mut acc = Extended::Finite(self.constant.clone());
        for (a, x) in self.coefficients.iter().zip(args) {
            acc = acc.add(&x.scale(a)?)?;
        }
        Ok(acc)
    }

    /// Drops arguments with zero coefficient. The collapsed function has the
    /// same value set over any constants, since those arguments never
    /// influence the value and can always be filled with the least element.
    pub fn collapse_zero_coefficients(&self) -> Result<Self> {
        let kept: Vec<S> = self
            .coefficients
            .iter()
            .filter(|a| !a.is_zero())
            .cloned()
            .collect();
        if kept.is_empty() {
            return Err(Error::Precondition(
                "all coefficients are zero; the function is constant".into(),
            ));
        }
        LinearFunction::new(kept, self.constant.clone())
    }
}

impl<S: Scalar> MonotoneFn<S> for LinearFunction<S> {
    fn arity(&self) -> usize {
        self.coefficients.len()
    }

    fn eval(&self, args: &[S]) -> Option<S> {
        Some(self.apply(args))
    }

    fn is_nondecreasing(&self) -> bool {
        true
    }

    fn describe(&self) -> Value {
        json!({
            "coefficients": self.coefficients.iter().map(Scalar::canonical).collect::<Vec<_>>(),
            "constant": self.constant.canonical(),
        })
    }
}

/// A finite set of functions `G` together with a finite constant set `P`.
#[derive(Clone, Debug)]
pub struct GeneratorSystem<S, F = LinearFunction<S>> {
    functions: Vec<F>,
    names: Vec<String>,
    constants: Vec<S>,
}

impl<S: Scalar, F: MonotoneFn<S>> GeneratorSystem<S, F> {
    /// Functions are named `g` when there is only one, `g1, g2, …` otherwise.
    pub fn new(functions: Vec<F>, constants: Vec<S>) -> Result<Self> {
        let names = if functions.len() == 1 {
            vec!["g".to_string()]
        } else {
            (1..=functions.len()).map(|i| format!("g{i}")).collect()
        };
        Self::with_names(functions, names, constants)
    }

    pub fn with_names(functions: Vec<F>, names: Vec<String>, mut constants: Vec<S>) -> Result<Self> {
        if constants.is_empty() {
            return Err(Error::Precondition("constant set P must be nonempty".into()));
        }
        if names.len() != functions.len() {
            return Err(Error::Precondition("one name per function required".into()));
        }
        let unique: HashSet<&String> = names.iter().collect();
        if unique.len() != names.len() {
            return Err(Error::Precondition("function names must be distinct".into()));
        }
        if functions.iter().any(|f| f.arity() == 0) {
            return Err(Error::Precondition("functions must have arity ≥ 1".into()));
        }
        constants.sort();
        let before = constants.len();
        constants.dedup();
        if constants.len() != before {
            return Err(Error::Precondition("constant set P contains duplicates".into()));
        }
        Ok(GeneratorSystem {
            functions,
            names,
            constants,
        })
    }

    pub fn functions(&self) -> &[F] {
        &self.functions
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn constants(&self) -> &[S] {
        &self.constants
    }

    pub fn function_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn describe(&self) -> Value {
        let functions: Vec<Value> = self
            .functions
            .iter()
            .zip(&self.names)
            .map(|(f, name)| {
                let mut v = f.describe();
                if let Value::Object(map) = &mut v {
                    map.insert("name".into(), Value::String(name.clone()));
                }
                v
            })
            .collect();
        json!({
            "functions": functions,
            "constants": self.constants.iter().map(Scalar::canonical).collect::<Vec<_>>(),
        })
    }
}

impl<S: Scalar> GeneratorSystem<S> {
    /// `F_n = F({g_n}, {0})`.
    pub fn fusible(n: usize) -> Self {
        Self::new(vec![LinearFunction::g_n(n)], vec![S::zero()]).expect("valid system")
    }

    /// `F_{≤n} = F({g_1, …, g_n}, {0})`.
    pub fn fusible_up_to(n: usize) -> Self {
        Self::new((1..=n).map(LinearFunction::g_n).collect(), vec![S::zero()])
            .expect("valid system")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermNode<S> {
    Const(S),
    Apply {
        func: usize,
        args: Vec<Arc<MonotoneTerm<S>>>,
    },
}

/// A closed term over a system, with its value cached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneTerm<S> {
    node: TermNode<S>,
    value: S,
}

impl<S: Scalar> MonotoneTerm<S> {
    pub fn constant(value: S) -> Self {
        MonotoneTerm {
            node: TermNode::Const(value.clone()),
            value,
        }
    }

    /// Applies function `func` of `sys` and checks the monotone condition at
    /// the new root.
    pub fn apply<F: MonotoneFn<S>>(
        sys: &GeneratorSystem<S, F>,
        func: usize,
        args: Vec<Arc<MonotoneTerm<S>>>,
    ) -> Result<Self> {
        let term = Self::apply_unchecked(sys, func, args)?;
        if let Some(child) = term.children().iter().find(|c| c.value >= term.value) {
            return Err(Error::NotMonotone {
                path: vec![],
                value: term.value.canonical(),
                child: child.value.canonical(),
            });
        }
        Ok(term)
    }

    /// Builds an application without the monotone check; [`eval_term`]
    /// validates such terms.
    pub fn apply_unchecked<F: MonotoneFn<S>>(
        sys: &GeneratorSystem<S, F>,
        func: usize,
        args: Vec<Arc<MonotoneTerm<S>>>,
    ) -> Result<Self> {
        let f = sys
            .functions()
            .get(func)
            .ok_or_else(|| Error::Domain(format!("no function with index {func}")))?;
        if f.arity() != args.len() {
            return Err(Error::ArityMismatch {
                expected: f.arity(),
                found: args.len(),
            });
        }
        let vals: Vec<S> = args.iter().map(|a| a.value.clone()).collect();
        let value = f.eval(&vals).ok_or_else(|| {
            Error::Domain(format!("{} undefined at the given arguments", sys.names()[func]))
        })?;
        Ok(MonotoneTerm {
            node: TermNode::Apply { func, args },
            value,
        })
    }

    pub fn value(&self) -> &S {
        &self.value
    }

    pub fn node(&self) -> &TermNode<S> {
        &self.node
    }

    pub fn children(&self) -> &[Arc<MonotoneTerm<S>>] {
        match &self.node {
            TermNode::Const(_) => &[],
            TermNode::Apply { args, .. } => args,
        }
    }

    pub fn applications(&self) -> usize {
        match &self.node {
            TermNode::Const(_) => 0,
            TermNode::Apply { args, .. } => 1 + args.iter().map(|a| a.applications()).sum::<usize>(),
        }
    }

    /// Values of all proper subterms.
    pub fn subterm_values(&self) -> Vec<S> {
        let mut out = Vec::new();
        let mut stack: Vec<&MonotoneTerm<S>> = self.children().iter().map(|c| &**c).collect();
        while let Some(t) = stack.pop() {
            out.push(t.value.clone());
            stack.extend(t.children().iter().map(|c| &**c));
        }
        out
    }

    pub fn to_sexpr<F>(&self, sys: &GeneratorSystem<S, F>) -> String {
        match &self.node {
            TermNode::Const(v) => v.short(),
            TermNode::Apply { func, args } => {
                let mut s = format!("({}", sys.names[*func]);
                for a in args {
                    s.push(' ');
                    s.push_str(&a.to_sexpr(sys));
                }
                s.push(')');
                s
            }
        }
    }

    /// Reads a witness such as `(g 0 (g 0 0))`. The result is not validated;
    /// pass it to [`eval_term`].
    pub fn parse<F: MonotoneFn<S>>(sys: &GeneratorSystem<S, F>, text: &str) -> Result<Self> {
        Self::from_sexp(sys, &Sexp::parse(text)?)
    }

    fn from_sexp<F: MonotoneFn<S>>(sys: &GeneratorSystem<S, F>, sexp: &Sexp) -> Result<Self> {
        match sexp {
            Sexp::Atom(a) => Ok(MonotoneTerm::constant(S::parse_canonical(a)?)),
            Sexp::List(_) => {
                let (head, rest) = sexp
                    .as_call()
                    .ok_or_else(|| Error::Parse(format!("malformed term {sexp}")))?;
                let func = sys
                    .function_index(head)
                    .ok_or_else(|| Error::Parse(format!("unknown function {head:?}")))?;
                let args = rest
                    .iter()
                    .map(|s| Self::from_sexp(sys, s).map(Arc::new))
                    .collect::<Result<Vec<_>>>()?;
                Self::apply_unchecked(sys, func, args)
            }
        }
    }
}

/// Re-evaluates `term` bottom-up, checking constants belong to `P`, cached
/// values are exact and every application exceeds its children. Violations
/// report the child-index path from the root.
pub fn eval_term<S: Scalar, F: MonotoneFn<S>>(
    sys: &GeneratorSystem<S, F>,
    term: &MonotoneTerm<S>,
) -> Result<S> {
    let mut path = Vec::new();
    eval_at(sys, term, &mut path)
}

fn eval_at<S: Scalar, F: MonotoneFn<S>>(
    sys: &GeneratorSystem<S, F>,
    term: &MonotoneTerm<S>,
    path: &mut Vec<usize>,
) -> Result<S> {
    match &term.node {
        TermNode::Const(v) => {
            if sys.constants().binary_search(v).is_err() {
                return Err(Error::Domain(format!(
                    "constant {} at {path:?} is not in P",
                    v.canonical()
                )));
            }
            Ok(v.clone())
        }
        TermNode::Apply { func, args } => {
            let mut vals = Vec::with_capacity(args.len());
            for (i, a) in args.iter().enumerate() {
                path.push(i);
                vals.push(eval_at(sys, a, path)?);
                path.pop();
            }
            let f = &sys.functions()[*func];
            let value = f.eval(&vals).ok_or_else(|| {
                Error::Domain(format!("{} undefined at {path:?}", sys.names()[*func]))
            })?;
            if value != term.value {
                return Err(Error::Domain(format!(
                    "cached value {} at {path:?} differs from {}",
                    term.value.canonical(),
                    value.canonical()
                )));
            }
            if let Some(child) = vals.iter().find(|c| **c >= value) {
                return Err(Error::NotMonotone {
                    path: path.clone(),
                    value: value.canonical(),
                    child: child.canonical(),
                });
            }
            Ok(value)
        }
    }
}

/// Incremental breadth-first generator: after `k` calls to
/// [`LevelGenerator::next_level`], `entries()` holds every value whose
/// cheapest monotone witness uses at most `k` applications.
///
/// Within a level, values are ordered by the canonical serialization of
/// their witness, and a value reached by several witnesses of the same size
/// keeps the lexicographically smallest one.
pub struct LevelGenerator<S, F> {
    sys: Arc<GeneratorSystem<S, F>>,
    entries: Vec<Entry<S>>,
    index: HashMap<S, usize>,
    levels: Vec<Vec<usize>>,
    /// `levels` with each level ordered by value.
    by_value: Vec<Vec<usize>>,
    ceiling: Option<S>,
}

#[derive(Clone, Debug)]
pub struct Entry<S> {
    pub value: S,
    pub witness: Arc<MonotoneTerm<S>>,
    pub sexpr: String,
    pub level: usize,
}

impl<S: Scalar, F: MonotoneFn<S>> LevelGenerator<S, F> {
    pub fn new(sys: Arc<GeneratorSystem<S, F>>) -> Self {
        Self::with_ceiling(sys, None)
    }

    /// Like [`LevelGenerator::new`] but values above `ceiling` are dropped.
    /// Every subterm of a monotone term is below its value, so the entries
    /// kept are exactly the unrestricted entries up to `ceiling`, at the
    /// same levels, with the same witnesses and in the same order.
    pub fn with_ceiling(sys: Arc<GeneratorSystem<S, F>>, ceiling: Option<S>) -> Self {
        let constants: Vec<S> = sys
            .constants()
            .iter()
            .filter(|p| ceiling.as_ref().is_none_or(|c| *p <= c))
            .cloned()
            .collect();
        let mut gen = LevelGenerator {
            sys,
            entries: Vec::new(),
            index: HashMap::new(),
            levels: Vec::new(),
            by_value: Vec::new(),
            ceiling,
        };
        let mut level0 = Vec::new();
        for p in &constants {
            let id = gen.entries.len();
            gen.entries.push(Entry {
                value: p.clone(),
                witness: Arc::new(MonotoneTerm::constant(p.clone())),
                sexpr: p.short(),
                level: 0,
            });
            gen.index.insert(p.clone(), id);
            level0.push(id);
        }
        gen.push_level(level0);
        gen
    }

    pub fn system(&self) -> &GeneratorSystem<S, F> {
        &self.sys
    }

    pub fn ceiling(&self) -> Option<&S> {
        self.ceiling.as_ref()
    }

    pub fn entries(&self) -> &[Entry<S>] {
        &self.entries
    }

    /// Number of completed application levels.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn contains(&self, v: &S) -> bool {
        self.index.contains_key(v)
    }

    pub fn entry_of(&self, v: &S) -> Option<&Entry<S>> {
        self.index.get(v).map(|&i| &self.entries[i])
    }

    /// Builds the next level and returns the ids of its new entries.
    pub fn next_level(&mut self) -> std::ops::Range<usize> {
        let target = self.levels.len();
        // value -> (function, child entry ids)
        let mut found: HashMap<S, (usize, Vec<usize>)> = HashMap::new();
        for (fi, f) in self.sys.functions().iter().enumerate() {
            let arity = f.arity();
            let prune = self.ceiling.is_some() && f.is_nondecreasing();
            for sizes in compositions(target - 1, arity) {
                let pools: Vec<&[usize]> = sizes.iter().map(|&s| self.by_value[s].as_slice()).collect();
                if pools.iter().any(|p| p.is_empty()) {
                    continue;
                }
                let mins: Vec<S> = pools.iter().map(|p| self.entries[p[0]].value.clone()).collect();
                // depth-first over tuples, each pool ascending; with pruning,
                // a prefix whose cheapest completion already exceeds the
                // ceiling ends the loop at its depth
                let mut cursor = vec![0usize; arity];
                let mut args: Vec<S> = mins.clone();
                let mut k = 0;
                loop {
                    if cursor[k] == pools[k].len() {
                        if k == 0 {
                            break;
                        }
                        k -= 1;
                        cursor[k] += 1;
                        continue;
                    }
                    args[k] = self.entries[pools[k][cursor[k]]].value.clone();
                    let full = k + 1 == arity;
                    let mut value = None;
                    if prune || full {
                        for j in k + 1..arity {
                            args[j] = mins[j].clone();
                        }
                        value = f.eval(&args);
                        if prune && value.as_ref().zip(self.ceiling.as_ref()).is_some_and(|(v, c)| v > c) {
                            cursor[k] = pools[k].len();
                            continue;
                        }
                    }
                    if !full {
                        k += 1;
                        cursor[k] = 0;
                        continue;
                    }
                    if let Some(v) = value {
                        if args.iter().all(|a| *a < v)
                            && self.ceiling.as_ref().is_none_or(|c| v <= *c)
                            && !self.index.contains_key(&v)
                        {
                            let ids: Vec<usize> = cursor.iter().zip(&pools).map(|(&c, p)| p[c]).collect();
                            match found.get(&v) {
                                None => {
                                    found.insert(v, (fi, ids));
                                }
                                Some((old_f, old_ids)) => {
                                    if self.render(fi, &ids) < self.render(*old_f, old_ids) {
                                        found.insert(v, (fi, ids));
                                    }
                                }
                            }
                        }
                    }
                    cursor[k] += 1;
                }
            }
        }
        let mut fresh: Vec<(String, S, usize, Vec<usize>)> = found
            .into_iter()
            .map(|(v, (fi, ids))| (self.render(fi, &ids), v, fi, ids))
            .collect();
        fresh.sort_by(|a, b| a.0.cmp(&b.0));
        let start = self.entries.len();
        let mut level = Vec::with_capacity(fresh.len());
        for (sexpr, value, fi, ids) in fresh {
            let args = ids.iter().map(|&i| self.entries[i].witness.clone()).collect();
            let witness = Arc::new(MonotoneTerm {
                node: TermNode::Apply { func: fi, args },
                value: value.clone(),
            });
            let id = self.entries.len();
            self.entries.push(Entry {
                value: value.clone(),
                witness,
                sexpr,
                level: target,
            });
            self.index.insert(value, id);
            level.push(id);
        }
        self.push_level(level);
        start..self.entries.len()
    }

    fn push_level(&mut self, level: Vec<usize>) {
        let mut sorted = level.clone();
        sorted.sort_by(|&a, &b| self.entries[a].value.cmp(&self.entries[b].value));
        self.levels.push(level);
        self.by_value.push(sorted);
    }

    fn render(&self, func: usize, ids: &[usize]) -> String {
        let mut s = format!("({}", self.sys.names()[func]);
        for &i in ids {
            s.push(' ');
            s.push_str(&self.entries[i].sexpr);
        }
        s.push(')');
        s
    }
}

/// All ordered ways to write `total` as a sum of `parts` nonnegative integers.
pub(crate) fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(parts);
    fn rec(total: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(total);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for first in 0..=total {
            cur.push(first);
            rec(total - first, parts - 1, cur, out);
            cur.pop();
        }
    }
    if parts > 0 {
        rec(total, parts, &mut cur, &mut out);
    }
    out
}

/// The result of [`generate`]: values ascending, one witness each.
#[derive(Clone, Debug)]
pub struct Fragment<S> {
    pub budget: usize,
    pub values: Vec<S>,
    pub witnesses: Vec<Arc<MonotoneTerm<S>>>,
    pub serialized: Vec<String>,
    /// Set when `cap` cut generation short; completeness then no longer holds.
    pub truncated: bool,
}

impl<S: Scalar> Fragment<S> {
    pub fn contains(&self, v: &S) -> bool {
        self.values.binary_search(v).is_ok()
    }

    /// Least element strictly above `r`.
    pub fn successor_of(&self, r: &S) -> Option<&S> {
        let i = self.values.partition_point(|v| v <= r);
        self.values.get(i)
    }

    pub fn to_json<F: MonotoneFn<S>>(&self, sys: &GeneratorSystem<S, F>) -> Value {
        json!({
            "system": sys.describe(),
            "budget": self.budget,
            "values": self.values.iter().map(Scalar::canonical).collect::<Vec<_>>(),
            "witnesses": self.serialized,
            "truncated": self.truncated,
        })
    }
}

/// Every value of `F(G, P)` constructible with at most `budget` applications,
/// up to `cap` elements in generation order.
pub fn generate<S: Scalar, F: MonotoneFn<S> + Clone>(
    sys: &GeneratorSystem<S, F>,
    budget: usize,
    cap: usize,
) -> Fragment<S> {
    let mut gen = LevelGenerator::new(Arc::new(sys.clone()));
    for _ in 0..budget {
        if gen.entries().len() >= cap {
            break;
        }
        gen.next_level();
    }
    let truncated = gen.entries().len() > cap
        || (gen.entries().len() == cap && gen.depth() < budget && !gen.next_level().is_empty());
    let mut kept: Vec<&Entry<S>> = gen.entries().iter().take(cap).collect();
    kept.sort_by(|a, b| a.value.cmp(&b.value));
    Fragment {
        budget,
        values: kept.iter().map(|e| e.value.clone()).collect(),
        witnesses: kept.iter().map(|e| e.witness.clone()).collect(),
        serialized: kept.iter().map(|e| e.sexpr.clone()).collect(),
        truncated,
    }
}

/// For each prime dividing some denominator, the largest exponent seen.
///
/// Trial division runs up to `10^6`; a cofactor left after that is recorded
/// as a single key even if composite.
pub fn denominator_profile<S: Scalar>(values: &[S]) -> BTreeMap<BigInt, u32> {
    const TRIAL_LIMIT: u64 = 1_000_000;
    let mut profile: BTreeMap<BigInt, u32> = BTreeMap::new();
    for v in values {
        let mut d = v.denom_big();
        let mut p: u64 = 2;
        while !d.is_one() && p <= TRIAL_LIMIT {
            let bp = BigInt::from(p);
            if &bp * &bp > d {
                break;
            }
            let mut e = 0u32;
            loop {
                let (q, r) = d.div_rem(&bp);
                if !r.is_zero() {
                    break;
                }
                d = q;
                e += 1;
            }
            if e > 0 {
                let slot = profile.entry(bp).or_insert(0);
                *slot = (*slot).max(e);
            }
            p += if p == 2 { 1 } else { 2 };
        }
        if !d.is_one() {
            // d is prime here unless trial division stopped early
            let slot = profile.entry(d).or_insert(0);
            *slot = (*slot).max(1);
        }
    }
    profile
}

/// Serializable summary used by the CLI.
#[derive(Serialize)]
pub struct ProfileEntry {
    pub prime: String,
    pub exponent: u32,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ExactRational as Q;

    fn q(n: i64, d: i64) -> Q {
        Q::ratio(n, d)
    }

    /// Independent oracle: enumerate every term shape with at most `budget`
    /// applications over `F({g_n},{0})` by plain recursion.
    fn oracle_fragment(n: usize, budget: usize) -> Vec<Q> {
        fn terms(n: usize, size: usize, memo: &mut HashMap<usize, Vec<Q>>) -> Vec<Q> {
            if let Some(v) = memo.get(&size) {
                return v.clone();
            }
            let out = if size == 0 {
                vec![Q::zero()]
            } else {
                let mut out = Vec::new();
                for split in compositions(size - 1, n) {
                    let pools: Vec<Vec<Q>> = split.iter().map(|&s| terms(n, s, memo)).collect();
                    let mut stack: Vec<Vec<Q>> = vec![vec![]];
                    for pool in &pools {
                        let mut next = Vec::new();
                        for prefix in &stack {
                            for v in pool {
                                let mut p = prefix.clone();
                                p.push(v.clone());
                                next.push(p);
                            }
                        }
                        stack = next;
                    }
                    for args in stack {
                        let sum: Q = args.iter().cloned().fold(Q::zero(), |a, b| a + b);
                        let v = (sum + Q::one()) / Q::int(n as i64);
                        if args.iter().all(|a| *a < v) {
                            out.push(v);
                        }
                    }
                }
                out
            };
            memo.insert(size, out.clone());
            out
        }
        let mut memo = HashMap::new();
        let mut all: Vec<Q> = (0..=budget).flat_map(|s| terms(n, s, &mut memo)).collect();
        all.sort();
        all.dedup();
        all
    }

    #[test]
    fn eval_term_examples() {
        let f2 = GeneratorSystem::<Q>::fusible(2);
        let t = MonotoneTerm::parse(&f2, "(g 0 0)").unwrap();
        assert_eq!(eval_term(&f2, &t).unwrap(), q(1, 2));
        let zero = MonotoneTerm::parse(&f2, "0").unwrap();
        assert_eq!(eval_term(&f2, &zero).unwrap(), q(0, 1));
        let t2 = MonotoneTerm::parse(&f2, "(g 0 (g 0 0))").unwrap();
        assert_eq!(eval_term(&f2, &t2).unwrap(), q(3, 4));
        assert_eq!(t2.to_sexpr(&f2), "(g 0 (g 0 0))");
    }

    #[test]
    fn eval_term_reports_violation_path() {
        let f2 = GeneratorSystem::<Q>::fusible(2);
        // g(0, g(g(0,0), g(0,0))) : inner g(1/2,1/2) = 1 > 1/2, outer g(0,1) = 1 not > 1
        let bad = MonotoneTerm::parse(&f2, "(g 0 (g (g 0 0) (g 0 0)))").unwrap();
        match eval_term(&f2, &bad) {
            Err(Error::NotMonotone { path, .. }) => assert!(path.is_empty()),
            other => panic!("expected violation, got {other:?}"),
        }
        let deep = MonotoneTerm::parse(&f2, "(g (g 0 (g (g 0 0) (g 0 0))) (g 0 0))").unwrap();
        match eval_term(&f2, &deep) {
            Err(Error::NotMonotone { path, .. }) => assert_eq!(path, vec![0]),
            other => panic!("expected violation, got {other:?}"),
        }
        let outside = MonotoneTerm::parse(&f2, "(g 1 0)").unwrap();
        assert!(matches!(eval_term(&f2, &outside), Err(Error::Domain(_))));
        assert!(MonotoneTerm::parse(&f2, "(h 0 0)").is_err());
        assert!(matches!(
            MonotoneTerm::parse(&f2, "(g 0)"),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn budget_zero_is_p() {
        let sys = GeneratorSystem::new(vec![LinearFunction::g_n(2)], vec![q(1, 1), q(0, 1)]).unwrap();
        let frag = generate(&sys, 0, usize::MAX);
        assert_eq!(frag.values, vec![q(0, 1), q(1, 1)]);
        assert!(!frag.truncated);
    }

    #[test]
    fn small_fragments() {
        let f2 = GeneratorSystem::<Q>::fusible(2);
        let frag = generate(&f2, 3, usize::MAX);
        // g(1/2, 1/2) = 1 takes three applications; 9/8 = g(1/2, 3/4) takes four
        assert_eq!(frag.values, vec![q(0, 1), q(1, 2), q(3, 4), q(7, 8), q(1, 1)]);
        assert!(generate(&f2, 4, usize::MAX).contains(&q(9, 8)));
        let f3 = GeneratorSystem::<Q>::fusible(3);
        let frag3 = generate(&f3, 2, usize::MAX);
        assert_eq!(frag3.values, vec![q(0, 1), q(1, 3), q(4, 9)]);
        // 5/9 = g(0, 1/3, 1/3) takes three applications
        let frag3b = generate(&f3, 3, usize::MAX);
        assert!(frag3b.contains(&q(5, 9)));
    }

    #[test]
    fn matches_oracle() {
        for (n, budget) in [(2, 9), (3, 7), (4, 6)] {
            let sys = GeneratorSystem::<Q>::fusible(n);
            let frag = generate(&sys, budget, usize::MAX);
            assert_eq!(frag.values, oracle_fragment(n, budget), "n={n} budget={budget}");
        }
    }

    #[test]
    fn witnesses_are_sound() {
        let sys = GeneratorSystem::<Q>::fusible_up_to(3);
        let frag = generate(&sys, 5, usize::MAX);
        for (v, w) in frag.values.iter().zip(&frag.witnesses) {
            assert_eq!(&eval_term(&sys, w).unwrap(), v);
            assert!(w.subterm_values().iter().all(|s| s < v));
        }
        for (v, s) in frag.values.iter().zip(&frag.serialized) {
            let reparsed = MonotoneTerm::parse(&sys, s).unwrap();
            assert_eq!(&eval_term(&sys, &reparsed).unwrap(), v);
        }
    }

    #[test]
    fn cap_truncates_and_flags() {
        let f2 = GeneratorSystem::<Q>::fusible(2);
        let frag = generate(&f2, 10, 5);
        assert_eq!(frag.values.len(), 5);
        assert!(frag.truncated);
        let exact = generate(&f2, 3, 5);
        assert_eq!(exact.values.len(), 5);
        assert!(exact.truncated || generate(&f2, 3, usize::MAX).values.len() == 5);
    }

    #[test]
    fn denominator_profiles() {
        let p = denominator_profile(&[q(0, 1), q(1, 3), q(4, 9)]);
        assert_eq!(p.into_iter().collect::<Vec<_>>(), vec![(BigInt::from(3), 2)]);
        assert!(denominator_profile(&[q(0, 1)]).is_empty());
        let p2 = denominator_profile(&[q(0, 1), q(1, 2), q(3, 4)]);
        assert_eq!(p2.into_iter().collect::<Vec<_>>(), vec![(BigInt::from(2), 2)]);
        let big_prime = denominator_profile(&[q(1, 1_000_003 * 4)]);
        assert_eq!(big_prime.get(&BigInt::from(1_000_003)), Some(&1));
    }
}
