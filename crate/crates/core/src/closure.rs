//! The closure `cl(g)` of a monotone linear function and the successor,
//! predecessor and weak-predecessor procedures deciding membership in the
//! topological closure of `F({g}, P)`.
//!
//! For a proper subset `u` of the argument positions whose coefficients sum
//! to less than one, `g_u(ȳ)` is the fixed point of the unary map obtained
//! by tying every argument in `u` to the variable and the others to `ȳ`.
//! The closure of `F({g}, P)` equals `F(cl(g), P)`, which is enumerable,
//! and the four procedures below work against that enumeration.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::generator::{GeneratorSystem, LevelGenerator, LinearFunction, MonotoneTerm};
use crate::numbers::{Extended, UnaryAffine};
use crate::scalar::Scalar;

/// Engine calls (memo misses) allowed per top-level query.
pub const DEFAULT_ENGINE_BUDGET: u64 = 2_000_000;
/// Enumeration positions a single predecessor scan may inspect.
pub const DEFAULT_SCAN_CAP: usize = 200_000;
/// Nesting depth of procedure calls before giving up.
pub const DEFAULT_MAX_DEPTH: usize = 4_000;

/// `g` with the positions in `u` (1-based) tied together and the remaining
/// positions fixed to `params`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionDescriptor<S> {
    pub base: LinearFunction<S>,
    pub u: Vec<usize>,
    pub params: Vec<S>,
}

impl<S: Scalar> SectionDescriptor<S> {
    pub fn new(base: LinearFunction<S>, mut u: Vec<usize>, params: Vec<S>) -> Result<Self> {
        let n = base.arity();
        u.sort_unstable();
        u.dedup();
        if u.iter().any(|&j| j == 0 || j > n) || u.len() >= n {
            return Err(Error::Precondition(format!(
                "u = {u:?} is not a proper subset of 1..={n}"
            )));
        }
        if params.len() != n - u.len() {
            return Err(Error::ArityMismatch {
                expected: n - u.len(),
                found: params.len(),
            });
        }
        Ok(SectionDescriptor { base, u, params })
    }

    /// The unary map `x ↦ (Σ_{j∈u} a_j)·x + Σ_{j∉u} a_j p_j + b`.
    pub fn diagonal(&self) -> Result<UnaryAffine<S>> {
        let mut slope = S::zero();
        let mut offset = self.base.constant().clone();
        let mut params = self.params.iter();
        for (j, a) in self.base.coefficients().iter().enumerate() {
            if self.u.contains(&(j + 1)) {
                slope = slope + a.clone();
            } else {
                offset = offset + a.clone() * params.next().expect("one parameter per free position").clone();
            }
        }
        UnaryAffine::new(slope, offset)
    }
}

/// `g_u` as a linear function of the free positions:
/// `g_u(ȳ) = (Σ_{j∉u} a_j y_j + b)/(1 − Σ_{j∈u} a_j)`.
fn derived_function<S: Scalar>(g: &LinearFunction<S>, u: &[usize]) -> Option<LinearFunction<S>> {
    let slope: S = u
        .iter()
        .map(|&j| g.coefficients()[j - 1].clone())
        .fold(S::zero(), |acc, a| acc + a);
    if slope >= S::one() {
        return None;
    }
    let scale = S::one() / (S::one() - slope);
    let coefficients = g
        .coefficients()
        .iter()
        .enumerate()
        .filter(|(j, _)| !u.contains(&(j + 1)))
        .map(|(_, a)| a.clone() * scale.clone())
        .collect();
    Some(LinearFunction::new(coefficients, g.constant().clone() * scale).expect("coefficients stay nonnegative"))
}

#[derive(Clone, Debug)]
pub struct ClosureSystem<S> {
    base: LinearFunction<S>,
    constants: Vec<S>,
    /// `(u, g_u)` for every nonempty proper `u` with slope below one, in
    /// lexicographic order of `u`.
    derived: Vec<(Vec<usize>, LinearFunction<S>)>,
    generators: Arc<GeneratorSystem<S>>,
}

/// Builds `cl(g)` over `constants`. Every coefficient must be strictly
/// positive (collapse zero coefficients first with
/// [`LinearFunction::collapse_zero_coefficients`]), and some `p ∈ P` must
/// satisfy `g(p, …, p) > p`.
pub fn build_closure<S: Scalar>(g: LinearFunction<S>, constants: Vec<S>) -> Result<ClosureSystem<S>> {
    if let Some(j) = g.coefficients().iter().position(|a| !a.is_positive()) {
        return Err(Error::Construction(format!(
            "coefficient a_{} is not strictly positive; collapse zero coefficients before building the closure",
            j + 1
        )));
    }
    let mut constants = constants;
    constants.sort();
    constants.dedup();
    let grows = constants.iter().any(|p| g.apply(&vec![p.clone(); g.arity()]) > *p);
    if !grows {
        return Err(Error::Construction(
            "no constant p satisfies g(p, …, p) > p".into(),
        ));
    }
    let n = g.arity();
    let mut derived = Vec::new();
    for mask in 1u64..(1u64 << n) - 1 {
        let u: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).map(|j| j + 1).collect();
        if let Some(f) = derived_function(&g, &u) {
            derived.push((u, f));
        }
    }
    derived.sort_by(|a, b| a.0.cmp(&b.0));
    // coinciding functions (for symmetric g most of them) add nothing to
    // the enumeration, so only the first of each is generated from
    let mut functions = vec![g.clone()];
    let mut names = vec!["g".to_string()];
    for (u, f) in &derived {
        if functions.contains(f) {
            continue;
        }
        functions.push(f.clone());
        let list: Vec<String> = u.iter().map(usize::to_string).collect();
        names.push(format!("g{{{}}}", list.join(",")));
    }
    let generators = Arc::new(GeneratorSystem::with_names(functions, names, constants.clone())?);
    Ok(ClosureSystem {
        base: g,
        constants,
        derived,
        generators,
    })
}

impl<S: Scalar> ClosureSystem<S> {
    pub fn base(&self) -> &LinearFunction<S> {
        &self.base
    }

    pub fn constants(&self) -> &[S] {
        &self.constants
    }

    pub fn derived(&self) -> &[(Vec<usize>, LinearFunction<S>)] {
        &self.derived
    }

    /// `cl(g)` together with `P`, as a generator system.
    pub fn generator_system(&self) -> &GeneratorSystem<S> {
        &self.generators
    }

    /// `g_u(ȳ)`.
    pub fn eval_derived(&self, u: &[usize], y: &[S]) -> Result<S> {
        let (_, f) = self
            .derived
            .iter()
            .find(|(v, _)| v == u)
            .ok_or_else(|| Error::Domain(format!("u = {u:?} is not part of cl(g)")))?;
        if y.len() != f.arity() {
            return Err(Error::ArityMismatch {
                expected: f.arity(),
                found: y.len(),
            });
        }
        Ok(f.apply(y))
    }

    pub fn describe(&self) -> Value {
        json!({
            "base": {
                "coefficients": self.base.coefficients().iter().map(Scalar::canonical).collect::<Vec<_>>(),
                "constant": self.base.constant().canonical(),
            },
            "constants": self.constants.iter().map(Scalar::canonical).collect::<Vec<_>>(),
            "derived": self.derived.iter().map(|(u, f)| json!({
                "u": u,
                "coefficients": f.coefficients().iter().map(Scalar::canonical).collect::<Vec<_>>(),
                "constant": f.constant().canonical(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// `z_1, z_2, …`: the values of monotone terms over `cl(g) ∪ P` by
/// increasing application count, ties broken by canonical serialization.
/// Each value is listed once, under its cheapest witness.
pub struct ClosureEnumerator<S> {
    gen: LevelGenerator<S, LinearFunction<S>>,
    sorted: BTreeSet<S>,
    last_growth: usize,
    exhausted: bool,
}

impl<S: Scalar> ClosureEnumerator<S> {
    pub fn new(sys: &ClosureSystem<S>) -> Self {
        Self::with_ceiling(sys, None)
    }

    /// The subsequence of elements at most `ceiling`, in the same order.
    pub fn with_ceiling(sys: &ClosureSystem<S>, ceiling: Option<S>) -> Self {
        let gen = LevelGenerator::with_ceiling(sys.generators.clone(), ceiling);
        let sorted = gen.entries().iter().map(|e| e.value.clone()).collect();
        ClosureEnumerator {
            gen,
            sorted,
            last_growth: 0,
            exhausted: false,
        }
    }

    pub fn ceiling(&self) -> Option<&S> {
        self.gen.ceiling()
    }

    /// Generates levels until one adds elements. False once the enumeration
    /// is known to be finite and complete.
    pub fn grow(&mut self) -> bool {
        while !self.exhausted {
            let new = self.gen.next_level();
            let depth = self.gen.depth();
            if !new.is_empty() {
                self.last_growth = depth;
                for e in &self.gen.entries()[new] {
                    self.sorted.insert(e.value.clone());
                }
                return true;
            }
            let max_arity = self.gen.system().functions().iter().map(|f| f.arity()).max().unwrap_or(1);
            // a level is built from levels summing to one less, so a run
            // this long without growth can never end
            if depth > max_arity * self.last_growth + 1 {
                self.exhausted = true;
            }
        }
        false
    }

    /// The element at position `i` (0-based), generating further levels as
    /// needed. `None` when the enumeration is finite and shorter.
    pub fn get(&mut self, i: usize) -> Option<&S> {
        while i >= self.gen.entries().len() && self.grow() {}
        self.gen.entries().get(i).map(|e| &e.value)
    }

    /// Largest element generated so far that is at most `r` (below `r`
    /// when `strict`).
    pub fn max_generated_below(&self, r: &Extended<S>, strict: bool) -> Option<&S> {
        match r {
            Extended::NegInfinity => None,
            Extended::PosInfinity => self.sorted.last(),
            Extended::Finite(v) if strict => self.sorted.range(..v.clone()).next_back(),
            Extended::Finite(v) => self.sorted.range(..=v.clone()).next_back(),
        }
    }

    pub fn witness(&mut self, i: usize) -> Option<Arc<MonotoneTerm<S>>> {
        self.get(i)?;
        Some(self.gen.entries()[i].witness.clone())
    }

    pub fn generated(&self) -> usize {
        self.gen.entries().len()
    }

    pub fn contains_generated(&self, v: &S) -> bool {
        self.gen.contains(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Key<S> {
    Succ(Extended<S>),
    BuiltSucc(Extended<S>, Vec<S>),
    Pred(Extended<S>),
    WeakPred(Extended<S>),
}

/// Invocation counts, accumulated over the engine's lifetime.
#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct CallStats {
    pub succ: u64,
    pub built_succ: u64,
    pub pred: u64,
    pub weak_pred: u64,
    pub memo_hits: u64,
    pub max_depth: usize,
    pub enumerated: usize,
}

/// The four mutually recursive procedures with one shared memo table.
///
/// A predecessor scan answers with the largest closure element on the
/// correct side of `r`, so it only tests the largest element enumerated so
/// far there and grows the enumeration while that test fails. A scan at `r`
/// never needs elements above `r`, so the enumeration is cut off above the
/// largest scan point so far and rebuilt when a scan goes higher. The scan
/// cap bounds the length of that cut-off enumeration.
/// An engine is single-threaded; separate engines are independent.
pub struct SuccessorEngine<S> {
    sys: ClosureSystem<S>,
    enumerator: ClosureEnumerator<S>,
    memo: HashMap<Key<S>, Extended<S>>,
    budget: u64,
    scan_cap: usize,
    max_depth: usize,
    deadline: Option<Instant>,
    work: u64,
    stats: CallStats,
}

impl<S: Scalar> SuccessorEngine<S> {
    pub fn new(sys: ClosureSystem<S>) -> Self {
        let enumerator = ClosureEnumerator::with_ceiling(&sys, Some(sys.constants[0].clone()));
        SuccessorEngine {
            sys,
            enumerator,
            memo: HashMap::new(),
            budget: DEFAULT_ENGINE_BUDGET,
            scan_cap: DEFAULT_SCAN_CAP,
            max_depth: DEFAULT_MAX_DEPTH,
            deadline: None,
            work: 0,
            stats: CallStats::default(),
        }
    }

    pub fn with_limits(mut self, budget: u64, scan_cap: usize) -> Self {
        self.budget = budget;
        self.scan_cap = scan_cap;
        self
    }

    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }

    /// Queries still running at `deadline` stop with a resource error.
    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    pub fn system(&self) -> &ClosureSystem<S> {
        &self.sys
    }

    fn check_deadline(&self, what: impl FnOnce() -> String) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(Error::DeadlineExceeded { what: what() }),
            _ => Ok(()),
        }
    }

    pub fn stats(&self) -> CallStats {
        CallStats {
            enumerated: self.enumerator.generated(),
            ..self.stats.clone()
        }
    }

    fn top<T>(&mut self, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        self.work = 0;
        f(self)
    }

    /// Least element of `F({g}, P)` above `r`, or `+∞`.
    pub fn succ(&mut self, r: &Extended<S>) -> Result<Extended<S>> {
        self.top(|e| e.succ_at(r, 0))
    }

    /// Least `g(ȳ, x_{k+1}, …, x_n) > r` over `x_j ∈ F ∩ (−∞, r]`, or `+∞`.
    pub fn built_succ(&mut self, r: &Extended<S>, prefix: &[S]) -> Result<Extended<S>> {
        if prefix.len() > self.sys.base.arity() {
            return Err(Error::ArityMismatch {
                expected: self.sys.base.arity(),
                found: prefix.len(),
            });
        }
        if let Some(y) = prefix.iter().find(|y| Extended::Finite((*y).clone()) > *r) {
            return Err(Error::Precondition(format!("prefix value {} exceeds r = {r}", y.canonical())));
        }
        self.top(|e| e.built_succ_at(r, prefix, 0))
    }

    /// The closure element immediately below the successor element `r`.
    /// Gives up with a scan-cap error when `r` is not certified as a
    /// successor element within the cap.
    pub fn pred(&mut self, r: &S) -> Result<Extended<S>> {
        self.top(|e| e.pred_at(&Extended::Finite(r.clone()), 0))
    }

    /// The largest closure element `x ≤ r`, or `−∞` below `min P`.
    pub fn weak_pred(&mut self, r: &S) -> Result<Extended<S>> {
        self.top(|e| e.weak_pred_at(&Extended::Finite(r.clone()), 0))
    }

    pub fn is_in_closure(&mut self, r: &S) -> Result<bool> {
        Ok(self.weak_pred(r)? == Extended::Finite(r.clone()))
    }

    fn enter(&mut self, key: &Key<S>, depth: usize) -> Result<Option<Extended<S>>> {
        match key {
            Key::Succ(_) => self.stats.succ += 1,
            Key::BuiltSucc(..) => self.stats.built_succ += 1,
            Key::Pred(_) => self.stats.pred += 1,
            Key::WeakPred(_) => self.stats.weak_pred += 1,
        }
        if let Some(v) = self.memo.get(key) {
            self.stats.memo_hits += 1;
            return Ok(Some(v.clone()));
        }
        self.stats.max_depth = self.stats.max_depth.max(depth);
        self.work += 1;
        if self.work > self.budget {
            return Err(Error::BudgetExceeded {
                budget: self.budget,
                what: describe_key(key),
            });
        }
        self.check_deadline(|| describe_key(key))?;
        if depth > self.max_depth {
            return Err(Error::BudgetExceeded {
                budget: self.max_depth as u64,
                what: format!("call nesting depth at {}", describe_key(key)),
            });
        }
        Ok(None)
    }

    fn raise_ceiling(&mut self, r: &Extended<S>) {
        let wanted = match r {
            Extended::Finite(v) => Some(v.clone()),
            _ => None,
        };
        let enough = match (self.enumerator.ceiling(), &wanted) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(c), Some(w)) => c >= w,
        };
        if !enough {
            self.enumerator = ClosureEnumerator::with_ceiling(&self.sys, wanted);
        }
    }

    fn succ_at(&mut self, r: &Extended<S>, depth: usize) -> Result<Extended<S>> {
        if *r == Extended::PosInfinity {
            return Ok(Extended::PosInfinity);
        }
        let key = Key::Succ(r.clone());
        if let Some(v) = self.enter(&key, depth)? {
            return Ok(v);
        }
        let m = self.built_succ_at(r, &[], depth + 1)?;
        let from_p = self
            .sys
            .constants
            .iter()
            .find(|p| Extended::Finite((*p).clone()) > *r)
            .map(|p| Extended::Finite(p.clone()))
            .unwrap_or(Extended::PosInfinity);
        let out = m.min(from_p);
        self.memo.insert(key, out.clone());
        Ok(out)
    }

    fn built_succ_at(&mut self, r: &Extended<S>, prefix: &[S], depth: usize) -> Result<Extended<S>> {
        let g = self.sys.base.clone();
        let n = g.arity();
        let k = prefix.len();
        if k == n {
            return Ok(Extended::Finite(g.apply(prefix)));
        }
        let key = Key::BuiltSucc(r.clone(), prefix.to_vec());
        if let Some(v) = self.enter(&key, depth)? {
            return Ok(v);
        }
        let a = g.coefficients()[k].clone();
        let mut x = self.weak_pred_at(r, depth + 1)?;
        let mut m = Extended::PosInfinity;
        loop {
            let mut args: Vec<Extended<S>> = prefix.iter().cloned().map(Extended::Finite).collect();
            args.push(x.clone());
            args.extend(std::iter::repeat(r.clone()).take(n - k - 1));
            if g.apply_extended(&args)? <= *r {
                break;
            }
            let xf = x.finite().expect("loop guard keeps x finite").clone();
            let mut longer = prefix.to_vec();
            longer.push(xf);
            let s = self.built_succ_at(r, &longer, depth + 1)?;
            let x1 = x.sub(&s.sub(r)?.div(&a)?)?;
            let x2 = self.succ_at(&x1, depth + 1)?;
            let m1 = r.add(&x2.sub(&x1)?.scale(&a)?)?;
            if m1 < m {
                m = m1;
            }
            x = self.pred_at(&x2, depth + 1)?;
        }
        self.memo.insert(key, m.clone());
        Ok(m)
    }

    fn pred_at(&mut self, r: &Extended<S>, depth: usize) -> Result<Extended<S>> {
        let min_p = Extended::Finite(self.sys.constants[0].clone());
        if *r <= min_p {
            return Ok(Extended::NegInfinity);
        }
        let key = Key::Pred(r.clone());
        if let Some(v) = self.enter(&key, depth)? {
            return Ok(v);
        }
        let out = self.scan(r, true, depth, |s, r| s == r)?;
        self.memo.insert(key, out.clone());
        Ok(out)
    }

    fn weak_pred_at(&mut self, r: &Extended<S>, depth: usize) -> Result<Extended<S>> {
        let min_p = Extended::Finite(self.sys.constants[0].clone());
        if *r < min_p {
            return Ok(Extended::NegInfinity);
        }
        let key = Key::WeakPred(r.clone());
        if let Some(v) = self.enter(&key, depth)? {
            return Ok(v);
        }
        let out = self.scan(r, false, depth, |s, r| s > r)?;
        self.memo.insert(key, out.clone());
        Ok(out)
    }

    /// Finds the largest enumerated `z` on the correct side of `r` whose
    /// successor passes `accept`. Only the current largest candidate can be
    /// the answer, so it alone is tested, and the enumeration grows while
    /// the test fails.
    fn scan(
        &mut self,
        r: &Extended<S>,
        strict: bool,
        depth: usize,
        accept: impl Fn(&Extended<S>, &Extended<S>) -> bool,
    ) -> Result<Extended<S>> {
        self.raise_ceiling(r);
        let mut tested: Option<S> = None;
        loop {
            if let Some(z) = self.enumerator.max_generated_below(r, strict).cloned() {
                let ze = Extended::Finite(z.clone());
                if !strict && ze == *r {
                    return Ok(ze);
                }
                if tested.as_ref() != Some(&z) {
                    let s = self.succ_at(&ze, depth + 1)?;
                    if accept(&s, r) {
                        return Ok(ze);
                    }
                    tested = Some(z);
                }
            }
            self.check_deadline(|| format!("scan at {r}"))?;
            if self.enumerator.generated() >= self.scan_cap || !self.enumerator.grow() {
                let what = if strict { format!("pred({r})") } else { format!("weak_pred({r})") };
                return Err(Error::ScanCapExhausted {
                    cap: self.scan_cap,
                    what,
                });
            }
        }
    }
}

fn describe_key<S: Scalar>(key: &Key<S>) -> String {
    match key {
        Key::Succ(r) => format!("succ({r})"),
        Key::BuiltSucc(r, y) => format!(
            "built_succ({r}, [{}])",
            y.iter().map(Scalar::canonical).collect::<Vec<_>>().join(", ")
        ),
        Key::Pred(r) => format!("pred({r})"),
        Key::WeakPred(r) => format!("weak_pred({r})"),
    }
}
