//! The recursive functions `M_n`.
//!
//! For `x < 0`, `M(x) = −x`. Otherwise `t_0 = 1`, `t_i = M(x − t_{i−1})` for
//! `1 ≤ i ≤ n`, and `M(x) = t_n / n`. Values `x + M(x)` are exactly the
//! points of a well-ordered set of `n`-fusible numbers.
//!
//! Evaluation uses an explicit work stack, so the host stack depth stays
//! constant however deep the recursion goes, and memoizes the whole
//! `t`-vector of every nonnegative argument. An instance is single-threaded
//! (`&mut self`); instances are `Send` and independent of each other.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::numbers::Extended;
use crate::scalar::Scalar;

/// Cache misses allowed per top-level call unless configured otherwise.
pub const DEFAULT_WORK_BUDGET: u64 = 2_000_000;

/// The full evaluation record of `M_n(x)`.
///
/// For negative `x` the base case applies and `t` is empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MTrace<S> {
    pub n: usize,
    pub x: S,
    pub t: Vec<S>,
    pub value: S,
}

impl<S: Scalar> MTrace<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "x": self.x.canonical(),
            "t": self.t.iter().map(Scalar::canonical).collect::<Vec<_>>(),
            "M": self.value.canonical(),
        })
    }
}

/// `U_i(x)` and the interval `J_i(x) = [x − t_i(x), x + U_i(x))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelData<S> {
    pub x: S,
    pub i: usize,
    pub u: Extended<S>,
    pub lower: S,
    pub upper: Extended<S>,
}

impl<S: Scalar> LevelData<S> {
    pub fn contains(&self, y: &S) -> bool {
        *y >= self.lower && Extended::Finite(y.clone()) < self.upper
    }
}

pub struct MRecursion<S> {
    n: usize,
    budget: u64,
    deadline: Option<Instant>,
    memo: HashMap<S, Box<[S]>>,
    last_misses: u64,
}

struct Frame<S> {
    x: S,
    t: Vec<S>,
}

impl<S: Scalar> MRecursion<S> {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_budget(n, DEFAULT_WORK_BUDGET)
    }

    pub fn with_budget(n: usize, budget: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Precondition(format!("M_n needs n ≥ 2, got {n}")));
        }
        Ok(MRecursion {
            n,
            budget,
            deadline: None,
            memo: HashMap::new(),
            last_misses: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn set_budget(&mut self, budget: u64) {
        self.budget = budget;
    }

    /// Evaluations still running at `deadline` stop with a resource error.
    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    /// Number of memoized nonnegative arguments.
    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    /// Cache misses of the most recent top-level evaluation.
    pub fn last_misses(&self) -> u64 {
        self.last_misses
    }

    pub fn clear(&mut self) {
        self.memo.clear();
    }

    /// `t_0(x), …, t_n(x)` for `x ≥ 0`.
    fn t_vector(&mut self, x: &S) -> Result<&[S]> {
        debug_assert!(!x.is_negative());
        if !self.memo.contains_key(x) {
            self.fill(x)?;
        }
        Ok(&self.memo[x])
    }

    fn fill(&mut self, root: &S) -> Result<()> {
        let mut misses: u64 = 1;
        self.last_misses = 0;
        let mut stack = vec![Frame {
            x: root.clone(),
            t: vec![S::one()],
        }];
        while let Some(top) = stack.last_mut() {
            if top.t.len() == self.n + 1 {
                let frame = stack.pop().expect("nonempty");
                self.memo.insert(frame.x, frame.t.into_boxed_slice());
                continue;
            }
            let arg = top.x.clone() - top.t.last().expect("t_0 present").clone();
            if arg.is_negative() {
                top.t.push(-arg);
                continue;
            }
            if let Some(t) = self.memo.get(&arg) {
                let m = t[self.n].clone() / S::int(self.n as i64);
                top.t.push(m);
                continue;
            }
            misses += 1;
            if misses > self.budget {
                self.last_misses = misses;
                return Err(Error::BudgetExceeded {
                    budget: self.budget,
                    what: format!("M_{}({})", self.n, root.canonical()),
                });
            }
            if self.deadline.is_some_and(|d| Instant::now() >= d) {
                self.last_misses = misses;
                return Err(Error::DeadlineExceeded {
                    what: format!("M_{}({})", self.n, root.canonical()),
                });
            }
            stack.push(Frame {
                x: arg,
                t: vec![S::one()],
            });
        }
        self.last_misses = misses;
        Ok(())
    }

    pub fn m(&mut self, x: &S) -> Result<S> {
        if x.is_negative() {
            self.last_misses = 0;
            return Ok(-x.clone());
        }
        let n = self.n;
        Ok(self.t_vector(x)?[n].clone() / S::int(n as i64))
    }

    pub fn trace(&mut self, x: &S) -> Result<MTrace<S>> {
        if x.is_negative() {
            self.last_misses = 0;
            return Ok(MTrace {
                n: self.n,
                x: x.clone(),
                t: vec![],
                value: -x.clone(),
            });
        }
        let n = self.n;
        let t = self.t_vector(x)?.to_vec();
        let value = t[n].clone() / S::int(n as i64);
        Ok(MTrace {
            n,
            x: x.clone(),
            t,
            value,
        })
    }

    /// `t_i(x)` for `x ≥ 0` and `0 ≤ i ≤ n`.
    pub fn t(&mut self, i: usize, x: &S) -> Result<S> {
        if i > self.n {
            return Err(Error::Domain(format!("t_{i} undefined for n = {}", self.n)));
        }
        if x.is_negative() {
            return Err(Error::Domain(format!(
                "t_i is only defined for x ≥ 0, got {}",
                x.canonical()
            )));
        }
        Ok(self.t_vector(x)?[i].clone())
    }

    /// `x + M(x)`.
    pub fn m_point(&mut self, x: &S) -> Result<S> {
        Ok(x.clone() + self.m(x)?)
    }

    /// `U_i(x) = t_i(x)/i`, with `U_0 = +∞`.
    pub fn u(&mut self, i: usize, x: &S) -> Result<Extended<S>> {
        if i == 0 {
            if x.is_negative() {
                return Err(Error::Domain("U_0 needs x ≥ 0".into()));
            }
            return Ok(Extended::PosInfinity);
        }
        let t = self.t(i, x)?;
        Ok(Extended::Finite(t / S::int(i as i64)))
    }

    pub fn level(&mut self, i: usize, x: &S) -> Result<LevelData<S>> {
        if i >= self.n {
            return Err(Error::Domain(format!("level index {i} must be below n = {}", self.n)));
        }
        let u = self.u(i, x)?;
        let lower = x.clone() - self.t(i, x)?;
        let upper = Extended::Finite(x.clone()).add(&u)?;
        Ok(LevelData {
            x: x.clone(),
            i,
            u,
            lower,
            upper,
        })
    }

    /// `l_i^x(y) = (i·x + t_i(x) + y)/(i + 1)` for `y ∈ J_i(x)`.
    pub fn lift(&mut self, i: usize, x: &S, y: &S) -> Result<S> {
        let level = self.level(i, x)?;
        if !level.contains(y) {
            return Err(Error::Domain(format!(
                "{} is outside J_{i}({}) = [{}, {})",
                y.canonical(),
                x.canonical(),
                level.lower.canonical(),
                level.upper.canonical()
            )));
        }
        let t = self.t(i, x)?;
        let k = S::int(i as i64);
        Ok((k.clone() * x.clone() + t + y.clone()) / (k + S::one()))
    }
}

/// One failed identity or inequality, with the traces involved.
#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub lemma: &'static str,
    pub detail: String,
    pub traces: Vec<Value>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct InvariantReport {
    pub n: usize,
    pub checks: BTreeMap<&'static str, usize>,
    pub violations: Vec<Violation>,
    /// Base points whose checks all ran.
    pub evaluated: Vec<String>,
    /// Base points abandoned on a resource limit, with the error.
    pub unevaluated: Vec<(String, String)>,
}

impl InvariantReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    /// Every grid point was evaluated.
    pub fn is_complete(&self) -> bool {
        self.unevaluated.is_empty()
    }

    pub fn total_checks(&self) -> usize {
        self.checks.values().sum()
    }

    fn record(&mut self, lemma: &'static str, ok: bool, detail: impl FnOnce() -> String, traces: Vec<Value>) {
        *self.checks.entry(lemma).or_insert(0) += 1;
        if !ok {
            self.violations.push(Violation {
                lemma,
                detail: detail(),
                traces,
            });
        }
    }
}

/// Checks the structural identities of `M_n` on every grid point `x` and
/// every fraction `λ ∈ [0, 1)`. For each property whose hypothesis bounds a
/// shift `d` (or a point `y` in an interval), the sample used is `λ` times
/// that bound, so the hypothesis holds by construction:
///
/// * `lem_d`: `M(x + d) = M(x) − d` for `d = λ·M(x)`; `t_i(x) ≥ i·M(x)`.
/// * `lem_leq`: monotonicity of `x + M(x)` on all grid pairs and shifts.
/// * `lem_tii`: `t_i/i ≥ t_{i+1}/(i+1)`.
/// * `lem_tlinear`: `t_i(x + d) = t_i(x) − d·i` for `d = λ·t_i(x)/i`.
/// * `lem_invtlinear`: `t_i(x − d) ≤ t_i(x) + d·i` for `d = λ·x`.
/// * `U_and_M`: `U_i(x) > M(x)`.
/// * `lem_l`, `M_iso`, `U_M_iso`: for `y` at fraction `λ` of `J_i(x)` (for
///   `i = 0` the unbounded interval is cut at `[x − 1, x)`).
///
/// A grid point whose evaluation hits the work budget or deadline is listed
/// in [`InvariantReport::unevaluated`] and contributes no checks.
pub fn check_m_invariants<S: Scalar>(
    rec: &mut MRecursion<S>,
    grid: &[S],
    fractions: &[S],
) -> Result<InvariantReport> {
    check_m_invariants_at(rec, grid, grid, fractions)
}

/// [`check_m_invariants`] for the base points `points` only; pairs for the
/// monotonicity of `x + M(x)` still range over all of `grid`.
pub fn check_m_invariants_at<S: Scalar>(
    rec: &mut MRecursion<S>,
    points: &[S],
    grid: &[S],
    fractions: &[S],
) -> Result<InvariantReport> {
    let n = rec.n();
    let mut report = InvariantReport {
        n,
        ..Default::default()
    };
    for x in points {
        let mut scratch = InvariantReport {
            n,
            ..Default::default()
        };
        match check_point(rec, &mut scratch, x, grid, fractions) {
            Ok(()) => {
                report.evaluated.push(x.canonical());
                for (lemma, count) in scratch.checks {
                    *report.checks.entry(lemma).or_insert(0) += count;
                }
                report.violations.extend(scratch.violations);
            }
            Err(e) if e.is_resource() => report.unevaluated.push((x.canonical(), e.to_string())),
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

fn check_point<S: Scalar>(
    rec: &mut MRecursion<S>,
    report: &mut InvariantReport,
    x: &S,
    grid: &[S],
    fractions: &[S],
) -> Result<()> {
    let n = rec.n();
    let ni = S::int(n as i64);
    {
        let mx = rec.m(x)?;
        for lam in fractions {
            let d = lam.clone() * mx.clone();
            let shifted = rec.m(&(x.clone() + d.clone()))?;
            let expect = mx.clone() - d.clone();
            report.record(
                "lem_d",
                shifted == expect,
                || format!("M({} + {}) = {} ≠ {}", x.canonical(), d.canonical(), shifted.canonical(), expect.canonical()),
                vec![],
            );
        }
        for y in grid.iter().filter(|y| *y >= x) {
            check_leq(rec, report, x, y)?;
        }
        for lam in fractions {
            let y = x.clone() + lam.clone() * S::int(2) * mx.clone();
            check_leq(rec, report, x, &y)?;
        }
        if x.is_negative() {
            return Ok(());
        }
        let trace = rec.trace(x)?;
        let t = trace.t.clone();
        for (i, ti) in t.iter().enumerate() {
            let bound = S::int(i as i64) * mx.clone();
            report.record(
                "lem_d",
                *ti >= bound,
                || format!("t_{i}({}) = {} < {}·M", x.canonical(), ti.canonical(), i),
                vec![trace.to_json()],
            );
        }
        for i in 1..n {
            let lhs = t[i].clone() / S::int(i as i64);
            let rhs = t[i + 1].clone() / S::int(i as i64 + 1);
            report.record(
                "lem_tii",
                lhs >= rhs,
                || format!("t_{i}/{i} < t_{}/{} at {}", i + 1, i + 1, x.canonical()),
                vec![trace.to_json()],
            );
        }
        for i in 1..=n {
            let ki = S::int(i as i64);
            for lam in fractions {
                let d = lam.clone() * t[i].clone() / ki.clone();
                let got = rec.t(i, &(x.clone() + d.clone()))?;
                let expect = t[i].clone() - d.clone() * ki.clone();
                report.record(
                    "lem_tlinear",
                    got == expect,
                    || format!("t_{i}({} + {}) = {} ≠ {}", x.canonical(), d.canonical(), got.canonical(), expect.canonical()),
                    vec![trace.to_json()],
                );
                let d = lam.clone() * x.clone();
                let got = rec.t(i, &(x.clone() - d.clone()))?;
                let bound = t[i].clone() + d.clone() * ki.clone();
                report.record(
                    "lem_invtlinear",
                    got <= bound,
                    || format!("t_{i}({} − {}) = {} > {}", x.canonical(), d.canonical(), got.canonical(), bound.canonical()),
                    vec![trace.to_json()],
                );
            }
        }
        for i in 0..n {
            let level = rec.level(i, x)?;
            report.record(
                "U_and_M",
                level.u > Extended::Finite(mx.clone()),
                || format!("U_{i}({}) = {} ≤ M = {}", x.canonical(), level.u, mx.canonical()),
                vec![trace.to_json()],
            );
            let width = match &level.upper {
                Extended::Finite(up) => up.clone() - level.lower.clone(),
                _ => S::one(),
            };
            for lam in fractions {
                let y = level.lower.clone() + lam.clone() * width.clone();
                let l = rec.lift(i, x, &y)?;
                let my = rec.m(&y)?;
                let got = rec.t(i + 1, &l)?;
                report.record(
                    "lem_l",
                    got == my,
                    || format!("t_{}(l_{i}^{}({})) = {} ≠ M(y) = {}", i + 1, x.canonical(), y.canonical(), got.canonical(), my.canonical()),
                    vec![trace.to_json()],
                );
                if i == n - 1 {
                    let ml = rec.m(&l)?;
                    let expect = my.clone() / ni.clone();
                    report.record(
                        "M_iso",
                        ml == expect,
                        || format!("M(l_{i}^{}({})) = {} ≠ {}", x.canonical(), y.canonical(), ml.canonical(), expect.canonical()),
                        vec![trace.to_json()],
                    );
                } else {
                    let ul = rec.u(i + 1, &l)?;
                    let expect = Extended::Finite(my.clone() / S::int(i as i64 + 1));
                    report.record(
                        "U_M_iso",
                        ul == expect,
                        || format!("U_{}(l_{i}^{}({})) = {} ≠ {}", i + 1, x.canonical(), y.canonical(), ul, expect),
                        vec![trace.to_json()],
                    );
                }
            }
        }
    }
    Ok(())
}

fn check_leq<S: Scalar>(rec: &mut MRecursion<S>, report: &mut InvariantReport, x: &S, y: &S) -> Result<()> {
    let px = rec.m_point(x)?;
    let py = rec.m_point(y)?;
    let equal_expected = *y < px;
    let ok = px <= py && ((px == py) == equal_expected);
    report.record(
        "lem_leq",
        ok,
        || format!("x = {}, y = {}: x+M(x) = {}, y+M(y) = {}", x.canonical(), y.canonical(), px.canonical(), py.canonical()),
        vec![],
    );
    Ok(())
}

/// `{k·step : lo ≤ k·step ≤ hi}`.
pub fn grid<S: Scalar>(lo: &S, hi: &S, step: &S) -> Vec<S> {
    assert!(step.is_positive(), "grid step must be positive");
    let mut out = Vec::new();
    let mut x = lo.clone();
    while x <= *hi {
        out.push(x.clone());
        x = x + step.clone();
    }
    out
}
