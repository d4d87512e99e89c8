//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria that cannot be met at desk scale are listed in `UNATTAINABLE`
//! with the reason; they still run in full and print FAIL. The test fails
//! if any other criterion fails, or if a listed one unexpectedly passes
//! (so the list cannot go stale).

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use fusible_core::closure::build_closure;
use fusible_core::embedding::{build_embedding, star_function_on_grid, thm_cont_demo};
use fusible_core::generator::{denominator_profile, eval_term, generate, Fragment};
use fusible_core::mrec::{check_m_invariants_at, grid, InvariantReport};
use fusible_core::numbers::Extended;
use fusible_core::ordinal::{compare, enumerate_terms, nat_prod, nat_sum, OrdinalTerm};
use fusible_core::star::{star_compare, star_enumerate, successor_law_violations, VeblenStarTerm};
use fusible_core::{ExactRational as Q, GeneratorSystem, LinearFunction, MRecursion, Scalar, SuccessorEngine};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const SEED: u64 = 0x5eed_f05e;

// time limits, one per criterion
const LIMIT_ANCHORS: Duration = Duration::from_secs(1);
const LIMIT_LEMMAS: Duration = Duration::from_secs(120);
const LIMIT_CLOSURE_ANCHOR: Duration = Duration::from_secs(30);
const LIMIT_SUCC_ORACLE: Duration = Duration::from_secs(120);
const LIMIT_ROUND_TRIPS: Duration = Duration::from_secs(120);
const LIMIT_ORDER_AXIOMS: Duration = Duration::from_secs(60);
const LIMIT_SUCCESSOR_LAW: Duration = Duration::from_secs(60);
const LIMIT_EMBEDDING: Duration = Duration::from_secs(30);
const LIMIT_CONT_DEMO: Duration = Duration::from_secs(120);

// a single item (grid point or query) gets at most this long
const ITEM_CAP: Duration = Duration::from_secs(2);
// room kept for bookkeeping inside a time-limited criterion
const MARGIN: Duration = Duration::from_secs(8);

// generation budgets for the successor oracle: B and 2B
const ORACLE_BUDGET_F2: usize = 14;
const ORACLE_BUDGET_F3: usize = 14;
// fragments the round-trip samples are drawn from
const SAMPLE_BUDGET_F2: usize = 14;
const SAMPLE_BUDGET_F3: usize = 10;

const UNATTAINABLE: &[(u8, &str)] = &[
    (
        2,
        "the checks at x >= 3/16 for n = 3 and x >= 0 for n = 4 need M at shifted points close to 1, \
         where the memo holds tens of thousands of rationals with thousands of digits; \
         those points stay unfinished even with 20 s each",
    ),
    (
        4,
        "F_3 successors above about 0.78 need more than 10^5 recursive calls; r = 28/39 needs a witness \
         with more than 14 applications, and the doubled F_3 fragment at budget 32 alone takes over 100 s",
    ),
    (
        5,
        "round trips through F_3 elements above about 0.8 do not finish in time; \
         the default work budget takes minutes to exhaust there",
    ),
];

fn q(n: i64, d: i64) -> Q {
    Q::ratio(n, d)
}

fn fin(v: &Q) -> Extended<Q> {
    Extended::Finite(v.clone())
}

fn canon(v: &Q) -> String {
    v.canonical()
}

struct Outcome {
    id: u8,
    title: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    /// Deterministic content only: answers, never timings or call counts.
    artifact: Value,
}

/// How a time-limited criterion runs: against the clock, or replaying
/// exactly the items a previous run completed.
#[derive(Clone, Copy)]
enum Mode<'a> {
    Timed,
    Replay(&'a Value),
}

fn timed(id: u8, title: &'static str, limit: Duration, body: impl FnOnce() -> (bool, String, Value)) -> Outcome {
    let start = Instant::now();
    let (ok, detail, artifact) = body();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let detail = if in_time {
        detail
    } else {
        format!("{detail}; took {elapsed:.1?}, limit {limit:?}")
    };
    Outcome {
        id,
        title,
        pass: ok && in_time,
        detail,
        elapsed,
        artifact,
    }
}

fn item_deadline(overall: Instant) -> Instant {
    (Instant::now() + ITEM_CAP).min(overall)
}

fn replayed<'a>(mode: Mode<'a>, key: &str) -> Option<BTreeSet<String>> {
    match mode {
        Mode::Timed => None,
        Mode::Replay(v) => Some(
            v[key]
                .as_array()
                .expect("replay list")
                .iter()
                .map(|s| s.as_str().expect("string").to_string())
                .collect(),
        ),
    }
}

// ---------------------------------------------------------------- 1

/// Straight transcription of the recursion, no memo.
fn naive_m(n: usize, x: &Q) -> Q {
    if *x < Q::zero() {
        return -x.clone();
    }
    let mut t = Q::one();
    for _ in 0..n {
        t = naive_m(n, &(x.clone() - t));
    }
    t / Q::from_integer(BigInt::from(n))
}

fn anchors() -> Outcome {
    timed(1, "M-value anchors", LIMIT_ANCHORS, || {
        let cases = [(2, q(0, 1), q(1, 2)), (3, q(0, 1), q(1, 3)), (2, q(1, 2), q(1, 4)), (2, q(1, 1), q(1, 8))];
        let mut ok = true;
        let mut rows = Vec::new();
        for (n, x, want) in &cases {
            let engine = MRecursion::new(*n).unwrap().m(x).unwrap();
            let oracle = naive_m(*n, x);
            ok &= engine == *want && oracle == *want;
            rows.push(json!({"n": n, "x": canon(x), "engine": canon(&engine), "oracle": canon(&oracle)}));
        }
        let m21 = MRecursion::new(2).unwrap().m(&q(1, 1)).unwrap();
        let point = Q::one() + m21;
        ok &= point == q(9, 8);
        (ok, format!("4 anchors, 1 + M_2(1) = {}", canon(&point)), json!({"anchors": rows, "one_plus_m2_1": canon(&point)}))
    })
}

// ---------------------------------------------------------------- 2

fn lemma_grid(n: usize) -> Vec<Q> {
    let hi = if n == 2 { q(3, 2) } else { q(1, 1) };
    grid(&q(-1, 1), &hi, &q(1, 16))
}

fn merge(into: &mut InvariantReport, part: InvariantReport) {
    for (lemma, c) in part.checks {
        *into.checks.entry(lemma).or_insert(0) += c;
    }
    into.violations.extend(part.violations);
    into.evaluated.extend(part.evaluated);
    into.unevaluated.extend(part.unevaluated);
}

fn lemma_suite(mode: Mode) -> Outcome {
    timed(2, "lemma suite for M_n, n in {2,3,4}", LIMIT_LEMMAS, || {
        let start = Instant::now();
        let fractions = [q(0, 1), q(1, 4), q(1, 2), q(3, 4)];
        let mut ok = true;
        let mut details = Vec::new();
        let mut art = serde_json::Map::new();
        for (k, n) in [2usize, 3, 4].into_iter().enumerate() {
            // the remaining time is split evenly over the remaining n
            let share = LIMIT_LEMMAS.saturating_sub(MARGIN).saturating_sub(start.elapsed()) / (3 - k as u32);
            let overall = Instant::now() + share;
            let full = lemma_grid(n);
            let mut rec = MRecursion::new(n).unwrap();
            let prior = match mode {
                Mode::Timed => None,
                Mode::Replay(v) => Some(&v[n.to_string()]),
            };
            let (usable, points): (Vec<Q>, Vec<Q>) = match prior {
                None => {
                    let mut usable = Vec::new();
                    for x in &full {
                        rec.set_deadline(Some(item_deadline(overall)));
                        if rec.m(x).is_ok() {
                            usable.push(x.clone());
                        }
                    }
                    (usable.clone(), usable)
                }
                Some(v) => {
                    let parse = |key: &str| -> Vec<Q> {
                        v[key].as_array().unwrap().iter().map(|s| Q::parse_canonical(s.as_str().unwrap()).unwrap()).collect()
                    };
                    (parse("screened_grid"), parse("evaluated"))
                }
            };
            let mut report = InvariantReport {
                n,
                ..Default::default()
            };
            for x in &points {
                rec.set_deadline(match mode {
                    Mode::Timed => Some(item_deadline(overall)),
                    Mode::Replay(_) => None,
                });
                let part = check_m_invariants_at(&mut rec, std::slice::from_ref(x), &usable, &fractions).unwrap();
                merge(&mut report, part);
            }
            let skipped = full.len() - usable.len() + report.unevaluated.len();
            ok &= skipped == 0 && report.is_clean();
            details.push(format!(
                "n={n}: {} checks at {}/{} points, {} violations",
                report.total_checks(),
                report.evaluated.len(),
                full.len(),
                report.violations.len()
            ));
            let unreached: Vec<String> = full
                .iter()
                .map(canon)
                .filter(|x| !report.evaluated.contains(x))
                .collect();
            if !unreached.is_empty() {
                details.push(format!("n={n} unevaluated from {}", unreached[0]));
            }
            art.insert(
                n.to_string(),
                json!({
                    "screened_grid": usable.iter().map(canon).collect::<Vec<_>>(),
                    "evaluated": report.evaluated,
                    "checks": report.checks,
                    "violations": report.violations.iter().map(|v| format!("{}: {}", v.lemma, v.detail)).collect::<Vec<_>>(),
                }),
            );
        }
        (ok, details.join("; "), Value::Object(art))
    })
}

// ---------------------------------------------------------------- 3

fn closure_anchor() -> Outcome {
    timed(3, "F_3 closure anchor at 1/2", LIMIT_CLOSURE_ANCHOR, || {
        let sys = GeneratorSystem::fusible(3);
        let mut ok = true;
        let mut notes = Vec::new();
        let frag = generate(&sys, 8, usize::MAX);
        let mut iterates = Vec::new();
        for k in 1..=6u32 {
            let a = (Q::one() - Q::one() / Q::from_integer(BigInt::from(3).pow(k))) / q(2, 1);
            let found = frag.values.binary_search(&a).ok().map(|i| frag.witnesses[i].clone());
            let good = found
                .as_ref()
                .is_some_and(|w| eval_term(&sys, w).ok().as_ref() == Some(&a) && w.applications() <= k as usize);
            if !good {
                notes.push(format!("a_{k} = {} not witnessed", canon(&a)));
            }
            ok &= good;
            iterates.push(json!({"k": k, "value": canon(&a), "witness": found.map(|w| w.to_sexpr(&sys))}));
        }
        let half = q(1, 2);
        // fragments are nested, so absence at the largest budget covers the smaller ones
        let big = generate(&sys, 20, usize::MAX);
        let absent = !frag.contains(&half) && !big.contains(&half);
        let powers_of_three = denominator_profile(&big.values).keys().all(|p| *p == BigInt::from(3));
        let half_profile = denominator_profile(&[half.clone()]);
        let not_power = half_profile.keys().any(|p| *p != BigInt::from(3));
        let mut engine = SuccessorEngine::new(build_closure(LinearFunction::g_n(3), vec![Q::zero()]).unwrap());
        let member = engine.is_in_closure(&half);
        let member_ok = matches!(member, Ok(true));
        ok &= absent && powers_of_three && not_power && member_ok;
        notes.push(format!(
            "a_1..a_6 witnessed; 1/2 absent up to budget 20 ({} values): {absent}; fragment denominators powers of 3: {powers_of_three}; \
             1/2 in closure: {member:?}",
            big.values.len()
        ));
        (
            ok,
            notes.join("; "),
            json!({
                "iterates": iterates,
                "absent_up_to_budget": 20,
                "absent": absent,
                "half_profile": half_profile.iter().map(|(p, e)| format!("{p}^{e}")).collect::<Vec<_>>(),
                "in_closure": member_ok,
            }),
        )
    })
}

// ---------------------------------------------------------------- 4

fn sample_queries(rng: &mut ChaCha8Rng, count: usize) -> Vec<Q> {
    // r = k/d with d ≤ 64 and -1 ≤ r ≤ 3/2
    (0..count)
        .map(|_| {
            let d: i64 = rng.gen_range(1..=64);
            let k: i64 = rng.gen_range(-d..=(3 * d) / 2);
            q(k, d)
        })
        .collect()
}

fn engine_for(n: usize, deadline: Option<Instant>) -> SuccessorEngine {
    let mut e = SuccessorEngine::new(build_closure(LinearFunction::g_n(n), vec![Q::zero()]).unwrap());
    e.set_deadline(deadline);
    e
}

fn succ_oracle(mode: Mode) -> Outcome {
    timed(4, "succ equals generated successor", LIMIT_SUCC_ORACLE, || {
        let start = Instant::now();
        let overall = start + LIMIT_SUCC_ORACLE.saturating_sub(MARGIN);
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 4);
        let mut ok = true;
        let mut details = Vec::new();
        let mut art = serde_json::Map::new();
        for (n, b) in [(2usize, ORACLE_BUDGET_F2), (3, ORACLE_BUDGET_F3)] {
            let mut rs = sample_queries(&mut rng, 50);
            rs.sort();
            let sys = GeneratorSystem::fusible(n);
            let small: Fragment<Q> = generate(&sys, b, usize::MAX);
            let double = generate(&sys, 2 * b, usize::MAX);
            let only = replayed(mode, &format!("f{n}_completed"));
            let mut engine = engine_for(n, None);
            let mut rows = Vec::new();
            let mut completed = Vec::new();
            let mut unevaluated = Vec::new();
            let mut mismatches = Vec::new();
            for r in &rs {
                let key = canon(r);
                if only.as_ref().is_some_and(|set| !set.contains(&key)) {
                    continue;
                }
                if only.is_none() {
                    engine.set_deadline(Some(item_deadline(overall)));
                }
                let got = match engine.succ(&fin(r)) {
                    Ok(v) => v,
                    Err(e) if e.is_resource() => {
                        unevaluated.push(key);
                        continue;
                    }
                    Err(e) => panic!("succ({key}) failed: {e}"),
                };
                let o1 = small.successor_of(r).cloned();
                let o2 = double.successor_of(r).cloned();
                let agree = o1.is_some() && o1 == o2 && got.finite() == o1.as_ref();
                if !agree {
                    mismatches.push(key.clone());
                }
                completed.push(key.clone());
                rows.push(json!({
                    "r": key,
                    "succ": got.canonical(),
                    "oracle": o1.as_ref().map(canon),
                    "oracle_doubled": o2.as_ref().map(canon),
                }));
            }
            ok &= unevaluated.is_empty() && mismatches.is_empty();
            details.push(format!(
                "F_{n}: {} of {} agree (budgets {b}/{}), {} unevaluated{}{}",
                completed.len() - mismatches.len(),
                rs.len(),
                2 * b,
                unevaluated.len(),
                unevaluated.first().map(|r| format!(" from r={r}")).unwrap_or_default(),
                if mismatches.is_empty() { String::new() } else { format!(", mismatches at {mismatches:?}") },
            ));
            art.insert(format!("f{n}"), Value::Array(rows));
            art.insert(format!("f{n}_completed"), json!(completed));
        }
        (ok, details.join("; "), Value::Object(art))
    })
}

// ---------------------------------------------------------------- 5

fn round_trips(mode: Mode) -> Outcome {
    timed(5, "pred/succ/weak_pred round trips", LIMIT_ROUND_TRIPS, || {
        let start = Instant::now();
        let overall = start + LIMIT_ROUND_TRIPS.saturating_sub(MARGIN);
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
        let mut ok = true;
        let mut details = Vec::new();
        let mut art = serde_json::Map::new();
        for (n, b) in [(2usize, SAMPLE_BUDGET_F2), (3, SAMPLE_BUDGET_F3)] {
            let frag = generate(&GeneratorSystem::fusible(n), b, usize::MAX);
            let mut zs: Vec<Q> = frag.values.choose_multiple(&mut rng, 30).cloned().collect();
            zs.sort();
            let mut rs = sample_queries(&mut rng, 30);
            rs.sort();
            let only = replayed(mode, &format!("f{n}_completed"));
            // the default work budget applies to every call
            let mut engine = engine_for(n, None);
            let mut rows = Vec::new();
            let mut completed = Vec::new();
            let mut unevaluated = Vec::new();
            let mut broken = Vec::new();
            let items = zs.iter().map(|z| ("z", z)).chain(rs.iter().map(|r| ("r", r)));
            for (kind, v) in items {
                let key = format!("{kind}={}", canon(v));
                if only.as_ref().is_some_and(|set| !set.contains(&key)) {
                    continue;
                }
                if only.is_none() {
                    engine.set_deadline(Some(item_deadline(overall)));
                }
                let result = if kind == "z" {
                    engine.succ(&fin(v)).and_then(|s| {
                        let sf = s.finite().cloned().expect("successor of a finite element is finite");
                        let p = engine.pred(&sf)?;
                        Ok((p == fin(v), json!({"z": canon(v), "succ": canon(&sf), "pred": p.canonical()})))
                    })
                } else {
                    engine.weak_pred(v).and_then(|w| {
                        let s = engine.succ(&w)?;
                        Ok((w <= fin(v) && fin(v) < s, json!({"r": canon(v), "weak_pred": w.canonical(), "succ": s.canonical()})))
                    })
                };
                match result {
                    Ok((good, row)) => {
                        if !good {
                            broken.push(key.clone());
                        }
                        completed.push(key);
                        rows.push(row);
                    }
                    Err(e) if e.is_resource() => unevaluated.push(key),
                    Err(e) => panic!("{key}: {e}"),
                }
            }
            ok &= unevaluated.is_empty() && broken.is_empty();
            details.push(format!(
                "F_{n}: {} of 60 hold, {} unevaluated{}{}",
                completed.len() - broken.len(),
                unevaluated.len(),
                unevaluated.first().map(|k| format!(" from {k}")).unwrap_or_default(),
                if broken.is_empty() { String::new() } else { format!(", broken at {broken:?}") },
            ));
            art.insert(format!("f{n}"), Value::Array(rows));
            art.insert(format!("f{n}_completed"), json!(completed));
        }
        (ok, details.join("; "), Value::Object(art))
    })
}

// ---------------------------------------------------------------- 6

fn random_ordinal(rng: &mut ChaCha8Rng, depth: u32) -> OrdinalTerm {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.5) { OrdinalTerm::zero() } else { OrdinalTerm::nat(rng.gen_range(1..4)) };
    }
    let mut out = OrdinalTerm::zero();
    for _ in 0..rng.gen_range(1..=2) {
        let arity = rng.gen_range(2..=3);
        let args = (0..arity).map(|_| random_ordinal(rng, depth - 1)).collect();
        out = out.add(&OrdinalTerm::phi(args));
    }
    out
}

fn random_star(rng: &mut ChaCha8Rng, n: usize, depth: u32) -> VeblenStarTerm {
    if depth == 0 || rng.gen_bool(0.3) {
        return VeblenStarTerm::Zero;
    }
    VeblenStarTerm::app((0..n).map(|_| random_star(rng, n, depth - 1)).collect())
}

/// Antisymmetry, reflexive equality and transitivity of `cmp` on `items`,
/// over all triples when `exhaustive`, else over `pairs` random pairs and triples.
fn order_violations<T: PartialEq>(
    items: &[T],
    cmp: &dyn Fn(&T, &T) -> Ordering,
    triples: &mut dyn Iterator<Item = (usize, usize, usize)>,
) -> usize {
    let mut bad = 0;
    for a in items {
        bad += usize::from(cmp(a, a) != Ordering::Equal);
    }
    for (i, j, k) in triples {
        let (a, b, c) = (&items[i], &items[j], &items[k]);
        let ab = cmp(a, b);
        bad += usize::from(ab != cmp(b, a).reverse());
        bad += usize::from((ab == Ordering::Equal) != (a == b));
        let bc = cmp(b, c);
        if ab == bc && ab != Ordering::Equal {
            bad += usize::from(cmp(a, c) != ab);
        }
    }
    bad
}

fn all_triples(len: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..len).flat_map(move |i| (0..len).flat_map(move |j| (0..len).map(move |k| (i, j, k))))
}

fn order_axioms() -> Outcome {
    timed(6, "ordinal order axioms and natural operations", LIMIT_ORDER_AXIOMS, || {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
        let ord_cmp = |a: &OrdinalTerm, b: &OrdinalTerm| compare(a, b);
        let star_cmp = |a: &VeblenStarTerm, b: &VeblenStarTerm| star_compare(a, b).expect("same arity");

        let small_ord = enumerate_terms(3, 3);
        let small_star = star_enumerate(3, 3);
        let mut bad_small = order_violations(&small_ord, &ord_cmp, &mut all_triples(small_ord.len()));
        bad_small += order_violations(&small_star, &star_cmp, &mut all_triples(small_star.len()));
        // enumeration claims ascending order
        bad_small += small_ord.windows(2).filter(|w| compare(&w[0], &w[1]) != Ordering::Less).count();
        bad_small += small_star.windows(2).filter(|w| star_cmp(&w[0], &w[1]) != Ordering::Less).count();

        let big_ord: Vec<OrdinalTerm> = (0..3000).map(|_| random_ordinal(&mut rng, 3)).collect();
        let big_star: Vec<VeblenStarTerm> = (0..3000).map(|_| random_star(&mut rng, 3, 4)).collect();
        let ord_idx: Vec<(usize, usize, usize)> = (0..1000).map(|i| (3 * i, 3 * i + 1, 3 * i + 2)).collect();
        let mut bad_random = order_violations(&big_ord, &ord_cmp, &mut ord_idx.iter().copied());
        bad_random += order_violations(&big_star, &star_cmp, &mut ord_idx.iter().copied());
        let normal = big_ord.iter().all(OrdinalTerm::is_normal);

        let mut bad_laws = 0;
        for _ in 0..500 {
            let (a, b, c) = (random_ordinal(&mut rng, 2), random_ordinal(&mut rng, 2), random_ordinal(&mut rng, 2));
            bad_laws += usize::from(nat_sum(&a, &b) != nat_sum(&b, &a));
            bad_laws += usize::from(nat_prod(&a, &b) != nat_prod(&b, &a));
            bad_laws += usize::from(nat_sum(&nat_sum(&a, &b), &c) != nat_sum(&a, &nat_sum(&b, &c)));
            bad_laws += usize::from(nat_prod(&nat_prod(&a, &b), &c) != nat_prod(&a, &nat_prod(&b, &c)));
            bad_laws += usize::from(nat_prod(&a, &nat_sum(&b, &c)) != nat_sum(&nat_prod(&a, &b), &nat_prod(&a, &c)));
        }

        let w = OrdinalTerm::omega();
        let one = OrdinalTerm::one();
        let w1 = w.add(&one);
        let facts = [
            nat_sum(&w, &one) == w1,
            nat_sum(&w1, &w) == w.add(&w).add(&one),
            nat_prod(&w, &w) == OrdinalTerm::omega_pow(OrdinalTerm::nat(2)),
        ];
        let ok = bad_small == 0 && bad_random == 0 && bad_laws == 0 && normal && facts.iter().all(|f| *f);
        (
            ok,
            format!(
                "exhaustive {} ordinals and {} star terms: {bad_small} violations; random: {bad_random}; laws: {bad_laws}; \
                 named identities {facts:?}",
                small_ord.len(),
                small_star.len()
            ),
            json!({
                "exhaustive_ordinals": small_ord.len(),
                "exhaustive_star": small_star.len(),
                "violations": [bad_small, bad_random, bad_laws],
                "identities": facts,
                "random_sample_head": big_ord.iter().take(5).map(|t| t.to_string()).collect::<Vec<_>>(),
            }),
        )
    })
}

// ---------------------------------------------------------------- 7

fn successor_law() -> Outcome {
    timed(7, "star successor law", LIMIT_SUCCESSOR_LAW, || {
        let bad = successor_law_violations(3, 3, 5);
        let shown: Vec<String> = bad.iter().take(5).map(|(t, u)| format!("{t} < {u}")).collect();
        (
            bad.is_empty(),
            format!("{} counterexamples among terms of size ≤ 5", bad.len()),
            json!({"counterexamples": shown, "count": bad.len()}),
        )
    })
}

// ---------------------------------------------------------------- 8

fn embedding() -> Outcome {
    timed(8, "embedding on 200 terms", LIMIT_EMBEDDING, || {
        let emb = build_embedding(3, 200).unwrap();
        let check = emb.verify();
        (
            check.all(),
            format!("{check:?}"),
            json!({"check": check, "images_tail": emb.images().iter().rev().take(3).map(canon).collect::<Vec<_>>()}),
        )
    })
}

// ---------------------------------------------------------------- 9

fn random_in(rng: &mut ChaCha8Rng, lo: &Q, hi: &Q) -> Q {
    let k: i64 = rng.gen_range(0..=1024);
    lo.clone() + (hi.clone() - lo.clone()) * q(k, 1024)
}

fn cont_demo() -> Outcome {
    timed(9, "continuous extension demo", LIMIT_CONT_DEMO, || {
        let report = thm_cont_demo(3, 100, 5).unwrap();
        let emb = build_embedding(3, 100).unwrap();
        let (g, _) = star_function_on_grid(&emb).unwrap();
        let lo = g.grid().first().unwrap().clone();
        let hi = g.grid().last().unwrap().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 9);
        let mut nonmonotone = 0;
        for _ in 0..1000 {
            let p: Vec<Q> = (0..3).map(|_| random_in(&mut rng, &lo, &hi)).collect();
            let r: Vec<Q> = p.iter().map(|x| random_in(&mut rng, x, &hi)).collect();
            let (a, b) = (g.extend_eval(&p).unwrap(), g.extend_eval(&r).unwrap());
            nonmonotone += usize::from(a > b);
        }
        let ok = report.subset && report.order_isomorphic && report.grid_agreement && nonmonotone == 0;
        (
            ok,
            format!(
                "generated {}, subset {}, order-isomorphic {}, grid agreement {}, monotonicity failures {nonmonotone}/1000",
                report.generated, report.subset, report.order_isomorphic, report.grid_agreement
            ),
            json!({"report": report, "monotonicity_failures": nonmonotone}),
        )
    })
}

// ---------------------------------------------------------------- 10

fn run_suite(prior: Option<&[Outcome]>) -> Vec<Outcome> {
    let mode = |id: u8| match prior {
        None => Mode::Timed,
        Some(p) => Mode::Replay(&p.iter().find(|o| o.id == id).expect("prior outcome").artifact),
    };
    vec![
        anchors(),
        lemma_suite(mode(2)),
        closure_anchor(),
        succ_oracle(mode(4)),
        round_trips(mode(5)),
        order_axioms(),
        successor_law(),
        embedding(),
        cont_demo(),
    ]
}

fn artifacts(outcomes: &[Outcome]) -> String {
    let all: serde_json::Map<String, Value> = outcomes.iter().map(|o| (o.id.to_string(), o.artifact.clone())).collect();
    serde_json::to_string_pretty(&Value::Object(all)).unwrap()
}

fn determinism(first: &[Outcome]) -> Outcome {
    let start = Instant::now();
    let second = run_suite(Some(first));
    let (a, b) = (artifacts(first), artifacts(&second));
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("run1.json"), &a).unwrap();
    std::fs::write(dir.join("run2.json"), &b).unwrap();
    let differing: Vec<u8> = first
        .iter()
        .zip(&second)
        .filter(|(x, y)| serde_json::to_string(&x.artifact).unwrap() != serde_json::to_string(&y.artifact).unwrap())
        .map(|(x, _)| x.id)
        .collect();
    Outcome {
        id: 10,
        title: "byte-identical artifacts across runs",
        pass: a == b,
        detail: format!("{} bytes, differing criteria {differing:?}; written to {}", a.len(), dir.display()),
        elapsed: start.elapsed(),
        artifact: Value::Null,
    }
}

fn main() {
    // the successor recursion nests deeply; give it room
    let outcomes = std::thread::Builder::new()
        .stack_size(512 << 20)
        .spawn(|| {
            let mut outcomes = run_suite(None);
            let det = determinism(&outcomes);
            outcomes.push(det);
            outcomes
        })
        .unwrap()
        .join()
        .unwrap();

    let mut unexpected = Vec::new();
    for o in &outcomes {
        let known = UNATTAINABLE.iter().find(|(id, _)| *id == o.id);
        println!(
            "criterion {:>2} {} [{:.2?}] {}: {}",
            o.id,
            if o.pass { "PASS" } else { "FAIL" },
            o.elapsed,
            o.title,
            o.detail
        );
        if let (false, Some((_, why))) = (o.pass, known) {
            println!("             known unattainable: {why}");
        }
        if o.pass == known.is_some() {
            unexpected.push(o.id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("criteria with unexpected outcomes: {unexpected:?}");
        std::process::exit(1);
    }
}
