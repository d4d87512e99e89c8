//! An order-preserving embedding of the star-term order into the rationals,
//! a monotone grid function transporting the constructor `V`, its
//! multilinear extension, and a generation run over that extension which
//! reproduces the term order.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generator::{generate, GeneratorSystem, MonotoneFn};
use crate::scalar::Scalar;
use crate::star::{enumerate_by_size, StarOrd, VeblenStarTerm};
use crate::ExactRational as Q;

fn third_pow(k: usize) -> Q {
    Q::new(BigInt::one(), BigInt::from(3u8).pow(k as u32))
}

/// Terms `α_0 = 0, α_1, …` in size-then-serialization order with their
/// images `e(α_i)`.
#[derive(Clone, Debug)]
pub struct Embedding {
    n: usize,
    terms: Vec<VeblenStarTerm>,
    images: Vec<Q>,
    index: HashMap<VeblenStarTerm, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmbeddingCheck {
    pub order_preserving: bool,
    pub neighbor_gap: bool,
    pub isolation: bool,
}

impl EmbeddingCheck {
    pub fn all(&self) -> bool {
        self.order_preserving && self.neighbor_gap && self.isolation
    }
}

/// `e(α_0) = 0` and `e(α_{i+1}) = e(α_k) + 3^{−k} + 3^{−i}`, where `α_k` is
/// the largest of `α_0, …, α_i` below `α_{i+1}`.
pub fn build_embedding(n: usize, term_count: usize) -> Result<Embedding> {
    if term_count == 0 {
        return Err(Error::Precondition("term_count must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::Precondition("arity must be positive".into()));
    }
    let terms = enumerate_by_size(n, term_count);
    let mut images = vec![Q::zero()];
    // indices of α_0..α_i sorted by star order
    let mut sorted: Vec<usize> = vec![0];
    for i in 0..term_count - 1 {
        let next = StarOrd(terms[i + 1].clone());
        let pos = sorted.partition_point(|&j| StarOrd(terms[j].clone()) < next);
        let k = sorted[pos - 1];
        images.push(images[k].clone() + third_pow(k) + third_pow(i));
        sorted.insert(pos, i + 1);
    }
    let index = terms.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    let emb = Embedding {
        n,
        terms,
        images,
        index,
    };
    let check = emb.verify();
    if !check.all() {
        return Err(Error::Construction(format!("embedding invariants failed: {check:?}")));
    }
    Ok(emb)
}

impl Embedding {
    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[VeblenStarTerm] {
        &self.terms
    }

    pub fn images(&self) -> &[Q] {
        &self.images
    }

    pub fn image_of(&self, t: &VeblenStarTerm) -> Option<&Q> {
        self.index.get(t).map(|&i| &self.images[i])
    }

    /// Enumeration indices sorted by the term order.
    pub fn star_sorted(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.terms.len()).collect();
        idx.sort_by(|&a, &b| StarOrd(self.terms[a].clone()).cmp(&StarOrd(self.terms[b].clone())));
        idx
    }

    /// Re-checks order preservation, the neighbor-gap inequality for every
    /// prefix `α_0..α_N`, and that no other image lies within `3^{−i}` of
    /// `e(α_i)`.
    pub fn verify(&self) -> EmbeddingCheck {
        let by_star = self.star_sorted();
        let order_preserving = by_star.windows(2).all(|w| self.images[w[0]] < self.images[w[1]]);

        let mut neighbor_gap = true;
        let mut prefix: Vec<usize> = Vec::new();
        for last in 0..self.terms.len() {
            let t = StarOrd(self.terms[last].clone());
            let pos = prefix.partition_point(|&j| StarOrd(self.terms[j].clone()) < t);
            prefix.insert(pos, last);
            let slack = Q::from_integer(BigInt::from(2)) * third_pow(last);
            for w in prefix.windows(2) {
                let (i, j) = (w[0], w[1]);
                let gap = self.images[j].clone() - self.images[i].clone();
                if gap < third_pow(i) + slack.clone() + third_pow(j) {
                    neighbor_gap = false;
                }
            }
        }

        let mut by_value: Vec<usize> = (0..self.terms.len()).collect();
        by_value.sort_by(|&a, &b| self.images[a].cmp(&self.images[b]));
        let isolation = by_value.iter().enumerate().all(|(pos, &i)| {
            let r = third_pow(i);
            let left = pos.checked_sub(1).map(|p| by_value[p]);
            let right = by_value.get(pos + 1).copied();
            left.is_none_or(|l| self.images[i].clone() - self.images[l].clone() >= r)
                && right.is_none_or(|h| self.images[h].clone() - self.images[i].clone() >= r)
        });

        EmbeddingCheck {
            order_preserving,
            neighbor_gap,
            isolation,
        }
    }
}

/// A monotone function tabulated on part of `W^n` for a finite sorted grid
/// `W`, extended to the hull of `W^n`.
///
/// Untabulated grid tuples take the least tabulated value found at a
/// coordinatewise larger tuple, or the overall maximum when there is none;
/// this keeps the completed table monotone and equal to the original on
/// tabulated tuples. Off-grid points interpolate multilinearly between the
/// surrounding grid values.
#[derive(Clone, Debug)]
pub struct GridFunction<S> {
    n: usize,
    grid: Vec<S>,
    position: HashMap<S, usize>,
    table: HashMap<Vec<usize>, S>,
    entries: Vec<(Vec<usize>, S)>,
    max_value: S,
}

impl<S: Scalar> GridFunction<S> {
    /// `entries` maps grid tuples to values and must be monotone.
    pub fn new(n: usize, mut grid: Vec<S>, entries: Vec<(Vec<S>, S)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("arity must be positive".into()));
        }
        grid.sort();
        grid.dedup();
        if grid.is_empty() {
            return Err(Error::Precondition("grid must be nonempty".into()));
        }
        let position: HashMap<S, usize> = grid.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let mut table = HashMap::new();
        let mut indexed = Vec::new();
        for (point, value) in entries {
            if point.len() != n {
                return Err(Error::ArityMismatch {
                    expected: n,
                    found: point.len(),
                });
            }
            let idx = point
                .iter()
                .map(|c| {
                    position
                        .get(c)
                        .copied()
                        .ok_or_else(|| Error::Domain(format!("{} is not a grid point", c.canonical())))
                })
                .collect::<Result<Vec<_>>>()?;
            table.insert(idx.clone(), value.clone());
            indexed.push((idx, value));
        }
        if indexed.is_empty() {
            return Err(Error::Precondition("grid function needs at least one tabulated value".into()));
        }
        for (a, va) in &indexed {
            for (b, vb) in &indexed {
                if a.iter().zip(b).all(|(x, y)| x <= y) && va > vb {
                    return Err(Error::Precondition("tabulated values are not monotone".into()));
                }
            }
        }
        let max_value = indexed.iter().map(|(_, v)| v.clone()).max().expect("nonempty");
        Ok(GridFunction {
            n,
            grid,
            position,
            table,
            entries: indexed,
            max_value,
        })
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> &[S] {
        &self.grid
    }

    pub fn tabulated_count(&self) -> usize {
        self.table.len()
    }

    /// Tabulated value at a grid tuple, if any.
    pub fn tabulated(&self, point: &[S]) -> Option<&S> {
        let idx: Option<Vec<usize>> = point.iter().map(|c| self.position.get(c).copied()).collect();
        self.table.get(&idx?)
    }

    /// Value at a grid index tuple, and whether it came from completion.
    pub fn value_at(&self, idx: &[usize]) -> (S, bool) {
        if let Some(v) = self.table.get(idx) {
            return (v.clone(), false);
        }
        let best = self
            .entries
            .iter()
            .filter(|(q, _)| q.iter().zip(idx).all(|(a, b)| a >= b))
            .map(|(_, v)| v)
            .min();
        (best.unwrap_or(&self.max_value).clone(), true)
    }

    /// Multilinear extension. For each coordinate the surrounding grid
    /// points `p0 ≤ p_i ≤ p1` get weights `(p1 − p_i)/(p1 − p0)` and
    /// `(p_i − p0)/(p1 − p0)`, or `1/2` each when `p_i` is a grid point.
    pub fn extend_eval(&self, p: &[S]) -> Result<S> {
        if p.len() != self.n {
            return Err(Error::ArityMismatch {
                expected: self.n,
                found: p.len(),
            });
        }
        let half = S::ratio(1, 2);
        // per coordinate: (low index, high index, weight of low, weight of high)
        let mut brackets = Vec::with_capacity(self.n);
        for c in p {
            if let Some(&i) = self.position.get(c) {
                brackets.push((i, i, half.clone(), half.clone()));
                continue;
            }
            let hi = self.grid.partition_point(|g| g < c);
            if hi == 0 || hi == self.grid.len() {
                return Err(Error::Domain(format!(
                    "coordinate {} outside the grid hull [{}, {}]",
                    c.canonical(),
                    self.grid[0].canonical(),
                    self.grid[self.grid.len() - 1].canonical()
                )));
            }
            let (p0, p1) = (&self.grid[hi - 1], &self.grid[hi]);
            let span = p1.clone() - p0.clone();
            let w1 = (c.clone() - p0.clone()) / span.clone();
            let w0 = S::one() - w1.clone();
            brackets.push((hi - 1, hi, w0, w1));
        }
        let mut total = S::zero();
        let mut corner = vec![0usize; self.n];
        for mask in 0u64..(1u64 << self.n) {
            let mut weight = S::one();
            for (k, (lo, hi, w0, w1)) in brackets.iter().enumerate() {
                if mask >> k & 1 == 0 {
                    corner[k] = *lo;
                    weight = weight * w0.clone();
                } else {
                    corner[k] = *hi;
                    weight = weight * w1.clone();
                }
            }
            if !weight.is_zero() {
                total = total + weight * self.value_at(&corner).0;
            }
        }
        Ok(total)
    }
}

impl<S: Scalar> MonotoneFn<S> for GridFunction<S> {
    fn arity(&self) -> usize {
        self.n
    }

    fn eval(&self, args: &[S]) -> Option<S> {
        self.extend_eval(args).ok()
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "arity": self.n,
            "grid_points": self.grid.len(),
            "tabulated": self.table.len(),
        })
    }
}

/// `g0(e(t_1), …, e(t_n)) = e(V(t_1, …, t_n))` for every tuple of
/// enumerated terms whose application is enumerated too. The second value
/// counts grid tuples left untabulated.
pub fn star_function_on_grid(emb: &Embedding) -> Result<(GridFunction<Q>, u128)> {
    let n = emb.arity();
    let mut entries = Vec::new();
    for (t, img) in emb.terms().iter().zip(emb.images()) {
        if let VeblenStarTerm::V(args) = t {
            let point = args
                .iter()
                .map(|a| emb.image_of(a).cloned())
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::Construction(format!("argument of {t} is not enumerated")))?;
            entries.push((point, img.clone()));
        }
    }
    let f = GridFunction::new(n, emb.images().to_vec(), entries)?;
    let total = (emb.terms().len() as u128).pow(n as u32);
    let missing = total - f.tabulated_count() as u128;
    Ok((f, missing))
}

#[derive(Clone, Debug, Serialize)]
pub struct DemoReport {
    pub terms: usize,
    pub generated: usize,
    pub subset: bool,
    pub order_isomorphic: bool,
    pub grid_agreement: bool,
    pub first_above_zero: Option<String>,
    pub untabulated_tuples: String,
    pub missing: Vec<String>,
}

/// Generates `F({g}, {0})` for the extended grid function `g` and compares
/// the result with the enumerated term fragment. `missing` lists
/// enumerated terms of size at most `budget` whose image was not reached.
pub fn thm_cont_demo(n: usize, term_count: usize, budget: usize) -> Result<DemoReport> {
    if n < 3 {
        return Err(Error::Precondition(format!("demo needs n ≥ 3, got {n}")));
    }
    let emb = build_embedding(n, term_count)?;
    let (g, untabulated) = star_function_on_grid(&emb)?;
    let grid_agreement = g
        .entries
        .iter()
        .all(|(idx, v)| {
            let point: Vec<Q> = idx.iter().map(|&i| g.grid[i].clone()).collect();
            g.extend_eval(&point).as_ref() == Ok(v)
        });
    let sys = GeneratorSystem::new(vec![g], vec![Q::zero()])?;
    let frag = generate(&sys, budget, usize::MAX);

    let image_index: HashMap<&Q, usize> = emb.images().iter().enumerate().map(|(i, v)| (v, i)).collect();
    let subset = frag.values.iter().all(|v| image_index.contains_key(v));

    // reached terms in value order must be the reached terms in star order
    let reached: Vec<usize> = frag.values.iter().filter_map(|v| image_index.get(v).copied()).collect();
    let mut star_sorted = reached.clone();
    star_sorted.sort_by(|&a, &b| StarOrd(emb.terms()[a].clone()).cmp(&StarOrd(emb.terms()[b].clone())));
    let order_isomorphic = subset && reached == star_sorted;

    let missing = emb
        .terms()
        .iter()
        .zip(emb.images())
        .filter(|(t, img)| t.size() <= budget && !frag.contains(img))
        .map(|(t, _)| t.to_string())
        .collect();
    let first_above_zero = frag.successor_of(&Q::zero()).and_then(|v| image_index.get(v)).map(|&i| emb.terms()[i].to_string());

    Ok(DemoReport {
        terms: term_count,
        generated: frag.values.len(),
        subset,
        order_isomorphic,
        grid_agreement,
        first_above_zero,
        untabulated_tuples: untabulated.to_string(),
        missing,
    })
}
