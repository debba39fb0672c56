//! Set functions, k-set functions and their exhaustive property checkers.
//!
//! Checkers sweep every quantified argument tuple. They take a [`Budget`] and
//! fail with [`Error::BudgetExceeded`] before doing any work when the sweep
//! would exceed it.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{ExtRational, Rational};
use crate::subset::{VertexSet, MAX_VERTICES};
use crate::vcsp::WeightedRelation;

/// Upper bound on the number of evaluations an exhaustive sweep may perform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub limit: u64,
}

impl Budget {
    pub const DEFAULT_LIMIT: u64 = 10_000_000;

    pub fn new(limit: u64) -> Self {
        Budget { limit }
    }

    pub fn check(&self, needed: u128) -> Result<()> {
        if needed > self.limit as u128 {
            Err(Error::BudgetExceeded { needed, limit: self.limit })
        } else {
            Ok(())
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(Budget::DEFAULT_LIMIT)
    }
}

/// `base^exp`, saturating.
pub fn sweep_size(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

/// Outcome of an exhaustive check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Checked<W> {
    Holds,
    Violated(W),
}

impl<W> Checked<W> {
    pub fn holds(&self) -> bool {
        matches!(self, Checked::Holds)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Checked::Holds => None,
            Checked::Violated(w) => Some(w),
        }
    }
}

/// Calls `visit` with every labelling of `n` positions over `0..base`, in
/// row-major order (position 0 most significant). Stops when `visit` returns `false`.
pub fn for_each_labelling<F>(n: usize, base: usize, mut visit: F)
where
    F: FnMut(&[usize]) -> bool,
{
    let mut labels = vec![0usize; n];
    loop {
        if !visit(&labels) {
            return;
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            labels[pos] += 1;
            if labels[pos] < base {
                break;
            }
            labels[pos] = 0;
        }
    }
}

/// Restriction of a base function to an embedded ground set, plus per-vertex
/// charges and an optional size cap above which the value is `∞`.
#[derive(Clone, Debug)]
pub struct Shifted {
    base: Arc<SetFunction>,
    embed: Vec<usize>,
    charges: Vec<ExtRational>,
    size_cap: Option<usize>,
}

/// A set function on `{0, …, n-1}`.
#[derive(Clone, Debug)]
pub enum SetFunction {
    /// Dense table indexed by bitmask.
    Table { n: usize, values: Arc<Vec<ExtRational>> },
    /// `f(X) = Σ_{S ⊆ X} c_S` over nonempty `S` with `c_S ≥ 0`.
    Generator { n: usize, terms: Vec<(VertexSet, ExtRational)> },
    Shifted(Shifted),
}

/// Largest ground set a dense table may have.
pub const MAX_TABLE_VERTICES: usize = 24;

impl SetFunction {
    pub fn zero(n: usize) -> Self {
        SetFunction::Generator { n, terms: Vec::new() }
    }

    pub fn table(n: usize, values: Vec<ExtRational>) -> Result<Self> {
        if n > MAX_TABLE_VERTICES {
            return Err(Error::InvalidInput(format!("table on {n} vertices is too large")));
        }
        if values.len() != 1usize << n {
            return Err(Error::InvalidInput(format!(
                "table on {n} vertices needs {} values, got {}",
                1usize << n,
                values.len()
            )));
        }
        Ok(SetFunction::Table { n, values: Arc::new(values) })
    }

    /// Materialises `value` on every subset.
    pub fn table_from_fn<F>(n: usize, mut value: F) -> Result<Self>
    where
        F: FnMut(VertexSet) -> Result<ExtRational>,
    {
        if n > MAX_TABLE_VERTICES {
            return Err(Error::InvalidInput(format!("table on {n} vertices is too large")));
        }
        let values = (0..1u64 << n).map(|m| value(VertexSet(m))).collect::<Result<Vec<_>>>()?;
        SetFunction::table(n, values)
    }

    pub fn generator(n: usize, terms: Vec<(VertexSet, ExtRational)>) -> Result<Self> {
        if n > MAX_VERTICES {
            return Err(Error::InvalidInput(format!("{n} vertices exceed the limit")));
        }
        for (s, c) in &terms {
            if s.is_empty() {
                return Err(Error::InvalidInput("generator term on the empty set".into()));
            }
            if !s.is_subset(VertexSet::full(n)) {
                return Err(Error::VertexOutOfRange { vertex: s.span() - 1, n });
            }
            if c.is_negative() {
                return Err(Error::InvalidInput(format!("negative generator coefficient {c}")));
            }
        }
        Ok(SetFunction::Generator { n, terms })
    }

    pub fn n(&self) -> usize {
        match self {
            SetFunction::Table { n, .. } | SetFunction::Generator { n, .. } => *n,
            SetFunction::Shifted(s) => s.embed.len(),
        }
    }

    pub fn is_table(&self) -> bool {
        matches!(self, SetFunction::Table { .. })
    }

    /// Table and shifted-table backings are not superadditive by construction.
    pub fn is_generator_backed(&self) -> bool {
        match self {
            SetFunction::Generator { .. } => true,
            SetFunction::Table { .. } => false,
            SetFunction::Shifted(s) => s.base.is_generator_backed(),
        }
    }

    pub fn eval(&self, x: VertexSet) -> ExtRational {
        match self {
            SetFunction::Table { values, .. } => values[x.0 as usize].clone(),
            SetFunction::Generator { terms, .. } => {
                let mut acc = ExtRational::zero();
                for (s, c) in terms {
                    if s.is_subset(x) {
                        acc += c;
                        if acc.is_infinite() {
                            break;
                        }
                    }
                }
                acc
            }
            SetFunction::Shifted(s) => {
                if s.size_cap.is_some_and(|cap| x.len() > cap) {
                    return ExtRational::Infinity;
                }
                let mut acc = s.base.eval(x.lift(&s.embed));
                for v in x.iter() {
                    if acc.is_infinite() {
                        break;
                    }
                    acc += &s.charges[v];
                }
                acc
            }
        }
    }

    /// `f'(X) = f(X) + Σ_{u ∈ X} charge(u)` on the members of `keep`, reindexed
    /// in ascending order. `charges` is indexed by the current ground set.
    pub fn restricted(&self, keep: VertexSet, charges: &[ExtRational]) -> SetFunction {
        let local = keep.to_vec();
        match self {
            SetFunction::Shifted(s) => SetFunction::Shifted(Shifted {
                base: s.base.clone(),
                embed: local.iter().map(|&v| s.embed[v]).collect(),
                charges: local.iter().map(|&v| &s.charges[v] + &charges[v]).collect(),
                size_cap: s.size_cap,
            }),
            _ => SetFunction::Shifted(Shifted {
                base: Arc::new(self.clone()),
                charges: local.iter().map(|&v| charges[v].clone()).collect(),
                embed: local,
                size_cap: None,
            }),
        }
    }

    /// Same function, but `∞` on every set with more than `cap` members.
    pub fn with_size_cap(&self, cap: usize) -> SetFunction {
        match self {
            SetFunction::Shifted(s) => SetFunction::Shifted(Shifted {
                size_cap: Some(s.size_cap.map_or(cap, |c| c.min(cap))),
                ..s.clone()
            }),
            _ => SetFunction::Shifted(Shifted {
                base: Arc::new(self.clone()),
                embed: (0..self.n()).collect(),
                charges: vec![ExtRational::zero(); self.n()],
                size_cap: Some(cap),
            }),
        }
    }

    /// Values on all `2^n` subsets, indexed by bitmask.
    pub fn values(&self, budget: &Budget) -> Result<Vec<ExtRational>> {
        let n = self.n();
        budget.check(sweep_size(2, n))?;
        Ok((0..1u64 << n).map(|m| self.eval(VertexSet(m))).collect())
    }
}

/// `f(∅) = 0` and `f ≥ 0`; the witness is a violating subset.
pub fn is_normalised(f: &SetFunction, budget: &Budget) -> Result<Checked<VertexSet>> {
    let vals = f.values(budget)?;
    if !vals[0].is_zero() {
        return Ok(Checked::Violated(VertexSet::EMPTY));
    }
    Ok(match vals.iter().position(|v| v.is_negative()) {
        Some(m) => Checked::Violated(VertexSet(m as u64)),
        None => Checked::Holds,
    })
}

fn require_normalised(f: &SetFunction, budget: &Budget) -> Result<Vec<ExtRational>> {
    if let Checked::Violated(x) = is_normalised(f, budget)? {
        return Err(Error::Precondition(format!("set function is not normalised at {x:?}")));
    }
    f.values(budget)
}

/// `f(X) + f(Y) ≤ f(X ∪ Y)` for all disjoint `X`, `Y`.
pub fn is_superadditive(f: &SetFunction, budget: &Budget) -> Result<Checked<(VertexSet, VertexSet)>> {
    budget.check(sweep_size(3, f.n()))?;
    let vals = require_normalised(f, budget)?;
    let all = VertexSet::full(f.n());
    for x in all.subsets().skip(1) {
        for y in (all - x).subsets().skip(1) {
            if &vals[x.0 as usize] + &vals[y.0 as usize] > vals[(x | y).0 as usize] {
                return Ok(Checked::Violated((x, y)));
            }
        }
    }
    Ok(Checked::Holds)
}

/// `f(X) ≤ f(Y)` for all `X ⊆ Y`.
pub fn is_increasing(f: &SetFunction, budget: &Budget) -> Result<Checked<(VertexSet, VertexSet)>> {
    budget.check(sweep_size(3, f.n()))?;
    let vals = require_normalised(f, budget)?;
    let all = VertexSet::full(f.n());
    for x in all.subsets() {
        for extra in (all - x).subsets().skip(1) {
            let y = x | extra;
            if vals[x.0 as usize] > vals[y.0 as usize] {
                return Ok(Checked::Violated((x, y)));
            }
        }
    }
    Ok(Checked::Holds)
}

/// A normalised function on k-tuples of pairwise disjoint subsets of `{0, …, n-1}`.
///
/// Backed by a weighted relation over `{0, …, k}` of arity `n` and the offset
/// `γ(0ⁿ)`: `f(X₁, …, X_k) = γ(x) − γ(0ⁿ)` where `x_i = d` iff `i ∈ X_d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KSetFunction {
    k: usize,
    n: usize,
    values: Arc<Vec<ExtRational>>,
    offset: Rational,
}

impl KSetFunction {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> &Rational {
        &self.offset
    }

    /// Builds a k-set function directly from its value on every labelling.
    /// Fails unless the result is normalised.
    pub fn from_labelling_fn<F>(k: usize, n: usize, mut value: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> ExtRational,
    {
        if k == 0 {
            return Err(Error::Domain("k-set functions need k >= 1".into()));
        }
        let mut values = Vec::with_capacity(sweep_size(k + 1, n) as usize);
        let mut witness = None;
        for_each_labelling(n, k + 1, |labels| {
            let v = value(labels);
            let zero_tuple = labels.iter().all(|&l| l == 0);
            if witness.is_none() && ((zero_tuple && !v.is_zero()) || v.is_negative()) {
                witness = Some(labels.to_vec());
            }
            values.push(v);
            true
        });
        if let Some(w) = witness {
            return Err(Error::Normalisation { witness: w });
        }
        Ok(KSetFunction { k, n, values: Arc::new(values), offset: Rational::zero() })
    }

    pub fn index_of(&self, labels: &[usize]) -> usize {
        labels.iter().fold(0usize, |acc, &l| acc * (self.k + 1) + l)
    }

    /// Value at a labelling of the ground set with labels in `0..=k`.
    pub fn eval_labels(&self, labels: &[usize]) -> ExtRational {
        match &self.values[self.index_of(labels)] {
            ExtRational::Finite(v) => ExtRational::Finite(v - &self.offset),
            ExtRational::Infinity => ExtRational::Infinity,
        }
    }

    /// Value at a tuple `(X₁, …, X_k)`; rejects overlapping or out-of-range sets.
    pub fn eval(&self, sets: &[VertexSet]) -> Result<ExtRational> {
        Ok(self.eval_labels(&self.labels_of(sets)?))
    }

    pub fn labels_of(&self, sets: &[VertexSet]) -> Result<Vec<usize>> {
        if sets.len() != self.k {
            return Err(Error::InvalidInput(format!("expected {} sets, got {}", self.k, sets.len())));
        }
        let mut labels = vec![0usize; self.n];
        let mut seen = VertexSet::EMPTY;
        for (d, s) in sets.iter().enumerate() {
            if !s.is_disjoint(seen) {
                return Err(Error::InvalidInput(format!("argument sets overlap at {:?}", *s & seen)));
            }
            if !s.is_subset(VertexSet::full(self.n)) {
                return Err(Error::VertexOutOfRange { vertex: s.span() - 1, n: self.n });
            }
            seen = seen | *s;
            for v in s.iter() {
                labels[v] = d + 1;
            }
        }
        Ok(labels)
    }

    /// `f(X, ∅, …, ∅)`.
    pub fn first_slot(&self, x: VertexSet) -> ExtRational {
        let labels: Vec<usize> = (0..self.n).map(|i| usize::from(x.contains(i))).collect();
        self.eval_labels(&labels)
    }

    /// The weighted relation with the offset added back.
    pub fn to_relation(&self) -> WeightedRelation {
        WeightedRelation::from_values(self.k + 1, self.n, self.values.as_ref().clone())
            .expect("table length matches by construction")
    }
}

/// Union of the nonzero-labelled positions.
pub fn support(labels: &[usize]) -> VertexSet {
    VertexSet::from_indices(labels.iter().enumerate().filter(|(_, &l)| l != 0).map(|(i, _)| i))
}

/// Splits a labelling into its `k` label classes.
pub fn label_classes(labels: &[usize], k: usize) -> Vec<VertexSet> {
    let mut sets = vec![VertexSet::EMPTY; k];
    for (i, &l) in labels.iter().enumerate() {
        if l != 0 {
            sets[l - 1].insert(i);
        }
    }
    sets
}

/// `f(∅, …, ∅) = 0` and `f ≥ 0`.
pub fn is_ksetfn_normalised(f: &KSetFunction, budget: &Budget) -> Result<Checked<Vec<VertexSet>>> {
    budget.check(sweep_size(f.k + 1, f.n))?;
    let mut out = Checked::Holds;
    for_each_labelling(f.n, f.k + 1, |labels| {
        let v = f.eval_labels(labels);
        let zero_tuple = labels.iter().all(|&l| l == 0);
        if (zero_tuple && !v.is_zero()) || v.is_negative() {
            out = Checked::Violated(label_classes(labels, f.k));
            return false;
        }
        true
    });
    Ok(out)
}

/// Checks the ⟨c₀⟩ condition and returns the k-set function of `γ − γ(0ⁿ)`.
pub fn relation_to_ksetfn(gamma: &WeightedRelation) -> Result<KSetFunction> {
    if gamma.domain_size() < 2 {
        return Err(Error::Domain("k-set functions need a domain of at least two labels".into()));
    }
    let zero = &gamma.values()[0];
    let offset = match zero {
        ExtRational::Finite(v) => v.clone(),
        ExtRational::Infinity => return Err(Error::Normalisation { witness: vec![0; gamma.arity()] }),
    };
    if let Some(idx) = gamma.values().iter().position(|v| v < zero) {
        return Err(Error::Normalisation { witness: gamma.tuple_of(idx) });
    }
    Ok(KSetFunction {
        k: gamma.domain_size() - 1,
        n: gamma.arity(),
        values: Arc::new(gamma.values().to_vec()),
        offset,
    })
}

/// `g(∪Xᵢ) ≤ f(X₁, …, X_k) ≤ α·g(∪Xᵢ)` for every disjoint tuple.
///
/// When `g(∪Xᵢ) = 0` the upper bound demands `f(X₁, …, X_k) = 0`.
pub fn approximates(
    g: &SetFunction,
    f: &KSetFunction,
    alpha: &ExtRational,
    budget: &Budget,
) -> Result<Checked<Vec<VertexSet>>> {
    if g.n() != f.n {
        return Err(Error::InvalidInput(format!("ground sets differ: {} vs {}", g.n(), f.n)));
    }
    if *alpha < ExtRational::one() {
        return Err(Error::Precondition(format!("approximation factor {alpha} < 1")));
    }
    budget.check(sweep_size(f.k + 1, f.n))?;
    let gv = g.values(budget)?;
    let mut out = Ok(Checked::Holds);
    for_each_labelling(f.n, f.k + 1, |labels| {
        let lower = &gv[support(labels).0 as usize];
        let value = f.eval_labels(labels);
        let upper = if lower.is_zero() { Ok(ExtRational::zero()) } else { alpha.checked_mul(lower) };
        match upper {
            Ok(upper) => {
                if *lower > value || value > upper {
                    out = Ok(Checked::Violated(label_classes(labels, f.k)));
                    return false;
                }
                true
            }
            Err(e) => {
                out = Err(e);
                false
            }
        }
    });
    out
}

/// JSON form of a set function.
///
/// Tables: `{"n": 2, "kind": "table", "entries": {"0": "1", "0,1": "3"}}`
/// with missing subsets read as 0. Generators: `{"n": 2, "kind": "generator",
/// "terms": [[[0, 1], "2"]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SetFunctionJson {
    pub n: usize,
    pub kind: SetFunctionKind,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub entries: BTreeMap<String, ExtRational>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<(VertexSet, ExtRational)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetFunctionKind {
    Table,
    Generator,
}

pub fn subset_key(x: VertexSet) -> String {
    x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

pub fn parse_subset_key(key: &str) -> Result<VertexSet> {
    let key = key.trim();
    if key.is_empty() {
        return Ok(VertexSet::EMPTY);
    }
    let mut set = VertexSet::EMPTY;
    for part in key.split(',') {
        let v: usize = part.trim().parse().map_err(|_| Error::Parse(key.to_string()))?;
        if v >= MAX_VERTICES {
            return Err(Error::Parse(key.to_string()));
        }
        set.insert(v);
    }
    Ok(set)
}

impl SetFunctionJson {
    pub fn from_function(f: &SetFunction, budget: &Budget) -> Result<Self> {
        match f {
            SetFunction::Generator { n, terms } => Ok(SetFunctionJson {
                n: *n,
                kind: SetFunctionKind::Generator,
                entries: BTreeMap::new(),
                terms: terms.clone(),
            }),
            _ => {
                let entries = f
                    .values(budget)?
                    .into_iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(m, v)| (subset_key(VertexSet(m as u64)), v))
                    .collect();
                Ok(SetFunctionJson { n: f.n(), kind: SetFunctionKind::Table, entries, terms: Vec::new() })
            }
        }
    }

    pub fn into_function(self) -> Result<SetFunction> {
        match self.kind {
            SetFunctionKind::Generator => SetFunction::generator(self.n, self.terms),
            SetFunctionKind::Table => {
                if self.n > MAX_TABLE_VERTICES {
                    return Err(Error::InvalidInput(format!("table on {} vertices is too large", self.n)));
                }
                let mut values = vec![ExtRational::zero(); 1usize << self.n];
                for (key, v) in self.entries {
                    let set = parse_subset_key(&key)?;
                    if !set.is_subset(VertexSet::full(self.n)) {
                        return Err(Error::VertexOutOfRange { vertex: set.span() - 1, n: self.n });
                    }
                    values[set.0 as usize] = v;
                }
                SetFunction::table(self.n, values)
            }
        }
    }
}
