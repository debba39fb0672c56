//! Bounded generalised min-cut instances: optimum classification, restriction and
//! enumeration of all α-optimal solutions.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphJson, WeightedGraph};
use crate::numeric::{int_pow, ExtRational, Rational};
use crate::setfn::{is_superadditive, Budget, Checked, SetFunction, SetFunctionJson};
use crate::subset::VertexSet;

/// Default ground-set limit for [`brute_force_enumerate`].
pub const BRUTE_VERTEX_LIMIT: usize = 16;

/// `h(X) = f(X) + w(X)` over solutions `q ≤ |X| ≤ n − p`.
#[derive(Clone, Debug)]
pub struct BgmcInstance {
    graph: WeightedGraph,
    f: SetFunction,
    q: usize,
    p: usize,
}

impl BgmcInstance {
    /// Validates sizes and, for table-backed `f`, superadditivity.
    pub fn new(graph: WeightedGraph, f: SetFunction, q: usize, p: usize, budget: &Budget) -> Result<Self> {
        if f.is_table() {
            if let Checked::Violated((x, y)) = is_superadditive(&f, budget)? {
                return Err(Error::NotSuperadditive { x: x.to_vec(), y: y.to_vec() });
            }
        }
        BgmcInstance::new_unchecked(graph, f, q, p)
    }

    /// Skips the superadditivity sweep.
    pub fn new_unchecked(graph: WeightedGraph, f: SetFunction, q: usize, p: usize) -> Result<Self> {
        if graph.n() != f.n() {
            return Err(Error::InvalidInput(format!(
                "graph has {} vertices, set function {}",
                graph.n(),
                f.n()
            )));
        }
        Ok(BgmcInstance { graph, f, q, p })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn f(&self) -> &SetFunction {
        &self.f
    }

    pub fn with_bounds(&self, q: usize, p: usize) -> BgmcInstance {
        BgmcInstance { q, p, ..self.clone() }
    }

    pub fn has_solutions(&self) -> bool {
        self.q + self.p <= self.n()
    }

    pub fn is_solution(&self, x: VertexSet) -> bool {
        let k = x.len();
        x.is_subset(self.graph.vertices()) && k >= self.q && k + self.p <= self.n()
    }

    pub fn value(&self, x: VertexSet) -> ExtRational {
        let fx = self.f.eval(x);
        if fx.is_infinite() {
            return fx;
        }
        fx + self.graph.cut_weight(x)
    }

    fn check_bounds(&self) -> Result<()> {
        if self.has_solutions() {
            Ok(())
        } else {
            Err(Error::InfeasibleBounds { q: self.q, p: self.p, n: self.n() })
        }
    }
}

/// Which of `λ = 0`, `0 < λ < ∞`, `λ = ∞` holds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum OptimumClass {
    Zero { solution: VertexSet },
    PositiveFinite,
    Infinite,
}

impl OptimumClass {
    pub fn name(&self) -> &'static str {
        match self {
            OptimumClass::Zero { .. } => "zero",
            OptimumClass::PositiveFinite => "positive_finite",
            OptimumClass::Infinite => "infinite",
        }
    }
}

/// Calls `visit` on unions of 1 to `max` of the given parts, in lexicographic
/// order of part indices, until it returns `Some`.
fn find_union<T, F>(parts: &[VertexSet], max: usize, mut visit: F) -> Option<T>
where
    F: FnMut(VertexSet) -> Option<T>,
{
    fn go<T, F: FnMut(VertexSet) -> Option<T>>(
        parts: &[VertexSet],
        start: usize,
        left: usize,
        acc: VertexSet,
        visit: &mut F,
    ) -> Option<T> {
        for i in start..parts.len() {
            let u = acc | parts[i];
            if let Some(t) = visit(u) {
                return Some(t);
            }
            if left > 1 {
                if let Some(t) = go(parts, i + 1, left - 1, u, visit) {
                    return Some(t);
                }
            }
        }
        None
    }
    if max == 0 {
        return None;
    }
    go(parts, 0, max, VertexSet::EMPTY, &mut visit)
}

/// The class together with a finite-valued solution when one exists.
fn classify_with_witness(h: &BgmcInstance) -> Result<(OptimumClass, Option<VertexSet>)> {
    h.check_bounds()?;
    if h.q == 0 && h.value(VertexSet::EMPTY).is_zero() {
        return Ok((OptimumClass::Zero { solution: VertexSet::EMPTY }, Some(VertexSet::EMPTY)));
    }
    let zero = find_union(&h.graph.components(), h.q, |y| {
        (h.is_solution(y) && h.value(y).is_zero()).then_some(y)
    });
    if let Some(y) = zero {
        return Ok((OptimumClass::Zero { solution: y }, Some(y)));
    }
    if h.q == 0 {
        let empty = VertexSet::EMPTY;
        if h.value(empty).is_finite() {
            return Ok((OptimumClass::PositiveFinite, Some(empty)));
        }
    }
    let finite = find_union(&h.graph.infinite_components(), h.q, |y| {
        (h.is_solution(y) && h.value(y).is_finite()).then_some(y)
    });
    Ok(match finite {
        Some(y) => (OptimumClass::PositiveFinite, Some(y)),
        None => (OptimumClass::Infinite, None),
    })
}

/// Decides the optimum class by sweeping unions of at most `q` components.
pub fn classify_optimum(h: &BgmcInstance) -> Result<OptimumClass> {
    Ok(classify_with_witness(h)?.0)
}

/// The same decision by a full sweep of all `2^n` subsets.
pub fn brute_classify(h: &BgmcInstance, budget: &Budget) -> Result<OptimumClass> {
    h.check_bounds()?;
    budget.check(1u128 << h.n())?;
    let mut best = ExtRational::Infinity;
    for x in h.graph.vertices().subsets().filter(|&x| h.is_solution(x)) {
        let v = h.value(x);
        if v.is_zero() {
            return Ok(OptimumClass::Zero { solution: x });
        }
        best = best.min(v);
    }
    Ok(if best.is_finite() { OptimumClass::PositiveFinite } else { OptimumClass::Infinite })
}

/// Instance on `G[keep]` whose set function carries the weight of edges leaving `keep`,
/// so that `h'(X) = h(X)` for every `X ⊆ keep`. Vertices are renumbered ascending.
pub fn restrict_instance(h: &BgmcInstance, keep: VertexSet) -> BgmcInstance {
    let charges = h.graph.boundary_charges(keep);
    BgmcInstance {
        graph: h.graph.induced(keep),
        f: h.f.restricted(keep, &charges),
        q: h.q,
        p: h.p,
    }
}

/// Optimal value and all α-optimal solutions, in ascending bitmask order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationResult {
    pub lambda: ExtRational,
    pub solutions: Vec<VertexSet>,
}

/// Enumerates α-optimal solutions of plain GMC instances (bounds `q = p = 1`).
pub trait GmcEnumerator: Sync {
    /// All `X` with `1 ≤ |X| ≤ n − 1` and `h(X) ≤ α·λ`. May assume `0 < λ < ∞`.
    fn enumerate(&self, h: &BgmcInstance, alpha: u64) -> Result<EnumerationResult>;

    /// Optimal value and the smallest-bitmask optimal solution, `None` when `n < 2`.
    fn optimum(&self, h: &BgmcInstance) -> Result<Option<(ExtRational, VertexSet)>>;
}

/// Reference enumerator sweeping all proper nonempty subsets.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExhaustiveGmc {
    pub budget: Budget,
}

impl ExhaustiveGmc {
    fn values(&self, h: &BgmcInstance) -> Result<Vec<(VertexSet, ExtRational)>> {
        self.budget.check(1u128 << h.n())?;
        let full = h.graph.vertices();
        Ok(full
            .subsets()
            .filter(|&x| !x.is_empty() && x != full)
            .map(|x| (x, h.value(x)))
            .collect())
    }
}

impl GmcEnumerator for ExhaustiveGmc {
    fn enumerate(&self, h: &BgmcInstance, alpha: u64) -> Result<EnumerationResult> {
        let values = self.values(h)?;
        let lambda = values.iter().map(|(_, v)| v).min().cloned().unwrap_or(ExtRational::Infinity);
        let bound = lambda.scale(&Rational::from_int(alpha as i64))?;
        let solutions = values.into_iter().filter(|(_, v)| *v <= bound).map(|(x, _)| x).collect();
        Ok(EnumerationResult { lambda, solutions })
    }

    fn optimum(&self, h: &BgmcInstance) -> Result<Option<(ExtRational, VertexSet)>> {
        let mut best: Option<(ExtRational, VertexSet)> = None;
        for (x, v) in self.values(h)? {
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, x));
            }
        }
        Ok(best)
    }
}

/// `τ(q, α) = 60qα + 41q + 7`.
pub fn tau(q: usize, alpha: &Rational) -> Rational {
    let q = Rational::from_int(q as i64);
    &(&(&Rational::from_int(60) * &q) * alpha) + &(&(&Rational::from_int(41) * &q) + &Rational::from_int(7))
}

/// `n^⌊τ(q, α)⌋`.
pub fn bounded_count_limit(n: usize, q: usize, alpha: &Rational) -> BigInt {
    let exp = tau(q, alpha).floor();
    int_pow(n, u64::try_from(exp).unwrap_or(u64::MAX))
}

/// `n^{20α − 15}`.
pub fn gmc_count_limit(n: usize, alpha: u64) -> BigInt {
    int_pow(n, (20 * alpha).saturating_sub(15))
}

fn check_count(count: usize, limit: BigInt, what: &str) -> Result<()> {
    if BigInt::from(count) > limit {
        return Err(Error::BoundViolated(format!("{count} {what} solutions exceed the bound {limit}")));
    }
    Ok(())
}

fn require_positive_finite(h: &BgmcInstance) -> Result<()> {
    match classify_optimum(h)? {
        OptimumClass::PositiveFinite => Ok(()),
        other => Err(Error::Precondition(format!("optimum class is {}, need 0 < lambda < inf", other.name()))),
    }
}

/// All α-optimal solutions of a GMC instance, through `enumerator`.
pub fn gmc_enumerate(h: &BgmcInstance, alpha: u64, enumerator: &dyn GmcEnumerator) -> Result<EnumerationResult> {
    if h.q != 1 || h.p != 1 {
        return Err(Error::Precondition(format!("GMC needs q = p = 1, got q = {}, p = {}", h.q, h.p)));
    }
    if alpha == 0 {
        return Err(Error::Precondition("alpha must be a positive integer".into()));
    }
    require_positive_finite(h)?;
    let out = enumerator.enumerate(h, alpha)?;
    check_count(out.solutions.len(), gmc_count_limit(h.n(), alpha), "GMC")?;
    Ok(out)
}

struct Recursion<'a> {
    top: BgmcInstance,
    enumerator: &'a dyn GmcEnumerator,
    memo: HashMap<(VertexSet, Vec<VertexSet>, Rational), BTreeSet<VertexSet>>,
}

impl Recursion<'_> {
    /// Candidates for the instance restricted to `support` (top coordinates) with the
    /// given blocks, all in top coordinates.
    fn run(&mut self, support: VertexSet, mut blocks: Vec<VertexSet>, alpha: Rational) -> Result<BTreeSet<VertexSet>> {
        blocks.sort();
        let key = (support, blocks, alpha);
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        let (support, blocks, alpha) = key;
        let out = self.expand(support, &blocks, &alpha)?;
        self.memo.insert((support, blocks, alpha), out.clone());
        Ok(out)
    }

    fn expand(&mut self, support: VertexSet, blocks: &[VertexSet], alpha: &Rational) -> Result<BTreeSet<VertexSet>> {
        let q = self.top.q;
        let mut out = BTreeSet::new();
        let y = blocks.iter().fold(VertexSet::EMPTY, |acc, b| acc | *b);
        let z = support - y;
        if support.len() <= q || z.is_empty() {
            return Ok(out);
        }
        let small_y: Vec<VertexSet> = y.small_subsets(q).collect();
        let z_local = restrict_instance(&self.top, z).with_bounds(1, 1);
        let z_embed = z.to_vec();
        let opt = self.enumerator.optimum(&z_local)?;

        // Case 1
        let mut z_options = vec![z];
        if let Some((lambda_z, _)) = &opt {
            if lambda_z.is_positive() && lambda_z.is_finite() {
                let qr = Rational::from_int(q as i64);
                let factor = &(&(&Rational::from_int(3) * &qr) * alpha) + &(&Rational::from_int(2) * &qr);
                let factor = u64::try_from(factor.ceil())
                    .map_err(|_| Error::Precondition(format!("enumeration factor {factor} too large")))?;
                let found = gmc_enumerate(&z_local, factor, self.enumerator)?;
                z_options.extend(found.solutions.into_iter().map(|s| s.lift(&z_embed)));
            }
        }
        for zo in &z_options {
            for sy in &small_y {
                out.insert(*zo | *sy);
            }
        }

        // Case 2
        let Some((lambda_z, y_next_local)) = opt else { return Ok(out) };
        let y_next = y_next_local.lift(&z_embed);
        if !lambda_z.is_finite() || y_next.len() >= q {
            return Ok(out);
        }
        let z_prime = z - y_next;

        // Case 2a
        let mut z_prime_options: BTreeSet<VertexSet> = z_prime.small_subsets(q).collect();
        z_prime_options.insert(z_prime);
        let reduced = alpha - &Rational::new(1, 3);
        if reduced >= Rational::one() {
            z_prime_options.extend(self.run(z_prime, Vec::new(), reduced)?);
        }
        let y_prime_options: BTreeSet<VertexSet> =
            small_y.iter().flat_map(|sy| y_next.subsets().map(move |t| *sy | t)).collect();
        for a in &z_prime_options {
            for b in &y_prime_options {
                out.insert(*a | *b);
            }
        }

        // Case 2b
        let mut extended = blocks.to_vec();
        extended.push(y_next);
        out.extend(self.run(support, extended, alpha.clone())?);
        Ok(out)
    }
}

/// Replaces infinite edge weights by a value large enough that no set cutting
/// them can be α-optimal.
fn with_finite_edges(h: &BgmcInstance, alpha: &Rational, witness: VertexSet) -> Result<BgmcInstance> {
    if h.graph.infinite_components().len() == h.n() {
        return Ok(h.clone());
    }
    let full = h.f.eval(h.graph.vertices());
    let base = if full.is_finite() { full } else { h.value(witness) };
    let total = ExtRational::one() + base + h.graph.finite_weight_total();
    let big = total.scale(alpha)?;
    Ok(BgmcInstance { graph: h.graph.with_infinite_weights_replaced(&big), ..h.clone() })
}

/// A superset of the α-optimal solutions `X` with `|X ∩ Y| < q`, where `Y` is the
/// union of `blocks`. Needs `p = 1` and `q ≥ 2`.
pub fn enumerate_bounded(
    h: &BgmcInstance,
    blocks: &[VertexSet],
    alpha: &Rational,
    enumerator: &dyn GmcEnumerator,
) -> Result<Vec<VertexSet>> {
    if h.q < 2 || h.p != 1 {
        return Err(Error::Precondition(format!("need q >= 2 and p = 1, got q = {}, p = {}", h.q, h.p)));
    }
    if *alpha < Rational::one() {
        return Err(Error::Precondition(format!("alpha = {alpha} < 1")));
    }
    let mut seen = VertexSet::EMPTY;
    for b in blocks {
        if b.is_empty() || b.len() >= h.q || !b.is_disjoint(seen) || !b.is_subset(h.graph.vertices()) {
            return Err(Error::Precondition(format!("invalid block {b:?}")));
        }
        seen = seen | *b;
    }
    if h.n() <= h.q {
        return Ok(Vec::new());
    }
    let witness = match classify_with_witness(h)? {
        (OptimumClass::Zero { .. }, _) => {
            return Err(Error::Precondition("optimum class is zero, need 0 < lambda < inf".into()))
        }
        (OptimumClass::Infinite, _) => return Ok(Vec::new()),
        (OptimumClass::PositiveFinite, w) => w.expect("finite class carries a witness"),
    };
    let mut rec = Recursion { top: with_finite_edges(h, alpha, witness)?, enumerator, memo: HashMap::new() };
    let out = rec.run(h.graph.vertices(), blocks.to_vec(), alpha.clone())?;
    Ok(out.into_iter().collect())
}

/// All α-optimal solutions of any instance with `0 < λ < ∞`.
pub fn enumerate_alpha_optimal(
    h: &BgmcInstance,
    alpha: &Rational,
    enumerator: &dyn GmcEnumerator,
) -> Result<EnumerationResult> {
    if *alpha < Rational::one() {
        return Err(Error::Precondition(format!("alpha = {alpha} < 1")));
    }
    require_positive_finite(h)?;
    let n = h.n();
    let mut candidates: BTreeSet<VertexSet> = BTreeSet::new();
    let lifted_q = h.q.max(2);
    if lifted_q < n {
        let lifted_f = if h.p > 1 { h.f.with_size_cap(n - h.p) } else { h.f.clone() };
        let lifted = BgmcInstance::new_unchecked(h.graph.clone(), lifted_f, lifted_q, 1)?;
        candidates.extend(enumerate_bounded(&lifted, &[], alpha, enumerator)?);
    }
    if h.q == 0 {
        candidates.insert(VertexSet::EMPTY);
    }
    if h.q <= 1 {
        candidates.extend((0..n).map(VertexSet::singleton));
    }
    if h.p == 0 {
        candidates.insert(h.graph.vertices());
    }
    let scored: Vec<(VertexSet, ExtRational)> =
        candidates.into_iter().filter(|&x| h.is_solution(x)).map(|x| (x, h.value(x))).collect();
    let lambda = scored.iter().map(|(_, v)| v).min().cloned().unwrap_or(ExtRational::Infinity);
    let bound = lambda.scale(alpha)?;
    let solutions: Vec<VertexSet> = scored.into_iter().filter(|(_, v)| *v <= bound).map(|(x, _)| x).collect();
    check_count(solutions.len(), bounded_count_limit(n, h.q, alpha), "bounded")?;
    Ok(EnumerationResult { lambda, solutions })
}

/// Reference oracle: sweeps all `2^n` subsets. Reports whatever `λ` it finds.
pub fn brute_force_enumerate(h: &BgmcInstance, alpha: &Rational, vertex_limit: usize) -> Result<EnumerationResult> {
    if h.n() > vertex_limit {
        return Err(Error::BudgetExceeded { needed: 1u128 << h.n(), limit: 1u64 << vertex_limit });
    }
    h.check_bounds()?;
    let scored: Vec<(VertexSet, ExtRational)> =
        h.graph.vertices().subsets().filter(|&x| h.is_solution(x)).map(|x| (x, h.value(x))).collect();
    let lambda = scored.iter().map(|(_, v)| v).min().cloned().unwrap_or(ExtRational::Infinity);
    let bound = lambda.scale(alpha)?;
    let solutions = scored.into_iter().filter(|(_, v)| *v <= bound).map(|(x, _)| x).collect();
    Ok(EnumerationResult { lambda, solutions })
}

/// Instance file: `{"graph": …, "set_function": …, "q": 1, "p": 1}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BgmcJson {
    pub graph: GraphJson,
    pub set_function: SetFunctionJson,
    pub q: usize,
    pub p: usize,
}

impl BgmcJson {
    pub fn from_instance(h: &BgmcInstance, budget: &Budget) -> Result<Self> {
        Ok(BgmcJson {
            graph: GraphJson::from(&h.graph),
            set_function: SetFunctionJson::from_function(&h.f, budget)?,
            q: h.q,
            p: h.p,
        })
    }

    pub fn into_instance(self, budget: &Budget) -> Result<BgmcInstance> {
        let graph = WeightedGraph::try_from(self.graph)?;
        let f = self.set_function.into_function()?;
        BgmcInstance::new(graph, f, self.q, self.p, budget)
    }
}
