//! Set-function approximations of k-set functions and the lower-bounded VCSP solver
//! built on them.

use std::collections::BTreeSet;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::bgmc::{
    brute_classify, brute_force_enumerate, classify_optimum, BgmcInstance, OptimumClass,
};
use crate::classify::{ceil_alpha, language_class, ClassKind};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::numeric::{ExtRational, Rational};
use crate::setfn::{approximates, for_each_labelling, relation_to_ksetfn, Budget, KSetFunction, SetFunction};
use crate::subset::VertexSet;
use crate::vcsp::{brute_solve, fix_language, fix_relation, Constraint, Instance, Language, Mode, Outcome, WeightedRelation};

/// Largest ground set the exhaustive references will sweep.
pub const EXHAUSTIVE_VERTEX_LIMIT: usize = 20;

/// `g(X) = f(X, ∅, …, ∅) / α`.
pub fn seds_to_eds(f: &KSetFunction, alpha: &Rational) -> Result<SetFunction> {
    check_alpha(alpha)?;
    SetFunction::table_from_fn(f.n(), |x| f.first_slot(x).div_finite(alpha))
}

/// `g(X) = α^{|X|−n−1}·|X|/n · f(X, ∅, …, ∅)`, and `g ≡ 0` on an empty ground set.
pub fn sds_to_superadditive(f: &KSetFunction, alpha: &Rational) -> Result<SetFunction> {
    check_alpha(alpha)?;
    let n = f.n();
    if n == 0 {
        return Ok(SetFunction::zero(0));
    }
    let nr = Rational::from_int(n as i64);
    SetFunction::table_from_fn(n, |x| {
        let s = x.len();
        let coeff = &(&alpha.pow(s as i32 - n as i32 - 1) * &Rational::from_int(s as i64)) / &nr;
        f.first_slot(x).scale(&coeff)
    })
}

fn check_alpha(alpha: &Rational) -> Result<()> {
    if *alpha < Rational::one() {
        return Err(Error::Precondition(format!("alpha = {alpha} < 1")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backing {
    SdsSuperadditive,
    SedsEds,
    ExternalGmc,
}

/// A GMC-style set function `h(X) = cut(X) + g(X)` on a relation's positions that
/// approximates its k-set function within `factor`.
#[derive(Clone, Debug)]
pub struct ConstraintApproximation {
    pub graph: WeightedGraph,
    pub g: SetFunction,
    pub factor: Rational,
    pub backing: Backing,
}

impl ConstraintApproximation {
    /// Superadditive approximation with factor `r·α^{r+1}` (`1` for nullary relations).
    pub fn sds(gamma: &WeightedRelation, alpha: &Rational) -> Result<Self> {
        let f = relation_to_ksetfn(gamma)?;
        let r = f.n();
        let factor = if r == 0 { Rational::one() } else { &Rational::from_int(r as i64) * &alpha.pow(r as i32 + 1) };
        Ok(ConstraintApproximation {
            graph: WeightedGraph::empty(r),
            g: sds_to_superadditive(&f, alpha)?,
            factor,
            backing: Backing::SdsSuperadditive,
        })
    }

    /// EDS approximation with factor `α²`.
    pub fn seds(gamma: &WeightedRelation, alpha: &Rational) -> Result<Self> {
        let f = relation_to_ksetfn(gamma)?;
        Ok(ConstraintApproximation {
            graph: WeightedGraph::empty(f.n()),
            g: seds_to_eds(&f, alpha)?,
            factor: alpha * alpha,
            backing: Backing::SedsEds,
        })
    }

    /// A caller-supplied GMC instance, verified against the relation.
    pub fn external(gamma: &WeightedRelation, graph: WeightedGraph, g: SetFunction, factor: Rational, budget: &Budget) -> Result<Self> {
        let a = ConstraintApproximation { graph, g, factor, backing: Backing::ExternalGmc };
        if a.graph.n() != gamma.arity() || a.g.n() != gamma.arity() {
            return Err(Error::InvalidInput("approximation ground set differs from the relation arity".into()));
        }
        if let Some(w) = a.verify(gamma, budget)?.witness() {
            return Err(Error::BoundViolated(format!("approximation fails at {w:?}")));
        }
        Ok(a)
    }

    pub fn value(&self, x: VertexSet) -> ExtRational {
        self.graph.cut_weight(x) + self.g.eval(x)
    }

    pub fn as_set_function(&self) -> Result<SetFunction> {
        SetFunction::table_from_fn(self.g.n(), |x| Ok(self.value(x)))
    }

    pub fn verify(&self, gamma: &WeightedRelation, budget: &Budget) -> Result<crate::setfn::Checked<Vec<VertexSet>>> {
        let f = relation_to_ksetfn(gamma)?;
        approximates(&self.as_set_function()?, &f, &ExtRational::Finite(self.factor.clone()), budget)
    }
}

/// Approximations for every constraint of `inst` along the given path.
pub fn approximate_constraints(inst: &Instance, path: SolverPath, alpha: &Rational) -> Result<Vec<ConstraintApproximation>> {
    inst.constraints
        .iter()
        .map(|c| {
            let gamma = inst.relation(c);
            match path {
                SolverPath::Sds => ConstraintApproximation::sds(gamma, alpha),
                SolverPath::Seds => ConstraintApproximation::seds(gamma, alpha),
            }
        })
        .collect()
}

fn preimage(scope: &[usize], x: VertexSet) -> VertexSet {
    VertexSet::from_indices(scope.iter().enumerate().filter(|(_, &v)| x.contains(v)).map(|(j, _)| j))
}

/// Sums the weighted per-constraint approximations, relabelled onto the instance
/// variables, into `BGMC(l*, l(0))`.
pub fn build_global_instance(inst: &Instance, l: &[usize], approx: &[ConstraintApproximation]) -> Result<BgmcInstance> {
    if approx.len() != inst.constraints.len() {
        return Err(Error::InvalidInput(format!(
            "{} approximations for {} constraints",
            approx.len(),
            inst.constraints.len()
        )));
    }
    if l.len() != inst.domain_size() {
        return Err(Error::InvalidInput(format!("{} bounds for {} labels", l.len(), inst.domain_size())));
    }
    let n = inst.n();
    let mut graph = WeightedGraph::empty(n);
    for (c, a) in inst.constraints.iter().zip(approx) {
        if a.g.n() != c.scope.len() || a.graph.n() != c.scope.len() {
            return Err(Error::InvalidInput(format!(
                "approximation on {} positions for a scope of {}",
                a.g.n(),
                c.scope.len()
            )));
        }
        graph.add_scaled(&a.graph, &c.scope, &c.weight)?;
    }
    let f = SetFunction::table_from_fn(n, |x| {
        let mut total = ExtRational::zero();
        for (c, a) in inst.constraints.iter().zip(approx) {
            if !c.weight.is_zero() {
                total += a.g.eval(preimage(&c.scope, x)).scale(&c.weight)?;
            }
        }
        Ok(total)
    })?;
    let q = l[1..].iter().sum();
    BgmcInstance::new_unchecked(graph, f, q, l[0])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverPath {
    Sds,
    Seds,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverPlan {
    pub path: SolverPath,
    /// Integer class factor of the language.
    pub alpha: Rational,
}

/// Picks the SDS path when available, otherwise SEDS.
pub fn plan(lang: &Language, budget: &Budget) -> Result<SolverPlan> {
    let sds = language_class(lang, ClassKind::Sds, budget)?;
    if sds.is_member() {
        return Ok(SolverPlan { path: SolverPath::Sds, alpha: ceil_alpha(&sds.alpha)? });
    }
    let seds = language_class(lang, ClassKind::Seds, budget)?;
    if seds.is_member() {
        return Ok(SolverPlan { path: SolverPath::Seds, alpha: ceil_alpha(&seds.alpha)? });
    }
    Err(Error::Unclassified(format!(
        "language is neither SDS nor SEDS (binding relation {:?})",
        seds.relation
    )))
}

/// Solves lower-bounded instances over the reduced language `Fix(Γ)`.
pub trait FixSubsolver: Sync {
    /// Every optimal assignment must be reported.
    fn solve(&self, inst: &Instance) -> Result<Outcome>;
}

/// Exhaustive reference.
#[derive(Clone, Debug, Default)]
pub struct BruteFix {
    pub budget: Budget,
}

impl FixSubsolver for BruteFix {
    fn solve(&self, inst: &Instance) -> Result<Outcome> {
        brute_solve(inst, &self.budget)
    }
}

/// Classifies the reduced language and recurses through [`solve_lower_bounded`],
/// falling back to [`BruteFix`] when the language is outside both classes.
#[derive(Clone, Debug, Default)]
pub struct RecursiveFix {
    pub budget: Budget,
}

impl FixSubsolver for RecursiveFix {
    fn solve(&self, inst: &Instance) -> Result<Outcome> {
        if inst.domain_size() < 2 {
            return brute_solve(inst, &self.budget);
        }
        let p = match plan(&inst.language, &self.budget) {
            Ok(p) => p,
            Err(Error::Unclassified(msg)) => {
                debug!("reduced language unclassified ({msg}), solving exhaustively");
                return brute_solve(inst, &self.budget);
            }
            Err(e) => return Err(e),
        };
        let l = inst.mode.bounds(inst.domain_size());
        let opts = SolveOptions { budget: self.budget, enumerate: true, fix_subsolver: Some(self) };
        let s = solve_lower_bounded(inst, &l, &p, &opts)?;
        Ok(match (s.value, s.enumeration) {
            (ExtRational::Infinity, _) => Outcome::Infeasible,
            (ExtRational::Finite(value), Some(assignments)) => Outcome::Optimal { value, assignments },
            // a zero optimum reports one assignment; the caller needs all of them
            (ExtRational::Finite(_), None) => brute_solve(inst, &self.budget)?,
        })
    }
}

#[derive(Default)]
pub struct SolveOptions<'a> {
    pub budget: Budget,
    /// Report every optimal assignment when the normalised optimum is in `(0, ∞)`.
    pub enumerate: bool,
    pub fix_subsolver: Option<&'a dyn FixSubsolver>,
}


#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Infeasible,
    ZeroOptimum,
    SupportSweep,
    FixReduction,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub value: ExtRational,
    pub assignment: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumeration: Option<Vec<Vec<usize>>>,
    pub route: Route,
}

impl Solution {
    fn infeasible() -> Self {
        Solution { value: ExtRational::Infinity, assignment: None, enumeration: None, route: Route::Infeasible }
    }

    /// Solver output file: `{"status", "value", "assignment", "enumeration", "route"}`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut out = serde_json::json!({
            "status": if self.value.is_finite() { "optimal" } else { "infeasible" },
            "value": self.value.to_string(),
            "assignment": self.assignment,
            "route": self.route,
        });
        if let Some(e) = &self.enumeration {
            out["enumeration"] = serde_json::json!(e);
        }
        out
    }

    pub fn from_outcome(outcome: Outcome, enumerate: bool) -> Self {
        match outcome {
            Outcome::Infeasible => Solution::infeasible(),
            Outcome::Optimal { value, assignments } => Solution {
                value: ExtRational::Finite(value),
                assignment: assignments.first().cloned(),
                enumeration: enumerate.then_some(assignments),
                route: Route::SupportSweep,
            },
        }
    }
}

/// Fills labels `1..=k` in order over the sorted members of `z` until each quota is
/// met; the rest take label `k`.
pub fn greedy_partition(n: usize, z: VertexSet, l: &[usize]) -> Vec<usize> {
    let k = l.len() - 1;
    let mut labels = vec![0usize; n];
    let mut d = 1;
    let mut used = 0;
    for v in z.iter() {
        while d < k && used >= l[d] {
            d += 1;
            used = 0;
        }
        labels[v] = d;
        used += 1;
    }
    labels
}

/// Optimal lower-bounded assignment for an SDS or SEDS instance.
///
/// Values are raw objective values of `inst`, including the normalisation offsets.
pub fn solve_lower_bounded(inst: &Instance, l: &[usize], plan: &SolverPlan, opts: &SolveOptions<'_>) -> Result<Solution> {
    let n = inst.n();
    let d = inst.domain_size();
    if l.len() != d {
        return Err(Error::InvalidInput(format!("{} bounds for {} labels", l.len(), d)));
    }
    if d < 2 {
        return Err(Error::Domain("the solver needs at least two labels".into()));
    }
    if n > EXHAUSTIVE_VERTEX_LIMIT {
        return Err(Error::BudgetExceeded { needed: 1u128 << n, limit: 1u64 << EXHAUSTIVE_VERTEX_LIMIT });
    }
    if l.iter().sum::<usize>() > n {
        return Ok(Solution::infeasible());
    }
    if plan.path == SolverPath::Seds && opts.fix_subsolver.is_none() {
        return Err(Error::Precondition("the SEDS path needs a subsolver for the reduced language".into()));
    }
    let approx = approximate_constraints(inst, plan.path, &plan.alpha)?;
    let beta = approx.iter().map(|a| a.factor.clone()).fold(Rational::one(), Rational::max);
    let beta = Rational::from_bigint(beta.ceil());
    let h = build_global_instance(inst, l, &approx)?;
    let class = match plan.path {
        SolverPath::Sds => classify_optimum(&h)?,
        SolverPath::Seds => brute_classify(&h, &opts.budget)?,
    };
    debug!("global instance optimum class: {}", class.name());
    match class {
        OptimumClass::Infinite => Ok(Solution::infeasible()),
        OptimumClass::Zero { solution } => {
            let labels = greedy_partition(n, solution, l);
            Ok(Solution {
                value: inst.objective(&labels),
                assignment: Some(labels),
                enumeration: None,
                route: Route::ZeroOptimum,
            })
        }
        OptimumClass::PositiveFinite => match plan.path {
            SolverPath::Sds => support_sweep(inst, l, &beta, opts),
            SolverPath::Seds => fix_reduction(inst, l, &h, &beta, opts),
        },
    }
}

/// Keeps the minimum value and every assignment attaining it.
#[derive(Default)]
struct Best {
    value: Option<Rational>,
    argmin: BTreeSet<Vec<usize>>,
}

impl Best {
    fn offer(&mut self, value: &ExtRational, labels: &[usize]) {
        let Some(v) = value.finite() else { return };
        match &self.value {
            Some(cur) if v > cur => {}
            Some(cur) if v == cur => {
                self.argmin.insert(labels.to_vec());
            }
            _ => {
                self.value = Some(v.clone());
                self.argmin = BTreeSet::from([labels.to_vec()]);
            }
        }
    }

    fn into_solution(self, route: Route, enumerate: bool) -> Solution {
        match self.value {
            None => Solution::infeasible(),
            Some(v) => Solution {
                value: ExtRational::Finite(v),
                assignment: self.argmin.first().cloned(),
                enumeration: enumerate.then(|| self.argmin.into_iter().collect()),
                route,
            },
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Every support `X` with `l* ≤ |X| < (β+1)·l*` and `|X| ≤ n − l(0)`, with every
/// labelling of `X` by non-zero labels meeting the bounds.
fn support_sweep(inst: &Instance, l: &[usize], beta: &Rational, opts: &SolveOptions<'_>) -> Result<Solution> {
    let n = inst.n();
    let k = inst.domain_size() - 1;
    let lstar: usize = l[1..].iter().sum();
    let limit = &(beta + &Rational::one()) * &Rational::from_int(lstar as i64);
    let size_bound = crate::numeric::ceil_u64(&limit).map_or(n + 1, |c| (c as usize).min(n + 1));
    let max_size = (n - l[0]).min(size_bound.saturating_sub(1));
    let needed: u128 = (lstar..=max_size).map(|s| binomial(n, s) * (k as u128).pow(s as u32)).sum();
    opts.budget.check(needed)?;
    let mut best = Best::default();
    let mut labels = vec![0usize; n];
    for x in VertexSet::full(n).subsets().filter(|x| x.len() >= lstar && x.len() <= max_size) {
        let members = x.to_vec();
        for_each_labelling(members.len(), k, |lab| {
            labels.iter_mut().for_each(|v| *v = 0);
            let mut counts = vec![0usize; k + 1];
            for (&v, &a) in members.iter().zip(lab) {
                labels[v] = a + 1;
                counts[a + 1] += 1;
            }
            if (1..=k).all(|d| counts[d] >= l[d]) {
                best.offer(&inst.objective(&labels), &labels);
            }
            true
        });
    }
    Ok(best.into_solution(Route::SupportSweep, opts.enumerate))
}

/// `φ_I` with label 0 pinned outside `x`, over the reduced language.
pub fn pinned_instance(inst: &Instance, fixed_lang: &Language, x: VertexSet, l: &[usize]) -> Result<Instance> {
    let members = x.to_vec();
    let mut index = vec![usize::MAX; inst.n()];
    for (i, &v) in members.iter().enumerate() {
        index[v] = i;
    }
    let mut constraints = Vec::with_capacity(inst.constraints.len());
    for c in &inst.constraints {
        let pinned = VertexSet::from_indices((0..c.scope.len()).filter(|&j| !x.contains(c.scope[j])));
        let fixed = fix_relation(inst.relation(c), pinned)?;
        let name = fixed_lang
            .iter()
            .find(|(_, r)| **r == fixed)
            .map(|(name, _)| name.clone())
            .ok_or_else(|| Error::MissingProvenance(format!("{}@{:?}", c.relation, pinned.to_vec())))?;
        let scope = c.scope.iter().filter(|v| x.contains(**v)).map(|&v| index[v]).collect();
        constraints.push(Constraint { weight: c.weight.clone(), relation: name, scope });
    }
    let variables = members.iter().map(|&v| inst.variables[v].clone()).collect();
    Instance::new(variables, fixed_lang.clone(), constraints, Mode::LowerBounded(l[1..].to_vec()))
}

fn fix_reduction(inst: &Instance, l: &[usize], h: &BgmcInstance, beta: &Rational, opts: &SolveOptions<'_>) -> Result<Solution> {
    let sub = opts.fix_subsolver.expect("checked by the caller");
    // EDS-backed sums carry no GMC structure, so the reference sweep enumerates them
    let candidates = brute_force_enumerate(h, beta, EXHAUSTIVE_VERTEX_LIMIT)?;
    debug!("{} candidate supports", candidates.solutions.len());
    let fixed_lang = fix_language(&inst.language)?;
    let n = inst.n();
    let mut best = Best::default();
    for x in candidates.solutions {
        let pinned = pinned_instance(inst, &fixed_lang, x, l)?;
        if let Outcome::Optimal { value, assignments } = sub.solve(&pinned)? {
            let members = x.to_vec();
            for a in assignments {
                let mut labels = vec![0usize; n];
                for (&v, &lab) in members.iter().zip(&a) {
                    labels[v] = lab + 1;
                }
                best.offer(&ExtRational::Finite(value.clone()), &labels);
            }
        }
    }
    Ok(best.into_solution(Route::FixReduction, opts.enumerate))
}

/// Classifies the language, then solves with a recursive reduced-language subsolver.
pub fn solve_instance(inst: &Instance, enumerate: bool, budget: &Budget) -> Result<(SolverPlan, Solution)> {
    let p = plan(&inst.language, budget)?;
    let sub = RecursiveFix { budget: *budget };
    let opts = SolveOptions { budget: *budget, enumerate, fix_subsolver: Some(&sub) };
    let l = inst.mode.bounds(inst.domain_size());
    let s = solve_lower_bounded(inst, &l, &p, &opts)?;
    Ok((p, s))
}

/// Calls `visit` with every choice of disjoint `V_d` with `|V_d| = l(d)`, as a label
/// per variable (`None` for unchosen).
fn for_each_quota_choice<F>(n: usize, l: &[usize], mut visit: F) -> Result<()>
where
    F: FnMut(&[Option<usize>]) -> Result<()>,
{
    fn go<F: FnMut(&[Option<usize>]) -> Result<()>>(
        l: &[usize],
        d: usize,
        start: usize,
        left: usize,
        chosen: &mut Vec<Option<usize>>,
        visit: &mut F,
    ) -> Result<()> {
        if d == l.len() {
            return visit(chosen);
        }
        if left == 0 {
            return go(l, d + 1, 0, l.get(d + 1).copied().unwrap_or(0), chosen, visit);
        }
        for v in start..chosen.len() {
            if chosen[v].is_none() {
                chosen[v] = Some(d);
                go(l, d, v + 1, left - 1, chosen, visit)?;
                chosen[v] = None;
            }
        }
        Ok(())
    }
    let mut chosen = vec![None; n];
    go(l, 0, 0, l.first().copied().unwrap_or(0), &mut chosen, &mut visit)
}

/// Number of quota choices, `n! / (∏ l(d)! · (n − Σ l)!)`.
pub fn quota_choice_count(n: usize, l: &[usize]) -> u128 {
    let mut left = n;
    let mut total = 1u128;
    for &c in l {
        if c > left {
            return 0;
        }
        total = total.saturating_mul(binomial(left, c));
        left -= c;
    }
    total
}

/// Lower-bounded solving through plain instances with constant relations pinning a
/// chosen `V_d` to each label `d`.
pub fn solve_with_constants<S>(inst: &Instance, l: &[usize], plain_solver: S, budget: &Budget) -> Result<Outcome>
where
    S: Fn(&Instance) -> Result<Outcome>,
{
    let dsize = inst.domain_size();
    if l.len() != dsize {
        return Err(Error::InvalidInput(format!("{} bounds for {} labels", l.len(), dsize)));
    }
    let plain = inst.with_mode(Mode::Plain)?;
    if l.iter().all(|&c| c == 0) {
        return plain_solver(&plain);
    }
    if l.iter().sum::<usize>() > inst.n() {
        return Ok(Outcome::Infeasible);
    }
    budget.check(quota_choice_count(inst.n(), l))?;
    let mut language = plain.language.clone();
    let mut names = Vec::with_capacity(dsize);
    for d in 0..dsize {
        let mut name = format!("rho_{d}");
        while language.get(&name).is_some() {
            name.insert(0, '_');
        }
        language.insert(name.clone(), WeightedRelation::constant(dsize, d))?;
        names.push(name);
    }
    let mut best = Best::default();
    for_each_quota_choice(inst.n(), l, |chosen| {
        let mut constraints = plain.constraints.clone();
        for (v, d) in chosen.iter().enumerate() {
            if let Some(d) = d {
                constraints.push(Constraint { weight: Rational::one(), relation: names[*d].clone(), scope: vec![v] });
            }
        }
        let augmented = Instance::new(plain.variables.clone(), language.clone(), constraints, Mode::Plain)?;
        if let Outcome::Optimal { value, assignments } = plain_solver(&augmented)? {
            for a in assignments {
                best.offer(&ExtRational::Finite(value.clone()), &a);
            }
        }
        Ok(())
    })?;
    Ok(match best.value {
        None => Outcome::Infeasible,
        Some(value) => Outcome::Optimal { value, assignments: best.argmin.into_iter().collect() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::minimal_alpha;
    use crate::setfn::{is_superadditive, KSetFunction};
    use crate::vcsp::cut_relation;
    use proptest::prelude::*;

    fn q(v: i64) -> ExtRational {
        ExtRational::from_int(v)
    }

    fn b() -> Budget {
        Budget::default()
    }

    fn r(v: i64) -> Rational {
        Rational::from_int(v)
    }

    #[test]
    fn seds_to_eds_examples() {
        let f = KSetFunction::from_labelling_fn(2, 1, |t| q([0, 2, 1][t[0]])).unwrap();
        let g = seds_to_eds(&f, &r(2)).unwrap();
        assert_eq!(g.eval(VertexSet::singleton(0)), q(1));
        let f1 = KSetFunction::from_labelling_fn(1, 2, |t| q((t[0] + 2 * t[1]) as i64)).unwrap();
        let g1 = seds_to_eds(&f1, &r(1)).unwrap();
        for x in VertexSet::full(2).subsets() {
            assert_eq!(g1.eval(x), f1.first_slot(x));
        }
        let zero = KSetFunction::from_labelling_fn(3, 2, |_| q(0)).unwrap();
        assert!(seds_to_eds(&zero, &r(3)).unwrap().values(&b()).unwrap().iter().all(|v| v.is_zero()));
    }

    #[test]
    fn sds_to_superadditive_examples() {
        let f = KSetFunction::from_labelling_fn(2, 1, |t| q(if t[0] > 0 { 7 } else { 0 })).unwrap();
        assert_eq!(sds_to_superadditive(&f, &r(1)).unwrap().eval(VertexSet::singleton(0)), q(7));
        let f = KSetFunction::from_labelling_fn(1, 2, |t| q(if t[0] == 1 { 8 } else { 0 })).unwrap();
        let g = sds_to_superadditive(&f, &r(2)).unwrap();
        assert_eq!(g.eval(VertexSet::singleton(0)), q(1));
        assert_eq!(g.eval(VertexSet::EMPTY), q(0));
        assert!(sds_to_superadditive(&f, &Rational::new(1, 2)).is_err());
    }

    fn unary_lang() -> Language {
        let g = WeightedRelation::from_values(2, 1, vec![q(0), q(1)]).unwrap();
        Language::with_relations(2, [("u", g)]).unwrap()
    }

    #[test]
    fn global_instance_examples() {
        let g = WeightedRelation::from_values(2, 1, vec![q(0), q(3)]).unwrap();
        let lang = Language::with_relations(2, [("u", g)]).unwrap();
        let c = Constraint { weight: r(2), relation: "u".into(), scope: vec![0] };
        let inst = Instance::anonymous(1, lang, vec![c], Mode::Plain).unwrap();
        let approx = approximate_constraints(&inst, SolverPath::Sds, &r(1)).unwrap();
        let h = build_global_instance(&inst, &[0, 0], &approx).unwrap();
        assert_eq!(h.f().eval(VertexSet::singleton(0)), q(6));
        assert!(h.graph().is_edgeless());

        // repeated scope (x, x) merges onto one vertex
        let sum = WeightedRelation::from_fn(2, 2, |t| q((t[0] + 2 * t[1]) as i64)).unwrap();
        let lang = Language::with_relations(2, [("s", sum)]).unwrap();
        let c = Constraint { weight: r(1), relation: "s".into(), scope: vec![1, 1] };
        let inst = Instance::anonymous(2, lang, vec![c], Mode::Plain).unwrap();
        let approx = approximate_constraints(&inst, SolverPath::Seds, &r(1)).unwrap();
        let h = build_global_instance(&inst, &[0, 0], &approx).unwrap();
        assert_eq!(h.f().eval(VertexSet::singleton(1)), approx[0].g.eval(VertexSet::full(2)));
        assert_eq!(h.f().eval(VertexSet::singleton(0)), q(0));
        assert!(build_global_instance(&inst, &[0, 0], &[]).is_err());
    }

    #[test]
    fn solver_examples() {
        let cons = (0..3).map(|v| Constraint { weight: r(1), relation: "u".into(), scope: vec![v] }).collect();
        let inst = Instance::anonymous(3, unary_lang(), cons, Mode::LowerBounded(vec![1, 1])).unwrap();
        let (plan, s) = solve_instance(&inst, true, &b()).unwrap();
        assert_eq!(plan.path, SolverPath::Sds);
        assert_eq!(s.value, q(1));
        assert_eq!(s.enumeration.unwrap().len(), 3);

        let over = inst.with_mode(Mode::LowerBounded(vec![2, 2])).unwrap();
        assert_eq!(solve_instance(&over, false, &b()).unwrap().1.value, ExtRational::Infinity);

        let cut = Language::with_relations(2, [("gcut", cut_relation(2))]).unwrap();
        let cons = vec![
            Constraint { weight: r(1), relation: "gcut".into(), scope: vec![0, 1] },
            Constraint { weight: r(1), relation: "gcut".into(), scope: vec![1, 2] },
        ];
        let path = Instance::anonymous(3, cut, cons, Mode::Surjective).unwrap();
        let (plan, s) = solve_instance(&path, true, &b()).unwrap();
        assert_eq!(plan.path, SolverPath::Seds);
        assert_eq!(s.value, q(1));
        assert_eq!(s.route, Route::FixReduction);
        assert_eq!(s.enumeration.unwrap(), vec![vec![0, 0, 1], vec![0, 1, 1], vec![1, 0, 0], vec![1, 1, 0]]);
        assert_eq!(brute_solve(&path, &b()).unwrap().value(), q(1));
    }

    #[test]
    fn recursive_fix_reports_every_zero_argmin() {
        let cons = vec![Constraint { weight: r(1), relation: "u".into(), scope: vec![0] }];
        let inst = Instance::anonymous(2, unary_lang(), cons, Mode::Plain).unwrap();
        let out = RecursiveFix { budget: b() }.solve(&inst).unwrap();
        assert_eq!(out, brute_solve(&inst, &b()).unwrap());
        assert_eq!(out, Outcome::Optimal { value: r(0), assignments: vec![vec![0, 0], vec![0, 1]] });
    }

    #[test]
    fn zero_optimum_uses_greedy_partition() {
        assert_eq!(greedy_partition(5, VertexSet::from_indices([0, 2, 3, 4]), &[0, 1, 2]), vec![1, 0, 2, 2, 2]);
        let g = WeightedRelation::from_values(3, 1, vec![q(0), q(5), q(5)]).unwrap();
        let lang = Language::with_relations(3, [("u", g)]).unwrap();
        let cons = vec![Constraint { weight: r(1), relation: "u".into(), scope: vec![0] }];
        let inst = Instance::anonymous(3, lang, cons, Mode::LowerBounded(vec![0, 1, 1])).unwrap();
        let (_, s) = solve_instance(&inst, false, &b()).unwrap();
        assert_eq!(s.route, Route::ZeroOptimum);
        assert_eq!(s.value, q(0));
        assert_eq!(s.assignment, Some(vec![0, 1, 2]));
    }

    #[test]
    fn constants_examples() {
        let cons = (0..3).map(|v| Constraint { weight: r(1), relation: "u".into(), scope: vec![v] }).collect();
        let inst = Instance::anonymous(3, unary_lang(), cons, Mode::Plain).unwrap();
        let solver = |i: &Instance| brute_solve(i, &b());
        assert_eq!(solve_with_constants(&inst, &[0, 0], solver, &b()).unwrap(), brute_solve(&inst, &b()).unwrap());
        let lb = inst.with_mode(Mode::LowerBounded(vec![1, 2])).unwrap();
        assert_eq!(solve_with_constants(&inst, &[1, 2], solver, &b()).unwrap(), brute_solve(&lb, &b()).unwrap());
        assert_eq!(quota_choice_count(3, &[1, 2]), 3);
        assert_eq!(quota_choice_count(9, &[1, 1, 1]), 504);
    }

    fn arb_ksetfn(max_k: usize, max_n: usize) -> impl Strategy<Value = KSetFunction> {
        (1..=max_k, 0..=max_n).prop_flat_map(|(k, n)| {
            let v = prop_oneof![6 => (0i64..6, 1i64..3).prop_map(|(a, b)| ExtRational::ratio(a, b)), 1 => Just(ExtRational::Infinity)];
            proptest::collection::vec(v, (k + 1).pow(n as u32)).prop_map(move |mut vals| {
                vals[0] = q(0);
                let rel = WeightedRelation::from_values(k + 1, n, vals).unwrap();
                relation_to_ksetfn(&rel).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn eds_construction_holds(f in arb_ksetfn(3, 4)) {
            let rel = f.to_relation();
            let a = minimal_alpha(&rel, ClassKind::Seds, &b()).unwrap().alpha;
            prop_assume!(a.is_finite());
            let alpha = a.finite().unwrap().clone();
            let g = seds_to_eds(&f, &alpha).unwrap();
            let eds_rel = WeightedRelation::from_values(2, f.n(), g.values(&b()).unwrap()).unwrap();
            prop_assert!(minimal_alpha(&eds_rel, ClassKind::Eds, &b()).unwrap().alpha <= ExtRational::Finite(alpha.clone()));
            let sq = ExtRational::Finite(&alpha * &alpha);
            prop_assert!(approximates(&g, &f, &sq, &b()).unwrap().holds());
        }

        #[test]
        fn superadditive_construction_holds(f in arb_ksetfn(3, 4)) {
            let rel = f.to_relation();
            let a = minimal_alpha(&rel, ClassKind::Sds, &b()).unwrap().alpha;
            prop_assume!(a.is_finite());
            let alpha = a.finite().unwrap().clone();
            let g = sds_to_superadditive(&f, &alpha).unwrap();
            prop_assert!(is_superadditive(&g, &b()).unwrap().holds());
            let approx = ConstraintApproximation::sds(&rel, &alpha).unwrap();
            prop_assert!(approx.verify(&rel, &b()).unwrap().holds());
        }
    }
}
