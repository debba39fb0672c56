//! Weighted relations, languages and VCSP instances with the brute-force solver.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{ExtRational, Rational};
use crate::setfn::{for_each_labelling, sweep_size, Budget};
use crate::subset::VertexSet;

/// Default arity cap for languages.
pub const MAX_ARITY: usize = 12;

/// Default cap on assignments visited by [`brute_solve`].
pub const BRUTE_LIMIT: u64 = 1 << 24;

/// A function `D^r → Q ∪ {∞}` stored as a row-major table, first position most significant.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WeightedRelation {
    domain: usize,
    arity: usize,
    values: Vec<ExtRational>,
}

impl WeightedRelation {
    pub fn from_values(domain: usize, arity: usize, values: Vec<ExtRational>) -> Result<Self> {
        if domain == 0 {
            return Err(Error::Domain("empty domain".into()));
        }
        if arity > MAX_ARITY {
            return Err(Error::InvalidInput(format!("arity {arity} exceeds the cap {MAX_ARITY}")));
        }
        let len = sweep_size(domain, arity);
        if values.len() as u128 != len {
            return Err(Error::InvalidInput(format!(
                "relation of arity {arity} over {domain} labels needs {len} values, got {}",
                values.len()
            )));
        }
        Ok(WeightedRelation { domain, arity, values })
    }

    pub fn from_fn<F>(domain: usize, arity: usize, mut value: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> ExtRational,
    {
        let mut values = Vec::new();
        for_each_labelling(arity, domain, |t| {
            values.push(value(t));
            true
        });
        WeightedRelation::from_values(domain, arity, values)
    }

    /// `ρ_d`: 0 on label `d`, `∞` elsewhere.
    pub fn constant(domain: usize, d: usize) -> Self {
        WeightedRelation::from_fn(domain, 1, |t| {
            if t[0] == d {
                ExtRational::zero()
            } else {
                ExtRational::Infinity
            }
        })
        .expect("unary relation")
    }

    pub fn domain_size(&self) -> usize {
        self.domain
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &[ExtRational] {
        &self.values
    }

    pub fn index_of(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0usize, |acc, &x| acc * self.domain + x)
    }

    pub fn tuple_of(&self, mut idx: usize) -> Vec<usize> {
        let mut t = vec![0usize; self.arity];
        for slot in t.iter_mut().rev() {
            *slot = idx % self.domain;
            idx /= self.domain;
        }
        t
    }

    pub fn value(&self, tuple: &[usize]) -> &ExtRational {
        &self.values[self.index_of(tuple)]
    }

    /// Largest finite value, if any.
    pub fn max_finite(&self) -> Option<&ExtRational> {
        self.values.iter().filter(|v| v.is_finite()).max()
    }
}

impl std::fmt::Debug for WeightedRelation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Relation(|D|={}, r={}, {:?})", self.domain, self.arity, self.values)
    }
}

/// Pins the positions in `pinned` to label 0 and restricts the rest to labels `1..`,
/// stored as `0..`.
pub fn fix_relation(gamma: &WeightedRelation, pinned: VertexSet) -> Result<WeightedRelation> {
    if gamma.domain < 2 {
        return Err(Error::Domain("pinning needs at least two labels".into()));
    }
    let free: Vec<usize> = (0..gamma.arity).filter(|&i| !pinned.contains(i)).collect();
    let mut full = vec![0usize; gamma.arity];
    WeightedRelation::from_fn(gamma.domain - 1, free.len(), |x| {
        for (slot, &pos) in free.iter().enumerate() {
            full[pos] = x[slot] + 1;
        }
        gamma.value(&full).clone()
    })
}

/// Where a relation of a reduced language came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Origin {
    pub source: String,
    pub pinned: Vec<usize>,
}

/// A finite set of named relations over a common domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Language {
    domain: usize,
    relations: BTreeMap<String, WeightedRelation>,
    origins: BTreeMap<String, Origin>,
}

impl Language {
    pub fn new(domain: usize) -> Self {
        Language { domain, relations: BTreeMap::new(), origins: BTreeMap::new() }
    }

    pub fn with_relations<I, S>(domain: usize, rels: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, WeightedRelation)>,
        S: Into<String>,
    {
        let mut l = Language::new(domain);
        for (name, r) in rels {
            l.insert(name, r)?;
        }
        Ok(l)
    }

    pub fn insert(&mut self, name: impl Into<String>, rel: WeightedRelation) -> Result<()> {
        let name = name.into();
        if rel.domain != self.domain {
            return Err(Error::Domain(format!(
                "relation {name:?} has {} labels, language has {}",
                rel.domain, self.domain
            )));
        }
        self.relations.insert(name, rel);
        Ok(())
    }

    pub fn set_origin(&mut self, name: &str, origin: Origin) {
        self.origins.insert(name.to_string(), origin);
    }

    pub fn origin(&self, name: &str) -> Option<&Origin> {
        self.origins.get(name)
    }

    pub fn domain_size(&self) -> usize {
        self.domain
    }

    pub fn get(&self, name: &str) -> Option<&WeightedRelation> {
        self.relations.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &WeightedRelation)> {
        self.relations.iter()
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn max_arity(&self) -> usize {
        self.relations.values().map(|r| r.arity).max().unwrap_or(0)
    }
}

/// `Fix(Γ)`: every relation pinned on every subset of its positions, deduplicated
/// by table. Names are `source@{positions}`.
pub fn fix_language(lang: &Language) -> Result<Language> {
    if lang.domain < 2 {
        return Err(Error::Domain("pinning needs at least two labels".into()));
    }
    let mut out = Language::new(lang.domain - 1);
    let mut seen: Vec<WeightedRelation> = Vec::new();
    for (name, gamma) in &lang.relations {
        for pinned in VertexSet::full(gamma.arity).subsets() {
            let fixed = fix_relation(gamma, pinned)?;
            if seen.contains(&fixed) {
                continue;
            }
            let positions = pinned.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
            let fixed_name = format!("{name}@{{{positions}}}");
            seen.push(fixed.clone());
            out.insert(fixed_name.clone(), fixed)?;
            out.set_origin(&fixed_name, Origin { source: name.clone(), pinned: pinned.to_vec() });
        }
    }
    Ok(out)
}

/// Swaps labels 0 and 1 in every table.
pub fn negate_relation(gamma: &WeightedRelation) -> Result<WeightedRelation> {
    if gamma.domain != 2 {
        return Err(Error::Domain(format!("negation needs a Boolean domain, got {}", gamma.domain)));
    }
    WeightedRelation::from_fn(2, gamma.arity, |t| {
        let flipped: Vec<usize> = t.iter().map(|&x| 1 - x).collect();
        gamma.value(&flipped).clone()
    })
}

pub fn negate_language(lang: &Language) -> Result<Language> {
    if lang.domain != 2 {
        return Err(Error::Domain(format!("negation needs a Boolean domain, got {}", lang.domain)));
    }
    let mut out = Language::new(2);
    for (name, r) in &lang.relations {
        out.insert(name.clone(), negate_relation(r)?)?;
    }
    Ok(out)
}

/// Binary `[x ≠ y]` over `domain` labels.
pub fn cut_relation(domain: usize) -> WeightedRelation {
    WeightedRelation::from_fn(domain, 2, |t| ExtRational::from_int(i64::from(t[0] != t[1]))).expect("binary relation")
}

/// The r-terminal cut language on labels `1..=r`, stored as `0..r`: `gcut` plus
/// `rho_1 … rho_r`.
pub fn make_rcut_language(r: usize) -> Result<Language> {
    if r < 2 {
        return Err(Error::Domain(format!("r-cut needs r >= 2, got {r}")));
    }
    let mut l = Language::new(r);
    l.insert("gcut", cut_relation(r))?;
    for d in 1..=r {
        l.insert(format!("rho_{d}"), WeightedRelation::constant(r, d - 1))?;
    }
    Ok(l)
}

/// One weighted application of a relation to a scope.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub weight: Rational,
    pub relation: String,
    pub scope: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    Plain,
    Surjective,
    /// Minimum number of occurrences per label.
    LowerBounded(Vec<usize>),
}

impl Mode {
    pub fn bounds(&self, domain: usize) -> Vec<usize> {
        match self {
            Mode::Plain => vec![0; domain],
            Mode::Surjective => vec![1; domain],
            Mode::LowerBounded(l) => l.clone(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Plain => "plain",
            Mode::Surjective => "surjective",
            Mode::LowerBounded(_) => "lower-bounded",
        }
    }
}

pub fn meets_bounds(labels: &[usize], bounds: &[usize]) -> bool {
    let mut counts = vec![0usize; bounds.len()];
    for &x in labels {
        counts[x] += 1;
    }
    counts.iter().zip(bounds).all(|(c, l)| c >= l)
}

/// A VCSP instance over a language.
#[derive(Clone, Debug)]
pub struct Instance {
    pub variables: Vec<String>,
    pub language: Language,
    pub constraints: Vec<Constraint>,
    pub mode: Mode,
}

impl Instance {
    pub fn new(variables: Vec<String>, language: Language, constraints: Vec<Constraint>, mode: Mode) -> Result<Self> {
        let n = variables.len();
        for c in &constraints {
            let rel = language
                .get(&c.relation)
                .ok_or_else(|| Error::InvalidInput(format!("unknown relation {:?}", c.relation)))?;
            if rel.arity != c.scope.len() {
                return Err(Error::InvalidInput(format!(
                    "relation {:?} has arity {}, scope has {} variables",
                    c.relation,
                    rel.arity,
                    c.scope.len()
                )));
            }
            if let Some(&v) = c.scope.iter().find(|&&v| v >= n) {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            if c.weight.is_negative() {
                return Err(Error::InvalidInput(format!("negative weight on {:?}", c.relation)));
            }
        }
        if let Mode::LowerBounded(l) = &mode {
            if l.len() != language.domain {
                return Err(Error::InvalidInput(format!(
                    "{} bounds given for {} labels",
                    l.len(),
                    language.domain
                )));
            }
        }
        Ok(Instance { variables, language, constraints, mode })
    }

    /// Anonymous variables `x0 … x{n-1}`.
    pub fn anonymous(n: usize, language: Language, constraints: Vec<Constraint>, mode: Mode) -> Result<Self> {
        Instance::new((0..n).map(|i| format!("x{i}")).collect(), language, constraints, mode)
    }

    pub fn n(&self) -> usize {
        self.variables.len()
    }

    pub fn domain_size(&self) -> usize {
        self.language.domain
    }

    pub fn with_mode(&self, mode: Mode) -> Result<Self> {
        Instance::new(self.variables.clone(), self.language.clone(), self.constraints.clone(), mode)
    }

    pub fn relation(&self, c: &Constraint) -> &WeightedRelation {
        self.language.get(&c.relation).expect("validated on construction")
    }

    /// `φ_I(s)`, ignoring the mode.
    pub fn objective(&self, labels: &[usize]) -> ExtRational {
        let mut total = ExtRational::zero();
        let mut tuple = Vec::new();
        for c in &self.constraints {
            if c.weight.is_zero() {
                continue;
            }
            tuple.clear();
            tuple.extend(c.scope.iter().map(|&v| labels[v]));
            let v = self.relation(c).value(&tuple);
            total += v.scale(&c.weight).expect("positive weight");
            if total.is_infinite() {
                break;
            }
        }
        total
    }

    /// `φ_I(s)` for a mode-feasible assignment.
    pub fn evaluate(&self, labels: &[usize]) -> Result<ExtRational> {
        if labels.len() != self.n() {
            return Err(Error::InvalidInput(format!("assignment has {} labels for {} variables", labels.len(), self.n())));
        }
        if let Some(&x) = labels.iter().find(|&&x| x >= self.domain_size()) {
            return Err(Error::InvalidInput(format!("label {x} out of range")));
        }
        if !meets_bounds(labels, &self.mode.bounds(self.domain_size())) {
            return Err(Error::Mode(self.mode.name().into()));
        }
        Ok(self.objective(labels))
    }

    /// `Σ w_i γ_i(0^{r_i})`, or `None` if some constraint is infinite there.
    pub fn zero_offset(&self) -> Option<Rational> {
        let zeros = vec![0usize; self.n()];
        self.objective(&zeros).finite().cloned()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Optimal value and every optimal assignment in lexicographic order.
    Optimal { value: Rational, assignments: Vec<Vec<usize>> },
    Infeasible,
}

impl Outcome {
    pub fn value(&self) -> ExtRational {
        match self {
            Outcome::Optimal { value, .. } => ExtRational::Finite(value.clone()),
            Outcome::Infeasible => ExtRational::Infinity,
        }
    }
}

/// Exhaustive depth-first sweep of all mode-feasible assignments. An instance whose
/// every feasible assignment has value `∞` is reported as infeasible.
pub fn brute_solve(inst: &Instance, budget: &Budget) -> Result<Outcome> {
    let n = inst.n();
    let d = inst.domain_size();
    budget.check(sweep_size(d, n))?;
    let bounds = inst.mode.bounds(d);
    if bounds.iter().sum::<usize>() > n {
        return Ok(Outcome::Infeasible);
    }
    // constraints become evaluable once their last variable is assigned
    let mut due: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (i, c) in inst.constraints.iter().enumerate() {
        if c.weight.is_zero() {
            continue;
        }
        let last = c.scope.iter().map(|&v| v + 1).max().unwrap_or(0);
        due[last].push(i);
    }
    let mut search = Search {
        inst,
        bounds,
        due,
        labels: vec![0; n],
        counts: vec![0; d],
        best: None,
        argmin: Vec::new(),
        tuple: Vec::new(),
    };
    let base = search.settle(0, ExtRational::zero());
    if base.is_finite() {
        search.descend(0, base);
    }
    Ok(match search.best {
        Some(value) => Outcome::Optimal { value, assignments: search.argmin },
        None => Outcome::Infeasible,
    })
}

struct Search<'a> {
    inst: &'a Instance,
    bounds: Vec<usize>,
    due: Vec<Vec<usize>>,
    labels: Vec<usize>,
    counts: Vec<usize>,
    best: Option<Rational>,
    argmin: Vec<Vec<usize>>,
    tuple: Vec<usize>,
}

impl Search<'_> {
    fn settle(&mut self, depth: usize, mut acc: ExtRational) -> ExtRational {
        for &i in &self.due[depth] {
            let c = &self.inst.constraints[i];
            self.tuple.clear();
            self.tuple.extend(c.scope.iter().map(|&v| self.labels[v]));
            acc += self.inst.relation(c).value(&self.tuple).scale(&c.weight).expect("positive weight");
            if acc.is_infinite() {
                break;
            }
        }
        acc
    }

    fn descend(&mut self, depth: usize, acc: ExtRational) {
        let n = self.labels.len();
        if depth == n {
            let value = acc.finite().expect("pruned on infinity").clone();
            match &self.best {
                Some(b) if *b < value => {}
                Some(b) if *b == value => self.argmin.push(self.labels.clone()),
                _ => {
                    self.best = Some(value);
                    self.argmin = vec![self.labels.clone()];
                }
            }
            return;
        }
        let remaining = n - depth - 1;
        for x in 0..self.counts.len() {
            self.labels[depth] = x;
            self.counts[x] += 1;
            let deficit: usize = self.counts.iter().zip(&self.bounds).map(|(c, l)| l.saturating_sub(*c)).sum();
            if deficit <= remaining {
                let next = self.settle(depth + 1, acc.clone());
                if next.is_finite() {
                    self.descend(depth + 1, next);
                }
            }
            self.counts[x] -= 1;
        }
        self.labels[depth] = 0;
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelationJson {
    pub arity: usize,
    pub values: Vec<ExtRational>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModeJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<usize>>,
}

impl From<&Mode> for ModeJson {
    fn from(m: &Mode) -> Self {
        match m {
            Mode::Plain => ModeJson { kind: "plain".into(), bounds: None },
            Mode::Surjective => ModeJson { kind: "surjective".into(), bounds: None },
            Mode::LowerBounded(l) => ModeJson { kind: "lower_bounded".into(), bounds: Some(l.clone()) },
        }
    }
}

impl TryFrom<ModeJson> for Mode {
    type Error = Error;
    fn try_from(m: ModeJson) -> Result<Mode> {
        match m.kind.as_str() {
            "plain" => Ok(Mode::Plain),
            "surjective" => Ok(Mode::Surjective),
            "lower_bounded" | "lower-bounded" => m
                .bounds
                .map(Mode::LowerBounded)
                .ok_or_else(|| Error::InvalidInput("lower_bounded mode needs bounds".into())),
            other => Err(Error::InvalidInput(format!("unknown mode {other:?}"))),
        }
    }
}

/// Language file; instance files parse as languages too.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LanguageJson {
    pub domain_size: usize,
    pub relations: BTreeMap<String, RelationJson>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<String, Origin>,
}

impl From<&Language> for LanguageJson {
    fn from(l: &Language) -> Self {
        LanguageJson {
            domain_size: l.domain,
            relations: l
                .relations
                .iter()
                .map(|(n, r)| (n.clone(), RelationJson { arity: r.arity, values: r.values.clone() }))
                .collect(),
            provenance: l.origins.clone(),
        }
    }
}

impl TryFrom<LanguageJson> for Language {
    type Error = Error;
    fn try_from(j: LanguageJson) -> Result<Language> {
        let mut l = Language::new(j.domain_size);
        for (name, r) in j.relations {
            l.insert(name, WeightedRelation::from_values(j.domain_size, r.arity, r.values)?)?;
        }
        for (name, o) in j.provenance {
            if l.get(&name).is_none() {
                return Err(Error::InvalidInput(format!("provenance for unknown relation {name:?}")));
            }
            l.set_origin(&name, o);
        }
        Ok(l)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceJson {
    pub domain_size: usize,
    pub variables: Vec<String>,
    pub relations: BTreeMap<String, RelationJson>,
    pub constraints: Vec<Constraint>,
    pub mode: ModeJson,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<String, Origin>,
}

impl From<&Instance> for InstanceJson {
    fn from(i: &Instance) -> Self {
        let lang = LanguageJson::from(&i.language);
        InstanceJson {
            domain_size: lang.domain_size,
            variables: i.variables.clone(),
            relations: lang.relations,
            constraints: i.constraints.clone(),
            mode: ModeJson::from(&i.mode),
            provenance: lang.provenance,
        }
    }
}

impl TryFrom<InstanceJson> for Instance {
    type Error = Error;
    fn try_from(j: InstanceJson) -> Result<Instance> {
        let language = Language::try_from(LanguageJson {
            domain_size: j.domain_size,
            relations: j.relations,
            provenance: j.provenance,
        })?;
        Instance::new(j.variables, language, j.constraints, Mode::try_from(j.mode)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(v: i64) -> ExtRational {
        ExtRational::from_int(v)
    }

    fn c(w: i64, rel: &str, scope: &[usize]) -> Constraint {
        Constraint { weight: Rational::from_int(w), relation: rel.into(), scope: scope.to_vec() }
    }

    fn bool_cut_lang() -> Language {
        Language::with_relations(2, [("gcut", cut_relation(2))]).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let empty = Instance::anonymous(2, bool_cut_lang(), vec![], Mode::Plain).unwrap();
        assert_eq!(empty.evaluate(&[0, 1]).unwrap(), q(0));
        let one = Instance::anonymous(2, bool_cut_lang(), vec![c(3, "gcut", &[0, 1])], Mode::Plain).unwrap();
        assert_eq!(one.evaluate(&[0, 1]).unwrap(), q(3));
        let rcut = make_rcut_language(2).unwrap();
        let pinned = Instance::anonymous(1, rcut, vec![c(1, "rho_1", &[0])], Mode::Plain).unwrap();
        assert_eq!(pinned.evaluate(&[1]).unwrap(), ExtRational::Infinity);
        assert_eq!(pinned.evaluate(&[0]).unwrap(), q(0));
    }

    #[test]
    fn zero_weight_removes_infinite_constraint() {
        let rcut = make_rcut_language(2).unwrap();
        let i = Instance::anonymous(1, rcut, vec![c(0, "rho_1", &[0])], Mode::Plain).unwrap();
        assert_eq!(i.evaluate(&[1]).unwrap(), q(0));
    }

    #[test]
    fn mode_violation_is_distinct_from_infinity() {
        let i = Instance::anonymous(2, bool_cut_lang(), vec![], Mode::Surjective).unwrap();
        assert!(matches!(i.evaluate(&[0, 0]), Err(Error::Mode(_))));
    }

    #[test]
    fn brute_examples() {
        let b = Budget::new(BRUTE_LIMIT);
        let i = Instance::anonymous(2, bool_cut_lang(), vec![], Mode::Surjective).unwrap();
        assert_eq!(
            brute_solve(&i, &b).unwrap(),
            Outcome::Optimal { value: Rational::zero(), assignments: vec![vec![0, 1], vec![1, 0]] }
        );
        let path = Instance::anonymous(
            3,
            make_rcut_language(2).unwrap(),
            vec![c(1, "gcut", &[0, 1]), c(1, "gcut", &[1, 2])],
            Mode::Surjective,
        )
        .unwrap();
        assert_eq!(brute_solve(&path, &b).unwrap().value(), q(1));
        let over = i.with_mode(Mode::LowerBounded(vec![2, 1])).unwrap();
        assert_eq!(brute_solve(&over, &b).unwrap(), Outcome::Infeasible);
    }

    #[test]
    fn fix_examples() {
        let g = cut_relation(2);
        let none = fix_relation(&g, VertexSet::EMPTY).unwrap();
        assert_eq!((none.domain_size(), none.arity(), none.values()), (1, 2, &[q(0)][..]));
        let all = fix_relation(&g, VertexSet::full(2)).unwrap();
        assert_eq!((all.arity(), all.values()), (0, &[q(0)][..]));
        let second = fix_relation(&g, VertexSet::singleton(1)).unwrap();
        assert_eq!((second.arity(), second.values()), (1, &[q(1)][..]));
    }

    #[test]
    fn fix_language_examples() {
        let unary = WeightedRelation::from_values(2, 1, vec![q(2), q(5)]).unwrap();
        let l = fix_language(&Language::with_relations(2, [("u", unary)]).unwrap()).unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(l.get("u@{}").unwrap().values(), &[q(5)]);
        assert_eq!(l.get("u@{0}").unwrap().values(), &[q(2)]);
        assert_eq!(l.origin("u@{0}").unwrap(), &Origin { source: "u".into(), pinned: vec![0] });

        let cut = fix_language(&bool_cut_lang()).unwrap();
        assert!(cut.len() <= 4);
        assert!(cut.iter().any(|(_, r)| r.arity() == 1 && r.values() == [q(1)]));

        let three = fix_language(&make_rcut_language(3).unwrap()).unwrap();
        assert_eq!(three.domain_size(), 2);
    }

    #[test]
    fn negation_examples() {
        let g = cut_relation(2);
        assert_eq!(negate_relation(&g).unwrap(), g);
        let rho0 = WeightedRelation::constant(2, 0);
        assert_eq!(negate_relation(&rho0).unwrap(), WeightedRelation::constant(2, 1));
        assert!(negate_relation(&cut_relation(3)).is_err());
    }

    #[test]
    fn rcut_language() {
        let l2 = make_rcut_language(2).unwrap();
        assert_eq!(l2.get("gcut").unwrap().values(), &[q(0), q(1), q(1), q(0)]);
        let rho1 = l2.get("rho_1").unwrap();
        assert_eq!(rho1.value(&[0]), &q(0));
        assert_eq!(rho1.value(&[1]), &ExtRational::Infinity);
        assert_eq!(make_rcut_language(3).unwrap().len(), 4);
        assert!(make_rcut_language(1).is_err());
    }

    #[test]
    fn instance_json_round_trip() {
        let i = Instance::anonymous(2, make_rcut_language(2).unwrap(), vec![c(2, "gcut", &[0, 1])], Mode::LowerBounded(vec![1, 1]))
            .unwrap();
        let text = serde_json::to_string(&InstanceJson::from(&i)).unwrap();
        let back = Instance::try_from(serde_json::from_str::<InstanceJson>(&text).unwrap()).unwrap();
        assert_eq!(back.mode, i.mode);
        assert_eq!(back.constraints, i.constraints);
        assert_eq!(back.language, i.language);
    }

    fn arb_relation() -> impl Strategy<Value = WeightedRelation> {
        (2usize..=3, 0usize..=4).prop_flat_map(|(d, r)| {
            let v = prop_oneof![4 => (0i64..6).prop_map(q), 1 => Just(ExtRational::Infinity)];
            proptest::collection::vec(v, d.pow(r as u32))
                .prop_map(move |vals| WeightedRelation::from_values(d, r, vals).unwrap())
        })
    }

    proptest! {
        #[test]
        fn pinning_composes(gamma in arb_relation(), first in any::<u64>(), second in any::<u64>()) {
            let r = gamma.arity();
            let u = VertexSet(first) & VertexSet::full(r);
            let survivors: Vec<usize> = (0..r).filter(|&i| !u.contains(i)).collect();
            let u2_local = VertexSet(second) & VertexSet::full(survivors.len());
            prop_assume!(gamma.domain_size() >= 3);
            let once = fix_relation(&gamma, u).unwrap();
            let twice = fix_relation(&once, u2_local).unwrap();
            // pinning to the reduced label 0 means pinning to original label 1
            let combined = u | u2_local.lift(&survivors);
            let direct = WeightedRelation::from_fn(gamma.domain_size() - 2, r - combined.len(), |x| {
                let mut full = vec![0usize; r];
                let mut it = x.iter();
                for (i, slot) in full.iter_mut().enumerate() {
                    *slot = if u.contains(i) { 0 } else if combined.contains(i) { 1 } else { it.next().unwrap() + 2 };
                }
                gamma.value(&full).clone()
            }).unwrap();
            prop_assert_eq!(twice, direct);
        }

        #[test]
        fn single_step_pinning_equals_union(gamma in arb_relation(), first in any::<u64>(), second in any::<u64>()) {
            let r = gamma.arity();
            let u = VertexSet(first) & VertexSet::full(r);
            let u2 = VertexSet(second) & VertexSet::full(r);
            let merged = fix_relation(&gamma, u | u2).unwrap();
            let direct = WeightedRelation::from_fn(gamma.domain_size() - 1, r - (u | u2).len(), |x| {
                let mut full = vec![0usize; r];
                let mut it = x.iter();
                for (i, slot) in full.iter_mut().enumerate() {
                    if !(u | u2).contains(i) {
                        *slot = it.next().unwrap() + 1;
                    }
                }
                gamma.value(&full).clone()
            }).unwrap();
            prop_assert_eq!(merged, direct);
        }

        #[test]
        fn evaluate_is_linear(ws in proptest::collection::vec(0i64..5, 3), scale in 0i64..4, labels in proptest::collection::vec(0usize..3, 4)) {
            let lang = make_rcut_language(3).unwrap();
            let mk = |k: i64| {
                let cs = vec![c(ws[0] * k, "gcut", &[0, 1]), c(ws[1] * k, "gcut", &[1, 2]), c(ws[2] * k, "gcut", &[2, 3])];
                Instance::anonymous(4, lang.clone(), cs, Mode::Plain).unwrap()
            };
            let base = mk(1).objective(&labels);
            let scaled = mk(scale).objective(&labels);
            prop_assert_eq!(scaled, base.scale(&Rational::from_int(scale)).unwrap());
        }
    }
}
