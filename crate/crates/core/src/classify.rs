//! Polymorphism and multimorphism checks, minimal approximation factors for the
//! EDS / SIM / SEDS / SDS classes, and the resulting tractability verdicts.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{ExtRational, Rational};
use crate::setfn::{for_each_labelling, label_classes, relation_to_ksetfn, sweep_size, Budget, Checked, KSetFunction};
use crate::subset::VertexSet;
use crate::vcsp::{fix_language, negate_language, Language, WeightedRelation};

/// An operation `D^s → D` stored as a table.
#[derive(Clone, PartialEq, Eq)]
pub struct Operation {
    name: String,
    domain: usize,
    arity: usize,
    table: Vec<usize>,
}

impl Operation {
    pub fn from_fn<F>(name: impl Into<String>, domain: usize, arity: usize, f: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> usize,
    {
        let mut table = Vec::new();
        let mut bad = None;
        for_each_labelling(arity, domain, |args| {
            let v = f(args);
            if v >= domain {
                bad = Some(v);
                return false;
            }
            table.push(v);
            true
        });
        if let Some(v) = bad {
            return Err(Error::Domain(format!("operation value {v} outside the domain")));
        }
        Ok(Operation { name: name.into(), domain, arity, table })
    }

    /// `c_d` of the given arity.
    pub fn constant(domain: usize, arity: usize, d: usize) -> Result<Self> {
        Operation::from_fn(format!("c{d}"), domain, arity, |_| d)
    }

    pub fn min(domain: usize) -> Self {
        Operation::from_fn("min", domain, 2, |a| a[0].min(a[1])).expect("closed")
    }

    pub fn max(domain: usize) -> Self {
        Operation::from_fn("max", domain, 2, |a| a[0].max(a[1])).expect("closed")
    }

    /// Boolean minority.
    pub fn minority() -> Self {
        Operation::from_fn("Mn", 2, 3, |a| a[0] ^ a[1] ^ a[2]).expect("closed")
    }

    /// Boolean majority.
    pub fn majority() -> Self {
        Operation::from_fn("Mj", 2, 3, |a| usize::from(a[0] + a[1] + a[2] >= 2)).expect("closed")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn apply(&self, args: &[usize]) -> usize {
        self.table[args.iter().fold(0usize, |acc, &x| acc * self.domain + x)]
    }

    /// Componentwise application to `s` tuples of equal length.
    pub fn apply_rows(&self, rows: &[&[usize]]) -> Vec<usize> {
        let r = rows.first().map_or(0, |t| t.len());
        let mut args = vec![0usize; self.arity];
        (0..r)
            .map(|j| {
                for (i, row) in rows.iter().enumerate() {
                    args[i] = row[j];
                }
                self.apply(&args)
            })
            .collect()
    }
}

impl fmt::Debug for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn check_operation(gamma: &WeightedRelation, o: &Operation) -> Result<()> {
    if o.domain != gamma.domain_size() {
        return Err(Error::Domain(format!(
            "operation {} is over {} labels, relation over {}",
            o.name,
            o.domain,
            gamma.domain_size()
        )));
    }
    Ok(())
}

/// Closure of the finite-valued tuples under `o`; the witness lists the argument tuples.
pub fn admits_polymorphism(gamma: &WeightedRelation, o: &Operation, budget: &Budget) -> Result<Checked<Vec<Vec<usize>>>> {
    check_operation(gamma, o)?;
    let finite: Vec<Vec<usize>> = (0..gamma.values().len())
        .filter(|&i| gamma.values()[i].is_finite())
        .map(|i| gamma.tuple_of(i))
        .collect();
    budget.check(sweep_size(finite.len(), o.arity))?;
    let mut out = Checked::Holds;
    if finite.is_empty() {
        return Ok(out);
    }
    for_each_labelling(o.arity, finite.len(), |pick| {
        let rows: Vec<&[usize]> = pick.iter().map(|&i| finite[i].as_slice()).collect();
        if gamma.value(&o.apply_rows(&rows)).is_infinite() {
            out = Checked::Violated(rows.iter().map(|r| r.to_vec()).collect());
            return false;
        }
        true
    });
    Ok(out)
}

/// `Σ γ(o_i(x_1, …, x_s)) ≤ Σ γ(x_i)` for all argument tuples.
pub fn admits_multimorphism(gamma: &WeightedRelation, ops: &[Operation], budget: &Budget) -> Result<Checked<Vec<Vec<usize>>>> {
    let s = ops.len();
    for o in ops {
        check_operation(gamma, o)?;
        if o.arity != s {
            return Err(Error::InvalidInput(format!("operation {} has arity {}, need {s}", o.name, o.arity)));
        }
    }
    let r = gamma.arity();
    budget.check(sweep_size(gamma.domain_size(), r * s))?;
    let mut out = Checked::Holds;
    for_each_labelling(r * s, gamma.domain_size(), |flat| {
        let rows: Vec<&[usize]> = flat.chunks(r.max(1)).take(s).collect();
        let rows: Vec<&[usize]> = if r == 0 { vec![&[][..]; s] } else { rows };
        let rhs: ExtRational = rows.iter().map(|x| gamma.value(x)).sum();
        if rhs.is_infinite() {
            return true;
        }
        let lhs: ExtRational = ops.iter().map(|o| gamma.value(&o.apply_rows(&rows)).clone()).sum();
        if lhs > rhs {
            out = Checked::Violated(rows.iter().map(|x| x.to_vec()).collect());
            return false;
        }
        true
    });
    Ok(out)
}

pub fn language_admits_multimorphism(lang: &Language, ops: &[Operation], budget: &Budget) -> Result<bool> {
    for (_, gamma) in lang.iter() {
        if !admits_multimorphism(gamma, ops, budget)?.holds() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassKind {
    #[serde(rename = "EDS")]
    Eds,
    #[serde(rename = "SIM")]
    Sim,
    #[serde(rename = "SEDS")]
    Seds,
    #[serde(rename = "SDS")]
    Sds,
}

impl ClassKind {
    pub const ALL: [ClassKind; 4] = [ClassKind::Eds, ClassKind::Sim, ClassKind::Seds, ClassKind::Sds];

    pub fn name(self) -> &'static str {
        match self {
            ClassKind::Eds => "EDS",
            ClassKind::Sim => "SIM",
            ClassKind::Seds => "SEDS",
            ClassKind::Sds => "SDS",
        }
    }
}

/// The binding instance of a class inequality `lhs ≤ α·rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// The relation does not correspond under normalisation to a k-set function.
    Normalisation { tuple: Vec<usize> },
    /// The class is only defined on a different domain size.
    Domain { size: usize },
    Pair { x: Vec<VertexSet>, y: Vec<VertexSet>, lhs: ExtRational, rhs: ExtRational },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class: ClassKind,
    pub alpha: ExtRational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl ClassReport {
    pub fn is_member(&self) -> bool {
        self.alpha.is_finite()
    }
}

/// Smallest `α` with `lhs ≤ α·rhs`; `None` when every `α` works.
pub fn required_ratio(lhs: &ExtRational, rhs: &ExtRational) -> Option<ExtRational> {
    if lhs.is_zero() || rhs.is_infinite() {
        return None;
    }
    if lhs.is_infinite() || rhs.is_zero() {
        return Some(ExtRational::Infinity);
    }
    let (l, r) = (lhs.finite().expect("finite"), rhs.finite().expect("finite"));
    Some(ExtRational::Finite(l / r))
}

/// Tracks the largest required ratio seen during a sweep.
struct Worst {
    ratio: Option<ExtRational>,
    witness: Option<Witness>,
}

impl Worst {
    fn new() -> Self {
        Worst { ratio: None, witness: None }
    }

    /// Returns `false` once the ratio is infinite so sweeps can stop.
    fn offer(&mut self, x: Vec<VertexSet>, y: Vec<VertexSet>, lhs: ExtRational, rhs: ExtRational) -> bool {
        if let Some(r) = required_ratio(&lhs, &rhs) {
            if self.ratio.as_ref().is_none_or(|cur| r > *cur) {
                self.ratio = Some(r);
                self.witness = Some(Witness::Pair { x, y, lhs, rhs });
            }
        }
        !self.ratio.as_ref().is_some_and(|r| r.is_infinite())
    }

    fn merge(mut self, other: Worst) -> Worst {
        if let Some(r) = other.ratio {
            if self.ratio.as_ref().is_none_or(|cur| r > *cur) {
                self.ratio = Some(r);
                self.witness = other.witness;
            }
        }
        self
    }

    fn infinite(&self) -> bool {
        self.ratio.as_ref().is_some_and(|r| r.is_infinite())
    }

    fn report(self, class: ClassKind) -> ClassReport {
        let one = ExtRational::one();
        match self.ratio {
            Some(r) if r >= one => ClassReport { class, alpha: r, relation: None, witness: self.witness },
            _ => ClassReport { class, alpha: one, relation: None, witness: None },
        }
    }
}

fn sim_worst(f: &KSetFunction, budget: &Budget) -> Result<Worst> {
    let (k, n) = (f.k(), f.n());
    budget.check(sweep_size(k + 1, n))?;
    // per support: largest and smallest value with their labellings
    let mut extremes: Vec<Option<((ExtRational, Vec<usize>), (ExtRational, Vec<usize>))>> = vec![None; 1usize << n];
    for_each_labelling(n, k + 1, |labels| {
        let v = f.eval_labels(labels);
        let s = crate::setfn::support(labels).0 as usize;
        match &mut extremes[s] {
            None => extremes[s] = Some(((v.clone(), labels.to_vec()), (v, labels.to_vec()))),
            Some((hi, lo)) => {
                if v > hi.0 {
                    *hi = (v.clone(), labels.to_vec());
                }
                if v < lo.0 {
                    *lo = (v, labels.to_vec());
                }
            }
        }
        true
    });
    let mut worst = Worst::new();
    for (hi, lo) in extremes.into_iter().flatten() {
        if !worst.offer(label_classes(&hi.1, k), label_classes(&lo.1, k), hi.0, lo.0) {
            break;
        }
    }
    Ok(worst)
}

fn eds_worst(f: &KSetFunction, budget: &Budget) -> Result<Worst> {
    let n = f.n();
    budget.check(sweep_size(4, n))?;
    let all = VertexSet::full(n);
    let vals: Vec<ExtRational> = all.subsets().map(|x| f.first_slot(x)).collect();
    let mut worst = Worst::new();
    'outer: for x in all.subsets() {
        for y in all.subsets() {
            let lhs = vals[(x - y).0 as usize].clone();
            let rhs = &vals[x.0 as usize] + &vals[y.0 as usize];
            if !worst.offer(vec![x], vec![y], lhs, rhs) {
                break 'outer;
            }
        }
    }
    Ok(worst)
}

fn seds_worst(f: &KSetFunction, budget: &Budget) -> Result<Worst> {
    let (k, n) = (f.k(), f.n());
    budget.check(sweep_size(k + 1, 2 * n))?;
    let mut worst = Worst::new();
    let mut diff = vec![0usize; n];
    for_each_labelling(2 * n, k + 1, |both| {
        let (x, y) = both.split_at(n);
        for i in 0..n {
            diff[i] = if x[i] == y[i] { 0 } else { x[i] };
        }
        let lhs = f.eval_labels(&diff);
        let rhs = f.eval_labels(x) + f.eval_labels(y);
        worst.offer(label_classes(x, k), label_classes(y, k), lhs, rhs)
    });
    Ok(worst)
}

fn sds_worst(f: &KSetFunction, budget: &Budget) -> Result<Worst> {
    let (k, n) = (f.k(), f.n());
    budget.check(sweep_size(2 * k + 1, n))?;
    let mut worst = Worst::new();
    // label d ≤ k marks X_d, label k + d marks Y_d
    let mut x = vec![0usize; n];
    let mut xy = vec![0usize; n];
    for_each_labelling(n, 2 * k + 1, |labels| {
        for i in 0..n {
            let l = labels[i];
            x[i] = if l <= k { l } else { 0 };
            xy[i] = if l <= k { l } else { l - k };
        }
        let ys: Vec<usize> = labels.iter().map(|&l| l.saturating_sub(k)).collect();
        worst.offer(label_classes(&x, k), label_classes(&ys, k), f.eval_labels(&x), f.eval_labels(&xy))
    });
    Ok(worst)
}

/// Minimal `α ≥ 1` for which `gamma` belongs to `class`, or `∞`.
pub fn minimal_alpha(gamma: &WeightedRelation, class: ClassKind, budget: &Budget) -> Result<ClassReport> {
    let f = match relation_to_ksetfn(gamma) {
        Ok(f) => f,
        Err(Error::Normalisation { witness }) => {
            return Ok(ClassReport {
                class,
                alpha: ExtRational::Infinity,
                relation: None,
                witness: Some(Witness::Normalisation { tuple: witness }),
            })
        }
        Err(e) => return Err(e),
    };
    let worst = match class {
        ClassKind::Eds => {
            if f.k() != 1 {
                return Ok(ClassReport {
                    class,
                    alpha: ExtRational::Infinity,
                    relation: None,
                    witness: Some(Witness::Domain { size: gamma.domain_size() }),
                });
            }
            eds_worst(&f, budget)?
        }
        ClassKind::Sim => sim_worst(&f, budget)?,
        ClassKind::Seds | ClassKind::Sds => {
            let sim = sim_worst(&f, budget)?;
            if sim.infinite() {
                sim
            } else if class == ClassKind::Seds {
                sim.merge(seds_worst(&f, budget)?)
            } else {
                sim.merge(sds_worst(&f, budget)?)
            }
        }
    };
    Ok(worst.report(class))
}

/// Largest per-relation minimal `α`; the report names the binding relation.
pub fn language_class(lang: &Language, class: ClassKind, budget: &Budget) -> Result<ClassReport> {
    let mut best = ClassReport { class, alpha: ExtRational::one(), relation: None, witness: None };
    for (name, gamma) in lang.iter() {
        let r = minimal_alpha(gamma, class, budget)?;
        if r.alpha > best.alpha {
            best = ClassReport { relation: Some(name.clone()), ..r };
            if best.alpha.is_infinite() {
                break;
            }
        }
    }
    Ok(best)
}

/// Why a Boolean language is tractable, in the order checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BooleanReason {
    #[serde(rename = "EDS")]
    Eds,
    #[serde(rename = "negated EDS")]
    NegatedEds,
    #[serde(rename = "<min,min>")]
    MinMin,
    #[serde(rename = "<max,max>")]
    MaxMax,
    #[serde(rename = "<min,max>")]
    MinMax,
    #[serde(rename = "<Mn,Mn,Mn>")]
    Minority,
    #[serde(rename = "<Mj,Mj,Mj>")]
    Majority,
    #[serde(rename = "<Mj,Mj,Mn>")]
    MajorityMinority,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "reason", rename_all = "snake_case")]
pub enum BooleanVerdict {
    GloballyTractable(BooleanReason),
    GloballyIntractable,
}

impl BooleanVerdict {
    pub fn is_tractable(&self) -> bool {
        matches!(self, BooleanVerdict::GloballyTractable(_))
    }
}

fn boolean_multimorphisms() -> Vec<(BooleanReason, Vec<Operation>)> {
    let (mn, mj) = (Operation::minority(), Operation::majority());
    vec![
        (BooleanReason::MinMin, vec![Operation::min(2), Operation::min(2)]),
        (BooleanReason::MaxMax, vec![Operation::max(2), Operation::max(2)]),
        (BooleanReason::MinMax, vec![Operation::min(2), Operation::max(2)]),
        (BooleanReason::Minority, vec![mn.clone(), mn.clone(), mn.clone()]),
        (BooleanReason::Majority, vec![mj.clone(), mj.clone(), mj.clone()]),
        (BooleanReason::MajorityMinority, vec![mj.clone(), mj, mn]),
    ]
}

/// Global s-tractability (equivalently ℓ-tractability) of a finite Boolean language.
pub fn classify_boolean(lang: &Language, budget: &Budget) -> Result<BooleanVerdict> {
    if lang.domain_size() != 2 {
        return Err(Error::Domain(format!("need a Boolean language, got {} labels", lang.domain_size())));
    }
    if language_class(lang, ClassKind::Eds, budget)?.is_member() {
        return Ok(BooleanVerdict::GloballyTractable(BooleanReason::Eds));
    }
    if language_class(&negate_language(lang)?, ClassKind::Eds, budget)?.is_member() {
        return Ok(BooleanVerdict::GloballyTractable(BooleanReason::NegatedEds));
    }
    for (reason, ops) in boolean_multimorphisms() {
        if language_admits_multimorphism(lang, &ops, budget)? {
            return Ok(BooleanVerdict::GloballyTractable(reason));
        }
    }
    Ok(BooleanVerdict::GloballyIntractable)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ThreeElementVerdict {
    /// Outside the scope of the three-element classification.
    NotSeds { report: ClassReport },
    LTractableSds { alpha: ExtRational },
    LTractableFixReduction { reason: BooleanReason },
    LIntractable,
}

/// Lower-bounded tractability of a SEDS language over three labels.
pub fn classify_three_element(lang: &Language, budget: &Budget) -> Result<ThreeElementVerdict> {
    if lang.domain_size() != 3 {
        return Err(Error::Domain(format!("need three labels, got {}", lang.domain_size())));
    }
    let seds = language_class(lang, ClassKind::Seds, budget)?;
    if !seds.is_member() {
        return Ok(ThreeElementVerdict::NotSeds { report: seds });
    }
    let sds = language_class(lang, ClassKind::Sds, budget)?;
    if sds.is_member() {
        return Ok(ThreeElementVerdict::LTractableSds { alpha: sds.alpha });
    }
    Ok(match classify_boolean(&fix_language(lang)?, budget)? {
        BooleanVerdict::GloballyTractable(reason) => ThreeElementVerdict::LTractableFixReduction { reason },
        BooleanVerdict::GloballyIntractable => ThreeElementVerdict::LIntractable,
    })
}

/// `⌈α⌉` as a positive integer, for finite `α ≥ 1`.
pub fn integer_alpha(alpha: &ExtRational) -> Result<u64> {
    let a = alpha
        .finite()
        .ok_or_else(|| Error::Precondition("language is not a member of the class".into()))?;
    let c = crate::numeric::ceil_u64(a).ok_or_else(|| Error::Precondition(format!("alpha {a} too large")))?;
    Ok(c.max(1))
}

/// `⌈α⌉` as a rational.
pub fn ceil_alpha(alpha: &ExtRational) -> Result<Rational> {
    Ok(Rational::from_int(integer_alpha(alpha)? as i64))
}
