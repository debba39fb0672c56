//! Reduction from surjective instances over `Fix(Γ)` to surjective instances over a
//! SIM language `Γ` that is not SDS.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::classify::{language_class, ClassKind};
use crate::error::{Error, Result};
use crate::numeric::{ExtRational, Rational};
use crate::setfn::{for_each_labelling, label_classes, relation_to_ksetfn, sweep_size, Budget};
use crate::subset::VertexSet;
use crate::vcsp::{fix_relation, Constraint, Instance, Language, Mode, WeightedRelation};

/// `1 / (∏ distinct weight denominators · ∏ distinct finite-value denominators)`.
pub fn compute_epsilon(inst: &Instance) -> Rational {
    let mut weights: BTreeSet<BigInt> = BTreeSet::new();
    let mut values: BTreeSet<BigInt> = BTreeSet::new();
    for c in &inst.constraints {
        weights.insert(c.weight.denom());
        for v in inst.relation(c).values().iter().filter_map(ExtRational::finite) {
            values.insert(v.denom());
        }
    }
    let product: BigInt = weights.into_iter().chain(values).product();
    Rational::from_big(BigRational::new(BigInt::from(1), product))
}

/// Normalisation offset of the relation a constraint was pinned from, or the
/// constraint relation's minimum when it carries no provenance.
fn constraint_base(inst: &Instance, source: Option<&Language>, c: &Constraint) -> Rational {
    let from_source = source.and_then(|g| {
        let origin = inst.language.origin(&c.relation)?;
        let sigma = g.get(&origin.source)?;
        sigma.values()[0].finite().cloned()
    });
    from_source.unwrap_or_else(|| {
        inst.relation(c).values().iter().filter_map(ExtRational::finite).min().cloned().unwrap_or_default()
    })
}

/// `Σ w_i · (max finite γ_i − base_i)`, an upper bound on every finite normalised
/// assignment value. `source` supplies the bases through provenance.
pub fn compute_omega(inst: &Instance, source: Option<&Language>) -> Rational {
    let mut total = Rational::zero();
    for c in &inst.constraints {
        let Some(ExtRational::Finite(top)) = inst.relation(c).max_finite().cloned() else { continue };
        let spread = &top - &constraint_base(inst, source, c);
        total = &total + &(&c.weight * &spread);
    }
    total
}

/// `ν = ω / (least positive finite value of γ*) + 1`, or `1` without positive values.
/// `gamma_star` is taken in normalised form.
pub fn compute_nu(gamma_star: &[ExtRational], omega: &Rational) -> Rational {
    let least = gamma_star.iter().filter_map(ExtRational::finite).filter(|v| v.is_positive()).min();
    match least {
        Some(m) => &(omega / m) + &Rational::one(),
        None => Rational::one(),
    }
}

/// `(2|V|²·ω/ε)·α⁴`, at least 1.
pub fn gadget_threshold(n: usize, omega: &Rational, epsilon: &Rational, alpha: &Rational) -> Rational {
    let v2 = Rational::from_int(2 * (n as i64) * (n as i64));
    (&(&(&v2 * omega) / epsilon) * &alpha.pow(4)).max(Rational::one())
}

/// A relation violating the SDS inequality beyond a threshold, with its 3-ary view.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetWitness {
    pub relation: String,
    pub x_sets: Vec<VertexSet>,
    pub y_sets: Vec<VertexSet>,
    pub x: VertexSet,
    pub y: VertexSet,
    /// `γ*(a, b, c) = γ(s_{a,b,c})` over the full domain, raw values.
    pub gamma_star: Vec<ExtRational>,
    /// `γ(0^r)`.
    pub offset: Rational,
}

impl GadgetWitness {
    fn domain(&self) -> usize {
        (self.gamma_star.len() as f64).cbrt().round() as usize
    }

    /// Normalised `γ*(a, b, c)`.
    pub fn star(&self, a: usize, b: usize, c: usize) -> ExtRational {
        let d = self.domain();
        match &self.gamma_star[(a * d + b) * d + c] {
            ExtRational::Finite(v) => ExtRational::Finite(v - &self.offset),
            ExtRational::Infinity => ExtRational::Infinity,
        }
    }

    /// Scope `s_{u,v,w}` of a γ*-term on variables `u`, `v`, `w`.
    pub fn scope(&self, arity: usize, u: usize, v: usize, w: usize) -> Vec<usize> {
        (0..arity)
            .map(|i| {
                if self.x.contains(i) {
                    u
                } else if self.y.contains(i) {
                    v
                } else {
                    w
                }
            })
            .collect()
    }

    fn normalised_star(&self) -> Vec<ExtRational> {
        let d = self.domain();
        let mut out = Vec::with_capacity(self.gamma_star.len());
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    out.push(self.star(a, b, c));
                }
            }
        }
        out
    }
}

fn gamma_star(gamma: &WeightedRelation, x: VertexSet, y: VertexSet) -> Vec<ExtRational> {
    let d = gamma.domain_size();
    let mut out = Vec::with_capacity(d * d * d);
    for_each_labelling(3, d, |abc| {
        let t: Vec<usize> = (0..gamma.arity())
            .map(|i| if x.contains(i) { abc[0] } else if y.contains(i) { abc[1] } else { abc[2] })
            .collect();
        out.push(gamma.value(&t).clone());
        true
    });
    out
}

/// First relation (in name order) and disjoint tuples with `f(X) > threshold · f(X ∪ Y)`.
pub fn find_sds_violation(lang: &Language, threshold: &Rational, budget: &Budget) -> Result<Option<GadgetWitness>> {
    let bound = ExtRational::Finite(threshold.clone());
    for (name, gamma) in lang.iter() {
        let f = relation_to_ksetfn(gamma)?;
        let (k, r) = (f.k(), f.n());
        budget.check(sweep_size(2 * k + 1, r))?;
        let mut found = None;
        let mut xs = vec![0usize; r];
        let mut union = vec![0usize; r];
        for_each_labelling(r, 2 * k + 1, |labels| {
            for i in 0..r {
                let l = labels[i];
                xs[i] = if l <= k { l } else { 0 };
                union[i] = if l <= k { l } else { l - k };
            }
            let lhs = f.eval_labels(&xs);
            let rhs = f.eval_labels(&union);
            let violated = match bound.checked_mul(&rhs) {
                Ok(scaled) => lhs > scaled,
                Err(_) => false,
            };
            if violated {
                let ys: Vec<usize> = labels.iter().map(|&l| l.saturating_sub(k)).collect();
                found = Some((label_classes(&xs, k), label_classes(&ys, k)));
                return false;
            }
            true
        });
        if let Some((x_sets, y_sets)) = found {
            let x = x_sets.iter().fold(VertexSet::EMPTY, |a, &s| a | s);
            let y = y_sets.iter().fold(VertexSet::EMPTY, |a, &s| a | s);
            return Ok(Some(GadgetWitness {
                relation: name.clone(),
                x_sets,
                y_sets,
                x,
                y,
                gamma_star: gamma_star(gamma, x, y),
                offset: f.offset().clone(),
            }));
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GadgetCase {
    #[serde(rename = "1")]
    Case1,
    #[serde(rename = "2")]
    Case2,
}

#[derive(Clone, Debug)]
pub struct GadgetInstance {
    /// Surjective instance over `Γ` on the variables of `I` followed by `z`.
    pub instance: Instance,
    pub case: GadgetCase,
    pub witness: GadgetWitness,
    pub epsilon: Rational,
    pub omega: Rational,
    pub nu: Rational,
    /// Constant contributed by the offsets of the γ*-terms; subtract it before
    /// comparing optima with `I`.
    pub shift: Rational,
    /// `ε/2` slack applies (Case 2 only).
    pub slack: bool,
}

impl GadgetInstance {
    pub fn z(&self) -> usize {
        self.instance.n() - 1
    }

    /// Sidecar: `{"case", "witness", "epsilon", "omega", "nu", "shift"}`.
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "case": match self.case { GadgetCase::Case1 => 1, GadgetCase::Case2 => 2 },
            "witness": self.witness,
            "epsilon": self.epsilon,
            "omega": self.omega,
            "nu": self.nu,
            "shift": self.shift,
            "slack": self.slack,
        })
    }
}

/// The threshold and a violating witness for `I`, using the language's SIM factor.
pub fn prepare_witness(inst: &Instance, gamma: &Language, budget: &Budget) -> Result<Option<GadgetWitness>> {
    let sim = language_class(gamma, ClassKind::Sim, budget)?;
    let alpha = sim
        .alpha
        .finite()
        .cloned()
        .ok_or_else(|| Error::Precondition("the language is not SIM".into()))?;
    let eps = compute_epsilon(inst);
    let omega = compute_omega(inst, Some(gamma));
    find_sds_violation(gamma, &gadget_threshold(inst.n(), &omega, &eps, &alpha), budget)
}

/// Builds `I′` (when `γ*(1,1,1) = 0`) or `I*` from an instance over `Fix(Γ)`.
pub fn build_gadget_instance(inst: &Instance, gamma: &Language, witness: &GadgetWitness) -> Result<GadgetInstance> {
    let dom = gamma.domain_size();
    if dom < 3 {
        return Err(Error::Domain("the gadget needs at least three labels".into()));
    }
    if inst.domain_size() != dom - 1 {
        return Err(Error::Domain(format!("instance has {} labels, expected {}", inst.domain_size(), dom - 1)));
    }
    let rel = gamma
        .get(&witness.relation)
        .ok_or_else(|| Error::InvalidInput(format!("witness relation {:?} not in the language", witness.relation)))?;
    if gamma_star(rel, witness.x, witness.y) != witness.gamma_star
        || witness.x.is_empty()
        || !witness.x.is_disjoint(witness.y)
        || witness.domain() != dom
    {
        return Err(Error::InvalidInput("witness inconsistent with the language".into()));
    }
    let n = inst.n();
    let z = n;
    let eps = compute_epsilon(inst);
    let omega = compute_omega(inst, Some(gamma));
    let nu = compute_nu(&witness.normalised_star(), &omega);
    let offset = &witness.offset;
    let ar = rel.arity();

    let mut constraints = Vec::new();
    for c in &inst.constraints {
        let origin = inst.language.origin(&c.relation).ok_or_else(|| Error::MissingProvenance(c.relation.clone()))?;
        let sigma = gamma.get(&origin.source).ok_or_else(|| Error::MissingProvenance(origin.source.clone()))?;
        let pinned = VertexSet::from_indices(origin.pinned.iter().copied());
        if fix_relation(sigma, pinned)? != *inst.relation(c) {
            return Err(Error::InvalidInput(format!("provenance of {:?} does not reproduce it", c.relation)));
        }
        let mut free = c.scope.iter();
        let scope = (0..sigma.arity())
            .map(|p| if pinned.contains(p) { z } else { *free.next().expect("arity matches") })
            .collect();
        constraints.push(Constraint { weight: c.weight.clone(), relation: origin.source.clone(), scope });
    }

    let n2 = Rational::from_int((n * n) as i64);
    let (case, shift, slack) = if witness.star(1, 1, 1).is_zero() {
        for u in 0..n {
            for v in 0..n {
                constraints.push(Constraint {
                    weight: nu.clone(),
                    relation: witness.relation.clone(),
                    scope: witness.scope(ar, u, v, v),
                });
            }
        }
        (GadgetCase::Case1, &(&nu * &n2) * offset, false)
    } else {
        constraints.push(Constraint { weight: nu.clone(), relation: witness.relation.clone(), scope: vec![z; ar] });
        let mut top = Rational::zero();
        for a in 1..dom {
            for b in 1..dom {
                match witness.star(a, b, 0) {
                    ExtRational::Finite(v) => top = top.max(v),
                    ExtRational::Infinity => {
                        return Err(Error::InvalidInput("witness has an infinite γ*(a, b, 0)".into()))
                    }
                }
            }
        }
        // with M = 0 the pair terms vanish on D*-assignments and only need to exceed ω elsewhere
        let coeff = if top.is_zero() { nu.clone() } else { &eps / &(&(&Rational::from_int(2) * &n2) * &top) };
        for u in 0..n {
            for v in 0..n {
                constraints.push(Constraint {
                    weight: coeff.clone(),
                    relation: witness.relation.clone(),
                    scope: witness.scope(ar, u, v, z),
                });
            }
        }
        let shift = &(&nu * offset) + &(&(&coeff * &n2) * offset);
        (GadgetCase::Case2, shift, true)
    };
    let mut variables = inst.variables.clone();
    let mut zname = "z".to_string();
    while variables.contains(&zname) {
        zname.push('\'');
    }
    variables.push(zname);
    let instance = Instance::new(variables, gamma.clone(), constraints, Mode::Surjective)?;
    Ok(GadgetInstance { instance, case, witness: witness.clone(), epsilon: eps, omega, nu, shift, slack })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vcsp::{brute_solve, cut_relation, fix_language, Outcome};

    fn q(v: i64) -> ExtRational {
        ExtRational::from_int(v)
    }

    fn b() -> Budget {
        Budget::default()
    }

    fn single(rel: WeightedRelation, weight: Rational) -> Instance {
        let domain = rel.domain_size();
        let lang = Language::with_relations(domain, [("g", rel.clone())]).unwrap();
        let c = Constraint { weight, relation: "g".into(), scope: (0..rel.arity()).collect() };
        Instance::anonymous(rel.arity(), lang, vec![c], Mode::Plain).unwrap()
    }

    #[test]
    fn epsilon_examples() {
        let ints = WeightedRelation::from_values(2, 1, vec![q(0), q(3)]).unwrap();
        assert_eq!(compute_epsilon(&single(ints.clone(), Rational::from_int(2))), Rational::one());
        let half = WeightedRelation::from_values(2, 1, vec![q(0), ExtRational::ratio(1, 2)]).unwrap();
        assert_eq!(compute_epsilon(&single(half, Rational::new(1, 3))), Rational::new(1, 6));
        let zero = WeightedRelation::from_values(2, 1, vec![q(0), q(0)]).unwrap();
        assert_eq!(compute_epsilon(&single(zero, Rational::one())), Rational::one());
    }

    #[test]
    fn omega_and_nu_examples() {
        let empty = Instance::anonymous(2, Language::new(2), vec![], Mode::Plain).unwrap();
        assert_eq!(compute_omega(&empty, None), Rational::zero());
        let r = WeightedRelation::from_values(2, 1, vec![q(0), q(3)]).unwrap();
        assert_eq!(compute_omega(&single(r, Rational::from_int(2)), None), Rational::from_int(6));
        let rho = WeightedRelation::constant(2, 0);
        assert_eq!(compute_omega(&single(rho, Rational::one()), None), Rational::zero());

        let star = vec![q(0), q(2), q(5), ExtRational::Infinity];
        assert_eq!(compute_nu(&star, &Rational::from_int(6)), Rational::from_int(4));
        assert_eq!(compute_nu(&[q(0), ExtRational::Infinity], &Rational::from_int(6)), Rational::one());
        assert_eq!(compute_nu(&star, &Rational::zero()), Rational::one());
    }

    #[test]
    fn violation_examples() {
        let cut = Language::with_relations(2, [("gcut", cut_relation(2))]).unwrap();
        let w = find_sds_violation(&cut, &Rational::from_int(1_000_000), &b()).unwrap().unwrap();
        assert_eq!(w.x, VertexSet::singleton(0));
        assert_eq!(w.y, VertexSet::singleton(1));
        let inc = WeightedRelation::from_fn(3, 2, |t| q(t.iter().filter(|&&x| x != 0).count() as i64)).unwrap();
        let sds = Language::with_relations(3, [("inc", inc)]).unwrap();
        let alpha = language_class(&sds, ClassKind::Sds, &b()).unwrap().alpha;
        assert!(find_sds_violation(&sds, alpha.finite().unwrap(), &b()).unwrap().is_none());
        assert!(find_sds_violation(&Language::new(3), &Rational::one(), &b()).unwrap().is_none());
    }

    /// Exactly one non-zero label: SIM, not SDS, and `γ*(1,1,1) = 0`.
    fn one_nonzero() -> Language {
        let g = WeightedRelation::from_fn(3, 2, |t| q(i64::from(t.iter().filter(|&&x| x != 0).count() == 1))).unwrap();
        Language::with_relations(3, [("one", g)]).unwrap()
    }

    /// Odd support size, doubled when label 2 occurs: SIM, not SDS, `γ*(1,1,1) > 0`.
    fn parity() -> Language {
        let g = WeightedRelation::from_fn(3, 3, |t| {
            let s = t.iter().filter(|&&x| x != 0).count() as i64;
            q((s % 2) * (1 + i64::from(t.contains(&2))))
        })
        .unwrap();
        Language::with_relations(3, [("par", g)]).unwrap()
    }

    fn fix_instance(gamma: &Language, n: usize, cons: &[(&str, Vec<usize>, i64)]) -> Instance {
        let fixed = fix_language(gamma).unwrap();
        let constraints = cons
            .iter()
            .map(|(name, scope, w)| Constraint { weight: Rational::from_int(*w), relation: (*name).into(), scope: scope.clone() })
            .collect();
        Instance::anonymous(n, fixed, constraints, Mode::Surjective).unwrap()
    }

    fn check_sound(inst: &Instance, gamma: &Language, expect: GadgetCase) {
        let w = prepare_witness(inst, gamma, &b()).unwrap().expect("not SDS");
        let g = build_gadget_instance(inst, gamma, &w).unwrap();
        assert_eq!(g.case, expect);
        let base = brute_solve(inst, &b()).unwrap();
        let lifted = brute_solve(&g.instance, &b()).unwrap();
        match (&base, &lifted) {
            (Outcome::Optimal { value: a, assignments: opt_i }, Outcome::Optimal { value: b2, assignments }) => {
                let shifted = b2 - &g.shift;
                if g.slack {
                    assert!(*a <= shifted && shifted <= a + &(&g.epsilon / &Rational::from_int(2)));
                } else {
                    assert_eq!(shifted, *a);
                }
                for asg in assignments {
                    assert_eq!(asg[g.z()], 0);
                    let restricted: Vec<usize> = asg[..inst.n()].iter().map(|&l| l - 1).collect();
                    assert!(opt_i.contains(&restricted));
                }
            }
            (Outcome::Infeasible, Outcome::Optimal { value, .. }) => {
                assert!((value - &g.shift) > g.omega);
            }
            (Outcome::Infeasible, Outcome::Infeasible) => {}
            other => panic!("mismatch {other:?}"),
        }
    }

    #[test]
    fn case_one_toy() {
        let gamma = one_nonzero();
        let inst = fix_instance(&gamma, 2, &[("one@{}", vec![0, 1], 1), ("one@{0}", vec![1], 2)]);
        check_sound(&inst, &gamma, GadgetCase::Case1);
    }

    #[test]
    fn case_two_toy() {
        let gamma = parity();
        let inst = fix_instance(&gamma, 3, &[("par@{}", vec![0, 1, 2], 1), ("par@{0}", vec![1, 2], 2), ("par@{0,1}", vec![0], 1)]);
        check_sound(&inst, &gamma, GadgetCase::Case2);
    }

    #[test]
    fn infeasible_instance_exceeds_omega() {
        let mut gamma = one_nonzero();
        let hard = WeightedRelation::from_fn(3, 2, |t| {
            if t[0] != 0 && t[1] != 0 {
                ExtRational::Infinity
            } else {
                q(i64::from(t.iter().filter(|&&x| x != 0).count() == 1))
            }
        })
        .unwrap();
        gamma.insert("hard", hard).unwrap();
        // no finite assignment keeps both variables non-zero
        let inst = fix_instance(&gamma, 2, &[("hard@{}", vec![0, 1], 1)]);
        assert_eq!(brute_solve(&inst, &b()).unwrap(), Outcome::Infeasible);
        check_sound(&inst, &gamma, GadgetCase::Case1);
    }

    #[test]
    fn provenance_is_required() {
        let gamma = one_nonzero();
        let inst = fix_instance(&gamma, 2, &[("one@{}", vec![0, 1], 1)]);
        let w = prepare_witness(&inst, &gamma, &b()).unwrap().unwrap();
        let mut bare = inst.clone();
        let mut lang = Language::new(2);
        for (name, r) in inst.language.iter() {
            lang.insert(name.clone(), r.clone()).unwrap();
        }
        bare.language = lang;
        assert!(matches!(build_gadget_instance(&bare, &gamma, &w), Err(Error::MissingProvenance(_))));
    }
}
