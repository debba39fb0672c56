//! Seeded random instances for test corpora.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bgmc::BgmcInstance;
use crate::classify::{minimal_alpha, ClassKind};
use crate::error::Result;
use crate::graph::WeightedGraph;
use crate::numeric::{ExtRational, Rational};
use crate::setfn::{for_each_labelling, support, Budget, SetFunction};
use crate::subset::VertexSet;
use crate::vcsp::{fix_language, Constraint, Instance, Language, Mode, WeightedRelation};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `a/b` with `a ∈ [1, 6)`, `b ∈ [1, 3)`; `∞` with probability `inf`.
pub fn positive_weight<R: Rng>(rng: &mut R, inf: f64) -> ExtRational {
    if rng.gen_bool(inf) {
        ExtRational::Infinity
    } else {
        ExtRational::ratio(rng.gen_range(1..6), rng.gen_range(1..3))
    }
}

fn rational_weight<R: Rng>(rng: &mut R) -> Rational {
    Rational::new(rng.gen_range(1..5), rng.gen_range(1..3))
}

/// Random graph plus a superadditive generator function.
pub fn random_bgmc<R: Rng>(rng: &mut R, n: usize, q: usize, p: usize) -> Result<BgmcInstance> {
    let mut edges = Vec::new();
    let count = rng.gen_range(0..=2 * n);
    for _ in 0..count {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.push((u, v, positive_weight(rng, 0.08)));
        }
    }
    let mut terms = Vec::new();
    for _ in 0..rng.gen_range(0..=4) {
        let size = rng.gen_range(1..=n.min(4));
        let mut members: Vec<usize> = (0..n).collect();
        members.shuffle(rng);
        let s = VertexSet::from_indices(members.into_iter().take(size));
        let c = if rng.gen_bool(0.1) { ExtRational::Infinity } else { ExtRational::from_int(rng.gen_range(0..4)) };
        terms.push((s, c));
    }
    BgmcInstance::new_unchecked(WeightedGraph::new(n, edges)?, SetFunction::generator(n, terms)?, q, p)
}

/// Random increasing set function on `r` positions with `g(∅) = 0`.
fn increasing_support_values<R: Rng>(rng: &mut R, r: usize) -> Vec<ExtRational> {
    let terms: Vec<(VertexSet, ExtRational)> = (0..rng.gen_range(1..=3))
        .map(|_| {
            let s = VertexSet(rng.gen_range(1..1u64 << r.max(1)) & VertexSet::full(r).0);
            (s, if rng.gen_bool(0.1) { ExtRational::Infinity } else { ExtRational::from_int(rng.gen_range(1..4)) })
        })
        .filter(|(s, _)| !s.is_empty())
        .collect();
    VertexSet::full(r)
        .subsets()
        .map(|x| terms.iter().filter(|(s, _)| s.is_subset(x)).map(|(_, c)| c).sum())
        .collect()
}

/// `γ(t) = c + m(t)·g(supp t)` with multipliers `m ∈ {1, 3/2, 2}` and offset `c`.
fn lift_support_values<R: Rng>(rng: &mut R, domain: usize, r: usize, g: &[ExtRational]) -> Result<WeightedRelation> {
    let offset = if rng.gen_bool(0.25) { Rational::from_int(rng.gen_range(1..3)) } else { Rational::zero() };
    let mults = [Rational::one(), Rational::new(3, 2), Rational::from_int(2)];
    WeightedRelation::from_fn(domain, r, |t| {
        let base = &g[support(t).0 as usize];
        let m = if t.iter().all(|&x| x == 0) { Rational::one() } else { mults.choose(rng).expect("nonempty").clone() };
        match base.scale(&m) {
            Ok(v) => v + ExtRational::Finite(offset.clone()),
            Err(_) => ExtRational::Infinity,
        }
    })
}

/// Relation whose k-set function is 2-SIM and 2-SDS.
pub fn random_sds_relation<R: Rng>(rng: &mut R, domain: usize, arity: usize) -> Result<WeightedRelation> {
    let g = increasing_support_values(rng, arity);
    lift_support_values(rng, domain, arity, &g)
}

/// Relation that is 2-SIM but not SDS; arity at least 2.
pub fn random_sim_not_sds_relation<R: Rng>(rng: &mut R, domain: usize, arity: usize) -> Result<WeightedRelation> {
    let budget = Budget::default();
    let arity = arity.max(2);
    loop {
        let g: Vec<ExtRational> = VertexSet::full(arity)
            .subsets()
            .map(|x| {
                if x.is_empty() {
                    ExtRational::zero()
                } else if rng.gen_bool(0.1) {
                    ExtRational::Infinity
                } else {
                    ExtRational::from_int(rng.gen_range(0..3))
                }
            })
            .collect();
        let rel = lift_support_values(rng, domain, arity, &g)?;
        if minimal_alpha(&rel, ClassKind::Sds, &budget)?.alpha.is_infinite()
            && minimal_alpha(&rel, ClassKind::Sim, &budget)?.alpha.is_finite()
        {
            return Ok(rel);
        }
    }
}

/// Uniform table over `{0, 1/2, 1, …, 5/2, ∞}` with `γ(0^r) = 0`.
pub fn random_relation<R: Rng>(rng: &mut R, domain: usize, arity: usize) -> Result<WeightedRelation> {
    let mut first = true;
    WeightedRelation::from_fn(domain, arity, |_| {
        if std::mem::take(&mut first) {
            return ExtRational::zero();
        }
        if rng.gen_bool(0.1) {
            ExtRational::Infinity
        } else {
            ExtRational::ratio(rng.gen_range(0..6), 2)
        }
    })
}

/// Language of `size` relations named `g0, g1, …` from `make`.
pub fn random_language<R, F>(rng: &mut R, domain: usize, size: usize, max_arity: usize, mut make: F) -> Result<Language>
where
    R: Rng,
    F: FnMut(&mut R, usize, usize) -> Result<WeightedRelation>,
{
    let mut lang = Language::new(domain);
    for i in 0..size {
        let arity = rng.gen_range(1..=max_arity);
        lang.insert(format!("g{i}"), make(rng, domain, arity)?)?;
    }
    Ok(lang)
}

/// `m` constraints with random relations, scopes (repeats allowed) and weights.
pub fn random_instance<R: Rng>(rng: &mut R, lang: &Language, n: usize, m: usize, mode: Mode) -> Result<Instance> {
    let names: Vec<(String, usize)> = lang.iter().map(|(name, r)| (name.clone(), r.arity())).collect();
    let mut constraints = Vec::with_capacity(m);
    for _ in 0..m {
        let (name, arity) = names.choose(rng).expect("nonempty language").clone();
        let scope = (0..arity).map(|_| rng.gen_range(0..n)).collect();
        constraints.push(Constraint { weight: rational_weight(rng), relation: name, scope });
    }
    Instance::anonymous(n, lang.clone(), constraints, mode)
}

/// Bounds with `l* = Σ_{d≥1} l(d) ≤ max_star` and `Σ l ≤ n`.
pub fn random_bounds<R: Rng>(rng: &mut R, domain: usize, n: usize, max_star: usize) -> Vec<usize> {
    loop {
        let l: Vec<usize> = (0..domain).map(|_| rng.gen_range(0..=2)).collect();
        if l[1..].iter().sum::<usize>() <= max_star && l.iter().sum::<usize>() <= n {
            return l;
        }
    }
}

/// Surjective instance over `Fix(Γ)` with provenance.
pub fn random_fix_instance<R: Rng>(rng: &mut R, gamma: &Language, n: usize, m: usize) -> Result<Instance> {
    let fixed = fix_language(gamma)?;
    random_instance(rng, &fixed, n, m, Mode::Surjective)
}

/// Relation table as labellings, for debugging output.
pub fn describe(rel: &WeightedRelation) -> Vec<(Vec<usize>, ExtRational)> {
    let mut out = Vec::new();
    for_each_labelling(rel.arity(), rel.domain_size(), |t| {
        out.push((t.to_vec(), rel.value(t).clone()));
        true
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setfn::is_superadditive;

    #[test]
    fn generators_are_deterministic_and_in_class() {
        let b = Budget::default();
        let a = random_sds_relation(&mut rng(7), 3, 3).unwrap();
        assert_eq!(a, random_sds_relation(&mut rng(7), 3, 3).unwrap());
        let mut r = rng(11);
        for _ in 0..20 {
            let s = random_sds_relation(&mut r, 3, 3).unwrap();
            assert!(minimal_alpha(&s, ClassKind::Sds, &b).unwrap().alpha <= ExtRational::from_int(2));
            let t = random_sim_not_sds_relation(&mut r, 3, 2).unwrap();
            assert!(minimal_alpha(&t, ClassKind::Sds, &b).unwrap().alpha.is_infinite());
            let h = random_bgmc(&mut r, 6, 1, 1).unwrap();
            assert!(is_superadditive(h.f(), &b).unwrap().holds());
        }
    }
}
