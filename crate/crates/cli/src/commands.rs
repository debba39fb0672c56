use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{json, Map, Value};
use supercut::approx::{solve_instance, Solution, EXHAUSTIVE_VERTEX_LIMIT};
use supercut::bgmc::{brute_force_enumerate, classify_optimum, enumerate_alpha_optimal, BgmcJson, ExhaustiveGmc};
use supercut::classify::{classify_boolean, classify_three_element, language_class, ClassKind};
use supercut::gen;
use supercut::reductions::{build_gadget_instance, prepare_witness};
use supercut::vcsp::{brute_solve, fix_language, Instance, InstanceJson, Language, LanguageJson, Mode};
use supercut::{Budget, Error, Rational};

use crate::{Failure, LanguageClass};

type CmdResult = Result<Value, Failure>;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, Error> {
    Ok(serde_json::to_value(v)?)
}

fn read_instance(path: &Path, mode: Option<&Mode>) -> Result<Instance, Error> {
    let inst = Instance::try_from(read_json::<InstanceJson>(path)?)?;
    match mode {
        Some(m) => inst.with_mode(m.clone()),
        None => Ok(inst),
    }
}

fn read_language(path: &Path) -> Result<Language, Error> {
    Language::try_from(read_json::<LanguageJson>(path)?)
}

pub fn bgmc_classify(path: &Path, budget: &Budget) -> CmdResult {
    let h = read_json::<BgmcJson>(path)?.into_instance(budget)?;
    Ok(to_value(&classify_optimum(&h)?)?)
}

pub fn bgmc_enumerate(path: &Path, alpha: &Rational, oracle: bool, check: bool, budget: &Budget) -> CmdResult {
    let h = read_json::<BgmcJson>(path)?.into_instance(budget)?;
    let brute = || -> Result<Value, Error> {
        budget.check(1u128 << h.n())?;
        to_value(&brute_force_enumerate(&h, alpha, EXHAUSTIVE_VERTEX_LIMIT)?)
    };
    if oracle {
        return Ok(brute()?);
    }
    let engine = to_value(&enumerate_alpha_optimal(&h, alpha, &ExhaustiveGmc { budget: *budget })?)?;
    if !check {
        return Ok(engine);
    }
    let reference = brute()?;
    if engine != reference {
        return Err(Failure::Divergence(json!({ "check": "diverge", "engine": engine, "oracle": reference })));
    }
    let mut out = engine;
    out["check"] = json!("agree");
    Ok(out)
}

pub fn vcsp_solve(path: &Path, mode: Option<&Mode>, enumerate: bool, budget: &Budget) -> CmdResult {
    let inst = read_instance(path, mode)?;
    let (plan, solution) = solve_instance(&inst, enumerate, budget)?;
    let mut out = solution.to_json();
    out["plan"] = to_value(&plan)?;
    Ok(out)
}

pub fn vcsp_brute(path: &Path, mode: Option<&Mode>, enumerate: bool, budget: &Budget) -> CmdResult {
    let inst = read_instance(path, mode)?;
    let mut out = Solution::from_outcome(brute_solve(&inst, budget)?, enumerate).to_json();
    out["route"] = json!("brute");
    Ok(out)
}

pub fn vcsp_classify_language(path: &Path, budget: &Budget) -> CmdResult {
    let lang = read_language(path)?;
    let mut out = Map::new();
    for class in ClassKind::ALL {
        let mut report = to_value(&language_class(&lang, class, budget)?)?;
        if let Value::Object(m) = &mut report {
            m.remove("class");
        }
        out.insert(class.name().to_string(), report);
    }
    match lang.domain_size() {
        2 => {
            out.insert("verdict".into(), to_value(&classify_boolean(&lang, budget)?)?);
        }
        3 => {
            out.insert("verdict".into(), to_value(&classify_three_element(&lang, budget)?)?);
        }
        _ => {}
    }
    Ok(Value::Object(out))
}

pub fn vcsp_fix(path: &Path) -> CmdResult {
    let lang = read_language(path)?;
    Ok(to_value(&LanguageJson::from(&fix_language(&lang)?))?)
}

pub fn vcsp_gadget(path: &Path, gamma: &Path, sidecar: Option<&Path>, budget: &Budget) -> CmdResult {
    let gamma = read_language(gamma)?;
    let inst = read_instance(path, None)?;
    let witness = prepare_witness(&inst, &gamma, budget)?.ok_or_else(|| {
        Error::Precondition("no violation of the SDS inequality above the gadget threshold".into())
    })?;
    let g = build_gadget_instance(&inst, &gamma, &witness)?;
    let instance = to_value(&InstanceJson::from(&g.instance))?;
    match sidecar {
        Some(p) => {
            std::fs::write(p, format!("{}\n", g.sidecar())).map_err(Error::from)?;
            Ok(instance)
        }
        None => Ok(json!({ "instance": instance, "sidecar": g.sidecar() })),
    }
}

fn check_count(count: usize) -> Result<(), Error> {
    if count == 0 {
        return Err(Error::InvalidInput("--count must be at least 1".into()));
    }
    Ok(())
}

pub fn gen_bgmc(seed: u64, n: usize, q: usize, p: usize, count: usize, budget: &Budget) -> Result<Vec<Value>, Error> {
    check_count(count)?;
    if n == 0 {
        return Err(Error::InvalidInput("--n must be positive".into()));
    }
    let mut rng = gen::rng(seed);
    (0..count)
        .map(|_| to_value(&BgmcJson::from_instance(&gen::random_bgmc(&mut rng, n, q, p)?, budget)?))
        .collect()
}

pub fn gen_language(
    seed: u64,
    class: LanguageClass,
    domain: usize,
    size: usize,
    max_arity: usize,
    count: usize,
) -> Result<Vec<Value>, Error> {
    check_count(count)?;
    if domain < 2 || size == 0 || max_arity == 0 {
        return Err(Error::InvalidInput("need --domain >= 2, --size >= 1 and --max-arity >= 1".into()));
    }
    let mut rng = gen::rng(seed);
    (0..count)
        .map(|_| {
            let lang = match class {
                LanguageClass::Sds => gen::random_language(&mut rng, domain, size, max_arity, gen::random_sds_relation),
                LanguageClass::SimNotSds => {
                    gen::random_language(&mut rng, domain, size, max_arity, gen::random_sim_not_sds_relation)
                }
                LanguageClass::Random => gen::random_language(&mut rng, domain, size, max_arity, gen::random_relation),
            }?;
            to_value(&LanguageJson::from(&lang))
        })
        .collect()
}

pub fn gen_instance(
    seed: u64,
    language: &Path,
    n: usize,
    m: usize,
    mode: Option<Mode>,
    count: usize,
) -> Result<Vec<Value>, Error> {
    check_count(count)?;
    if n == 0 {
        return Err(Error::InvalidInput("--n must be positive".into()));
    }
    let lang = read_language(language)?;
    if lang.is_empty() {
        return Err(Error::InvalidInput("the language has no relations".into()));
    }
    let mode = mode.unwrap_or(Mode::Plain);
    let mut rng = gen::rng(seed);
    (0..count)
        .map(|_| to_value(&InstanceJson::from(&gen::random_instance(&mut rng, &lang, n, m, mode.clone())?)))
        .collect()
}
