//! Randomized checks of the comonad laws on small generated structures.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::comonad::{coextend, Play, PlayForest, DEFAULT_CAP};
use crate::ef::ef_plays;
use crate::equiv::Comonad;
use crate::error::Result;
use crate::modal::modal_unfold;
use crate::pebble::pebble_plays;
use crate::structure::{families::element_name, structure_to_json, PointedStructure, Signature, Structure};

/// Pebble plays are cut off at this length.
pub const PEBBLE_TRUNCATION: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenConfig {
    pub max_size: usize,
    pub max_arity: usize,
    pub density: f64,
    pub seed: u64,
    pub iterations: usize,
    pub max_k: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_size: 4, max_arity: 3, density: 0.3, seed: 0, iterations: 200, max_k: 3 }
    }
}

fn generate(rng: &mut ChaCha8Rng, size: usize, arities: &[usize], density: f64) -> Structure {
    let signature = Signature::new(arities.iter().enumerate().map(|(i, &a)| (format!("R{i}"), a)))
        .expect("generated names are distinct");
    let relations = signature
        .symbols()
        .map(|(_, arity)| {
            let total = size.pow(arity as u32);
            (0..total)
                .filter(|_| rng.gen_bool(density))
                .map(|mut code| {
                    let mut t = vec![0; arity];
                    for slot in t.iter_mut().rev() {
                        *slot = code % size;
                        code /= size;
                    }
                    t
                })
                .collect()
        })
        .collect();
    Structure::from_indexed(signature, (0..size).map(element_name).collect(), relations)
        .expect("generated tuples are in range")
}

/// A structure with up to three relations of arity at most `max_arity`.
pub fn random_structure_from(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Structure {
    let size = rng.gen_range(1..=cfg.max_size.max(1));
    let count = rng.gen_range(1..=3);
    let arities: Vec<usize> = (0..count).map(|_| rng.gen_range(1..=cfg.max_arity.max(1))).collect();
    generate(rng, size, &arities, cfg.density.clamp(0.0, 1.0))
}

/// A structure over one proposition `P` and one transition `R`, pointed at its first world.
pub fn random_kripke_from(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> PointedStructure {
    let size = rng.gen_range(1..=cfg.max_size.max(1));
    let s = generate(rng, size, &[1, 2], cfg.density.clamp(0.0, 1.0));
    let rename = Signature::new([("P", 1), ("R", 2)]).expect("static signature");
    let relations = s.relations().iter().map(|r| r.tuples().to_vec()).collect();
    let s = Structure::from_indexed(rename, s.universe().to_vec(), relations).expect("same shape");
    PointedStructure { structure: s, point: 0 }
}

/// Deterministic in `cfg.seed`.
pub fn random_structure(cfg: &GenConfig) -> Structure {
    random_structure_from(&mut ChaCha8Rng::seed_from_u64(cfg.seed), cfg)
}

pub fn random_kripke(cfg: &GenConfig) -> PointedStructure {
    random_kripke_from(&mut ChaCha8Rng::seed_from_u64(cfg.seed), cfg)
}

/// A deliberately broken counit, used to check that the suite can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    CounitFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Law {
    CoextendCounit,
    CounitAfterCoextend,
    Associativity,
    Covering,
    Coequaliser,
}

pub const LAWS: [Law; 5] = [
    Law::CoextendCounit,
    Law::CounitAfterCoextend,
    Law::Associativity,
    Law::Covering,
    Law::Coequaliser,
];

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Law::CoextendCounit => "ε* = id",
            Law::CounitAfterCoextend => "ε∘f* = f",
            Law::Associativity => "(g*∘f)* = g*∘f*",
            Law::Covering => "f* preserves covering",
            Law::Coequaliser => "ε∘Gε = ε∘ε",
        })
    }
}

/// Everything needed to replay one check.
#[derive(Clone, Debug)]
struct Instance {
    comonad: Comonad,
    structure: Structure,
    point: Option<usize>,
    k: usize,
    /// Sizes of the codomains of `f` and `g`.
    targets: (usize, usize),
    salt: u64,
}

fn hashed<T: Hash>(salt: u64, tag: u8, value: &T, modulus: usize) -> usize {
    let mut h = DefaultHasher::new();
    (salt, tag, value).hash(&mut h);
    (h.finish() % modulus as u64) as usize
}

fn counit_with<P: Play>(fault: Fault, play: &P) -> usize {
    match fault {
        Fault::None => play.last(),
        Fault::CounitFirst => play.prefix(1).last(),
    }
}

/// First failing play per law, by label.
fn check_forest<P: Play>(
    forest: &PlayForest<P>,
    structure: &Structure,
    inst: &Instance,
    fault: Fault,
) -> Vec<(Law, String)> {
    let (b, c) = inst.targets;
    let f = |s: &P| hashed(inst.salt, 1, s, b);
    let g = |s: &P| hashed(inst.salt, 2, s, c);
    let counit = |s: &P| counit_with(fault, s);
    let mut failures: Vec<(Law, String)> = Vec::new();
    let mut fail = |law: Law, s: &P| {
        if !failures.iter().any(|(l, _)| *l == law) {
            failures.push((law, s.label(structure)));
        }
    };
    let ends: Vec<usize> = (0..forest.len()).map(|id| forest.end(id)).collect();
    for (id, s) in forest.plays().iter().enumerate() {
        if coextend(s, counit) != *s {
            fail(Law::CoextendCounit, s);
        }
        let fs = coextend(s, f);
        if counit(&fs) != f(s) {
            fail(Law::CounitAfterCoextend, s);
        }
        let composite = coextend(s, |x| g(&coextend(x, f)));
        if composite != coextend(&fs, g) {
            fail(Law::Associativity, s);
        }
        if let Some(p) = forest.parent(id) {
            if !coextend(forest.play(p), f).covered_by(&fs) {
                fail(Law::Covering, s);
            }
        }
        // δ(s) as an element of G G A: the play of its prefixes
        let ids: Vec<usize> = s.prefixes().iter().map(|p| forest.id(p).expect("forest is prefix-closed")).collect();
        let nested = s.with_elements(&ids);
        let inner = nested.with_elements(&ids.iter().map(|&i| counit(forest.play(i))).collect::<Vec<_>>());
        if counit(&inner) != ends[counit(&nested)] {
            fail(Law::Coequaliser, s);
        }
    }
    failures
}

fn failing_laws(inst: &Instance, fault: Fault) -> Result<Vec<(Law, String)>> {
    let s = &inst.structure;
    Ok(match inst.comonad {
        Comonad::Ef => check_forest(&ef_plays(s, inst.k, DEFAULT_CAP)?, s, inst, fault),
        Comonad::Pebble => check_forest(&pebble_plays(s, inst.k, PEBBLE_TRUNCATION, DEFAULT_CAP)?, s, inst, fault),
        Comonad::Modal => {
            let p = PointedStructure::new(s.clone(), inst.point.unwrap_or(0))?;
            check_forest(&modal_unfold(&p, inst.k, DEFAULT_CAP)?.forest, s, inst, fault)
        }
    })
}

fn fails(inst: &Instance, law: Law, fault: Fault) -> bool {
    failing_laws(inst, fault).is_ok_and(|fs| fs.iter().any(|(l, _)| *l == law))
}

/// Removes tuples, then elements, then lowers `k`, while `law` still fails.
fn shrink(mut inst: Instance, law: Law, fault: Fault) -> Instance {
    'tuples: loop {
        for (ri, rel) in inst.structure.relations().iter().enumerate() {
            for ti in 0..rel.len() {
                let candidate = Instance { structure: inst.structure.without_tuple(ri, ti), ..inst.clone() };
                if fails(&candidate, law, fault) {
                    inst = candidate;
                    continue 'tuples;
                }
            }
        }
        break;
    }
    'elements: loop {
        let n = inst.structure.size();
        for drop in 0..n {
            if n == 1 || inst.point == Some(drop) {
                continue;
            }
            let keep: Vec<usize> = (0..n).filter(|&v| v != drop).collect();
            let Ok(structure) = inst.structure.induced(&keep) else { continue };
            let point = inst.point.map(|p| if p > drop { p - 1 } else { p });
            let candidate = Instance { structure, point, ..inst.clone() };
            if fails(&candidate, law, fault) {
                inst = candidate;
                continue 'elements;
            }
        }
        break;
    }
    while inst.k > 1 {
        let candidate = Instance { k: inst.k - 1, ..inst.clone() };
        if !fails(&candidate, law, fault) {
            break;
        }
        inst = candidate;
    }
    inst
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub iteration: usize,
    pub k: usize,
    pub play: String,
    pub structure: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct LawResult {
    pub comonad: Comonad,
    pub law: String,
    pub instances: usize,
    pub counterexample: Option<Counterexample>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LawReport {
    pub config: GenConfig,
    pub results: Vec<LawResult>,
    /// Instances that could not be built, such as a cap being exceeded.
    pub errors: Vec<String>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.results.iter().all(|r| r.counterexample.is_none())
    }

    pub fn failures(&self) -> usize {
        self.results.iter().filter(|r| r.counterexample.is_some()).count() + self.errors.len()
    }

    pub fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v["passed"] = json!(self.passed());
        v
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cfg = &self.config;
        writeln!(
            f,
            "law suite: seed {}, {} iterations, |A| <= {}, arity <= {}, k <= {}",
            cfg.seed, cfg.iterations, cfg.max_size, cfg.max_arity, cfg.max_k
        )?;
        for r in &self.results {
            match &r.counterexample {
                None => writeln!(f, "PASS {} {}: {} instances", r.comonad, r.law, r.instances)?,
                Some(c) => writeln!(
                    f,
                    "FAIL {} {}: iteration {}, k = {}, play {} on {}",
                    r.comonad, r.law, c.iteration, c.k, c.play, c.structure
                )?,
            }
        }
        for e in &self.errors {
            writeln!(f, "ERROR {e}")?;
        }
        if self.passed() {
            writeln!(f, "all passed")
        } else {
            writeln!(f, "{} failures", self.failures())
        }
    }
}

const COMONADS: [Comonad; 3] = [Comonad::Ef, Comonad::Pebble, Comonad::Modal];

fn instances(cfg: &GenConfig, iteration: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(iteration as u64);
    let general = random_structure_from(&mut rng, cfg);
    let kripke = random_kripke_from(&mut rng, cfg);
    let max_k = cfg.max_k.max(1);
    COMONADS
        .iter()
        .map(|&comonad| {
            let (structure, point) = match comonad {
                Comonad::Modal => (kripke.structure.clone(), Some(kripke.point)),
                _ => (general.clone(), None),
            };
            Instance {
                comonad,
                structure,
                point,
                k: rng.gen_range(1..=max_k),
                targets: (rng.gen_range(1..=4), rng.gen_range(1..=4)),
                salt: rng.gen(),
            }
        })
        .collect()
}

pub fn run_law_suite(cfg: &GenConfig) -> LawReport {
    run_law_suite_with(cfg, Fault::None)
}

pub fn run_law_suite_with(cfg: &GenConfig, fault: Fault) -> LawReport {
    type Outcome = (Instance, std::result::Result<Vec<(Law, String)>, String>);
    let outcomes: Vec<Vec<Outcome>> = (0..cfg.iterations)
        .into_par_iter()
        .map(|i| {
            instances(cfg, i)
                .into_iter()
                .map(|inst| {
                    let r = failing_laws(&inst, fault).map_err(|e| e.to_string());
                    (inst, r)
                })
                .collect()
        })
        .collect();

    let mut results = Vec::new();
    let mut errors = Vec::new();
    for (ci, &comonad) in COMONADS.iter().enumerate() {
        for law in LAWS {
            let mut counterexample = None;
            for (iteration, per_iter) in outcomes.iter().enumerate() {
                let (inst, outcome) = &per_iter[ci];
                if let Ok(fs) = outcome {
                    if fs.iter().any(|(l, _)| *l == law) {
                        let small = shrink(inst.clone(), law, fault);
                        let play = failing_laws(&small, fault)
                            .ok()
                            .and_then(|fs| fs.into_iter().find(|(l, _)| *l == law))
                            .map(|(_, p)| p)
                            .unwrap_or_default();
                        counterexample = Some(Counterexample {
                            iteration,
                            k: small.k,
                            play,
                            structure: structure_to_json(&small.structure, small.point),
                        });
                        break;
                    }
                }
            }
            results.push(LawResult { comonad, law: law.to_string(), instances: cfg.iterations, counterexample });
        }
        for (iteration, per_iter) in outcomes.iter().enumerate() {
            if let Err(e) = &per_iter[ci].1 {
                errors.push(format!("{comonad} iteration {iteration}: {e}"));
            }
        }
    }
    LawReport { config: cfg.clone(), results, errors }
}
