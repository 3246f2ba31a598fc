//! Three equivalences per comonad, from coarsest to finest:
//!
//! * tier 1: coKleisli morphisms both ways (existential games both ways),
//! * tier 2: the back-and-forth game,
//! * tier 3: the bijection-style game.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::comonad::{geometric_count, PlayForest};
use crate::ef::{ef_game, ef_game_exists, ef_plays, EfArena, EfCoKleisli, EfGame, EfPlay};
use crate::error::{Error, Result};
use crate::game::{verify_certificate, Arena, Solution, StrategyCertificate};
use crate::modal::{modal_game, ModalArena, ModalGame};
use crate::pebble::{pebble_game, PebbleArena, PebbleGame};
use crate::structure::{pairs_form_partial_iso, PointedStructure, Structure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comonad {
    Ef,
    Pebble,
    Modal,
}

impl fmt::Display for Comonad {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(match self {
            Comonad::Ef => "ef",
            Comonad::Pebble => "pebble",
            Comonad::Modal => "modal",
        })
    }
}

impl FromStr for Comonad {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ef" => Ok(Comonad::Ef),
            "pebble" => Ok(Comonad::Pebble),
            "modal" => Ok(Comonad::Modal),
            other => Err(format!("unknown comonad {other}; expected ef, pebble or modal")),
        }
    }
}

/// One side of a comparison: a structure and, for the modal comonad, its point.
#[derive(Clone, Copy, Debug)]
pub struct Side<'a> {
    pub structure: &'a Structure,
    pub point: Option<usize>,
}

impl<'a> Side<'a> {
    pub fn new(structure: &'a Structure, point: Option<usize>) -> Self {
        Side { structure, point }
    }

    fn pointed(&self) -> Result<PointedStructure> {
        let p = self.point.ok_or(Error::MissingPoint)?;
        PointedStructure::new(self.structure.clone(), p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub equiv: bool,
    pub tier: u8,
    pub comonad: Comonad,
    pub k: usize,
    pub certificate: Option<Value>,
}

impl Verdict {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("verdicts serialize")
    }
}

fn cert_value(sol: &Solution) -> Option<Value> {
    sol.certificate
        .as_ref()
        .map(|c| serde_json::to_value(c).expect("certificates serialize"))
}

fn check_inputs(comonad: Comonad, a: Side, b: Side, k: usize) -> Result<()> {
    a.structure.check_same_signature(b.structure)?;
    if k == 0 {
        return Err(Error::ZeroBound);
    }
    if comonad == Comonad::Modal {
        a.pointed()?.check_kripke()?;
        b.pointed()?;
    }
    Ok(())
}

/// Tier 1: existential games won in both directions. The certificate holds
/// the two strategies, each present only if it fits under `cap`.
pub fn mutual_existential(comonad: Comonad, a: Side, b: Side, k: usize, cap: usize) -> Result<Verdict> {
    check_inputs(comonad, a, b, k)?;
    let (forward, backward) = match comonad {
        Comonad::Ef => {
            let run = |x: &Structure, y: &Structure| -> Result<(bool, Option<Value>)> {
                let r = ef_game_exists(x, y, k, cap)?;
                Ok((r.duplicator_wins, r.strategy.map(|s| s.to_json(x, y))))
            };
            (run(a.structure, b.structure)?, run(b.structure, a.structure)?)
        }
        Comonad::Pebble => {
            let run = |x: &Structure, y: &Structure| -> Result<(bool, Option<Value>)> {
                let s = pebble_game(x, y, k, PebbleGame::Existential, cap)?;
                Ok((s.duplicator_wins, cert_value(&s)))
            };
            (run(a.structure, b.structure)?, run(b.structure, a.structure)?)
        }
        Comonad::Modal => {
            let (p, q) = (a.pointed()?, b.pointed()?);
            let run = |x: &PointedStructure, y: &PointedStructure| -> Result<(bool, Option<Value>)> {
                let s = modal_game(x, y, k, ModalGame::Simulation, cap)?;
                Ok((s.duplicator_wins, cert_value(&s)))
            };
            (run(&p, &q)?, run(&q, &p)?)
        }
    };
    let equiv = forward.0 && backward.0;
    let certificate = match (equiv, forward.1, backward.1) {
        (true, Some(f), Some(g)) => Some(json!({"forward": f, "backward": g})),
        _ => None,
    };
    Ok(Verdict { equiv, tier: 1, comonad, k, certificate })
}

fn game_verdict(tier: u8, comonad: Comonad, k: usize, sol: Solution) -> Verdict {
    Verdict { equiv: sol.duplicator_wins, tier, comonad, k, certificate: cert_value(&sol) }
}

/// Tier 2: the back-and-forth game over the comonad's winning positions.
pub fn back_and_forth_equiv(comonad: Comonad, a: Side, b: Side, k: usize, cap: usize) -> Result<Verdict> {
    check_inputs(comonad, a, b, k)?;
    let sol = match comonad {
        Comonad::Ef => ef_game(a.structure, b.structure, k, EfGame::BackAndForth, cap)?,
        Comonad::Pebble => pebble_game(a.structure, b.structure, k, PebbleGame::BackAndForth, cap)?,
        Comonad::Modal => modal_game(&a.pointed()?, &b.pointed()?, k, ModalGame::Bisimulation, cap)?,
    };
    Ok(game_verdict(2, comonad, k, sol))
}

/// Tier 3: the bijection game (EF), the pebble bijection game, or the
/// graded bisimulation game (modal).
pub fn bijection_equiv(comonad: Comonad, a: Side, b: Side, k: usize, cap: usize) -> Result<Verdict> {
    check_inputs(comonad, a, b, k)?;
    let sol = match comonad {
        Comonad::Ef => ef_game(a.structure, b.structure, k, EfGame::Bijection, cap)?,
        Comonad::Pebble => pebble_game(a.structure, b.structure, k, PebbleGame::Bijection, cap)?,
        Comonad::Modal => modal_game(&a.pointed()?, &b.pointed()?, k, ModalGame::Graded, cap)?,
    };
    Ok(game_verdict(3, comonad, k, sol))
}

pub fn decide(comonad: Comonad, tier: u8, a: Side, b: Side, k: usize, cap: usize) -> Result<Verdict> {
    match tier {
        1 => mutual_existential(comonad, a, b, k, cap),
        2 => back_and_forth_equiv(comonad, a, b, k, cap),
        3 => bijection_equiv(comonad, a, b, k, cap),
        t => Err(Error::InvalidMap(format!("tier {t} is not 1, 2 or 3"))),
    }
}

fn verify_game<A: Arena>(arena: &A, cert: &Value) -> std::result::Result<(), String> {
    let cert: StrategyCertificate = serde_json::from_value(cert.clone()).map_err(|e| e.to_string())?;
    verify_certificate(arena, &cert)
}

/// Checks a certificate produced by [`decide`] for a positive verdict.
pub fn verify_verdict_certificate(
    comonad: Comonad,
    tier: u8,
    a: Side,
    b: Side,
    k: usize,
    cert: &Value,
) -> Result<std::result::Result<(), String>> {
    check_inputs(comonad, a, b, k)?;
    let (x, y) = (a.structure, b.structure);
    let pointed = || -> Result<(PointedStructure, PointedStructure)> { Ok((a.pointed()?, b.pointed()?)) };
    Ok(match tier {
        1 => {
            let (Some(f), Some(g)) = (cert.get("forward"), cert.get("backward")) else {
                return Ok(Err("expected forward and backward strategies".into()));
            };
            match comonad {
                Comonad::Ef => {
                    let check = |c: &Value, s: &Structure, t: &Structure| -> std::result::Result<(), String> {
                        let m = EfCoKleisli::from_json(c, s, t).map_err(|e| e.to_string())?;
                        if m.k != k {
                            return Err(format!("strategy is for k = {}", m.k));
                        }
                        match m.is_homomorphism(s, t) {
                            Ok(true) => Ok(()),
                            Ok(false) => Err("strategy is not a homomorphism from the comonad".into()),
                            Err(e) => Err(e.to_string()),
                        }
                    };
                    check(f, x, y).and_then(|_| check(g, y, x))
                }
                Comonad::Pebble => verify_game(&PebbleArena { a: x, b: y, k, game: PebbleGame::Existential }, f)
                    .and_then(|_| verify_game(&PebbleArena { a: y, b: x, k, game: PebbleGame::Existential }, g)),
                Comonad::Modal => {
                    let (p, q) = pointed()?;
                    let forward = ModalArena::new(&p, &q, k, ModalGame::Simulation)?;
                    let backward = ModalArena::new(&q, &p, k, ModalGame::Simulation)?;
                    verify_game(&forward, f).and_then(|_| verify_game(&backward, g))
                }
            }
        }
        2 | 3 => {
            let bij = tier == 3;
            match comonad {
                Comonad::Ef => {
                    let game = if bij { EfGame::Bijection } else { EfGame::BackAndForth };
                    verify_game(&EfArena { a: x, b: y, k, game }, cert)
                }
                Comonad::Pebble => {
                    let game = if bij { PebbleGame::Bijection } else { PebbleGame::BackAndForth };
                    verify_game(&PebbleArena { a: x, b: y, k, game }, cert)
                }
                Comonad::Modal => {
                    let (p, q) = pointed()?;
                    let game = if bij { ModalGame::Graded } else { ModalGame::Bisimulation };
                    verify_game(&ModalArena::new(&p, &q, k, game)?, cert)
                }
            }
        }
        t => Err(format!("tier {t} is not 1, 2 or 3")),
    })
}

/// Strategy functions `E_k A -> B` whose coextension stays in the winning
/// set, each stored with its coextension as forest ids of `E_k B`.
pub struct StrategySpace {
    pub functions: Vec<Vec<usize>>,
    pub coextensions: Vec<Vec<usize>>,
}

/// The largest function space the fixpoint oracle will enumerate.
pub const THETA_LIMIT: u128 = 1_000_000;

/// All `f : E_k A -> B` with `(s, f*(s))` a partial isomorphism for every play `s`.
pub fn winning_strategies(a: &Structure, b: &Structure, k: usize) -> Result<StrategySpace> {
    let plays = geometric_count(a.size(), k);
    let space = u32::try_from(plays)
        .ok()
        .and_then(|n| (b.size() as u128).checked_pow(n))
        .unwrap_or(u128::MAX);
    if space > THETA_LIMIT {
        return Err(Error::InstanceTooLarge(format!(
            "{space} candidate strategies exceed the oracle limit {THETA_LIMIT}"
        )));
    }
    let fa = ef_plays(a, k, usize::MAX)?;
    let fb = ef_plays(b, k, usize::MAX)?;
    let mut functions = Vec::new();
    let mut coextensions = Vec::new();
    let mut f = vec![0usize; fa.len()];
    let mut image = vec![0usize; fa.len()];
    enumerate(a, b, &fa, &fb, 0, &mut f, &mut image, &mut |f, img| {
        functions.push(f.to_vec());
        coextensions.push(img.to_vec());
    });
    Ok(StrategySpace { functions, coextensions })
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    a: &Structure,
    b: &Structure,
    fa: &PlayForest<EfPlay>,
    fb: &PlayForest<EfPlay>,
    node: usize,
    f: &mut Vec<usize>,
    image: &mut Vec<usize>,
    out: &mut impl FnMut(&[usize], &[usize]),
) {
    if node == fa.len() {
        out(f, image);
        return;
    }
    let s = fa.play(node);
    for y in 0..b.size() {
        f[node] = y;
        let mut t = match fa.parent(node) {
            Some(p) => fb.play(image[p]).0.clone(),
            None => Vec::new(),
        };
        t.push(y);
        let pairs: Vec<(usize, usize)> = s.0.iter().copied().zip(t.iter().copied()).collect();
        if pairs_form_partial_iso(&pairs, a, b) {
            image[node] = fb.id(&EfPlay(t)).expect("play of E_k B");
            enumerate(a, b, fa, fb, node + 1, f, image, out);
        }
    }
}

/// `Γ(F) = {g ∈ T | every t has some f ∈ F with f*(g*(t)) = t}`, written
/// with the pairs `(s, f*(s))` realised by members of `F`.
pub fn gamma(f_set: &[usize], s_space: &StrategySpace, t_space: &StrategySpace) -> Vec<usize> {
    let realised: HashSet<(usize, usize)> = f_set
        .iter()
        .flat_map(|&i| {
            s_space.coextensions[i]
                .iter()
                .enumerate()
                .map(|(s, &t)| (s, t))
        })
        .collect();
    (0..t_space.functions.len())
        .filter(|&g| {
            t_space.coextensions[g]
                .iter()
                .enumerate()
                .all(|(t, &s)| realised.contains(&(s, t)))
        })
        .collect()
}

/// `Θ = ΔΓ` on sets of indices into `s_space`.
pub fn theta(f_set: &[usize], s_space: &StrategySpace, t_space: &StrategySpace) -> Vec<usize> {
    let g_set = gamma(f_set, s_space, t_space);
    gamma(&g_set, t_space, s_space)
}

/// Decides the tier-2 EF equivalence by iterating `Θ` from the full
/// strategy space down to its greatest fixpoint.
pub fn theta_fixpoint_oracle(a: &Structure, b: &Structure, k: usize) -> Result<bool> {
    a.check_same_signature(b)?;
    let (s_space, t_space) = (winning_strategies(a, b, k)?, winning_strategies(b, a, k)?);
    let mut current: Vec<usize> = (0..s_space.functions.len()).collect();
    loop {
        let next = theta(&current, &s_space, &t_space);
        if next.len() == current.len() {
            return Ok(!current.is_empty());
        }
        current = next;
    }
}
