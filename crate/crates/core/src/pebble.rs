//! The pebbling comonad: plays are sequences of (pebble, element) moves of any
//! length, so `P_k A` is only ever built up to a length bound. Games run over
//! pebble configurations instead of plays.

use serde_json::{json, Value};

use crate::comonad::{coextend, geometric_count, json_label, Play, PlayForest};
use crate::error::{Error, Result};
use crate::game::{solve_gfp, Arena, Challenge, Rule, Solution};
use crate::structure::{extends_partial_hom, extends_partial_iso, Structure};

/// `[(p_1, a_1), ..., (p_n, a_n)]` with pebbles numbered from 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PebblePlay(pub Vec<(usize, usize)>);

impl Play for PebblePlay {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn last(&self) -> usize {
        self.0.last().expect("plays are non-empty").1
    }

    fn prefix(&self, n: usize) -> Self {
        PebblePlay(self.0[..n].to_vec())
    }

    fn with_elements(&self, elements: &[usize]) -> Self {
        PebblePlay(self.0.iter().zip(elements).map(|(&(p, _), &e)| (p, e)).collect())
    }

    fn label(&self, structure: &Structure) -> String {
        json_label(
            self.0
                .iter()
                .map(|&(p, e)| json!([p, structure.name(e)]))
                .collect(),
        )
    }
}

impl PebblePlay {
    pub fn last_pebble(&self) -> usize {
        self.0.last().expect("plays are non-empty").0
    }

    /// The pebble of the last move of `self` is not moved again in the part
    /// of `longer` after `self`.
    pub fn pebble_stays_in(&self, longer: &PebblePlay) -> bool {
        let p = self.last_pebble();
        longer.0[self.0.len()..].iter().all(|&(q, _)| q != p)
    }
}

/// Whether `R(s_1, ..., s_n)` holds in `P_k A`: pairwise comparable plays,
/// each play's last pebble untouched in every longer play of the tuple, and
/// `R` on the last elements.
pub fn pebble_relation_holds(a: &Structure, relation: &str, plays: &[PebblePlay]) -> Result<bool> {
    let rel = a
        .relation(relation)
        .ok_or_else(|| Error::UnknownRelation(relation.to_string()))?;
    if plays.len() != rel.arity() {
        return Err(Error::ArityMismatch {
            relation: relation.to_string(),
            expected: rel.arity(),
            found: plays.len(),
        });
    }
    for s in plays {
        for t in plays {
            if !s.comparable(t) {
                return Ok(false);
            }
            if s.is_prefix_of(t) && !s.pebble_stays_in(t) {
                return Ok(false);
            }
        }
    }
    let ends: Vec<usize> = plays.iter().map(Play::last).collect();
    Ok(rel.contains(&ends))
}

/// All plays of length at most `n` with `k` pebbles.
pub fn pebble_plays(a: &Structure, k: usize, n: usize, cap: usize) -> Result<PlayForest<PebblePlay>> {
    if k == 0 || n == 0 {
        return Err(Error::ZeroBound);
    }
    let required = geometric_count(k * a.size(), n);
    if required > cap as u128 {
        return Err(Error::CapExceeded { required, cap });
    }
    let moves: Vec<(usize, usize)> = (1..=k)
        .flat_map(|p| (0..a.size()).map(move |e| (p, e)))
        .collect();
    PlayForest::grow(
        moves.iter().map(|&m| PebblePlay(vec![m])).collect(),
        n,
        cap,
        a.size(),
        |s| {
            moves
                .iter()
                .map(|&m| {
                    let mut v = s.0.clone();
                    v.push(m);
                    PebblePlay(v)
                })
                .collect()
        },
    )
}

/// The substructure of `P_k A` on plays of length at most `n`; structure
/// element `i` is forest node `i`.
#[derive(Clone, Debug)]
pub struct PebbleTruncation {
    pub forest: PlayForest<PebblePlay>,
    pub structure: Structure,
}

pub fn pebble_truncate(a: &Structure, k: usize, n: usize, cap: usize) -> Result<PebbleTruncation> {
    let forest = pebble_plays(a, k, n, cap)?;
    let relations = forest.lift_relations(a, |nodes| {
        nodes.iter().all(|&x| {
            nodes.iter().all(|&y| {
                let (s, t) = (forest.play(x), forest.play(y));
                !s.is_prefix_of(t) || s.pebble_stays_in(t)
            })
        })
    });
    let structure = forest.to_structure(a, relations)?;
    Ok(PebbleTruncation { forest, structure })
}

pub fn pebble_counit(play: &PebblePlay) -> usize {
    play.last()
}

/// `f*(s)`: same pebbles, elements replaced by `f` on each prefix.
pub fn pebble_coextension_on_play(
    play: &PebblePlay,
    mut f: impl FnMut(&PebblePlay) -> Option<usize>,
) -> Result<PebblePlay> {
    let mut missing = None;
    let out = coextend(play, |p| {
        f(p).unwrap_or_else(|| {
            missing.get_or_insert_with(|| p.clone());
            0
        })
    });
    match missing {
        Some(p) => Err(Error::UndefinedPrefix(format!("{:?}", p.0))),
        None => Ok(out),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PebbleGame {
    /// Spoiler plays in the source only; positions must be partial homomorphisms.
    Existential,
    /// Spoiler plays in either structure; positions must be partial isomorphisms.
    BackAndForth,
    /// Duplicator commits to a bijection before each placement.
    Bijection,
}

/// Pebble configurations: the multiset of (source, target) pairs under the
/// pebbles on the board, kept sorted. Which pebble lies where does not affect
/// the game, so configurations are identified up to renaming pebbles.
pub struct PebbleArena<'a> {
    pub a: &'a Structure,
    pub b: &'a Structure,
    pub k: usize,
    pub game: PebbleGame,
}

pub type Configuration = Vec<(usize, usize)>;

impl PebbleArena<'_> {
    fn legal(&self, rest: &Configuration, pair: (usize, usize)) -> bool {
        match self.game {
            PebbleGame::Existential => extends_partial_hom(rest, pair, self.a, self.b),
            _ => extends_partial_iso(rest, pair, self.a, self.b),
        }
    }

    fn names(&self, pair: (usize, usize)) -> Value {
        json!([self.a.name(pair.0), self.b.name(pair.1)])
    }

    /// The configurations left after Spoiler picks up a pebble, with a label:
    /// a fresh pebble if one is free, otherwise one copy of any placed pair.
    fn lifts(&self, pos: &Configuration) -> Vec<(Value, Configuration)> {
        let mut out = Vec::new();
        if pos.len() < self.k {
            out.push((Value::Null, pos.clone()));
        }
        for (i, &pair) in pos.iter().enumerate() {
            if i > 0 && pos[i - 1] == pair {
                continue;
            }
            let mut rest = pos.clone();
            rest.remove(i);
            out.push((self.names(pair), rest));
        }
        out
    }

    fn challenge(&self, label: Value, rest: &Configuration, left: bool) -> Challenge<Configuration> {
        let (rows, cols) = if left { (self.a, self.b) } else { (self.b, self.a) };
        let edges = (0..rows.size())
            .map(|r| {
                (0..cols.size())
                    .filter_map(|c| {
                        let pair = if left { (r, c) } else { (c, r) };
                        self.legal(rest, pair).then(|| {
                            let mut next = rest.clone();
                            let at = next.partition_point(|&x| x <= pair);
                            next.insert(at, pair);
                            (c, next)
                        })
                    })
                    .collect()
            })
            .collect();
        Challenge {
            label,
            rows: rows.universe().iter().map(|n| json!(n)).collect(),
            cols: cols.universe().iter().map(|n| json!(n)).collect(),
            edges,
        }
    }
}

impl Arena for PebbleArena<'_> {
    type Pos = Configuration;

    fn rule(&self) -> Rule {
        match self.game {
            PebbleGame::Bijection => Rule::Bijective,
            _ => Rule::Alternating,
        }
    }

    fn initial(&self) -> Option<Configuration> {
        if self.game == PebbleGame::Bijection && self.a.size() != self.b.size() {
            return None;
        }
        Some(Vec::new())
    }

    fn challenges(&self, pos: &Configuration) -> Vec<Challenge<Configuration>> {
        let mut out = Vec::new();
        for (lift, rest) in self.lifts(pos) {
            out.push(self.challenge(json!({"side": "left", "lift": lift}), &rest, true));
            if self.game == PebbleGame::BackAndForth {
                out.push(self.challenge(json!({"side": "right", "lift": lift}), &rest, false));
            }
        }
        out
    }

    fn describe(&self, pos: &Configuration) -> Value {
        Value::Array(pos.iter().map(|&p| self.names(p)).collect())
    }
}

/// Solves a `k`-pebble game between `a` and `b`.
pub fn pebble_game(
    a: &Structure,
    b: &Structure,
    k: usize,
    game: PebbleGame,
    cert_cap: usize,
) -> Result<Solution> {
    a.check_same_signature(b)?;
    if k == 0 {
        return Err(Error::ZeroBound);
    }
    Ok(solve_gfp(&PebbleArena { a, b, k, game }, cert_cap))
}

/// Decides the existential `k`-pebble game from `a` to `b`.
pub fn pebble_game_exists(a: &Structure, b: &Structure, k: usize, cert_cap: usize) -> Result<Solution> {
    pebble_game(a, b, k, PebbleGame::Existential, cert_cap)
}
