//! The Ehrenfeucht-Fraïssé comonad: plays are sequences of at most `k`
//! elements, and a coKleisli morphism `E_k A -> B` is a Duplicator strategy in
//! the existential `k`-round game.

use std::collections::{BTreeMap, HashMap};

use serde_json::{json, Value};

use crate::comonad::{coextend, geometric_count, json_label, Play, PlayForest};
use crate::error::{Error, Result};
use crate::game::{solve_acyclic, Arena, Challenge, Rule, Solution};
use crate::structure::{extends_partial_hom, extends_partial_iso, pairs_form_partial_hom, Structure};

/// A sequence `[a_1, ..., a_j]` of elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EfPlay(pub Vec<usize>);

impl Play for EfPlay {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn last(&self) -> usize {
        *self.0.last().expect("plays are non-empty")
    }

    fn prefix(&self, n: usize) -> Self {
        EfPlay(self.0[..n].to_vec())
    }

    fn with_elements(&self, elements: &[usize]) -> Self {
        EfPlay(elements.to_vec())
    }

    fn label(&self, structure: &Structure) -> String {
        json_label(self.0.iter().map(|&e| Value::from(structure.name(e))).collect())
    }
}

impl EfPlay {
    pub fn names(&self, structure: &Structure) -> Vec<String> {
        self.0.iter().map(|&e| structure.name(e).to_string()).collect()
    }

    pub fn from_names(names: &[String], structure: &Structure) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::InvalidMap("empty play".into()));
        }
        names
            .iter()
            .map(|n| structure.index(n).ok_or_else(|| Error::UnknownElement(n.clone())))
            .collect::<Result<Vec<_>>>()
            .map(EfPlay)
    }

    /// Drops every repeated occurrence, keeping first occurrences in order.
    pub fn without_repeats(&self) -> EfPlay {
        let mut out: Vec<usize> = Vec::with_capacity(self.0.len());
        for &e in &self.0 {
            if !out.contains(&e) {
                out.push(e);
            }
        }
        EfPlay(out)
    }
}

pub fn ef_counit(play: &EfPlay) -> usize {
    play.last()
}

/// All plays of length at most `k` over `a`, as a forest.
pub fn ef_plays(a: &Structure, k: usize, cap: usize) -> Result<PlayForest<EfPlay>> {
    if k == 0 {
        return Err(Error::ZeroBound);
    }
    let required = geometric_count(a.size(), k);
    if required > cap as u128 {
        return Err(Error::CapExceeded { required, cap });
    }
    let n = a.size();
    PlayForest::grow(
        (0..n).map(|e| EfPlay(vec![e])).collect(),
        k,
        cap,
        n,
        |s| {
            (0..n)
                .map(|e| {
                    let mut v = s.0.clone();
                    v.push(e);
                    EfPlay(v)
                })
                .collect()
        },
    )
}

/// `E_k A` together with the forest of its plays; structure element `i` is
/// forest node `i`.
#[derive(Clone, Debug)]
pub struct EfMaterialized {
    pub forest: PlayForest<EfPlay>,
    pub structure: Structure,
}

pub fn ef_materialize(a: &Structure, k: usize, cap: usize) -> Result<EfMaterialized> {
    let forest = ef_plays(a, k, cap)?;
    let relations = forest.lift_relations(a, |_| true);
    let structure = forest.to_structure(a, relations)?;
    Ok(EfMaterialized { forest, structure })
}

/// Whether `R(s_1, ..., s_n)` holds in `E_k A`.
pub fn ef_relation_holds(a: &Structure, relation: &str, plays: &[EfPlay]) -> Result<bool> {
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
    let pairwise = plays
        .iter()
        .enumerate()
        .all(|(i, s)| plays[i + 1..].iter().all(|t| s.comparable(t)));
    let ends: Vec<usize> = plays.iter().map(Play::last).collect();
    Ok(pairwise && rel.contains(&ends))
}

/// A map from plays of `E_k A` to elements of `B`, stored as a table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EfCoKleisli {
    pub k: usize,
    pub table: BTreeMap<EfPlay, usize>,
}

impl EfCoKleisli {
    /// Tabulates `f` over every play of `E_k A`.
    pub fn from_fn(
        a: &Structure,
        k: usize,
        cap: usize,
        mut f: impl FnMut(&EfPlay) -> usize,
    ) -> Result<Self> {
        let forest = ef_plays(a, k, cap)?;
        let table = forest.plays().iter().map(|s| (s.clone(), f(s))).collect();
        Ok(EfCoKleisli { k, table })
    }

    pub fn get(&self, play: &EfPlay) -> Option<usize> {
        self.table.get(play).copied()
    }

    /// `f*(s)`.
    pub fn coextend(&self, play: &EfPlay) -> Result<EfPlay> {
        ef_coextension(play, |p| self.get(p))
    }

    /// Defined on every play of length at most `k` over `a`.
    pub fn is_total(&self, a: &Structure) -> bool {
        self.table.len() as u128 == geometric_count(a.size(), self.k)
            && self
                .table
                .keys()
                .all(|s| !s.0.is_empty() && s.0.len() <= self.k && s.0.iter().all(|&e| e < a.size()))
    }

    /// Whether the table is a homomorphism `E_k A -> B`. Every pairwise
    /// comparable tuple lies on one maximal play, so it is enough that each
    /// maximal play with its answers relates `A` to `B` as a partial
    /// homomorphism.
    pub fn is_homomorphism(&self, a: &Structure, b: &Structure) -> Result<bool> {
        a.check_same_signature(b)?;
        if !self.is_total(a) || self.table.values().any(|&v| v >= b.size()) {
            return Ok(false);
        }
        for s in self.table.keys().filter(|s| s.0.len() == self.k) {
            let answers = self.coextend(s)?;
            let pairs: Vec<(usize, usize)> =
                s.0.iter().copied().zip(answers.0.iter().copied()).collect();
            if !pairs_form_partial_hom(&pairs, a, b) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `s ⊑ t` with equal last elements forces equal values.
    pub fn is_i_morphism(&self) -> bool {
        self.table.iter().all(|(t, &v)| {
            let last = t.last();
            (1..t.len()).all(|n| t.0[n - 1] != last || self.table.get(&t.prefix(n)) == Some(&v))
        })
    }

    /// The I-morphism obtained by keeping `f` on repetition-free plays and
    /// answering a repeated element as at its first occurrence.
    pub fn i_normalize(&self) -> EfCoKleisli {
        let table = self
            .table
            .keys()
            .map(|s| {
                let last = s.last();
                let first = s.0.iter().position(|&e| e == last).expect("last occurs");
                let key = s.prefix(first + 1).without_repeats();
                (s.clone(), self.table[&key])
            })
            .collect();
        EfCoKleisli { k: self.k, table }
    }

    pub fn to_json(&self, a: &Structure, b: &Structure) -> Value {
        let strategy: Vec<Value> = self
            .table
            .iter()
            .map(|(s, &r)| json!({"play": s.names(a), "response": b.name(r)}))
            .collect();
        json!({"k": self.k, "strategy": strategy})
    }

    pub fn from_json(value: &Value, a: &Structure, b: &Structure) -> Result<Self> {
        #[derive(serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Entry {
            play: Vec<String>,
            response: String,
        }
        #[derive(serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            k: usize,
            strategy: Vec<Entry>,
        }
        let raw: Raw = serde_json::from_value(value.clone())?;
        let mut table = BTreeMap::new();
        for e in raw.strategy {
            let play = EfPlay::from_names(&e.play, a)?;
            let r = b.index(&e.response).ok_or(Error::UnknownElement(e.response))?;
            if table.insert(play, r).is_some() {
                return Err(Error::InvalidMap(format!("play {:?} listed twice", e.play)));
            }
        }
        Ok(EfCoKleisli { k: raw.k, table })
    }
}

/// `f*(s)` for a partial `f`; fails on the first prefix where `f` is undefined.
pub fn ef_coextension(
    play: &EfPlay,
    mut f: impl FnMut(&EfPlay) -> Option<usize>,
) -> Result<EfPlay> {
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

/// Outcome of the existential game with, when Duplicator wins and the
/// strategy has at most `cap` entries, the strategy as a coKleisli map.
#[derive(Clone, Debug)]
pub struct EfGameResult {
    pub duplicator_wins: bool,
    pub strategy: Option<EfCoKleisli>,
}

type Pairs = Vec<(usize, usize)>;

fn with_pair(pairs: &Pairs, pair: (usize, usize)) -> Pairs {
    let mut next = pairs.clone();
    if let Err(i) = next.binary_search(&pair) {
        next.insert(i, pair);
    }
    next
}

struct ExistentialSearch<'a> {
    a: &'a Structure,
    b: &'a Structure,
    memo: HashMap<(Pairs, usize), bool>,
}

impl ExistentialSearch<'_> {
    /// Least winning answer to Spoiler playing `x` at `pairs`, with `rounds`
    /// still to be played after this one.
    fn answer(&mut self, pairs: &Pairs, x: usize, rounds: usize) -> Option<usize> {
        (0..self.b.size()).find(|&y| {
            extends_partial_hom(pairs, (x, y), self.a, self.b) && self.wins(&with_pair(pairs, (x, y)), rounds)
        })
    }

    fn wins(&mut self, pairs: &Pairs, rounds: usize) -> bool {
        if rounds == 0 {
            return true;
        }
        let key = (pairs.clone(), rounds);
        if let Some(&w) = self.memo.get(&key) {
            return w;
        }
        let w = (0..self.a.size()).all(|x| self.answer(pairs, x, rounds - 1).is_some());
        self.memo.insert(key, w);
        w
    }
}

/// Decides the existential `k`-round game from `a` to `b`.
pub fn ef_game_exists(a: &Structure, b: &Structure, k: usize, cap: usize) -> Result<EfGameResult> {
    a.check_same_signature(b)?;
    if k == 0 {
        return Err(Error::ZeroBound);
    }
    let mut search = ExistentialSearch { a, b, memo: HashMap::new() };
    if !search.wins(&Vec::new(), k) {
        return Ok(EfGameResult { duplicator_wins: false, strategy: None });
    }
    let strategy = if geometric_count(a.size(), k) <= cap as u128 {
        let mut table = BTreeMap::new();
        let mut stack: Vec<(EfPlay, Pairs)> = vec![(EfPlay(Vec::new()), Vec::new())];
        while let Some((s, pairs)) = stack.pop() {
            if s.0.len() == k {
                continue;
            }
            let rounds = k - s.0.len() - 1;
            for x in 0..a.size() {
                let y = search.answer(&pairs, x, rounds).expect("winning position");
                let mut next = s.0.clone();
                next.push(x);
                table.insert(EfPlay(next.clone()), y);
                stack.push((EfPlay(next), with_pair(&pairs, (x, y))));
            }
        }
        Some(EfCoKleisli { k, table })
    } else {
        None
    };
    Ok(EfGameResult { duplicator_wins: true, strategy })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EfGame {
    /// Spoiler plays in either structure; positions must be partial isomorphisms.
    BackAndForth,
    /// Each round Duplicator commits to a bijection `A -> B` first.
    Bijection,
}

/// Positions are the set of pairs played so far with the number of rounds
/// left; plays inducing the same pairs are interchangeable.
pub struct EfArena<'a> {
    pub a: &'a Structure,
    pub b: &'a Structure,
    pub k: usize,
    pub game: EfGame,
}

impl EfArena<'_> {
    fn challenge(&self, label: &str, pairs: &Pairs, rounds: usize, left: bool) -> Challenge<(Pairs, usize)> {
        let (rows, cols) = if left { (self.a, self.b) } else { (self.b, self.a) };
        let edges = (0..rows.size())
            .map(|r| {
                (0..cols.size())
                    .filter_map(|c| {
                        let pair = if left { (r, c) } else { (c, r) };
                        extends_partial_iso(pairs, pair, self.a, self.b)
                            .then(|| (c, (with_pair(pairs, pair), rounds - 1)))
                    })
                    .collect()
            })
            .collect();
        Challenge {
            label: json!(label),
            rows: rows.universe().iter().map(|n| json!(n)).collect(),
            cols: cols.universe().iter().map(|n| json!(n)).collect(),
            edges,
        }
    }
}

impl Arena for EfArena<'_> {
    type Pos = (Pairs, usize);

    fn rule(&self) -> Rule {
        match self.game {
            EfGame::BackAndForth => Rule::Alternating,
            EfGame::Bijection => Rule::Bijective,
        }
    }

    fn initial(&self) -> Option<(Pairs, usize)> {
        if self.game == EfGame::Bijection && self.a.size() != self.b.size() {
            return None;
        }
        Some((Vec::new(), self.k))
    }

    fn challenges(&self, (pairs, rounds): &(Pairs, usize)) -> Vec<Challenge<(Pairs, usize)>> {
        if *rounds == 0 {
            return Vec::new();
        }
        match self.game {
            EfGame::BackAndForth => vec![
                self.challenge("left", pairs, *rounds, true),
                self.challenge("right", pairs, *rounds, false),
            ],
            EfGame::Bijection => vec![self.challenge("bijection", pairs, *rounds, true)],
        }
    }

    fn describe(&self, (pairs, rounds): &(Pairs, usize)) -> Value {
        let pairs: Vec<Value> = pairs
            .iter()
            .map(|&(x, y)| json!([self.a.name(x), self.b.name(y)]))
            .collect();
        json!({"pairs": pairs, "rounds": rounds})
    }
}

/// Solves the `k`-round back-and-forth or bijection game.
pub fn ef_game(a: &Structure, b: &Structure, k: usize, game: EfGame, cert_cap: usize) -> Result<Solution> {
    a.check_same_signature(b)?;
    if k == 0 {
        return Err(Error::ZeroBound);
    }
    Ok(solve_acyclic(&EfArena { a, b, k, game }, cert_cap))
}
