//! What the three comonads share: plays ordered by prefix, a counit reading the
//! last element, and the Kleisli coextension that re-plays every prefix
//! through a strategy.
//!
//! Finite fragments of a comonad universe are kept as a [`PlayForest`]: the
//! plays as nodes, with the covering relation as the parent link.

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::structure::Structure;

/// Default bound on the number of plays built by materialization and unfolding.
pub const DEFAULT_CAP: usize = 200_000;

/// A play: a non-empty sequence of moves, each ending in an element.
pub trait Play: Clone + Eq + Hash + Ord + Debug {
    /// Number of moves.
    fn len(&self) -> usize;

    /// Element of the last move: the counit.
    fn last(&self) -> usize;

    /// The prefix with the first `n` moves, `1 <= n <= len`.
    fn prefix(&self, n: usize) -> Self;

    /// Same shape, element of move `i` replaced by `elements[i]`.
    fn with_elements(&self, elements: &[usize]) -> Self;

    /// Human-readable name used as element id when materialized.
    fn label(&self, structure: &Structure) -> String;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn prefixes(&self) -> Vec<Self> {
        (1..=self.len()).map(|n| self.prefix(n)).collect()
    }

    fn is_prefix_of(&self, other: &Self) -> bool {
        self.len() <= other.len() && other.prefix(self.len()) == *self
    }

    fn comparable(&self, other: &Self) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// `other` extends `self` by exactly one move.
    fn covered_by(&self, other: &Self) -> bool {
        other.len() == self.len() + 1 && self.is_prefix_of(other)
    }
}

/// The counit.
pub fn counit<P: Play>(play: &P) -> usize {
    play.last()
}

/// Kleisli coextension: `f*(s)` keeps the moves of `s` and answers move `i`
/// with `f` applied to the prefix ending there.
pub fn coextend<P: Play>(play: &P, mut f: impl FnMut(&P) -> usize) -> P {
    let answers: Vec<usize> = (1..=play.len()).map(|n| f(&play.prefix(n))).collect();
    play.with_elements(&answers)
}

/// Functorial action `G h = (h . counit)*`.
pub fn map_play<P: Play>(play: &P, h: &[usize]) -> P {
    coextend(play, |s| h[s.last()])
}

/// A prefix-closed finite set of plays.
#[derive(Clone, Debug)]
pub struct PlayForest<P> {
    plays: Vec<P>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    by_end: Vec<Vec<usize>>,
    index: HashMap<P, usize>,
}

impl<P: Play> PlayForest<P> {
    /// Breadth-first closure of `roots` under `extend`, stopping at `max_len`
    /// moves. Fails once more than `cap` plays would be produced.
    pub fn grow(
        roots: Vec<P>,
        max_len: usize,
        cap: usize,
        universe_size: usize,
        mut extend: impl FnMut(&P) -> Vec<P>,
    ) -> Result<Self> {
        let mut forest = PlayForest {
            plays: Vec::new(),
            parent: Vec::new(),
            children: Vec::new(),
            depth: Vec::new(),
            by_end: vec![Vec::new(); universe_size],
            index: HashMap::new(),
        };
        for r in roots {
            forest.push(r, None, cap)?;
        }
        let mut next = 0;
        while next < forest.plays.len() {
            if forest.plays[next].len() < max_len {
                let base = forest.plays[next].clone();
                for child in extend(&base) {
                    forest.push(child, Some(next), cap)?;
                }
            }
            next += 1;
        }
        Ok(forest)
    }

    fn push(&mut self, play: P, parent: Option<usize>, cap: usize) -> Result<()> {
        if self.plays.len() >= cap {
            return Err(Error::CapExceeded {
                required: self.plays.len() as u128 + 1,
                cap,
            });
        }
        let id = self.plays.len();
        self.depth.push(parent.map_or(0, |p| self.depth[p] + 1));
        self.by_end[play.last()].push(id);
        self.index.insert(play.clone(), id);
        self.plays.push(play);
        self.parent.push(parent);
        self.children.push(Vec::new());
        if let Some(p) = parent {
            self.children[p].push(id);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.plays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plays.is_empty()
    }

    pub fn plays(&self) -> &[P] {
        &self.plays
    }

    pub fn play(&self, id: usize) -> &P {
        &self.plays[id]
    }

    pub fn id(&self, play: &P) -> Option<usize> {
        self.index.get(play).copied()
    }

    pub fn parent(&self, id: usize) -> Option<usize> {
        self.parent[id]
    }

    pub fn children(&self, id: usize) -> &[usize] {
        &self.children[id]
    }

    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.parent[i].is_none())
    }

    pub fn end(&self, id: usize) -> usize {
        self.plays[id].last()
    }

    /// Prefix-comparability of two nodes.
    pub fn comparable(&self, mut x: usize, mut y: usize) -> bool {
        while self.depth[x] > self.depth[y] {
            x = self.parent[x].expect("deeper node has a parent");
        }
        while self.depth[y] > self.depth[x] {
            y = self.parent[y].expect("deeper node has a parent");
        }
        x == y
    }

    fn ancestors_inclusive(&self, mut x: usize) -> Vec<usize> {
        let mut out = vec![x];
        while let Some(p) = self.parent[x] {
            out.push(p);
            x = p;
        }
        out
    }

    fn strict_descendants(&self, x: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack: Vec<usize> = self.children[x].clone();
        while let Some(y) = stack.pop() {
            out.push(y);
            stack.extend_from_slice(&self.children[y]);
        }
        out
    }

    /// Every tuple of pairwise comparable nodes whose ends are `ends`.
    pub fn comparable_tuples(&self, ends: &[usize], mut visit: impl FnMut(&[usize])) {
        let mut chosen = Vec::with_capacity(ends.len());
        self.extend_tuple(ends, &mut chosen, None, &mut visit);
    }

    fn extend_tuple(
        &self,
        ends: &[usize],
        chosen: &mut Vec<usize>,
        deepest: Option<usize>,
        visit: &mut impl FnMut(&[usize]),
    ) {
        let i = chosen.len();
        if i == ends.len() {
            visit(chosen);
            return;
        }
        let candidates: Vec<usize> = match deepest {
            None => self.by_end[ends[i]].clone(),
            Some(m) => self
                .ancestors_inclusive(m)
                .into_iter()
                .chain(self.strict_descendants(m))
                .filter(|&x| self.end(x) == ends[i])
                .collect(),
        };
        for c in candidates {
            let next_deepest = match deepest {
                Some(m) if self.depth[m] >= self.depth[c] => m,
                _ => c,
            };
            chosen.push(c);
            self.extend_tuple(ends, chosen, Some(next_deepest), visit);
            chosen.pop();
        }
    }

    /// Relations lifted along the forest: for each tuple of `source`, every
    /// pairwise comparable tuple of plays with those ends that also satisfies
    /// `accept`.
    pub fn lift_relations(
        &self,
        source: &Structure,
        mut accept: impl FnMut(&[usize]) -> bool,
    ) -> Vec<Vec<Vec<usize>>> {
        source
            .relations()
            .iter()
            .map(|rel| {
                let mut out = Vec::new();
                for t in rel.tuples() {
                    self.comparable_tuples(t, |nodes| {
                        if accept(nodes) {
                            out.push(nodes.to_vec());
                        }
                    });
                }
                out
            })
            .collect()
    }

    /// The forest as a structure over `source`'s signature.
    pub fn to_structure(
        &self,
        source: &Structure,
        relations: Vec<Vec<Vec<usize>>>,
    ) -> Result<Structure> {
        let universe = self.plays.iter().map(|p| p.label(source)).collect();
        Structure::from_indexed(source.signature().clone(), universe, relations)
    }
}

/// `Σ_{i=1..len} base^i`, saturating.
pub fn geometric_count(base: usize, len: usize) -> u128 {
    let mut total: u128 = 0;
    let mut term: u128 = 1;
    for _ in 0..len {
        term = term.saturating_mul(base as u128);
        total = total.saturating_add(term);
    }
    total
}

/// Serializes a list of ids as a JSON array string; used for unambiguous play labels.
pub(crate) fn json_label(parts: Vec<serde_json::Value>) -> String {
    serde_json::Value::Array(parts).to_string()
}
