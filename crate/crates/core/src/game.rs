//! Two-player model-comparison games on finite arenas.
//!
//! A round starts with Spoiler picking a challenge at the current position.
//! The challenge offers rows (Spoiler's possible moves) and columns
//! (Duplicator's possible answers); an edge `(row, col)` is legal when it leads
//! to a position inside the winning set. Under [`Rule::Alternating`] Spoiler
//! picks a row and Duplicator answers with any legal column. Under
//! [`Rule::Bijective`] Duplicator first commits to a bijection rows -> columns
//! and Spoiler then picks a row, so Duplicator needs a perfect matching of
//! legal edges into winning positions.
//!
//! Bounded games carry their round counter in the position, which makes the
//! arena acyclic; unbounded games are solved as a greatest fixpoint.

use std::collections::{HashMap, HashSet, VecDeque};
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Alternating,
    Bijective,
}

/// One Spoiler challenge at a position.
#[derive(Clone, Debug)]
pub struct Challenge<P> {
    pub label: Value,
    pub rows: Vec<Value>,
    pub cols: Vec<Value>,
    /// Per row, the legal `(column, successor)` pairs in ascending column order.
    pub edges: Vec<Vec<(usize, P)>>,
}

pub trait Arena {
    type Pos: Clone + Eq + Hash;

    fn rule(&self) -> Rule;

    /// The starting position, or `None` when Duplicator has already lost.
    fn initial(&self) -> Option<Self::Pos>;

    /// Every challenge Spoiler may raise; empty when the game is over.
    fn challenges(&self, pos: &Self::Pos) -> Vec<Challenge<Self::Pos>>;

    fn describe(&self, pos: &Self::Pos) -> Value;
}

/// Duplicator's answer to a challenge: a column per row.
fn answer<P>(rule: Rule, ch: &Challenge<P>, mut winning: impl FnMut(&P) -> bool) -> Option<Vec<usize>> {
    match rule {
        Rule::Alternating => ch
            .edges
            .iter()
            .map(|row| row.iter().find(|(_, q)| winning(q)).map(|(c, _)| *c))
            .collect(),
        Rule::Bijective => {
            if ch.rows.len() != ch.cols.len() {
                return None;
            }
            let adjacency: Vec<Vec<usize>> = ch
                .edges
                .iter()
                .map(|row| row.iter().filter(|(_, q)| winning(q)).map(|(c, _)| *c).collect())
                .collect();
            perfect_matching(&adjacency, ch.cols.len())
        }
    }
}

/// A perfect matching of rows into `cols` columns, as a column per row.
pub fn perfect_matching(adjacency: &[Vec<usize>], cols: usize) -> Option<Vec<usize>> {
    if adjacency.len() != cols {
        return None;
    }
    let mut owner: Vec<Option<usize>> = vec![None; cols];
    for row in 0..adjacency.len() {
        let mut seen = vec![false; cols];
        if !augment(row, adjacency, &mut owner, &mut seen) {
            return None;
        }
    }
    let mut out = vec![0; adjacency.len()];
    for (c, r) in owner.iter().enumerate() {
        out[r.expect("perfect")] = c;
    }
    Some(out)
}

fn augment(row: usize, adjacency: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &c in &adjacency[row] {
        if seen[c] {
            continue;
        }
        seen[c] = true;
        if owner[c].is_none_or(|r| augment(r, adjacency, owner, seen)) {
            owner[c] = Some(row);
            return true;
        }
    }
    false
}

/// Duplicator's recorded answers at one (position, challenge).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyEntry {
    pub position: Value,
    pub challenge: Value,
    pub answers: Vec<(Value, Value)>,
}

/// A Duplicator strategy restricted to the positions it reaches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyCertificate {
    pub rule: Rule,
    pub entries: Vec<StrategyEntry>,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub duplicator_wins: bool,
    pub certificate: Option<StrategyCertificate>,
}

/// Solves an arena whose positions cannot repeat along a play.
pub fn solve_acyclic<A: Arena>(arena: &A, cert_cap: usize) -> Solution {
    let mut memo: HashMap<A::Pos, bool> = HashMap::new();
    let Some(start) = arena.initial() else {
        return Solution { duplicator_wins: false, certificate: None };
    };
    let wins = acyclic_wins(arena, &start, &mut memo);
    let certificate = if wins {
        extract(arena, &start, cert_cap, |p| acyclic_wins(arena, p, &mut memo))
    } else {
        None
    };
    Solution { duplicator_wins: wins, certificate }
}

fn acyclic_wins<A: Arena>(arena: &A, pos: &A::Pos, memo: &mut HashMap<A::Pos, bool>) -> bool {
    if let Some(&w) = memo.get(pos) {
        return w;
    }
    let rule = arena.rule();
    let mut w = true;
    for ch in arena.challenges(pos) {
        if answer(rule, &ch, |q| acyclic_wins(arena, q, memo)).is_none() {
            w = false;
            break;
        }
    }
    memo.insert(pos.clone(), w);
    w
}

/// Solves an arena as the greatest fixpoint: a position is winning unless
/// some challenge there cannot be answered inside the winning positions.
pub fn solve_gfp<A: Arena>(arena: &A, cert_cap: usize) -> Solution {
    let Some(start) = arena.initial() else {
        return Solution { duplicator_wins: false, certificate: None };
    };
    let rule = arena.rule();
    let mut ids: HashMap<A::Pos, usize> = HashMap::new();
    let mut positions: Vec<A::Pos> = Vec::new();
    let mut graph: Vec<Vec<Challenge<usize>>> = Vec::new();
    ids.insert(start.clone(), 0);
    positions.push(start.clone());
    let mut next = 0;
    while next < positions.len() {
        let pos = positions[next].clone();
        let mut compact = Vec::new();
        for ch in arena.challenges(&pos) {
            let edges = ch
                .edges
                .into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|(c, q)| {
                            let id = *ids.entry(q.clone()).or_insert_with(|| {
                                positions.push(q);
                                positions.len() - 1
                            });
                            (c, id)
                        })
                        .collect()
                })
                .collect();
            compact.push(Challenge {
                label: Value::Null,
                rows: vec![Value::Null; ch.rows.len()],
                cols: vec![Value::Null; ch.cols.len()],
                edges,
            });
        }
        graph.push(compact);
        next += 1;
    }
    let mut alive = vec![true; positions.len()];
    loop {
        let mut changed = false;
        for id in 0..positions.len() {
            if alive[id] && graph[id].iter().any(|ch| answer(rule, ch, |&q| alive[q]).is_none()) {
                alive[id] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let wins = alive[0];
    let certificate = if wins {
        extract(arena, &start, cert_cap, |p| ids.get(p).is_some_and(|&i| alive[i]))
    } else {
        None
    };
    Solution { duplicator_wins: wins, certificate }
}

fn extract<A: Arena>(
    arena: &A,
    start: &A::Pos,
    cap: usize,
    mut winning: impl FnMut(&A::Pos) -> bool,
) -> Option<StrategyCertificate> {
    let rule = arena.rule();
    let mut entries = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    let mut queue = VecDeque::from([start.clone()]);
    seen.insert(arena.describe(start).to_string());
    while let Some(pos) = queue.pop_front() {
        let position = arena.describe(&pos);
        for ch in arena.challenges(&pos) {
            let cols = answer(rule, &ch, &mut winning).expect("winning position has answers");
            let mut answers = Vec::with_capacity(cols.len());
            for (row, &c) in cols.iter().enumerate() {
                answers.push((ch.rows[row].clone(), ch.cols[c].clone()));
                let q = &ch.edges[row].iter().find(|(cc, _)| *cc == c).expect("legal").1;
                if seen.insert(arena.describe(q).to_string()) {
                    queue.push_back(q.clone());
                }
            }
            entries.push(StrategyEntry { position: position.clone(), challenge: ch.label, answers });
            if entries.len() > cap {
                return None;
            }
        }
    }
    Some(StrategyCertificate { rule, entries })
}

/// Replays `cert` from the initial position: every reachable challenge must
/// be answered, every answer must be legal, and bijective answers must be
/// bijections.
pub fn verify_certificate<A: Arena>(arena: &A, cert: &StrategyCertificate) -> Result<(), String> {
    if cert.rule != arena.rule() {
        return Err("certificate is for a different game".into());
    }
    let mut index: HashMap<(String, String), &StrategyEntry> = HashMap::new();
    for e in &cert.entries {
        let key = (e.position.to_string(), e.challenge.to_string());
        if index.insert(key, e).is_some() {
            return Err(format!("duplicate entry at {} / {}", e.position, e.challenge));
        }
    }
    let start = arena.initial().ok_or("initial position is already lost")?;
    let mut seen: HashSet<String> = HashSet::from([arena.describe(&start).to_string()]);
    let mut queue = VecDeque::from([start]);
    while let Some(pos) = queue.pop_front() {
        let position = arena.describe(&pos);
        for ch in arena.challenges(&pos) {
            let entry = index
                .get(&(position.to_string(), ch.label.to_string()))
                .ok_or_else(|| format!("no answer at {position} for challenge {}", ch.label))?;
            if entry.answers.len() != ch.rows.len() {
                return Err(format!("answers at {position} / {} do not cover every move", ch.label));
            }
            let mut used_rows = vec![false; ch.rows.len()];
            let mut used_cols = vec![false; ch.cols.len()];
            for (r, c) in &entry.answers {
                let row = ch.rows.iter().position(|x| x == r).ok_or_else(|| format!("unknown move {r}"))?;
                let col = ch.cols.iter().position(|x| x == c).ok_or_else(|| format!("unknown answer {c}"))?;
                if std::mem::replace(&mut used_rows[row], true) {
                    return Err(format!("move {r} answered twice"));
                }
                if cert.rule == Rule::Bijective && std::mem::replace(&mut used_cols[col], true) {
                    return Err(format!("answer {c} used twice in a bijection"));
                }
                let q = &ch.edges[row]
                    .iter()
                    .find(|(cc, _)| *cc == col)
                    .ok_or_else(|| format!("answer {c} to {r} at {position} leaves the winning set"))?
                    .1;
                if seen.insert(arena.describe(q).to_string()) {
                    queue.push_back(q.clone());
                }
            }
            if cert.rule == Rule::Bijective && ch.rows.len() != ch.cols.len() {
                return Err("bijection between sets of different sizes".into());
            }
        }
    }
    Ok(())
}
