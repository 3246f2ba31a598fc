use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::structure::{gaifman_graph, Structure};

/// A forest order on the universe given by parent links.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForestCover {
    pub parent: Vec<Option<usize>>,
}

impl ForestCover {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Fails on a cycle of parent links or an out-of-range parent.
    pub fn check_forest(&self) -> std::result::Result<(), String> {
        let n = self.parent.len();
        for v in 0..n {
            let mut x = v;
            for _ in 0..=n {
                match self.parent[x] {
                    None => break,
                    Some(p) if p >= n => return Err(format!("parent #{p} out of range")),
                    Some(p) => x = p,
                }
            }
            if self.parent[x].is_some() {
                return Err(format!("cycle through #{v}"));
            }
        }
        Ok(())
    }

    /// Root first, ending in `v`. Assumes [`check_forest`](Self::check_forest) passed.
    pub fn chain(&self, v: usize) -> Vec<usize> {
        let mut out = vec![v];
        let mut x = v;
        while let Some(p) = self.parent[x] {
            out.push(p);
            x = p;
        }
        out.reverse();
        out
    }

    pub fn depth(&self, v: usize) -> usize {
        self.chain(v).len()
    }

    /// Number of elements on the longest root-to-leaf chain.
    pub fn height(&self) -> usize {
        (0..self.len()).map(|v| self.depth(v)).max().unwrap_or(0)
    }

    /// `u ≤ v` in the forest order.
    pub fn leq(&self, u: usize, v: usize) -> bool {
        let mut x = v;
        loop {
            if x == u {
                return true;
            }
            match self.parent[x] {
                Some(p) => x = p,
                None => return false,
            }
        }
    }

    pub fn comparable(&self, u: usize, v: usize) -> bool {
        self.leq(u, v) || self.leq(v, u)
    }

    /// A forest on the universe in which every Gaifman edge is comparable.
    pub fn verify(&self, structure: &Structure) -> std::result::Result<(), String> {
        if self.len() != structure.size() {
            return Err("cover does not match the universe".into());
        }
        self.check_forest()?;
        for (u, v) in gaifman_graph(structure).edges() {
            if !self.comparable(u, v) {
                return Err(format!(
                    "adjacent {} and {} are incomparable",
                    structure.name(u),
                    structure.name(v)
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self, structure: &Structure) -> Value {
        let parent: BTreeMap<&str, Option<&str>> = (0..self.len())
            .map(|v| (structure.name(v), self.parent[v].map(|p| structure.name(p))))
            .collect();
        json!({"parent": parent})
    }

    pub fn from_json(value: &Value, structure: &Structure) -> Result<Self> {
        let map = value
            .get("parent")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::InvalidWitness("missing parent map".into()))?;
        Ok(ForestCover { parent: parse_parent_map(map, structure)? })
    }
}

fn parse_parent_map(
    map: &serde_json::Map<String, Value>,
    structure: &Structure,
) -> Result<Vec<Option<usize>>> {
    let mut parent = vec![None; structure.size()];
    let mut seen = vec![false; structure.size()];
    for (k, v) in map {
        let i = structure.index(k).ok_or_else(|| Error::UnknownElement(k.clone()))?;
        seen[i] = true;
        parent[i] = match v {
            Value::Null => None,
            Value::String(p) => Some(structure.index(p).ok_or_else(|| Error::UnknownElement(p.clone()))?),
            other => return Err(Error::InvalidWitness(format!("bad parent {other}"))),
        };
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::InvalidWitness(format!("no parent entry for {}", structure.name(missing))));
    }
    Ok(parent)
}

/// A forest cover with a pebble in `1..=k` on every element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PebbledForestCover {
    pub cover: ForestCover,
    pub pebble: Vec<usize>,
}

impl PebbledForestCover {
    /// `u` is an active predecessor of `v`: `u ≤ v` and the pebble of `u` is
    /// not reused on the chain `(u, v]`.
    pub fn is_active(&self, u: usize, v: usize) -> bool {
        let chain = self.cover.chain(v);
        match chain.iter().position(|&x| x == u) {
            Some(i) => chain[i + 1..].iter().all(|&w| self.pebble[w] != self.pebble[u]),
            None => false,
        }
    }

    pub fn active_predecessors(&self, v: usize) -> Vec<usize> {
        let chain = self.cover.chain(v);
        chain
            .iter()
            .enumerate()
            .filter(|&(i, &u)| chain[i + 1..].iter().all(|&w| self.pebble[w] != self.pebble[u]))
            .map(|(_, &u)| u)
            .collect()
    }

    pub fn verify(&self, structure: &Structure, k: usize) -> std::result::Result<(), String> {
        self.cover.verify(structure)?;
        if self.pebble.len() != structure.size() {
            return Err("pebbling does not match the universe".into());
        }
        if let Some(v) = (0..self.pebble.len()).find(|&v| self.pebble[v] == 0 || self.pebble[v] > k) {
            return Err(format!("pebble {} of {} is outside 1..={k}", self.pebble[v], structure.name(v)));
        }
        for (u, v) in gaifman_graph(structure).edges() {
            let (lo, hi) = if self.cover.leq(u, v) { (u, v) } else { (v, u) };
            if !self.is_active(lo, hi) {
                return Err(format!(
                    "pebble {} of {} is reused below it before {}",
                    self.pebble[lo],
                    structure.name(lo),
                    structure.name(hi)
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self, structure: &Structure) -> Value {
        let mut v = self.cover.to_json(structure);
        let pebble: BTreeMap<&str, usize> =
            (0..self.pebble.len()).map(|x| (structure.name(x), self.pebble[x])).collect();
        v["pebble"] = json!(pebble);
        v
    }

    pub fn from_json(value: &Value, structure: &Structure) -> Result<Self> {
        let cover = ForestCover::from_json(value, structure)?;
        let map = value
            .get("pebble")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::InvalidWitness("missing pebble map".into()))?;
        let mut pebble = vec![0; structure.size()];
        for (k, v) in map {
            let i = structure.index(k).ok_or_else(|| Error::UnknownElement(k.clone()))?;
            pebble[i] = v
                .as_u64()
                .ok_or_else(|| Error::InvalidWitness(format!("bad pebble {v}")))? as usize;
        }
        Ok(PebbledForestCover { cover, pebble })
    }
}

/// A rooted tree of bags over the universe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub parent: Vec<Option<usize>>,
    pub bags: Vec<Vec<usize>>,
}

impl TreeDecomposition {
    pub fn width(&self) -> isize {
        self.bags.iter().map(|b| b.len() as isize).max().unwrap_or(0) - 1
    }

    pub fn node_count(&self) -> usize {
        self.bags.len()
    }

    pub fn is_ancestor(&self, x: usize, y: usize) -> bool {
        let mut z = y;
        loop {
            if z == x {
                return true;
            }
            match self.parent[z] {
                Some(p) => z = p,
                None => return false,
            }
        }
    }

    /// One root, no cycles, and TD1 to TD3.
    pub fn verify(&self, structure: &Structure) -> std::result::Result<(), String> {
        let n = self.bags.len();
        if self.parent.len() != n || n == 0 {
            return Err("a decomposition needs at least one node and a parent per node".into());
        }
        ForestCover { parent: self.parent.clone() }.check_forest()?;
        if self.parent.iter().filter(|p| p.is_none()).count() != 1 {
            return Err("decomposition must be a single tree".into());
        }
        let size = structure.size();
        if self.bags.iter().flatten().any(|&v| v >= size) {
            return Err("bag element outside the universe".into());
        }
        for v in 0..size {
            let holders: Vec<usize> = (0..n).filter(|&x| self.bags[x].contains(&v)).collect();
            if holders.is_empty() {
                return Err(format!("{} is in no bag", structure.name(v)));
            }
            let tops = holders
                .iter()
                .filter(|&&x| self.parent[x].is_none_or(|p| !self.bags[p].contains(&v)))
                .count();
            if tops != 1 {
                return Err(format!("bags containing {} are not connected", structure.name(v)));
            }
        }
        for (u, v) in gaifman_graph(structure).edges() {
            if !self.bags.iter().any(|b| b.contains(&u) && b.contains(&v)) {
                return Err(format!(
                    "edge {} {} lies in no bag",
                    structure.name(u),
                    structure.name(v)
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self, structure: &Structure) -> Value {
        let bags: Vec<Vec<&str>> = self
            .bags
            .iter()
            .map(|b| b.iter().map(|&v| structure.name(v)).collect())
            .collect();
        json!({
            "nodes": (0..self.bags.len()).collect::<Vec<_>>(),
            "parent": self.parent,
            "bags": bags,
        })
    }

    pub fn from_json(value: &Value, structure: &Structure) -> Result<Self> {
        #[derive(serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            nodes: Vec<usize>,
            parent: Vec<Option<usize>>,
            bags: Vec<Vec<String>>,
        }
        let raw: Raw = serde_json::from_value(value.clone())?;
        if raw.nodes != (0..raw.bags.len()).collect::<Vec<_>>() || raw.parent.len() != raw.bags.len() {
            return Err(Error::InvalidWitness("nodes must be 0..n with one parent and bag each".into()));
        }
        let bags = raw
            .bags
            .iter()
            .map(|b| {
                b.iter()
                    .map(|n| structure.index(n).ok_or_else(|| Error::UnknownElement(n.clone())))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TreeDecomposition { parent: raw.parent, bags })
    }
}
