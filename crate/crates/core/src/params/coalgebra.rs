use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde_json::{json, Value};

use crate::comonad::Play;
use crate::ef::{ef_relation_holds, EfPlay};
use crate::equiv::Comonad;
use crate::error::{Error, Result};
use crate::modal::{KripkeView, ModalPlay};
use crate::pebble::{pebble_relation_holds, PebblePlay};
use crate::structure::{PointedStructure, Structure};

use super::forest::{ForestCover, PebbledForestCover};

/// A structure map `α : A → G A`, given on every element it is defined on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coalgebra {
    Ef { k: usize, alpha: Vec<EfPlay> },
    Pebble { k: usize, alpha: Vec<PebblePlay> },
    /// Defined on the worlds reachable from `point`.
    Modal { k: usize, point: usize, alpha: BTreeMap<usize, ModalPlay> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Law {
    Shape,
    Counit,
    Comultiplication,
    Homomorphism,
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Law::Shape => "shape",
            Law::Counit => "counit",
            Law::Comultiplication => "comultiplication",
            Law::Homomorphism => "homomorphism",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub law: Law,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} law fails: {}", self.law, self.detail)
    }
}

impl Violation {
    fn new(law: Law, detail: impl Into<String>) -> Self {
        Violation { law, detail: detail.into() }
    }

    pub fn to_json(&self) -> Value {
        json!({"law": self.law.to_string(), "detail": self.detail})
    }
}

impl Coalgebra {
    pub fn comonad(&self) -> Comonad {
        match self {
            Coalgebra::Ef { .. } => Comonad::Ef,
            Coalgebra::Pebble { .. } => Comonad::Pebble,
            Coalgebra::Modal { .. } => Comonad::Modal,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            Coalgebra::Ef { k, .. } | Coalgebra::Pebble { k, .. } | Coalgebra::Modal { k, .. } => *k,
        }
    }

    pub fn to_json(&self, structure: &Structure) -> Value {
        let name = |v: usize| structure.name(v).to_string();
        let alpha: BTreeMap<String, Value> = match self {
            Coalgebra::Ef { alpha, .. } => alpha
                .iter()
                .enumerate()
                .map(|(v, s)| (name(v), json!(s.names(structure))))
                .collect(),
            Coalgebra::Pebble { alpha, .. } => alpha
                .iter()
                .enumerate()
                .map(|(v, s)| (name(v), json!(s.0.iter().map(|&(p, e)| json!([p, name(e)])).collect::<Vec<_>>())))
                .collect(),
            Coalgebra::Modal { alpha, .. } => alpha
                .iter()
                .map(|(&v, s)| {
                    let mut parts = vec![json!(name(s.root))];
                    for &(r, w) in &s.steps {
                        parts.push(json!(structure.relations()[r].name()));
                        parts.push(json!(name(w)));
                    }
                    (name(v), Value::Array(parts))
                })
                .collect(),
        };
        let mut out = json!({"comonad": self.comonad().to_string(), "k": self.k(), "alpha": alpha});
        if let Coalgebra::Modal { point, .. } = self {
            out["point"] = json!(name(*point));
        }
        out
    }

    /// Reads `{"alpha": {...}}` or a bare element-to-play map. For the modal
    /// comonad `point` must be given.
    pub fn from_json(
        value: &Value,
        comonad: Comonad,
        k: usize,
        structure: &Structure,
        point: Option<usize>,
    ) -> Result<Self> {
        let map = value
            .get("alpha")
            .unwrap_or(value)
            .as_object()
            .ok_or_else(|| Error::InvalidCoalgebra("expected a map from elements to plays".into()))?;
        let element = |v: &Value| -> Result<usize> {
            let n = v
                .as_str()
                .ok_or_else(|| Error::InvalidCoalgebra(format!("expected an element name, found {v}")))?;
            structure.index(n).ok_or_else(|| Error::UnknownElement(n.to_string()))
        };
        let array = |v: &Value| -> Result<Vec<Value>> {
            match v.as_array() {
                Some(a) if !a.is_empty() => Ok(a.clone()),
                _ => Err(Error::InvalidCoalgebra(format!("expected a non-empty play, found {v}"))),
            }
        };
        let mut entries = BTreeMap::new();
        for (key, play) in map {
            let v = structure.index(key).ok_or_else(|| Error::UnknownElement(key.clone()))?;
            entries.insert(v, array(play)?);
        }
        let total = |entries: &BTreeMap<usize, Vec<Value>>| -> Result<()> {
            match (0..structure.size()).find(|v| !entries.contains_key(v)) {
                Some(v) => Err(Error::InvalidCoalgebra(format!("no play for {}", structure.name(v)))),
                None => Ok(()),
            }
        };
        match comonad {
            Comonad::Ef => {
                total(&entries)?;
                let alpha = entries
                    .values()
                    .map(|moves| moves.iter().map(element).collect::<Result<Vec<_>>>().map(EfPlay))
                    .collect::<Result<_>>()?;
                Ok(Coalgebra::Ef { k, alpha })
            }
            Comonad::Pebble => {
                total(&entries)?;
                let mv = |m: &Value| -> Result<(usize, usize)> {
                    match m.as_array().map(Vec::as_slice) {
                        Some([p, e]) => Ok((
                            p.as_u64()
                                .ok_or_else(|| Error::InvalidCoalgebra(format!("bad pebble {p}")))?
                                as usize,
                            element(e)?,
                        )),
                        _ => Err(Error::InvalidCoalgebra(format!("expected [pebble, element], found {m}"))),
                    }
                };
                let alpha = entries
                    .values()
                    .map(|moves| moves.iter().map(mv).collect::<Result<Vec<_>>>().map(PebblePlay))
                    .collect::<Result<_>>()?;
                Ok(Coalgebra::Pebble { k, alpha })
            }
            Comonad::Modal => {
                let point = point.ok_or(Error::MissingPoint)?;
                let mut alpha = BTreeMap::new();
                for (v, parts) in entries {
                    if parts.len() % 2 == 0 {
                        return Err(Error::InvalidCoalgebra("modal plays alternate worlds and labels".into()));
                    }
                    let root = element(&parts[0])?;
                    let mut steps = Vec::new();
                    for pair in parts[1..].chunks(2) {
                        let label = pair[0].as_str().unwrap_or_default();
                        let r = structure
                            .signature()
                            .index_of(label)
                            .ok_or_else(|| Error::UnknownRelation(label.to_string()))?;
                        steps.push((r, element(&pair[1])?));
                    }
                    alpha.insert(v, ModalPlay { root, steps });
                }
                Ok(Coalgebra::Modal { k, point, alpha })
            }
        }
    }
}

/// The counit law `ε ∘ α = id` and the comultiplication law
/// `α(a_i) = [a_1, ..., a_i]` where `α(a) = [a_1, ..., a_n]`.
fn check_laws<P: Play>(
    structure: &Structure,
    alpha: impl Fn(usize) -> Option<P>,
    domain: &[usize],
) -> std::result::Result<(), Violation> {
    for &v in domain {
        let s = alpha(v).expect("domain is total");
        if s.last() != v {
            return Err(Violation::new(
                Law::Counit,
                format!("the play of {} ends in {}", structure.name(v), structure.name(s.last())),
            ));
        }
        for i in 1..s.len() {
            let p = s.prefix(i);
            if alpha(p.last()).as_ref() != Some(&p) {
                return Err(Violation::new(
                    Law::Comultiplication,
                    format!(
                        "{} occurs in the play of {} but its own play is not that prefix",
                        structure.name(p.last()),
                        structure.name(v)
                    ),
                ));
            }
        }
    }
    Ok(())
}

/// Checks shape, both coalgebra laws and that `α` is a homomorphism into the
/// comonad. Modal coalgebras are checked on the submodel generated by the point.
pub fn verify_coalgebra(coalgebra: &Coalgebra, structure: &Structure) -> Result<std::result::Result<(), Violation>> {
    let n = structure.size();
    let all: Vec<usize> = (0..n).collect();
    let shape = |detail: String| Ok(Err(Violation::new(Law::Shape, detail)));
    match coalgebra {
        Coalgebra::Ef { k, alpha } => {
            if alpha.len() != n {
                return shape("one play per element is required".into());
            }
            for (v, s) in alpha.iter().enumerate() {
                if s.0.is_empty() || s.0.len() > *k || s.0.iter().any(|&e| e >= n) {
                    return shape(format!("the play of {} is not a play of length 1..={k}", structure.name(v)));
                }
            }
            if let Err(e) = check_laws(structure, |v| alpha.get(v).cloned(), &all) {
                return Ok(Err(e));
            }
            for rel in structure.relations() {
                for t in rel.tuples() {
                    let plays: Vec<EfPlay> = t.iter().map(|&v| alpha[v].clone()).collect();
                    if !ef_relation_holds(structure, rel.name(), &plays)? {
                        return Ok(Err(hom_violation(structure, rel.name(), t)));
                    }
                }
            }
        }
        Coalgebra::Pebble { k, alpha } => {
            if alpha.len() != n {
                return shape("one play per element is required".into());
            }
            for (v, s) in alpha.iter().enumerate() {
                if s.0.is_empty() || s.0.iter().any(|&(p, e)| p == 0 || p > *k || e >= n) {
                    return shape(format!(
                        "the play of {} is not a play with pebbles 1..={k}",
                        structure.name(v)
                    ));
                }
            }
            if let Err(e) = check_laws(structure, |v| alpha.get(v).cloned(), &all) {
                return Ok(Err(e));
            }
            for rel in structure.relations() {
                for t in rel.tuples() {
                    let plays: Vec<PebblePlay> = t.iter().map(|&v| alpha[v].clone()).collect();
                    if !pebble_relation_holds(structure, rel.name(), &plays)? {
                        return Ok(Err(hom_violation(structure, rel.name(), t)));
                    }
                }
            }
        }
        Coalgebra::Modal { k, point, alpha } => {
            let view = KripkeView::new(structure)?;
            let reachable = generated(&view, *point);
            let keys: Vec<usize> = alpha.keys().copied().collect();
            if keys != reachable {
                return shape("plays must be given exactly on the worlds reachable from the point".into());
            }
            for (&v, s) in alpha {
                if s.root != *point || s.depth() > *k {
                    return shape(format!(
                        "the play of {} must start at the point and take at most {k} steps",
                        structure.name(v)
                    ));
                }
                let mut at = s.root;
                for &(r, w) in &s.steps {
                    let rel = &structure.relations()[r];
                    if rel.arity() != 2 || !rel.contains(&[at, w]) {
                        return shape(format!("the play of {} takes a missing transition", structure.name(v)));
                    }
                    at = w;
                }
            }
            if let Err(e) = check_laws(structure, |v| alpha.get(&v).cloned(), &reachable) {
                return Ok(Err(e));
            }
            for (l, &r) in view.labels.iter().enumerate() {
                for &x in &reachable {
                    for &y in view.successors(l, x) {
                        let mut extended = alpha[&x].clone();
                        extended.steps.push((r, y));
                        if alpha[&y] != extended {
                            return Ok(Err(hom_violation(structure, view.label_name(l), &[x, y])));
                        }
                    }
                }
            }
        }
    }
    Ok(Ok(()))
}

fn hom_violation(structure: &Structure, relation: &str, tuple: &[usize]) -> Violation {
    let names: Vec<&str> = tuple.iter().map(|&v| structure.name(v)).collect();
    Violation::new(
        Law::Homomorphism,
        format!("{relation}({}) is not preserved", names.join(", ")),
    )
}

/// Worlds reachable from `point`, sorted.
fn generated(view: &KripkeView, point: usize) -> Vec<usize> {
    let mut seen = vec![false; view.structure.size()];
    seen[point] = true;
    let mut queue = VecDeque::from([point]);
    while let Some(w) = queue.pop_front() {
        for l in 0..view.labels.len() {
            for &u in view.successors(l, w) {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    (0..seen.len()).filter(|&w| seen[w]).collect()
}

/// `α(v)` is the chain from the root down to `v`.
pub fn forest_cover_to_ef_coalgebra(cover: &ForestCover, k: usize) -> Result<Coalgebra> {
    cover.check_forest().map_err(Error::InvalidWitness)?;
    let height = cover.height();
    if height > k {
        return Err(Error::HeightExceeded { height, k });
    }
    let alpha = (0..cover.len()).map(|v| EfPlay(cover.chain(v))).collect();
    Ok(Coalgebra::Ef { k, alpha })
}

/// The parent of `v` is the second to last element of `α(v)`.
pub fn ef_coalgebra_to_forest_cover(coalgebra: &Coalgebra) -> Result<ForestCover> {
    match coalgebra {
        Coalgebra::Ef { alpha, .. } => Ok(ForestCover {
            parent: alpha
                .iter()
                .map(|s| s.0.len().checked_sub(2).map(|i| s.0[i]))
                .collect(),
        }),
        _ => Err(Error::InvalidCoalgebra("expected an ef coalgebra".into())),
    }
}

pub fn pebble_cover_to_coalgebra(cover: &PebbledForestCover, k: usize) -> Result<Coalgebra> {
    cover.cover.check_forest().map_err(Error::InvalidWitness)?;
    let alpha = (0..cover.cover.len())
        .map(|v| PebblePlay(cover.cover.chain(v).into_iter().map(|u| (cover.pebble[u], u)).collect()))
        .collect();
    Ok(Coalgebra::Pebble { k, alpha })
}

pub fn pebble_coalgebra_to_cover(coalgebra: &Coalgebra) -> Result<PebbledForestCover> {
    match coalgebra {
        Coalgebra::Pebble { alpha, .. } => Ok(PebbledForestCover {
            cover: ForestCover {
                parent: alpha
                    .iter()
                    .map(|s| s.0.len().checked_sub(2).map(|i| s.0[i].1))
                    .collect(),
            },
            pebble: alpha.iter().map(PebblePlay::last_pebble).collect(),
        }),
        _ => Err(Error::InvalidCoalgebra("expected a pebble coalgebra".into())),
    }
}

/// `[a_1, ..., a_j] ↦ [(1, a_1), ..., (j, a_j)]`.
pub fn ef_to_pebble_morphism(play: &EfPlay) -> PebblePlay {
    PebblePlay(play.0.iter().enumerate().map(|(i, &a)| (i + 1, a)).collect())
}

/// Composes an ef coalgebra with [`ef_to_pebble_morphism`].
pub fn ef_coalgebra_to_pebble(coalgebra: &Coalgebra) -> Result<Coalgebra> {
    match coalgebra {
        Coalgebra::Ef { k, alpha } => Ok(Coalgebra::Pebble {
            k: *k,
            alpha: alpha.iter().map(ef_to_pebble_morphism).collect(),
        }),
        _ => Err(Error::InvalidCoalgebra("expected an ef coalgebra".into())),
    }
}

/// The submodel generated by the point, when it is a synchronization tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyncTree {
    pub height: usize,
    /// Unique path from the point to each reachable world.
    pub paths: BTreeMap<usize, ModalPlay>,
}

impl SyncTree {
    /// The coalgebra at `k`, if the tree is no higher than `k`.
    pub fn coalgebra(&self, point: usize, k: usize) -> Result<Coalgebra> {
        if self.height > k {
            return Err(Error::HeightExceeded { height: self.height, k });
        }
        Ok(Coalgebra::Modal { k, point, alpha: self.paths.clone() })
    }
}

/// `None` when some reachable world has two incoming transitions or the point has one.
pub fn modal_depth(p: &PointedStructure) -> Result<Option<SyncTree>> {
    p.check_kripke()?;
    let view = KripkeView::new(&p.structure)?;
    let mut paths: BTreeMap<usize, ModalPlay> = BTreeMap::new();
    paths.insert(p.point, ModalPlay { root: p.point, steps: Vec::new() });
    let mut queue = VecDeque::from([p.point]);
    while let Some(w) = queue.pop_front() {
        for (l, &r) in view.labels.iter().enumerate() {
            for &u in view.successors(l, w) {
                if paths.contains_key(&u) {
                    return Ok(None);
                }
                let mut play = paths[&w].clone();
                play.steps.push((r, u));
                paths.insert(u, play);
                queue.push_back(u);
            }
        }
    }
    let height = paths.values().map(ModalPlay::depth).max().unwrap_or(0);
    Ok(Some(SyncTree { height, paths }))
}
