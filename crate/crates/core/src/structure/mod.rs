//! Finite relational structures over a fixed signature.
//!
//! Elements are stored by index into an ordered universe; the string ids are
//! kept alongside for input and output. Relation interpretations are sets of
//! index tuples with a membership index and, per element, the list of tuples
//! the element occurs in.

mod graph;
mod hom;
mod json;

pub mod families;

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Error, Result};

pub use graph::{gaifman_graph, Graph};
pub use hom::{
    extends_partial_hom, extends_partial_iso, find_homomorphism, find_homomorphism_with,
    is_homomorphism, is_partial_isomorphism, pairs_form_partial_hom, pairs_form_partial_iso,
};
pub use json::{parse_structure, structure_to_json, validate_structure, RawStructure};

/// Relation symbols with their arities, ordered by name.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Signature {
    symbols: BTreeMap<String, usize>,
}

impl Signature {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (name, arity) in symbols {
            let name = name.into();
            if name.is_empty() {
                return Err(Error::EmptyRelationName);
            }
            if arity == 0 {
                return Err(Error::ZeroArity(name));
            }
            if map.insert(name.clone(), arity).is_some() {
                return Err(Error::DuplicateRelation(name));
            }
        }
        Ok(Signature { symbols: map })
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.symbols.get(name).copied()
    }

    /// Position of `name` in the name order, which is also the position of its
    /// interpretation in [`Structure::relations`].
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.keys().position(|n| n == name)
    }

    pub fn symbols(&self) -> impl Iterator<Item = (&str, usize)> {
        self.symbols.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn max_arity(&self) -> usize {
        self.symbols.values().copied().max().unwrap_or(0)
    }
}

/// The interpretation of one relation symbol.
#[derive(Clone, Debug)]
pub struct Relation {
    name: String,
    arity: usize,
    tuples: Vec<Vec<usize>>,
    members: HashSet<Vec<usize>>,
    incident: Vec<Vec<usize>>,
}

impl Relation {
    fn build(name: String, arity: usize, mut tuples: Vec<Vec<usize>>, size: usize) -> Self {
        tuples.sort();
        tuples.dedup();
        let mut incident = vec![Vec::new(); size];
        for (i, t) in tuples.iter().enumerate() {
            let mut seen: Vec<usize> = t.clone();
            seen.sort_unstable();
            seen.dedup();
            for e in seen {
                incident[e].push(i);
            }
        }
        let members = tuples.iter().cloned().collect();
        Relation {
            name,
            arity,
            tuples,
            members,
            incident,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        self.members.contains(tuple)
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Indices into [`Relation::tuples`] of the tuples mentioning `element`.
    pub fn incident(&self, element: usize) -> &[usize] {
        &self.incident[element]
    }
}

/// A finite σ-structure with a non-empty ordered universe.
#[derive(Clone, Debug)]
pub struct Structure {
    signature: Signature,
    universe: Vec<String>,
    lookup: HashMap<String, usize>,
    relations: Vec<Relation>,
}

impl Structure {
    /// Builds a structure from named tuples. Symbols of the signature that are
    /// missing from `relations` are interpreted as empty.
    pub fn new(
        signature: Signature,
        universe: Vec<String>,
        relations: BTreeMap<String, Vec<Vec<String>>>,
    ) -> Result<Self> {
        let lookup = universe_lookup(&universe)?;
        for name in relations.keys() {
            if signature.arity(name).is_none() {
                return Err(Error::UnknownRelation(name.clone()));
            }
        }
        let mut indexed = Vec::with_capacity(signature.len());
        for (name, arity) in signature.symbols() {
            let mut tuples = Vec::new();
            let mut seen = HashSet::new();
            for raw in relations.get(name).map(Vec::as_slice).unwrap_or(&[]) {
                if raw.len() != arity {
                    return Err(Error::ArityMismatch {
                        relation: name.to_string(),
                        expected: arity,
                        found: raw.len(),
                    });
                }
                let tuple = raw
                    .iter()
                    .map(|e| {
                        lookup
                            .get(e)
                            .copied()
                            .ok_or_else(|| Error::UnknownElement(e.clone()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if !seen.insert(tuple.clone()) {
                    return Err(Error::DuplicateTuple(name.to_string()));
                }
                tuples.push(tuple);
            }
            indexed.push(tuples);
        }
        Ok(Self::assemble(signature, universe, lookup, indexed))
    }

    /// Builds a structure from index tuples, one list per symbol in signature
    /// order. Duplicate tuples are merged.
    pub fn from_indexed(
        signature: Signature,
        universe: Vec<String>,
        relations: Vec<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        let lookup = universe_lookup(&universe)?;
        if relations.len() != signature.len() {
            return Err(Error::SignatureMismatch);
        }
        for ((name, arity), tuples) in signature.symbols().zip(&relations) {
            for t in tuples {
                if t.len() != arity {
                    return Err(Error::ArityMismatch {
                        relation: name.to_string(),
                        expected: arity,
                        found: t.len(),
                    });
                }
                if let Some(&bad) = t.iter().find(|&&e| e >= universe.len()) {
                    return Err(Error::UnknownElement(format!("#{bad}")));
                }
            }
        }
        Ok(Self::assemble(signature, universe, lookup, relations))
    }

    fn assemble(
        signature: Signature,
        universe: Vec<String>,
        lookup: HashMap<String, usize>,
        indexed: Vec<Vec<Vec<usize>>>,
    ) -> Self {
        let size = universe.len();
        let relations = signature
            .symbols()
            .zip(indexed)
            .map(|((name, arity), tuples)| Relation::build(name.to_string(), arity, tuples, size))
            .collect();
        Structure {
            signature,
            universe,
            lookup,
            relations,
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn size(&self) -> usize {
        self.universe.len()
    }

    pub fn universe(&self) -> &[String] {
        &self.universe
    }

    pub fn name(&self, element: usize) -> &str {
        &self.universe[element]
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.lookup.get(name).copied()
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.signature.index_of(name).map(|i| &self.relations[i])
    }

    pub fn same_signature(&self, other: &Structure) -> bool {
        self.signature == other.signature
    }

    pub fn check_same_signature(&self, other: &Structure) -> Result<()> {
        if self.same_signature(other) {
            Ok(())
        } else {
            Err(Error::SignatureMismatch)
        }
    }

    pub fn tuple_count(&self) -> usize {
        self.relations.iter().map(Relation::len).sum()
    }

    /// Named tuples of every relation, for serialization.
    pub fn named_relations(&self) -> BTreeMap<String, Vec<Vec<String>>> {
        self.relations
            .iter()
            .map(|r| {
                let tuples = r
                    .tuples()
                    .iter()
                    .map(|t| t.iter().map(|&e| self.universe[e].clone()).collect())
                    .collect();
                (r.name.clone(), tuples)
            })
            .collect()
    }

    /// The induced substructure on `keep` (in the given order).
    pub fn induced(&self, keep: &[usize]) -> Result<Structure> {
        let mut remap = vec![usize::MAX; self.size()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let universe = keep.iter().map(|&e| self.universe[e].clone()).collect();
        let relations = self
            .relations
            .iter()
            .map(|r| {
                r.tuples()
                    .iter()
                    .filter(|t| t.iter().all(|&e| remap[e] != usize::MAX))
                    .map(|t| t.iter().map(|&e| remap[e]).collect())
                    .collect()
            })
            .collect();
        Structure::from_indexed(self.signature.clone(), universe, relations)
    }

    /// A copy with the given tuple (relation index, tuple index) removed.
    pub fn without_tuple(&self, relation: usize, tuple: usize) -> Structure {
        let relations = self
            .relations
            .iter()
            .enumerate()
            .map(|(ri, r)| {
                r.tuples()
                    .iter()
                    .enumerate()
                    .filter(|&(ti, _)| !(ri == relation && ti == tuple))
                    .map(|(_, t)| t.clone())
                    .collect()
            })
            .collect();
        Structure::from_indexed(self.signature.clone(), self.universe.clone(), relations)
            .expect("removing a tuple keeps a structure valid")
    }
}

fn universe_lookup(universe: &[String]) -> Result<HashMap<String, usize>> {
    if universe.is_empty() {
        return Err(Error::EmptyUniverse);
    }
    let mut lookup = HashMap::with_capacity(universe.len());
    for (i, name) in universe.iter().enumerate() {
        if lookup.insert(name.clone(), i).is_some() {
            return Err(Error::DuplicateElement(name.clone()));
        }
    }
    Ok(lookup)
}

/// A structure with a distinguished element.
#[derive(Clone, Debug)]
pub struct PointedStructure {
    pub structure: Structure,
    pub point: usize,
}

impl PointedStructure {
    pub fn new(structure: Structure, point: usize) -> Result<Self> {
        if point >= structure.size() {
            return Err(Error::UnknownElement(format!("#{point}")));
        }
        Ok(PointedStructure { structure, point })
    }

    /// Rejects symbols of arity above 2.
    pub fn check_kripke(&self) -> Result<()> {
        check_kripke_arities(&self.structure)
    }
}

pub(crate) fn check_kripke_arities(s: &Structure) -> Result<()> {
    for (name, arity) in s.signature().symbols() {
        if arity > 2 {
            return Err(Error::ArityViolation {
                relation: name.to_string(),
                arity,
            });
        }
    }
    Ok(())
}

/// A functional set of (source, target) pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialMap {
    pairs: BTreeMap<usize, usize>,
}

impl PartialMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(pairs: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (a, b) in pairs {
            if let Some(prev) = map.insert(a, b) {
                if prev != b {
                    return Err(Error::InvalidMap(format!(
                        "element #{a} mapped to both #{prev} and #{b}"
                    )));
                }
            }
        }
        Ok(PartialMap { pairs: map })
    }

    pub fn get(&self, a: usize) -> Option<usize> {
        self.pairs.get(&a).copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().map(|(&a, &b)| (a, b))
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = HashSet::new();
        self.pairs.values().all(|b| seen.insert(*b))
    }

    /// The inverse relation, if it is again functional.
    pub fn inverse(&self) -> Option<PartialMap> {
        PartialMap::from_pairs(self.pairs().map(|(a, b)| (b, a))).ok()
    }
}
