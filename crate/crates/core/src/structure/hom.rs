//! Homomorphisms, partial homomorphisms and partial isomorphisms.
//!
//! The search treats every tuple of the source as a constraint whose allowed
//! assignments are the tuples of the matching target relation, and maintains
//! generalized arc consistency while assigning variables in universe order.

use std::collections::VecDeque;

use super::{PartialMap, Structure};
use crate::error::{Error, Result};

pub fn is_homomorphism(map: &[usize], source: &Structure, target: &Structure) -> Result<bool> {
    source.check_same_signature(target)?;
    if map.len() != source.size() {
        return Err(Error::InvalidMap(format!(
            "map has {} entries but the source has {} elements",
            map.len(),
            source.size()
        )));
    }
    if let Some(&bad) = map.iter().find(|&&b| b >= target.size()) {
        return Err(Error::InvalidMap(format!("image #{bad} outside the target")));
    }
    let mut image = Vec::new();
    Ok(source
        .relations()
        .iter()
        .zip(target.relations())
        .all(|(ra, rb)| {
            ra.tuples().iter().all(|t| {
                image.clear();
                image.extend(t.iter().map(|&e| map[e]));
                rb.contains(&image)
            })
        }))
}

/// Some homomorphism `source -> target`, or `None`.
pub fn find_homomorphism(source: &Structure, target: &Structure) -> Result<Option<Vec<usize>>> {
    find_homomorphism_with(source, target, &[])
}

/// Like [`find_homomorphism`], with some images fixed in advance.
pub fn find_homomorphism_with(
    source: &Structure,
    target: &Structure,
    fixed: &[(usize, usize)],
) -> Result<Option<Vec<usize>>> {
    source.check_same_signature(target)?;
    let search = Search::new(source, target);
    let mut domains = vec![vec![true; target.size()]; source.size()];
    for &(a, b) in fixed {
        if a >= source.size() || b >= target.size() {
            return Err(Error::InvalidMap(format!("fixed pair (#{a}, #{b}) out of range")));
        }
        let keep = domains[a][b];
        domains[a].iter_mut().for_each(|d| *d = false);
        domains[a][b] = keep;
    }
    if domains.iter().any(|d| !d.contains(&true)) {
        return Ok(None);
    }
    let all: Vec<usize> = (0..search.constraints.len()).collect();
    if !search.propagate(&mut domains, all) {
        return Ok(None);
    }
    Ok(search.solve(domains, 0))
}

struct Constraint {
    relation: usize,
    scope: Vec<usize>,
    /// Pairs of scope positions holding the same variable.
    repeats: Vec<(usize, usize)>,
    vars: Vec<usize>,
}

struct Search<'a> {
    target: &'a Structure,
    constraints: Vec<Constraint>,
    watching: Vec<Vec<usize>>,
}

impl<'a> Search<'a> {
    fn new(source: &Structure, target: &'a Structure) -> Self {
        let mut constraints = Vec::new();
        let mut watching = vec![Vec::new(); source.size()];
        for (ri, rel) in source.relations().iter().enumerate() {
            for t in rel.tuples() {
                let mut repeats = Vec::new();
                for i in 0..t.len() {
                    for j in i + 1..t.len() {
                        if t[i] == t[j] {
                            repeats.push((i, j));
                        }
                    }
                }
                let mut vars = t.clone();
                vars.sort_unstable();
                vars.dedup();
                for &v in &vars {
                    watching[v].push(constraints.len());
                }
                constraints.push(Constraint {
                    relation: ri,
                    scope: t.clone(),
                    repeats,
                    vars,
                });
            }
        }
        Search {
            target,
            constraints,
            watching,
        }
    }

    fn propagate(&self, domains: &mut [Vec<bool>], initial: Vec<usize>) -> bool {
        let mut queued = vec![false; self.constraints.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for c in initial {
            if !queued[c] {
                queued[c] = true;
                queue.push_back(c);
            }
        }
        let width = self.target.size();
        while let Some(ci) = queue.pop_front() {
            queued[ci] = false;
            let c = &self.constraints[ci];
            let mut support: Vec<Vec<bool>> = vec![vec![false; width]; c.vars.len()];
            let slot = |v: usize| c.vars.binary_search(&v).expect("scope var");
            for u in self.target.relations()[c.relation].tuples() {
                let fits = c.scope.iter().zip(u).all(|(&v, &b)| domains[v][b])
                    && c.repeats.iter().all(|&(i, j)| u[i] == u[j]);
                if fits {
                    for (&v, &b) in c.scope.iter().zip(u) {
                        support[slot(v)][b] = true;
                    }
                }
            }
            for (vi, &v) in c.vars.iter().enumerate() {
                let mut changed = false;
                for b in 0..width {
                    if domains[v][b] && !support[vi][b] {
                        domains[v][b] = false;
                        changed = true;
                    }
                }
                if changed {
                    if !domains[v].contains(&true) {
                        return false;
                    }
                    for &other in &self.watching[v] {
                        if other != ci && !queued[other] {
                            queued[other] = true;
                            queue.push_back(other);
                        }
                    }
                }
            }
        }
        true
    }

    fn solve(&self, domains: Vec<Vec<bool>>, var: usize) -> Option<Vec<usize>> {
        if var == domains.len() {
            return Some(
                domains
                    .iter()
                    .map(|d| d.iter().position(|&x| x).expect("non-empty domain"))
                    .collect(),
            );
        }
        let values: Vec<usize> = (0..domains[var].len()).filter(|&b| domains[var][b]).collect();
        if values.len() == 1 {
            return self.solve(domains, var + 1);
        }
        for b in values {
            let mut next = domains.clone();
            next[var].iter_mut().for_each(|d| *d = false);
            next[var][b] = true;
            if self.propagate(&mut next, self.watching[var].clone()) {
                if let Some(found) = self.solve(next, var + 1) {
                    return Some(found);
                }
            }
        }
        None
    }
}

/// Injective, and for every tuple over the domain, membership in the source
/// agrees with membership of the image in the target.
pub fn is_partial_isomorphism(map: &PartialMap, source: &Structure, target: &Structure) -> bool {
    if !source.same_signature(target) || !map.is_injective() {
        return false;
    }
    let pairs: Vec<(usize, usize)> = map.pairs().collect();
    pairs_form_partial_iso(&pairs, source, target)
}

fn image_of(pairs: &[(usize, usize)], a: usize) -> Option<usize> {
    pairs.iter().find(|p| p.0 == a).map(|p| p.1)
}

fn preimage_of(pairs: &[(usize, usize)], b: usize) -> Option<usize> {
    pairs.iter().find(|p| p.1 == b).map(|p| p.0)
}

/// Functional, injective, and relations are preserved and reflected on the
/// domain. Pairs may repeat.
pub fn pairs_form_partial_iso(
    pairs: &[(usize, usize)],
    source: &Structure,
    target: &Structure,
) -> bool {
    for (i, &(a, b)) in pairs.iter().enumerate() {
        for &(a2, b2) in &pairs[i + 1..] {
            if (a == a2) != (b == b2) {
                return false;
            }
        }
    }
    let mut buf = Vec::new();
    for (ra, rb) in source.relations().iter().zip(target.relations()) {
        for t in ra.tuples() {
            if mapped(t, pairs, image_of, &mut buf) && !rb.contains(&buf) {
                return false;
            }
        }
        for t in rb.tuples() {
            if mapped(t, pairs, preimage_of, &mut buf) && !ra.contains(&buf) {
                return false;
            }
        }
    }
    true
}

type Lookup = fn(&[(usize, usize)], usize) -> Option<usize>;

fn mapped(
    t: &[usize],
    pairs: &[(usize, usize)],
    f: Lookup,
    buf: &mut Vec<usize>,
) -> bool {
    buf.clear();
    for &e in t {
        match f(pairs, e) {
            Some(x) => buf.push(x),
            None => return false,
        }
    }
    true
}

/// Assuming `pairs` is a partial isomorphism, whether adding `(a, b)` keeps it one.
pub fn extends_partial_iso(
    pairs: &[(usize, usize)],
    (a, b): (usize, usize),
    source: &Structure,
    target: &Structure,
) -> bool {
    match (image_of(pairs, a), preimage_of(pairs, b)) {
        (Some(y), _) => return y == b,
        (None, Some(_)) => return false,
        (None, None) => {}
    }
    let mut buf = Vec::new();
    let fwd = |e: usize| if e == a { Some(b) } else { image_of(pairs, e) };
    let bwd = |e: usize| if e == b { Some(a) } else { preimage_of(pairs, e) };
    for (ra, rb) in source.relations().iter().zip(target.relations()) {
        for &ti in ra.incident(a) {
            buf.clear();
            if ra.tuples()[ti].iter().all(|&e| fwd(e).map(|x| buf.push(x)).is_some())
                && !rb.contains(&buf)
            {
                return false;
            }
        }
        for &ti in rb.incident(b) {
            buf.clear();
            if rb.tuples()[ti].iter().all(|&e| bwd(e).map(|x| buf.push(x)).is_some())
                && !ra.contains(&buf)
            {
                return false;
            }
        }
    }
    true
}

/// Whether the relation `pairs` (not necessarily functional) preserves every
/// tuple lying inside its domain: for each such tuple, every choice of
/// related images is a tuple of the target.
pub fn pairs_form_partial_hom(
    pairs: &[(usize, usize)],
    source: &Structure,
    target: &Structure,
) -> bool {
    source
        .relations()
        .iter()
        .zip(target.relations())
        .all(|(ra, rb)| {
            ra.tuples()
                .iter()
                .all(|t| all_images_in(t, pairs, None, rb))
        })
}

/// Assuming `pairs` is a partial homomorphism, whether adding `(a, b)` keeps
/// it one.
pub fn extends_partial_hom(
    pairs: &[(usize, usize)],
    (a, b): (usize, usize),
    source: &Structure,
    target: &Structure,
) -> bool {
    source
        .relations()
        .iter()
        .zip(target.relations())
        .all(|(ra, rb)| {
            ra.incident(a)
                .iter()
                .all(|&ti| all_images_in(&ra.tuples()[ti], pairs, Some((a, b)), rb))
        })
}

fn all_images_in(
    t: &[usize],
    pairs: &[(usize, usize)],
    extra: Option<(usize, usize)>,
    rb: &super::Relation,
) -> bool {
    let options: Vec<Vec<usize>> = t
        .iter()
        .map(|&e| {
            pairs
                .iter()
                .chain(extra.iter())
                .filter(|p| p.0 == e)
                .map(|p| p.1)
                .collect()
        })
        .collect();
    if options.iter().any(Vec::is_empty) {
        return true;
    }
    let mut choice = vec![0usize; t.len()];
    let mut image = vec![0usize; t.len()];
    loop {
        for (i, opts) in options.iter().enumerate() {
            image[i] = opts[choice[i]];
        }
        if !rb.contains(&image) {
            return false;
        }
        let mut i = 0;
        loop {
            if i == t.len() {
                return true;
            }
            choice[i] += 1;
            if choice[i] < options[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}
