use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::structure::{gaifman_graph, Structure};

use super::forest::{ForestCover, PebbledForestCover, TreeDecomposition};

pub const TREE_DEPTH_LIMIT: usize = 20;
pub const TREE_WIDTH_LIMIT: usize = 18;

fn masks(structure: &Structure, limit: usize) -> Result<Vec<u32>> {
    let n = structure.size();
    if n > limit {
        return Err(Error::BoundExceeded { size: n, limit });
    }
    let g = gaifman_graph(structure);
    Ok((0..n).map(|v| g.neighbor_mask(v) as u32).collect())
}

fn bits(mut mask: u32) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (mask != 0).then(|| {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            i
        })
    })
}

fn neighbourhood(adj: &[u32], set: u32) -> u32 {
    bits(set).fold(0, |m, v| m | adj[v])
}

fn components(adj: &[u32], mut mask: u32) -> Vec<u32> {
    let mut out = Vec::new();
    while mask != 0 {
        let mut comp = mask & mask.wrapping_neg();
        loop {
            let grown = comp | (neighbourhood(adj, comp) & mask);
            if grown == comp {
                break;
            }
            comp = grown;
        }
        out.push(comp);
        mask &= !comp;
    }
    out
}

struct DepthSearch<'a> {
    adj: &'a [u32],
    /// Connected sets of size at least 2: (depth, best root).
    memo: HashMap<u32, (usize, usize)>,
}

impl DepthSearch<'_> {
    fn depth(&mut self, mask: u32) -> usize {
        components(self.adj, mask)
            .into_iter()
            .map(|c| self.connected(c))
            .max()
            .unwrap_or(0)
    }

    fn connected(&mut self, comp: u32) -> usize {
        if comp.count_ones() == 1 {
            return 1;
        }
        if let Some(&(d, _)) = self.memo.get(&comp) {
            return d;
        }
        let mut best = (usize::MAX, 0);
        for v in bits(comp) {
            let d = 1 + self.depth(comp & !(1 << v));
            if d < best.0 {
                best = (d, v);
            }
            if best.0 == 2 {
                break;
            }
        }
        self.memo.insert(comp, best);
        best.0
    }

    fn build(&self, mask: u32, above: Option<usize>, parent: &mut [Option<usize>]) {
        for comp in components(self.adj, mask) {
            let root = if comp.count_ones() == 1 {
                comp.trailing_zeros() as usize
            } else {
                self.memo[&comp].1
            };
            parent[root] = above;
            self.build(comp & !(1 << root), Some(root), parent);
        }
    }
}

/// Tree-depth with a forest cover of that height. At most 20 elements.
pub fn tree_depth(structure: &Structure) -> Result<(usize, ForestCover)> {
    let adj = masks(structure, TREE_DEPTH_LIMIT)?;
    let all = (1u32 << adj.len()) - 1;
    let mut search = DepthSearch { adj: &adj, memo: HashMap::new() };
    let depth = search.depth(all);
    let mut parent = vec![None; adj.len()];
    search.build(all, None, &mut parent);
    Ok((depth, ForestCover { parent }))
}

/// Vertices outside `eliminated ∪ {v}` reachable from `v` through `eliminated`.
fn fill_neighbours(adj: &[u32], eliminated: u32, v: usize) -> u32 {
    let mut reach = 1u32 << v;
    loop {
        let grown = reach | (neighbourhood(adj, reach) & eliminated);
        if grown == reach {
            break;
        }
        reach = grown;
    }
    neighbourhood(adj, reach) & !eliminated & !(1 << v)
}

/// Tree-width with a decomposition of that width. At most 18 elements.
pub fn tree_width(structure: &Structure) -> Result<(usize, TreeDecomposition)> {
    let adj = masks(structure, TREE_WIDTH_LIMIT)?;
    let n = adj.len();
    let full = 1usize << n;
    // best[S]: least width of eliminating S first; last[S]: the vertex of S eliminated last
    let mut best = vec![-1i8; full];
    let mut last = vec![0u8; full];
    for s in 1..full {
        let mut b = i8::MAX;
        for v in bits(s as u32) {
            let rest = s & !(1 << v);
            let q = fill_neighbours(&adj, rest as u32, v).count_ones() as i8;
            let w = best[rest].max(q);
            if w < b {
                b = w;
                last[s] = v as u8;
            }
        }
        best[s] = b;
    }
    let mut order = Vec::with_capacity(n);
    let mut s = full - 1;
    while s != 0 {
        let v = last[s] as usize;
        order.push(v);
        s &= !(1 << v);
    }
    order.reverse();

    let mut position = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let mut bags = Vec::with_capacity(n + 1);
    let mut parent = Vec::with_capacity(n + 1);
    let mut eliminated = 0u32;
    for &v in &order {
        let q = fill_neighbours(&adj, eliminated, v);
        let mut bag: Vec<usize> = bits(q | (1 << v)).collect();
        bag.sort_unstable();
        bags.push(bag);
        parent.push(bits(q).min_by_key(|&u| position[u]).map(|u| position[u]));
        eliminated |= 1 << v;
    }
    let roots: Vec<usize> = (0..n).filter(|&i| parent[i].is_none()).collect();
    if roots.len() > 1 {
        let top = bags.len();
        bags.push(Vec::new());
        parent.push(None);
        for r in roots {
            parent[r] = Some(top);
        }
    }
    Ok((best[full - 1].max(0) as usize, TreeDecomposition { parent, bags }))
}

/// A `k`-pebble forest cover from a decomposition of width below `k`, via
/// its orderly refinement: the elements new at a node are introduced one at
/// a time, each taking the least pebble free in its bag.
pub fn decomposition_to_pebble_cover(
    td: &TreeDecomposition,
    structure: &Structure,
    k: usize,
) -> Result<PebbledForestCover> {
    let width = td.width().max(0) as usize;
    if width >= k {
        return Err(Error::WidthTooLarge { width, k });
    }
    td.verify(structure).map_err(Error::InvalidWitness)?;
    let n = td.node_count();
    let mut children = vec![Vec::new(); n];
    let mut root = 0;
    for x in 0..n {
        match td.parent[x] {
            Some(p) => children[p].push(x),
            None => root = x,
        }
    }
    let size = structure.size();
    let mut parent = vec![None; size];
    let mut pebble = vec![0; size];
    // element introduced last on the path down to each node
    let mut bottom: Vec<Option<usize>> = vec![None; n];
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(x) = queue.pop_front() {
        let above = td.parent[x].map_or(&[][..], |p| &td.bags[p][..]);
        let mut bag: Vec<usize> = td.bags[x].iter().copied().filter(|v| above.contains(v)).collect();
        let mut current = td.parent[x].and_then(|p| bottom[p]);
        for &v in td.bags[x].iter().filter(|v| !above.contains(v)) {
            parent[v] = current;
            pebble[v] = (1..=k)
                .find(|p| bag.iter().all(|&u| pebble[u] != *p))
                .expect("bag smaller than k");
            bag.push(v);
            current = Some(v);
        }
        bottom[x] = current;
        queue.extend(children[x].iter().copied());
    }
    Ok(PebbledForestCover { cover: ForestCover { parent }, pebble })
}

/// A decomposition whose bags are the active predecessors, under an empty root.
pub fn pebble_cover_to_decomposition(cover: &PebbledForestCover) -> TreeDecomposition {
    let n = cover.cover.len();
    let mut parent = vec![None];
    let mut bags = vec![Vec::new()];
    for v in 0..n {
        parent.push(Some(cover.cover.parent[v].map_or(0, |p| p + 1)));
        let mut bag = cover.active_predecessors(v);
        bag.sort_unstable();
        bags.push(bag);
    }
    TreeDecomposition { parent, bags }
}

/// Least `k` with a `k`-pebble forest cover, which is tree-width plus one.
pub fn pebble_coalgebra_number(structure: &Structure) -> Result<(usize, PebbledForestCover)> {
    let (tw, td) = tree_width(structure)?;
    let k = tw + 1;
    Ok((k, decomposition_to_pebble_cover(&td, structure, k)?))
}
