//! The modal comonad on pointed Kripke structures: unary symbols are
//! propositions, binary symbols are labelled transitions, and `M_k (A, a)` is
//! the unravelling of `A` from `a` to depth `k`.
//!
//! The approximants start from proposition agreement at depth 0, so that
//! `a ≼_k b` holds exactly when `M_k (A, a)` maps to `(B, b)`.

use std::collections::HashMap;

use serde_json::{json, Value};

use crate::comonad::{coextend, json_label, Play, PlayForest};
use crate::error::{Error, Result};
use crate::game::{solve_acyclic, Arena, Challenge, Rule, Solution};
use crate::structure::{check_kripke_arities, PointedStructure, Structure};

/// Propositions and transitions of a structure whose arities are at most 2.
#[derive(Clone, Debug)]
pub struct KripkeView<'a> {
    pub structure: &'a Structure,
    /// Relation indices of the unary symbols.
    pub props: Vec<usize>,
    /// Relation indices of the binary symbols.
    pub labels: Vec<usize>,
    /// `successors[l][w]`: sorted successors of `w` along label `l`.
    pub successors: Vec<Vec<Vec<usize>>>,
}

impl<'a> KripkeView<'a> {
    pub fn new(structure: &'a Structure) -> Result<Self> {
        check_kripke_arities(structure)?;
        let mut props = Vec::new();
        let mut labels = Vec::new();
        let mut successors = Vec::new();
        for (i, rel) in structure.relations().iter().enumerate() {
            if rel.arity() == 1 {
                props.push(i);
            } else {
                labels.push(i);
                let mut succ = vec![Vec::new(); structure.size()];
                for t in rel.tuples() {
                    succ[t[0]].push(t[1]);
                }
                succ.iter_mut().for_each(|v| v.sort_unstable());
                successors.push(succ);
            }
        }
        Ok(KripkeView { structure, props, labels, successors })
    }

    pub fn valuation(&self, w: usize) -> Vec<bool> {
        self.props
            .iter()
            .map(|&p| self.structure.relations()[p].contains(&[w]))
            .collect()
    }

    pub fn label_name(&self, l: usize) -> &str {
        self.structure.relations()[self.labels[l]].name()
    }

    pub fn successors(&self, l: usize, w: usize) -> &[usize] {
        &self.successors[l][w]
    }
}

/// `[a_0, α_1, a_1, ..., α_j, a_j]`, stored as the root and the steps
/// (relation index of `α_i`, `a_i`). Its length as a play counts the root as the first move.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModalPlay {
    pub root: usize,
    pub steps: Vec<(usize, usize)>,
}

impl Play for ModalPlay {
    fn len(&self) -> usize {
        self.steps.len() + 1
    }

    fn last(&self) -> usize {
        self.steps.last().map_or(self.root, |s| s.1)
    }

    fn prefix(&self, n: usize) -> Self {
        ModalPlay { root: self.root, steps: self.steps[..n - 1].to_vec() }
    }

    fn with_elements(&self, elements: &[usize]) -> Self {
        ModalPlay {
            root: elements[0],
            steps: self.steps.iter().zip(&elements[1..]).map(|(&(l, _), &w)| (l, w)).collect(),
        }
    }

    fn label(&self, structure: &Structure) -> String {
        let mut parts = vec![Value::from(structure.name(self.root))];
        for &(r, w) in &self.steps {
            parts.push(Value::from(structure.relations()[r].name()));
            parts.push(Value::from(structure.name(w)));
        }
        json_label(parts)
    }
}

impl ModalPlay {
    /// Number of transitions taken.
    pub fn depth(&self) -> usize {
        self.steps.len()
    }
}

fn check_pair(p: &PointedStructure, q: &PointedStructure, k: usize) -> Result<()> {
    p.structure.check_same_signature(&q.structure)?;
    p.check_kripke()?;
    if k == 0 {
        return Err(Error::ZeroBound);
    }
    Ok(())
}

/// The number of plays of depth at most `k` from `point`, saturating.
pub fn count_modal_plays(view: &KripkeView, point: usize, k: usize) -> u128 {
    let n = view.structure.size();
    let mut layer = vec![0u128; n];
    layer[point] = 1;
    let mut total: u128 = 1;
    for _ in 0..k {
        let mut next = vec![0u128; n];
        for (w, &c) in layer.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for succ in &view.successors {
                for &v in &succ[w] {
                    next[v] = next[v].saturating_add(c);
                }
            }
        }
        total = next.iter().fold(total, |t, &c| t.saturating_add(c));
        layer = next;
    }
    total
}

/// `M_k (A, a)` with its forest of plays; the point is node 0 and structure
/// element `i` is forest node `i`.
#[derive(Clone, Debug)]
pub struct ModalUnfolding {
    pub forest: PlayForest<ModalPlay>,
    pub pointed: PointedStructure,
}

pub fn modal_unfold(p: &PointedStructure, k: usize, cap: usize) -> Result<ModalUnfolding> {
    p.check_kripke()?;
    if k == 0 {
        return Err(Error::ZeroBound);
    }
    let view = KripkeView::new(&p.structure)?;
    let required = count_modal_plays(&view, p.point, k);
    if required > cap as u128 {
        return Err(Error::CapExceeded { required, cap });
    }
    let forest = PlayForest::grow(
        vec![ModalPlay { root: p.point, steps: Vec::new() }],
        k + 1,
        cap,
        p.structure.size(),
        |s| {
            let w = s.last();
            let mut out = Vec::new();
            for l in 0..view.labels.len() {
                for &v in view.successors(l, w) {
                    let mut steps = s.steps.clone();
                    steps.push((view.labels[l], v));
                    out.push(ModalPlay { root: s.root, steps });
                }
            }
            out
        },
    )?;
    let mut relations: Vec<Vec<Vec<usize>>> = vec![Vec::new(); p.structure.relations().len()];
    for (id, s) in forest.plays().iter().enumerate() {
        for &pi in &view.props {
            if p.structure.relations()[pi].contains(&[s.last()]) {
                relations[pi].push(vec![id]);
            }
        }
        if let Some(parent) = forest.parent(id) {
            let r = s.steps.last().expect("non-root").0;
            relations[r].push(vec![parent, id]);
        }
    }
    let structure = forest.to_structure(&p.structure, relations)?;
    Ok(ModalUnfolding { forest, pointed: PointedStructure::new(structure, 0)? })
}

pub fn modal_counit(play: &ModalPlay) -> usize {
    play.last()
}

/// `f*`: the root goes to the root of the target, each step keeps its label.
pub fn modal_coextension(
    play: &ModalPlay,
    mut f: impl FnMut(&ModalPlay) -> Option<usize>,
) -> Result<ModalPlay> {
    let mut missing = None;
    let out = coextend(play, |p| {
        f(p).unwrap_or_else(|| {
            missing.get_or_insert_with(|| p.clone());
            0
        })
    });
    match missing {
        Some(p) => Err(Error::UndefinedPrefix(format!("{:?}", p))),
        None => Ok(out),
    }
}

type Relation2 = Vec<Vec<bool>>;

fn refine(
    va: &KripkeView,
    vb: &KripkeView,
    k: usize,
    base: impl Fn(&[bool], &[bool]) -> bool,
    both_ways: bool,
) -> Relation2 {
    let (na, nb) = (va.structure.size(), vb.structure.size());
    let vals_a: Vec<Vec<bool>> = (0..na).map(|w| va.valuation(w)).collect();
    let vals_b: Vec<Vec<bool>> = (0..nb).map(|w| vb.valuation(w)).collect();
    let level0: Relation2 = (0..na)
        .map(|x| (0..nb).map(|y| base(&vals_a[x], &vals_b[y])).collect())
        .collect();
    let mut rel = level0.clone();
    for _ in 0..k {
        let prev = rel;
        rel = (0..na)
            .map(|x| {
                (0..nb)
                    .map(|y| {
                        level0[x][y]
                            && (0..va.labels.len()).all(|l| {
                                let (sa, sb) = (va.successors(l, x), vb.successors(l, y));
                                let forth = sa.iter().all(|&x2| sb.iter().any(|&y2| prev[x2][y2]));
                                let back = !both_ways || sb.iter().all(|&y2| sa.iter().any(|&x2| prev[x2][y2]));
                                forth && back
                            })
                    })
                    .collect()
            })
            .collect();
    }
    rel
}

fn subset(x: &[bool], y: &[bool]) -> bool {
    x.iter().zip(y).all(|(&p, &q)| !p || q)
}

/// The whole relation `≼_k ⊆ A × B`.
pub fn simulation_relation(a: &Structure, b: &Structure, k: usize) -> Result<Relation2> {
    a.check_same_signature(b)?;
    let (va, vb) = (KripkeView::new(a)?, KripkeView::new(b)?);
    Ok(refine(&va, &vb, k, subset, false))
}

/// The whole relation `∼_k ⊆ A × B`.
pub fn bisimulation_relation(a: &Structure, b: &Structure, k: usize) -> Result<Relation2> {
    a.check_same_signature(b)?;
    let (va, vb) = (KripkeView::new(a)?, KripkeView::new(b)?);
    Ok(refine(&va, &vb, k, |x, y| x == y, true))
}

pub fn simulation_approx(p: &PointedStructure, q: &PointedStructure, k: usize) -> Result<bool> {
    check_pair(p, q, k)?;
    Ok(simulation_relation(&p.structure, &q.structure, k)?[p.point][q.point])
}

pub fn bisim_approx(p: &PointedStructure, q: &PointedStructure, k: usize) -> Result<bool> {
    check_pair(p, q, k)?;
    Ok(bisimulation_relation(&p.structure, &q.structure, k)?[p.point][q.point])
}

/// Graded bisimulation classes of every world of `a` and of `b` at depth `k`,
/// numbered consistently across the two structures.
pub fn graded_classes(a: &Structure, b: &Structure, k: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    a.check_same_signature(b)?;
    let views = [KripkeView::new(a)?, KripkeView::new(b)?];
    let mut classes: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    let mut ids: HashMap<Vec<bool>, usize> = HashMap::new();
    for (side, view) in views.iter().enumerate() {
        classes[side] = (0..view.structure.size())
            .map(|w| {
                let n = ids.len();
                *ids.entry(view.valuation(w)).or_insert(n)
            })
            .collect();
    }
    for _ in 0..k {
        let mut ids: HashMap<(usize, Vec<Vec<usize>>), usize> = HashMap::new();
        let mut next: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for (side, view) in views.iter().enumerate() {
            next[side] = (0..view.structure.size())
                .map(|w| {
                    let multisets: Vec<Vec<usize>> = (0..view.labels.len())
                        .map(|l| {
                            let mut m: Vec<usize> =
                                view.successors(l, w).iter().map(|&v| classes[side][v]).collect();
                            m.sort_unstable();
                            m
                        })
                        .collect();
                    let n = ids.len();
                    *ids.entry((classes[side][w], multisets)).or_insert(n)
                })
                .collect();
        }
        classes = next;
    }
    let [ca, cb] = classes;
    Ok((ca, cb))
}

pub fn graded_bisim_approx(p: &PointedStructure, q: &PointedStructure, k: usize) -> Result<bool> {
    check_pair(p, q, k)?;
    let (ca, cb) = graded_classes(&p.structure, &q.structure, k)?;
    Ok(ca[p.point] == cb[q.point])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModalGame {
    /// Spoiler moves in the source; Duplicator must keep propositions included.
    Simulation,
    /// Spoiler moves on either side; propositions must agree.
    Bisimulation,
    /// Duplicator commits to a bijection of successor sets per label.
    Graded,
}

/// Positions are the current pair of worlds with the rounds left.
pub struct ModalArena<'a> {
    pub a: KripkeView<'a>,
    pub b: KripkeView<'a>,
    pub start: (usize, usize),
    pub k: usize,
    pub game: ModalGame,
}

impl<'a> ModalArena<'a> {
    pub fn new(p: &'a PointedStructure, q: &'a PointedStructure, k: usize, game: ModalGame) -> Result<Self> {
        check_pair(p, q, k)?;
        q.check_kripke()?;
        Ok(ModalArena {
            a: KripkeView::new(&p.structure)?,
            b: KripkeView::new(&q.structure)?,
            start: (p.point, q.point),
            k,
            game,
        })
    }

    fn agree(&self, x: usize, y: usize) -> bool {
        let (vx, vy) = (self.a.valuation(x), self.b.valuation(y));
        match self.game {
            ModalGame::Simulation => subset(&vx, &vy),
            _ => vx == vy,
        }
    }

    fn challenge(&self, l: usize, x: usize, y: usize, rounds: usize, left: bool) -> Challenge<(usize, usize, usize)> {
        let (sa, sb) = (self.a.successors(l, x), self.b.successors(l, y));
        let (rows, cols, row_view, col_view) = if left {
            (sa, sb, &self.a, &self.b)
        } else {
            (sb, sa, &self.b, &self.a)
        };
        let edges = rows
            .iter()
            .map(|&r| {
                cols.iter()
                    .enumerate()
                    .filter_map(|(c, &w)| {
                        let (x2, y2) = if left { (r, w) } else { (w, r) };
                        self.agree(x2, y2).then_some((c, (x2, y2, rounds - 1)))
                    })
                    .collect()
            })
            .collect();
        let side = if left { "left" } else { "right" };
        Challenge {
            label: json!({"side": side, "label": self.a.label_name(l)}),
            rows: rows.iter().map(|&w| json!(row_view.structure.name(w))).collect(),
            cols: cols.iter().map(|&w| json!(col_view.structure.name(w))).collect(),
            edges,
        }
    }
}

impl Arena for ModalArena<'_> {
    type Pos = (usize, usize, usize);

    fn rule(&self) -> Rule {
        match self.game {
            ModalGame::Graded => Rule::Bijective,
            _ => Rule::Alternating,
        }
    }

    fn initial(&self) -> Option<Self::Pos> {
        let (x, y) = self.start;
        self.agree(x, y).then_some((x, y, self.k))
    }

    fn challenges(&self, &(x, y, rounds): &Self::Pos) -> Vec<Challenge<Self::Pos>> {
        if rounds == 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for l in 0..self.a.labels.len() {
            out.push(self.challenge(l, x, y, rounds, true));
            if self.game == ModalGame::Bisimulation {
                out.push(self.challenge(l, x, y, rounds, false));
            }
        }
        out
    }

    fn describe(&self, &(x, y, rounds): &Self::Pos) -> Value {
        json!({"worlds": [self.a.structure.name(x), self.b.structure.name(y)], "rounds": rounds})
    }
}

pub fn modal_game(
    p: &PointedStructure,
    q: &PointedStructure,
    k: usize,
    game: ModalGame,
    cert_cap: usize,
) -> Result<Solution> {
    Ok(solve_acyclic(&ModalArena::new(p, q, k, game)?, cert_cap))
}

/// The `k`-round graded bisimulation game.
pub fn graded_bisim_game(p: &PointedStructure, q: &PointedStructure, k: usize, cert_cap: usize) -> Result<Solution> {
    modal_game(p, q, k, ModalGame::Graded, cert_cap)
}
