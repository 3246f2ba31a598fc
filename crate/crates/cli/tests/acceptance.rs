use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use game_comonads::comonad::DEFAULT_CAP;
use game_comonads::ef::{ef_game_exists, ef_materialize};
use game_comonads::equiv::{back_and_forth_equiv, decide, theta_fixpoint_oracle, Comonad, Side};
use game_comonads::lawcheck::{run_law_suite, GenConfig};
use game_comonads::modal::{
    bisim_approx, graded_bisim_approx, graded_bisim_game, graded_classes, modal_unfold, simulation_approx,
    KripkeView,
};
use game_comonads::params::{
    decomposition_to_pebble_cover, ef_coalgebra_to_forest_cover, ef_coalgebra_to_pebble,
    forest_cover_to_ef_coalgebra, pebble_coalgebra_number, pebble_coalgebra_to_cover,
    pebble_cover_to_decomposition, tree_depth, tree_width, verify_coalgebra, Coalgebra,
};
use game_comonads::structure::{
    families, find_homomorphism, find_homomorphism_with, gaifman_graph, parse_structure, structure_to_json,
    PointedStructure, Signature, Structure,
};

const LAW_SUITE_LIMIT: Duration = Duration::from_secs(60);
const TOTAL_LIMIT: Duration = Duration::from_secs(600);

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(format!("{name}.json"))
}

fn load(name: &str) -> (Structure, Option<usize>) {
    parse_structure(&std::fs::read_to_string(fixture(name)).expect("fixture exists")).expect("fixture parses")
}

fn cli(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_gcomonad")).args(args).output().expect("binary runs");
    let code = out.status.code().unwrap_or(-1);
    let value = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, value)
}

fn rng(criterion: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + criterion)
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(families::element_name).collect()
}

fn random_over(rng: &mut ChaCha8Rng, signature: &Signature, size: usize, density: f64) -> Structure {
    let relations = signature
        .symbols()
        .map(|(_, arity)| {
            let mut tuples = Vec::new();
            let total = size.pow(arity as u32);
            for mut code in 0..total {
                if rng.gen_bool(density) {
                    let mut t = vec![0; arity];
                    for slot in t.iter_mut().rev() {
                        *slot = code % size;
                        code /= size;
                    }
                    tuples.push(t);
                }
            }
            tuples
        })
        .collect();
    Structure::from_indexed(signature.clone(), names(size), relations).expect("valid random structure")
}

fn random_signature(rng: &mut ChaCha8Rng, max_arity: usize) -> Signature {
    let count = rng.gen_range(1..=2);
    Signature::new((0..count).map(|i| (format!("R{i}"), rng.gen_range(1..=max_arity)))).unwrap()
}

fn random_pair(rng: &mut ChaCha8Rng, max_size: usize, max_arity: usize) -> (Structure, Structure) {
    let sig = random_signature(rng, max_arity);
    let density = rng.gen_range(0.15..0.6);
    let (na, nb) = (rng.gen_range(1..=max_size), rng.gen_range(1..=max_size));
    let a = random_over(rng, &sig, na, density);
    let b = random_over(rng, &sig, nb, density);
    (a, b)
}

fn random_graph(rng: &mut ChaCha8Rng, max_size: usize) -> Structure {
    let n = rng.gen_range(1..=max_size);
    let p = rng.gen_range(0.15..0.7);
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|_| rng.gen_bool(p))
        .collect();
    families::graph(n, &edges)
}

fn kripke_signature(two_labels: bool) -> Signature {
    if two_labels {
        Signature::new([("P", 1), ("R", 2), ("S", 2)]).unwrap()
    } else {
        Signature::new([("P", 1), ("R", 2)]).unwrap()
    }
}

fn random_kripke_pair(rng: &mut ChaCha8Rng, max_worlds: usize) -> (PointedStructure, PointedStructure) {
    let sig = kripke_signature(rng.gen_bool(0.3));
    let density = rng.gen_range(0.1..0.45);
    let side = |rng: &mut ChaCha8Rng| {
        let n = rng.gen_range(1..=max_worlds);
        let s = random_over(rng, &sig, n, density);
        let point = rng.gen_range(0..s.size());
        PointedStructure::new(s, point).unwrap()
    };
    let p = side(rng);
    let q = match rng.gen_range(0..10) {
        0..=3 => side(rng),
        4..=6 => shuffled(rng, &p),
        _ => {
            let w = rng.gen_range(0..p.structure.size());
            with_copied_world(&p, w)
        }
    };
    (p, q)
}

fn rebuild(s: &Structure, size: usize, relations: Vec<Vec<Vec<usize>>>, point: usize) -> PointedStructure {
    let s = Structure::from_indexed(s.signature().clone(), names(size), relations).unwrap();
    PointedStructure::new(s, point).unwrap()
}

/// An isomorphic copy under a random renaming.
fn shuffled(rng: &mut ChaCha8Rng, p: &PointedStructure) -> PointedStructure {
    let n = p.structure.size();
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let relations = p
        .structure
        .relations()
        .iter()
        .map(|r| r.tuples().iter().map(|t| t.iter().map(|&e| perm[e]).collect()).collect())
        .collect();
    rebuild(&p.structure, n, relations, perm[p.point])
}

/// Adds a twin of `w` with the same propositions, predecessors and successors.
fn with_copied_world(p: &PointedStructure, w: usize) -> PointedStructure {
    let twin = p.structure.size();
    let relations = p
        .structure
        .relations()
        .iter()
        .map(|r| {
            let mut tuples: Vec<Vec<usize>> = r.tuples().to_vec();
            for t in r.tuples() {
                if t.contains(&w) {
                    let copy: Vec<usize> = t.iter().map(|&e| if e == w { twin } else { e }).collect();
                    tuples.push(copy);
                    if t.len() == 2 && t[0] == w && t[1] == w {
                        tuples.push(vec![w, twin]);
                        tuples.push(vec![twin, w]);
                    }
                }
            }
            tuples
        })
        .collect();
    rebuild(&p.structure, twin + 1, relations, p.point)
}

/// Every structure over the signature on `1..=max` elements.
fn all_structures(signature: &Signature, max: usize) -> Vec<Structure> {
    let mut out = Vec::new();
    for n in 1..=max {
        let slots: Vec<Vec<Vec<usize>>> = signature
            .symbols()
            .map(|(_, arity)| {
                (0..n.pow(arity as u32))
                    .map(|mut code| {
                        let mut t = vec![0; arity];
                        for slot in t.iter_mut().rev() {
                            *slot = code % n;
                            code /= n;
                        }
                        t
                    })
                    .collect()
            })
            .collect();
        let total: usize = slots.iter().map(Vec::len).sum();
        for mask in 0u64..(1 << total) {
            let mut bit = 0;
            let relations = slots
                .iter()
                .map(|ts| {
                    ts.iter()
                        .filter(|_| {
                            bit += 1;
                            mask & (1 << (bit - 1)) != 0
                        })
                        .cloned()
                        .collect()
                })
                .collect();
            out.push(Structure::from_indexed(signature.clone(), names(n), relations).unwrap());
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Independent oracles

/// Duplicator wins `k` rounds on linear orders of sizes `m` and `n`: every
/// move splits an order into the part below and the part above it.
fn linear_order_oracle(m: usize, n: usize, k: usize, memo: &mut HashMap<(usize, usize, usize), bool>) -> bool {
    if k == 0 {
        return true;
    }
    if let Some(&w) = memo.get(&(m, n, k)) {
        return w;
    }
    let answer = |m: usize, n: usize, memo: &mut HashMap<_, _>| {
        (0..m).all(|i| {
            (0..n).any(|j| {
                linear_order_oracle(i, j, k - 1, memo) && linear_order_oracle(m - 1 - i, n - 1 - j, k - 1, memo)
            })
        })
    };
    let w = answer(m, n, memo) && answer(n, m, memo);
    memo.insert((m, n, k), w);
    w
}

fn forests(n: usize, mut visit: impl FnMut(&[Option<usize>])) {
    fn go(v: usize, n: usize, parent: &mut Vec<Option<usize>>, visit: &mut dyn FnMut(&[Option<usize>])) {
        if v == n {
            let acyclic = (0..n).all(|s| {
                let mut x = s;
                for _ in 0..=n {
                    match parent[x] {
                        Some(p) => x = p,
                        None => return true,
                    }
                }
                false
            });
            if acyclic {
                visit(parent);
            }
            return;
        }
        for choice in std::iter::once(None).chain((0..n).filter(|&u| u != v).map(Some)) {
            parent[v] = choice;
            go(v + 1, n, parent, visit);
        }
    }
    go(0, n, &mut vec![None; n], &mut visit);
}

fn ancestors_or_self(parent: &[Option<usize>], v: usize) -> Vec<usize> {
    let mut out = vec![v];
    let mut x = v;
    while let Some(p) = parent[x] {
        out.push(p);
        x = p;
    }
    out.reverse();
    out
}

fn comparable(parent: &[Option<usize>], u: usize, v: usize) -> bool {
    ancestors_or_self(parent, v).contains(&u) || ancestors_or_self(parent, u).contains(&v)
}

/// Least height over all forest covers, by enumerating parent functions.
fn brute_tree_depth(s: &Structure) -> usize {
    let g = gaifman_graph(s);
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let mut best = usize::MAX;
    forests(s.size(), |parent| {
        if edges.iter().all(|&(u, v)| comparable(parent, u, v)) {
            let h = (0..parent.len()).map(|v| ancestors_or_self(parent, v).len()).max().unwrap_or(0);
            best = best.min(h);
        }
    });
    best
}

/// Least width over all elimination orders, simulating fill-in explicitly.
fn brute_tree_width(s: &Structure) -> usize {
    let g = gaifman_graph(s);
    let n = s.size();
    let adj: Vec<u32> = (0..n).map(|v| g.neighbor_mask(v) as u32).collect();
    fn go(adj: &[u32], remaining: u32, width: usize, best: &mut usize) {
        if width >= *best {
            return;
        }
        if remaining == 0 {
            *best = width;
            return;
        }
        for v in 0..adj.len() {
            if remaining & (1 << v) == 0 {
                continue;
            }
            let nb = adj[v] & remaining & !(1 << v);
            let mut next = adj.to_vec();
            for (u, row) in next.iter_mut().enumerate() {
                if nb & (1 << u) != 0 {
                    *row |= nb & !(1 << u);
                }
            }
            go(&next, remaining & !(1 << v), width.max(nb.count_ones() as usize), best);
        }
    }
    let mut best = n;
    go(&adj, (1u32 << n) - 1, 0, &mut best);
    best
}

/// Least `k` with a `k`-pebble forest cover, by enumerating forests and pebblings.
fn brute_pebble_number(s: &Structure) -> usize {
    let g = gaifman_graph(s);
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let n = s.size();
    let mut covers = Vec::new();
    forests(n, |parent| {
        if edges.iter().all(|&(u, v)| comparable(parent, u, v)) {
            covers.push(parent.to_vec());
        }
    });
    for k in 1..=n {
        for parent in &covers {
            let mut pebble = vec![1; n];
            loop {
                let ok = edges.iter().all(|&(u, v)| {
                    let (lo, hi) = if ancestors_or_self(parent, v).contains(&u) { (u, v) } else { (v, u) };
                    let chain = ancestors_or_self(parent, hi);
                    let at = chain.iter().position(|&x| x == lo).unwrap();
                    chain[at + 1..].iter().all(|&w| pebble[w] != pebble[lo])
                });
                if ok {
                    return k;
                }
                // next pebbling in 1..=k
                let mut i = 0;
                while i < n && pebble[i] == k {
                    pebble[i] = 1;
                    i += 1;
                }
                if i == n {
                    break;
                }
                pebble[i] += 1;
            }
        }
    }
    n
}

struct KripkeOracle<'a> {
    a: KripkeView<'a>,
    b: KripkeView<'a>,
    graded: bool,
    memo: HashMap<(usize, usize, usize), bool>,
}

impl KripkeOracle<'_> {
    /// Round-by-round bisimulation; graded answers are brute-force bijections.
    fn holds(&mut self, x: usize, y: usize, k: usize) -> bool {
        if self.a.valuation(x) != self.b.valuation(y) {
            return false;
        }
        if k == 0 {
            return true;
        }
        if let Some(&w) = self.memo.get(&(x, y, k)) {
            return w;
        }
        let mut w = true;
        for l in 0..self.a.labels.len() {
            let xs = self.a.successors(l, x).to_vec();
            let ys = self.b.successors(l, y).to_vec();
            let ok = if self.graded {
                xs.len() == ys.len() && self.some_bijection(&xs, &ys, k - 1)
            } else {
                xs.iter().all(|&u| ys.iter().any(|&v| self.holds(u, v, k - 1)))
                    && ys.iter().all(|&v| xs.iter().any(|&u| self.holds(u, v, k - 1)))
            };
            if !ok {
                w = false;
                break;
            }
        }
        self.memo.insert((x, y, k), w);
        w
    }

    fn some_bijection(&mut self, xs: &[usize], ys: &[usize], k: usize) -> bool {
        let mut perm: Vec<usize> = (0..ys.len()).collect();
        loop {
            if xs.iter().zip(&perm).all(|(&u, &j)| self.holds(u, ys[j], k)) {
                return true;
            }
            // next lexicographic permutation
            let Some(i) = (1..perm.len()).rev().find(|&i| perm[i - 1] < perm[i]) else {
                return false;
            };
            let j = (i..perm.len()).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
            perm.swap(i - 1, j);
            perm[i..].reverse();
        }
    }
}

// ---------------------------------------------------------------------------
// Criteria

fn criterion_1() -> Check {
    let start = Instant::now();
    let cfg = GenConfig::default();
    let report = run_law_suite(&cfg);
    let elapsed = start.elapsed();
    ensure(report.passed(), || format!("law suite failed:\n{report}"))?;
    ensure(elapsed < LAW_SUITE_LIMIT, || format!("law suite took {elapsed:?}"))?;
    Ok(format!(
        "{} structures, |A| <= {}, arity <= {}, k <= {}, 0 failures, {:.1} s",
        cfg.iterations,
        cfg.max_size,
        cfg.max_arity,
        cfg.max_k,
        elapsed.as_secs_f64()
    ))
}

fn criterion_2() -> Check {
    let mut rng = rng(2);
    let mut yes = 0;
    for i in 0..100 {
        let (a, b) = random_pair(&mut rng, 3, 3);
        let k = rng.gen_range(1..=2);
        let game = ef_game_exists(&a, &b, k, DEFAULT_CAP).unwrap().duplicator_wins;
        let m = ef_materialize(&a, k, DEFAULT_CAP).unwrap();
        let hom = find_homomorphism(&m.structure, &b).unwrap().is_some();
        ensure(game == hom, || format!("pair {i}: game {game}, homomorphism {hom}"))?;
        yes += game as usize;
    }
    Ok(format!("100 pairs, 0 disagreements ({yes} with a homomorphism)"))
}

fn criterion_3() -> Check {
    let mut rng = rng(3);
    let mut yes = 0;
    for i in 0..100 {
        let (p, q) = random_kripke_pair(&mut rng, 4);
        let k = rng.gen_range(1..=3);
        let sim = simulation_approx(&p, &q, k).unwrap();
        let u = modal_unfold(&p, k, DEFAULT_CAP).unwrap();
        let hom = find_homomorphism_with(&u.pointed.structure, &q.structure, &[(u.pointed.point, q.point)])
            .unwrap()
            .is_some();
        ensure(sim == hom, || format!("pair {i}: simulation {sim}, pointed homomorphism {hom}"))?;
        yes += sim as usize;
    }
    Ok(format!("100 pointed pairs, 0 disagreements ({yes} similar)"))
}

fn criterion_4() -> Check {
    let mut runs = 0;
    let mut yes = 0;
    for sig in [Signature::new([("R", 2)]).unwrap(), Signature::new([("P", 1)]).unwrap()] {
        let all = all_structures(&sig, 2);
        for a in &all {
            for b in &all {
                for k in 1..=2 {
                    let oracle = theta_fixpoint_oracle(a, b, k).map_err(|e| e.to_string())?;
                    let game = back_and_forth_equiv(Comonad::Ef, Side::new(a, None), Side::new(b, None), k, DEFAULT_CAP)
                        .unwrap()
                        .equiv;
                    ensure(oracle == game, || {
                        format!("k = {k}: fixpoint {oracle}, game {game} on {:?} / {:?}", a.named_relations(), b.named_relations())
                    })?;
                    runs += 1;
                    yes += game as usize;
                }
            }
        }
    }
    Ok(format!("{runs} pairs, 0 disagreements ({yes} equivalent)"))
}

fn criterion_5() -> Check {
    let mut memo = HashMap::new();
    for m in 1..=8 {
        for n in 1..=8 {
            for k in 1..=3 {
                let (a, b) = (families::linear_order(m), families::linear_order(n));
                let game = back_and_forth_equiv(Comonad::Ef, Side::new(&a, None), Side::new(&b, None), k, DEFAULT_CAP)
                    .unwrap()
                    .equiv;
                let oracle = linear_order_oracle(m, n, k, &mut memo);
                let closed = m == n || (m >= (1 << k) - 1 && n >= (1 << k) - 1);
                ensure(game == oracle && oracle == closed, || {
                    format!("LIN({m}) vs LIN({n}), k = {k}: game {game}, recursion {oracle}, closed form {closed}")
                })?;
            }
        }
    }
    Ok("192 cases (m, n <= 8, k <= 3), 0 disagreements".into())
}

fn tiers(c: Comonad, a: Side, b: Side, k: usize) -> [bool; 3] {
    [1, 2, 3].map(|t| decide(c, t, a, b, k, DEFAULT_CAP).unwrap().equiv)
}

fn criterion_6() -> Check {
    let mut rng = rng(6);
    let mut counts = [[0usize; 3]; 3];
    for (ci, c) in [Comonad::Ef, Comonad::Pebble, Comonad::Modal].into_iter().enumerate() {
        for i in 0..60 {
            let (a, b, k) = if c == Comonad::Modal {
                let (p, q) = random_kripke_pair(&mut rng, 4);
                let k = rng.gen_range(1..=3);
                ((p.structure, Some(p.point)), (q.structure, Some(q.point)), k)
            } else {
                let (a, b) = random_pair(&mut rng, 3, 2);
                let k = rng.gen_range(1..=2);
                ((a, None), (b, None), k)
            };
            let t = tiers(c, Side::new(&a.0, a.1), Side::new(&b.0, b.1), k);
            ensure((!t[2] || t[1]) && (!t[1] || t[0]), || format!("{c} pair {i}: tiers {t:?} break the ordering"))?;
            for (j, &holds) in t.iter().enumerate() {
                counts[ci][j] += holds as usize;
            }
        }
    }
    let strict = [
        (Comonad::Ef, "sym_edge", "sym_edge_isolated", 2, [true, false, false]),
        (Comonad::Ef, "empty2", "empty3", 2, [true, true, false]),
        (Comonad::Pebble, "sym_edge", "sym_edge_isolated", 2, [true, false, false]),
        (Comonad::Pebble, "empty2", "empty3", 2, [true, true, false]),
        (Comonad::Modal, "branch", "line", 2, [true, false, false]),
        (Comonad::Modal, "two_successors", "one_successor", 1, [true, true, false]),
    ];
    for (c, x, y, k, expected) in strict {
        let (a, pa) = load(x);
        let (b, pb) = load(y);
        let t = tiers(c, Side::new(&a, pa), Side::new(&b, pb), k);
        ensure(t == expected, || format!("{c} {x} vs {y}, k = {k}: tiers {t:?}, expected {expected:?}"))?;
    }
    Ok(format!(
        "180 random pairs ordered (tier counts ef {:?}, pebble {:?}, modal {:?}); 6 strictness fixtures",
        counts[0], counts[1], counts[2]
    ))
}

fn fixtures_up_to(rng: &mut ChaCha8Rng, max: usize, count: usize) -> Vec<Structure> {
    let mut out = vec![
        families::empty(1),
        families::edge(),
        families::symmetric_edge(),
        families::complete_graph(3),
        families::path(4),
        families::star(4),
        families::cycle(5),
        families::linear_order(3),
        families::empty(4),
    ];
    if max >= 6 {
        out.push(families::cycle(6));
        out.push(families::complete_graph(4));
    }
    if max >= 8 {
        out.push(families::path(8));
        out.push(families::complete_graph(6));
    }
    let ternary = Signature::new([("T", 3)]).unwrap();
    while out.len() < count {
        if rng.gen_bool(0.2) {
            let n = rng.gen_range(2..=max.min(5));
            out.push(random_over(rng, &ternary, n, 0.04));
        } else {
            out.push(random_graph(rng, max));
        }
    }
    out
}

fn write_structure(dir: &Path, i: usize, s: &Structure) -> PathBuf {
    let path = dir.join(format!("s{i}.json"));
    std::fs::write(&path, structure_to_json(s, None).to_string()).unwrap();
    path
}

fn criterion_7() -> Check {
    let mut rng = rng(7);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let structures = fixtures_up_to(&mut rng, 6, 50);
    for (i, s) in structures.iter().enumerate() {
        let (td, cover) = tree_depth(s).unwrap();
        let oracle = brute_tree_depth(s);
        ensure(td == oracle, || format!("fixture {i}: tree-depth {td}, exhaustive {oracle}"))?;
        let path = write_structure(dir.path(), i, s);
        let p = path.to_str().unwrap();
        let least = (1..=s.size())
            .find(|k| cli(&["coalgebra", "--comonad", "ef", "-k", &k.to_string(), p]).0 == 0)
            .unwrap_or(0);
        ensure(least == td, || format!("fixture {i}: least k with a coalgebra {least}, tree-depth {td}"))?;
        let (code, out) = cli(&["coalgebra", "--comonad", "ef", "-k", &td.to_string(), p]);
        ensure(code == 0, || format!("fixture {i}: construction exit {code}"))?;
        let c = Coalgebra::from_json(&out["coalgebra"], Comonad::Ef, td, s, None).unwrap();
        let back = ef_coalgebra_to_forest_cover(&c).unwrap();
        ensure(forest_cover_to_ef_coalgebra(&back, td).unwrap() == c, || format!("fixture {i}: coalgebra round trip"))?;
        let again = ef_coalgebra_to_forest_cover(&forest_cover_to_ef_coalgebra(&cover, td).unwrap()).unwrap();
        ensure(again == cover, || format!("fixture {i}: forest cover round trip"))?;
    }
    Ok("50 fixtures (|A| <= 6): tree-depth = least k with an ef coalgebra = exhaustive forest-cover height; round trips are identities".into())
}

fn criterion_8() -> Check {
    let mut rng = rng(8);
    let mut structures = fixtures_up_to(&mut rng, 8, 40);
    structures.push(families::path(7));
    structures.push(families::star(7));
    let mut exhaustive = 0;
    for (i, s) in structures.iter().enumerate() {
        let (tw, td) = tree_width(s).unwrap();
        let oracle = brute_tree_width(s);
        ensure(tw == oracle, || format!("structure {i}: tree-width {tw}, elimination orders {oracle}"))?;
        ensure(td.verify(s).is_ok(), || format!("structure {i}: decomposition rejected"))?;
        let (k, cover) = pebble_coalgebra_number(s).unwrap();
        ensure(k == tw + 1, || format!("structure {i}: pebble number {k}, tree-width {tw}"))?;
        ensure(cover.verify(s, k).is_ok(), || format!("structure {i}: pebble cover rejected"))?;
        let direct = decomposition_to_pebble_cover(&td, s, k).unwrap();
        ensure(direct.verify(s, k).is_ok(), || format!("structure {i}: converted cover rejected"))?;
        let back = pebble_cover_to_decomposition(&cover);
        ensure(back.verify(s).is_ok() && back.width() < k as isize, || {
            format!("structure {i}: decomposition from cover rejected")
        })?;
        if s.size() <= 5 {
            let brute = brute_pebble_number(s);
            ensure(brute == k, || format!("structure {i}: exhaustive pebble number {brute}, computed {k}"))?;
            exhaustive += 1;
        }
    }
    let named = [
        ("K3", families::complete_graph(3), 2, 3),
        ("tree", families::star(3), 1, 2),
        ("path", families::path(5), 1, 2),
        ("single vertex", families::empty(1), 0, 1),
    ];
    for (name, s, tw, kp) in named {
        let got = (tree_width(&s).unwrap().0, pebble_coalgebra_number(&s).unwrap().0);
        ensure(got == (tw, kp), || format!("{name}: (tw, pebble number) = {got:?}, expected ({tw}, {kp})"))?;
    }
    Ok(format!(
        "{} structures (|A| <= 8): tw + 1 = pebble number, both conversions verify; {exhaustive} checked against exhaustive pebbled covers; K3, trees, single vertex as expected",
        structures.len()
    ))
}

fn criterion_9() -> Check {
    let mut rng = rng(9);
    let mut strict = 0;
    for i in 0..200 {
        let s = if rng.gen_bool(0.2) {
            let n = rng.gen_range(1..=6);
            random_over(&mut rng, &Signature::new([("T", 3)]).unwrap(), n, 0.03)
        } else {
            random_graph(&mut rng, 8)
        };
        let (tw, _) = tree_width(&s).unwrap();
        let (td, cover) = tree_depth(&s).unwrap();
        ensure(tw < td, || format!("structure {i}: tw {tw}, td {td}"))?;
        let ef = forest_cover_to_ef_coalgebra(&cover, td).unwrap();
        let pebble = ef_coalgebra_to_pebble(&ef).unwrap();
        let verdict = verify_coalgebra(&pebble, &s).unwrap();
        ensure(verdict.is_ok(), || format!("structure {i}: composed coalgebra rejected: {verdict:?}"))?;
        let pc = pebble_coalgebra_to_cover(&pebble).unwrap();
        ensure(pc.verify(&s, td).is_ok(), || format!("structure {i}: composed cover rejected"))?;
        let d = pebble_cover_to_decomposition(&pc);
        ensure(d.verify(&s).is_ok() && d.width() < td as isize, || {
            format!("structure {i}: decomposition from composed coalgebra too wide")
        })?;
        strict += (tw + 1 < td) as usize;
    }
    Ok(format!("200 structures: tw + 1 <= td by solvers and by composed coalgebras ({strict} strict)"))
}

fn criterion_10() -> Check {
    let mut rng = rng(10);
    let (mut graded_yes, mut bisim_yes) = (0, 0);
    for i in 0..100 {
        let (p, q) = random_kripke_pair(&mut rng, 5);
        let k = rng.gen_range(1..=4);
        let game = graded_bisim_game(&p, &q, k, 0).unwrap().duplicator_wins;
        let approx = graded_bisim_approx(&p, &q, k).unwrap();
        let (ca, cb) = graded_classes(&p.structure, &q.structure, k).unwrap();
        let classes = ca[p.point] == cb[q.point];
        let mut oracle = KripkeOracle {
            a: KripkeView::new(&p.structure).unwrap(),
            b: KripkeView::new(&q.structure).unwrap(),
            graded: true,
            memo: HashMap::new(),
        };
        let brute = oracle.holds(p.point, q.point, k);
        ensure(game == approx && approx == classes && classes == brute, || {
            format!("pair {i}, k = {k}: game {game}, approximant {approx}, classes {classes}, brute force {brute}")
        })?;
        let bisim = bisim_approx(&p, &q, k).unwrap();
        let (x, y) = (Side::new(&p.structure, Some(p.point)), Side::new(&q.structure, Some(q.point)));
        let b_and_f = back_and_forth_equiv(Comonad::Modal, x, y, k, DEFAULT_CAP).unwrap().equiv;
        oracle.graded = false;
        oracle.memo.clear();
        let brute = oracle.holds(p.point, q.point, k);
        ensure(bisim == b_and_f && bisim == brute, || {
            format!("pair {i}, k = {k}: bisimulation approximant {bisim}, game {b_and_f}, brute force {brute}")
        })?;
        graded_yes += game as usize;
        bisim_yes += bisim as usize;
    }
    Ok(format!("100 pointed pairs, 0 disagreements ({graded_yes} graded bisimilar, {bisim_yes} bisimilar)"))
}

fn criterion_11(started: Instant) -> Check {
    let f = |n: &str| fixture(n).to_string_lossy().into_owned();
    let cases: Vec<(Vec<String>, i32)> = vec![
        (vec!["check", "--game", "ef", "--tier", "3", "-k", "2", &f("k3"), &f("k3")], 0),
        (vec!["check", "--game", "ef", "--tier", "2", "-k", "2", &f("lin2"), &f("lin3")], 1),
        (vec!["check", "--game", "modal", "--tier", "1", "-k", "1", &f("ternary"), &f("ternary")], 2),
        (vec!["check", "--game", "pebble", "--tier", "1", "-k", "2", &f("sym_edge"), &f("sym_edge_isolated")], 0),
        (vec!["check", "--game", "pebble", "--tier", "2", "-k", "2", &f("sym_edge"), &f("sym_edge_isolated")], 1),
        (vec!["check", "--game", "ef", "--tier", "3", "-k", "2", &f("empty2"), &f("empty3")], 1),
        (vec!["check", "--game", "modal", "--tier", "2", "-k", "2", &f("branch"), &f("line")], 1),
        (vec!["check", "--game", "modal", "--tier", "2", "-k", "1", &f("two_successors"), &f("one_successor")], 0),
        (vec!["check", "--game", "modal", "--tier", "3", "-k", "1", &f("two_successors"), &f("one_successor")], 1),
        (vec!["param", "--kind", "tree-width", &f("k3")], 0),
        (vec!["param", "--kind", "tree-depth", &f("k3")], 0),
        (vec!["param", "--kind", "modal-depth", &f("chain")], 0),
        (vec!["param", "--kind", "modal-depth", &f("loop")], 1),
        (vec!["coalgebra", "--comonad", "ef", "-k", "2", &f("edge")], 0),
        (vec!["coalgebra", "--comonad", "ef", "-k", "1", &f("edge")], 1),
        (vec!["coalgebra", "--comonad", "pebble", "-k", "3", &f("k3")], 0),
        (vec!["coalgebra", "--comonad", "modal", "-k", "2", &f("chain")], 0),
        (vec!["selftest"], 0),
    ]
    .into_iter()
    .map(|(args, code)| (args.into_iter().map(String::from).collect(), code))
    .collect();
    for (args, expected) in &cases {
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, _) = cli(&argv);
        ensure(code == *expected, || format!("gcomonad {}: exit {code}, expected {expected}", argv.join(" ")))?;
    }
    let values = [("tree-width", "k3", 2), ("tree-depth", "k3", 3), ("modal-depth", "chain", 2)];
    for (kind, file, v) in values {
        let (_, out) = cli(&["param", "--kind", kind, &f(file)]);
        ensure(out["value"].as_u64() == Some(v), || format!("{kind} of {file}: {}", out["value"]))?;
    }
    let elapsed = started.elapsed();
    ensure(elapsed < TOTAL_LIMIT, || format!("acceptance run took {elapsed:?}"))?;
    Ok(format!("{} CLI invocations with documented exit codes; total run {:.1} s", cases.len() + 3, elapsed.as_secs_f64()))
}

type Criterion = (&'static str, Box<dyn Fn() -> Check>);

fn main() -> ExitCode {
    let started = Instant::now();
    let criteria: Vec<Criterion> = vec![
        ("comonad laws", Box::new(criterion_1)),
        ("existential EF game = homomorphism from the materialization", Box::new(criterion_2)),
        ("simulation = pointed homomorphism from the unfolding", Box::new(criterion_3)),
        ("strategy fixpoint = back-and-forth EF game", Box::new(criterion_4)),
        ("linear orders against the interval recursion", Box::new(criterion_5)),
        ("tier ordering and strictness", Box::new(criterion_6)),
        ("tree-depth = ef coalgebra number", Box::new(criterion_7)),
        ("tree-width + 1 = pebble coalgebra number", Box::new(criterion_8)),
        ("tw + 1 <= td via the comonad morphism", Box::new(criterion_9)),
        ("graded and plain modal equivalences", Box::new(criterion_10)),
        ("end-to-end CLI", Box::new(move || criterion_11(started))),
    ];
    let mut failed = 0;
    println!("acceptance: exact agreement everywhere; law suite < {LAW_SUITE_LIMIT:?}, whole run < {TOTAL_LIMIT:?}");
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
