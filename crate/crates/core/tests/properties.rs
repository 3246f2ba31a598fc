use proptest::prelude::*;

use game_comonads::comonad::DEFAULT_CAP;
use game_comonads::ef::ef_game_exists;
use game_comonads::equiv::{decide, Comonad, Side};
use game_comonads::lawcheck::{random_structure, GenConfig};
use game_comonads::params::{
    ef_coalgebra_to_pebble, forest_cover_to_ef_coalgebra, pebble_coalgebra_number, pebble_cover_to_decomposition,
    tree_depth, tree_width, verify_coalgebra,
};
use game_comonads::pebble::pebble_game_exists;
use game_comonads::structure::{
    families, find_homomorphism, gaifman_graph, is_homomorphism, is_partial_isomorphism, PartialMap, Signature,
    Structure,
};

fn signature() -> Signature {
    Signature::new([("P", 1), ("R", 2)]).unwrap()
}

fn build(n: usize, bits: &[bool]) -> Structure {
    let unary: Vec<Vec<usize>> = (0..n).filter(|&i| bits[i]).map(|i| vec![i]).collect();
    let binary: Vec<Vec<usize>> = (0..n * n).filter(|&c| bits[n + c]).map(|c| vec![c / n, c % n]).collect();
    Structure::from_indexed(signature(), (0..n).map(families::element_name).collect(), vec![unary, binary]).unwrap()
}

fn structure(max: usize) -> impl Strategy<Value = Structure> {
    (1..=max).prop_flat_map(|n| {
        proptest::collection::vec(proptest::bool::weighted(0.3), n + n * n).prop_map(move |bits| build(n, &bits))
    })
}

fn graph(max: usize) -> impl Strategy<Value = Structure> {
    (1..=max).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            let edges: Vec<(usize, usize)> = pairs.into_iter().zip(bits).filter(|(_, b)| *b).map(|(e, _)| e).collect();
            families::graph(n, &edges)
        })
    })
}

fn all_maps(n: usize, m: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..m.pow(n as u32)).map(move |mut code| {
        (0..n)
            .map(|_| {
                let d = code % m;
                code /= m;
                d
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn hom_search_matches_brute_force(a in structure(4), b in structure(3)) {
        let found = find_homomorphism(&a, &b).unwrap();
        let brute = all_maps(a.size(), b.size()).any(|h| is_homomorphism(&h, &a, &b).unwrap());
        prop_assert_eq!(found.is_some(), brute);
        if let Some(h) = found {
            prop_assert!(is_homomorphism(&h, &a, &b).unwrap());
        }
    }

    #[test]
    fn partial_iso_inverse_is_partial_iso(a in structure(4), b in structure(4), picks in proptest::collection::vec((0usize..4, 0usize..4), 0..4)) {
        let pairs: Vec<(usize, usize)> = picks.into_iter().map(|(x, y)| (x % a.size(), y % b.size())).collect();
        if let Ok(map) = PartialMap::from_pairs(pairs) {
            if is_partial_isomorphism(&map, &a, &b) {
                let inverse = map.inverse().expect("partial isomorphisms are injective");
                prop_assert!(is_partial_isomorphism(&inverse, &b, &a));
            }
        }
    }

    #[test]
    fn gaifman_graph_is_simple(a in structure(5)) {
        let g = gaifman_graph(&a);
        for u in 0..a.size() {
            prop_assert!(!g.has_edge(u, u));
            for v in 0..a.size() {
                prop_assert_eq!(g.has_edge(u, v), g.has_edge(v, u));
            }
        }
    }

    #[test]
    fn equivalences_weaken_as_k_drops(a in structure(3), b in structure(3), tier in 1u8..=3) {
        for comonad in [Comonad::Ef, Comonad::Pebble] {
            let (x, y) = (Side::new(&a, None), Side::new(&b, None));
            let high = decide(comonad, tier, x, y, 2, DEFAULT_CAP).unwrap().equiv;
            let low = decide(comonad, tier, x, y, 1, DEFAULT_CAP).unwrap().equiv;
            prop_assert!(!high || low, "{} tier {}", comonad, tier);
        }
    }

    #[test]
    fn pebble_strategy_gives_ef_strategy(a in structure(3), b in structure(3), k in 1usize..=3) {
        let pebble = pebble_game_exists(&a, &b, k, 0).unwrap().duplicator_wins;
        let ef = ef_game_exists(&a, &b, k, DEFAULT_CAP).unwrap().duplicator_wins;
        prop_assert!(!pebble || ef);
    }

    #[test]
    fn enough_pebbles_decide_homomorphism(a in structure(3), b in structure(3)) {
        let pebble = pebble_game_exists(&a, &b, a.size(), 0).unwrap().duplicator_wins;
        let hom = find_homomorphism(&a, &b).unwrap().is_some();
        prop_assert_eq!(pebble, hom);
    }

    #[test]
    fn width_and_depth_witnesses(g in graph(8)) {
        let (tw, td_witness) = tree_width(&g).unwrap();
        prop_assert!(td_witness.verify(&g).is_ok());
        let (td, cover) = tree_depth(&g).unwrap();
        prop_assert!(cover.verify(&g).is_ok());
        prop_assert!(tw < td);
        let (k, pebbled) = pebble_coalgebra_number(&g).unwrap();
        prop_assert_eq!(k, tw + 1);
        prop_assert!(pebbled.verify(&g, k).is_ok());
        prop_assert!(pebble_cover_to_decomposition(&pebbled).verify(&g).is_ok());
        let ef = forest_cover_to_ef_coalgebra(&cover, td).unwrap();
        prop_assert!(verify_coalgebra(&ef, &g).unwrap().is_ok());
        prop_assert!(verify_coalgebra(&ef_coalgebra_to_pebble(&ef).unwrap(), &g).unwrap().is_ok());
    }

    #[test]
    fn generated_structures_are_reproducible(seed in any::<u64>()) {
        let cfg = GenConfig { seed, ..GenConfig::default() };
        let (a, b) = (random_structure(&cfg), random_structure(&cfg));
        prop_assert_eq!(a.universe(), b.universe());
        prop_assert_eq!(a.named_relations(), b.named_relations());
        prop_assert!(a.size() >= 1 && a.size() <= cfg.max_size);
        prop_assert!(a.signature().max_arity() <= cfg.max_arity);
    }
}
