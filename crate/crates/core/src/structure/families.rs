//! Small named structures over the signature `{R/2}`.

use super::{PointedStructure, Signature, Structure};

/// `a`, `b`, ..., `z`, then `v26`, `v27`, ...
pub fn element_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("v{i}")
    }
}

pub fn binary_signature() -> Signature {
    Signature::new([("R", 2)]).expect("static signature")
}

/// A structure on `n` elements whose only relation `R` holds the given pairs.
pub fn digraph(n: usize, edges: &[(usize, usize)]) -> Structure {
    let universe = (0..n).map(element_name).collect();
    let tuples = edges.iter().map(|&(x, y)| vec![x, y]).collect();
    Structure::from_indexed(binary_signature(), universe, vec![tuples]).expect("valid digraph")
}

/// Like [`digraph`] but every edge is added in both directions.
pub fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
    let both: Vec<_> = edges.iter().flat_map(|&(x, y)| [(x, y), (y, x)]).collect();
    digraph(n, &both)
}

/// `{a}` with `R = {(a, a)}`.
pub fn loop_structure() -> Structure {
    digraph(1, &[(0, 0)])
}

/// `{a, b}` with the single directed edge `(a, b)`.
pub fn edge() -> Structure {
    digraph(2, &[(0, 1)])
}

/// `{a, b}` with the symmetric edge.
pub fn symmetric_edge() -> Structure {
    graph(2, &[(0, 1)])
}

pub fn empty(n: usize) -> Structure {
    digraph(n, &[])
}

pub fn complete_graph(n: usize) -> Structure {
    let edges: Vec<_> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    graph(n, &edges)
}

/// The strict linear order on `n` elements.
pub fn linear_order(n: usize) -> Structure {
    let edges: Vec<_> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    digraph(n, &edges)
}

pub fn path(n: usize) -> Structure {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    graph(n, &edges)
}

pub fn cycle(n: usize) -> Structure {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    graph(n, &edges)
}

pub fn star(leaves: usize) -> Structure {
    let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
    graph(leaves + 1, &edges)
}

/// Directed chain `a -> b -> ...` on `n` worlds, pointed at `a`.
pub fn chain(n: usize) -> PointedStructure {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    PointedStructure::new(digraph(n, &edges), 0).expect("point in range")
}

/// Directed cycle on `n` worlds, pointed at `a`.
pub fn directed_cycle(n: usize) -> PointedStructure {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    PointedStructure::new(digraph(n, &edges), 0).expect("point in range")
}

pub fn pointed(structure: Structure, point: usize) -> PointedStructure {
    PointedStructure::new(structure, point).expect("point in range")
}
