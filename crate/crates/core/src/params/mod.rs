//! Combinatorial parameters read off coalgebras: tree-depth from forest
//! covers, tree-width from pebbled covers, and synchronization-tree height.

mod coalgebra;
mod forest;
mod width;

pub use coalgebra::{
    ef_coalgebra_to_forest_cover, ef_coalgebra_to_pebble, ef_to_pebble_morphism,
    forest_cover_to_ef_coalgebra, modal_depth, pebble_coalgebra_to_cover, pebble_cover_to_coalgebra,
    verify_coalgebra, Coalgebra, Law, SyncTree, Violation,
};
pub use forest::{ForestCover, PebbledForestCover, TreeDecomposition};
pub use width::{
    decomposition_to_pebble_cover, pebble_coalgebra_number, pebble_cover_to_decomposition,
    tree_depth, tree_width, TREE_DEPTH_LIMIT, TREE_WIDTH_LIMIT,
};
