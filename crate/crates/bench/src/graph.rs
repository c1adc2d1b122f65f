//! Seeded random directed graphs.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use staticfilter_core::Const;

pub fn node(i: usize) -> Const {
    Const::sym(&format!("n{i}"))
}

/// `edges` distinct directed edges over `nodes` nodes, without self loops.
/// The count is clamped to the number of possible edges.
pub fn random_graph(nodes: usize, edges: usize, seed: u64) -> Vec<(Const, Const)> {
    if nodes < 2 {
        return Vec::new();
    }
    let edges = edges.min(nodes * (nodes - 1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(edges);
    while out.len() < edges {
        let a = rng.gen_range(0..nodes);
        let b = rng.gen_range(0..nodes);
        if a != b && seen.insert((a, b)) {
            out.push((node(a), node(b)));
        }
    }
    out
}

/// Directed cycle `n0 -> n1 -> .. -> n0`.
pub fn cycle(nodes: usize) -> Vec<(Const, Const)> {
    (0..nodes)
        .map(|i| (node(i), node((i + 1) % nodes)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_graph() {
        assert_eq!(random_graph(50, 200, 7), random_graph(50, 200, 7));
        assert_ne!(random_graph(50, 200, 7), random_graph(50, 200, 8));
    }

    #[test]
    fn edge_count_and_no_loops() {
        let g = random_graph(100, 500, 1);
        assert_eq!(g.len(), 500);
        assert!(g.iter().all(|(a, b)| a != b));
        assert_eq!(g.iter().collect::<BTreeSet<_>>().len(), 500);
        assert_eq!(random_graph(3, 100, 1).len(), 6);
        assert!(random_graph(1, 10, 1).is_empty());
    }

    #[test]
    fn cycle_shape() {
        assert_eq!(
            cycle(3),
            vec![(node(0), node(1)), (node(1), node(2)), (node(2), node(0))]
        );
    }
}
