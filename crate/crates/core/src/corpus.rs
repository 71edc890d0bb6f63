//! Standard small graphs used by the tests and the `gen-corpus` command.

use crate::graph::{random_graph, Graph, GraphError};

pub fn complete(n: u32) -> Graph {
    Graph::new(n, (1..=n).flat_map(|u| (u + 1..=n).map(move |v| (u, v)))).expect("valid")
}

pub fn path(n: u32) -> Graph {
    Graph::new(n, (1..n).map(|u| (u, u + 1))).expect("valid")
}

pub fn cycle(n: u32) -> Graph {
    Graph::new(n, (1..=n).map(|u| (u, u % n + 1))).expect("valid")
}

/// Outer 5-cycle 1..5, inner pentagram 6..10, spokes `i -- i+5`.
pub fn petersen() -> Graph {
    let outer = (1..=5).map(|i| (i, i % 5 + 1));
    let inner = (0..5).map(|i| (6 + i, 6 + (i + 2) % 5));
    let spokes = (1..=5).map(|i| (i, i + 5));
    Graph::new(10, outer.chain(inner).chain(spokes)).expect("valid")
}

/// Seed used for the random members of the standard corpus.
pub const DEFAULT_SEED: u64 = 20240101;

/// Named standard corpus: `K2, K3, K4, P3, C5, Petersen` plus `random` seeded
/// `G(4, 1/2)` graphs with seeds `seed, seed + 1, ...`.
pub fn standard(seed: u64, random: usize) -> Result<Vec<(String, Graph)>, GraphError> {
    let mut out = vec![
        ("k2".to_string(), complete(2)),
        ("k3".to_string(), complete(3)),
        ("k4".to_string(), complete(4)),
        ("p3".to_string(), path(3)),
        ("c5".to_string(), cycle(5)),
        ("petersen".to_string(), petersen()),
    ];
    for i in 0..random as u64 {
        let s = seed.wrapping_add(i);
        out.push((format!("gnp4_{s}"), random_graph(4, 0.5, s)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::three_color_backtracking;

    #[test]
    fn shapes() {
        assert_eq!(complete(4).edge_count(), 6);
        assert_eq!(path(3).edge_count(), 2);
        assert_eq!(cycle(5).edge_count(), 5);
        let p = petersen();
        assert_eq!((p.vertex_count(), p.edge_count()), (10, 15));
        // 3-regular
        for v in p.vertices() {
            assert_eq!(p.vertices().filter(|&w| p.has_edge(v, w)).count(), 3);
        }
    }

    #[test]
    fn petersen_is_three_chromatic() {
        assert!(three_color_backtracking(&petersen()).is_some());
    }

    #[test]
    fn standard_corpus_is_deterministic() {
        let a = standard(7, 3).unwrap();
        assert_eq!(a, standard(7, 3).unwrap());
        assert_eq!(a.len(), 9);
    }
}
