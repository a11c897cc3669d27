//! Deterministic graph generators for tests and benchmarks.
//!
//! Named families (paths, cycles, stars, cliques) label nodes `A`, `B`, ...
//! for small orders. Random generators are seeded with ChaCha so the same
//! seed yields the same graph on every platform.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::structure;

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("need at least {need} edges for {what}, got {got}")]
    TooFewEdges {
        need: usize,
        got: usize,
        what: &'static str,
    },
    #[error("{got} edges exceed the {max} distinct pairs of {n} nodes")]
    TooManyEdges { got: usize, max: usize, n: usize },
    #[error("no connected graph found in {attempts} attempts (n={n}, m={m}, seed={seed})")]
    ConnectivityFailed {
        attempts: usize,
        n: usize,
        m: usize,
        seed: u64,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            if n <= 26 {
                char::from(b'A' + i as u8).to_string()
            } else {
                format!("v{i}")
            }
        })
        .collect()
}

/// Path on `n >= 1` nodes: `A - B - ... `.
pub fn path_graph(n: usize) -> Graph {
    let edges = (0..n.saturating_sub(1)).map(|i| (i, i + 1, 1.0));
    Graph::from_edges(default_labels(n), edges).expect("valid path")
}

/// Cycle on `n >= 3` nodes.
pub fn cycle_graph(n: usize) -> Graph {
    assert!(n >= 3);
    let edges = (0..n).map(|i| (i, (i + 1) % n, 1.0));
    Graph::from_edges(default_labels(n), edges).expect("valid cycle")
}

/// Complete graph on `n >= 2` nodes.
pub fn complete_graph(n: usize) -> Graph {
    let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, 1.0)));
    Graph::from_edges(default_labels(n), edges).expect("valid clique")
}

/// Star with one center (`A`) and `leaves >= 1` leaves.
pub fn star_graph(leaves: usize) -> Graph {
    assert!(leaves >= 1);
    let edges = (1..=leaves).map(|l| (0, l, 1.0));
    Graph::from_edges(default_labels(leaves + 1), edges).expect("valid star")
}

/// Triangle plus a disjoint single edge: total support without
/// irreducibility.
pub fn triangle_plus_edge() -> Graph {
    Graph::from_edges(
        default_labels(5),
        [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0)],
    )
    .expect("valid graph")
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect()
}

fn gnm_edges(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Result<Vec<(usize, usize)>, GenerateError> {
    let pairs = all_pairs(n);
    if m > pairs.len() {
        return Err(GenerateError::TooManyEdges {
            got: m,
            max: pairs.len(),
            n,
        });
    }
    let mut chosen: Vec<(usize, usize)> =
        sample(rng, pairs.len(), m).iter().map(|k| pairs[k]).collect();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Erdős–Rényi `G(n, m)`: `m` distinct unordered pairs, unit weights,
/// no loops. May be disconnected.
pub fn erdos_renyi(n: usize, m: usize, seed: u64) -> Result<Graph, GenerateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = gnm_edges(n, m, &mut rng)?;
    Ok(Graph::from_edges(
        default_labels(n),
        edges.into_iter().map(|(i, j)| (i, j, 1.0)),
    )?)
}

/// `G(n, m)` conditioned on connectivity; resamples with derived seeds until
/// a connected graph appears (bounded attempts).
pub fn erdos_renyi_connected(n: usize, m: usize, seed: u64) -> Result<Graph, GenerateError> {
    connected_gnm(n, m, seed, |_, _| 1.0)
}

/// `G(n, m)` conditioned on connectivity, with log-uniform weights in
/// `[w_lo, w_hi]`. Heterogeneous weights produce much harder balancing
/// instances than unit weights.
pub fn random_weighted_connected(
    n: usize,
    m: usize,
    w_lo: f64,
    w_hi: f64,
    seed: u64,
) -> Result<Graph, GenerateError> {
    assert!(w_lo > 0.0 && w_hi >= w_lo);
    let (lo, hi) = (w_lo.ln(), w_hi.ln());
    connected_gnm(n, m, seed, move |_, rng| {
        if lo == hi {
            w_lo
        } else {
            rng.gen_range(lo..hi).exp()
        }
    })
}

fn connected_gnm<F>(n: usize, m: usize, seed: u64, mut weight: F) -> Result<Graph, GenerateError>
where
    F: FnMut((usize, usize), &mut ChaCha8Rng) -> f64,
{
    if n >= 2 && m + 1 < n {
        return Err(GenerateError::TooFewEdges {
            need: n - 1,
            got: m,
            what: "a connected graph",
        });
    }
    const ATTEMPTS: usize = 1000;
    for attempt in 0..ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64 * 0x9e37_79b9));
        let pairs = gnm_edges(n, m, &mut rng)?;
        let edges: Vec<(usize, usize, f64)> = pairs
            .into_iter()
            .map(|p| (p.0, p.1, weight(p, &mut rng)))
            .collect();
        let g = Graph::from_edges(default_labels(n), edges)?;
        if structure::is_irreducible(&g) {
            return Ok(g);
        }
    }
    Err(GenerateError::ConnectivityFailed {
        attempts: ATTEMPTS,
        n,
        m,
        seed,
    })
}

/// `G(n, p)`-style graph with independent edges and optional loops; used to
/// stress the structural checks with varying density. May be edgeless or
/// disconnected.
pub fn random_graph(n: usize, edge_prob: f64, loop_prob: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        if rng.gen_bool(loop_prob) {
            edges.push((i, i, 1.0));
        }
        for j in i + 1..n {
            if rng.gen_bool(edge_prob) {
                edges.push((i, j, 1.0));
            }
        }
    }
    Graph::from_edges(default_labels(n), edges).expect("valid random graph")
}
