//! Combinatorial feasibility analysis for the power equation.
//!
//! The power equation `x = A x^÷` has a positive solution exactly when `A`
//! has *total support*: every positive entry lies on a positive diagonal
//! (a set of `n` positive entries on distinct rows and columns). *Support*
//! alone means at least one positive diagonal exists, which for a graph is
//! the same as containing a spanning cycle forest. The solution is unique
//! when `A` is *fully indecomposable*; for a non-bipartite graph that is
//! equivalent to total support plus irreducibility, while the adjacency
//! matrix of a bipartite graph is never fully indecomposable.
//!
//! Support is decided by a maximum bipartite matching between rows and
//! columns (Hopcroft-Karp). Total support then follows from a classical
//! observation: given one perfect matching, an edge lies on *some* perfect
//! matching iff it is matched or lies on an alternating cycle, i.e. its
//! endpoints share a strongly connected component of the matching-oriented
//! digraph. This keeps the per-edge verdict polynomial instead of re-solving
//! a matching per edge.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Error, PartialEq)]
pub enum StructureError {
    #[error("brute-force oracle limited to 9 nodes, got {0}")]
    TooLarge(usize),
}

/// All structural verdicts for one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    /// Irreducibility of the adjacency matrix = connectedness of the graph.
    pub connected: bool,
    pub bipartite: bool,
    pub has_support: bool,
    pub has_total_support: bool,
    pub fully_indecomposable: bool,
    /// One positive diagonal as a permutation: `A[i][witness[i]] > 0`.
    pub witness: Option<Vec<usize>>,
    /// Stored entries `(i <= j)` lying on no positive diagonal; empty iff
    /// the graph has total support.
    pub violating_edges: Vec<(usize, usize)>,
}

/// Label-pair view of a [`StructureReport`] for serialization.
#[derive(Debug, Clone, Serialize)]
pub struct LabeledStructureReport {
    pub nodes: usize,
    pub edges: usize,
    pub connected: bool,
    pub bipartite: bool,
    pub has_support: bool,
    pub has_total_support: bool,
    pub fully_indecomposable: bool,
    pub witness: Option<Vec<[String; 2]>>,
    pub violating_edges: Vec<[String; 2]>,
}

impl StructureReport {
    pub fn analyze(g: &Graph) -> Self {
        let connected = is_irreducible(g);
        let bipartite = is_bipartite(g);
        let (supported, witness) = has_support(g);
        let (total, violating_edges) = has_total_support(g);
        StructureReport {
            connected,
            bipartite,
            has_support: supported,
            has_total_support: total,
            fully_indecomposable: !bipartite && total && connected,
            witness,
            violating_edges,
        }
    }

    pub fn labeled(&self, g: &Graph) -> LabeledStructureReport {
        let pair = |i: usize, j: usize| [g.label(i).to_string(), g.label(j).to_string()];
        LabeledStructureReport {
            nodes: g.node_count(),
            edges: g.edge_count(),
            connected: self.connected,
            bipartite: self.bipartite,
            has_support: self.has_support,
            has_total_support: self.has_total_support,
            fully_indecomposable: self.fully_indecomposable,
            witness: self
                .witness
                .as_ref()
                .map(|sigma| sigma.iter().enumerate().map(|(i, &s)| pair(i, s)).collect()),
            violating_edges: self
                .violating_edges
                .iter()
                .map(|&(i, j)| pair(i, j))
                .collect(),
        }
    }
}

/// True iff the graph is 2-colorable. A loop makes its component (and hence
/// the conjunction over components) non-bipartite.
pub fn is_bipartite(g: &Graph) -> bool {
    if g.has_loops() {
        return false;
    }
    let n = g.node_count();
    let adj = g.adjacency();
    let mut color = vec![u8::MAX; n];
    for start in 0..n {
        if color[start] != u8::MAX {
            continue;
        }
        color[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &adj[v] {
                if color[w] == u8::MAX {
                    color[w] = 1 - color[v];
                    queue.push_back(w);
                } else if color[w] == color[v] {
                    return false;
                }
            }
        }
    }
    true
}

/// Irreducibility of the adjacency matrix: the undirected graph is connected.
pub fn is_irreducible(g: &Graph) -> bool {
    let n = g.node_count();
    if n == 0 {
        return false;
    }
    let adj = g.adjacency();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &(w, _) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count == n
}

/// Row/column adjacency of the positive pattern: `rows[i]` lists the columns
/// `j` with `A[i][j] > 0` (a loop contributes its own column).
fn row_col_adjacency(g: &Graph) -> Vec<Vec<usize>> {
    g.adjacency()
        .into_iter()
        .map(|row| row.into_iter().map(|(j, _)| j).collect())
        .collect()
}

struct Matching {
    size: usize,
    row_to_col: Vec<Option<usize>>,
    col_to_row: Vec<Option<usize>>,
}

/// Hopcroft-Karp maximum matching on the n x n row/column pattern graph.
fn hopcroft_karp(n: usize, adj: &[Vec<usize>]) -> Matching {
    let mut row_to_col: Vec<Option<usize>> = vec![None; n];
    let mut col_to_row: Vec<Option<usize>> = vec![None; n];
    let mut size = 0;

    loop {
        // BFS layers over free rows.
        let mut dist = vec![usize::MAX; n];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for r in 0..n {
            if row_to_col[r].is_none() {
                dist[r] = 0;
                queue.push_back(r);
            }
        }
        let mut reachable_free_col = false;
        while let Some(r) = queue.pop_front() {
            for &c in &adj[r] {
                match col_to_row[c] {
                    None => reachable_free_col = true,
                    Some(r2) => {
                        if dist[r2] == usize::MAX {
                            dist[r2] = dist[r] + 1;
                            queue.push_back(r2);
                        }
                    }
                }
            }
        }
        if !reachable_free_col {
            break;
        }

        fn augment(
            r: usize,
            adj: &[Vec<usize>],
            dist: &mut [usize],
            row_to_col: &mut [Option<usize>],
            col_to_row: &mut [Option<usize>],
        ) -> bool {
            for idx in 0..adj[r].len() {
                let c = adj[r][idx];
                let ok = match col_to_row[c] {
                    None => true,
                    Some(r2) => {
                        dist[r2] == dist[r] + 1
                            && augment(r2, adj, dist, row_to_col, col_to_row)
                    }
                };
                if ok {
                    row_to_col[r] = Some(c);
                    col_to_row[c] = Some(r);
                    return true;
                }
            }
            dist[r] = usize::MAX;
            false
        }

        for r in 0..n {
            if row_to_col[r].is_none()
                && augment(r, adj, &mut dist, &mut row_to_col, &mut col_to_row)
            {
                size += 1;
            }
        }
    }

    Matching {
        size,
        row_to_col,
        col_to_row,
    }
}

/// Strongly connected components by iterative Tarjan; returns component ids.
fn tarjan_scc(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut frames: Vec<(usize, usize)> = Vec::new();
    let mut next_index = 0;
    let mut components = 0;

    for start in 0..n {
        if index[start] != usize::MAX {
            continue;
        }
        index[start] = next_index;
        low[start] = next_index;
        next_index += 1;
        stack.push(start);
        on_stack[start] = true;
        frames.push((start, 0));

        while let Some(frame) = frames.last_mut() {
            let (v, cursor) = (frame.0, frame.1);
            if cursor < adj[v].len() {
                frame.1 += 1;
                let w = adj[v][cursor];
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(parent) = frames.last() {
                    let p = parent.0;
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp[w] = components;
                        if w == v {
                            break;
                        }
                    }
                    components += 1;
                }
            }
        }
    }
    comp
}

/// Whether the matrix contains a positive diagonal, with one diagonal as
/// witness: a permutation `σ` with `A[i][σ(i)] > 0` for all `i`.
pub fn has_support(g: &Graph) -> (bool, Option<Vec<usize>>) {
    let n = g.node_count();
    let matching = hopcroft_karp(n, &row_col_adjacency(g));
    if matching.size == n {
        let sigma = matching.row_to_col.iter().map(|c| c.unwrap()).collect();
        (true, Some(sigma))
    } else {
        (false, None)
    }
}

/// Whether every positive entry lies on some positive diagonal; returns the
/// offending stored entries otherwise. With no positive diagonal at all,
/// every edge is offending.
pub fn has_total_support(g: &Graph) -> (bool, Vec<(usize, usize)>) {
    let n = g.node_count();
    if g.edge_count() == 0 {
        return (false, Vec::new());
    }
    let adj = row_col_adjacency(g);
    let matching = hopcroft_karp(n, &adj);
    if matching.size < n {
        let all = g.edges().iter().map(|e| (e.i, e.j)).collect();
        return (false, all);
    }

    // Matching-oriented digraph on rows 0..n and columns n..2n: matched
    // edges point column -> row, free edges row -> column. A free edge lies
    // on an alternating cycle iff its endpoints share an SCC.
    let mut digraph = vec![Vec::new(); 2 * n];
    for (r, cols) in adj.iter().enumerate() {
        for &c in cols {
            if matching.row_to_col[r] == Some(c) {
                digraph[n + c].push(r);
            } else {
                digraph[r].push(n + c);
            }
        }
    }
    let comp = tarjan_scc(&digraph);
    let admissible = |r: usize, c: usize| -> bool {
        matching.row_to_col[r] == Some(c) || comp[r] == comp[n + c]
    };

    let mut violating = Vec::new();
    for e in g.edges() {
        // Symmetry of A makes the two orientations agree; check both anyway.
        if !(admissible(e.i, e.j) && admissible(e.j, e.i)) {
            violating.push((e.i, e.j));
        }
    }
    (violating.is_empty(), violating)
}

/// Full indecomposability: for non-bipartite graphs, total support plus
/// irreducibility; bipartite adjacency matrices are never fully
/// indecomposable.
pub fn is_fully_indecomposable(g: &Graph) -> bool {
    if is_bipartite(g) {
        return false;
    }
    has_total_support(g).0 && is_irreducible(g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupportMode {
    Support,
    Total,
}

/// Decision by exhaustive enumeration of all `n!` permutations; the test
/// oracle for [`has_support`] and [`has_total_support`].
pub fn brute_force_support(g: &Graph, mode: SupportMode) -> Result<bool, StructureError> {
    let n = g.node_count();
    if n > 9 {
        return Err(StructureError::TooLarge(n));
    }
    let mut dense = vec![vec![0.0f64; n]; n];
    for e in g.edges() {
        dense[e.i][e.j] = e.weight;
        dense[e.j][e.i] = e.weight;
    }

    let mut any_diagonal = false;
    let mut covered = vec![vec![false; n]; n];
    let mut sigma = vec![0usize; n];
    let mut used = vec![false; n];
    fn enumerate(
        level: usize,
        n: usize,
        dense: &[Vec<f64>],
        sigma: &mut [usize],
        used: &mut [bool],
        any: &mut bool,
        covered: &mut [Vec<bool>],
    ) {
        if level == n {
            if (0..n).all(|i| dense[i][sigma[i]] > 0.0) {
                *any = true;
                for i in 0..n {
                    covered[i][sigma[i]] = true;
                }
            }
            return;
        }
        for c in 0..n {
            if !used[c] {
                used[c] = true;
                sigma[level] = c;
                enumerate(level + 1, n, dense, sigma, used, any, covered);
                used[c] = false;
            }
        }
    }
    enumerate(
        0,
        n,
        &dense,
        &mut sigma,
        &mut used,
        &mut any_diagonal,
        &mut covered,
    );

    Ok(match mode {
        SupportMode::Support => any_diagonal,
        SupportMode::Total => {
            g.edge_count() > 0
                && (0..n).all(|i| (0..n).all(|j| dense[i][j] == 0.0 || covered[i][j]))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{
        complete_graph, path_graph, random_graph, star_graph, triangle_plus_edge,
    };
    use crate::graph::Graph;
    use crate::operator::Perturbation;

    #[test]
    fn bipartite_paths_and_odd_cycles() {
        assert!(is_bipartite(&path_graph(3)));
        assert!(!is_bipartite(&complete_graph(3)));
        let looped = Graph::load_edge_list("a a".as_bytes()).unwrap();
        assert!(!is_bipartite(&looped));
    }

    #[test]
    fn irreducibility_is_connectedness() {
        assert!(is_irreducible(&path_graph(5)));
        let k3_isolated =
            Graph::from_edges(vec!["a".into(), "b".into(), "c".into(), "d".into()],
                [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])
            .unwrap();
        assert!(!is_irreducible(&k3_isolated));
        assert!(!is_irreducible(&triangle_plus_edge()));
    }

    #[test]
    fn star_has_no_support() {
        let (supported, witness) = has_support(&star_graph(3));
        assert!(!supported);
        assert!(witness.is_none());
    }

    #[test]
    fn p4_support_witness_is_the_unique_matching() {
        let (supported, witness) = has_support(&path_graph(4));
        assert!(supported);
        // The only positive diagonal of a 4-path pairs the two end edges.
        assert_eq!(witness, Some(vec![1, 0, 3, 2]));
        assert!(brute_force_support(&path_graph(4), SupportMode::Support).unwrap());
    }

    #[test]
    fn k3_witness_is_a_valid_diagonal() {
        let k3 = complete_graph(3);
        let (supported, witness) = has_support(&k3);
        assert!(supported);
        let sigma = witness.unwrap();
        let mut seen = vec![false; 3];
        for (i, &s) in sigma.iter().enumerate() {
            assert!(!seen[s], "witness must be a permutation");
            seen[s] = true;
            assert_ne!(i, s, "K3 has no loops, so no fixed points");
        }
    }

    #[test]
    fn total_support_verdicts() {
        // P3 has no support at all: every edge is violating.
        let (total, violating) = has_total_support(&path_graph(3));
        assert!(!total);
        assert_eq!(violating, vec![(0, 1), (1, 2)]);

        // The 2-node path is totally supported.
        let (total, violating) = has_total_support(&path_graph(2));
        assert!(total);
        assert!(violating.is_empty());

        // P4 has support but the middle edge lies on no positive diagonal.
        let (total, violating) = has_total_support(&path_graph(4));
        assert!(!total);
        assert_eq!(violating, vec![(1, 2)]);
        assert!(!brute_force_support(&path_graph(4), SupportMode::Total).unwrap());

        let (total, _) = has_total_support(&complete_graph(3));
        assert!(total);
        assert!(brute_force_support(&complete_graph(3), SupportMode::Total).unwrap());

        // Triangle plus disjoint edge: totally supported but reducible.
        let (total, _) = has_total_support(&triangle_plus_edge());
        assert!(total);
        assert!(!is_irreducible(&triangle_plus_edge()));
    }

    #[test]
    fn full_indecomposability() {
        assert!(is_fully_indecomposable(&complete_graph(3)));
        assert!(!is_fully_indecomposable(&path_graph(2))); // bipartite
        assert!(!is_fully_indecomposable(&triangle_plus_edge())); // reducible
    }

    #[test]
    fn single_node_cases() {
        let looped = Graph::load_edge_list("a a".as_bytes()).unwrap();
        assert!(has_support(&looped).0);
        assert!(has_total_support(&looped).0);
        assert!(is_fully_indecomposable(&looped));

        let lonely = Graph::from_edges(vec!["a".into()], []).unwrap();
        assert!(!has_support(&lonely).0);
        assert!(!has_total_support(&lonely).0);
    }

    #[test]
    fn matches_brute_force_on_random_graphs() {
        for seed in 0..60u64 {
            let n = 1 + (seed % 8) as usize;
            let density = 0.15 + 0.1 * ((seed / 8) % 8) as f64;
            let loop_prob = if seed % 3 == 0 { 0.25 } else { 0.0 };
            let g = random_graph(n, density, loop_prob, 1000 + seed);
            let fast = has_support(&g).0;
            let oracle = brute_force_support(&g, SupportMode::Support).unwrap();
            assert_eq!(fast, oracle, "support mismatch on seed {seed}");
            let fast_total = has_total_support(&g).0;
            let oracle_total = brute_force_support(&g, SupportMode::Total).unwrap();
            assert_eq!(fast_total, oracle_total, "total support mismatch on seed {seed}");
        }
    }

    #[test]
    fn report_invariants_and_witness_validity() {
        for seed in 0..40u64 {
            let n = 1 + (seed % 8) as usize;
            let g = random_graph(n, 0.4, 0.2, 2000 + seed);
            let report = StructureReport::analyze(&g);
            if report.fully_indecomposable {
                assert!(report.has_total_support && report.connected);
            }
            if report.has_total_support {
                assert!(report.has_support);
                assert!(report.violating_edges.is_empty());
            }
            if report.bipartite {
                assert!(!report.fully_indecomposable);
            }
            if let Some(sigma) = &report.witness {
                let mut seen = vec![false; n];
                let adj = g.adjacency();
                for (i, &s) in sigma.iter().enumerate() {
                    assert!(!seen[s]);
                    seen[s] = true;
                    assert!(adj[i].iter().any(|&(j, _)| j == s));
                }
            }
        }
    }

    #[test]
    fn perturbation_regains_support() {
        let shapes = [
            star_graph(3),
            path_graph(4),
            path_graph(5),
            triangle_plus_edge(),
            random_graph(6, 0.3, 0.0, 5),
        ];
        for g in &shapes {
            let diag = g
                .materialize_perturbation(Perturbation::Diagonal(0.15))
                .unwrap();
            assert!(has_total_support(&diag).0, "diagonal perturbation restores total support");
            if is_irreducible(g) {
                assert!(is_fully_indecomposable(&diag));
            }
            let full = g.materialize_perturbation(Perturbation::Full(0.01)).unwrap();
            assert!(is_fully_indecomposable(&full), "full perturbation is fully indecomposable");
        }
    }

    #[test]
    fn brute_force_rejects_large_graphs() {
        let g = random_graph(10, 0.5, 0.0, 1);
        assert_eq!(
            brute_force_support(&g, SupportMode::Support),
            Err(StructureError::TooLarge(10))
        );
    }
}
