//! Competing node scores: eigenvector centrality, Bonacich index, Shapley
//! power, Nash bargaining power, and degree.
//!
//! These are the measures the power vector is compared against. Two of them
//! are formally its truncations: the Shapley power equals the second raw
//! Sinkhorn-Knopp iterate `A (A e)^÷`, and the first Newton iterate from
//! `x_0 = (1/γ) e` is the Bonacich index with `α = 2γ`, `β = -γ²`
//! (see [`bonacich_newton_identity_check`]).

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::balancing::{self, SolveError};
use crate::graph::{Graph, GraphError};
use crate::linalg::{self, CgError};
use crate::operator::{LinearOperator, Perturbation};
use crate::vecops;

const SPECTRAL_TOL: f64 = 1e-10;
const SPECTRAL_MAX_ITER: usize = 100_000;

/// A named per-node score vector plus the parameters that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureVector {
    pub name: String,
    pub values: Vec<f64>,
    pub params: BTreeMap<String, f64>,
}

impl MeasureVector {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        MeasureVector {
            name: name.into(),
            values,
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

/// A measure produced by a fixed-point iteration, with its diagnostics.
#[derive(Debug, Clone)]
pub struct IterativeMeasure {
    pub measure: MeasureVector,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("|β| = {beta_abs} must stay below 1/r = {limit}")]
    BetaOutOfRange { beta_abs: f64, limit: f64 },
    #[error("γ² = {gamma_sq} must stay below 1/r = {limit}")]
    GammaOutOfRange { gamma_sq: f64, limit: f64 },
    #[error("linear solver failed to reach the requested tolerance")]
    LinearSolver,
    #[error("bargaining dynamics are defined for loop-free graphs")]
    LoopsUnsupported,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Eigenvector centrality by power iteration `x_{k+1} = A x_k / ‖A x_k‖₂`
/// from `x_0 = e`, stopping once `‖x_{k+1} − x_k‖_∞ ≤ tol`; the output is
/// scaled to maximum component 1.
///
/// On bipartite graphs the iteration may oscillate between two vectors and
/// never meet the tolerance; the last iterate is then returned with
/// `converged = false` (with an even `max_iter` that is the even-subsequence
/// representative).
pub fn eigenvector_centrality(op: &LinearOperator, tol: f64, max_iter: usize) -> IterativeMeasure {
    let n = op.dim();
    let mut x = vec![1.0; n];
    let mut converged = false;
    let mut iterations = 0;
    for k in 1..=max_iter {
        iterations = k;
        let y = op.apply_unchecked(&x);
        let norm = vecops::norm2(&y);
        if norm == 0.0 {
            x = vec![0.0; n];
            converged = true;
            break;
        }
        let next: Vec<f64> = y.iter().map(|&v| v / norm).collect();
        let diff = vecops::linf_diff(&next, &x);
        x = next;
        if diff <= tol {
            converged = true;
            break;
        }
    }
    let max = x.iter().fold(0.0f64, |a, &b| a.max(b));
    if max > 0.0 {
        for v in &mut x {
            *v /= max;
        }
    }
    IterativeMeasure {
        measure: MeasureVector::new("centrality", x).with_param("tol", tol),
        converged,
        iterations,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SpectralEstimate {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Power-iteration estimate of the spectral radius `max_i |λ_i|`.
///
/// The estimate is the 2-norm growth ratio `‖A x_k‖ / ‖x_k‖`, i.e. the
/// square root of the Rayleigh quotient of `A²`. Unlike the plain Rayleigh
/// quotient of `A`, this converges on bipartite graphs, where the dominant
/// eigenvalue pair is `±r`.
pub fn spectral_radius(op: &LinearOperator) -> SpectralEstimate {
    let n = op.dim();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut estimate = 0.0f64;
    for k in 1..=SPECTRAL_MAX_ITER {
        let y = op.apply_unchecked(&x);
        let norm = vecops::norm2(&y);
        if norm == 0.0 {
            return SpectralEstimate {
                value: 0.0,
                converged: true,
                iterations: k,
            };
        }
        let previous = estimate;
        estimate = norm;
        x = y.iter().map(|&v| v / norm).collect();
        if k >= 2 && (estimate - previous).abs() <= SPECTRAL_TOL * estimate {
            return SpectralEstimate {
                value: estimate,
                converged: true,
                iterations: k,
            };
        }
    }
    SpectralEstimate {
        value: estimate,
        converged: false,
        iterations: SPECTRAL_MAX_ITER,
    }
}

/// Bonacich index `x = α (I − βA)^{-1} A e`, solved as a linear system by
/// conjugate gradient to relative residual `tol`.
///
/// Requires `|β| < 1/r` (with `r` the spectral radius), which makes
/// `I − βA` positive definite. Positive `β` yields a centrality, negative
/// `β` a power measure, and `β = 0` reduces exactly to `α ·` degree.
pub fn bonacich(g: &Graph, alpha: f64, beta: f64, tol: f64) -> Result<MeasureVector, MeasureError> {
    let op = LinearOperator::new(g, Perturbation::None)?;
    let radius = spectral_radius(&op).value;
    if radius > 0.0 && beta.abs() * radius >= 1.0 {
        return Err(MeasureError::BetaOutOfRange {
            beta_abs: beta.abs(),
            limit: 1.0 / radius,
        });
    }
    let n = g.node_count();
    let degrees = g.degrees();
    let rhs: Vec<f64> = degrees.iter().map(|&d| alpha * d).collect();
    let apply = |v: &[f64]| -> Vec<f64> {
        let av = g.matvec(v);
        v.iter().zip(&av).map(|(&vi, &ai)| vi - beta * ai).collect()
    };
    let out = linalg::conjugate_gradient(apply, &rhs, &vec![0.0; n], tol, 20 * n + 200)
        .map_err(|CgError::Breakdown| MeasureError::LinearSolver)?;
    if !out.converged {
        return Err(MeasureError::LinearSolver);
    }
    Ok(MeasureVector::new("bonacich", out.solution)
        .with_param("alpha", alpha)
        .with_param("beta", beta)
        .with_param("tol", tol))
}

/// Evaluates both sides of the Newton/Bonacich identity: the first Newton
/// iterate from `x_0 = (1/γ) e` and the Bonacich index with `α = 2γ`,
/// `β = −γ²`. The two vectors must agree; this is a property check on the
/// solver plumbing, not a user-facing measure.
pub fn bonacich_newton_identity_check(
    g: &Graph,
    gamma: f64,
) -> Result<(Vec<f64>, Vec<f64>), MeasureError> {
    let op = LinearOperator::new(g, Perturbation::None)?;
    let radius = spectral_radius(&op).value;
    if radius > 0.0 && gamma * gamma * radius >= 1.0 {
        return Err(MeasureError::GammaOutOfRange {
            gamma_sq: gamma * gamma,
            limit: 1.0 / radius,
        });
    }
    let newton = balancing::newton_first_iterate(g, gamma, 1e-13)?;
    let bona = bonacich(g, 2.0 * gamma, -gamma * gamma, 1e-13)?;
    Ok((newton, bona.values))
}

/// Shapley power: the weighted sum of reciprocals of neighbor degrees,
/// `x = A (A e)^÷` — literally the second raw Sinkhorn-Knopp iterate, and
/// computed through the same sparse product so the equality is bit-exact.
/// Isolated nodes get 0 by convention.
pub fn shapley_power(g: &Graph) -> MeasureVector {
    let degrees = g.matvec(&vec![1.0; g.node_count()]);
    if degrees.iter().any(|&d| d == 0.0) {
        log::warn!("shapley power: isolated nodes present; their value is 0 by convention");
    }
    let values = g.matvec(&vecops::recip(&degrees));
    MeasureVector::new("shapley", values)
}

/// Degree centrality: the weighted degree vector `A e`.
pub fn degree_centrality(g: &Graph) -> MeasureVector {
    MeasureVector::new("degree", g.degrees())
}

/// State of the Nash bargaining dynamics on an unweighted, loop-free graph.
///
/// Every edge carries one unit of value; each actor may close a deal with at
/// most one neighbor. `R[i][j]` is the revenue `i` expects from negotiating
/// with `j`, starting at 1/2 everywhere. One synchronous step recomputes,
/// for every edge, each side's best alternative
/// `L[i][j] = max_{k ∈ N(i)∖j} R[i][k]` (0 with no alternative) and splits
/// the surplus `s = 1 − L[i][j] − L[j][i]` evenly: `R[i][j] = L[i][j] + s/2`.
/// The split is applied for negative surplus too, which keeps the Nash
/// complementarity `R[i][j] + R[j][i] = 1` exact at every step.
#[derive(Debug, Clone)]
pub struct NashState {
    neighbors: Vec<Vec<usize>>,
    /// `mirror[i][k]` is the position of `i` in `neighbors[j]` for
    /// `j = neighbors[i][k]`.
    mirror: Vec<Vec<usize>>,
    revenue: Vec<Vec<f64>>,
    iteration: usize,
}

impl NashState {
    /// Sets up the dynamics; edge weights are ignored (every edge is worth
    /// one unit) and loops are rejected.
    pub fn new(g: &Graph) -> Result<Self, MeasureError> {
        if g.has_loops() {
            return Err(MeasureError::LoopsUnsupported);
        }
        if g.edges().iter().any(|e| e.weight != 1.0) {
            log::warn!("nash power: edge weights are ignored; every edge is worth one unit");
        }
        let neighbors: Vec<Vec<usize>> = g
            .adjacency()
            .into_iter()
            .map(|row| row.into_iter().map(|(j, _)| j).collect())
            .collect();
        let mirror = neighbors
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .map(|&j| {
                        neighbors[j]
                            .binary_search(&i)
                            .expect("symmetric adjacency")
                    })
                    .collect()
            })
            .collect();
        let revenue = neighbors.iter().map(|row| vec![0.5; row.len()]).collect();
        Ok(NashState {
            neighbors,
            mirror,
            revenue,
            iteration: 0,
        })
    }

    /// One synchronous update of all edges; returns the largest edge-wise
    /// revenue change.
    pub fn step(&mut self) -> f64 {
        let n = self.neighbors.len();
        // Best alternatives from the previous revenues: per node, the top two
        // revenues give max-excluding-one in O(degree).
        let mut alternatives: Vec<Vec<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut best = 0.0f64;
            let mut best_at = usize::MAX;
            let mut second = 0.0f64;
            for (k, &rv) in self.revenue[i].iter().enumerate() {
                if rv > best {
                    second = best;
                    best = rv;
                    best_at = k;
                } else if rv > second {
                    second = rv;
                }
            }
            alternatives.push(
                (0..self.revenue[i].len())
                    .map(|k| if k == best_at { second } else { best })
                    .collect(),
            );
        }

        let mut delta = 0.0f64;
        for i in 0..n {
            for k in 0..self.neighbors[i].len() {
                let j = self.neighbors[i][k];
                if j < i {
                    continue;
                }
                let kj = self.mirror[i][k];
                let alt_ij = alternatives[i][k];
                let alt_ji = alternatives[j][kj];
                let surplus = 1.0 - alt_ij - alt_ji;
                let r_ij = alt_ij + 0.5 * surplus;
                let r_ji = alt_ji + 0.5 * surplus;
                delta = delta.max((r_ij - self.revenue[i][k]).abs());
                delta = delta.max((r_ji - self.revenue[j][kj]).abs());
                self.revenue[i][k] = r_ij;
                self.revenue[j][kj] = r_ji;
            }
        }
        self.iteration += 1;
        delta
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Current revenues per stored edge: `(i, j, R[i][j], R[j][i])`.
    pub fn edge_revenues(&self) -> Vec<(usize, usize, f64, f64)> {
        let mut out = Vec::new();
        for i in 0..self.neighbors.len() {
            for (k, &j) in self.neighbors[i].iter().enumerate() {
                if j >= i {
                    out.push((i, j, self.revenue[i][k], self.revenue[j][self.mirror[i][k]]));
                }
            }
        }
        out
    }

    /// Nash power `x_i = max_j R[i][j]`; 0 for isolated nodes.
    pub fn power(&self) -> Vec<f64> {
        self.revenue
            .iter()
            .map(|row| row.iter().fold(0.0f64, |a, &b| a.max(b)))
            .collect()
    }
}

/// Runs the bargaining dynamics to its fixpoint: stop when the largest
/// edge-wise revenue change drops to `tol`, or flag non-convergence after
/// `max_iter` steps.
pub fn nash_power(g: &Graph, tol: f64, max_iter: usize) -> Result<IterativeMeasure, MeasureError> {
    let mut state = NashState::new(g)?;
    let mut converged = false;
    while state.iteration() < max_iter {
        if state.step() <= tol {
            converged = true;
            break;
        }
    }
    Ok(IterativeMeasure {
        measure: MeasureVector::new("nash", state.power()).with_param("tol", tol),
        converged,
        iterations: state.iteration(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{complete_graph, erdos_renyi_connected, path_graph, star_graph};
    use crate::stats;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn plain(g: &Graph) -> LinearOperator<'_> {
        LinearOperator::new(g, Perturbation::None).unwrap()
    }

    #[test]
    fn centrality_of_symmetric_and_star_graphs() {
        let k3 = complete_graph(3);
        let c = eigenvector_centrality(&plain(&k3), 1e-10, 1000);
        assert!(c.converged);
        assert_eq!(c.measure.values, vec![1.0, 1.0, 1.0]);

        let star = star_graph(3);
        let c = eigenvector_centrality(&plain(&star), 1e-10, 1000);
        let values = &c.measure.values;
        assert_eq!(values[0], 1.0);
        assert!(values[1..].iter().all(|&v| v < 1.0));
    }

    #[test]
    fn centrality_argmax_on_p5_is_the_middle_node() {
        // P5 is bipartite: the iteration oscillates and reports
        // non-convergence, but the returned (even) iterate still peaks at C.
        let p5 = path_graph(5);
        let c = eigenvector_centrality(&plain(&p5), 1e-10, 1000);
        assert!(!c.converged);
        let values = &c.measure.values;
        assert!((0..5).all(|i| values[i] <= values[2]));
        assert!(values[2] > values[1] && values[2] > values[3]);
    }

    #[test]
    fn spectral_radius_of_small_graphs() {
        assert!((spectral_radius(&plain(&complete_graph(3))).value - 2.0).abs() < 1e-8);
        assert!((spectral_radius(&plain(&path_graph(3))).value - SQRT2).abs() < 1e-8);
        assert!((spectral_radius(&plain(&path_graph(2))).value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bonacich_with_zero_beta_is_exactly_scaled_degree() {
        let g = erdos_renyi_connected(12, 20, 42).unwrap();
        let m = bonacich(&g, 1.0, 0.0, 1e-12).unwrap();
        assert_eq!(m.values, g.degrees());
        let m = bonacich(&g, 2.5, 0.0, 1e-12).unwrap();
        let want: Vec<f64> = g.degrees().iter().map(|&d| 2.5 * d).collect();
        assert_eq!(m.values, want);
    }

    #[test]
    fn bonacich_on_k3_matches_the_scalar_solution() {
        // By symmetry x_i = c with c (1 - 2β) = 2α; for α=1, β=-0.85/2 this
        // gives c = 2/1.85 = 40/37.
        let k3 = complete_graph(3);
        let m = bonacich(&k3, 1.0, -0.85 / 2.0, 1e-12).unwrap();
        for &v in &m.values {
            assert!((v - 40.0 / 37.0).abs() < 1e-10);
        }
    }

    /// Dense Gaussian-elimination oracle for tiny Bonacich systems.
    fn dense_bonacich(g: &Graph, alpha: f64, beta: f64) -> Vec<f64> {
        let n = g.node_count();
        let mut a = vec![vec![0.0f64; n + 1]; n];
        for i in 0..n {
            a[i][i] = 1.0;
        }
        for e in g.edges() {
            a[e.i][e.j] -= beta * e.weight;
            a[e.j][e.i] -= beta * e.weight;
        }
        for (i, &d) in g.degrees().iter().enumerate() {
            a[i][n] = alpha * d;
        }
        for col in 0..n {
            let pivot = (col..n).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
                .unwrap();
            a.swap(col, pivot);
            for row in 0..n {
                if row != col {
                    let f = a[row][col] / a[col][col];
                    for k in col..=n {
                        a[row][k] -= f * a[col][k];
                    }
                }
            }
        }
        (0..n).map(|i| a[i][n] / a[i][i]).collect()
    }

    #[test]
    fn bonacich_on_p3_matches_dense_solve() {
        let p3 = path_graph(3);
        let beta = -0.85 / SQRT2;
        let m = bonacich(&p3, 1.0, beta, 1e-13).unwrap();
        let want = dense_bonacich(&p3, 1.0, beta);
        for (got, want) in m.values.iter().zip(&want) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn bonacich_rejects_beta_at_the_spectral_limit() {
        let k3 = complete_graph(3);
        assert!(matches!(
            bonacich(&k3, 1.0, 0.5, 1e-10),
            Err(MeasureError::BetaOutOfRange { .. })
        ));
    }

    #[test]
    fn newton_identity_holds_on_small_graphs() {
        for g in [complete_graph(3), path_graph(3)] {
            let (newton, bona) = bonacich_newton_identity_check(&g, 0.5).unwrap();
            for (a, b) in newton.iter().zip(&bona) {
                assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "{a} vs {b}");
            }
        }
        // γ² ≥ 1/r must be rejected: on P3, r = √2.
        assert!(matches!(
            bonacich_newton_identity_check(&path_graph(3), 1.0),
            Err(MeasureError::GammaOutOfRange { .. })
        ));
    }

    #[test]
    fn newton_identity_on_random_graphs() {
        for seed in 0..20u64 {
            let g = erdos_renyi_connected(10 + (seed % 10) as usize, 25, 600 + seed).unwrap();
            let radius = spectral_radius(&plain(&g)).value;
            for gamma in [0.1, 0.3, 0.5] {
                if gamma * gamma * radius >= 1.0 {
                    continue;
                }
                let (newton, bona) = bonacich_newton_identity_check(&g, gamma).unwrap();
                for (a, b) in newton.iter().zip(&bona) {
                    assert!(
                        (a - b).abs() <= 1e-9 * a.abs().max(1.0),
                        "seed {seed} γ {gamma}: {a} vs {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn shapley_on_paths_and_cliques() {
        assert_eq!(shapley_power(&complete_graph(3)).values, vec![1.0, 1.0, 1.0]);
        assert_eq!(shapley_power(&path_graph(3)).values, vec![0.5, 2.0, 0.5]);
        assert_eq!(
            shapley_power(&path_graph(5)).values,
            vec![0.5, 1.5, 1.0, 1.5, 0.5]
        );
    }

    #[test]
    fn shapley_equals_two_raw_sinkhorn_steps_bitwise() {
        for seed in 0..25u64 {
            let g = crate::generate::random_graph(2 + (seed % 9) as usize, 0.4, 0.0, 700 + seed);
            let op = plain(&g);
            let x1 = op.apply(&vec![1.0; g.node_count()]).unwrap();
            let x2 = op.apply(&vecops::recip(&x1)).unwrap();
            assert_eq!(shapley_power(&g).values, x2);
        }
    }

    #[test]
    fn nash_fixpoints_on_paths() {
        let r = nash_power(&path_graph(3), 1e-9, 100_000).unwrap();
        assert!(r.converged);
        for (got, want) in r.measure.values.iter().zip([0.0, 1.0, 0.0]) {
            assert!((got - want).abs() < 1e-6);
        }

        let r = nash_power(&path_graph(5), 1e-9, 100_000).unwrap();
        assert!(r.converged);
        for (got, want) in r.measure.values.iter().zip([0.0, 1.0, 0.0, 1.0, 0.0]) {
            assert!((got - want).abs() < 1e-6);
        }

        let r = nash_power(&path_graph(2), 1e-9, 100_000).unwrap();
        assert!(r.converged);
        assert_eq!(r.measure.values, vec![0.5, 0.5]);
    }

    #[test]
    fn nash_complementarity_holds_at_every_step() {
        for g in [path_graph(4), path_graph(5), complete_graph(4), star_graph(4)] {
            let mut state = NashState::new(&g).unwrap();
            for _ in 0..200 {
                state.step();
                for (_, _, r_ij, r_ji) in state.edge_revenues() {
                    assert!((r_ij + r_ji - 1.0).abs() <= 1e-12);
                    assert!((0.0..=1.0).contains(&r_ij));
                    assert!((0.0..=1.0).contains(&r_ji));
                }
                for x in state.power() {
                    assert!((0.0..=1.0).contains(&x));
                }
            }
        }
    }

    #[test]
    fn nash_rejects_loops_and_zeroes_isolated_nodes() {
        let looped = Graph::load_edge_list("a a\na b".as_bytes()).unwrap();
        assert!(matches!(
            nash_power(&looped, 1e-9, 10),
            Err(MeasureError::LoopsUnsupported)
        ));

        let g = Graph::from_edges(
            vec!["a".into(), "b".into(), "c".into()],
            [(0, 1, 1.0)],
        )
        .unwrap();
        let r = nash_power(&g, 1e-9, 1000).unwrap();
        assert_eq!(r.measure.values[2], 0.0);
    }

    #[test]
    fn degree_centrality_wraps_degrees() {
        let p5 = path_graph(5);
        assert_eq!(degree_centrality(&p5).values, p5.degrees());
    }

    #[test]
    fn bonacich_approaches_centrality_near_the_spectral_limit() {
        // Connected, non-bipartite fixture with heterogeneous degrees.
        let g = erdos_renyi_connected(25, 60, 11).unwrap();
        assert!(!crate::structure::is_bipartite(&g));
        let radius = spectral_radius(&plain(&g)).value;
        let bona = bonacich(&g, 1.0, 0.99 / radius, 1e-12).unwrap();
        let cent = eigenvector_centrality(&plain(&g), 1e-12, 100_000);
        assert!(cent.converged);
        let tau = stats::kendall_tau(&bona.values, &cent.measure.values, stats::TauVariant::B)
            .unwrap();
        assert!(tau > 0.99, "τ = {tau}");
    }
}
