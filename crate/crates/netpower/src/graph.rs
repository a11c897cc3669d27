//! Sparse symmetric weighted graphs and edge-list I/O.
//!
//! A [`Graph`] stores each unordered pair `{i, j}` once, with symmetry
//! implied, so the adjacency matrix `A` it represents is square, symmetric
//! and non-negative. Loops are permitted and correspond to diagonal entries
//! `A[i][i]`. All weights are strictly positive; an absent pair means a zero
//! entry.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::BufRead;

use thiserror::Error;

/// One stored edge with canonical endpoint order `i <= j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Undirected weighted graph with optional loops.
#[derive(Debug, Clone)]
pub struct Graph {
    labels: Vec<String>,
    edges: Vec<Edge>,
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("empty input: no edges found")]
    EmptyInput,
    #[error("line {line}: expected 'u v [w]', got {got:?}")]
    MalformedLine { line: usize, got: String },
    #[error("line {line}: weight {token:?} is not a positive finite number")]
    BadWeight { line: usize, token: String },
    #[error("duplicate edge {u:?} -- {v:?}")]
    DuplicateEdge { u: String, v: String },
    #[error("duplicate node label {0:?}")]
    DuplicateLabel(String),
    #[error("invalid node label {0:?}: labels must be non-empty, without whitespace or '#'")]
    InvalidLabel(String),
    #[error("edge endpoint {index} out of range for {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },
    #[error("dimension mismatch: expected vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("damping parameter must be positive and finite, got {0}")]
    BadDamping(f64),
    #[error("i/o error: {0}")]
    Io(String),
}

fn valid_label(s: &str) -> bool {
    !s.is_empty() && !s.contains(char::is_whitespace) && !s.contains('#')
}

impl Graph {
    /// Builds a graph from explicit labels and `(i, j, w)` entries.
    ///
    /// Entries are canonicalized to `i <= j`; repeating an unordered pair is
    /// an error. Isolated nodes are allowed (they simply appear in no entry).
    pub fn from_edges<I>(labels: Vec<String>, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if labels.is_empty() {
            return Err(GraphError::EmptyInput);
        }
        let n = labels.len();
        let mut seen_labels: HashMap<&str, ()> = HashMap::with_capacity(n);
        for label in &labels {
            if !valid_label(label) {
                return Err(GraphError::InvalidLabel(label.clone()));
            }
            if seen_labels.insert(label, ()).is_some() {
                return Err(GraphError::DuplicateLabel(label.clone()));
            }
        }
        let mut canon = Vec::new();
        let mut seen_pairs: HashMap<(usize, usize), ()> = HashMap::new();
        for (a, b, w) in edges {
            if a >= n {
                return Err(GraphError::NodeOutOfRange { index: a, n });
            }
            if b >= n {
                return Err(GraphError::NodeOutOfRange { index: b, n });
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(GraphError::BadWeight {
                    line: 0,
                    token: format!("{w}"),
                });
            }
            let (i, j) = if a <= b { (a, b) } else { (b, a) };
            if seen_pairs.insert((i, j), ()).is_some() {
                return Err(GraphError::DuplicateEdge {
                    u: labels[i].clone(),
                    v: labels[j].clone(),
                });
            }
            canon.push(Edge { i, j, weight: w });
        }
        Ok(Graph {
            labels,
            edges: canon,
        })
    }

    /// Parses the whitespace-separated edge-list format.
    ///
    /// Each line reads `u v [w]` with an optional positive weight (default
    /// 1.0); `#` starts a comment; `u = v` creates a loop. Nodes are numbered
    /// in order of first appearance, which makes outputs deterministic for a
    /// given file.
    pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Self, GraphError> {
        let mut labels: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();

        let mut intern = |token: &str, labels: &mut Vec<String>| -> usize {
            if let Some(&id) = index.get(token) {
                return id;
            }
            let id = labels.len();
            labels.push(token.to_string());
            index.insert(token.to_string(), id);
            id
        };

        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| GraphError::Io(e.to_string()))?;
            let line = line.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            if tokens.len() > 3 || tokens.len() < 2 {
                return Err(GraphError::MalformedLine {
                    line: lineno + 1,
                    got: line.trim().to_string(),
                });
            }
            let weight = match tokens.get(2) {
                None => 1.0,
                Some(tok) => match tok.parse::<f64>() {
                    Ok(w) if w.is_finite() && w > 0.0 => w,
                    _ => {
                        return Err(GraphError::BadWeight {
                            line: lineno + 1,
                            token: tok.to_string(),
                        })
                    }
                },
            };
            let u = intern(tokens[0], &mut labels);
            let v = intern(tokens[1], &mut labels);
            edges.push((u, v, weight));
        }
        if edges.is_empty() {
            return Err(GraphError::EmptyInput);
        }
        Graph::from_edges(labels, edges)
    }

    /// Serializes back to the edge-list format accepted by
    /// [`Graph::load_edge_list`]; loading the output reproduces the graph.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            let _ = writeln!(
                out,
                "{} {} {}",
                self.labels[e.i], self.labels[e.j], e.weight
            );
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    /// Stored entries in canonical `(i <= j)` form, one per unordered pair.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn has_loops(&self) -> bool {
        self.edges.iter().any(|e| e.i == e.j)
    }

    /// Neighbor lists with weights; a loop contributes `(i, w)` to its own
    /// list once. Lists are sorted by neighbor index.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for e in &self.edges {
            adj[e.i].push((e.j, e.weight));
            if e.i != e.j {
                adj[e.j].push((e.i, e.weight));
            }
        }
        for row in &mut adj {
            row.sort_by_key(|&(j, _)| j);
        }
        adj
    }

    /// Plain sparse product `A v`, writing into `out`.
    pub fn matvec_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.node_count());
        debug_assert_eq!(out.len(), self.node_count());
        out.fill(0.0);
        for e in &self.edges {
            out[e.i] += e.weight * v[e.j];
            if e.i != e.j {
                out[e.j] += e.weight * v[e.i];
            }
        }
    }

    /// Plain sparse product `A v`.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.node_count()];
        self.matvec_into(v, &mut out);
        out
    }

    /// Weighted degrees `d = A e`. A loop of weight `w` contributes `w` once,
    /// matching the matrix convention `A[i][i] = w` (not the graph-theoretic
    /// `2w`).
    pub fn degrees(&self) -> Vec<f64> {
        self.matvec(&vec![1.0; self.node_count()])
    }

    /// Materializes `A + αI` or `A + αE` as an explicit graph. This is
    /// intended for structural checks and cross-validation; the solvers apply
    /// perturbations implicitly through [`crate::operator::LinearOperator`].
    pub fn materialize_perturbation(
        &self,
        perturbation: crate::operator::Perturbation,
    ) -> Result<Graph, GraphError> {
        use crate::operator::Perturbation::*;
        let n = self.node_count();
        let mut weights: HashMap<(usize, usize), f64> = HashMap::new();
        for e in &self.edges {
            weights.insert((e.i, e.j), e.weight);
        }
        match perturbation {
            None => {}
            Diagonal(alpha) => {
                if !(alpha.is_finite() && alpha > 0.0) {
                    return Err(GraphError::BadDamping(alpha));
                }
                for i in 0..n {
                    *weights.entry((i, i)).or_insert(0.0) += alpha;
                }
            }
            Full(alpha) => {
                if !(alpha.is_finite() && alpha > 0.0) {
                    return Err(GraphError::BadDamping(alpha));
                }
                for i in 0..n {
                    for j in i..n {
                        *weights.entry((i, j)).or_insert(0.0) += alpha;
                    }
                }
            }
        }
        let mut entries: Vec<(usize, usize, f64)> =
            weights.into_iter().map(|((i, j), w)| (i, j, w)).collect();
        entries.sort_by_key(|&(i, j, _)| (i, j));
        Graph::from_edges(self.labels.clone(), entries)
    }
}
