//! Solvers for the power equation `x = A x^÷`.
//!
//! Both solvers exploit the balancing connection: `x` solves the power
//! equation iff `S = D A D` with `D = diag(x)^÷` is doubly stochastic, so the
//! reported residual is the doubly-stochastic defect
//! `‖D A D e − e‖_∞ = ‖(A x^÷) ⊘ x − e‖_∞`.
//!
//! *Sinkhorn-Knopp* iterates `x_{k+1} = A x_k^÷` from `x_0 = e`. On totally
//! supported matrices the even and odd iterates converge separately to
//! vectors that differ by a multiplicative constant; the component-wise
//! geometric mean of one adjacent pair cancels that constant symmetrically
//! and is returned as the power vector. Convergence is monitored through the
//! free same-parity ratio test `‖x_{k+1} ⊘ x_{k-1} − e‖_∞` (the column-sum
//! defect of the two-sided pair scaling) and then verified on the recombined
//! vector, which costs one extra counted matvec per verification.
//!
//! *Newton* solves `f(x) = x − A x^÷ = 0`. With `J(x) = I + A diag(x²)^÷`
//! the update collapses to `x_{k+1} = 2 J(x_k)^{-1} A x_k^÷`. Each outer step
//! solves the Jacobian system inexactly: `J` is similar to the symmetric
//! matrix `I + D A D` via `D = diag(x)^÷`, so conjugate gradient applies,
//! with one counted matvec per inner iteration and a residual-reduction
//! forcing rule. If the inner solve breaks down the step falls back to one
//! Sinkhorn-Knopp sweep; if an iterate would lose positivity the step is
//! halved until positive.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::linalg::{self, CgError};
use crate::operator::{LinearOperator, Perturbation};
use crate::structure;
use crate::vecops;

/// Iterates outside this band are treated as divergence; squares of in-band
/// values still fit in f64.
const DIVERGENCE_MAX: f64 = 1e150;
const DIVERGENCE_MIN: f64 = 1e-150;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    SinkhornKnopp,
    Newton,
}

impl std::fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolveMethod::SinkhornKnopp => write!(f, "sinkhorn_knopp"),
            SolveMethod::Newton => write!(f, "newton"),
        }
    }
}

/// How the adjacent even/odd iterate pair is recombined into one vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `√(x_even ⊙ x_odd)`: cancels the inter-subsequence constant using all
    /// components and picks the symmetric representative when the scaling
    /// diagonal is not unique (bipartite totally supported graphs).
    GeometricMean,
    /// Scale the latest iterate so its first component matches the geometric
    /// mean of the pair's first components.
    FirstComponent,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub method: SolveMethod,
    /// Convergence threshold on the balance residual (infinity norm).
    pub tol: f64,
    pub max_outer: usize,
    /// Newton only: the inner solve stops after reducing its residual by
    /// this factor...
    pub inner_reduction: f64,
    /// ...or after this many inner iterations.
    pub max_inner: usize,
    pub normalization: Normalization,
    /// Refuse to run an unperturbed solve when the graph lacks total support
    /// (no exact solution exists) instead of letting the iteration fail.
    pub strict_existence: bool,
}

impl SolverConfig {
    pub fn sinkhorn() -> Self {
        SolverConfig {
            method: SolveMethod::SinkhornKnopp,
            tol: 1e-8,
            max_outer: 50_000,
            inner_reduction: 1e-2,
            max_inner: 200,
            normalization: Normalization::GeometricMean,
            strict_existence: false,
        }
    }

    pub fn newton() -> Self {
        SolverConfig {
            method: SolveMethod::Newton,
            max_outer: 200,
            ..SolverConfig::sinkhorn()
        }
    }

    pub fn with_method(method: SolveMethod) -> Self {
        match method {
            SolveMethod::SinkhornKnopp => SolverConfig::sinkhorn(),
            SolveMethod::Newton => SolverConfig::newton(),
        }
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn max_outer(mut self, max_outer: usize) -> Self {
        self.max_outer = max_outer;
        self
    }

    pub fn strict(mut self, strict: bool) -> Self {
        self.strict_existence = strict;
        self
    }
}

/// Outcome of one balancing solve.
#[derive(Debug, Clone)]
pub struct BalanceResult {
    /// The power vector; strictly positive when converged.
    pub power: Vec<f64>,
    /// `‖(A x^÷) ⊘ x − e‖_∞` at the returned vector.
    pub residual: f64,
    pub outer_iterations: usize,
    /// Counted matrix-vector products, including inner iterations and
    /// residual verification.
    pub matvecs: u64,
    pub converged: bool,
    pub method: SolveMethod,
}

/// Serializable per-node view of a [`BalanceResult`].
#[derive(Debug, Clone, Serialize)]
pub struct LabeledBalanceReport {
    pub method: SolveMethod,
    pub converged: bool,
    pub residual: f64,
    pub outer_iterations: usize,
    pub matvecs: u64,
    pub power: Vec<LabeledValue>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LabeledValue {
    pub label: String,
    pub value: f64,
}

impl BalanceResult {
    pub fn labeled(&self, g: &Graph) -> LabeledBalanceReport {
        LabeledBalanceReport {
            method: self.method,
            converged: self.converged,
            residual: self.residual,
            outer_iterations: self.outer_iterations,
            matvecs: self.matvecs,
            power: g
                .labels()
                .iter()
                .zip(&self.power)
                .map(|(label, &value)| LabeledValue {
                    label: label.clone(),
                    value,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("iteration diverged at step {iteration}: the matrix has no balancing solution or is numerically intractable")]
    Divergence { iteration: usize },
    #[error("no exact solution exists: {violating} edge(s) lie on no positive diagonal; perturbation required")]
    NoExactSolution { violating: usize },
    #[error("vector must be strictly positive")]
    NonPositiveVector,
    #[error("inner linear solver broke down")]
    InnerBreakdown,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn check_iterate(v: &[f64], iteration: usize) -> Result<(), SolveError> {
    for &x in v {
        if !x.is_finite() || x <= DIVERGENCE_MIN || x >= DIVERGENCE_MAX {
            return Err(SolveError::Divergence { iteration });
        }
    }
    Ok(())
}

fn recombine(prev: &[f64], cur: &[f64], normalization: Normalization) -> Vec<f64> {
    match normalization {
        Normalization::GeometricMean => prev
            .iter()
            .zip(cur)
            .map(|(&a, &b)| (a * b).sqrt())
            .collect(),
        Normalization::FirstComponent => {
            let scale = (prev[0] / cur[0]).sqrt();
            cur.iter().map(|&b| b * scale).collect()
        }
    }
}

fn residual_unchecked(op: &LinearOperator, x: &[f64]) -> f64 {
    let ax = op.apply_unchecked(&vecops::recip(x));
    vecops::max_ratio_deviation(&ax, x)
}

/// `‖D_{x^÷} A D_{x^÷} e − e‖_∞ = ‖(A x^÷) ⊘ x − e‖_∞`; counts one matvec.
pub fn balance_residual(op: &LinearOperator, x: &[f64]) -> Result<f64, SolveError> {
    if x.len() != op.dim() {
        return Err(GraphError::DimensionMismatch {
            expected: op.dim(),
            got: x.len(),
        }
        .into());
    }
    if !vecops::all_positive(x) {
        return Err(SolveError::NonPositiveVector);
    }
    Ok(residual_unchecked(op, x))
}

/// Sinkhorn-Knopp from `x_0 = e`.
pub fn sinkhorn_knopp(op: &LinearOperator, cfg: &SolverConfig) -> Result<BalanceResult, SolveError> {
    sinkhorn_knopp_from(op, cfg, &vec![1.0; op.dim()])
}

/// Sinkhorn-Knopp from an arbitrary positive starting vector.
pub fn sinkhorn_knopp_from(
    op: &LinearOperator,
    cfg: &SolverConfig,
    x0: &[f64],
) -> Result<BalanceResult, SolveError> {
    if x0.len() != op.dim() || !vecops::all_positive(x0) {
        return Err(SolveError::NonPositiveVector);
    }
    let matvecs_before = op.matvecs();
    let mut prev = x0.to_vec();
    let mut cur = op.apply_unchecked(&vecops::recip(&prev));
    let mut outer = 1usize;
    check_iterate(&cur, outer)?;

    // The ratio test threshold tightens whenever a verification fails, so a
    // loose pair test cannot report early convergence.
    let mut pair_threshold = cfg.tol;
    let finish = |power: Vec<f64>, residual: f64, outer: usize, converged: bool| BalanceResult {
        power,
        residual,
        outer_iterations: outer,
        matvecs: op.matvecs() - matvecs_before,
        converged,
        method: SolveMethod::SinkhornKnopp,
    };

    loop {
        let next = op.apply_unchecked(&vecops::recip(&cur));
        outer += 1;
        check_iterate(&next, outer)?;
        let pair_defect = vecops::max_ratio_deviation(&next, &prev);
        prev = std::mem::replace(&mut cur, next);

        if pair_defect <= pair_threshold {
            let power = recombine(&prev, &cur, cfg.normalization);
            let residual = residual_unchecked(op, &power);
            if residual <= cfg.tol {
                return Ok(finish(power, residual, outer, true));
            }
            pair_threshold *= 0.25;
        }
        if outer >= cfg.max_outer {
            let power = recombine(&prev, &cur, cfg.normalization);
            let residual = residual_unchecked(op, &power);
            return Ok(finish(power, residual, outer, false));
        }
    }
}

/// One inexact Newton update from `x`, given `t = A x^÷`. Returns the raw
/// candidate `2 J(x)^{-1} t` without positivity safeguarding.
fn newton_step(
    op: &LinearOperator,
    x: &[f64],
    t: &[f64],
    inner_reduction: f64,
    max_inner: usize,
) -> Result<(Vec<f64>, usize), SolveError> {
    let n = op.dim();
    // Symmetrized system: with s = x^÷ and M = I + D_s A D_s, solving
    // M z = D_s (2 t) gives the Newton iterate y = x ⊙ z.
    let rhs: Vec<f64> = t.iter().zip(x).map(|(&ti, &xi)| 2.0 * ti / xi).collect();
    let apply_m = |v: &[f64]| {
        let scaled: Vec<f64> = v.iter().zip(x).map(|(&vi, &xi)| vi / xi).collect();
        let av = op.apply_unchecked(&scaled);
        (0..n).map(|i| v[i] + av[i] / x[i]).collect()
    };
    // z = e corresponds to y = x, so the initial inner residual equals the
    // scaled outer residual and the reduction factor acts as a forcing term.
    let z0 = vec![1.0; n];
    match linalg::conjugate_gradient(apply_m, &rhs, &z0, inner_reduction, max_inner) {
        Ok(out) => {
            let y = x.iter().zip(&out.solution).map(|(&xi, &zi)| xi * zi).collect();
            Ok((y, out.iterations))
        }
        Err(CgError::Breakdown) => Err(SolveError::InnerBreakdown),
    }
}

/// Inexact Newton iteration from `x_0 = e`.
pub fn newton_balance(op: &LinearOperator, cfg: &SolverConfig) -> Result<BalanceResult, SolveError> {
    let n = op.dim();
    let matvecs_before = op.matvecs();
    let mut x = vec![1.0; n];
    let mut outer = 0usize;

    loop {
        let t = op.apply_unchecked(&vecops::recip(&x));
        check_iterate(&t, outer)?;
        let residual = vecops::max_ratio_deviation(&t, &x);
        let done = residual <= cfg.tol;
        if done || outer >= cfg.max_outer {
            return Ok(BalanceResult {
                power: x,
                residual,
                outer_iterations: outer,
                matvecs: op.matvecs() - matvecs_before,
                converged: done,
                method: SolveMethod::Newton,
            });
        }
        outer += 1;

        let candidate = match newton_step(op, &x, &t, cfg.inner_reduction, cfg.max_inner) {
            Ok((y, _)) if vecops::all_finite(&y) => {
                // Halve the step until the iterate stays positive.
                let mut factor = 1.0;
                let mut safeguarded = None;
                for _ in 0..64 {
                    let trial: Vec<f64> = x
                        .iter()
                        .zip(&y)
                        .map(|(&xi, &yi)| xi + factor * (yi - xi))
                        .collect();
                    if vecops::all_positive(&trial) {
                        safeguarded = Some(trial);
                        break;
                    }
                    factor *= 0.5;
                }
                safeguarded
            }
            Ok(_) | Err(SolveError::InnerBreakdown) => None,
            Err(e) => return Err(e),
        };
        // Fallback: one Sinkhorn-Knopp sweep, reusing t = A x^÷.
        x = match candidate {
            Some(y) => y,
            None => {
                check_iterate(&t, outer)?;
                t
            }
        };
        check_iterate(&x, outer)?;
    }
}

/// The first Newton iterate started from `x_0 = (1/γ) e`, solved tightly.
/// Algebraically this equals `2γ (I + γ²A)^{-1} A e`.
pub fn newton_first_iterate(g: &Graph, gamma: f64, tol: f64) -> Result<Vec<f64>, SolveError> {
    let op = LinearOperator::new(g, Perturbation::None)?;
    let n = op.dim();
    let x0 = vec![1.0 / gamma; n];
    let t = op.apply_unchecked(&vecops::recip(&x0));
    let (y, _) = newton_step(&op, &x0, &t, tol, 20 * n + 100)?;
    Ok(y)
}

/// Builds the requested operator and runs the configured solver. With
/// `strict_existence` set and no perturbation, refuses graphs without total
/// support, where no exact solution exists.
pub fn compute_power(
    g: &Graph,
    perturbation: Perturbation,
    cfg: &SolverConfig,
) -> Result<BalanceResult, SolveError> {
    if cfg.strict_existence && perturbation == Perturbation::None {
        let (total, violating) = structure::has_total_support(g);
        if !total {
            return Err(SolveError::NoExactSolution {
                violating: violating.len(),
            });
        }
    }
    let op = LinearOperator::new(g, perturbation)?;
    match cfg.method {
        SolveMethod::SinkhornKnopp => sinkhorn_knopp(&op, cfg),
        SolveMethod::Newton => newton_balance(&op, cfg),
    }
}
