//! Conjugate gradient for the symmetric positive definite systems that back
//! the Newton inner solves and the Bonacich index.

use crate::vecops;

#[derive(Debug)]
pub struct CgOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, PartialEq)]
pub enum CgError {
    /// Encountered a non-positive curvature direction or non-finite values:
    /// the operator is not positive definite on the Krylov space.
    Breakdown,
}

/// Solves `M x = b` for symmetric positive definite `M`, stopping once the
/// residual 2-norm drops below `rel_reduction` times the initial residual.
/// Each call of `apply` is one operator application (the caller's matvec
/// accounting happens inside `apply`).
pub fn conjugate_gradient<F>(
    apply: F,
    b: &[f64],
    x0: &[f64],
    rel_reduction: f64,
    max_iter: usize,
) -> Result<CgOutcome, CgError>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let mut x = x0.to_vec();
    let mx0 = apply(&x);
    let mut r: Vec<f64> = b.iter().zip(&mx0).map(|(bi, mi)| bi - mi).collect();
    let mut rs = vecops::dot(&r, &r);
    let target = rel_reduction * rs.sqrt();
    if !rs.is_finite() {
        return Err(CgError::Breakdown);
    }
    if rs.sqrt() <= target || rs == 0.0 {
        return Ok(CgOutcome {
            solution: x,
            iterations: 0,
            converged: true,
        });
    }

    let mut p = r.clone();
    for iteration in 1..=max_iter {
        let mp = apply(&p);
        let pmp = vecops::dot(&p, &mp);
        if !(pmp.is_finite() && pmp > 0.0) {
            return Err(CgError::Breakdown);
        }
        let step = rs / pmp;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * mp[i];
        }
        let rs_next = vecops::dot(&r, &r);
        if !rs_next.is_finite() {
            return Err(CgError::Breakdown);
        }
        if rs_next.sqrt() <= target {
            return Ok(CgOutcome {
                solution: x,
                iterations: iteration,
                converged: true,
            });
        }
        let beta = rs_next / rs;
        rs = rs_next;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Ok(CgOutcome {
        solution: x,
        iterations: max_iter,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_spd_system() {
        // M = [[4,1],[1,3]], b = [1,2]
        let apply = |v: &[f64]| vec![4.0 * v[0] + v[1], v[0] + 3.0 * v[1]];
        let out = conjugate_gradient(apply, &[1.0, 2.0], &[0.0, 0.0], 1e-12, 50).unwrap();
        assert!(out.converged);
        assert!((out.solution[0] - 1.0 / 11.0).abs() < 1e-10);
        assert!((out.solution[1] - 7.0 / 11.0).abs() < 1e-10);
    }

    #[test]
    fn identity_system_converges_immediately() {
        let apply = |v: &[f64]| v.to_vec();
        let b = vec![3.0, -1.0, 2.0];
        let out = conjugate_gradient(apply, &b, &[0.0; 3], 1e-10, 10).unwrap();
        assert!(out.converged);
        assert_eq!(out.solution, b);
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn indefinite_system_breaks_down() {
        let apply = |v: &[f64]| vec![-v[0], -v[1]];
        let err = conjugate_gradient(apply, &[1.0, 1.0], &[0.0, 0.0], 1e-10, 10).unwrap_err();
        assert_eq!(err, CgError::Breakdown);
    }
}
