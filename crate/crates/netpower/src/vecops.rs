//! Small dense-vector helpers shared by the iterative solvers.

/// Entry-wise reciprocal `x^÷`.
pub fn recip(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| 1.0 / x).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// `max_i |a_i - b_i|`.
pub fn linf_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `max_i |a_i / b_i - 1|`; callers guarantee `b` is strictly positive.
pub fn max_ratio_deviation(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x / y - 1.0).abs())
        .fold(0.0, f64::max)
}

pub fn all_positive(v: &[f64]) -> bool {
    v.iter().all(|&x| x > 0.0)
}

pub fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|&x| x.is_finite())
}
