//! Scalar special functions and small dense helpers.

use num_complex::Complex64;
use statrs::distribution::{ContinuousCDF, Normal};

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn ln_factorial(k: usize) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * j as f64)
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn norm_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Determinant of a small complex matrix given row-major.
pub fn det_complex(n: usize, entries: &[Complex64]) -> Complex64 {
    assert_eq!(entries.len(), n * n);
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let m = faer::Mat::<Complex64>::from_fn(n, n, |i, j| entries[i * n + j]);
    m.determinant()
}

/// Vandermonde product over j > i of (x_j - x_i).
pub fn vandermonde(x: &[Complex64]) -> Complex64 {
    let mut v = Complex64::new(1.0, 0.0);
    for j in 0..x.len() {
        for i in 0..j {
            v *= x[j] - x[i];
        }
    }
    v
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// All permutations of 0..n in lexicographic order with their signs.
pub fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out.into_iter()
        .map(|p| {
            let mut inv = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if p[i] > p[j] {
                        inv += 1;
                    }
                }
            }
            let s = if inv % 2 == 0 { 1.0 } else { -1.0 };
            (p, s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_quantile_roundtrip() {
        for &p in &[0.01, 0.05, 0.5, 0.95, 0.999] {
            let err = (norm_cdf(norm_quantile(p)) - p).abs();
            assert!(err < 1e-10, "p={p} err={err:e}");
        }
        assert!((norm_quantile(0.95) - 1.6448536269514722).abs() < 1e-9);
    }

    #[test]
    fn det_and_vandermonde() {
        let c = |x: f64| Complex64::new(x, 0.0);
        let d = det_complex(2, &[c(1.0), c(2.0), c(3.0), c(4.0)]);
        assert!((d - c(-2.0)).norm() < 1e-14);
        let v = vandermonde(&[c(1.0), c(2.0), c(4.0)]);
        assert!((v - c(6.0)).norm() < 1e-14);
    }

    #[test]
    fn permutation_signs() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p.iter().map(|x| x.1).sum::<f64>(), 0.0);
        assert_eq!(p[1], (vec![0, 2, 1], -1.0));
    }
}
