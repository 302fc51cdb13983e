//! Marchenko-Pastur law, its logarithmic potential and the centered linear
//! statistic Delta_p(z).

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const SUPPORT_GUARD: f64 = 1e-9;
const POTENTIAL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MPLaw {
    pub c: f64,
    pub lower: f64,
    pub upper: f64,
    pub atom: f64,
}

impl MPLaw {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("aspect ratio must be positive, got {c}")));
        }
        let s = c.sqrt();
        Ok(Self { c, lower: (1.0 - s).powi(2), upper: (1.0 + s).powi(2), atom: (1.0 - 1.0 / c).max(0.0) })
    }

    pub fn from_dims(n: usize, p: usize) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::InvalidArgument("dimensions must be positive".into()));
        }
        Self::new(p as f64 / n as f64)
    }

    pub fn density(&self, x: f64) -> f64 {
        mp_density(self, x)
    }

    fn distance_to_support(&self, z: Complex64) -> f64 {
        let dx = if z.re < self.lower {
            self.lower - z.re
        } else if z.re > self.upper {
            z.re - self.upper
        } else {
            0.0
        };
        let d = dx.hypot(z.im);
        if self.atom > 0.0 {
            d.min(z.norm())
        } else {
            d
        }
    }

    /// Midpoint rule in theta after x = a + (b - a) sin^2(theta); returns the
    /// absolutely continuous part of  integral of g(x) dF(x).
    fn bulk_integral<G: Fn(f64) -> Complex64>(&self, n: usize, g: G) -> Complex64 {
        let (a, b) = (self.lower, self.upper);
        let h = PI / n as f64;
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let th = (k as f64 + 0.5) * h;
            let (sn, cs) = th.sin_cos();
            let x = a + (b - a) * sn * sn;
            let w = (b - a).powi(2) * 2.0 * sn * sn * cs * cs / (2.0 * PI * self.c * x);
            s += g(x) * w;
        }
        s * (0.5 * h)
    }

    fn converged_bulk<G: Fn(f64) -> Complex64 + Copy>(&self, g: G) -> Result<Complex64> {
        let mut n = 64;
        let mut prev = self.bulk_integral(n, g);
        while n < (1 << 22) {
            n *= 2;
            let next = self.bulk_integral(n, g);
            let change = (next - prev).norm();
            if change <= POTENTIAL_TOL * next.norm().max(1.0) {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::NonConvergence { what: "Marchenko-Pastur quadrature".into(), change: f64::NAN, tol: POTENTIAL_TOL })
    }

    /// Total mass of the law: bulk quadrature plus atom.
    pub fn total_mass(&self) -> f64 {
        self.converged_bulk(|_| Complex64::new(1.0, 0.0)).map(|v| v.re).unwrap_or(f64::NAN) + self.atom
    }

    /// integral of (lambda - z)^{-1} dF by quadrature.
    pub fn stieltjes_quadrature(&self, z: Complex64) -> Result<Complex64> {
        self.guard(z)?;
        let bulk = self.converged_bulk(|x| 1.0 / (x - z))?;
        Ok(bulk - self.atom / z)
    }

    /// Closed-form Stieltjes transform built from the companion transform.
    pub fn stieltjes(&self, z: Complex64) -> Complex64 {
        let c = self.c;
        let u = z - c - 1.0;
        let mut s = (u * u - 4.0 * c).sqrt();
        if (s * u.conj()).re < 0.0 {
            s = -s;
        }
        let m_under = (-z + c - 1.0 + s) / (2.0 * z);
        (m_under + (1.0 - c) / z) / c
    }

    fn guard(&self, z: Complex64) -> Result<()> {
        if self.distance_to_support(z) < SUPPORT_GUARD {
            return Err(Error::TooClose(format!("{z}"), SUPPORT_GUARD));
        }
        Ok(())
    }
}

pub fn mp_density(law: &MPLaw, x: f64) -> f64 {
    if x <= law.lower || x >= law.upper || x <= 0.0 {
        return 0.0;
    }
    ((law.upper - x) * (x - law.lower)).sqrt() / (2.0 * PI * law.c * x)
}

/// integral of ln(z - lambda) dF(lambda), principal branch, atom included.
pub fn mp_log_potential(law: &MPLaw, z: Complex64) -> Result<Complex64> {
    law.guard(z)?;
    let bulk = law.converged_bulk(|x| (z - x).ln())?;
    Ok(if law.atom > 0.0 { bulk + z.ln() * law.atom } else { bulk })
}

/// Ordered eigenvalues of XX*/n together with S and T.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSample {
    pub lambda: Vec<f64>,
    pub n: usize,
    pub p: usize,
    pub s: f64,
    pub t: f64,
}

impl EigenSample {
    /// Accepts either min(n, p) eigenvalues or all p of them.
    pub fn new(mut lambda: Vec<f64>, n: usize, p: usize) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::InvalidArgument("dimensions must be positive".into()));
        }
        let m = n.min(p);
        if lambda.len() != m && lambda.len() != p {
            return Err(Error::InvalidArgument(format!(
                "expected {m} or {p} eigenvalues for n={n}, p={p}, got {}",
                lambda.len()
            )));
        }
        if let Some(bad) = lambda.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidArgument(format!("eigenvalues must be finite and non-negative, got {bad}")));
        }
        lambda.sort_by(|a, b| b.partial_cmp(a).unwrap());
        lambda.truncate(m);
        let s = lambda.iter().sum();
        let t = lambda.iter().map(|v| v * v).sum();
        Ok(Self { lambda, n, p, s, t })
    }

    pub fn m(&self) -> usize {
        self.lambda.len()
    }

    pub fn c_p(&self) -> f64 {
        self.p as f64 / self.n as f64
    }

    /// Structural zeros appended when p > n.
    pub fn zeros(&self) -> usize {
        self.p - self.lambda.len()
    }

    /// All p eigenvalues including structural zeros.
    pub fn all_eigenvalues(&self) -> Vec<f64> {
        let mut v = self.lambda.clone();
        v.resize(self.p, 0.0);
        v
    }

    /// sum over all p eigenvalues of ln(z - lambda_j).
    pub fn log_char(&self, z: Complex64) -> Result<Complex64> {
        let mut s = Complex64::new(0.0, 0.0);
        for &l in &self.lambda {
            let d = z - l;
            if d.norm() < SUPPORT_GUARD {
                return Err(Error::TooClose(format!("{z}"), SUPPORT_GUARD));
            }
            s += d.ln();
        }
        if self.zeros() > 0 {
            if z.norm() < SUPPORT_GUARD {
                return Err(Error::TooClose(format!("{z}"), SUPPORT_GUARD));
            }
            s += z.ln() * self.zeros() as f64;
        }
        Ok(s)
    }
}

/// Delta_p(z) = sum_j ln(z - lambda_j) - p * integral of ln(z - lambda) dF_p.
pub fn delta_p(sample: &EigenSample, law: &MPLaw, z: Complex64) -> Result<Complex64> {
    Ok(sample.log_char(z)? - mp_log_potential(law, z)? * sample.p as f64)
}

/// Delta_p from a precomputed log potential value.
pub fn delta_p_with(sample: &EigenSample, log_potential: Complex64, z: Complex64) -> Result<Complex64> {
    Ok(sample.log_char(z)? - log_potential * sample.p as f64)
}

/// MP quantiles F^{-1}((j - 1/2)/p), j = 1..p, of the law with ratio c = p/n.
pub fn mp_quantiles(law: &MPLaw, p: usize) -> Vec<f64> {
    let grid = 1 << 14;
    let (a, b) = (law.lower, law.upper);
    let mut cdf = Vec::with_capacity(grid + 1);
    let mut xs = Vec::with_capacity(grid + 1);
    let h = (PI / 2.0) / grid as f64;
    let mut acc = law.atom;
    xs.push(a);
    cdf.push(acc);
    for k in 0..grid {
        // Simpson on each theta cell
        let f = |th: f64| {
            let (sn, cs) = th.sin_cos();
            let x = a + (b - a) * sn * sn;
            if x <= 0.0 {
                (b - a).powi(2) * 2.0 * cs * cs / (2.0 * PI * law.c * (b - a))
            } else {
                (b - a).powi(2) * 2.0 * sn * sn * cs * cs / (2.0 * PI * law.c * x)
            }
        };
        let t0 = k as f64 * h;
        acc += h / 6.0 * (f(t0) + 4.0 * f(t0 + h / 2.0) + f(t0 + h));
        let t1 = t0 + h;
        xs.push(a + (b - a) * t1.sin().powi(2));
        cdf.push(acc);
    }
    (1..=p)
        .map(|j| {
            let target = (j as f64 - 0.5) / p as f64;
            if target <= law.atom {
                return 0.0;
            }
            let k = cdf.partition_point(|&v| v < target).clamp(1, grid);
            let (c0, c1) = (cdf[k - 1], cdf[k]);
            let w = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.0 };
            xs[k - 1] + w * (xs[k] - xs[k - 1])
        })
        .rev()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn density_values() {
        let law = MPLaw::new(1.0).unwrap();
        assert!((mp_density(&law, 2.0) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert_eq!(mp_density(&law, 5.0), 0.0);
    }

    #[test]
    fn total_mass_is_one() {
        for &cc in &[0.25, 0.5, 1.0, 2.0, 4.0] {
            let law = MPLaw::new(cc).unwrap();
            assert!((law.total_mass() - 1.0).abs() < 1e-10, "c={cc}");
        }
    }

    #[test]
    fn log_potential_reference_value() {
        let law = MPLaw::new(1.0).unwrap();
        let v = mp_log_potential(&law, c(4.5, 0.0)).unwrap();
        assert!((v.re - 1.193147).abs() < 1e-6);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn log_potential_at_infinity() {
        for &cc in &[0.5, 2.0] {
            let law = MPLaw::new(cc).unwrap();
            let z = c(1e4, 0.0);
            let v = mp_log_potential(&law, z).unwrap();
            // ln z - mean/z, mean = 1
            assert!((v - (z.ln() - 1.0 / z)).norm() < 1e-7);
        }
    }

    #[test]
    fn stieltjes_closed_form_matches_quadrature() {
        for &cc in &[0.3, 1.0, 2.5] {
            let law = MPLaw::new(cc).unwrap();
            for z in [c(8.0, 0.0), c(1.0, 1.5), c(-2.0, 0.3), c(2.0, -0.7)] {
                let q = law.stieltjes_quadrature(z).unwrap();
                let f = law.stieltjes(z);
                assert!((q - f).norm() < 1e-10, "c={cc} z={z}: {q} vs {f}");
            }
        }
    }

    #[test]
    fn derivative_is_minus_stieltjes() {
        let law = MPLaw::new(0.7).unwrap();
        let z = c(1.3, 0.8);
        let h = 1e-5;
        let d = (mp_log_potential(&law, z + h).unwrap() - mp_log_potential(&law, z - h).unwrap()) / (2.0 * h);
        assert!((d + law.stieltjes(z)).norm() < 1e-6);
    }

    #[test]
    fn rejects_support() {
        let law = MPLaw::new(0.5).unwrap();
        assert!(mp_log_potential(&law, c(1.0, 0.0)).is_err());
        let law = MPLaw::new(2.0).unwrap();
        assert!(mp_log_potential(&law, c(0.0, 1e-12)).is_err());
    }

    #[test]
    fn single_eigenvalue_delta() {
        let law = MPLaw::new(1.0).unwrap();
        let s = EigenSample::new(vec![1.0], 1, 1).unwrap();
        let z = c(5.0, 0.0);
        let d = delta_p(&s, &law, z).unwrap();
        assert!((d - (4f64.ln() - mp_log_potential(&law, z).unwrap())).norm() < 1e-14);
    }

    #[test]
    fn quantile_sample_has_small_delta() {
        let law = MPLaw::new(1.0).unwrap();
        let z = c(4.5, 0.0);
        let mut prev = f64::INFINITY;
        for &p in &[50usize, 200, 800] {
            let s = EigenSample::new(mp_quantiles(&law, p), p, p).unwrap();
            let d = delta_p(&s, &law, z).unwrap().norm();
            assert!(d < prev);
            prev = d;
        }
        assert!(prev < 0.01);
    }

    #[test]
    fn sample_validation() {
        assert!(EigenSample::new(vec![1.0, -0.1], 2, 2).is_err());
        assert!(EigenSample::new(vec![1.0], 2, 2).is_err());
        let s = EigenSample::new(vec![1.0, 3.0], 2, 4).unwrap();
        assert_eq!(s.lambda, vec![3.0, 1.0]);
        assert_eq!(s.zeros(), 2);
        assert_eq!(s.t, 10.0);
    }
}
