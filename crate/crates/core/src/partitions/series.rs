use super::{check_alpha, jack_c_identity, jack_table, monomial, Partition, Spectrum};
use crate::error::{Error, Result};
use num_complex::Complex64;

const REL_STOP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    /// Magnitude of the last degree's contribution.
    pub error_estimate: f64,
    pub degree: usize,
    /// True when the stopping rule fired before `max_degree`.
    pub converged: bool,
}

fn degree_term(alpha: f64, a: &[Complex64], b: &[Complex64], k: usize) -> Result<Complex64> {
    let p = a.len();
    let table = jack_table(alpha, p, k);
    let ma: Vec<Complex64> = table.parts.iter().map(|mu| monomial(mu, a)).collect();
    let mb: Vec<Complex64> = table.parts.iter().map(|mu| monomial(mu, b)).collect();
    let mut sum = Complex64::new(0.0, 0.0);
    for (ki, kappa) in table.parts.iter().enumerate() {
        let row = &table.coeff[ki];
        let (mut ca, mut cb) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for mi in ki..row.len() {
            if row[mi] != 0.0 {
                ca += ma[mi] * row[mi];
                cb += mb[mi] * row[mi];
            }
        }
        sum += ca * cb / jack_c_identity(kappa, alpha, p)?;
    }
    Ok(sum / crate::special::factorial(k))
}

/// Truncated series of 0F0^(alpha)(a, b).
pub fn f00_series(alpha: f64, a: &Spectrum, b: &Spectrum, max_degree: usize) -> Result<SeriesValue> {
    check_alpha(alpha)?;
    if a.dimension() != b.dimension() {
        return Err(Error::DimensionMismatch(a.dimension(), b.dimension()));
    }
    if max_degree == 0 {
        return Err(Error::InvalidArgument("max_degree must be at least 1".into()));
    }
    let mut value = Complex64::new(1.0, 0.0);
    let mut last = 0.0;
    let mut small_run = 0;
    for k in 1..=max_degree {
        let t = degree_term(alpha, &a.values, &b.values, k)?;
        value += t;
        last = t.norm();
        small_run = if last <= REL_STOP * value.norm() { small_run + 1 } else { 0 };
        if small_run >= 2 {
            return Ok(SeriesValue { value, error_estimate: last, degree: k, converged: true });
        }
    }
    Ok(SeriesValue { value, error_estimate: last, degree: max_degree, converged: false })
}

/// 0F0^(alpha)(a, Z) expanded as a symmetric polynomial in Z with `a` fixed.
#[derive(Debug, Clone)]
pub struct F00Polynomial {
    terms: Vec<(Partition, Complex64)>,
    pub degree: usize,
}

impl F00Polynomial {
    pub fn new(alpha: f64, a: &Spectrum, degree: usize) -> Result<Self> {
        check_alpha(alpha)?;
        let r = a.dimension();
        let mut terms = Vec::new();
        for k in 0..=degree {
            let table = jack_table(alpha, r, k);
            let kfact = crate::special::factorial(k);
            let mut d = vec![Complex64::new(0.0, 0.0); table.parts.len()];
            for (ki, kappa) in table.parts.iter().enumerate() {
                let row = &table.coeff[ki];
                let ca: Complex64 = (ki..row.len())
                    .filter(|&mi| row[mi] != 0.0)
                    .map(|mi| monomial(&table.parts[mi], &a.values) * row[mi])
                    .sum();
                let scale = ca / (kfact * jack_c_identity(kappa, alpha, r)?);
                for mi in ki..row.len() {
                    d[mi] += scale * row[mi];
                }
            }
            terms.extend(table.parts.iter().cloned().zip(d).filter(|(_, v)| v.norm() > 0.0));
        }
        Ok(Self { terms, degree })
    }

    /// Degree needed so that the tail is negligible for |z| <= radius.
    pub fn degree_for(a: &Spectrum, radius: f64) -> usize {
        let amax = a.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let x = amax * radius * a.dimension() as f64;
        let mut k = 2usize;
        let mut ln_term = 2.0 * x.max(1e-300).ln() - crate::special::ln_factorial(2);
        while (ln_term > -38.0 || (k as f64) < std::f64::consts::E * x) && k < 120 {
            k += 1;
            ln_term += x.max(1e-300).ln() - (k as f64).ln();
        }
        k
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms.iter().map(|(mu, d)| monomial(mu, z) * d).sum()
    }
}
