use super::{check_alpha, enumerate_partitions, jack_c, FerrersStats, Partition, Spectrum};
use crate::error::{Error, Result};
use crate::special::{factorial, ln_gamma};
use num_complex::Complex64;
use std::f64::consts::PI;

const MAX_GRID_POINTS: usize = 1 << 22;

fn beta_of(alpha: f64) -> Result<u32> {
    check_alpha(alpha)?;
    let beta = 2.0 / alpha;
    let rounded = beta.round();
    if rounded < 1.0 || (beta - rounded).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("alpha={alpha} is not 2/beta for integer beta")));
    }
    Ok(rounded as u32)
}

/// Closed-form value of <C_kappa, C_kappa> for the torus scalar product in r variables.
pub fn torus_norm_closed_form(kappa: &Partition, alpha: f64, r: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if kappa.length() > r {
        return Ok(0.0);
    }
    let k = kappa.weight() as f64;
    let st = FerrersStats::new(kappa, alpha);
    let mut ln = 2.0 * (k * alpha.ln() + ln_gamma(k + 1.0)) - st.w.ln();
    for j in 1..=r {
        let rj = (r - j) as f64;
        ln += ln_gamma((rj + 1.0) / alpha) - ln_gamma(1.0 / alpha) - ln_gamma(1.0 + rj / alpha);
    }
    for cell in &st.cells {
        let (ap, lp) = (cell.coarm as f64, cell.coleg as f64);
        ln += (r as f64 + ap * alpha - lp).ln() - (r as f64 + (ap + 1.0) * alpha - lp - 1.0).ln();
    }
    Ok(ln.exp())
}

fn grid_mean(kappa: &Partition, tau: &Partition, alpha: f64, r: usize, dims: usize, n: usize) -> Result<Complex64> {
    let inv_alpha = 1.0 / alpha;
    let total = n.pow(dims as u32);
    let mut z = vec![Complex64::new(1.0, 0.0); r];
    let mut sum = Complex64::new(0.0, 0.0);
    for idx in 0..total {
        let mut rem = idx;
        for zi in z.iter_mut().take(dims) {
            *zi = Complex64::from_polar(1.0, 2.0 * PI * (rem % n) as f64 / n as f64);
            rem /= n;
        }
        let mut weight = Complex64::new(1.0, 0.0);
        for i in 0..r {
            for j in i + 1..r {
                let pair = (Complex64::new(1.0, 0.0) - z[i] / z[j]) * (Complex64::new(1.0, 0.0) - z[j] / z[i]);
                weight *= if pair.norm() == 0.0 { Complex64::new(0.0, 0.0) } else { pair.powf(inv_alpha) };
            }
        }
        if weight.norm() == 0.0 {
            continue;
        }
        let zc: Vec<Complex64> = z.iter().map(|v| v.conj()).collect();
        let f = jack_c(kappa, alpha, &Spectrum::new(z.clone()))?;
        let g = jack_c(tau, alpha, &Spectrum::new(zc))?;
        sum += f * g * weight;
    }
    Ok(sum / total as f64)
}

/// Torus scalar product of C_kappa and C_tau in r variables by trapezoid
/// quadrature with Richardson extrapolation in h^2.
pub fn torus_inner_product(
    kappa: &Partition,
    tau: &Partition,
    alpha: f64,
    r: usize,
    nodes: usize,
    tol: f64,
) -> Result<Complex64> {
    beta_of(alpha)?;
    if r < kappa.length().max(tau.length()) || r == 0 {
        return Err(Error::InvalidArgument(format!("r={r} shorter than the partitions")));
    }
    if nodes < 2 {
        return Err(Error::InvalidArgument("nodes must be at least 2".into()));
    }
    // equal degrees make the integrand invariant under a common rotation
    let dims = if kappa.weight() == tau.weight() { r - 1 } else { r };
    let norm = factorial(r);
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    let mut n = nodes;
    let mut last_change = f64::INFINITY;
    loop {
        if n.pow(dims as u32) > MAX_GRID_POINTS {
            return Err(Error::NonConvergence { what: "torus quadrature".into(), change: last_change, tol });
        }
        let t = grid_mean(kappa, tau, alpha, r, dims, n)? / norm;
        let mut row = vec![t];
        if let Some(prev) = rows.last() {
            for j in 1..=prev.len() {
                let f = 4f64.powi(j as i32);
                let v = row[j - 1] + (row[j - 1] - prev[j - 1]) / (f - 1.0);
                row.push(v);
            }
            let best = *row.last().unwrap();
            last_change = (best - prev.last().unwrap()).norm();
            if last_change <= tol * best.norm().max(1.0) {
                return Ok(best);
            }
        }
        rows.push(row);
        n *= 2;
    }
}

/// Both sides of the Cauchy-type generating identity
/// prod_j prod_s (1 - b_s z_j)^(-1/alpha) = sum_kappa w/(alpha^k k!)^2 C_kappa(B) C_kappa(Z).
pub fn torus_generating_sides(alpha: f64, b: &Spectrum, z: &Spectrum, max_degree: usize) -> Result<(Complex64, Complex64)> {
    check_alpha(alpha)?;
    let mut lhs = Complex64::new(1.0, 0.0);
    for zj in &z.values {
        for bs in &b.values {
            lhs *= (Complex64::new(1.0, 0.0) - bs * zj).powf(-1.0 / alpha);
        }
    }
    let len = b.dimension().min(z.dimension());
    let mut rhs = Complex64::new(0.0, 0.0);
    for k in 0..=max_degree {
        let scale = (alpha.powi(k as i32) * factorial(k)).powi(2);
        for kappa in enumerate_partitions(k, len) {
            let w = FerrersStats::new(&kappa, alpha).w;
            rhs += jack_c(&kappa, alpha, b)? * jack_c(&kappa, alpha, z)? * (w / scale);
        }
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(v: &[usize]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn empty_partition_gives_dyson_constant() {
        // (1/r!) Gamma(1 + r/alpha) / Gamma(1 + 1/alpha)^r
        for &(alpha, r) in &[(1.0, 2usize), (2.0, 2), (2.0, 3), (0.5, 3)] {
            let dyson = (ln_gamma(1.0 + r as f64 / alpha) - r as f64 * ln_gamma(1.0 + 1.0 / alpha)).exp() / factorial(r);
            let v = torus_norm_closed_form(&part(&[]), alpha, r).unwrap();
            assert!((v - dyson).abs() < 1e-12 * dyson);
        }
    }

    #[test]
    fn orthogonal_different_degrees() {
        let v = torus_inner_product(&part(&[1]), &part(&[2]), 1.0, 2, 8, 1e-12).unwrap();
        assert!(v.norm() < 1e-8);
    }

    #[test]
    fn diagonal_alpha_one() {
        let k = part(&[1]);
        let v = torus_inner_product(&k, &k, 1.0, 2, 8, 1e-12).unwrap();
        let want = torus_norm_closed_form(&k, 1.0, 2).unwrap();
        assert!((v.re - want).abs() < 1e-6, "{v} vs {want}");
    }

    #[test]
    fn orthogonal_alpha_two_same_degree() {
        let v = torus_inner_product(&part(&[2]), &part(&[1, 1]), 2.0, 3, 16, 1e-9).unwrap();
        assert!(v.norm() < 1e-6, "{v}");
    }

    #[test]
    fn rejects_non_integer_beta() {
        assert!(torus_inner_product(&part(&[1]), &part(&[1]), 0.8, 2, 8, 1e-9).is_err());
    }

    #[test]
    fn generating_identity() {
        for &alpha in &[0.5, 1.0, 2.0] {
            let b = Spectrum::from_real(&[0.2, -0.1, 0.15]);
            let z = Spectrum::new(vec![Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.25)]);
            let (l, r) = torus_generating_sides(alpha, &b, &z, 18).unwrap();
            assert!((l - r).norm() < 1e-10 * l.norm(), "alpha={alpha}: {l} {r}");
        }
    }
}
