use super::{check_alpha, enumerate_partitions, FerrersStats, Partition, Spectrum};
use crate::error::Result;
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

/// Monomial coefficients of every C_kappa with |kappa| = k and length <= p.
#[derive(Debug)]
pub struct JackTable {
    pub alpha: f64,
    pub p: usize,
    pub k: usize,
    pub parts: Vec<Partition>,
    index: HashMap<Vec<usize>, usize>,
    /// coeff[kappa][mu]: coefficient of m_mu in C_kappa.
    pub coeff: Vec<Vec<f64>>,
}

impl JackTable {
    pub fn index_of(&self, kappa: &Partition) -> Option<usize> {
        self.index.get(kappa.parts()).copied()
    }

    fn build(alpha: f64, p: usize, k: usize) -> Self {
        let parts = enumerate_partitions(k, p);
        let index: HashMap<Vec<usize>, usize> =
            parts.iter().enumerate().map(|(i, q)| (q.parts().to_vec(), i)).collect();
        let n = parts.len();
        let rho: Vec<f64> = parts.iter().map(|q| rho(q, alpha)).collect();
        // raising moves of each mu, as (target index, weight)
        let moves: Vec<Vec<(usize, f64)>> = parts
            .iter()
            .map(|mu| {
                let m = mu.parts();
                let mut out = Vec::new();
                for i in 0..m.len() {
                    for j in i + 1..m.len() {
                        for t in 1..=m[j] {
                            let mut lam = m.to_vec();
                            lam[i] += t;
                            lam[j] -= t;
                            lam.sort_unstable_by(|a, b| b.cmp(a));
                            while lam.last() == Some(&0) {
                                lam.pop();
                            }
                            let w = (m[i] as f64 - m[j] as f64 + 2.0 * t as f64) * 2.0 / alpha;
                            out.push((index[&lam], w));
                        }
                    }
                }
                out
            })
            .collect();
        let ln_kfact = crate::special::ln_factorial(k);
        let mut coeff = vec![vec![0.0; n]; n];
        for ki in 0..n {
            let row = &mut coeff[ki];
            row[ki] = 1.0;
            for mi in ki + 1..n {
                if !dominates(&parts[ki], &parts[mi]) {
                    continue;
                }
                let acc: f64 = moves[mi].iter().map(|&(li, w)| w * row[li]).sum();
                row[mi] = acc / (rho[ki] - rho[mi]);
            }
            let st = FerrersStats::new(&parts[ki], alpha);
            let scale = (k as f64 * alpha.ln() + ln_kfact - st.c_prime.ln()).exp();
            row.iter_mut().for_each(|v| *v *= scale);
        }
        Self { alpha, p, k, parts, index, coeff }
    }
}

fn rho(q: &Partition, alpha: f64) -> f64 {
    q.parts()
        .iter()
        .enumerate()
        .map(|(i, &m)| m as f64 * (m as f64 - 1.0 - 2.0 / alpha * i as f64))
        .sum()
}

fn dominates(a: &Partition, b: &Partition) -> bool {
    let (mut sa, mut sb) = (0usize, 0usize);
    for i in 0..a.length().max(b.length()) {
        sa += a.parts().get(i).copied().unwrap_or(0);
        sb += b.parts().get(i).copied().unwrap_or(0);
        if sa < sb {
            return false;
        }
    }
    true
}

type Key = (u64, usize, usize);

fn cache() -> &'static RwLock<HashMap<Key, Arc<JackTable>>> {
    static CACHE: OnceLock<RwLock<HashMap<Key, Arc<JackTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Memoized coefficient table for (alpha, p, k).
pub fn jack_table(alpha: f64, p: usize, k: usize) -> Arc<JackTable> {
    let key = (alpha.to_bits(), p, k);
    if let Some(t) = cache().read().unwrap().get(&key) {
        return t.clone();
    }
    let table = Arc::new(JackTable::build(alpha, p, k));
    cache().write().unwrap().entry(key).or_insert(table).clone()
}

/// Monomial symmetric function m_mu evaluated at x.
pub fn monomial(mu: &Partition, x: &[Complex64]) -> Complex64 {
    let p = x.len();
    if mu.length() > p {
        return Complex64::new(0.0, 0.0);
    }
    let mut exps: Vec<(usize, usize)> = Vec::new();
    for &e in mu.parts() {
        match exps.last_mut() {
            Some((v, c)) if *v == e => *c += 1,
            _ => exps.push((e, 1)),
        }
    }
    if p > mu.length() {
        exps.push((0, p - mu.length()));
    }
    fn rec(pos: usize, x: &[Complex64], exps: &mut [(usize, usize)], acc: Complex64) -> Complex64 {
        if pos == x.len() {
            return acc;
        }
        let mut total = Complex64::new(0.0, 0.0);
        for idx in 0..exps.len() {
            if exps[idx].1 == 0 {
                continue;
            }
            let e = exps[idx].0;
            exps[idx].1 -= 1;
            total += rec(pos + 1, x, exps, acc * x[pos].powu(e as u32));
            exps[idx].1 += 1;
        }
        total
    }
    rec(0, x, &mut exps, Complex64::new(1.0, 0.0))
}

/// C_kappa^(alpha)(x); zero when the partition is longer than x.
pub fn jack_c(kappa: &Partition, alpha: f64, x: &Spectrum) -> Result<Complex64> {
    check_alpha(alpha)?;
    let p = x.dimension();
    if kappa.length() > p {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let table = jack_table(alpha, p, kappa.weight());
    let ki = table.index_of(kappa).expect("partition present in its own table");
    let row = &table.coeff[ki];
    Ok(table
        .parts
        .iter()
        .enumerate()
        .skip(ki)
        .filter(|(mi, _)| row[*mi] != 0.0)
        .map(|(mi, mu)| monomial(mu, &x.values) * row[mi])
        .sum())
}

/// C_kappa^(alpha)(I_m) in closed form.
pub fn jack_c_identity(kappa: &Partition, alpha: f64, m: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if kappa.length() > m {
        return Ok(0.0);
    }
    let k = kappa.weight();
    let st = FerrersStats::new(kappa, alpha);
    let mut ln = k as f64 * alpha.ln() + crate::special::ln_factorial(k) - st.w.ln();
    for cell in &st.cells {
        ln += (m as f64 + alpha * cell.coarm as f64 - cell.coleg as f64).ln();
    }
    Ok(ln.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(v: &[usize]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn degree_one_is_trace() {
        let v = jack_c(&part(&[1]), 1.0, &Spectrum::from_real(&[2.0, 3.0])).unwrap();
        assert!((v.re - 5.0).abs() < 1e-14);
    }

    #[test]
    fn identity_closed_form() {
        assert!((jack_c_identity(&part(&[1]), 1.0, 7).unwrap() - 7.0).abs() < 1e-12);
        assert_eq!(jack_c_identity(&part(&[1, 1, 1]), 1.0, 2).unwrap(), 0.0);
        let k = part(&[2, 1]);
        let direct = jack_c(&k, 1.0, &Spectrum::identity(3)).unwrap().re;
        assert!((direct - jack_c_identity(&k, 1.0, 3).unwrap()).abs() < 1e-10 * direct);
        let k = part(&[2]);
        let direct = jack_c(&k, 2.0, &Spectrum::identity(3)).unwrap().re;
        assert!((direct - jack_c_identity(&k, 2.0, 3).unwrap()).abs() < 1e-10 * direct);
    }

    #[test]
    fn degree_two_sum_at_alpha_two() {
        let x = Spectrum::from_real(&[0.4, 0.7]);
        let s = jack_c(&part(&[2]), 2.0, &x).unwrap() + jack_c(&part(&[1, 1]), 2.0, &x).unwrap();
        assert!((s.re - 1.21).abs() < 1e-14);
    }

    #[test]
    fn zonal_degree_two_known_values() {
        // C_[2]^(2) = m_2 + (2/3) m_11, C_[11]^(2) = (4/3) m_11
        let t = jack_table(2.0, 2, 2);
        assert!((t.coeff[0][0] - 1.0).abs() < 1e-14);
        assert!((t.coeff[0][1] - 2.0 / 3.0).abs() < 1e-14);
        assert!((t.coeff[1][1] - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn monomial_counts_distinct_permutations() {
        let one = vec![Complex64::new(1.0, 0.0); 4];
        assert_eq!(monomial(&part(&[2, 1]), &one).re, 12.0);
        assert_eq!(monomial(&part(&[1, 1]), &one).re, 6.0);
        assert_eq!(monomial(&part(&[]), &one).re, 1.0);
    }

    /// At alpha = 1, C_kappa = (k!/H_kappa) s_kappa with s the Schur polynomial.
    #[test]
    fn schur_oracle_at_alpha_one() {
        let x = [0.3, -0.7, 1.1, 0.45];
        let xs = Spectrum::from_real(&x);
        for k in 1..=6 {
            for kappa in enumerate_partitions(k, 4) {
                let lam: Vec<usize> = (0..4).map(|i| kappa.parts().get(i).copied().unwrap_or(0)).collect();
                let num: Vec<Complex64> = (0..4)
                    .flat_map(|i| (0..4).map(move |j| (i, j)))
                    .map(|(i, j)| Complex64::new(x[j].powi((lam[i] + 3 - i) as i32), 0.0))
                    .collect();
                let den: Vec<Complex64> = (0..4)
                    .flat_map(|i| (0..4).map(move |j| (i, j)))
                    .map(|(i, j)| Complex64::new(x[j].powi((3 - i) as i32), 0.0))
                    .collect();
                let schur = crate::special::det_complex(4, &num) / crate::special::det_complex(4, &den);
                let hooks = FerrersStats::new(&kappa, 1.0).c;
                let expected = schur * crate::special::factorial(k) / hooks;
                let got = jack_c(&kappa, 1.0, &xs).unwrap();
                assert!((got - expected).norm() < 1e-10 * (1.0 + expected.norm()), "{kappa}");
            }
        }
    }
}
