//! Likelihood ratios of the spiked alternative against the null, based on
//! the eigenvalues (lambda variant) or the trace-normalized eigenvalues (mu variant).

mod exact;

pub use exact::{lr_exact, lr_lambda_exact, lr_mu_exact, permutation_sum_identity, ContourChoice, ExactOptions};

use crate::error::{Error, Result};
use crate::hciz::{haar_mc, McEstimate};
use crate::mp::{delta_p, delta_p_with, mp_log_potential, EigenSample, MPLaw};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Lambda,
    Mu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactContour,
    LaplaceAsymptotic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LRResult {
    pub log_lr: f64,
    pub variant: Variant,
    pub method: Method,
    /// Quadrature error on log L for exact results; NaN for Laplace results.
    pub error_estimate: f64,
    /// Present on Laplace results: the approximation error is O(1/n).
    pub order_flag: Option<String>,
    pub h: Vec<f64>,
    pub c_p: f64,
    pub n: usize,
    pub p: usize,
    /// Spikes were perturbed to separate coincident values.
    pub jittered: bool,
}

/// Saddle point of f_i and the Taylor coefficients f_i0, f_i2 there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleData {
    pub h: f64,
    pub c_p: f64,
    pub z0: f64,
    pub f0: f64,
    pub f2: f64,
}

pub fn check_subcritical(h: &[f64], c: f64, allow_zero: bool) -> Result<()> {
    let threshold = c.sqrt();
    for &x in h {
        if !x.is_finite() || x < 0.0 || (!allow_zero && x == 0.0) {
            return Err(Error::InvalidArgument(format!("spike must be positive, got {x}")));
        }
        if x >= threshold {
            return Err(Error::SuperCritical { h: x, threshold });
        }
    }
    Ok(())
}

pub fn saddle(h: f64, c_p: f64) -> Result<SaddleData> {
    if !(c_p > 0.0) {
        return Err(Error::InvalidArgument("c_p must be positive".into()));
    }
    check_subcritical(&[h], c_p, false)?;
    let z0 = (1.0 + h) * (c_p + h) / h;
    let f0 = -c_p - (1.0 - c_p) * (1.0 + h).ln() + c_p * (c_p / h).ln();
    let f2 = -h * h / (2.0 * (1.0 + h).powi(2) * (c_p - h * h));
    Ok(SaddleData { h, c_p, z0, f0, f2 })
}

fn theta(h: f64) -> f64 {
    h / (1.0 + h)
}

/// f_i(z) = -(h z/(1+h) - c_p * integral of ln(z - lambda) dF_p).
pub fn f_i(z: Complex64, h: f64, law: &MPLaw) -> Result<Complex64> {
    Ok(-(z * theta(h) - mp_log_potential(law, z)? * law.c))
}

/// g_j(z) = z^(j-1) exp(-Delta_p(z)), j >= 1.
pub fn g_j(z: Complex64, j: usize, sample: &EigenSample, law: &MPLaw) -> Result<Complex64> {
    if j == 0 {
        return Err(Error::InvalidArgument("j starts at 1".into()));
    }
    Ok(z.powi(j as i32 - 1) * (-delta_p(sample, law, z)?).exp())
}

/// ln q_rho(z); the large negative power is kept in log form.
pub fn q_rho_ln(z: &[Complex64], rho: &[usize], h: &[f64], sample: &EigenSample) -> Result<Complex64> {
    let r = h.len();
    if z.len() != r || rho.len() != r {
        return Err(Error::DimensionMismatch(z.len(), r));
    }
    let bound = sample.s / h.iter().map(|&x| theta(x)).sum::<f64>();
    if let Some(zj) = z.iter().find(|zj| zj.re >= bound) {
        return Err(Error::HalfPlane { re: zj.re, bound });
    }
    let (n, p) = (sample.n as f64, sample.p as f64);
    let power = p * (n - r as f64) + (r * (r + 1)) as f64 / 2.0;
    let mut lin = Complex64::new(0.0, 0.0);
    let mut ex = Complex64::new(0.0, 0.0);
    for (zj, &k) in z.iter().zip(rho) {
        lin += zj * theta(h[k]);
        ex += zj * (n * theta(h[k]));
    }
    Ok(-(Complex64::new(1.0, 0.0) - lin / sample.s).ln() * power - ex)
}

pub fn q_rho(z: &[Complex64], rho: &[usize], h: &[f64], sample: &EigenSample) -> Result<Complex64> {
    Ok(q_rho_ln(z, rho, h, sample)?.exp())
}

fn law_for(sample: &EigenSample, law: &MPLaw) -> Result<()> {
    if (law.c - sample.c_p()).abs() > 1e-12 * law.c {
        return Err(Error::InvalidArgument(format!("law ratio {} differs from p/n = {}", law.c, sample.c_p())));
    }
    Ok(())
}

/// Leading Laplace approximation to ln of (1/2 pi i) times the integral of e^{-n f_i} g_j over K_i.
/// The square root of f_i2 < 0 is taken as -i |f_i2|^{1/2}.
pub fn laplace_entry_ln(h: f64, j: usize, sample: &EigenSample, law: &MPLaw) -> Result<Complex64> {
    let sd = saddle(h, law.c)?;
    let z0 = Complex64::new(sd.z0, 0.0);
    let root_f2 = Complex64::new(0.0, -1.0) * (-sd.f2).sqrt();
    let g = g_j(z0, j, sample, law)?;
    let amp = g * PI.sqrt() / (root_f2 * (sample.n as f64).sqrt()) / Complex64::new(0.0, 2.0 * PI);
    Ok(amp.ln() - sd.f0 * sample.n as f64)
}

fn real_delta(sample: &EigenSample, law: &MPLaw, z0: f64, lp: Option<Complex64>) -> Result<f64> {
    if z0 <= sample.lambda.first().copied().unwrap_or(0.0) + 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "saddle {z0} does not lie to the right of the largest eigenvalue {}",
            sample.lambda[0]
        )));
    }
    let z = Complex64::new(z0, 0.0);
    let d = match lp {
        Some(v) => delta_p_with(sample, v, z)?,
        None => delta_p(sample, law, z)?,
    };
    Ok(d.re)
}

fn laplace_impl(h: &[f64], sample: &EigenSample, law: &MPLaw, variant: Variant, lp: Option<&[Complex64]>) -> Result<LRResult> {
    law_for(sample, law)?;
    let c = law.c;
    check_subcritical(h, c, true)?;
    let mut log_lr = 0.0;
    for (i, &hi) in h.iter().enumerate() {
        if hi > 0.0 {
            let z0 = (1.0 + hi) * (c + hi) / hi;
            log_lr -= real_delta(sample, law, z0, lp.map(|v| v[i]))?;
        }
    }
    log_lr += deterministic_part(h, c, variant);
    if variant == Variant::Mu {
        log_lr -= (sample.s - sample.p as f64) / c * h.iter().sum::<f64>();
    }
    Ok(LRResult {
        log_lr,
        variant,
        method: Method::LaplaceAsymptotic,
        error_estimate: f64::NAN,
        order_flag: Some("O(1/n)".into()),
        h: h.to_vec(),
        c_p: c,
        n: sample.n,
        p: sample.p,
        jittered: false,
    })
}

/// 1/2 sum_{i,j} of ln(1 - h_i h_j/c), plus h_i h_j/c for the mu variant.
pub fn deterministic_part(h: &[f64], c: f64, variant: Variant) -> f64 {
    let mut s = 0.0;
    for &a in h {
        for &b in h {
            let x = a * b / c;
            s += (1.0 - x).ln() + if variant == Variant::Mu { x } else { 0.0 };
        }
    }
    0.5 * s
}

pub fn lr_lambda_laplace(h: &[f64], sample: &EigenSample, law: &MPLaw) -> Result<LRResult> {
    laplace_impl(h, sample, law, Variant::Lambda, None)
}

pub fn lr_mu_laplace(h: &[f64], sample: &EigenSample, law: &MPLaw) -> Result<LRResult> {
    laplace_impl(h, sample, law, Variant::Mu, None)
}

pub fn lr_laplace(h: &[f64], sample: &EigenSample, law: &MPLaw, variant: Variant) -> Result<LRResult> {
    laplace_impl(h, sample, law, variant, None)
}

/// Laplace log-LR for many samples sharing one law: the log potential at
/// each saddle is computed once.
#[derive(Debug, Clone)]
pub struct LaplaceTable {
    pub law: MPLaw,
    pub h: Vec<f64>,
    pub z0: Vec<f64>,
    log_potential: Vec<Complex64>,
}

impl LaplaceTable {
    /// Table over the scalar spikes `h`; zero entries are allowed.
    pub fn new(law: MPLaw, h: &[f64]) -> Result<Self> {
        check_subcritical(h, law.c, true)?;
        let mut z0 = Vec::with_capacity(h.len());
        let mut log_potential = Vec::with_capacity(h.len());
        for &x in h {
            if x == 0.0 {
                z0.push(f64::INFINITY);
                log_potential.push(Complex64::new(0.0, 0.0));
            } else {
                let z = (1.0 + x) * (law.c + x) / x;
                z0.push(z);
                log_potential.push(mp_log_potential(&law, Complex64::new(z, 0.0))?);
            }
        }
        Ok(Self { law, h: h.to_vec(), z0, log_potential })
    }

    /// Delta_p at the saddle of entry k; None when the saddle is not right of lambda_1.
    pub fn delta(&self, sample: &EigenSample, k: usize) -> Option<f64> {
        if self.h[k] == 0.0 {
            return Some(0.0);
        }
        real_delta(sample, &self.law, self.z0[k], Some(self.log_potential[k])).ok()
    }

    /// Laplace log-LR at the spike vector formed from table indices.
    pub fn log_lr(&self, sample: &EigenSample, idx: &[usize], variant: Variant) -> Result<f64> {
        let h: Vec<f64> = idx.iter().map(|&k| self.h[k]).collect();
        let lp: Vec<Complex64> = idx.iter().map(|&k| self.log_potential[k]).collect();
        Ok(laplace_impl(&h, sample, &self.law, variant, Some(&lp))?.log_lr)
    }
}

/// Mean of the limiting log-LR process at h and its covariance between h and h_tilde.
pub fn limit_process_moments(h: &[f64], h_tilde: &[f64], c: f64, variant: Variant) -> Result<(f64, f64)> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument("c must be positive".into()));
    }
    check_subcritical(h, c, true)?;
    check_subcritical(h_tilde, c, true)?;
    let mean = deterministic_part(h, c, variant);
    let mut cov = 0.0;
    for &a in h {
        for &b in h_tilde {
            let x = a * b / c;
            cov -= (1.0 - x).ln() + if variant == Variant::Mu { x } else { 0.0 };
        }
    }
    Ok((mean, cov))
}

/// Group-integral Monte Carlo estimate of L(h; .) (not its logarithm), drawing
/// the r columns of a Haar unitary that meet the nonzero block of the spike matrix.
pub fn lr_monte_carlo(h: &[f64], sample: &EigenSample, variant: Variant, draws: usize, seed: u64) -> Result<McEstimate> {
    let (n, p) = (sample.n, sample.p);
    let r = h.len();
    if r == 0 || r > p {
        return Err(Error::InvalidArgument("need 1 <= r <= p".into()));
    }
    let lam = sample.all_eigenvalues();
    let th: Vec<f64> = h.iter().map(|&x| theta(x)).collect();
    let ln_det: f64 = -(n as f64) * h.iter().map(|x| (1.0 + x).ln()).sum::<f64>();
    let s = sample.s;
    let np = (n * p) as f64;
    let quad = |u: &[Complex64]| -> f64 {
        let mut t = 0.0;
        for (i, ti) in th.iter().enumerate() {
            let col = &u[i * p..(i + 1) * p];
            t += ti * col.iter().zip(&lam).map(|(x, l)| l * x.norm_sqr()).sum::<f64>();
        }
        t
    };
    let est = match variant {
        Variant::Lambda => haar_mc(p, r, draws, seed, |u| Complex64::new((n as f64 * quad(u) + ln_det).exp(), 0.0)),
        Variant::Mu => haar_mc(p, r, draws, seed, |u| Complex64::new((-np * (1.0 - quad(u) / s).ln() + ln_det).exp(), 0.0)),
    };
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mp::mp_quantiles;

    #[test]
    fn saddle_closed_forms() {
        let s = saddle(0.5, 1.0).unwrap();
        assert!((s.z0 - 4.5).abs() < 1e-15);
        assert!((s.f0 - (-1.0 + 2f64.ln())).abs() < 1e-12);
        assert!((s.f2 + 0.25 / 3.375).abs() < 1e-12);
        assert!(saddle(1.0, 1.0).is_err());
        assert!(saddle(0.0, 1.0).is_err());
        assert!(saddle(1.0 - 1e-9, 1.0).unwrap().f2 < -1e6);
    }

    #[test]
    fn f_at_saddle_and_stationarity() {
        for &(h, c) in &[(0.5, 1.0), (0.3, 0.5), (0.9, 2.0)] {
            let law = MPLaw::new(c).unwrap();
            let s = saddle(h, c).unwrap();
            let z = Complex64::new(s.z0, 0.0);
            let f = f_i(z, h, &law).unwrap();
            assert!((f.re - s.f0).abs() < 1e-10, "h={h} c={c}");
            let e = 1e-4;
            let fp = f_i(z + e, h, &law).unwrap();
            let fm = f_i(z - e, h, &law).unwrap();
            assert!(((fp - fm) / (2.0 * e)).norm() < 1e-6);
            let second = (fp - 2.0 * f + fm) / (e * e);
            assert!((second.re - 2.0 * s.f2).abs() < 1e-5, "{} vs {}", second.re, 2.0 * s.f2);
        }
    }

    #[test]
    fn q_rho_degenerates_at_zero_spike() {
        let sample = EigenSample::new(vec![2.0, 1.0, 0.5], 4, 3).unwrap();
        let z = [Complex64::new(0.3, 1.0), Complex64::new(-1.0, 0.2)];
        for rho in [[0usize, 1], [1, 0]] {
            let q = q_rho(&z, &rho, &[0.0, 0.0], &sample).unwrap();
            assert!((q - 1.0).norm() < 1e-14);
        }
        let bad = q_rho(&[Complex64::new(100.0, 0.0)], &[0], &[0.5], &sample);
        assert!(matches!(bad, Err(Error::HalfPlane { .. })));
    }

    #[test]
    fn deterministic_part_example() {
        let d = deterministic_part(&[0.5, 0.5], 1.0, Variant::Lambda);
        assert!((d - 2.0 * 0.75f64.ln()).abs() < 1e-15);
        assert!((d + 0.575364).abs() < 1e-6);
    }

    #[test]
    fn quantile_sample_gives_deterministic_part() {
        let p = 2000;
        let law = MPLaw::new(1.0).unwrap();
        let sample = EigenSample::new(mp_quantiles(&law, p), p, p).unwrap();
        let h = [0.4, 0.2];
        let l = lr_lambda_laplace(&h, &sample, &law).unwrap();
        assert!((l.log_lr - deterministic_part(&h, 1.0, Variant::Lambda)).abs() < 0.01);
        assert_eq!(l.method, Method::LaplaceAsymptotic);
        let g = g_j(Complex64::new(4.5, 0.0), 1, &sample, &law).unwrap();
        assert!((g - 1.0).norm() < 0.01);
    }

    #[test]
    fn moments_examples() {
        let (m, v) = limit_process_moments(&[0.5], &[0.5], 1.0, Variant::Lambda).unwrap();
        assert!((m + 0.5 * v).abs() < 1e-15);
        let (_, v) = limit_process_moments(&[0.5], &[0.5], 1.0, Variant::Mu).unwrap();
        assert!((v - 0.0376821).abs() < 1e-6);
        let (_, v) = limit_process_moments(&[0.3, 0.2], &[0.0], 1.0, Variant::Mu).unwrap();
        assert_eq!(v, 0.0);
        assert!(limit_process_moments(&[1.0], &[0.5], 1.0, Variant::Lambda).is_err());
    }

    #[test]
    fn laplace_entry_is_real_positive() {
        let law = MPLaw::new(1.0).unwrap();
        let sample = EigenSample::new(mp_quantiles(&law, 200), 200, 200).unwrap();
        let v = laplace_entry_ln(0.5, 1, &sample, &law).unwrap();
        assert!(v.im.abs() < 1e-8);
    }
}
