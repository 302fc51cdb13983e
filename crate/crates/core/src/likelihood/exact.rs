//! Exact likelihood ratios as determinants / permutation sums of contour integrals.
//!
//! After cancelling the Marchenko-Pastur factors, row i of the lambda
//! determinant integrates e^{n theta_i z} z^{j-1} / prod_s (z - lambda_s), and
//! the mu integrand is (1 - sum_j theta_rho(j) z_j / S)^{-N'} prod_j z_j^{j-1} / prod_s (z_j - lambda_s).
//! Each integral runs over a closed rectangle whose right edge sits at the
//! real-axis minimum of the log modulus, so the quadrature sees little cancellation.

use super::{check_subcritical, LRResult, Method, Variant};
use crate::contour::{converge, converge_many, weighted_sum, ContourPath, QuadOptions, Quadrature, SteepestContour};
use crate::error::{Error, Result};
use crate::hciz::{det_with_error, jitter_coincident};
use crate::mp::{EigenSample, MPLaw};
use crate::special::{ln_factorial, ln_gamma, permutations};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest p accepted by the exact evaluators.
pub const EXACT_MAX_P: usize = 1000;
const CHUNK: usize = 16;
const SIGMAS_PER_NODE: f64 = 4.0;
// Pairs whose modulus bound falls this far below the reference are skipped.
const PRUNE_LOG: f64 = -60.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContourChoice {
    /// Rectangles through the finite-sample saddle of each row.
    Steepest,
    /// One rectangle around all eigenvalues with the given margin.
    Generic { margin: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct ExactOptions {
    pub contour: ContourChoice,
    pub quad: QuadOptions,
    /// Separate coincident spikes by a relative 1e-6 instead of failing.
    pub jitter: bool,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self { contour: ContourChoice::Steepest, quad: QuadOptions::default(), jitter: false }
    }
}

struct Poles {
    nonzero: Vec<f64>,
    zeros: usize,
    top: f64,
    bottom: f64,
}

impl Poles {
    fn new(sample: &EigenSample) -> Self {
        let nonzero: Vec<f64> = sample.lambda.iter().copied().filter(|&l| l != 0.0).collect();
        let zeros = sample.p - nonzero.len();
        let mut top = nonzero.first().copied().unwrap_or(0.0);
        let mut bottom = nonzero.last().copied().unwrap_or(0.0);
        if zeros > 0 {
            top = top.max(0.0);
            bottom = bottom.min(0.0);
        }
        Self { nonzero, zeros, top, bottom }
    }

    /// sum_s ln(z - lambda_s), branch irrelevant since only its exponential is used.
    fn log_char(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for chunk in self.nonzero.chunks(CHUNK) {
            let mut prod = Complex64::new(1.0, 0.0);
            for l in chunk {
                prod *= z - l;
            }
            acc += prod.ln();
        }
        if self.zeros > 0 {
            acc += z.ln() * self.zeros as f64;
        }
        acc
    }

    fn log_abs_char(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for chunk in self.nonzero.chunks(CHUNK) {
            let mut prod = 1.0;
            for l in chunk {
                prod *= (x - l).abs();
            }
            acc += prod.ln();
        }
        acc + self.zeros as f64 * x.abs().ln()
    }

    fn d1(&self, x: f64) -> f64 {
        self.nonzero.iter().map(|l| 1.0 / (x - l)).sum::<f64>() + self.zeros as f64 / x
    }

    fn d2(&self, x: f64) -> f64 {
        self.nonzero.iter().map(|l| (x - l).powi(-2)).sum::<f64>() + self.zeros as f64 / (x * x)
    }
}

/// Root of an increasing function on (lo, hi) by bisection.
fn bisect<F: FnMut(f64) -> f64>(lo: f64, hi: f64, mut f: F) -> f64 {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m) > 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

fn theta(h: f64) -> f64 {
    h / (1.0 + h)
}

fn generic_path(poles: &Poles, right: f64, margin: f64, npu: f64) -> ContourPath {
    let left = poles.bottom.min(0.0) - margin;
    let height = 3.0 * right.abs().max(1.0);
    ContourPath::rectangle(left, right, -height, height, npu)
}

fn steepest_path(poles: &Poles, saddle: f64, second: f64, log_modulus: impl Fn(f64) -> f64) -> ContourPath {
    let sigma = 1.0 / second.sqrt();
    let at_saddle = log_modulus(saddle);
    let left_limit = poles.bottom.min(0.0) - 0.5;
    let x_left = SteepestContour::truncation(saddle, left_limit, |x| log_modulus(x) - at_saddle);
    SteepestContour::new(saddle, x_left).path(SIGMAS_PER_NODE / sigma)
}

fn validate(h: &[f64], sample: &EigenSample, law: &MPLaw, max_r: usize, opts: &ExactOptions) -> Result<(Vec<f64>, bool)> {
    let r = h.len();
    if r == 0 || r > max_r {
        return Err(Error::CostGuard(format!("exact evaluation supports 1 <= r <= {max_r}, got {r}")));
    }
    if sample.p > EXACT_MAX_P {
        return Err(Error::CostGuard(format!("exact evaluation supports p <= {EXACT_MAX_P}; use the Laplace form")));
    }
    if (law.c - sample.c_p()).abs() > 1e-12 * law.c {
        return Err(Error::InvalidArgument(format!("law ratio {} differs from p/n = {}", law.c, sample.c_p())));
    }
    check_subcritical(h, law.c, false)?;
    let (h2, moved) = jitter_coincident(h, 1e-6);
    if moved && !opts.jitter {
        return Err(Error::Degenerate(
            "coincident spikes make the prefactor singular; separate them with jitter_coincident or enable jitter".into(),
        ));
    }
    Ok((h2, moved))
}

/// ln|k_1| and its sign.
fn ln_k1(h: &[f64], n: usize, p: usize) -> (f64, f64) {
    let r = h.len();
    let (nf, pf, rf) = (n as f64, p as f64, r as f64);
    let mut ln = -(pf * rf - (r * (r + 1)) as f64 / 2.0) * nf.ln();
    let mut sign = if (r * (r.saturating_sub(1)) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    for i in 0..r {
        for j in 0..i {
            let d = h[i] - h[j];
            ln -= d.abs().ln();
            sign *= d.signum();
        }
    }
    for (t, &ht) in h.iter().enumerate() {
        ln += (rf - pf) * ht.ln() + (pf - nf - 1.0) * (1.0 + ht).ln() + ln_factorial(p - t - 1);
    }
    (ln, sign)
}

fn finish(
    log_scale: f64,
    value: Complex64,
    error: f64,
    h: Vec<f64>,
    sample: &EigenSample,
    law: &MPLaw,
    variant: Variant,
    jittered: bool,
) -> Result<LRResult> {
    if !(value.re > 0.0) || value.im.abs() > 1e-6 * value.norm() {
        return Err(Error::Degenerate(format!("contour evaluation returned {value}, expected a positive real")));
    }
    Ok(LRResult {
        log_lr: log_scale + value.norm().ln(),
        variant,
        method: Method::ExactContour,
        error_estimate: error / value.norm(),
        order_flag: None,
        h,
        c_p: law.c,
        n: sample.n,
        p: sample.p,
        jittered,
    })
}

/// Row i of the lambda determinant: its contour and log reference.
fn lambda_row(a: f64, poles: &Poles, choice: ContourChoice) -> (ContourPath, f64) {
    let modulus = |x: f64| a * x - poles.log_abs_char(x);
    let lo = poles.top;
    let path = match choice {
        ContourChoice::Steepest => {
            let mut hi = lo + 1.0;
            while a - poles.d1(hi) <= 0.0 {
                hi = lo + 2.0 * (hi - lo);
            }
            let x = bisect(lo, hi, |x| a - poles.d1(x));
            steepest_path(poles, x, poles.d2(x), modulus)
        }
        ContourChoice::Generic { margin } => generic_path(poles, lo + margin, margin, crate::contour::DEFAULT_NODES_PER_UNIT),
    };
    let reference = path.nodes.iter().map(|&z| (a * z - poles.log_char(z)).re).fold(f64::NEG_INFINITY, f64::max);
    (path, reference)
}

pub fn lr_lambda_exact(h: &[f64], sample: &EigenSample, law: &MPLaw) -> Result<LRResult> {
    lr_exact(h, sample, law, Variant::Lambda, ExactOptions::default())
}

pub fn lr_mu_exact(h: &[f64], sample: &EigenSample, law: &MPLaw) -> Result<LRResult> {
    lr_exact(h, sample, law, Variant::Mu, ExactOptions::default())
}

pub fn lr_exact(h: &[f64], sample: &EigenSample, law: &MPLaw, variant: Variant, opts: ExactOptions) -> Result<LRResult> {
    match variant {
        Variant::Lambda => lambda_impl(h, sample, law, opts),
        Variant::Mu => mu_impl(h, sample, law, opts),
    }
}

fn lambda_impl(h: &[f64], sample: &EigenSample, law: &MPLaw, opts: ExactOptions) -> Result<LRResult> {
    let (h, jittered) = validate(h, sample, law, 3, &opts)?;
    let r = h.len();
    let poles = Poles::new(sample);
    let n = sample.n as f64;
    let rows: Vec<Result<(Vec<Quadrature>, f64)>> = h
        .par_iter()
        .map(|&hi| {
            let a = n * theta(hi);
            let (path, reference) = lambda_row(a, &poles, opts.contour);
            let qs = converge_many(std::slice::from_ref(&path), opts.quad, |ps| {
                let p = &ps[0];
                let base: Vec<Complex64> = p.nodes.par_iter().map(|&z| (a * z - poles.log_char(z) - reference).exp()).collect();
                let mut out = Vec::with_capacity(r);
                let mut vals = base.clone();
                for _ in 0..r {
                    out.push(weighted_sum(&vals, &p.weights));
                    for (v, z) in vals.iter_mut().zip(&p.nodes) {
                        *v *= z;
                    }
                }
                if out.iter().any(|o| !o.0.is_finite()) {
                    return Err(Error::Degenerate("non-finite contour sum".into()));
                }
                Ok(out)
            })?;
            Ok((qs, reference))
        })
        .collect();
    let mut entries = Vec::with_capacity(r * r);
    let mut log_scale = 0.0;
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    for row in rows {
        let (qs, reference) = row?;
        log_scale += reference;
        entries.extend(qs.into_iter().map(|q| Quadrature { value: q.value / two_pi_i, error: q.error / (2.0 * PI), nodes: q.nodes }));
    }
    let det = det_with_error(r, &entries);
    let (lk, sign) = ln_k1(&h, sample.n, sample.p);
    finish(lk + log_scale, det.value * sign, det.error, h, sample, law, Variant::Lambda, jittered)
}

/// Real log modulus of the mu integrand for one permutation, coordinates x.
struct MuKernel<'a> {
    poles: &'a Poles,
    b: Vec<f64>,
    power: f64,
}

impl MuKernel<'_> {
    fn log_modulus(&self, x: &[f64]) -> f64 {
        let w: f64 = self.b.iter().zip(x).map(|(b, x)| b * x).sum();
        let mut v = -self.power * (1.0 - w).ln();
        for (j, &xj) in x.iter().enumerate() {
            v += j as f64 * xj.ln() - self.poles.log_abs_char(xj);
        }
        v
    }

    fn partial(&self, x: &[f64], j: usize) -> (f64, f64) {
        let w: f64 = self.b.iter().zip(x).map(|(b, x)| b * x).sum();
        let xj = x[j];
        let g = self.power * self.b[j] / (1.0 - w) + j as f64 / xj - self.poles.d1(xj);
        let g2 = self.power * (self.b[j] / (1.0 - w)).powi(2) - j as f64 / (xj * xj) + self.poles.d2(xj);
        (g, g2)
    }

    /// Joint real saddle by cyclic coordinate minimization of the convex log modulus.
    fn saddle(&self) -> Result<Vec<f64>> {
        let r = self.b.len();
        let lo = self.poles.top;
        let mut x = vec![lo; r];
        for j in 0..r {
            let others: f64 = (0..r).filter(|&k| k != j).map(|k| self.b[k] * lo).sum();
            x[j] = lo + 0.5 * ((1.0 - others) / self.b[j] - lo).max(0.0).min(1.0);
        }
        for _ in 0..200 {
            let before = x.clone();
            for j in 0..r {
                let others: f64 = (0..r).filter(|&k| k != j).map(|k| self.b[k] * x[k]).sum();
                let cap = (1.0 - others) / self.b[j];
                if cap <= lo {
                    return Err(Error::HalfPlane { re: lo, bound: cap });
                }
                let mut y = x.clone();
                x[j] = bisect(lo, cap, |t| {
                    y[j] = t;
                    self.partial(&y, j).0
                });
            }
            let moved = x.iter().zip(&before).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if moved <= 1e-13 * x.iter().fold(1.0f64, |m, v| m.max(v.abs())) {
                break;
            }
        }
        Ok(x)
    }
}

fn mu_impl(h: &[f64], sample: &EigenSample, law: &MPLaw, opts: ExactOptions) -> Result<LRResult> {
    let (h, jittered) = validate(h, sample, law, 2, &opts)?;
    let r = h.len();
    let poles = Poles::new(sample);
    let (n, p) = (sample.n, sample.p);
    let s = sample.s;
    let power = (p * (n - r)) as f64 + (r * (r + 1)) as f64 / 2.0;
    let bound = s / h.iter().map(|&x| theta(x)).sum::<f64>();
    if poles.top >= bound {
        return Err(Error::HalfPlane { re: poles.top, bound });
    }
    let terms: Vec<Result<(f64, Complex64, f64)>> = permutations(r)
        .into_par_iter()
        .map(|(rho, sgn)| {
            let kernel = MuKernel { poles: &poles, b: rho.iter().map(|&k| theta(h[k]) / s).collect(), power };
            let paths: Vec<ContourPath> = match opts.contour {
                ContourChoice::Steepest => {
                    let x = kernel.saddle()?;
                    (0..r)
                        .map(|j| {
                            let second = kernel.partial(&x, j).1;
                            steepest_path(&poles, x[j], second, |t| {
                                let mut y = x.clone();
                                y[j] = t;
                                kernel.log_modulus(&y)
                            })
                        })
                        .collect()
                }
                ContourChoice::Generic { margin } => {
                    let right = poles.top + margin.min(0.5 * (bound - poles.top));
                    let path = generic_path(&poles, right, margin, crate::contour::DEFAULT_NODES_PER_UNIT);
                    vec![path; r]
                }
            };
            let reference = mu_reference(&kernel, &paths);
            let q = converge(&paths, opts.quad, |ps| Ok(mu_tensor_sum(&kernel, ps, reference)))?;
            Ok((reference, q.value * sgn, q.error))
        })
        .collect();
    let terms: Vec<(f64, Complex64, f64)> = terms.into_iter().collect::<Result<_>>()?;
    let top = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    let scale = (2.0 * PI).powi(r as i32);
    let i_pow = Complex64::new(0.0, 1.0).powi(r as i32);
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for (reference, v, e) in &terms {
        let f = (reference - top).exp();
        total += v * f;
        err += e * f;
    }
    total /= i_pow * scale;
    err /= scale;
    let (lk1, sign) = ln_k1(&h, n, p);
    let lk2 = lk1 + ((p * r) as f64 - (r * (r + 1)) as f64 / 2.0) * (n as f64 * s).ln() + ln_gamma(power) - ln_gamma((n * p) as f64);
    finish(lk2 + top, total * sign, err, h, sample, law, Variant::Mu, jittered)
}

fn mu_node_terms(kernel: &MuKernel, path: &ContourPath, j: usize) -> Vec<Complex64> {
    path.nodes.par_iter().map(|&z| z.ln() * j as f64 - kernel.poles.log_char(z)).collect()
}

fn mu_reference(kernel: &MuKernel, paths: &[ContourPath]) -> f64 {
    // Log modulus at the right-edge midpoints, which is the real maximum on steepest paths.
    let x: Vec<f64> = paths.iter().map(|p| p.nodes[0].re).collect();
    kernel.log_modulus(&x)
}

fn mu_tensor_sum(kernel: &MuKernel, paths: &[ContourPath], reference: f64) -> (Complex64, f64) {
    let one = Complex64::new(1.0, 0.0);
    let power = kernel.power;
    let t0 = mu_node_terms(kernel, &paths[0], 0);
    if paths.len() == 1 {
        let vals: Vec<Complex64> = paths[0]
            .nodes
            .iter()
            .zip(&t0)
            .map(|(&z, t)| (-(one - z * kernel.b[0]).ln() * power + t - reference).exp())
            .collect();
        return weighted_sum(&vals, &paths[0].weights);
    }
    let t1 = mu_node_terms(kernel, &paths[1], 1);
    let (p0, p1) = (&paths[0], &paths[1]);
    // Re z <= right edge on each path, so the coupling factor is bounded by its
    // value with the other coordinate moved to its right edge.
    let (r0, r1) = (p0.nodes[0].re, p1.nodes[0].re);
    let couple = |x0: f64, x1: f64| -power * (1.0 - kernel.b[0] * x0 - kernel.b[1] * x1).ln();
    let row_bound: Vec<f64> = p0.nodes.iter().zip(&t0).map(|(z, t)| couple(z.re, r1) + t.re - reference).collect();
    let col_bound: Vec<f64> = p1.nodes.iter().zip(&t1).map(|(z, t)| couple(r0, z.re) + t.re).collect();
    let t1_max = t1.iter().map(|t| t.re).fold(f64::NEG_INFINITY, f64::max);
    let partial: Vec<(Complex64, f64)> = (0..p0.len())
        .into_par_iter()
        .map(|k| {
            let mut s = Complex64::new(0.0, 0.0);
            let mut mass = 0.0;
            if row_bound[k] + t1_max < PRUNE_LOG {
                return (s, mass);
            }
            let z0 = p0.nodes[k];
            let base = t0[k] - reference;
            let lin0 = z0 * kernel.b[0];
            for l in 0..p1.len() {
                if base.re + col_bound[l] < PRUNE_LOG || row_bound[k] + t1[l].re < PRUNE_LOG {
                    continue;
                }
                let v = (-(one - lin0 - p1.nodes[l] * kernel.b[1]).ln() * power + base + t1[l]).exp() * p1.weights[l];
                s += v;
                mass += v.norm();
            }
            let w0 = p0.weights[k];
            (s * w0, mass * w0.norm())
        })
        .collect();
    partial.into_iter().fold((Complex64::new(0.0, 0.0), 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
}

/// For r = 2 at a fixed y: det R from single contour integrals and the
/// explicit permutation sum of double integrals, both on the same converged
/// contour around all eigenvalues. Returns (det R, permutation sum).
pub fn permutation_sum_identity(h: &[f64], sample: &EigenSample, y: f64, margin: f64) -> Result<(Complex64, Complex64)> {
    let r = h.len();
    if r != 2 {
        return Err(Error::InvalidArgument("the identity is evaluated for r = 2".into()));
    }
    let poles = Poles::new(sample);
    let n = sample.n as f64;
    let coef: Vec<f64> = h.iter().map(|&x| y / sample.s * n * theta(x)).collect();
    let base = ContourPath::rectangle(poles.bottom.min(0.0) - margin, poles.top + margin, -margin, margin, crate::contour::DEFAULT_NODES_PER_UNIT);
    let single = |path: &ContourPath, a: f64, j: usize| -> Vec<Complex64> {
        path.nodes.iter().map(|&z| (a * z - poles.log_char(z)).exp() * z.powi(j as i32)).collect()
    };
    let entries = |paths: &[ContourPath]| -> Result<Vec<(Complex64, f64)>> {
        let p = &paths[0];
        let mut out = Vec::with_capacity(r * r);
        for &a in &coef {
            for j in 0..r {
                out.push(weighted_sum(&single(p, a, j), &p.weights));
            }
        }
        Ok(out)
    };
    let qs = converge_many(std::slice::from_ref(&base), QuadOptions { tol: 1e-13, ..QuadOptions::default() }, entries)?;
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let mut level = base.clone();
    while level.len() < qs[0].nodes {
        level = level.refined();
    }
    let r_mat: Vec<Complex64> = qs.iter().map(|q| q.value / two_pi_i).collect();
    let det = r_mat[0] * r_mat[3] - r_mat[1] * r_mat[2];
    let mut perm = Complex64::new(0.0, 0.0);
    for (rho, sgn) in permutations(r) {
        let f0 = single(&level, coef[rho[0]], 0);
        let f1 = single(&level, coef[rho[1]], 1);
        let mut s = Complex64::new(0.0, 0.0);
        for (a, wa) in f0.iter().zip(&level.weights) {
            for (b, wb) in f1.iter().zip(&level.weights) {
                s += a * wa * b * wb;
            }
        }
        perm += s * sgn / (two_pi_i * two_pi_i);
    }
    Ok((det, perm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mp::mp_quantiles;

    fn quantile_sample(n: usize, p: usize) -> (EigenSample, MPLaw) {
        let law = MPLaw::from_dims(n, p).unwrap();
        let m = n.min(p);
        let mut q = mp_quantiles(&law, p);
        q.truncate(m);
        (EigenSample::new(q, n, p).unwrap(), law)
    }

    #[test]
    fn small_spike_gives_zero() {
        let (s, law) = quantile_sample(100, 100);
        let l = lr_lambda_exact(&[1e-4], &s, &law).unwrap();
        assert!(l.log_lr.abs() <= 0.05, "{}", l.log_lr);
        let m = lr_mu_exact(&[1e-4], &s, &law).unwrap();
        assert!(m.log_lr.abs() <= 0.05, "{}", m.log_lr);
    }

    #[test]
    fn residue_sum_oracle_r1() {
        // Small p: the contour integral equals the partial-fraction residue sum.
        let lam = vec![3.1, 2.0, 1.2, 0.4];
        let (n, p) = (6, 4);
        let s = EigenSample::new(lam.clone(), n, p).unwrap();
        let law = MPLaw::from_dims(n, p).unwrap();
        let h = 0.3;
        let a = n as f64 * theta(h);
        let mut res = 0.0;
        for (i, li) in lam.iter().enumerate() {
            let den: f64 = lam.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, lk)| li - lk).product();
            res += (a * li).exp() / den;
        }
        let (lk, sign) = ln_k1(&[h], n, p);
        let want = lk + (sign * res).ln();
        let got = lr_lambda_exact(&[h], &s, &law).unwrap();
        assert!((got.log_lr - want).abs() < 1e-9, "{} vs {want}", got.log_lr);
    }

    #[test]
    fn generic_and_steepest_agree() {
        let lam = vec![3.3, 2.2, 1.5, 0.9, 0.5, 0.2];
        let (n, p) = (8, 6);
        let s = EigenSample::new(lam, n, p).unwrap();
        let law = MPLaw::from_dims(n, p).unwrap();
        for v in [Variant::Lambda, Variant::Mu] {
            let h = [0.4, 0.2];
            let a = lr_exact(&h, &s, &law, v, ExactOptions::default()).unwrap();
            let g = lr_exact(&h, &s, &law, v, ExactOptions { contour: ContourChoice::Generic { margin: 0.5 }, ..Default::default() }).unwrap();
            assert!((a.log_lr - g.log_lr).abs() < 1e-8, "{v:?}: {} vs {}", a.log_lr, g.log_lr);
        }
    }

    #[test]
    fn coincident_spikes_rejected_unless_jittered() {
        let (s, law) = quantile_sample(20, 20);
        let err = lr_lambda_exact(&[0.3, 0.3], &s, &law).unwrap_err();
        assert!(err.to_string().contains("jitter"));
        let opts = ExactOptions { jitter: true, ..Default::default() };
        let r = lr_exact(&[0.3, 0.3], &s, &law, Variant::Lambda, opts).unwrap();
        assert!(r.jittered);
    }

    #[test]
    fn permutation_identity_r2() {
        let s = EigenSample::new(vec![2.5, 1.4, 0.7, 0.1], 5, 4).unwrap();
        let (det, perm) = permutation_sum_identity(&[0.5, 0.2], &s, 0.9, 0.5).unwrap();
        assert!((det - perm).norm() <= 1e-10 * det.norm(), "{det} {perm}");
    }
}
