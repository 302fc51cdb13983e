//! Samplers for spiked complex Gaussian data and Haar unitaries.

use crate::error::{Error, Result};
use crate::mp::EigenSample;
use faer::{Mat, Side};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Generator for replication `stream` of a run seeded with `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Circular complex normal with E|z|^2 = 1.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// First `r` columns of a Haar unitary, written column-major into `out` (length p*r).
/// Gram-Schmidt on Ginibre columns with reorthogonalization; the implied
/// triangular factor has a positive diagonal, so the frame is exactly Haar.
pub fn haar_columns_into<R: Rng + ?Sized>(p: usize, r: usize, rng: &mut R, out: &mut [Complex64]) {
    assert!(r <= p && out.len() == p * r);
    for v in out.iter_mut() {
        *v = complex_normal(rng);
    }
    for j in 0..r {
        let (done, rest) = out.split_at_mut(j * p);
        let col = &mut rest[..p];
        for _ in 0..2 {
            for i in 0..j {
                let q = &done[i * p..(i + 1) * p];
                let proj: Complex64 = q.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum();
                for (c, a) in col.iter_mut().zip(q) {
                    *c -= a * proj;
                }
            }
        }
        let norm = col.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for c in col.iter_mut() {
            *c /= norm;
        }
    }
}

pub fn haar_frame<R: Rng + ?Sized>(p: usize, r: usize, rng: &mut R) -> Mat<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); p * r];
    haar_columns_into(p, r, rng, &mut buf);
    Mat::from_fn(p, r, |i, j| buf[j * p + i])
}

/// Haar-distributed p x p unitary.
pub fn haar_unitary(p: usize, seed: u64) -> Result<Mat<Complex64>> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be positive".into()));
    }
    let mut rng = rng_for(seed, 0);
    Ok(haar_frame(p, p, &mut rng))
}

#[derive(Debug, Clone)]
pub struct SpikeParams {
    pub h: Vec<f64>,
    pub n: usize,
    pub p: usize,
    pub sigma2: f64,
    /// Orthonormal p x r frame; Haar-random when absent.
    pub v: Option<Mat<Complex64>>,
}

impl SpikeParams {
    pub fn new(h: Vec<f64>, n: usize, p: usize) -> Result<Self> {
        let out = Self { h, n, p, sigma2: 1.0, v: None };
        out.validate()?;
        Ok(out)
    }

    pub fn null(n: usize, p: usize) -> Result<Self> {
        Self::new(Vec::new(), n, p)
    }

    pub fn with_frame(mut self, v: Mat<Complex64>) -> Result<Self> {
        self.v = Some(v);
        self.validate()?;
        Ok(self)
    }

    pub fn r(&self) -> usize {
        self.h.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::InvalidArgument("n and p must be positive".into()));
        }
        if self.h.len() > self.p {
            return Err(Error::InvalidArgument(format!("r={} exceeds p={}", self.h.len(), self.p)));
        }
        if self.h.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::InvalidArgument("spikes must be finite and non-negative".into()));
        }
        if !(self.sigma2 > 0.0) {
            return Err(Error::InvalidArgument("sigma2 must be positive".into()));
        }
        if let Some(v) = &self.v {
            if v.nrows() != self.p || v.ncols() != self.h.len() {
                return Err(Error::DimensionMismatch(v.nrows() * v.ncols(), self.p * self.h.len()));
            }
            let g = v.adjoint() * v;
            for i in 0..g.nrows() {
                for j in 0..g.ncols() {
                    let target = if i == j { 1.0 } else { 0.0 };
                    if (g[(i, j)] - target).norm() > 1e-10 {
                        return Err(Error::InvalidArgument("frame columns are not orthonormal".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Eigenvalues of XX*/n for one replication; `stream` selects the replication.
pub fn sample_spiked_eigs_stream(params: &SpikeParams, seed: u64, stream: u64) -> Result<EigenSample> {
    params.validate()?;
    let (n, p) = (params.n, params.p);
    let mut rng = rng_for(seed, stream);
    let mut x = Mat::<Complex64>::from_fn(p, n, |_, _| complex_normal(&mut rng));
    if params.h.iter().any(|&h| h > 0.0) {
        let v = match &params.v {
            Some(v) => v.clone(),
            None => haar_frame(p, params.r(), &mut rng),
        };
        let mut vg = v.adjoint() * &x;
        for (i, h) in params.h.iter().enumerate() {
            let d = (1.0 + h).sqrt() - 1.0;
            for j in 0..n {
                vg[(i, j)] *= d;
            }
        }
        x += &v * &vg;
    }
    let scale = params.sigma2 / n as f64;
    let gram = if p <= n { &x * x.adjoint() } else { x.adjoint() * &x };
    let evs = gram
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Degenerate(format!("eigensolver failed: {e:?}")))?;
    let lambda: Vec<f64> = evs.iter().map(|&e| (e * scale).max(0.0)).collect();
    EigenSample::new(lambda, n, p)
}

pub fn sample_spiked_eigs(params: &SpikeParams, seed: u64) -> Result<EigenSample> {
    sample_spiked_eigs_stream(params, seed, 0)
}

/// mu_j = lambda_j / S for j = 1..m-1.
pub fn normalized_eigs(sample: &EigenSample) -> Result<Vec<f64>> {
    if !(sample.s > 0.0) {
        return Err(Error::Degenerate("trace is zero".into()));
    }
    let m = sample.m();
    Ok(sample.lambda[..m.saturating_sub(1)].iter().map(|l| l / sample.s).collect())
}

/// Centered linear statistics (S - p, T - (1 + c_p) p).
pub fn linear_statistics(sample: &EigenSample) -> (f64, f64) {
    let p = sample.p as f64;
    (sample.s - p, sample.t - (1.0 + sample.c_p()) * p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary_and_deterministic() {
        let u = haar_unitary(6, 11).unwrap();
        let g = u.adjoint() * &u;
        for i in 0..6 {
            for j in 0..6 {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - t).norm() < 1e-10);
            }
        }
        assert_eq!(u, haar_unitary(6, 11).unwrap());
        let one = haar_unitary(1, 3).unwrap();
        assert!((one[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn haar_second_moment() {
        let mut rng = rng_for(5, 0);
        let p = 8;
        let draws = 100_000;
        let mut buf = vec![Complex64::new(0.0, 0.0); p];
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..draws {
            haar_columns_into(p, 1, &mut rng, &mut buf);
            let x = buf[0].norm_sqr();
            s += x;
            s2 += x * x;
        }
        let mean = s / draws as f64;
        let se = ((s2 / draws as f64 - mean * mean) / draws as f64).sqrt();
        assert!((mean - 1.0 / p as f64).abs() < 3.0 * se);
    }

    #[test]
    fn normalized_eigs_examples() {
        let s = EigenSample::new(vec![2.0, 1.0, 1.0], 3, 3).unwrap();
        assert_eq!(normalized_eigs(&s).unwrap(), vec![0.5, 0.25]);
        let s7 = EigenSample::new(vec![14.0, 7.0, 7.0], 3, 3).unwrap();
        assert_eq!(normalized_eigs(&s7).unwrap(), vec![0.5, 0.25]);
        let one = EigenSample::new(vec![3.0], 1, 1).unwrap();
        assert!(normalized_eigs(&one).unwrap().is_empty());
    }

    #[test]
    fn wide_case_pads_zeros() {
        let params = SpikeParams::null(5, 12).unwrap();
        let s = sample_spiked_eigs(&params, 1).unwrap();
        assert_eq!(s.m(), 5);
        assert_eq!(s.all_eigenvalues().len(), 12);
        assert!(s.lambda.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn reproducible_streams() {
        let params = SpikeParams::new(vec![0.5], 40, 30).unwrap();
        let a = sample_spiked_eigs_stream(&params, 9, 3).unwrap();
        let b = sample_spiked_eigs_stream(&params, 9, 3).unwrap();
        let c = sample_spiked_eigs_stream(&params, 9, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_frame() {
        let v = Mat::<Complex64>::from_fn(4, 1, |_, _| Complex64::new(1.0, 0.0));
        assert!(SpikeParams::new(vec![0.5], 10, 4).unwrap().with_frame(v).is_err());
    }
}
