//! Asymptotic power envelopes, Neyman-Pearson critical values, the limiting
//! Gaussian log-LR field and Monte Carlo power of the resulting tests.

use crate::error::{Error, Result};
use crate::likelihood::{check_subcritical, deterministic_part, limit_process_moments, LaplaceTable, Variant};
use crate::mp::{EigenSample, MPLaw};
use crate::randmat::{rng_for, sample_spiked_eigs_stream, SpikeParams};
use crate::special::{norm_cdf, norm_quantile};
use faer::{Mat, Side};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const PSD_TOLERANCE: f64 = -1e-8;
const EIGEN_FLOOR: f64 = 1e-12;
const DRAW_CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub h: Vec<f64>,
    pub c: f64,
    pub alpha_size: f64,
    pub variant: Variant,
    /// Noncentrality, i.e. the variance of the limiting log-LR at h.
    pub w: f64,
    pub beta: f64,
}

fn check_size(alpha_size: f64) -> Result<()> {
    if !(alpha_size > 0.0 && alpha_size < 1.0) {
        return Err(Error::InvalidArgument(format!("test size must lie in (0,1), got {alpha_size}")));
    }
    Ok(())
}

pub fn noncentrality(h: &[f64], c: f64, variant: Variant) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument("c must be positive".into()));
    }
    check_subcritical(h, c, true)?;
    Ok((-2.0 * deterministic_part(h, c, variant)).max(0.0))
}

pub fn envelope(h: &[f64], c: f64, alpha_size: f64, variant: Variant) -> Result<EnvelopePoint> {
    check_size(alpha_size)?;
    let w = noncentrality(h, c, variant)?;
    let beta = 1.0 - norm_cdf(norm_quantile(1.0 - alpha_size) - w.sqrt());
    Ok(EnvelopePoint { h: h.to_vec(), c, alpha_size, variant, w, beta })
}

/// Critical value of the point-optimal test, which rejects when log L(h) exceeds it.
pub fn np_critical_value(h: &[f64], c: f64, alpha_size: f64, variant: Variant) -> Result<f64> {
    check_size(alpha_size)?;
    let w = noncentrality(h, c, variant)?;
    Ok(w.sqrt() * norm_quantile(1.0 - alpha_size) + deterministic_part(h, c, variant))
}

/// Boundary of the spike grid used for sup-LR critical values in the literature: sqrt(c (1 - e^-36)).
pub fn boundary_preset(c: f64) -> f64 {
    (c * (1.0 - (-36.0f64).exp())).sqrt()
}

/// Spike vectors on which the limiting field is simulated, with its mean and covariance.
#[derive(Debug, Clone)]
pub struct FieldGrid {
    pub points: Vec<Vec<f64>>,
    pub c: f64,
    pub variant: Variant,
    pub mean: Vec<f64>,
    /// Row-major covariance.
    pub cov: Vec<f64>,
}

impl FieldGrid {
    pub fn new(points: Vec<Vec<f64>>, c: f64, variant: Variant) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("empty grid".into()));
        }
        let m = points.len();
        let mut mean = Vec::with_capacity(m);
        let mut cov = vec![0.0; m * m];
        for (i, a) in points.iter().enumerate() {
            for (j, b) in points.iter().enumerate().take(i + 1) {
                let (mi, k) = limit_process_moments(a, b, c, variant)?;
                if i == j {
                    mean.push(mi);
                }
                cov[i * m + j] = k;
                cov[j * m + i] = k;
            }
        }
        Ok(Self { points, c, variant, mean, cov })
    }

    /// Axis values 0, h_bar/(k-1), ..., h_bar in each of r coordinates, keeping
    /// only non-increasing vectors since the likelihood is symmetric in the spikes.
    pub fn uniform(r: usize, h_bar: f64, per_axis: usize, c: f64, variant: Variant) -> Result<Self> {
        if r == 0 || per_axis < 2 {
            return Err(Error::InvalidArgument("need r >= 1 and at least 2 points per axis".into()));
        }
        if !(h_bar > 0.0 && h_bar < c.sqrt()) {
            return Err(Error::SuperCritical { h: h_bar, threshold: c.sqrt() });
        }
        let axis = axis_values(h_bar, per_axis);
        let mut points = Vec::new();
        let mut idx = vec![0usize; r];
        loop {
            if idx.windows(2).all(|w| w[0] >= w[1]) {
                points.push(idx.iter().map(|&k| axis[k]).collect());
            }
            let mut k = 0;
            while k < r {
                idx[k] += 1;
                if idx[k] < per_axis {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == r {
                break;
            }
        }
        Self::new(points, c, variant)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn axis_values(h_bar: f64, per_axis: usize) -> Vec<f64> {
    (0..per_axis).map(|k| h_bar * k as f64 / (per_axis - 1) as f64).collect()
}

/// Empirical law of 2 sup_h L(h) over the grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldSimulation {
    /// Sorted draws of 2 sup L.
    pub sup_draws: Vec<f64>,
    /// Covariance eigen-components kept after the floor.
    pub rank: usize,
    pub min_eigenvalue: f64,
}

impl FieldSimulation {
    /// Empirical q-quantile (inverse of the empirical CDF).
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.sup_draws.len();
        let k = ((q * n as f64).ceil() as usize).clamp(1, n);
        self.sup_draws[k - 1]
    }

    /// Critical value of the sup-LR test at the given size.
    pub fn critical_value(&self, alpha_size: f64) -> f64 {
        self.quantile(1.0 - alpha_size)
    }

    /// Share of draws at or above the statistic, with the usual +1 correction.
    pub fn p_value(&self, statistic: f64) -> f64 {
        let n = self.sup_draws.len();
        let below = self.sup_draws.partition_point(|&x| x < statistic);
        (1 + n - below) as f64 / (1 + n) as f64
    }
}

/// Factor of the grid covariance: columns sqrt(ev_k) u_k for eigenvalues above the floor.
fn covariance_factor(grid: &FieldGrid) -> Result<(Vec<Vec<f64>>, f64)> {
    let m = grid.len();
    let k = Mat::<f64>::from_fn(m, m, |i, j| grid.cov[i * m + j]);
    let evd = k.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Degenerate(format!("eigensolver failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let min = (0..m).map(|i| s[i]).fold(f64::INFINITY, f64::min);
    if min < PSD_TOLERANCE {
        return Err(Error::NotPsd(min));
    }
    let cols = (0..m)
        .filter(|&i| s[i] > EIGEN_FLOOR)
        .map(|i| {
            let sq = s[i].sqrt();
            (0..m).map(|r| u[(r, i)] * sq).collect()
        })
        .collect();
    Ok((cols, min))
}

/// Field values for `draws` draws, passed to `visit` in draw order.
fn field_draws<F>(grid: &FieldGrid, draws: usize, seed: u64, visit: F) -> Result<(Vec<f64>, usize, f64)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let (cols, min) = covariance_factor(grid)?;
    let m = grid.len();
    let chunks = draws.div_ceil(DRAW_CHUNK);
    let out: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let count = DRAW_CHUNK.min(draws - ci * DRAW_CHUNK);
            let mut rng = rng_for(seed, ci as u64);
            let mut field = vec![0.0; m];
            let mut res = Vec::with_capacity(count);
            for _ in 0..count {
                field.copy_from_slice(&grid.mean);
                for col in &cols {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    for (f, c) in field.iter_mut().zip(col) {
                        *f += z * c;
                    }
                }
                res.push(visit(&field));
            }
            res
        })
        .collect();
    Ok((out.concat(), cols.len(), min))
}

pub fn simulate_limit_field(grid: &FieldGrid, draws: usize, seed: u64) -> Result<FieldSimulation> {
    if draws == 0 {
        return Err(Error::InvalidArgument("draws must be positive".into()));
    }
    let (mut sup_draws, rank, min_eigenvalue) =
        field_draws(grid, draws, seed, |f| 2.0 * f.iter().copied().fold(f64::NEG_INFINITY, f64::max))?;
    sup_draws.sort_by(f64::total_cmp);
    Ok(FieldSimulation { sup_draws, rank, min_eigenvalue })
}

/// Sample mean and row-major covariance of simulated field values, for checking the generator.
pub fn field_moments(grid: &FieldGrid, draws: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = grid.len();
    let values = std::sync::Mutex::new(Vec::with_capacity(draws * m));
    field_draws(grid, draws, seed, |f| {
        values.lock().expect("poisoned").push(f.to_vec());
        0.0
    })?;
    let rows: Vec<Vec<f64>> = values.into_inner().expect("poisoned");
    let n = rows.len() as f64;
    let mut mean = vec![0.0; m];
    for row in &rows {
        for (a, v) in mean.iter_mut().zip(row) {
            *a += v / n;
        }
    }
    let mut cov = vec![0.0; m * m];
    for row in &rows {
        for i in 0..m {
            for j in 0..m {
                cov[i * m + j] += (row[i] - mean[i]) * (row[j] - mean[j]) / (n - 1.0);
            }
        }
    }
    Ok((mean, cov))
}

/// 2 sup log L over a grid of Laplace log-likelihood ratios. Grid vectors whose
/// saddle points do not clear the largest eigenvalue are skipped; the zero
/// vector always contributes 0.
#[derive(Debug, Clone)]
pub struct SupLr {
    table: LaplaceTable,
    idx: Vec<Vec<usize>>,
    pub variant: Variant,
}

impl SupLr {
    pub fn new(grid: &FieldGrid, law: MPLaw) -> Result<Self> {
        let mut axis: Vec<f64> = grid.points.iter().flatten().copied().collect();
        axis.sort_by(f64::total_cmp);
        axis.dedup();
        let table = LaplaceTable::new(law, &axis)?;
        let idx = grid
            .points
            .iter()
            .map(|pt| pt.iter().map(|x| axis.partition_point(|a| a < x)).collect())
            .collect();
        Ok(Self { table, idx, variant: grid.variant })
    }

    pub fn statistic(&self, sample: &EigenSample) -> Result<f64> {
        let ok: Vec<bool> = (0..self.table.h.len()).map(|k| self.table.delta(sample, k).is_some()).collect();
        let mut best = 0.0f64;
        for ix in &self.idx {
            if ix.iter().all(|&k| ok[k]) {
                best = best.max(self.table.log_lr(sample, ix, self.variant)?);
            }
        }
        Ok(2.0 * best)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    LrLambda,
    LrMu,
    /// Neyman-Pearson test against the row's own alternative.
    PointOptimal(Variant),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PowerConfig {
    pub alpha_size: f64,
    /// Grid boundary for the sup-LR test.
    pub h_bar: f64,
    pub per_axis: usize,
    pub field_draws: usize,
}

impl PowerConfig {
    pub fn new(alpha_size: f64, h_bar: f64) -> Self {
        Self { alpha_size, h_bar, per_axis: 25, field_draws: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub h: Vec<f64>,
    pub rejection_rate: f64,
    pub std_error: f64,
    pub replications: usize,
    pub critical_value: f64,
}

/// Monte Carlo rejection frequencies of `test` under each alternative of `h_grid`.
pub fn power_curve(
    h_grid: &[Vec<f64>],
    c: f64,
    n: usize,
    p: usize,
    test: TestKind,
    replications: usize,
    seed: u64,
    config: PowerConfig,
) -> Result<Vec<PowerRow>> {
    check_size(config.alpha_size)?;
    if replications == 0 || h_grid.is_empty() {
        return Err(Error::InvalidArgument("need replications and at least one alternative".into()));
    }
    let law = MPLaw::from_dims(n, p)?;
    let r = h_grid[0].len();
    if h_grid.iter().any(|h| h.len() != r) {
        return Err(Error::InvalidArgument("all alternatives must have the same number of spikes".into()));
    }
    for h in h_grid {
        check_subcritical(h, c, true)?;
    }
    let sup = match test {
        TestKind::LrLambda | TestKind::LrMu => {
            let variant = if test == TestKind::LrLambda { Variant::Lambda } else { Variant::Mu };
            let grid = FieldGrid::uniform(r, config.h_bar, config.per_axis, c, variant)?;
            let sim = simulate_limit_field(&grid, config.field_draws, seed ^ 0x9e37_79b9_7f4a_7c15)?;
            Some((SupLr::new(&grid, law)?, sim.critical_value(config.alpha_size)))
        }
        TestKind::PointOptimal(_) => None,
    };
    let mut rows = Vec::with_capacity(h_grid.len());
    for (row, h) in h_grid.iter().enumerate() {
        let params = SpikeParams::new(h.clone(), n, p)?;
        let (crit, point) = match (&sup, test) {
            (Some((_, cv)), _) => (*cv, None),
            (None, TestKind::PointOptimal(v)) => {
                let active: Vec<f64> = h.iter().copied().filter(|&x| x > 0.0).collect();
                let table = LaplaceTable::new(law, &active)?;
                (np_critical_value(&active, c, config.alpha_size, v)?, Some((table, v)))
            }
            _ => unreachable!(),
        };
        let rejects: Vec<Result<bool>> = (0..replications)
            .into_par_iter()
            .map(|k| {
                let sample = sample_spiked_eigs_stream(&params, seed, (row * replications + k) as u64)?;
                let stat = match (&sup, &point) {
                    (Some((s, _)), _) => s.statistic(&sample)?,
                    (None, Some((table, v))) => {
                        let ix: Vec<usize> = (0..table.h.len()).collect();
                        if ix.iter().all(|&i| table.delta(&sample, i).is_some()) {
                            table.log_lr(&sample, &ix, *v)?
                        } else {
                            f64::INFINITY
                        }
                    }
                    _ => unreachable!(),
                };
                Ok(stat > crit)
            })
            .collect();
        let hits = rejects.into_iter().collect::<Result<Vec<bool>>>()?.iter().filter(|&&b| b).count();
        let rate = hits as f64 / replications as f64;
        rows.push(PowerRow {
            h: h.clone(),
            rejection_rate: rate,
            std_error: (rate * (1.0 - rate) / replications as f64).sqrt(),
            replications,
            critical_value: crit,
        });
    }
    Ok(rows)
}
