//! Integer partitions, Jack polynomials in the C-normalization and the
//! truncated hypergeometric series of two matrix arguments.

mod jack;
mod series;
mod torus;

pub use jack::{jack_c, jack_c_identity, jack_table, monomial, JackTable};
pub use series::{f00_series, F00Polynomial, SeriesValue};
pub use torus::{torus_norm_closed_form, torus_generating_sides, torus_inner_product};

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Non-increasing sequence of positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!(
                "partition parts must be non-increasing: {parts:?}"
            )));
        }
        if parts.contains(&0) {
            return Err(Error::InvalidArgument("zero inside partition".into()));
        }
        Ok(Self { parts })
    }

    pub fn empty() -> Self {
        Self { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn weight(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn length(&self) -> usize {
        self.parts.len()
    }

    pub fn conjugate(&self) -> Partition {
        let first = self.parts.first().copied().unwrap_or(0);
        let parts = (1..=first)
            .map(|j| self.parts.iter().filter(|&&p| p >= j).count())
            .collect();
        Partition { parts }
    }

    /// Cells as zero-based (row, column) pairs.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(i, &p)| (0..p).map(move |j| (i, j)))
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.parts)
    }
}

/// All partitions of `k` with at most `max_length` parts in reverse-lexicographic order.
pub fn enumerate_partitions(k: usize, max_length: usize) -> Vec<Partition> {
    fn rec(remaining: usize, max_part: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition { parts: cur.clone() });
            return;
        }
        if slots == 0 {
            return;
        }
        for part in (1..=remaining.min(max_part)).rev() {
            if part * slots < remaining {
                break;
            }
            cur.push(part);
            rec(remaining - part, part, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, k, max_length, &mut Vec::new(), &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    pub row: usize,
    pub col: usize,
    pub arm: usize,
    pub leg: usize,
    pub coarm: usize,
    pub coleg: usize,
    pub upper_hook: f64,
    pub lower_hook: f64,
}

/// Arm/leg statistics and hook products of a partition at a given alpha.
#[derive(Debug, Clone, PartialEq)]
pub struct FerrersStats {
    pub cells: Vec<CellStats>,
    pub c: f64,
    pub c_prime: f64,
    pub w: f64,
}

impl FerrersStats {
    pub fn new(kappa: &Partition, alpha: f64) -> Self {
        let conj = kappa.conjugate();
        let mut cells = Vec::with_capacity(kappa.weight());
        let (mut c, mut c_prime) = (1.0, 1.0);
        for (i, j) in kappa.cells() {
            let arm = kappa.parts[i] - j - 1;
            let leg = conj.parts[j] - i - 1;
            let upper_hook = leg as f64 + alpha * (1.0 + arm as f64);
            let lower_hook = leg as f64 + 1.0 + alpha * arm as f64;
            c *= lower_hook;
            c_prime *= upper_hook;
            cells.push(CellStats { row: i, col: j, arm, leg, coarm: j, coleg: i, upper_hook, lower_hook });
        }
        Self { cells, c, c_prime, w: c * c_prime }
    }
}

/// Ordered diagonal of a matrix argument.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self { values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect() }
    }

    pub fn identity(m: usize) -> Self {
        Self::from_real(&vec![1.0; m])
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn zero_padded(&self, p: usize) -> Self {
        let mut values = self.values.clone();
        values.resize(p.max(values.len()), Complex64::new(0.0, 0.0));
        Self { values }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parts(v: &[Partition]) -> Vec<Vec<usize>> {
        v.iter().map(|p| p.parts().to_vec()).collect()
    }

    #[test]
    fn enumerate_small() {
        assert_eq!(
            parts(&enumerate_partitions(4, 4)),
            vec![vec![4], vec![3, 1], vec![2, 2], vec![2, 1, 1], vec![1, 1, 1, 1]]
        );
        assert_eq!(parts(&enumerate_partitions(0, 3)), vec![Vec::<usize>::new()]);
        assert_eq!(
            parts(&enumerate_partitions(6, 2)),
            vec![vec![6], vec![5, 1], vec![4, 2], vec![3, 3]]
        );
    }

    #[test]
    fn partition_counts() {
        let p: Vec<usize> = (0..=12).map(|k| enumerate_partitions(k, k.max(1)).len()).collect();
        assert_eq!(p, vec![1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77]);
    }

    #[test]
    fn rejects_increasing() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert_eq!(Partition::new(vec![2, 1, 0]).unwrap().length(), 2);
    }

    #[test]
    fn ferrers_arm_leg_sums() {
        let k = Partition::new(vec![4, 2, 1]).unwrap();
        let conj = k.conjugate();
        assert_eq!(conj.parts(), &[3, 2, 1, 1]);
        let st = FerrersStats::new(&k, 1.5);
        for cell in &st.cells {
            assert_eq!(cell.arm + cell.coarm + 1, k.parts()[cell.row]);
            assert_eq!(cell.leg + cell.coleg + 1, conj.parts()[cell.col]);
        }
        assert!((st.w - st.c * st.c_prime).abs() < 1e-9 * st.w);
    }

    #[test]
    fn hooks_at_alpha_one_are_classical() {
        let k = Partition::new(vec![3, 1]).unwrap();
        let st = FerrersStats::new(&k, 1.0);
        // hook lengths 4,2,1,1
        assert_eq!(st.c, 8.0);
        assert_eq!(st.c_prime, 8.0);
    }
}
