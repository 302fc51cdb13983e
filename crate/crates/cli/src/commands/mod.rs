pub mod detect;
pub mod envelope;
pub mod power;
pub mod validate;

use crate::Failure;
use spikedet_core::likelihood::Variant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum VariantArg {
    Lambda,
    Mu,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Lambda => Variant::Lambda,
            VariantArg::Mu => Variant::Mu,
        }
    }
}

pub fn check_size(size: f64) -> Result<(), Failure> {
    if size > 0.0 && size < 1.0 {
        Ok(())
    } else {
        Err(Failure::Input(format!("--size must lie in (0,1), got {size}")))
    }
}

/// Expands a single value to r copies; otherwise the length must equal r.
pub fn spike_vector(h: &[f64], r: usize) -> Result<Vec<f64>, Failure> {
    match h.len() {
        1 => Ok(vec![h[0]; r]),
        k if k == r => Ok(h.to_vec()),
        k => Err(Failure::Input(format!("got {k} spike values for r={r}"))),
    }
}
