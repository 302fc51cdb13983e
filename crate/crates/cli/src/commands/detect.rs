use super::{check_size, VariantArg};
use crate::io;
use crate::Failure;
use serde::Serialize;
use spikedet_core::likelihood::{lr_exact, lr_laplace, ExactOptions, LRResult, Variant};
use spikedet_core::mp::{EigenSample, MPLaw};
use spikedet_core::power::{simulate_limit_field, FieldGrid, SupLr};
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Eigenvalue file: one non-negative number per line.
    #[arg(long)]
    pub eigenvalues: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    /// Spike vector at which to report log L, comma separated.
    #[arg(long, value_parser = io::parse_vector)]
    pub h: Option<::std::vec::Vec<f64>>,
    #[arg(long, value_enum, default_value_t = VariantArg::Lambda)]
    pub variant: VariantArg,
    /// Number of spikes in the sup-LR grid.
    #[arg(long, default_value_t = 1)]
    pub grid_r: usize,
    /// Upper end of the sup-LR grid; defaults to 0.6 sqrt(p/n).
    #[arg(long)]
    pub grid_max: Option<f64>,
    #[arg(long, default_value_t = 25)]
    pub grid_points: usize,
    #[arg(long, default_value = "100000", value_parser = io::parse_count)]
    pub field_draws: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub size: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Serialize)]
struct Inputs {
    n: usize,
    p: usize,
    eigenvalues: usize,
    c_p: f64,
    trace: f64,
    variant: Variant,
    seed: u64,
    size: f64,
}

#[derive(Serialize)]
struct Point {
    exact: Option<LRResult>,
    exact_skipped: Option<String>,
    laplace: LRResult,
}

#[derive(Serialize)]
struct SupReport {
    statistic: f64,
    grid_r: usize,
    grid_max: f64,
    grid_points: usize,
    field_draws: usize,
    field_rank: usize,
    field_min_eigenvalue: f64,
    critical_value: f64,
    p_value: f64,
    reject: bool,
}

#[derive(Serialize)]
struct Report {
    schema: &'static str,
    command: &'static str,
    inputs: Inputs,
    formulas: Vec<&'static str>,
    point: Option<Point>,
    sup_lr: SupReport,
}

pub fn run(a: Args) -> Result<(), Failure> {
    check_size(a.size)?;
    let values = io::read_eigenvalues(&a.eigenvalues)?;
    let count = values.len();
    let sample = EigenSample::new(values, a.n, a.p)?;
    let law = MPLaw::from_dims(a.n, a.p)?;
    let variant: Variant = a.variant.into();
    let mut formulas = vec!["laplace-asymptotic", "gaussian-field-sup"];
    let point = match &a.h {
        Some(h) => {
            let laplace = lr_laplace(h, &sample, &law, variant)?;
            let (exact, exact_skipped) = match lr_exact(h, &sample, &law, variant, ExactOptions::default()) {
                Ok(r) => {
                    formulas.insert(0, "exact-contour");
                    (Some(r), None)
                }
                Err(e) => (None, Some(e.to_string())),
            };
            Some(Point { exact, exact_skipped, laplace })
        }
        None => None,
    };
    let grid_max = a.grid_max.unwrap_or(0.6 * law.c.sqrt());
    let grid = FieldGrid::uniform(a.grid_r, grid_max, a.grid_points, law.c, variant)?;
    let sim = simulate_limit_field(&grid, a.field_draws, a.seed)?;
    let statistic = SupLr::new(&grid, law)?.statistic(&sample)?;
    let critical_value = sim.critical_value(a.size);
    let report = Report {
        schema: io::SCHEMA,
        command: "detect",
        inputs: Inputs { n: a.n, p: a.p, eigenvalues: count, c_p: law.c, trace: sample.s, variant, seed: a.seed, size: a.size },
        formulas,
        point,
        sup_lr: SupReport {
            statistic,
            grid_r: a.grid_r,
            grid_max,
            grid_points: a.grid_points,
            field_draws: a.field_draws,
            field_rank: sim.rank,
            field_min_eigenvalue: sim.min_eigenvalue,
            critical_value,
            p_value: sim.p_value(statistic),
            reject: statistic > critical_value,
        },
    };
    io::emit(&io::to_json(&report)?, &a.output)
}
