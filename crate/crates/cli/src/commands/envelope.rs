use super::check_size;
use crate::io::{self, Format};
use crate::Failure;
use serde::Serialize;
use spikedet_core::likelihood::Variant;
use spikedet_core::power::{axis_values, envelope};
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Aspect ratio p/n.
    #[arg(long)]
    pub c: f64,
    /// Number of spikes.
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    /// Spike value(s), comma separated; one value is repeated r times. Omit for a grid.
    #[arg(long, value_parser = io::parse_vector)]
    pub h: Option<::std::vec::Vec<f64>>,
    /// Upper end of the grid in each coordinate (r <= 2).
    #[arg(long)]
    pub grid_max: Option<f64>,
    #[arg(long, default_value_t = 21)]
    pub grid_points: usize,
    /// Test size.
    #[arg(long, default_value_t = 0.05)]
    pub size: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Serialize)]
struct Row {
    h: Vec<f64>,
    w_lambda: f64,
    beta_lambda: f64,
    w_mu: f64,
    beta_mu: f64,
}

#[derive(Serialize)]
struct Report {
    schema: &'static str,
    command: &'static str,
    c: f64,
    size: f64,
    formulas: Vec<&'static str>,
    rows: Vec<Row>,
}

pub fn run(a: Args) -> Result<(), Failure> {
    check_size(a.size)?;
    if a.r == 0 {
        return Err(Failure::Input("--r must be positive".into()));
    }
    let points: Vec<Vec<f64>> = match (&a.h, a.grid_max) {
        (Some(h), None) => vec![super::spike_vector(h, a.r)?],
        (None, Some(max)) => {
            if a.grid_points < 2 {
                return Err(Failure::Input("--grid-points must be at least 2".into()));
            }
            let axis = axis_values(max, a.grid_points);
            match a.r {
                1 => axis.iter().map(|&x| vec![x]).collect(),
                2 => axis.iter().flat_map(|&x| axis.iter().map(move |&y| vec![x, y])).collect(),
                _ => return Err(Failure::Input("grid output supports r <= 2; pass --h for larger r".into())),
            }
        }
        (Some(_), Some(_)) => return Err(Failure::Input("pass either --h or --grid-max, not both".into())),
        (None, None) => return Err(Failure::Input("pass --h or --grid-max".into())),
    };
    let mut rows = Vec::with_capacity(points.len());
    for h in points {
        let l = envelope(&h, a.c, a.size, Variant::Lambda)?;
        let m = envelope(&h, a.c, a.size, Variant::Mu)?;
        rows.push(Row { h, w_lambda: l.w, beta_lambda: l.beta, w_mu: m.w, beta_mu: m.beta });
    }
    let text = match a.format {
        Format::Csv => {
            let mut header: Vec<String> = (1..=a.r).map(|i| format!("h{i}")).collect();
            header.extend(["w_lambda", "beta_lambda", "w_mu", "beta_mu"].map(String::from));
            let body: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| r.h.iter().copied().chain([r.w_lambda, r.beta_lambda, r.w_mu, r.beta_mu]).collect())
                .collect();
            io::csv(&header, &body)
        }
        Format::Json => io::to_json(&Report {
            schema: io::SCHEMA,
            command: "envelope",
            c: a.c,
            size: a.size,
            formulas: vec!["envelope-lambda", "envelope-mu"],
            rows,
        })?,
    };
    io::emit(&text, &a.output)
}
