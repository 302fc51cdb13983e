use super::check_size;
use crate::io::{self, Format};
use crate::Failure;
use serde::Serialize;
use spikedet_core::likelihood::Variant;
use spikedet_core::power::{envelope, power_curve, PowerConfig, PowerRow, TestKind};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TestArg {
    LrLambda,
    LrMu,
    PointOptimalLambda,
    PointOptimalMu,
}

impl TestArg {
    fn kind(self) -> TestKind {
        match self {
            TestArg::LrLambda => TestKind::LrLambda,
            TestArg::LrMu => TestKind::LrMu,
            TestArg::PointOptimalLambda => TestKind::PointOptimal(Variant::Lambda),
            TestArg::PointOptimalMu => TestKind::PointOptimal(Variant::Mu),
        }
    }

    fn variant(self) -> Variant {
        match self {
            TestArg::LrLambda | TestArg::PointOptimalLambda => Variant::Lambda,
            _ => Variant::Mu,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    /// Alternative spike vector, comma separated; repeat for several rows.
    #[arg(long = "alt", required = true, value_parser = io::parse_vector)]
    pub alternatives: Vec<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = TestArg::LrLambda)]
    pub test: TestArg,
    #[arg(long, default_value = "1000", value_parser = io::parse_count)]
    pub reps: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub size: f64,
    /// Upper end of the sup-LR grid; defaults to 0.6 sqrt(p/n).
    #[arg(long)]
    pub grid_max: Option<f64>,
    #[arg(long, default_value_t = 25)]
    pub grid_points: usize,
    #[arg(long, default_value = "100000", value_parser = io::parse_count)]
    pub field_draws: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Serialize)]
struct Row {
    #[serde(flatten)]
    row: PowerRow,
    envelope: f64,
}

#[derive(Serialize)]
struct Report {
    schema: &'static str,
    command: &'static str,
    n: usize,
    p: usize,
    test: TestKind,
    seed: u64,
    size: f64,
    grid_max: f64,
    rows: Vec<Row>,
}

pub fn run(a: Args) -> Result<(), Failure> {
    check_size(a.size)?;
    if a.n == 0 || a.p == 0 {
        return Err(Failure::Input("--n and --p must be positive".into()));
    }
    let c = a.p as f64 / a.n as f64;
    let grid_max = a.grid_max.unwrap_or(0.6 * c.sqrt());
    let config = PowerConfig { alpha_size: a.size, h_bar: grid_max, per_axis: a.grid_points, field_draws: a.field_draws };
    let rows = power_curve(&a.alternatives, c, a.n, a.p, a.test.kind(), a.reps, a.seed, config)?;
    let rows: Vec<Row> = rows
        .into_iter()
        .map(|row| {
            let active: Vec<f64> = row.h.iter().copied().filter(|&x| x > 0.0).collect();
            let env = envelope(&active, c, a.size, a.test.variant()).map(|e| e.beta);
            env.map(|envelope| Row { row, envelope })
        })
        .collect::<Result<_, _>>()?;
    let text = match a.format {
        Format::Csv => {
            let r = a.alternatives[0].len();
            let mut header: Vec<String> = (1..=r).map(|i| format!("h{i}")).collect();
            header.extend(["rejection_rate", "std_error", "replications", "critical_value", "envelope"].map(String::from));
            let body: Vec<Vec<f64>> = rows
                .iter()
                .map(|x| {
                    x.row.h.iter().copied()
                        .chain([x.row.rejection_rate, x.row.std_error, x.row.replications as f64, x.row.critical_value, x.envelope])
                        .collect()
                })
                .collect();
            io::csv(&header, &body)
        }
        Format::Json => io::to_json(&Report {
            schema: io::SCHEMA,
            command: "simulate-power",
            n: a.n,
            p: a.p,
            test: a.test.kind(),
            seed: a.seed,
            size: a.size,
            grid_max,
            rows,
        })?,
    };
    io::emit(&text, &a.output)
}
