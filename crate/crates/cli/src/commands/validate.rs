use crate::io;
use crate::Failure;
use num_complex::Complex64;
use serde::Serialize;
use spikedet_core::contour::{encircle_points, DEFAULT_NODES_PER_UNIT};
use spikedet_core::hciz::{corollary1_determinant, f00_rank_deficient, hciz_determinantal, hciz_monte_carlo, AlphaParam, RankDeficientArg};
use spikedet_core::likelihood::{lr_exact, lr_laplace, lr_monte_carlo, ContourChoice, ExactOptions, Variant};
use spikedet_core::mp::{delta_p, MPLaw};
use spikedet_core::partitions::{enumerate_partitions, f00_series, jack_c, torus_norm_closed_form, torus_generating_sides, torus_inner_product, Spectrum};
use spikedet_core::randmat::{linear_statistics, rng_for, sample_spiked_eigs_stream, SpikeParams};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    All,
    Hciz,
    Jack,
    Mp,
    Likelihood,
    #[value(name = "lemmaA3", alias = "linear-statistics")]
    LemmaA3,
    #[value(name = "null-moments")]
    NullMoments,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    /// Dimension of the HCIZ instance (1..=4).
    #[arg(long, default_value_t = 3)]
    pub p: usize,
    /// Monte Carlo draws for the group-integral oracles.
    #[arg(long, default_value = "200000", value_parser = io::parse_count)]
    pub draws: usize,
    /// Dimension n = p of the simulated null samples.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value = "2000", value_parser = io::parse_count)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Serialize)]
struct Check {
    suite: &'static str,
    name: String,
    measured: f64,
    target: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct Report {
    schema: &'static str,
    command: &'static str,
    seed: u64,
    pass: bool,
    checks: Vec<Check>,
}

struct Checks {
    suite: &'static str,
    out: Vec<Check>,
}

impl Checks {
    /// Passes when |measured - target| <= tolerance.
    fn abs(&mut self, name: impl Into<String>, measured: f64, target: f64, tolerance: f64) {
        let pass = (measured - target).abs() <= tolerance;
        self.out.push(Check { suite: self.suite, name: name.into(), measured, target, tolerance, pass });
    }

    /// Passes when |measured / target - 1| <= tolerance.
    fn rel(&mut self, name: impl Into<String>, measured: f64, target: f64, tolerance: f64) {
        let pass = (measured / target - 1.0).abs() <= tolerance;
        self.out.push(Check { suite: self.suite, name: name.into(), measured, target, tolerance, pass });
    }
}

fn rel_diff(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0))
}

fn hciz_suite(a: &Args, c: &mut Checks) -> Result<(), Failure> {
    use rand::Rng;
    if !(1..=4).contains(&a.p) {
        return Err(Failure::Input("--p must lie in 1..=4 for the HCIZ suite".into()));
    }
    let p = a.p;
    let r = p.saturating_sub(1).max(1);
    let mut rng = rng_for(a.seed, 0);
    let av: Vec<f64> = (0..r).map(|_| rng.random_range(0.05..1.0)).collect();
    let bv: Vec<f64> = (0..p).map(|_| rng.random_range(0.0..1.0)).collect();
    let b = Spectrum::from_real(&bv);
    let arg = RankDeficientArg::new(Spectrum::from_real(&av), p)?;
    let series = f00_series(1.0, &arg.full(), &b, 30)?.value;
    let det = hciz_determinantal(&arg.full(), &b)?;
    let path = encircle_points(&b.values, 0.5, DEFAULT_NODES_PER_UNIT)?;
    let contour = f00_rank_deficient(AlphaParam::from_beta(2)?, &arg, &b, &path)?.value;
    let cor = corollary1_determinant(&arg, &b, &path)?.value;
    c.abs("determinantal vs series (relative)", rel_diff(det, series), 0.0, 1e-6);
    c.abs("contour reduction vs series (relative)", rel_diff(contour, series), 0.0, 1e-6);
    c.abs("single-integral determinant vs series (relative)", rel_diff(cor, series), 0.0, 1e-6);
    let mc = hciz_monte_carlo(&arg.full(), &b, a.draws, a.seed)?;
    c.abs("Haar Monte Carlo z-score", (mc.mean - series).norm() / mc.std_error, 0.0, 3.0);
    Ok(())
}

fn jack_suite(c: &mut Checks) -> Result<(), Failure> {
    let x = Spectrum::from_real(&[0.4, -0.3, 0.9]);
    let tr: f64 = 1.0;
    let mut worst = 0.0f64;
    for alpha in [0.5, 1.0, 2.0] {
        for k in 0..=6 {
            let s: Complex64 = enumerate_partitions(k, 3).iter().map(|kp| jack_c(kp, alpha, &x)).sum::<Result<Complex64, _>>()?;
            worst = worst.max((s - tr.powi(k as i32)).norm());
        }
    }
    c.abs("partition-sum identity, k <= 6", worst, 0.0, 1e-10);
    let mut diag = 0.0f64;
    let mut off = 0.0f64;
    for alpha in [1.0, 2.0] {
        for r in 1..=2 {
            let parts: Vec<_> = (0..=2).flat_map(|k| enumerate_partitions(k, r)).collect();
            for kp in &parts {
                for tp in &parts {
                    let v = torus_inner_product(kp, tp, alpha, r, 8, 1e-10)?;
                    if kp == tp {
                        let want = torus_norm_closed_form(kp, alpha, r)?;
                        diag = diag.max((v.re - want).abs() / want);
                    } else {
                        off = off.max(v.norm());
                    }
                }
            }
        }
    }
    c.abs("torus norm vs closed form (relative)", diag, 0.0, 1e-6);
    c.abs("torus orthogonality", off, 0.0, 1e-6);
    let (lhs, rhs) = torus_generating_sides(2.0, &Spectrum::from_real(&[0.3, 0.2]), &Spectrum::from_real(&[0.25, -0.1]), 20)?;
    c.abs("generating identity (relative)", rel_diff(rhs, lhs), 0.0, 1e-8);
    Ok(())
}

fn mp_suite(c: &mut Checks) -> Result<(), Failure> {
    for ratio in [0.5, 1.0, 2.0] {
        let law = MPLaw::new(ratio)?;
        c.abs(format!("total mass at c={ratio}"), law.total_mass(), 1.0, 1e-8);
        let z = Complex64::new(law.upper + 1.5, 0.7);
        let q = law.stieltjes_quadrature(z)?;
        c.abs(format!("Stieltjes transform quadrature vs closed form at c={ratio}"), rel_diff(q, law.stieltjes(z)), 0.0, 1e-9);
    }
    Ok(())
}

fn likelihood_suite(a: &Args, c: &mut Checks) -> Result<(), Failure> {
    let small = sample_spiked_eigs_stream(&SpikeParams::null(30, 30)?, a.seed, 1)?;
    let law = MPLaw::from_dims(30, 30)?;
    for v in [Variant::Lambda, Variant::Mu] {
        let e = lr_exact(&[0.3], &small, &law, v, ExactOptions::default())?.log_lr.exp();
        let mc = lr_monte_carlo(&[0.3], &small, v, a.draws, a.seed)?;
        c.abs(format!("exact vs group-integral Monte Carlo z-score ({v:?})"), (e - mc.mean.re) / mc.std_error, 0.0, 3.0);
    }
    let mid = sample_spiked_eigs_stream(&SpikeParams::null(50, 50)?, a.seed, 2)?;
    let law = MPLaw::from_dims(50, 50)?;
    let generic = ExactOptions { contour: ContourChoice::Generic { margin: 1.0 }, ..Default::default() };
    for v in [Variant::Lambda, Variant::Mu] {
        let h = [0.35, 0.15];
        let s = lr_exact(&h, &mid, &law, v, ExactOptions::default())?.log_lr;
        let g = lr_exact(&h, &mid, &law, v, generic)?.log_lr;
        c.abs(format!("steepest vs generic contour ({v:?})"), s - g, 0.0, 1e-6);
    }
    let n = a.n.min(400);
    let big = sample_spiked_eigs_stream(&SpikeParams::null(n, n)?, a.seed, 3)?;
    let law = MPLaw::from_dims(n, n)?;
    let e = lr_exact(&[0.4], &big, &law, Variant::Lambda, ExactOptions::default())?.log_lr;
    let l = lr_laplace(&[0.4], &big, &law, Variant::Lambda)?.log_lr;
    c.abs(format!("exact vs Laplace at n=p={n}"), e - l, 0.0, 0.1);
    Ok(())
}

fn null_samples(a: &Args) -> Result<Vec<spikedet_core::mp::EigenSample>, Failure> {
    let params = SpikeParams::null(a.n, a.n)?;
    (0..a.reps).map(|k| sample_spiked_eigs_stream(&params, a.seed, 1000 + k as u64).map_err(Failure::from)).collect()
}

fn linear_statistics_suite(a: &Args, c: &mut Checks) -> Result<(), Failure> {
    let samples = null_samples(a)?;
    let law = MPLaw::from_dims(a.n, a.n)?;
    let h = 0.4;
    let z = Complex64::new((1.0 + h) * (1.0 + h) / h, 0.0);
    let st: Vec<(f64, f64)> = samples.iter().map(linear_statistics).collect();
    let s: Vec<f64> = st.iter().map(|x| x.0).collect();
    let t: Vec<f64> = st.iter().map(|x| x.1).collect();
    let d: Vec<f64> = samples.iter().map(|x| delta_p(x, &law, z).map(|v| v.re)).collect::<Result<_, _>>()?;
    let (ms, vs) = mean_var(&s);
    let (_, vt) = mean_var(&t);
    let (md, _) = mean_var(&d);
    let prods: Vec<f64> = s.iter().zip(&d).map(|(x, y)| (x - ms) * (y - md)).collect();
    let (cov, vp) = mean_var(&prods);
    c.rel("Var(S - p)", vs, 1.0, 0.10);
    c.rel("Var(T - (1 + c) p)", vt, 18.0, 0.10);
    c.abs("Cov(S - p, Delta at the saddle)", cov, -h, 3.0 * (vp / prods.len() as f64).sqrt());
    Ok(())
}

fn null_moments_suite(a: &Args, c: &mut Checks) -> Result<(), Failure> {
    let samples = null_samples(a)?;
    let law = MPLaw::from_dims(a.n, a.n)?;
    let x: f64 = 0.16;
    for (v, m0, v0) in [
        (Variant::Lambda, 0.5 * (1.0 - x).ln(), -(1.0 - x).ln()),
        (Variant::Mu, 0.5 * ((1.0 - x).ln() + x), -((1.0 - x).ln() + x)),
    ] {
        let ll: Vec<f64> = samples.iter().map(|s| lr_laplace(&[0.4], s, &law, v).map(|r| r.log_lr)).collect::<Result<_, _>>()?;
        let (m, var) = mean_var(&ll);
        c.abs(format!("null mean of log L ({v:?})"), m, m0, 3.0 * (var / ll.len() as f64).sqrt());
        let se = (2.0 / (ll.len() as f64 - 1.0)).sqrt();
        c.rel(format!("null variance of log L ({v:?})"), var, v0, (0.01 + 9.0 * se * se).sqrt());
    }
    Ok(())
}

pub fn run(a: Args) -> Result<(), Failure> {
    let mut checks = Vec::new();
    let wanted = |s: Suite| a.suite == Suite::All || a.suite == s;
    type SuiteFn<'x> = Box<dyn Fn(&mut Checks) -> Result<(), Failure> + 'x>;
    let suites: Vec<(Suite, &'static str, SuiteFn)> = vec![
        (Suite::Hciz, "hciz", Box::new(|c| hciz_suite(&a, c))),
        (Suite::Jack, "jack", Box::new(jack_suite)),
        (Suite::Mp, "mp", Box::new(mp_suite)),
        (Suite::Likelihood, "likelihood", Box::new(|c| likelihood_suite(&a, c))),
        (Suite::LemmaA3, "lemmaA3", Box::new(|c| linear_statistics_suite(&a, c))),
        (Suite::NullMoments, "null-moments", Box::new(|c| null_moments_suite(&a, c))),
    ];
    for (kind, name, f) in suites {
        if wanted(kind) {
            let mut c = Checks { suite: name, out: Vec::new() };
            f(&mut c)?;
            checks.extend(c.out);
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    let report = Report { schema: io::SCHEMA, command: "validate", seed: a.seed, pass, checks };
    io::emit(&io::to_json(&report)?, &a.output)?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}
