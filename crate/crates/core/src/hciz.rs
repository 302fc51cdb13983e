//! Closed forms, contour reductions and Monte Carlo estimates of the
//! HCIZ-type function 0F0^(alpha)(A, B).

use crate::contour::{converge, integrate, ContourPath, QuadOptions, Quadrature, Shape};
use crate::error::{Error, Result};
use crate::partitions::{F00Polynomial, Spectrum};
use crate::randmat::{haar_columns_into, rng_for};
use crate::special::{det_complex, factorial, ln_factorial, ln_gamma, vandermonde};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

const DISTINCT_TOL: f64 = 1e-10;
const MC_CHUNK: usize = 1 << 15;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// alpha = 2/beta with beta a positive integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlphaParam {
    pub beta: u32,
}

impl AlphaParam {
    pub fn from_beta(beta: u32) -> Result<Self> {
        if beta == 0 {
            return Err(Error::InvalidArgument("beta must be a positive integer".into()));
        }
        Ok(Self { beta })
    }

    pub fn from_alpha(alpha: f64) -> Result<Self> {
        let beta = 2.0 / alpha;
        if !(beta.is_finite() && beta >= 1.0 - 1e-12 && (beta - beta.round()).abs() < 1e-12) {
            return Err(Error::InvalidArgument(format!("alpha={alpha} is not of the form 2/beta")));
        }
        Self::from_beta(beta.round() as u32)
    }

    pub fn alpha(&self) -> f64 {
        2.0 / self.beta as f64
    }

    pub fn is_odd(&self) -> bool {
        self.beta % 2 == 1
    }

    pub fn check_parity(&self, p: usize, r: usize) -> Result<()> {
        let value = p + 1 - r;
        if self.is_odd() && value % 2 == 1 {
            return Err(Error::Parity { beta: self.beta, value });
        }
        Ok(())
    }
}

/// diag(a_1..a_r, 0..0) in dimension p.
#[derive(Debug, Clone, PartialEq)]
pub struct RankDeficientArg {
    pub nonzero: Spectrum,
    pub p: usize,
}

impl RankDeficientArg {
    pub fn new(nonzero: Spectrum, p: usize) -> Result<Self> {
        let r = nonzero.dimension();
        if r == 0 || r > p {
            return Err(Error::InvalidArgument(format!("need 1 <= r <= p, got r={r}, p={p}")));
        }
        if nonzero.values.iter().any(|v| v.norm() == 0.0) {
            return Err(Error::InvalidArgument("nonzero block contains a zero".into()));
        }
        Ok(Self { nonzero, p })
    }

    pub fn r(&self) -> usize {
        self.nonzero.dimension()
    }

    pub fn full(&self) -> Spectrum {
        self.nonzero.zero_padded(self.p)
    }
}

fn check_distinct(x: &[Complex64], what: &str) -> Result<()> {
    for i in 0..x.len() {
        for j in 0..i {
            if (x[i] - x[j]).norm() < DISTINCT_TOL {
                return Err(Error::Degenerate(format!("{what} has coincident entries {} and {}", x[j], x[i])));
            }
        }
    }
    Ok(())
}

/// Returns ln of det(e^{a_i b_j}) as a complex logarithm, scaling each row by its largest entry.
fn log_det_exp(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let p = a.len();
    let mut shift = 0.0;
    let mut m = Vec::with_capacity(p * p);
    for ai in a {
        let s = b.iter().map(|bj| (ai * bj).re).fold(f64::NEG_INFINITY, f64::max);
        shift += s;
        m.extend(b.iter().map(|bj| (ai * bj - s).exp()));
    }
    det_complex(p, &m).ln() + shift
}

/// prod_{j<p} j! det(e^{a_i b_j}) / (V(a) V(b)).
pub fn hciz_determinantal(a: &Spectrum, b: &Spectrum) -> Result<Complex64> {
    let p = a.dimension();
    if p != b.dimension() {
        return Err(Error::DimensionMismatch(p, b.dimension()));
    }
    check_distinct(&a.values, "a")?;
    check_distinct(&b.values, "b")?;
    let ln_const: f64 = (1..p).map(ln_factorial).sum();
    let ln = log_det_exp(&a.values, &b.values) + ln_const - vandermonde(&a.values).ln() - vandermonde(&b.values).ln();
    Ok(ln.exp())
}

/// Perturbs coincident entries by relative `rel` steps; the flag reports whether anything moved.
pub fn jitter_coincident(values: &[f64], rel: f64) -> (Vec<f64>, bool) {
    let mut out = values.to_vec();
    let mut moved = false;
    for i in 0..out.len() {
        let mut bump = 0;
        while (0..i).any(|j| (out[i] - out[j]).abs() <= rel * out[i].abs().max(out[j].abs()).max(f64::MIN_POSITIVE)) {
            bump += 1;
            out[i] = values[i] * (1.0 + rel * 2.0 * bump as f64) + if values[i] == 0.0 { rel * bump as f64 } else { 0.0 };
            moved = true;
        }
    }
    (out, moved)
}

fn omega_constant(alpha: AlphaParam, arg: &RankDeficientArg) -> Complex64 {
    let al = alpha.alpha();
    let (p, r) = (arg.p, arg.r());
    let mut ln = 0.0;
    for j in 1..=r {
        ln += ln_gamma((p + 1 - j) as f64 / al) + ln_gamma(1.0 / al) - ln_gamma((r + 1 - j) as f64 / al);
    }
    let phase = PI * (r * (r - 1)) as f64 / (2.0 * al);
    let expo = 1 - ((p - r + 1) * alpha.beta as usize / 2) as i32;
    let a_prod: Complex64 = arg.nonzero.values.iter().map(|a| a.powi(expo)).product();
    Complex64::from_polar(ln.exp(), phase) * a_prod
}

/// The weight of the rank-deficient reduction at the points z, given
/// branch_state[j] = prod_s (z_j - b_s)^(-1/alpha) on the chosen branch.
pub fn omega_weight(
    alpha: AlphaParam,
    arg: &RankDeficientArg,
    b: &Spectrum,
    z: &[Complex64],
    branch_state: &[Complex64],
) -> Result<Complex64> {
    let r = arg.r();
    if b.dimension() != arg.p {
        return Err(Error::DimensionMismatch(b.dimension(), arg.p));
    }
    if z.len() != r || branch_state.len() != r {
        return Err(Error::DimensionMismatch(z.len(), r));
    }
    alpha.check_parity(arg.p, r)?;
    let v = vandermonde(z).powi(alpha.beta as i32);
    let br: Complex64 = branch_state.iter().product();
    Ok(omega_constant(alpha, arg) * v * br)
}

enum Inner {
    Hciz { a: Vec<Complex64>, ln_const: Complex64 },
    Series(F00Polynomial),
}

impl Inner {
    fn new(alpha: AlphaParam, arg: &RankDeficientArg, radius: f64) -> Result<Self> {
        if alpha.beta == 2 {
            let a = arg.nonzero.values.clone();
            check_distinct(&a, "nonzero block")?;
            let r = a.len();
            let ln_const = c((1..r).map(ln_factorial).sum::<f64>()) - vandermonde(&a).ln();
            Ok(Inner::Hciz { a, ln_const })
        } else {
            let degree = F00Polynomial::degree_for(&arg.nonzero, radius);
            Ok(Inner::Series(F00Polynomial::new(alpha.alpha(), &arg.nonzero, degree)?))
        }
    }

    /// Inner function times V(z)^beta.
    fn eval_with_vandermonde(&self, z: &[Complex64], beta: u32) -> Complex64 {
        match self {
            Inner::Hciz { a, ln_const } => {
                // 0F0(a, z) V(z)^2 = const det(e^{a_i z_j}) V(z)
                let r = a.len();
                let m: Vec<Complex64> = a.iter().flat_map(|ai| z.iter().map(move |zj| (ai * zj).exp())).collect();
                det_complex(r, &m) * vandermonde(z) * ln_const.exp()
            }
            Inner::Series(poly) => poly.eval(z) * vandermonde(z).powi(beta as i32),
        }
    }

    /// Inner function alone.
    fn eval(&self, z: &[Complex64]) -> Complex64 {
        match self {
            Inner::Hciz { a, ln_const } => {
                let r = a.len();
                let m: Vec<Complex64> = a.iter().flat_map(|ai| z.iter().map(move |zj| (ai * zj).exp())).collect();
                let v = vandermonde(z);
                if v.norm() == 0.0 {
                    return Complex64::new(f64::NAN, 0.0);
                }
                det_complex(r, &m) / v * ln_const.exp()
            }
            Inner::Series(poly) => poly.eval(z),
        }
    }
}

fn max_radius(path: &ContourPath) -> f64 {
    path.nodes.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Rank-deficient reduction: an r-fold contour integral around the entries of b.
pub fn f00_rank_deficient(alpha: AlphaParam, arg: &RankDeficientArg, b: &Spectrum, contour: &ContourPath) -> Result<Quadrature> {
    f00_rank_deficient_with(alpha, arg, b, contour, QuadOptions::default())
}

pub fn f00_rank_deficient_with(
    alpha: AlphaParam,
    arg: &RankDeficientArg,
    b: &Spectrum,
    contour: &ContourPath,
    opts: QuadOptions,
) -> Result<Quadrature> {
    let (p, r) = (arg.p, arg.r());
    if b.dimension() != p {
        return Err(Error::DimensionMismatch(b.dimension(), p));
    }
    if r > 3 {
        return Err(Error::CostGuard(format!("r={r} exceeds 3 for the tensor quadrature")));
    }
    alpha.check_parity(p, r)?;
    contour.check_clearance(&b.values)?;
    for &bs in &b.values {
        if contour.winding_number(bs) != 1 {
            return Err(Error::InvalidArgument(format!("contour does not encircle {bs} once counter-clockwise")));
        }
    }
    if alpha.is_odd() && r >= 2 {
        if r > 2 {
            return Err(Error::CostGuard("odd beta is supported for r <= 2".into()));
        }
        return torus_form_r2(alpha, arg, b, contour, opts);
    }
    let radius = max_radius(contour);
    let inner = Inner::new(alpha, arg, radius)?;
    let konst = omega_constant(alpha, arg) / (factorial(r) * (2.0 * PI).powi(r as i32)) * Complex64::i().powi(-(r as i32));
    let exponent = -1.0 / alpha.alpha();
    converge(std::slice::from_ref(contour), opts, |ps| {
        let path = &ps[0];
        let branch = crate::contour::fractional_power_product(path, &b.values, exponent)?;
        if (branch.closing_ratio - 1.0).norm() > 1e-8 {
            return Err(Error::InvalidArgument("integrand is not single-valued on the contour".into()));
        }
        let n = path.len();
        let wb: Vec<Complex64> = branch.values.iter().zip(&path.weights).map(|(v, w)| v * w).collect();
        let rest = n.pow(r as u32 - 1);
        let partial: Vec<(Complex64, f64)> = (0..n)
            .into_par_iter()
            .map(|k0| {
                let mut s = Complex64::new(0.0, 0.0);
                let mut mass = 0.0;
                if wb[k0].norm() == 0.0 {
                    return (s, mass);
                }
                let mut z = [path.nodes[k0]; 3];
                for idx in 0..rest {
                    let mut rem = idx;
                    let mut w = wb[k0];
                    for zj in z.iter_mut().take(r).skip(1) {
                        let k = rem % n;
                        rem /= n;
                        *zj = path.nodes[k];
                        w *= wb[k];
                    }
                    if w.norm() == 0.0 {
                        continue;
                    }
                    let t = inner.eval_with_vandermonde(&z[..r], alpha.beta) * w;
                    s += t;
                    mass += t.norm();
                }
                (s, mass)
            })
            .collect();
        let (s, mass) = partial.iter().fold((Complex64::new(0.0, 0.0), 0.0), |acc, t| (acc.0 + t.0, acc.1 + t.1));
        Ok((s * konst, mass * konst.norm()))
    })
}

/// r = 2 with odd beta: integrand written on a circle centred at the origin
/// in the single-valued torus form, with z_2 = z_1 e^{i phi}.
fn torus_form_r2(alpha: AlphaParam, arg: &RankDeficientArg, b: &Spectrum, contour: &ContourPath, opts: QuadOptions) -> Result<Quadrature> {
    let p = arg.p;
    let al = alpha.alpha();
    let bmax = b.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let radius = match contour.shape {
        Shape::Circle { center, radius } if center.norm() == 0.0 => radius,
        _ => max_radius(contour).max(1.5 * bmax + 0.5),
    };
    if radius <= bmax {
        return Err(Error::InvalidArgument("circle must enclose all base points".into()));
    }
    let inner = Inner::new(alpha, arg, radius)?;
    let mut ln = 0.0;
    for j in 1..=2usize {
        ln += ln_gamma((p + 1 - j) as f64 / al) + ln_gamma(1.0 / al) - ln_gamma((3 - j) as f64 / al);
    }
    let zpow = -(((p - 1) * alpha.beta as usize / 2) as i32);
    let expo = 1 + zpow;
    let a_prod: Complex64 = arg.nonzero.values.iter().map(|a| a.powi(expo)).product();
    // The phase i of (z_2 - z_1) cancels against the branch of z_2^{-p/alpha}
    // continued clockwise from z_1, so no residual sign remains.
    // 1/(2! (2 pi i)^2) and dz_1 dz_2 = (i z_1)(i z_2) dtheta dphi
    let konst = a_prod * (ln.exp() / (2.0 * (2.0 * PI).powi(2)));
    let one = Complex64::new(1.0, 0.0);
    let base = ContourPath::circle(Complex64::new(0.0, 0.0), radius, contour.nodes_per_unit);
    converge(std::slice::from_ref(&base), opts, |ps| {
        let n = ps[0].len();
        let m = n;
        let terms: Vec<(Complex64, f64)> = (0..n)
            .into_par_iter()
            .map(|ti| {
                let z1 = Complex64::from_polar(radius, 2.0 * PI * ti as f64 / n as f64);
                let mut s = Complex64::new(0.0, 0.0);
                let mut mass = 0.0;
                for k in 1..m {
                    let u = k as f64 / m as f64;
                    let t = 2.0 * PI * u;
                    let phi = 2.0 * PI * (u - 1.5 / (2.0 * PI) * t.sin() + 0.6 / (4.0 * PI) * (2.0 * t).sin() - 0.1 / (6.0 * PI) * (3.0 * t).sin());
                    let dphi = 2.0 * PI * (1.0 - 1.5 * t.cos() + 0.6 * (2.0 * t).cos() - 0.1 * (3.0 * t).cos()) / m as f64;
                    let e = Complex64::from_polar(1.0, phi);
                    let z2 = z1 * e;
                    let pair = (one - e.conj()).powf(1.0 / al) * (one - e).powf(1.0 / al);
                    let mut f = pair * z1.powi(zpow) * z2.powi(zpow) * inner.eval(&[z1, z2]);
                    for bs in &b.values {
                        f *= (one - bs / z1).powf(-1.0 / al) * (one - bs / z2).powf(-1.0 / al);
                    }
                    // i z_1 * i z_2 from the parametrization
                    let term = f * (-(z1 * z2)) * (2.0 * PI / n as f64) * dphi;
                    s += term;
                    mass += term.norm();
                }
                (s, mass)
            })
            .collect();
        let (s, mass) = terms.iter().fold((Complex64::new(0.0, 0.0), 0.0), |acc, t| (acc.0 + t.0, acc.1 + t.1));
        Ok((s * konst / Complex64::i().powi(2), mass * konst.norm()))
    })
}

/// Result of a determinant of single contour integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetValue {
    pub value: Complex64,
    pub error: f64,
}

/// Determinant of an r x r matrix of quadratures with first-order error propagation.
pub(crate) fn det_with_error(r: usize, entries: &[Quadrature]) -> DetValue {
    let vals: Vec<Complex64> = entries.iter().map(|q| q.value).collect();
    let d = det_complex(r, &vals);
    let mut err = 0.0;
    for k in 0..entries.len() {
        let mut v = vals.clone();
        v[k] += entries[k].error;
        err += (det_complex(r, &v) - d).norm();
    }
    DetValue { value: d, error: err }
}

/// alpha = 1 determinant of single contour integrals.
pub fn corollary1_determinant(arg: &RankDeficientArg, b: &Spectrum, contour: &ContourPath) -> Result<DetValue> {
    let (p, r) = (arg.p, arg.r());
    if b.dimension() != p {
        return Err(Error::DimensionMismatch(b.dimension(), p));
    }
    let a = &arg.nonzero.values;
    check_distinct(a, "nonzero block")?;
    contour.check_clearance(&b.values)?;
    let mut entries = Vec::with_capacity(r * r);
    for ai in a {
        for j in 0..r {
            let q = integrate(contour, |z| {
                let mut den = Complex64::new(1.0, 0.0);
                for bs in &b.values {
                    den *= z - bs;
                }
                (ai * z).exp() * z.powi(j as i32) / den
            })?;
            let scale = Complex64::new(0.0, 2.0 * PI);
            entries.push(Quadrature { value: q.value / scale, error: q.error / (2.0 * PI), nodes: q.nodes });
        }
    }
    let det = det_with_error(r, &entries);
    let sign = if (r * (r - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let mut ln = -vandermonde(a).ln();
    for (j, aj) in a.iter().enumerate() {
        ln += c(ln_factorial(p - j - 1)) - aj.ln() * (p - r) as f64;
    }
    let k = ln.exp() * sign;
    Ok(DetValue { value: det.value * k, error: det.error * k.norm() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: Complex64,
    pub std_error: f64,
    pub draws: usize,
}

/// Monte Carlo mean of f over Haar frames of `rows` columns in C^p, chunked
/// into independent streams and reduced in chunk order.
pub(crate) fn haar_mc<F>(p: usize, rows: usize, draws: usize, seed: u64, f: F) -> McEstimate
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    let chunks = draws.div_ceil(MC_CHUNK);
    let partial: Vec<(Complex64, f64, usize)> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let count = MC_CHUNK.min(draws - ci * MC_CHUNK);
            let mut rng = rng_for(seed, ci as u64);
            let mut buf = vec![Complex64::new(0.0, 0.0); p * rows];
            let (mut s, mut s2) = (Complex64::new(0.0, 0.0), 0.0);
            for _ in 0..count {
                if rows > 0 {
                    haar_columns_into(p, rows, &mut rng, &mut buf);
                }
                let v = f(&buf);
                s += v;
                s2 += v.norm_sqr();
            }
            (s, s2, count)
        })
        .collect();
    let (mut s, mut s2, mut n) = (Complex64::new(0.0, 0.0), 0.0, 0usize);
    for (a, b, k) in partial {
        s += a;
        s2 += b;
        n += k;
    }
    let mean = s / n as f64;
    let var = (s2 / n as f64 - mean.norm_sqr()).max(0.0) * n as f64 / (n.max(2) - 1) as f64;
    McEstimate { mean, std_error: (var / n as f64).sqrt(), draws: n }
}

/// Average of exp(tr(A U B U*)) over Haar U.
pub fn hciz_monte_carlo(a: &Spectrum, b: &Spectrum, draws: usize, seed: u64) -> Result<McEstimate> {
    let p = a.dimension();
    if p != b.dimension() {
        return Err(Error::DimensionMismatch(p, b.dimension()));
    }
    if p == 0 || draws == 0 {
        return Err(Error::InvalidArgument("need p >= 1 and draws >= 1".into()));
    }
    let active: Vec<Complex64> = a.values.iter().copied().filter(|v| v.norm() != 0.0).collect();
    let bv = b.values.clone();
    // rows of a Haar unitary attached to nonzero a_i form a Haar frame
    Ok(haar_mc(p, active.len(), draws, seed, |u| {
        let mut t = Complex64::new(0.0, 0.0);
        for (i, ai) in active.iter().enumerate() {
            let col = &u[i * p..(i + 1) * p];
            let q: Complex64 = col.iter().zip(&bv).map(|(x, bj)| bj * x.norm_sqr()).sum();
            t += ai * q;
        }
        t.exp()
    }))
}
