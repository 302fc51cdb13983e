//! Closed contours in the complex plane, trapezoid quadrature along them and
//! continuous branch tracking for fractional powers.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

pub const DEFAULT_NODES_PER_UNIT: f64 = 40.0;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_NODE_BUDGET: usize = 1 << 16;
const CLEARANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Axis-aligned rectangle traversed from the midpoint of its right edge.
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    /// Circle traversed from angle zero.
    Circle { center: Complex64, radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourPath {
    pub shape: Shape,
    pub nodes: Vec<Complex64>,
    /// Quadrature weights, i.e. the dz attached to each node.
    pub weights: Vec<Complex64>,
    pub closed: bool,
    pub counter_clockwise: bool,
    pub nodes_per_unit: f64,
}

// Periodizing map with psi'(u) = (16/5) sin^6(pi u).
fn psi(u: f64) -> f64 {
    let t = 2.0 * PI * u;
    u - 1.5 / (2.0 * PI) * t.sin() + 0.6 / (4.0 * PI) * (2.0 * t).sin() - 0.1 / (6.0 * PI) * (3.0 * t).sin()
}

fn dpsi(u: f64) -> f64 {
    let t = 2.0 * PI * u;
    1.0 - 1.5 * t.cos() + 0.6 * (2.0 * t).cos() - 0.1 * (3.0 * t).cos()
}

fn segments_for(len: f64, density: f64) -> usize {
    let m = (len * density).ceil() as usize;
    let m = m.max(8);
    m + m % 2
}

impl ContourPath {
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64, nodes_per_unit: f64) -> Self {
        assert!(x0 < x1 && y0 < y1, "degenerate rectangle");
        let shape = Shape::Rectangle { x0, x1, y0, y1 };
        Self::from_shape(shape, nodes_per_unit)
    }

    pub fn circle(center: Complex64, radius: f64, nodes_per_unit: f64) -> Self {
        assert!(radius > 0.0, "radius must be positive");
        Self::from_shape(Shape::Circle { center, radius }, nodes_per_unit)
    }

    fn from_shape(shape: Shape, nodes_per_unit: f64) -> Self {
        let (nodes, weights) = match shape {
            Shape::Rectangle { x0, x1, y0, y1 } => {
                let corners = [
                    Complex64::new(x1, y0),
                    Complex64::new(x1, y1),
                    Complex64::new(x0, y1),
                    Complex64::new(x0, y0),
                ];
                let mut nodes = Vec::new();
                let mut weights = Vec::new();
                let mut start = 0;
                for s in 0..4 {
                    let (a, b) = (corners[s], corners[(s + 1) % 4]);
                    let m = segments_for((b - a).norm(), nodes_per_unit);
                    if s == 0 {
                        start = m / 2;
                    }
                    for k in 0..m {
                        let u = k as f64 / m as f64;
                        nodes.push(a + (b - a) * psi(u));
                        weights.push((b - a) * (dpsi(u) / m as f64));
                    }
                }
                nodes.rotate_left(start);
                weights.rotate_left(start);
                (nodes, weights)
            }
            Shape::Circle { center, radius } => {
                let n = segments_for(2.0 * PI * radius, nodes_per_unit).max(16);
                (0..n)
                    .map(|k| {
                        let e = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
                        (center + e * radius, Complex64::new(0.0, radius) * e * (2.0 * PI / n as f64))
                    })
                    .unzip()
            }
        };
        Self { shape, nodes, weights, closed: true, counter_clockwise: true, nodes_per_unit }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Same shape at twice the node density.
    pub fn refined(&self) -> Self {
        let mut out = Self::from_shape(self.shape, 2.0 * self.nodes_per_unit);
        if !self.counter_clockwise {
            out = out.reversed();
        }
        out
    }

    pub fn reversed(&self) -> Self {
        let mut nodes = self.nodes.clone();
        let mut weights: Vec<Complex64> = self.weights.iter().map(|w| -w).collect();
        nodes.reverse();
        weights.reverse();
        Self { nodes, weights, counter_clockwise: !self.counter_clockwise, ..self.clone() }
    }

    /// Image under z -> phi z.
    pub fn scaled(&self, phi: f64) -> Self {
        assert!(phi > 0.0);
        let shape = match self.shape {
            Shape::Rectangle { x0, x1, y0, y1 } => Shape::Rectangle { x0: x0 * phi, x1: x1 * phi, y0: y0 * phi, y1: y1 * phi },
            Shape::Circle { center, radius } => Shape::Circle { center: center * phi, radius: radius * phi },
        };
        let mut out = Self::from_shape(shape, self.nodes_per_unit / phi);
        if !self.counter_clockwise {
            out = out.reversed();
        }
        out
    }

    pub fn arc_length(&self) -> f64 {
        match self.shape {
            Shape::Rectangle { x0, x1, y0, y1 } => 2.0 * ((x1 - x0) + (y1 - y0)),
            Shape::Circle { radius, .. } => 2.0 * PI * radius,
        }
    }

    /// Winding number about `point` by the discrete argument principle.
    pub fn winding_number(&self, point: Complex64) -> i64 {
        let n = self.nodes.len();
        let mut total = 0.0;
        for k in 0..n {
            let a = self.nodes[k] - point;
            let b = self.nodes[(k + 1) % n] - point;
            total += (b / a).arg();
        }
        (total / (2.0 * PI)).round() as i64
    }

    /// Fails when a point lies within 1e-12 of a node or edge.
    pub fn check_clearance(&self, points: &[Complex64]) -> Result<()> {
        for &pt in points {
            if self.distance_to(pt) < CLEARANCE {
                return Err(Error::TooClose(format!("{pt}"), CLEARANCE));
            }
        }
        Ok(())
    }

    pub fn distance_to(&self, pt: Complex64) -> f64 {
        match self.shape {
            Shape::Rectangle { x0, x1, y0, y1 } => {
                let seg = |a: Complex64, b: Complex64| {
                    let d = b - a;
                    let t = (((pt - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
                    (a + d * t - pt).norm()
                };
                let c = [Complex64::new(x1, y0), Complex64::new(x1, y1), Complex64::new(x0, y1), Complex64::new(x0, y0)];
                (0..4).map(|s| seg(c[s], c[(s + 1) % 4])).fold(f64::INFINITY, f64::min)
            }
            Shape::Circle { center, radius } => ((pt - center).norm() - radius).abs(),
        }
    }
}

/// Axis-aligned counter-clockwise rectangle around `points` with clearance `margin`.
pub fn encircle_points(points: &[Complex64], margin: f64, nodes_per_unit: f64) -> Result<ContourPath> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no points to encircle".into()));
    }
    if !(margin > 0.0) {
        return Err(Error::InvalidArgument("margin must be positive".into()));
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        x0 = x0.min(p.re);
        x1 = x1.max(p.re);
        y0 = y0.min(p.im);
        y1 = y1.max(p.im);
    }
    Ok(ContourPath::rectangle(x0 - margin, x1 + margin, y0 - margin, y1 + margin, nodes_per_unit))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    /// Change between the last two node doublings.
    pub error: f64,
    /// Nodes per path at the final level.
    pub nodes: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub tol: f64,
    pub node_budget: usize,
    /// Absolute floor relative to the L1 mass of the integrand.
    pub floor: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, node_budget: DEFAULT_NODE_BUDGET, floor: 1e-13 }
    }
}

/// Node doubling on every path until the estimate settles. `eval` returns the
/// weighted sum and its L1 mass for the given discretization.
pub fn converge<F>(paths: &[ContourPath], opts: QuadOptions, eval: F) -> Result<Quadrature>
where
    F: Fn(&[ContourPath]) -> Result<(Complex64, f64)>,
{
    let out = converge_many(paths, opts, |ps| Ok(vec![eval(ps)?]))?;
    Ok(out[0])
}

/// Vector version of [`converge`]: every component must settle.
pub fn converge_many<F>(paths: &[ContourPath], opts: QuadOptions, eval: F) -> Result<Vec<Quadrature>>
where
    F: Fn(&[ContourPath]) -> Result<Vec<(Complex64, f64)>>,
{
    let mut paths = paths.to_vec();
    let mut prev = eval(&paths)?;
    loop {
        let next_paths: Vec<ContourPath> = paths.iter().map(|p| p.refined()).collect();
        let nodes = next_paths.iter().map(|p| p.len()).max().unwrap_or(0);
        let worst = |next: &[(Complex64, f64)], prev: &[(Complex64, f64)]| {
            next.iter()
                .zip(prev)
                .map(|(a, b)| {
                    let change = (a.0 - b.0).norm();
                    let allowed = (opts.tol * a.0.norm()).max(opts.floor * a.1);
                    (change, change / allowed.max(f64::MIN_POSITIVE))
                })
                .fold((0.0, 0.0), |acc: (f64, f64), x| if x.1 > acc.1 { x } else { acc })
        };
        if nodes > opts.node_budget {
            return Err(Error::NonConvergence {
                what: format!("contour quadrature at {} nodes", paths.iter().map(|p| p.len()).max().unwrap_or(0)),
                change: f64::NAN,
                tol: opts.tol,
            });
        }
        let next = eval(&next_paths)?;
        let (_, ratio) = worst(&next, &prev);
        if ratio <= 1.0 {
            return Ok(next
                .iter()
                .zip(&prev)
                .map(|(a, b)| Quadrature { value: a.0, error: (a.0 - b.0).norm(), nodes })
                .collect());
        }
        prev = next;
        paths = next_paths;
    }
}

/// Node values and weights reduced in node order.
pub fn weighted_sum(values: &[Complex64], weights: &[Complex64]) -> (Complex64, f64) {
    let mut s = Complex64::new(0.0, 0.0);
    let mut mass = 0.0;
    for (v, w) in values.iter().zip(weights) {
        let t = v * w;
        s += t;
        mass += t.norm();
    }
    (s, mass)
}

/// Trapezoid quadrature of the closed integral of f(z) dz with node doubling.
pub fn integrate<F>(path: &ContourPath, f: F) -> Result<Quadrature>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    integrate_with(path, QuadOptions::default(), f)
}

pub fn integrate_with<F>(path: &ContourPath, opts: QuadOptions, f: F) -> Result<Quadrature>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    converge(std::slice::from_ref(path), opts, |ps| {
        let p = &ps[0];
        let values: Vec<Complex64> = p.nodes.par_iter().map(|&z| f(z)).collect();
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("integrand not finite at {}", p.nodes[k])));
        }
        Ok(weighted_sum(&values, &p.weights))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchValues {
    pub values: Vec<Complex64>,
    /// Continued value back at the first node divided by the starting value.
    pub closing_ratio: Complex64,
}

/// prod_s (z - b_s)^exponent along the path with each argument continued from
/// its principal value at the first node.
pub fn fractional_power_product(path: &ContourPath, base_points: &[Complex64], exponent: f64) -> Result<BranchValues> {
    path.check_clearance(base_points)?;
    let n = path.nodes.len();
    let mut theta: Vec<f64> = base_points.iter().map(|&b| (path.nodes[0] - b).arg()).collect();
    let mut values = Vec::with_capacity(n);
    let step = |theta: &mut [f64], from: Complex64, to: Complex64, node: usize| -> Result<()> {
        for (t, &b) in theta.iter_mut().zip(base_points) {
            let d = ((to - b) / (from - b)).arg();
            if d.abs() > PI / 2.0 {
                return Err(Error::Branch { node, jump: d.abs() });
            }
            *t += d;
        }
        Ok(())
    };
    let eval = |theta: &[f64], z: Complex64| {
        let mut ln = Complex64::new(0.0, 0.0);
        for (t, &b) in theta.iter().zip(base_points) {
            ln += Complex64::new((z - b).norm().ln(), *t);
        }
        (ln * exponent).exp()
    };
    values.push(eval(&theta, path.nodes[0]));
    for k in 1..n {
        step(&mut theta, path.nodes[k - 1], path.nodes[k], k)?;
        values.push(eval(&theta, path.nodes[k]));
    }
    let closing_ratio = if path.closed {
        step(&mut theta, path.nodes[n - 1], path.nodes[0], 0)?;
        eval(&theta, path.nodes[0]) / values[0]
    } else {
        Complex64::new(1.0, 0.0)
    };
    Ok(BranchValues { values, closing_ratio })
}

/// Closed rectangle through a real saddle point: the vertical segment from the
/// saddle up to height `height`, the horizontal segment back to
/// `truncation_abscissa`, and their conjugate reflections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteepestContour {
    pub saddle: f64,
    pub height: f64,
    pub truncation_abscissa: f64,
}

impl SteepestContour {
    pub fn new(saddle: f64, truncation_abscissa: f64) -> Self {
        Self { saddle, height: 3.0 * saddle.abs(), truncation_abscissa }
    }

    pub fn path(&self, nodes_per_unit: f64) -> ContourPath {
        ContourPath::rectangle(self.truncation_abscissa, self.saddle, -self.height, self.height, nodes_per_unit)
    }

    /// Largest abscissa left of `left_limit` at which `log_ratio` (log modulus
    /// of the integrand relative to the saddle) drops below ln 1e-18, but not
    /// beyond -10 times the saddle.
    pub fn truncation<F: Fn(f64) -> f64>(saddle: f64, left_limit: f64, log_ratio: F) -> f64 {
        let floor = -10.0 * saddle.abs();
        let target = (1e-18f64).ln();
        let step = 0.05 * saddle.abs().max(1.0);
        let mut x = left_limit;
        while x > floor {
            if log_ratio(x) < target {
                return x;
            }
            x -= step;
        }
        floor.min(left_limit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn residue_simple_pole() {
        let path = ContourPath::circle(c(0.0, 0.0), 1.0, DEFAULT_NODES_PER_UNIT);
        let q = integrate(&path, |z| 1.0 / z).unwrap();
        assert!((q.value - c(0.0, 2.0 * PI)).norm() < 1e-10);
    }

    #[test]
    fn analytic_integrand_vanishes() {
        let path = ContourPath::rectangle(-1.0, 3.0, -0.5, 2.0, DEFAULT_NODES_PER_UNIT);
        let q = integrate(&path, |z| z).unwrap();
        assert!(q.value.norm() < 1e-10);
    }

    #[test]
    fn double_pole() {
        let path = ContourPath::circle(c(1.0, 0.0), 0.7, DEFAULT_NODES_PER_UNIT);
        let q = integrate(&path, |z| z.exp() / ((z - 1.0) * (z - 1.0))).unwrap();
        assert!((q.value - c(0.0, 2.0 * PI * 1f64.exp())).norm() < 1e-8);
    }

    #[test]
    fn rectangle_geometry_and_winding() {
        let path = encircle_points(&[c(0.0, 0.0), c(4.0, 0.0)], 0.5, DEFAULT_NODES_PER_UNIT).unwrap();
        assert_eq!(path.shape, Shape::Rectangle { x0: -0.5, x1: 4.5, y0: -0.5, y1: 0.5 });
        assert_eq!(path.winding_number(c(2.0, 0.0)), 1);
        assert!((path.nodes[0] - c(4.5, 0.0)).norm() < 1e-14);
        let p2 = encircle_points(&[c(1.0, 0.0)], 1.0, DEFAULT_NODES_PER_UNIT).unwrap();
        assert_eq!(p2.winding_number(c(5.0, 0.0)), 0);
        assert_eq!(p2.reversed().winding_number(c(1.0, 0.0)), -1);
    }

    #[test]
    fn rectangle_residues() {
        let path = ContourPath::rectangle(-1.0, 2.0, -1.0, 1.0, DEFAULT_NODES_PER_UNIT);
        let q = integrate(&path, |z| 1.0 / ((z - 0.5) * (z + 0.2))).unwrap();
        // residues cancel
        assert!(q.value.norm() < 1e-10);
        let q = integrate(&path, |z| z.exp() / (z - 0.5)).unwrap();
        assert!((q.value - c(0.0, 2.0 * PI * 0.5f64.exp())).norm() < 1e-9);
    }

    #[test]
    fn integer_power_has_no_branch() {
        let path = ContourPath::circle(c(0.5, 0.0), 2.0, 10.0);
        let b = [c(0.0, 0.0), c(1.0, 0.2)];
        let v = fractional_power_product(&path, &b, -1.0).unwrap();
        for (z, val) in path.nodes.iter().zip(&v.values) {
            let direct = 1.0 / ((z - b[0]) * (z - b[1]));
            assert!((val - direct).norm() < 1e-12 * direct.norm());
        }
    }

    #[test]
    fn half_power_even_count_closes() {
        let path = ContourPath::rectangle(-1.0, 3.0, -1.0, 1.0, 20.0);
        let v = fractional_power_product(&path, &[c(0.0, 0.0), c(2.0, 0.0)], -0.5).unwrap();
        assert!((v.closing_ratio - 1.0).norm() < 1e-12);
        let v = fractional_power_product(&path, &[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)], -0.5).unwrap();
        assert!((v.closing_ratio + 1.0).norm() < 1e-12);
    }

    #[test]
    fn branch_jump_detected() {
        let path = ContourPath::circle(c(0.0, 0.0), 1.0, 0.1);
        let mut coarse = path.clone();
        coarse.nodes = vec![c(1.0, 0.0), c(-1.0, 0.01), c(0.0, -1.0)];
        coarse.weights = vec![c(0.0, 0.0); 3];
        assert!(matches!(
            fractional_power_product(&coarse, &[c(0.0, 0.0)], 0.5),
            Err(Error::Branch { .. })
        ));
    }

    #[test]
    fn too_close_rejected() {
        let path = ContourPath::rectangle(0.0, 1.0, -1.0, 1.0, 10.0);
        assert!(path.check_clearance(&[c(1.0, 0.3)]).is_err());
        assert!(path.check_clearance(&[c(0.5, 0.3)]).is_ok());
    }

    #[test]
    fn steepest_truncation_floor() {
        let s = SteepestContour::truncation(4.0, -0.5, |_| 0.0);
        assert_eq!(s, -40.0);
        let s = SteepestContour::truncation(4.0, -0.5, |x| 5.0 * x);
        assert!(s <= -0.5 && 5.0 * s < (1e-18f64).ln());
    }
}
