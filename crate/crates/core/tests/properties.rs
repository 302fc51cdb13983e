use num_complex::Complex64;
use proptest::prelude::*;
use spikedet_core::contour::{encircle_points, integrate, DEFAULT_NODES_PER_UNIT};
use spikedet_core::hciz::hciz_determinantal;
use spikedet_core::likelihood::Variant;
use spikedet_core::mp::MPLaw;
use spikedet_core::partitions::{enumerate_partitions, jack_c, Spectrum};
use spikedet_core::power::{envelope, noncentrality, FieldGrid};

fn partition_count(k: usize, max_part: usize) -> u64 {
    let mut t = vec![0u64; k + 1];
    t[0] = 1;
    for part in 1..=max_part.min(k) {
        for w in part..=k {
            t[w] += t[w - part];
        }
    }
    t[k]
}

fn distinct(v: &[f64]) -> bool {
    v.iter().enumerate().all(|(i, a)| v[i + 1..].iter().all(|b| (a - b).abs() > 0.05))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partitions_are_well_formed(k in 0usize..12, len in 1usize..6) {
        let ps = enumerate_partitions(k, len);
        // bounded length is equivalent to bounded largest part by conjugation
        prop_assert_eq!(ps.len() as u64, partition_count(k, len));
        for p in &ps {
            prop_assert_eq!(p.weight(), k);
            prop_assert!(p.length() <= len);
            prop_assert!(p.parts().windows(2).all(|w| w[0] >= w[1]));
            prop_assert_eq!(&p.conjugate().conjugate(), p);
            prop_assert_eq!(p.conjugate().weight(), k);
        }
    }

    #[test]
    fn jack_partition_sum(alpha in 0.3f64..3.0, x in prop::collection::vec(-1.0f64..1.0, 1..4), k in 0usize..6) {
        let spec = Spectrum::from_real(&x);
        let mut total = Complex64::new(0.0, 0.0);
        for kappa in enumerate_partitions(k, x.len()) {
            total += jack_c(&kappa, alpha, &spec).unwrap();
        }
        let want = x.iter().sum::<f64>().powi(k as i32);
        prop_assert!((total.re - want).abs() <= 1e-9 * (1.0 + want.abs()), "{} vs {}", total, want);
        prop_assert!(total.im.abs() <= 1e-9);
    }

    #[test]
    fn jack_is_homogeneous(alpha in 0.3f64..3.0, x in prop::collection::vec(-1.0f64..1.0, 2..4), t in 0.2f64..2.0) {
        let scaled: Vec<f64> = x.iter().map(|v| v * t).collect();
        for kappa in enumerate_partitions(3, x.len()) {
            let a = jack_c(&kappa, alpha, &Spectrum::from_real(&scaled)).unwrap();
            let b = jack_c(&kappa, alpha, &Spectrum::from_real(&x)).unwrap() * t.powi(3);
            prop_assert!((a - b).norm() <= 1e-10 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn hciz_symmetry_and_shift(
        a in prop::collection::vec(0.0f64..1.0, 3),
        b in prop::collection::vec(0.0f64..1.0, 3),
        s in -0.5f64..0.5,
    ) {
        prop_assume!(distinct(&a) && distinct(&b));
        let (sa, sb) = (Spectrum::from_real(&a), Spectrum::from_real(&b));
        let f = hciz_determinantal(&sa, &sb).unwrap();
        let g = hciz_determinantal(&sb, &sa).unwrap();
        prop_assert!((f - g).norm() <= 1e-10 * f.norm());
        let shifted: Vec<f64> = a.iter().map(|v| v + s).collect();
        let h = hciz_determinantal(&Spectrum::from_real(&shifted), &sb).unwrap();
        let want = f * (s * b.iter().sum::<f64>()).exp();
        prop_assert!((h - want).norm() <= 1e-9 * want.norm());
    }

    #[test]
    fn cauchy_integral_over_encircling_contour(pts in prop::collection::vec((-2.0f64..2.0, -1.0f64..1.0), 1..4)) {
        let pts: Vec<Complex64> = pts.into_iter().map(|(x, y)| Complex64::new(x, y)).collect();
        let path = encircle_points(&pts, 0.5, DEFAULT_NODES_PER_UNIT).unwrap();
        for &z in &pts {
            prop_assert_eq!(path.winding_number(z), 1);
        }
        let q = integrate(&path, |z| pts.iter().map(|b| 1.0 / (z - b)).sum()).unwrap();
        let want = Complex64::new(0.0, 2.0 * std::f64::consts::PI * pts.len() as f64);
        prop_assert!((q.value - want).norm() <= 1e-8);
    }

    #[test]
    fn mp_stieltjes_matches_quadrature(c in 0.1f64..4.0, re in -3.0f64..12.0, im in 0.05f64..3.0) {
        let law = MPLaw::new(c).unwrap();
        let z = Complex64::new(re, im);
        let closed = law.stieltjes(z);
        let quad = law.stieltjes_quadrature(z).unwrap();
        prop_assert!((closed - quad).norm() <= 1e-6 * (1.0 + closed.norm()), "{} vs {}", closed, quad);
        prop_assert!((law.total_mass() - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn envelope_is_ordered(c in 0.1f64..3.0, f1 in 0.0f64..0.95, f2 in 0.0f64..0.95, size in 0.01f64..0.2) {
        let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
        let root = c.sqrt();
        for v in [Variant::Lambda, Variant::Mu] {
            let a = envelope(&[lo * root], c, size, v).unwrap();
            let b = envelope(&[hi * root], c, size, v).unwrap();
            prop_assert!(a.beta >= size - 1e-9);
            prop_assert!(b.beta >= a.beta - 1e-12);
        }
        let l = envelope(&[hi * root, lo * root], c, size, Variant::Lambda).unwrap();
        let m = envelope(&[hi * root, lo * root], c, size, Variant::Mu).unwrap();
        prop_assert!(l.beta >= m.beta - 1e-12);
        let w = noncentrality(&[lo * root, hi * root], c, Variant::Lambda).unwrap();
        prop_assert!((w - l.w).abs() <= 1e-12 * (1.0 + w));
    }

    #[test]
    fn field_grid_covariance_is_consistent(c in 0.2f64..3.0, hb in 0.1f64..0.9, per in 2usize..6) {
        let grid = FieldGrid::uniform(1, hb * c.sqrt(), per, c, Variant::Lambda).unwrap();
        let k = grid.len();
        for i in 0..k {
            // the log-LR mean is minus half its variance under the null
            prop_assert!((grid.mean[i] + 0.5 * grid.cov[i * k + i]).abs() <= 1e-12);
            for j in 0..k {
                prop_assert!((grid.cov[i * k + j] - grid.cov[j * k + i]).abs() <= 1e-14);
                let bound = (grid.cov[i * k + i] * grid.cov[j * k + j]).sqrt();
                prop_assert!(grid.cov[i * k + j] <= bound + 1e-12);
            }
        }
    }
}
