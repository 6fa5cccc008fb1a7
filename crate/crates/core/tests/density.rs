mod common;

use common::normal_draws;
use gelkde::density::uniform_grid;
use gelkde::special::{norm_cdf, norm_pdf};
use gelkde::{
    amise_bandwidth_cdf, amise_bandwidth_pdf, gaussian_kernel, positive_part_normalize,
    rearrange_cdf, weighted_kcdf, weighted_kde, CurveEstimate, CurveKind, WeightedSample,
};
use proptest::prelude::*;

fn k4(x: f64) -> f64 {
    (3.0 - x * x) * norm_pdf(x) / 2.0
}

fn big_k4(x: f64) -> f64 {
    norm_cdf(x) + x * norm_pdf(x) / 2.0
}

fn random_weights(seed: u64, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = normal_draws(seed, n).iter().map(|z| z.exp()).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|w| w / s).collect()
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    (1..x.len())
        .map(|i| 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]))
        .sum()
}

#[test]
fn kde_and_kcdf_match_double_loops() {
    let pts = normal_draws(1, 50);
    let w = random_weights(2, 50);
    let grid = uniform_grid(-4.0, 4.0, 97);
    let b = 0.45;
    let sample = WeightedSample::new(pts.clone(), w.clone()).unwrap();
    for r in [1usize, 2] {
        let kern = gaussian_kernel(r).unwrap();
        let (kf, cf): (fn(f64) -> f64, fn(f64) -> f64) = if r == 1 {
            (norm_pdf, norm_cdf)
        } else {
            (k4, big_k4)
        };
        let f = weighted_kde(&sample, &kern, b, &grid).unwrap();
        let cdf = weighted_kcdf(&sample, &kern, b, &grid).unwrap();
        for (j, &u) in grid.iter().enumerate() {
            let mut fa = 0.0;
            let mut ca = 0.0;
            for i in 0..50 {
                fa += w[i] * kf((u - pts[i]) / b) / b;
                ca += w[i] * cf((u - pts[i]) / b);
            }
            assert!((f.values[j] - fa).abs() < 1e-12, "r={r} pdf at {u}");
            assert!((cdf.values[j] - ca).abs() < 1e-12, "r={r} cdf at {u}");
        }
    }
}

#[test]
fn single_point_and_small_bandwidth_limits() {
    let kern = gaussian_kernel(2).unwrap();
    let s = WeightedSample::new(vec![0.3], vec![1.0]).unwrap();
    let f = weighted_kde(&s, &kern, 0.7, &[0.0, 1.0]).unwrap();
    assert!((f.values[1] - k4(0.7 / 0.7) / 0.7).abs() < 1e-15);
    // tiny bandwidth: the kernel cdf becomes the empirical cdf between order statistics
    let pts = vec![-1.0, 0.0, 2.0, 3.0];
    let s = WeightedSample::uniform(pts).unwrap();
    let kern = gaussian_kernel(1).unwrap();
    let c = weighted_kcdf(&s, &kern, 1e-4, &[-1.5, -0.5, 1.0, 2.5, 3.5]).unwrap();
    for (v, e) in c.values.iter().zip([0.0, 0.25, 0.5, 0.75, 1.0]) {
        assert!((v - e).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kde_is_linear_in_the_weights(seed in 0u64..10_000, alpha in 0.0f64..1.0, b in 0.1f64..1.5) {
        let pts = normal_draws(seed, 30);
        let (p, q) = (random_weights(seed + 1, 30), random_weights(seed + 2, 30));
        let mix: Vec<f64> = p.iter().zip(&q).map(|(a, c)| alpha * a + (1.0 - alpha) * c).collect();
        let kern = gaussian_kernel(2).unwrap();
        let grid = uniform_grid(-3.0, 3.0, 61);
        let f = |w: Vec<f64>| weighted_kde(&WeightedSample::new(pts.clone(), w).unwrap(), &kern, b, &grid).unwrap().values;
        let (fm, fp, fq) = (f(mix), f(p), f(q));
        for j in 0..grid.len() {
            prop_assert!((fm[j] - alpha * fp[j] - (1.0 - alpha) * fq[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn estimates_are_translation_equivariant(seed in 0u64..10_000, t in -3.0f64..3.0) {
        let pts = normal_draws(seed, 25);
        let w = random_weights(seed + 7, 25);
        let kern = gaussian_kernel(2).unwrap();
        let grid = uniform_grid(-3.0, 3.0, 41);
        let shifted: Vec<f64> = pts.iter().map(|p| p + t).collect();
        let sgrid: Vec<f64> = grid.iter().map(|g| g + t).collect();
        let a = WeightedSample::new(pts, w.clone()).unwrap();
        let b = WeightedSample::new(shifted, w).unwrap();
        let (fa, fb) = (weighted_kde(&a, &kern, 0.5, &grid).unwrap(), weighted_kde(&b, &kern, 0.5, &sgrid).unwrap());
        let (ca, cb) = (weighted_kcdf(&a, &kern, 0.5, &grid).unwrap(), weighted_kcdf(&b, &kern, 0.5, &sgrid).unwrap());
        for j in 0..grid.len() {
            prop_assert!((fa.values[j] - fb.values[j]).abs() < 1e-12);
            prop_assert!((ca.values[j] - cb.values[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn rearrangement_moves_towards_monotone_references(seed in 0u64..10_000) {
        // fourth-order kernel, small n: the raw cdf estimate dips and overshoots
        let pts = normal_draws(seed, 20);
        let kern = gaussian_kernel(2).unwrap();
        let grid = uniform_grid(-5.0, 5.0, 400);
        let raw = weighted_kcdf(&WeightedSample::uniform(pts).unwrap(), &kern, 0.35, &grid).unwrap();
        let fixed = rearrange_cdf(&raw).unwrap();
        prop_assert!(fixed.values.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(fixed.values.iter().all(|v| (0.0..=1.0).contains(v)));
        let truth: Vec<f64> = grid.iter().map(|&u| norm_cdf(u)).collect();
        let dist = |v: &[f64]| v.iter().zip(&truth).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        prop_assert!(dist(&fixed.values) <= dist(&raw.values) + 1e-15);
    }
}

#[test]
fn kcdf_is_the_running_integral_of_kde() {
    let pts = normal_draws(9, 40);
    let w = random_weights(10, 40);
    let s = WeightedSample::new(pts, w).unwrap();
    let kern = gaussian_kernel(2).unwrap();
    let grid = uniform_grid(-9.0, 6.0, 15_001);
    let f = weighted_kde(&s, &kern, 0.4, &grid).unwrap();
    let c = weighted_kcdf(&s, &kern, 0.4, &grid).unwrap();
    let mut acc = c.values[0];
    for j in 1..grid.len() {
        acc += 0.5 * (grid[j] - grid[j - 1]) * (f.values[j] + f.values[j - 1]);
        assert!((acc - c.values[j]).abs() < 1e-4, "at {}", grid[j]);
    }
}

fn pdf_curve(grid: Vec<f64>, values: Vec<f64>) -> CurveEstimate {
    CurveEstimate {
        grid,
        values,
        bandwidth: 1.0,
        kind: CurveKind::Pdf,
        corrections: Default::default(),
    }
}

#[test]
fn positive_part_cases() {
    let grid = uniform_grid(-8.0, 8.0, 1601);
    let phi: Vec<f64> = grid.iter().map(|&u| norm_pdf(u)).collect();
    let m = trapezoid(&grid, &phi);
    let phi: Vec<f64> = phi.iter().map(|v| v / m).collect();
    let same = positive_part_normalize(&pdf_curve(grid.clone(), phi.clone())).unwrap();
    for (a, b) in same.values.iter().zip(&phi) {
        assert!((a - b).abs() < 1e-14);
    }

    let half: Vec<f64> = phi.iter().map(|v| 0.5 * v).collect();
    let up = positive_part_normalize(&pdf_curve(grid.clone(), half)).unwrap();
    for (a, b) in up.values.iter().zip(&phi) {
        assert!((a - b).abs() < 1e-12);
    }

    // positive lobes with mass 1.03 plus negative side lobes
    let lobes: Vec<f64> = grid
        .iter()
        .map(|&u| {
            1.03 * norm_pdf(u)
                - 0.2 * (norm_pdf(u - 3.0) + norm_pdf(u + 3.0)) * (u.abs() > 2.5) as u8 as f64
        })
        .collect();
    let pos: Vec<f64> = lobes.iter().map(|v| v.max(0.0)).collect();
    let target = trapezoid(&grid, &pos);
    assert!(target > 1.0);
    let out = positive_part_normalize(&pdf_curve(grid.clone(), lobes.clone())).unwrap();
    assert!((trapezoid(&grid, &out.values) - 1.0).abs() <= 1e-6);
    assert!(out.values.iter().all(|&v| v >= 0.0));
    // independent bisection on the monotone mass function
    let mass = |xi: f64| {
        trapezoid(
            &grid,
            &lobes.iter().map(|v| (v - xi).max(0.0)).collect::<Vec<_>>(),
        )
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    for (a, v) in out.values.iter().zip(&lobes) {
        assert!((a - (v - lo).max(0.0)).abs() < 1e-8);
    }

    let narrow = pdf_curve(uniform_grid(-0.2, 0.2, 11), vec![0.4; 11]);
    assert!(positive_part_normalize(&narrow).is_err());
}

#[test]
fn rearrangement_examples() {
    let c = |v: Vec<f64>| CurveEstimate {
        grid: (0..v.len()).map(|i| i as f64).collect(),
        values: v,
        bandwidth: 1.0,
        kind: CurveKind::Cdf,
        corrections: Default::default(),
    };
    assert_eq!(
        rearrange_cdf(&c(vec![0.1, 0.3, 0.2])).unwrap().values,
        vec![0.1, 0.2, 0.3]
    );
    assert_eq!(
        rearrange_cdf(&c(vec![0.0, 1.02, 0.5])).unwrap().values,
        vec![0.0, 0.5, 1.0]
    );
    assert_eq!(
        rearrange_cdf(&c(vec![0.0, 0.4, 0.9])).unwrap().values,
        vec![0.0, 0.4, 0.9]
    );
}

#[test]
fn bandwidth_closed_forms() {
    let k = gaussian_kernel(2).unwrap();
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let r4 = 105.0 / (32.0 * sqrt_pi);
    let b = amise_bandwidth_pdf(&k, r4, 100).unwrap();
    assert!((b - (216.0f64 / 105.0).powf(1.0 / 9.0) * 100f64.powf(-1.0 / 9.0)).abs() < 1e-12);
    assert!((b - 0.6496).abs() < 1e-4);
    for &(rough, n) in &[(0.3, 50usize), (2.0, 4000)] {
        let b = amise_bandwidth_pdf(&k, rough, n).unwrap();
        let closed = (27.0 / (4.0 * sqrt_pi)).powf(1.0 / 9.0)
            * rough.powf(-1.0 / 9.0)
            * (n as f64).powf(-1.0 / 9.0);
        assert!((b - closed).abs() < 1e-12 * closed);
        let bc = amise_bandwidth_cdf(&k, rough, n).unwrap();
        let closed = (7.0 / (2.0 * sqrt_pi)).powf(1.0 / 7.0)
            * rough.powf(-1.0 / 7.0)
            * (n as f64).powf(-1.0 / 7.0);
        assert!((bc - closed).abs() < 1e-12 * closed, "{bc} vs {closed}");
    }
    let b1 = amise_bandwidth_pdf(&k, 1.0, 100).unwrap();
    let b2 = amise_bandwidth_pdf(&k, 2.0, 100).unwrap();
    assert!((b2 / b1 - 2f64.powf(-1.0 / 9.0)).abs() < 1e-14);
    let c1 = amise_bandwidth_cdf(&k, 1.0, 100).unwrap();
    let c4 = amise_bandwidth_cdf(&k, 1.0, 400).unwrap();
    assert!((c4 / c1 - 4f64.powf(-1.0 / 7.0)).abs() < 1e-14);
    assert!(amise_bandwidth_pdf(&k, 0.0, 100).is_err());
}

#[test]
fn kernel_functionals_of_builtins() {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let k1 = gaussian_kernel(1).unwrap();
    assert!((k1.roughness() - 1.0 / (2.0 * sqrt_pi)).abs() < 1e-8);
    assert!((k1.psi() - 1.0 / sqrt_pi).abs() < 1e-8);
    assert!((k1.mu(2) - 1.0).abs() < 1e-8);
    let k2 = gaussian_kernel(2).unwrap();
    assert!((k2.mu(0) - 1.0).abs() < 1e-8);
    for j in [1, 2, 3, 5] {
        assert!(k2.mu(j).abs() < 1e-8, "mu_{j}");
    }
    assert!((k2.mu(4) + 3.0).abs() < 1e-8);
    assert!((k2.roughness() - 27.0 / (32.0 * sqrt_pi)).abs() < 1e-8);
    assert!(k2.psi() > 0.0);
    assert!(gaussian_kernel(3).is_err());
    for &x in &[0.3, 1.1, 2.7] {
        assert_eq!(k2.pdf(x), k2.pdf(-x));
        // analytic derivatives against central differences
        for d in 0..2 {
            let h = 1e-5;
            let fd = (k2.eval(x + h, d) - k2.eval(x - h, d)) / (2.0 * h);
            let an = k2.eval(x, d + 1);
            assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-3), "d={d} x={x}");
        }
        let fd = (k2.cdf(x + 1e-5) - k2.cdf(x - 1e-5)) / 2e-5;
        assert!((fd - k2.pdf(x)).abs() < 1e-8);
    }
    assert!(k2.cdf(-20.0).abs() < 1e-10 && (k2.cdf(20.0) - 1.0).abs() < 1e-10);
}
