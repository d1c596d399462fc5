//! Invariants of the collision map, the induced map and the samplers.

use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use stadium_limits::cascade::{standard_stop_level, stop_band, stripe_cascades, K_CAP};
use stadium_limits::limits::birkhoff_sums;
use stadium_limits::observables::Observable;
use stadium_limits::sampling::{draw_mu, draw_mu0, rng_for, sample_mu0, SeedSpec};
use stadium_limits::stats;
use stadium_limits::{
    backward, forward, induced_backward, induced_forward, PhasePoint, StadiumGeometry,
};

fn rdist(g: &StadiumGeometry, a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(g.perimeter());
    d.min(g.perimeter() - d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn backward_undoes_forward(ell in 0.3f64..4.0, u in 0.0f64..1.0, th in -1.5f64..1.5) {
        let g = StadiumGeometry::new(ell).unwrap();
        let x = PhasePoint { r: u * g.perimeter(), theta: th };
        let f = forward(&g, x).unwrap();
        prop_assert!(f.tau > 0.0 && f.tau <= ((ell + 2.0).powi(2) + 4.0).sqrt() + 1e-12);
        let b = backward(&g, f.next).unwrap();
        prop_assert!(rdist(&g, b.next.r, x.r) < 1e-10);
        prop_assert!((b.next.theta - x.theta).abs() < 1e-10);
    }

    #[test]
    fn induced_maps_are_inverse(ell in 0.5f64..3.0, i in 0u64..1_000_000) {
        let g = StadiumGeometry::new(ell).unwrap();
        let x = draw_mu(&g, &mut rng_for(SeedSpec::new(17, i))).unwrap();
        let fwd = induced_forward(&g, x).unwrap();
        let back = induced_backward(&g, fwd.end).unwrap();
        prop_assert_eq!(back.return_time, fwd.return_time);
        prop_assert!(rdist(&g, back.start.r, x.r) < 1e-9);
        prop_assert!((back.start.theta - x.theta).abs() < 1e-9);
    }
}

fn sin_cdf(t: f64) -> f64 {
    (1.0 + t.clamp(-FRAC_PI_2, FRAC_PI_2).sin()) / 2.0
}

#[test]
fn invariant_measure_is_preserved() {
    let g = StadiumGeometry::new(2.0).unwrap();
    let m = 1_000_000;
    let mut r0 = Vec::with_capacity(m);
    let mut t0 = Vec::with_capacity(m);
    let mut r1 = Vec::with_capacity(m);
    let mut t1 = Vec::with_capacity(m);
    let mut rng = rng_for(SeedSpec::new(23, 0));
    for _ in 0..m {
        let x = draw_mu0(&g, &mut rng);
        let y = forward(&g, x).unwrap().next;
        r0.push(x.r / g.perimeter());
        t0.push(x.theta);
        r1.push(y.r / g.perimeter());
        t1.push(y.theta);
    }
    let uniform = |v: f64| v.clamp(0.0, 1.0);
    for (r, t) in [(&r0, &t0), (&r1, &t1)] {
        assert!(stats::ks_one_sample(r, uniform) <= 0.002);
        assert!(stats::ks_one_sample(t, sin_cdf) <= 0.002);
    }
    // Joint check: chi-square over an 8 x 8 grid of equal-mass cells.
    let mut cells = [[0u64; 8]; 8];
    for (r, t) in r1.iter().zip(&t1) {
        let a = ((r * 8.0) as usize).min(7);
        let b = ((sin_cdf(*t) * 8.0) as usize).min(7);
        cells[a][b] += 1;
    }
    let e = m as f64 / 64.0;
    let chi2: f64 = cells
        .iter()
        .flatten()
        .map(|&c| (c as f64 - e).powi(2) / e)
        .sum();
    // 63 degrees of freedom; 110 is beyond the 0.9999 quantile.
    assert!(chi2 < 110.0, "{chi2}");
}

#[test]
fn sampler_is_deterministic_per_stream() {
    let g = StadiumGeometry::new(2.0).unwrap();
    let a = sample_mu0(&g, SeedSpec::new(5, 77));
    let b = sample_mu0(&g, SeedSpec::new(5, 77));
    assert_eq!(a, b);
    assert_ne!(a, sample_mu0(&g, SeedSpec::new(5, 78)));
}

#[test]
fn centered_averages_vanish() {
    let g = StadiumGeometry::new(2.0).unwrap();
    let tau0 = Observable::tau0(&g);
    let n = 100_000;
    let s = birkhoff_sums(&g, &tau0, n, 1, 3, "ergodic").unwrap();
    let sd = stats::variance(&birkhoff_sums(&g, &tau0, 1, 20_000, 3, "spread").unwrap()).sqrt();
    assert!((s[0] / n as f64).abs() <= 5.0 * sd);
}

#[test]
fn one_step_variance_is_second_moment() {
    let g = StadiumGeometry::new(2.0).unwrap();
    let tau0 = Observable::tau0(&g);
    let m = 200_000;
    let s1 = birkhoff_sums(&g, &tau0, 1, m, 9, "one-step").unwrap();
    let sq: Vec<f64> = s1.iter().map(|v| v * v).collect();
    let (lo, hi) = stats::bootstrap_mean_ci(&sq, 400, 0.99, SeedSpec::new(9, 1));
    // Oracle: the second moment from a dense midpoint rule in (r, theta).
    let k = 800;
    let mut second = 0.0;
    for a in 0..k {
        for b in 0..k {
            let x = PhasePoint {
                r: (a as f64 + 0.5) / k as f64 * g.perimeter(),
                theta: -FRAC_PI_2 + (b as f64 + 0.5) / k as f64 * PI,
            };
            second += tau0.value(&g, x).powi(2) * g.mu0_density(x);
        }
    }
    second *= g.perimeter() * PI / (k * k) as f64;
    assert!(lo <= second && second <= hi, "{lo} {second} {hi}");
    assert!((stats::variance(&s1) - second).abs() < 0.02 * second);
}

#[test]
fn long_cascades_stop_before_the_cap() {
    let g = StadiumGeometry::new(2.0).unwrap();
    let n0 = 10_000;
    let recs = stripe_cascades(&g, &Observable::zero(), n0, 200, 31, K_CAP).unwrap();
    let (lo, hi) = stop_band(standard_stop_level(n0).unwrap());
    let good = recs
        .iter()
        .filter(|r| !r.stopped_by_cap && (lo..=hi).contains(&r.return_sequence[r.stop_index]))
        .count();
    assert!(good as f64 >= 0.99 * recs.len() as f64, "{good}");
}
