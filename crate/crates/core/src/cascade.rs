//! Backward cascades of the induced map started on a bouncing stripe, the
//! standard stopping time, and the statistics built on them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::billiard::DEFAULT_CAP;
use crate::error::{Error, Result};
use crate::geometry::{PhasePoint, StadiumGeometry};
use crate::induced::{classify_excursion, return_backward, ExcursionKind};
use crate::observables::{compute_i, excursion_sum, Observable, DEFAULT_NODES, I_TOLERANCE};
use crate::parallel;
use crate::sampling::{draw_stripe, rng_for, SeedSpec};
use crate::stats;

/// Cascades stop after `ceil(K_CAP ln n0)` backward steps at most.
pub const K_CAP: f64 = 10.0;

/// Additive slack on the admissibility band `[n/3, 3n]`.
pub const C_SLACK: u64 = 4;

/// Bootstrap resamples for confidence intervals.
const RESAMPLES: usize = 1000;

/// Largest `p` with `3^p <= n0^(1/4)`. The stopping band `[3^p, 3^(p+1) - 1]`
/// must lie below `n0`, which fails only for `n0 <= 3`.
pub fn standard_stop_level(n0: u64) -> Result<u32> {
    let mut p = 0u32;
    while 81u64.checked_pow(p + 1).is_some_and(|v| v <= n0) {
        p += 1;
    }
    if 3u64.pow(p + 1) >= n0 {
        return Err(Error::DomainTooSmall { n0 });
    }
    Ok(p)
}

/// Return times that stop a cascade started at `n0`.
pub fn stop_band(p: u32) -> (u64, u64) {
    (3u64.pow(p), 3u64.pow(p + 1) - 1)
}

/// Whether `next` lies in the admissible window after `n`.
pub fn admissible(n: u64, next: u64) -> bool {
    let lo = (n as f64 / 3.0) - C_SLACK as f64;
    next as f64 >= lo && next <= 3 * n + C_SLACK
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeRecord {
    pub n0: u64,
    /// `n_k = phi_-(T^{-k} x)` for `k = 0..=stop_index`.
    pub return_sequence: Vec<u64>,
    pub stop_index: usize,
    /// Sum of `h(T^{-k} x)` for `k = 1..stop_index`.
    pub h: f64,
    /// The individual terms of `h`.
    pub h_terms: Vec<f64>,
    pub stopped_by_cap: bool,
    pub excursion_kinds: Vec<ExcursionKind>,
}

/// Iterates the inverse induced map from `x` until the return time falls in
/// the stopping band or the step cap `ceil(cap_k ln n0)` is reached.
/// `h(T^{-k} x)` is the sum of `obs` over the excursion ending at `T^{-k} x`.
pub fn run_cascade(
    geom: &StadiumGeometry,
    obs: &Observable,
    x: PhasePoint,
    cap_k: f64,
) -> Result<CascadeRecord> {
    let (mut z, n0, seg, arc) = return_backward(geom, x, DEFAULT_CAP)?;
    let p = standard_stop_level(n0)?;
    let (lo, hi) = stop_band(p);
    let cap = ((cap_k * (n0 as f64).ln()).ceil() as usize).max(1);
    let skip_h = obs.is_zero();
    let mut rec = CascadeRecord {
        n0,
        return_sequence: vec![n0],
        stop_index: 0,
        h: 0.0,
        h_terms: Vec::new(),
        stopped_by_cap: false,
        excursion_kinds: vec![classify_excursion(n0, seg, arc)],
    };
    let mut k = 1;
    loop {
        let (prev, nk, seg, arc) = return_backward(geom, z, DEFAULT_CAP)?;
        rec.return_sequence.push(nk);
        rec.excursion_kinds.push(classify_excursion(nk, seg, arc));
        if (lo..=hi).contains(&nk) {
            rec.stop_index = k;
            break;
        }
        if k >= cap {
            rec.stop_index = k;
            rec.stopped_by_cap = true;
            break;
        }
        let term = if skip_h {
            0.0
        } else {
            excursion_sum(geom, obs, prev)?
        };
        rec.h_terms.push(term);
        rec.h += term;
        z = prev;
        k += 1;
    }
    Ok(rec)
}

/// Cascades from `samples` independent stripe points with return time `n`.
pub fn stripe_cascades(
    geom: &StadiumGeometry,
    obs: &Observable,
    n: u64,
    samples: u64,
    master_seed: u64,
    cap_k: f64,
) -> Result<Vec<CascadeRecord>> {
    let name = format!("cascade/{n}");
    parallel::try_collect(samples, |i| {
        let mut rng = rng_for(SeedSpec::for_sample(master_seed, &name, i));
        let x = draw_stripe(geom, n, &mut rng)?;
        run_cascade(geom, obs, x, cap_k)
    })
}

/// Empirical law of the return time one step back from stripe `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionHistogram {
    pub n: u64,
    pub samples: u64,
    pub counts: BTreeMap<u64, u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinComparison {
    pub lo: u64,
    pub hi: u64,
    pub empirical: f64,
    pub theory: f64,
}

impl TransitionHistogram {
    pub fn prob(&self, i: u64) -> f64 {
        self.counts.get(&i).copied().unwrap_or(0) as f64 / self.samples as f64
    }

    /// Asymptotic transition probability `3n / (8 i^2)`.
    pub fn theory(&self, i: u64) -> f64 {
        3.0 * self.n as f64 / (8.0 * (i as f64).powi(2))
    }

    /// Empirical mass on the integers in `[lo, hi]`.
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        let c: u64 = self
            .counts
            .iter()
            .filter(|(&i, _)| i as f64 >= lo && i as f64 <= hi)
            .map(|(_, c)| c)
            .sum();
        c as f64 / self.samples as f64
    }

    /// `bins` log-spaced bins covering `[n/3, 3n]`.
    pub fn binned(&self, bins: usize) -> Vec<BinComparison> {
        let a = self.n as f64 / 3.0;
        let ratio = 9f64.powf(1.0 / bins as f64);
        let first = a.ceil() as u64;
        let last = 3 * self.n;
        let mut out = Vec::with_capacity(bins);
        let mut lo = first;
        for b in 0..bins {
            let hi = if b + 1 == bins {
                last
            } else {
                ((a * ratio.powi(b as i32 + 1)).ceil() as u64)
                    .saturating_sub(1)
                    .max(lo)
            };
            let empirical = (lo..=hi).map(|i| self.prob(i)).sum();
            let theory = (lo..=hi).map(|i| self.theory(i)).sum();
            out.push(BinComparison {
                lo,
                hi,
                empirical,
                theory,
            });
            lo = hi + 1;
        }
        out
    }
}

pub fn transition_histogram(
    geom: &StadiumGeometry,
    n: u64,
    samples: u64,
    master_seed: u64,
) -> Result<TransitionHistogram> {
    let name = format!("transitions/{n}");
    let next = parallel::try_collect(samples, |i| {
        let mut rng = rng_for(SeedSpec::for_sample(master_seed, &name, i));
        let x = draw_stripe(geom, n, &mut rng)?;
        let (prev, _, _, _) = return_backward(geom, x, DEFAULT_CAP)?;
        let (_, m, _, _) = return_backward(geom, prev, DEFAULT_CAP)?;
        Ok(m)
    })?;
    let mut counts = BTreeMap::new();
    for m in next {
        *counts.entry(m).or_insert(0) += 1;
    }
    Ok(TransitionHistogram { n, samples, counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeMean {
    pub n: u64,
    /// `E[H] / (n I)`.
    pub mean_ratio: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub samples: u64,
    pub capped_fraction: f64,
}

/// `E[H] / (n I)` over stripe cascades for each `n`, with a 95% bootstrap
/// interval. `I` is that of `obs` as given (no centering).
pub fn cascade_mean(
    geom: &StadiumGeometry,
    obs: &Observable,
    n_list: &[u64],
    samples: u64,
    master_seed: u64,
    precision: Option<f64>,
) -> Result<Vec<CascadeMean>> {
    let i = compute_i(geom, obs, DEFAULT_NODES);
    if i.abs() <= I_TOLERANCE {
        return Err(Error::InsufficientSignal);
    }
    let mut out = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let recs = stripe_cascades(geom, obs, n, samples, master_seed, K_CAP)?;
        let scaled: Vec<f64> = recs.iter().map(|r| r.h / (n as f64 * i)).collect();
        let (ci_lo, ci_hi) = stats::bootstrap_mean_ci(
            &scaled,
            RESAMPLES,
            0.95,
            SeedSpec::for_sample(master_seed, "cascade-bootstrap", n),
        );
        if let Some(p) = precision {
            if ci_hi - ci_lo > p {
                return Err(Error::InsufficientSamples {
                    width: ci_hi - ci_lo,
                    precision: p,
                });
            }
        }
        out.push(CascadeMean {
            n,
            mean_ratio: stats::mean(&scaled),
            ci_lo,
            ci_hi,
            samples,
            capped_fraction: recs.iter().filter(|r| r.stopped_by_cap).count() as f64
                / samples as f64,
        });
    }
    Ok(out)
}

/// Normalized cascade moment `E[sum_k |h(T^{-k} x)|^s] / n^s` at one `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub n: u64,
    /// Plain sample mean.
    pub mean: f64,
    /// Median of [`MOMENT_GROUPS`] block means. The per-cascade sum has a
    /// tail of index about 4/3 (the cascade climbs like a log random walk
    /// with a `u^-2` step law), so it has a mean but no variance and the
    /// plain mean is driven by its largest draw.
    pub robust: f64,
}

pub const MOMENT_GROUPS: usize = 20;

/// The normalized `s`-moment of stripe cascades for each `n`.
pub fn moment_bound_check(
    geom: &StadiumGeometry,
    obs: &Observable,
    s: f64,
    n_list: &[u64],
    samples: u64,
    master_seed: u64,
) -> Result<Vec<MomentEstimate>> {
    if !(1.0..2.0).contains(&s) {
        return Err(Error::InvalidArgument(format!(
            "moment order {s} outside [1, 2)"
        )));
    }
    let mut out = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let recs = stripe_cascades(geom, obs, n, samples, master_seed, K_CAP)?;
        let scale = (n as f64).powf(s);
        let vals: Vec<f64> = recs
            .iter()
            .map(|r| r.h_terms.iter().map(|h| h.abs().powf(s)).sum::<f64>() / scale)
            .collect();
        out.push(MomentEstimate {
            n,
            mean: stats::mean(&vals),
            robust: stats::median_of_means(&vals, MOMENT_GROUPS),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::billiard::backward;

    fn g2() -> StadiumGeometry {
        StadiumGeometry::new(2.0).unwrap()
    }

    #[test]
    fn stop_levels() {
        assert_eq!(standard_stop_level(10_000).unwrap(), 2);
        assert_eq!(standard_stop_level(81).unwrap(), 1);
        assert_eq!(standard_stop_level(256).unwrap(), 1);
        assert_eq!(standard_stop_level(80).unwrap(), 0);
        assert_eq!(standard_stop_level(6560).unwrap(), 1);
        assert_eq!(standard_stop_level(6561).unwrap(), 2);
        assert!(matches!(
            standard_stop_level(3),
            Err(Error::DomainTooSmall { n0: 3 })
        ));
        assert_eq!(stop_band(2), (9, 26));
    }

    #[test]
    fn admissibility_window() {
        assert!(admissible(300, 96));
        assert!(admissible(300, 904));
        assert!(!admissible(300, 905));
        assert!(!admissible(300, 95));
    }

    #[test]
    fn zero_observable_gives_zero_h() {
        let g = g2();
        let recs = stripe_cascades(&g, &Observable::zero(), 100, 20, 3, K_CAP).unwrap();
        for r in &recs {
            assert_eq!(r.h, 0.0);
            assert_eq!(r.n0, 100);
            assert_eq!(r.return_sequence.len(), r.stop_index + 1);
            assert!(r.stop_index <= (K_CAP * 100f64.ln()).ceil() as usize);
        }
    }

    #[test]
    fn h_matches_collision_replay() {
        let g = g2();
        for obs in [Observable::segment_bump(), Observable::tau0(&g)] {
            for i in 0..10 {
                let x = crate::sampling::sample_stripe(&g, 120, SeedSpec::new(11, i)).unwrap();
                let rec = run_cascade(&g, &obs, x, K_CAP).unwrap();
                // The orbit is chaotic, so each excursion is replayed from
                // the exact point that ends it.
                let mut z = x;
                let mut ends = Vec::new();
                for _ in 0..rec.stop_index {
                    z = return_backward(&g, z, DEFAULT_CAP).unwrap().0;
                    ends.push(z);
                }
                let mut h = 0.0;
                for k in 1..rec.stop_index {
                    let mut w = ends[k - 1];
                    for _ in 0..rec.return_sequence[k] {
                        let s = backward(&g, w).unwrap();
                        let fwd = crate::billiard::forward(&g, s.next).unwrap();
                        h += obs.value_with_step(&g, s.next, &fwd);
                        w = s.next;
                    }
                }
                assert!(
                    (h - rec.h).abs() < 1e-8 * (1.0 + h.abs()),
                    "{h} vs {}",
                    rec.h
                );
            }
        }
    }

    #[test]
    fn zero_i_is_rejected() {
        let g = g2();
        let e = cascade_mean(&g, &Observable::zero(), &[100], 10, 1, None).unwrap_err();
        assert_eq!(e, Error::InsufficientSignal);
        let m = moment_bound_check(&g, &Observable::zero(), 1.5, &[64], 10, 1).unwrap();
        assert_eq!((m[0].mean, m[0].robust), (0.0, 0.0));
    }

    #[test]
    fn histogram_is_a_distribution() {
        let g = g2();
        let h = transition_histogram(&g, 60, 200, 9).unwrap();
        let total: u64 = h.counts.values().sum();
        assert_eq!(total, 200);
        let bins = h.binned(10);
        assert_eq!(bins.first().unwrap().lo, 20);
        assert_eq!(bins.last().unwrap().hi, 180);
        let th: f64 = bins.iter().map(|b| b.theory).sum();
        assert!((th - 1.0).abs() < 0.05);
    }
}
