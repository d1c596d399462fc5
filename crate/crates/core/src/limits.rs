//! Birkhoff sums of the collision map and of the flow, their normalizations,
//! and Monte Carlo estimates of variances, correlations and tails.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::billiard::{forward, DEFAULT_CAP};
use crate::error::{Error, Result};
use crate::geometry::{PhasePoint, StadiumGeometry};
use crate::induced::{in_x, mu0_of_x, walk_excursion, X_DENSITY_MASS};
use crate::observables::{
    compute_i, flow_j, free_path, mean_tau, FlowObservable, Observable, DEFAULT_NODES, I_TOLERANCE,
};
use crate::parallel;
use crate::quadrature::GaussLegendre;
use crate::sampling::{draw_mu, draw_mu0, rng_for, SeedSpec};
use crate::stats::{self, LineFit};

/// `1 / (1 - (3/4) ln 3)`.
pub fn y_const() -> f64 {
    1.0 / (1.0 - 0.75 * 3f64.ln())
}

/// `(4 + 3 ln 3) / (4 - 3 ln 3)`, equal to `2y - 1`.
pub fn anomalous_factor() -> f64 {
    let l3 = 3f64.ln();
    (4.0 + 3.0 * l3) / (4.0 - 3.0 * l3)
}

/// Variance constant of the `sqrt(c n ln n)` normalization for an observable
/// with perpendicular-bounce average `i`.
pub fn c_from_i(geom: &StadiumGeometry, i: f64) -> f64 {
    let ell = geom.ell();
    anomalous_factor() * ell * ell * i * i / (4.0 * (PI + ell))
}

/// Tail functions and normalizing sequences for a given `I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub ell: f64,
    pub i: f64,
    /// `I^2 ell^2 / (2 pi)`.
    pub l_const: f64,
}

impl TailModel {
    pub fn new(geom: &StadiumGeometry, i: f64) -> Self {
        let ell = geom.ell();
        Self {
            ell,
            i,
            l_const: i * i * ell * ell / (2.0 * PI),
        }
    }

    /// Truncated second moment `(I^2 ell^2 / pi) ln x`.
    pub fn big_l(&self, x: f64) -> f64 {
        2.0 * self.l_const * x.ln()
    }

    /// Normalization of the induced sums.
    pub fn bn(&self, n: f64) -> f64 {
        (n * n.ln() * (2.0 * y_const() - 1.0) * self.l_const).sqrt()
    }

    /// Normalization of the sums of the collision map.
    pub fn bn_prime(&self, n: f64) -> f64 {
        let ell = self.ell;
        (n * n.ln() * (2.0 * y_const() - 1.0) * self.i * self.i * ell * ell / (4.0 * (PI + ell)))
            .sqrt()
    }
}

/// `c` for `obs`, which should already be centered.
pub fn theoretical_c(geom: &StadiumGeometry, obs: &Observable) -> Result<f64> {
    let i = compute_i(geom, obs, DEFAULT_NODES);
    if i.abs() <= I_TOLERANCE {
        return Err(Error::ZeroI { i });
    }
    Ok(c_from_i(geom, i))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Normalization {
    /// Divide by `sqrt(c n ln n)`.
    SqrtCnLogn { c: f64 },
    /// Divide by `sqrt(sigma2 n)`.
    SqrtN { sigma2: f64 },
    /// Divide by a fixed scale.
    Custom { scale: f64 },
}

impl Normalization {
    pub fn scale(&self, n: f64) -> f64 {
        match *self {
            Normalization::SqrtCnLogn { c } => (c * n * n.ln()).sqrt(),
            Normalization::SqrtN { sigma2 } => (sigma2 * n).sqrt(),
            Normalization::Custom { scale } => scale,
        }
    }
}

/// `sum_{k < n} obs(T0^k x)` along the orbit of `x`.
pub fn birkhoff_sum(
    geom: &StadiumGeometry,
    obs: &Observable,
    x: PhasePoint,
    n: u64,
) -> Result<f64> {
    let mut z = x;
    let mut s = 0.0;
    for _ in 0..n {
        let step = forward(geom, z)?;
        s += obs.value_with_step(geom, z, &step);
        z = step.next;
    }
    Ok(s)
}

/// Raw Birkhoff sums of length `n` from `m` independent starts drawn from
/// the invariant measure of the collision map.
pub fn birkhoff_sums(
    geom: &StadiumGeometry,
    obs: &Observable,
    n: u64,
    m: u64,
    master_seed: u64,
    experiment: &str,
) -> Result<Vec<f64>> {
    parallel::try_collect(m, |i| {
        let x = draw_mu0(
            geom,
            &mut rng_for(SeedSpec::for_sample(master_seed, experiment, i)),
        );
        birkhoff_sum(geom, obs, x, n)
    })
}

/// Normalized Birkhoff sums.
pub fn birkhoff_samples(
    geom: &StadiumGeometry,
    obs: &Observable,
    n: u64,
    m: u64,
    master_seed: u64,
    normalization: Normalization,
) -> Result<Vec<f64>> {
    let scale = normalization.scale(n as f64);
    Ok(birkhoff_sums(geom, obs, n, m, master_seed, "clt")?
        .into_iter()
        .map(|s| s / scale)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub n: u64,
    pub samples: u64,
    pub normalization: Normalization,
    /// Distance to the standard normal CDF.
    pub ks_distance: f64,
    /// Variance of the raw sums.
    pub empirical_variance: f64,
    /// Empirical variance over the squared normalization.
    pub variance_ratio: f64,
    pub mean: f64,
    pub seed: SeedSpec,
    #[serde(skip)]
    pub values: Vec<f64>,
}

pub fn clt_report(
    geom: &StadiumGeometry,
    obs: &Observable,
    n: u64,
    m: u64,
    master_seed: u64,
    normalization: Normalization,
) -> Result<CltReport> {
    let values = birkhoff_samples(geom, obs, n, m, master_seed, normalization)?;
    let scale = normalization.scale(n as f64);
    let var_norm = stats::variance(&values);
    Ok(CltReport {
        n,
        samples: m,
        normalization,
        ks_distance: stats::ks_normal(&values),
        empirical_variance: var_norm * scale * scale,
        variance_ratio: var_norm,
        mean: stats::mean(&values),
        seed: SeedSpec::for_sample(master_seed, "clt", 0),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariancePoint {
    pub n: u64,
    pub var: f64,
    pub var_over_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceGrowth {
    pub points: Vec<VariancePoint>,
    /// Slope of `Var(S_n)/n` against `ln n`.
    pub alpha: f64,
    /// Intercept of the same fit.
    pub beta: f64,
    pub alpha_se: f64,
}

/// Fits `Var(S_n) = alpha n ln n + beta n` over `n_grid`. Each of the `m`
/// orbits runs to the largest `n` and is cut into disjoint windows of length
/// `n` for every grid point; by invariance every window is a Birkhoff sum
/// from the invariant measure, so the variance at `n` is the sample variance
/// over all `m * (max / n)` windows.
pub fn variance_growth(
    geom: &StadiumGeometry,
    obs: &Observable,
    n_grid: &[u64],
    m: u64,
    master_seed: u64,
) -> Result<VarianceGrowth> {
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    if grid.len() < 2 || grid[0] < 2 || m < 2 {
        return Err(Error::InvalidArgument(
            "variance growth needs m >= 2 and two grid values >= 2".into(),
        ));
    }
    let last = *grid.last().unwrap();
    let mut marks: Vec<u64> = grid
        .iter()
        .flat_map(|&n| (1..=last / n).map(move |k| k * n))
        .collect();
    marks.sort_unstable();
    marks.dedup();
    let prefix = parallel::try_collect(m, |i| {
        let mut z = draw_mu0(
            geom,
            &mut rng_for(SeedSpec::for_sample(master_seed, "variance", i)),
        );
        let mut s = 0.0;
        let mut out = Vec::with_capacity(marks.len());
        let mut next = 0;
        for k in 1..=last {
            let step = forward(geom, z)?;
            s += obs.value_with_step(geom, z, &step);
            z = step.next;
            if k == marks[next] {
                out.push(s);
                next += 1;
            }
        }
        Ok(out)
    })?;
    let at = |p: &[f64], k: u64| {
        if k == 0 {
            0.0
        } else {
            p[marks.binary_search(&k).expect("window ends are marked")]
        }
    };
    let mut points = Vec::with_capacity(grid.len());
    for &n in &grid {
        let windows: Vec<f64> = prefix
            .iter()
            .flat_map(|p| (0..last / n).map(move |j| at(p, (j + 1) * n) - at(p, j * n)))
            .collect();
        let var = stats::variance(&windows);
        points.push(VariancePoint {
            n,
            var,
            var_over_n: var / n as f64,
        });
    }
    let x: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.var_over_n).collect();
    let LineFit {
        slope,
        intercept,
        slope_se,
    } = stats::fit_line(&x, &y);
    Ok(VarianceGrowth {
        points,
        alpha: slope,
        beta: intercept,
        alpha_se: slope_se,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub n: u64,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n_times_estimate: f64,
}

/// Products taken from each orbit per lag.
const CORRELATION_WINDOW: u64 = 10_000;

/// Estimates `int f0 . f0 o T0^n dmu0` for each lag in `lags` from about
/// `pairs` products per lag. Products come from windows of orbits started
/// from the invariant measure; the 95% interval bootstraps over orbits.
pub fn correlation(
    geom: &StadiumGeometry,
    obs: &Observable,
    lags: &[u64],
    pairs: u64,
    master_seed: u64,
) -> Result<Vec<CorrelationEstimate>> {
    let max_lag = lags.iter().copied().max().unwrap_or(0);
    let window = CORRELATION_WINDOW.min(pairs.max(1));
    let orbits = pairs.div_ceil(window).max(2);
    let len = (window + max_lag) as usize;
    let per_orbit = parallel::try_collect(orbits, |i| {
        let mut z = draw_mu0(
            geom,
            &mut rng_for(SeedSpec::for_sample(master_seed, "correlation", i)),
        );
        let mut f = Vec::with_capacity(len);
        for _ in 0..len {
            let step = forward(geom, z)?;
            f.push(obs.value_with_step(geom, z, &step));
            z = step.next;
        }
        Ok(lags
            .iter()
            .map(|&lag| {
                let lag = lag as usize;
                (0..window as usize).map(|j| f[j] * f[j + lag]).sum::<f64>() / window as f64
            })
            .collect::<Vec<f64>>())
    })?;
    let mut out = Vec::with_capacity(lags.len());
    for (k, &n) in lags.iter().enumerate() {
        let col: Vec<f64> = per_orbit.iter().map(|v| v[k]).collect();
        let estimate = stats::mean(&col);
        let (ci_lo, ci_hi) = stats::bootstrap_mean_ci(
            &col,
            1000,
            0.95,
            SeedSpec::for_sample(master_seed, "correlation-bootstrap", n),
        );
        out.push(CorrelationEstimate {
            n,
            estimate,
            ci_lo,
            ci_hi,
            n_times_estimate: n as f64 * estimate,
        });
    }
    Ok(out)
}

/// Fitted power law over a window of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub slope_se: f64,
    pub prefactor: f64,
    pub prefactor_lo: f64,
    pub prefactor_hi: f64,
    pub theory: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub samples: u64,
    pub n_lo: u64,
    pub n_hi: u64,
    /// Counts of `phi_+ = n`.
    pub counts: BTreeMap<u64, u64>,
    pub mean_return_time: f64,
    /// Slope of `mu{phi_+ > n}` from the maximum-likelihood fit of
    /// `mu{phi_+ = n} ~ n^(slope - 1)` to the counts inside the window; the
    /// prefactor is that of `n^3 mu{phi_+ = n}`. Prefactors are stated for
    /// the density
    /// `cos(theta) dr dtheta / (2 pi)` on `X`, that is normalized
    /// probabilities times [`X_DENSITY_MASS`].
    pub return_time: PowerLawFit,
    /// Least-squares slope of `log mu{phi_+ > n}` on a log grid. Noisier
    /// than the likelihood fit since the sparse far end weighs as much as
    /// the rest.
    pub survival_ols_slope: f64,
    /// `mu{|f| >= n}` regressed over the window; the prefactor is that of
    /// `n^2 mu{|f| >= n}`.
    pub induced: PowerLawFit,
}

impl TailReport {
    /// Normalized probability of `phi_+ = n`.
    pub fn prob(&self, n: u64) -> f64 {
        self.counts.get(&n).copied().unwrap_or(0) as f64 / self.samples as f64
    }

    pub fn survival(&self, n: u64) -> f64 {
        self.counts.range(n + 1..).map(|(_, c)| c).sum::<u64>() as f64 / self.samples as f64
    }
}

/// Log-spaced integer grid on `[lo, hi]`.
fn log_grid(lo: u64, hi: u64, points: usize) -> Vec<u64> {
    let mut g: Vec<u64> = (0..points)
        .map(|k| {
            let t = k as f64 / (points - 1) as f64;
            ((lo as f64) * (hi as f64 / lo as f64).powf(t)).round() as u64
        })
        .collect();
    g.dedup();
    g
}

/// Poisson 95% interval for a count, scaled.
fn poisson_ci(count: u64, scale: f64) -> (f64, f64) {
    let c = count as f64;
    let h = 1.96 * c.sqrt();
    ((c - h).max(0.0) * scale, (c + h) * scale)
}

/// Fits `p(n) ∝ n^-(a+1)` on the integers of `[lo, hi]` by maximum
/// likelihood and returns `(-a, se)`, the implied slope of the survival
/// function. The score equation `E_a[ln n] = mean ln n` is monotone in `a`,
/// so bisection suffices.
fn discrete_power_mle(counts: &BTreeMap<u64, u64>, lo: u64, hi: u64) -> (f64, f64) {
    let (mut k, mut sum) = (0.0, 0.0);
    for (&n, &c) in counts.range(lo..=hi) {
        k += c as f64;
        sum += c as f64 * (n as f64).ln();
    }
    if k == 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let target = sum / k;
    // Mean and variance of ln n under the fitted law.
    let moments = |a: f64| {
        let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for n in lo..=hi {
            let l = (n as f64).ln();
            let w = (-(a + 1.0) * l).exp();
            z += w;
            m1 += w * l;
            m2 += w * l * l;
        }
        (m1 / z, m2 / z - (m1 / z).powi(2))
    };
    let (mut a, mut b) = (-0.99, 20.0);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if moments(mid).0 > target {
            a = mid;
        } else {
            b = mid;
        }
    }
    let a = 0.5 * (a + b);
    (-a, 1.0 / (k * moments(a).1).sqrt())
}

/// Tails of the return time and of the induced sum of `obs` under the
/// invariant measure of the induced map, fitted over `[n_lo, n_hi]`.
pub fn tail_report(
    geom: &StadiumGeometry,
    obs: &Observable,
    samples: u64,
    master_seed: u64,
    n_lo: u64,
    n_hi: u64,
) -> Result<TailReport> {
    let draws = parallel::try_collect(samples, |i| {
        let y = draw_mu(
            geom,
            &mut rng_for(SeedSpec::for_sample(master_seed, "tails", i)),
        )?;
        let mut f = 0.0;
        let (_, n) = walk_excursion(geom, y, DEFAULT_CAP, |z, s| {
            f += obs.value_with_step(geom, z, s)
        })?;
        Ok((n, f.abs()))
    })?;
    let mut counts = BTreeMap::new();
    let mut total = 0u64;
    let mut big_f = Vec::new();
    for &(n, f) in &draws {
        *counts.entry(n).or_insert(0u64) += 1;
        total += n;
        if f >= n_lo as f64 {
            big_f.push(f);
        }
    }
    big_f.sort_by(f64::total_cmp);
    let ell = geom.ell();
    let m = samples as f64;
    let mut report = TailReport {
        samples,
        n_lo,
        n_hi,
        counts,
        mean_return_time: total as f64 / m,
        survival_ols_slope: 0.0,
        return_time: PowerLawFit {
            slope: 0.0,
            slope_se: 0.0,
            prefactor: 0.0,
            prefactor_lo: 0.0,
            prefactor_hi: 0.0,
            theory: ell * ell / PI,
        },
        induced: PowerLawFit {
            slope: 0.0,
            slope_se: 0.0,
            prefactor: 0.0,
            prefactor_lo: 0.0,
            prefactor_hi: 0.0,
            theory: 0.0,
        },
    };
    let grid = log_grid(n_lo, n_hi, 12);

    let x: Vec<f64> = grid.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = grid
        .iter()
        .map(|&n| report.survival(n).max(1e-300).ln())
        .collect();
    report.survival_ols_slope = stats::fit_line(&x, &y).slope;
    let (slope, slope_se) = discrete_power_mle(&report.counts, n_lo, n_hi);
    let hits: u64 = report.counts.range(n_lo..=n_hi).map(|(_, c)| c).sum();
    let weight: f64 = (n_lo..=n_hi).map(|n| (n as f64).powi(-3)).sum();
    let scale = X_DENSITY_MASS / (m * weight);
    let (lo, hi) = poisson_ci(hits, scale);
    report.return_time = PowerLawFit {
        slope,
        slope_se,
        prefactor: hits as f64 * scale,
        prefactor_lo: lo,
        prefactor_hi: hi,
        theory: ell * ell / PI,
    };

    let above = |t: f64| (big_f.len() - big_f.partition_point(|&v| v < t)) as f64 / m;
    let y: Vec<f64> = grid
        .iter()
        .map(|&n| above(n as f64).max(1e-300).ln())
        .collect();
    let fit = stats::fit_line(&x, &y);
    let i = compute_i(geom, obs, DEFAULT_NODES);
    let in_window = big_f.iter().filter(|&&v| v < n_hi as f64).count() as u64;
    let weight = (n_lo as f64).powi(-2) - (n_hi as f64).powi(-2);
    let scale = X_DENSITY_MASS / (m * weight);
    let (lo, hi) = poisson_ci(in_window, scale);
    report.induced = PowerLawFit {
        slope: fit.slope,
        slope_se: fit.slope_se,
        prefactor: in_window as f64 * scale,
        prefactor_lo: lo,
        prefactor_hi: hi,
        theory: i * i * ell * ell / (2.0 * PI),
    };
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSamples {
    pub horizon: f64,
    pub j: f64,
    /// `c` built from `I = 2 J`.
    pub c: f64,
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
    /// Collision each sample starts after.
    #[serde(skip)]
    pub starts: Vec<PhasePoint>,
}

/// Integrals of `phi` along the flow for time `horizon` from starts drawn
/// from the flow-invariant measure, divided by `sqrt((c / tau_bar) T ln T)`.
///
/// Starts are drawn by accepting a collision `x` from the invariant measure
/// of the map with probability `tau(x) / tau_max`, then a uniform time along
/// its flight.
pub fn flow_birkhoff(
    geom: &StadiumGeometry,
    phi: &FlowObservable,
    horizon: f64,
    m: u64,
    quad_nodes: usize,
    master_seed: u64,
) -> Result<FlowSamples> {
    let j = flow_j(geom, phi, DEFAULT_NODES);
    let normalize = !phi.is_zero();
    let c = if normalize {
        if j.abs() <= I_TOLERANCE {
            return Err(Error::ZeroI { i: 2.0 * j });
        }
        c_from_i(geom, 2.0 * j)
    } else {
        0.0
    };
    let rule = GaussLegendre::new(quad_nodes.max(1));
    let tau_max = geom.max_flight();
    let runs = parallel::try_collect(m, |i| {
        let mut rng = rng_for(SeedSpec::for_sample(master_seed, "flow", i));
        let (x, tau) = loop {
            let x = draw_mu0(geom, &mut rng);
            let tau = free_path(geom, x);
            if rng.random::<f64>() * tau_max < tau {
                break (x, tau);
            }
        };
        let offset = rng.random::<f64>() * tau;
        let mut z = x;
        let mut t0 = offset;
        let mut left = horizon;
        let mut total = 0.0;
        loop {
            let step = forward(geom, z)?;
            let piece = (step.tau - t0).min(left);
            total += phi.integrate_flight(geom, &rule, z, step.tau, t0, t0 + piece);
            left -= piece;
            if left <= 0.0 {
                break;
            }
            z = step.next;
            t0 = 0.0;
        }
        Ok((x, total))
    })?;
    let scale = if normalize {
        (c / mean_tau(geom) * horizon * horizon.ln()).sqrt()
    } else {
        1.0
    };
    Ok(FlowSamples {
        horizon,
        j,
        c,
        normalized: runs.iter().map(|r| r.1 / scale).collect(),
        raw: runs.iter().map(|r| r.1).collect(),
        starts: runs.into_iter().map(|r| r.0).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mu0XCheck {
    pub estimate: f64,
    /// `pi / (2 (pi + ell))`.
    pub closed_form: f64,
    /// `mu0(X)` from the cosine mass of `X`, `2 / (pi + ell)`.
    pub exact: f64,
    /// Binomial standard error at the closed form.
    pub sigma: f64,
}

/// Fraction of collisions from the invariant measure that lie in `X`.
pub fn mu0x_check(geom: &StadiumGeometry, samples: u64, master_seed: u64) -> Result<Mu0XCheck> {
    let hits = parallel::try_collect(samples, |i| {
        let x = draw_mu0(
            geom,
            &mut rng_for(SeedSpec::for_sample(master_seed, "mu0x", i)),
        );
        in_x(geom, x)
    })?;
    let k = hits.iter().filter(|&&h| h).count();
    let p = PI / (2.0 * (PI + geom.ell()));
    Ok(Mu0XCheck {
        estimate: k as f64 / samples as f64,
        closed_form: p,
        exact: mu0_of_x(geom),
        sigma: (p * (1.0 - p) / samples as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g2() -> StadiumGeometry {
        StadiumGeometry::new(2.0).unwrap()
    }

    #[test]
    fn power_mle_recovers_exponent() {
        let counts: BTreeMap<u64, u64> = (10..=2000)
            .map(|n| (n, (1e12 * (n as f64).powi(-3)).round() as u64))
            .collect();
        let (slope, se) = discrete_power_mle(&counts, 40, 400);
        assert!((slope + 2.0).abs() < 1e-4, "{slope}");
        assert!(se > 0.0 && se < 1e-3);
        assert!(discrete_power_mle(&counts, 3, 5).0.is_nan());
    }

    #[test]
    fn constants() {
        assert!((y_const() - 5.6805018707846635).abs() < 1e-12);
        assert!((2.0 * y_const() - 1.0 - anomalous_factor()).abs() < 1e-12);
    }

    #[test]
    fn c_for_centered_free_path() {
        let g = g2();
        let c = theoretical_c(&g, &Observable::tau0(&g)).unwrap();
        assert!((c - 0.06661135736531172).abs() < 1e-12);
        let tm = TailModel::new(&g, compute_i(&g, &Observable::tau0(&g), DEFAULT_NODES));
        let n = 12345.0;
        assert!((tm.bn_prime(n).powi(2) / (n * f64::ln(n)) - c).abs() < 1e-12);
        assert!((tm.big_l(10.0) - 2.0 * tm.l_const * 10f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn zero_i_rejected() {
        let g = g2();
        assert!(matches!(
            theoretical_c(&g, &Observable::zero()),
            Err(Error::ZeroI { .. })
        ));
    }

    #[test]
    fn zero_observable_sums() {
        let g = g2();
        let v = birkhoff_samples(
            &g,
            &Observable::zero(),
            100,
            10,
            1,
            Normalization::Custom { scale: 1.0 },
        )
        .unwrap();
        assert!(v.iter().all(|&s| s == 0.0));
        let vg = variance_growth(&g, &Observable::zero(), &[16, 32, 64, 128, 256], 10, 1).unwrap();
        assert_eq!((vg.alpha, vg.beta), (0.0, 0.0));
        let c = correlation(&g, &Observable::zero(), &[0, 8], 1000, 1).unwrap();
        assert!(c.iter().all(|e| e.estimate == 0.0));
        let f = flow_birkhoff(&g, &FlowObservable::constant(0.0), 100.0, 5, 4, 1).unwrap();
        assert!(f.raw.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn variance_uses_disjoint_windows() {
        let g = g2();
        let obs = Observable::tau0(&g);
        let vg = variance_growth(&g, &obs, &[3, 6], 5, 4).unwrap();
        let mut w3 = Vec::new();
        for i in 0..5 {
            let x = draw_mu0(&g, &mut rng_for(SeedSpec::for_sample(4, "variance", i)));
            let mut vals = Vec::new();
            let mut z = x;
            for _ in 0..6 {
                let step = forward(&g, z).unwrap();
                vals.push(obs.value_with_step(&g, z, &step));
                z = step.next;
            }
            w3.push(vals[..3].iter().sum::<f64>());
            w3.push(vals[3..].iter().sum::<f64>());
        }
        assert!((vg.points[0].var - stats::variance(&w3)).abs() < 1e-12);
        assert_eq!(vg.points[1].n, 6);
    }

    #[test]
    fn runs_are_reproducible() {
        let g = g2();
        let obs = Observable::tau0(&g);
        let norm = Normalization::SqrtN { sigma2: 1.0 };
        let a = birkhoff_samples(&g, &obs, 200, 8, 42, norm).unwrap();
        let b = parallel::with_workers(2, || birkhoff_samples(&g, &obs, 200, 8, 42, norm))
            .unwrap()
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lag_zero_is_second_moment() {
        let g = g2();
        let obs = Observable::segment_bump();
        let c = correlation(&g, &obs, &[0], 200_000, 3).unwrap();
        let exact = crate::observables::mean_mu0(
            &g,
            &Observable::custom("sq", |g, x| Observable::segment_bump().value(g, x).powi(2)),
            512,
        );
        assert!(
            c[0].ci_lo - 0.01 < exact && exact < c[0].ci_hi + 0.01,
            "{:?} vs {exact}",
            c[0]
        );
    }

    #[test]
    fn flow_of_constant_one_is_time() {
        let g = g2();
        let f = flow_birkhoff(&g, &FlowObservable::constant(1.0), 50.0, 4, 2, 1).unwrap();
        for r in &f.raw {
            assert!((r - 50.0).abs() < 1e-9);
        }
    }
}
