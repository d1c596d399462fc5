//! Observables on the collision space, the perpendicular-bounce average `I`,
//! invariant means, induced sums and flow observables.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::billiard::{flight, forward, CollisionStep};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryComponent, PhasePoint, StadiumGeometry};
use crate::induced::walk_excursion;
use crate::quadrature::GaussLegendre;

/// `|I|` at or below this counts as zero.
pub const I_TOLERANCE: f64 = 1e-8;

/// Default quadrature size per dimension.
pub const DEFAULT_NODES: usize = 1024;

/// Half-width of the segment bump relative to the segment length.
pub const BUMP_HALF_WIDTH: f64 = 0.4;

/// Free path from `x`, or 0 on a numerically degenerate flight.
pub fn free_path(geom: &StadiumGeometry, x: PhasePoint) -> f64 {
    let r = geom.wrap(x.r);
    let comp = geom.classify(r);
    let (p, t, n) = geom.frame_on(comp, r);
    let (s, c) = x.theta.sin_cos();
    flight(geom, p, n * c + t * s, Some(comp)).map_or(0.0, |f| f.0)
}

/// Closed-form mean free path under the invariant measure.
pub fn mean_tau(geom: &StadiumGeometry) -> f64 {
    let ell = geom.ell();
    PI * (PI + 2.0 * ell) / (2.0 * ell + 2.0 * PI)
}

/// Segment length at which the mean free path equals 2.
pub fn critical_ell() -> f64 {
    (4.0 * PI - PI * PI) / (2.0 * PI - 4.0)
}

type Custom = Arc<dyn Fn(&StadiumGeometry, PhasePoint) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Tau,
    SegmentBump,
    Constant(f64),
    Table(Arc<Table>),
    Custom(Custom),
}

/// A bounded real function on the collision space, optionally shifted by a
/// constant (its invariant mean, once centered).
#[derive(Clone)]
pub struct Observable {
    name: String,
    kind: Kind,
    offset: f64,
    centered: bool,
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable")
            .field("name", &self.name)
            .field("offset", &self.offset)
            .field("centered", &self.centered)
            .finish()
    }
}

impl Observable {
    fn with(name: &str, kind: Kind) -> Self {
        Self {
            name: name.to_string(),
            kind,
            offset: 0.0,
            centered: false,
        }
    }

    /// Free path to the next collision.
    pub fn tau() -> Self {
        Self::with("tau", Kind::Tau)
    }

    /// Free path minus its closed-form mean.
    pub fn tau0(geom: &StadiumGeometry) -> Self {
        Self {
            name: "tau0".into(),
            kind: Kind::Tau,
            offset: mean_tau(geom),
            centered: true,
        }
    }

    /// `(1 - u^2)^3` bump centered on each segment, `u` the offset from the
    /// midpoint in units of `0.4 ell`; independent of `theta`, zero on arcs.
    pub fn segment_bump() -> Self {
        Self::with("segment_bump", Kind::SegmentBump)
    }

    pub fn constant(c: f64) -> Self {
        Self::with("constant", Kind::Constant(c))
    }

    pub fn zero() -> Self {
        Self::with("zero", Kind::Constant(0.0))
    }

    /// Bilinear interpolation of a `r,theta,value` grid file.
    pub fn from_table_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let table = Table::parse(&text)?;
        Ok(Self::with(
            &path.display().to_string(),
            Kind::Table(Arc::new(table)),
        ))
    }

    pub fn from_table_str(name: &str, text: &str) -> Result<Self> {
        Ok(Self::with(name, Kind::Table(Arc::new(Table::parse(text)?))))
    }

    pub fn custom(
        name: &str,
        f: impl Fn(&StadiumGeometry, PhasePoint) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::with(name, Kind::Custom(Arc::new(f)))
    }

    /// Looks up a built-in by name, or loads a table file.
    pub fn by_name(geom: &StadiumGeometry, name: &str) -> Result<Self> {
        match name {
            "tau" => Ok(Self::tau()),
            "tau0" => Ok(Self::tau0(geom)),
            "segment_bump" | "bump" => Ok(Self::segment_bump()),
            "zero" => Ok(Self::zero()),
            "one" => Ok(Self::constant(1.0)),
            other if Path::new(other).is_file() => Self::from_table_file(other),
            other => Err(Error::InvalidArgument(format!(
                "unknown observable `{other}`"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Constant subtracted from the raw function.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Identically zero before and after shifting.
    pub fn is_zero(&self) -> bool {
        matches!(self.kind, Kind::Constant(c) if c == self.offset)
    }

    /// Whether evaluation needs the flight leaving the point.
    pub fn needs_flight(&self) -> bool {
        matches!(self.kind, Kind::Tau)
    }

    /// Same function minus `mean`, flagged as centered.
    pub fn shifted(&self, mean: f64) -> Self {
        Self {
            name: self.name.clone(),
            kind: self.kind.clone(),
            offset: self.offset + mean,
            centered: true,
        }
    }

    /// Centered by its quadrature mean under the invariant measure.
    pub fn centered(&self, geom: &StadiumGeometry, grid: usize) -> Self {
        if self.centered {
            return self.clone();
        }
        self.shifted(mean_mu0(geom, self, grid))
    }

    pub fn value(&self, geom: &StadiumGeometry, x: PhasePoint) -> f64 {
        let raw = match &self.kind {
            Kind::Tau => free_path(geom, x),
            _ => self.raw_static(geom, x),
        };
        raw - self.offset
    }

    /// Value when the step leaving `x` is already known.
    #[inline]
    pub fn value_with_step(
        &self,
        geom: &StadiumGeometry,
        x: PhasePoint,
        step: &CollisionStep,
    ) -> f64 {
        let raw = match &self.kind {
            Kind::Tau => step.tau,
            _ => self.raw_static(geom, x),
        };
        raw - self.offset
    }

    #[inline]
    fn raw_static(&self, geom: &StadiumGeometry, x: PhasePoint) -> f64 {
        match &self.kind {
            Kind::Tau => unreachable!(),
            Kind::SegmentBump => bump(geom, x.r),
            Kind::Constant(c) => *c,
            Kind::Table(t) => t.eval(geom.wrap(x.r), x.theta),
            Kind::Custom(f) => f(geom, x),
        }
    }
}

fn bump(geom: &StadiumGeometry, r: f64) -> f64 {
    let r = geom.wrap(r);
    let comp = geom.classify(r);
    if comp.is_arc() {
        return 0.0;
    }
    let mid = geom.component_start(comp) + geom.half();
    let u = (r - mid) / (BUMP_HALF_WIDTH * geom.ell());
    if u.abs() >= 1.0 {
        0.0
    } else {
        let w = 1.0 - u * u;
        w * w * w
    }
}

/// Rectangular `(r, theta)` grid of values.
#[derive(Debug, Clone, PartialEq)]
struct Table {
    rs: Vec<f64>,
    thetas: Vec<f64>,
    values: Vec<f64>,
}

impl Table {
    fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Table("empty file".into()))?;
        let cols: Vec<_> = header.split(',').map(str::trim).collect();
        if cols != ["r", "theta", "value"] {
            return Err(Error::Table(format!(
                "expected header `r,theta,value`, got `{header}`"
            )));
        }
        let mut rows = Vec::new();
        for (k, line) in lines.enumerate() {
            let f: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Table(format!("row {}: {e}", k + 1)))?;
            if f.len() != 3 {
                return Err(Error::Table(format!("row {}: expected 3 fields", k + 1)));
            }
            rows.push((f[0], f[1], f[2]));
        }
        let mut thetas = Vec::new();
        for &(r, th, _) in &rows {
            if r != rows[0].0 {
                break;
            }
            thetas.push(th);
        }
        let nt = thetas.len();
        if nt < 2 || rows.len() % nt != 0 || rows.len() / nt < 2 {
            return Err(Error::Table(
                "grid must be rectangular with at least 2x2 points".into(),
            ));
        }
        let rs: Vec<f64> = rows.iter().step_by(nt).map(|row| row.0).collect();
        for (k, &(r, th, _)) in rows.iter().enumerate() {
            if r != rs[k / nt] || th != thetas[k % nt] {
                return Err(Error::Table(format!(
                    "row {} breaks the row-major grid",
                    k + 1
                )));
            }
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
        if !increasing(&rs) || !increasing(&thetas) {
            return Err(Error::Table(
                "grid coordinates must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            rs,
            thetas,
            values: rows.into_iter().map(|row| row.2).collect(),
        })
    }

    fn eval(&self, r: f64, theta: f64) -> f64 {
        let (i, a) = locate(&self.rs, r);
        let (j, b) = locate(&self.thetas, theta);
        let nt = self.thetas.len();
        let v = |i: usize, j: usize| self.values[i * nt + j];
        (1.0 - a) * ((1.0 - b) * v(i, j) + b * v(i, j + 1))
            + a * ((1.0 - b) * v(i + 1, j) + b * v(i + 1, j + 1))
    }
}

/// Cell index and fractional position, clamped to the grid.
fn locate(grid: &[f64], x: f64) -> (usize, f64) {
    let last = grid.len() - 2;
    let i = grid
        .partition_point(|&g| g <= x)
        .saturating_sub(1)
        .min(last);
    let t = ((x - grid[i]) / (grid[i + 1] - grid[i])).clamp(0.0, 1.0);
    (i, t)
}

/// Average of `obs` along perpendicular bounces on the two segments.
pub fn compute_i(geom: &StadiumGeometry, obs: &Observable, nodes: usize) -> f64 {
    let rule = GaussLegendre::composite(nodes.max(2));
    let ell = geom.ell();
    let mut total = 0.0;
    for comp in [
        BoundaryComponent::TopSegment,
        BoundaryComponent::BottomSegment,
    ] {
        let a = geom.component_start(comp);
        total += rule.integrate(a, a + ell, |r| {
            obs.value(geom, PhasePoint { r, theta: 0.0 })
        });
    }
    total / (2.0 * ell)
}

/// Mean of `obs` under the invariant measure of the collision map.
pub fn mean_mu0(geom: &StadiumGeometry, obs: &Observable, grid: usize) -> f64 {
    let rule = GaussLegendre::composite(grid.max(2));
    let thetas = rule.points(-FRAC_PI_2, FRAC_PI_2);
    let mut total = 0.0;
    for comp in [
        BoundaryComponent::RightArc,
        BoundaryComponent::TopSegment,
        BoundaryComponent::LeftArc,
        BoundaryComponent::BottomSegment,
    ] {
        let a = geom.component_start(comp);
        let b = a + geom.component_length(comp);
        for (r, wr) in rule.points(a, b) {
            let inner: f64 = thetas
                .iter()
                .map(|&(th, wt)| {
                    let x = PhasePoint { r, theta: th };
                    wt * obs.value(geom, x) * geom.mu0_density(x)
                })
                .sum();
            total += wr * inner;
        }
    }
    total
}

/// Problem class of an observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    /// `I != 0` and the function vanishes whenever three consecutive
    /// collisions share an arc.
    P1,
    /// `I = 0`.
    P2,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableProfile {
    pub i: f64,
    pub mean_mu0: f64,
    pub classification: Classification,
    /// `I^2 ell^2 / (2 pi)`.
    pub induced_tail_constant: f64,
}

/// `I`, mean and class of `obs`. The vanishing condition of the first class
/// is checked on `checks` arc points drawn from the invariant measure.
pub fn profile(
    geom: &StadiumGeometry,
    obs: &Observable,
    nodes: usize,
    checks: usize,
    master_seed: u64,
) -> Result<ObservableProfile> {
    use crate::sampling::{draw_mu0, rng_for, SeedSpec};
    let i = compute_i(geom, obs, nodes);
    let mean = mean_mu0(geom, obs, nodes);
    let classification = if i.abs() <= I_TOLERANCE {
        Classification::P2
    } else {
        let mut rng = rng_for(SeedSpec::new(master_seed, 0));
        let mut vanishes = true;
        let mut seen = 0;
        let mut tries = 0;
        while seen < checks && tries < 100 * checks.max(1) {
            tries += 1;
            let x = draw_mu0(geom, &mut rng);
            let comp = geom.classify(x.r);
            if !comp.is_arc() {
                continue;
            }
            let next = forward(geom, x)?;
            let prev = crate::billiard::backward(geom, x)?;
            if next.crossed_component != comp || prev.crossed_component != comp {
                continue;
            }
            seen += 1;
            if obs.value(geom, x).abs() > I_TOLERANCE {
                vanishes = false;
                break;
            }
        }
        if vanishes {
            Classification::P1
        } else {
            Classification::General
        }
    };
    let ell = geom.ell();
    Ok(ObservableProfile {
        i,
        mean_mu0: mean,
        classification,
        induced_tail_constant: i * i * ell * ell / (2.0 * PI),
    })
}

/// Sum of `obs` over the collisions of the excursion starting at `x` in `X`,
/// evaluated one collision at a time.
pub fn induced_observable(geom: &StadiumGeometry, obs: &Observable, x: PhasePoint) -> Result<f64> {
    if !crate::induced::in_x(geom, x)? {
        return Err(Error::NotInInducedSet {
            r: x.r,
            theta: x.theta,
        });
    }
    excursion_sum(geom, obs, x)
}

pub(crate) fn excursion_sum(
    geom: &StadiumGeometry,
    obs: &Observable,
    x: PhasePoint,
) -> Result<f64> {
    let mut sum = 0.0;
    walk_excursion(geom, x, crate::billiard::DEFAULT_CAP, |z, s| {
        sum += obs.value_with_step(geom, z, s);
    })?;
    Ok(sum)
}

type FlowFn = Arc<dyn Fn(&StadiumGeometry, PhasePoint, f64, f64) -> f64 + Send + Sync>;

/// A function of the flow state: the last collision `x`, the time `t`
/// elapsed since it, and the free path `tau(x)` of the current flight.
#[derive(Clone)]
pub struct FlowObservable {
    name: String,
    f: FlowFn,
    /// Constant along every flight, so one node per flight is exact.
    flight_constant: bool,
    zero: bool,
}

impl fmt::Debug for FlowObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlowObservable")
            .field("name", &self.name)
            .finish()
    }
}

impl FlowObservable {
    pub fn new(
        name: &str,
        f: impl Fn(&StadiumGeometry, PhasePoint, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.to_string(),
            f: Arc::new(f),
            flight_constant: false,
            zero: false,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            flight_constant: true,
            zero: c == 0.0,
            ..Self::new("constant", move |_, _, _, _| c)
        }
    }

    /// `f0(x) / tau(x)` spread evenly over the flight leaving `x`, so that its
    /// integral over that flight is `f0(x)`.
    pub fn spread(obs: &Observable) -> Self {
        let o = obs.clone();
        Self {
            flight_constant: true,
            zero: obs.is_zero(),
            ..Self::new(&format!("spread({})", obs.name()), move |g, x, _, tau| {
                if tau > 0.0 {
                    o.value(g, x) / tau
                } else {
                    0.0
                }
            })
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn is_flight_constant(&self) -> bool {
        self.flight_constant
    }

    #[inline]
    pub fn value(&self, geom: &StadiumGeometry, x: PhasePoint, t: f64, tau: f64) -> f64 {
        (self.f)(geom, x, t, tau)
    }

    /// Integral over `t` in `[a, b]` along the flight from `x`.
    pub fn integrate_flight(
        &self,
        geom: &StadiumGeometry,
        rule: &GaussLegendre,
        x: PhasePoint,
        tau: f64,
        a: f64,
        b: f64,
    ) -> f64 {
        if self.zero || b <= a {
            return 0.0;
        }
        if self.flight_constant {
            return (b - a) * self.value(geom, x, a, tau);
        }
        rule.integrate(a, b, |t| self.value(geom, x, t, tau))
    }
}

/// `(1 / (4 ell)) * integral of phi(r, 0, t)` over `r` on both segments and
/// `t` in `[0, 2]`.
pub fn flow_j(geom: &StadiumGeometry, phi: &FlowObservable, nodes: usize) -> f64 {
    let rule = GaussLegendre::composite(nodes.max(2));
    let ell = geom.ell();
    let mut total = 0.0;
    for comp in [
        BoundaryComponent::TopSegment,
        BoundaryComponent::BottomSegment,
    ] {
        let a = geom.component_start(comp);
        total += rule.integrate_2d(a, a + ell, 0.0, 2.0, |r, t| {
            phi.value(geom, PhasePoint { r, theta: 0.0 }, t, 2.0)
        });
    }
    total / (4.0 * ell)
}

/// Mean of `phi` under the flow-invariant measure.
pub fn flow_mean(
    geom: &StadiumGeometry,
    phi: &FlowObservable,
    grid: usize,
    flight_nodes: usize,
) -> f64 {
    let rule = GaussLegendre::new(flight_nodes.max(1));
    let per_collision = Observable::custom("flight_integral", {
        let phi = phi.clone();
        move |g, x| {
            let tau = free_path(g, x);
            phi.integrate_flight(g, &rule, x, tau, 0.0, tau)
        }
    });
    mean_mu0(geom, &per_collision, grid) / mean_tau(geom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g2() -> StadiumGeometry {
        StadiumGeometry::new(2.0).unwrap()
    }

    #[test]
    fn i_of_free_path_is_two() {
        for ell in [0.5, 2.0, 5.0] {
            let g = StadiumGeometry::new(ell).unwrap();
            assert!((compute_i(&g, &Observable::tau(), 64) - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn i_of_centered_free_path() {
        let g = g2();
        let i = compute_i(&g, &Observable::tau0(&g), 64);
        assert!((i - (2.0 - PI * (PI + 4.0) / (4.0 + 2.0 * PI))).abs() < 1e-12);
        assert!((i + 0.18182).abs() < 1e-5);
        assert_eq!(compute_i(&g, &Observable::zero(), 16), 0.0);
    }

    #[test]
    fn mean_tau_examples() {
        let g = g2();
        assert!((mean_tau(&g) - 2.18182).abs() < 1e-5);
        let tiny = StadiumGeometry::new(1e-12).unwrap();
        assert!((mean_tau(&tiny) - PI / 2.0).abs() < 1e-11);
        let crit = StadiumGeometry::new(critical_ell()).unwrap();
        assert!((mean_tau(&crit) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn critical_length_matches_bisection() {
        let (mut lo, mut hi) = (1.0, 1.5);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let g = StadiumGeometry::new(mid).unwrap();
            if mean_tau(&g) < 2.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((critical_ell() - 0.5 * (lo + hi)).abs() < 1e-10);
        assert!((critical_ell() - 1.1811420670892123).abs() < 1e-12);
        let crit = StadiumGeometry::new(critical_ell()).unwrap();
        assert!(compute_i(&crit, &Observable::tau0(&crit), 64).abs() < 1e-10);
    }

    #[test]
    fn quadrature_mean_of_free_path() {
        let g = g2();
        let m = mean_mu0(&g, &Observable::tau(), DEFAULT_NODES);
        assert!((m - mean_tau(&g)).abs() < 1e-4, "{m}");
        assert!((mean_mu0(&g, &Observable::constant(3.5), 32) - 3.5).abs() < 1e-12);
    }

    #[test]
    fn bump_mean_and_i() {
        let g = g2();
        let b = Observable::segment_bump();
        let width = BUMP_HALF_WIDTH * g.ell();
        let one_segment = GaussLegendre::composite(4096).integrate(-width, width, |u| {
            let w = 1.0 - (u / width).powi(2);
            w * w * w
        });
        assert!((one_segment - width * 32.0 / 35.0).abs() < 1e-12);
        let m = mean_mu0(&g, &b, DEFAULT_NODES);
        assert!((m - 2.0 * one_segment / g.perimeter()).abs() < 1e-8, "{m}");
        let i = compute_i(&g, &b, DEFAULT_NODES);
        assert!((i - BUMP_HALF_WIDTH * 32.0 / 35.0).abs() < 1e-10);
        // Nothing on the arcs.
        assert_eq!(b.value(&g, PhasePoint { r: 1.0, theta: 0.3 }), 0.0);
    }

    #[test]
    fn profiles() {
        let g = g2();
        let p = profile(&g, &Observable::segment_bump(), 256, 2000, 1).unwrap();
        assert_eq!(p.classification, Classification::P1);
        let p = profile(&g, &Observable::tau0(&g), 256, 2000, 1).unwrap();
        assert_eq!(p.classification, Classification::General);
        let crit = StadiumGeometry::new(critical_ell()).unwrap();
        let p = profile(&crit, &Observable::tau0(&crit), 256, 100, 1).unwrap();
        assert_eq!(p.classification, Classification::P2);
    }

    #[test]
    fn induced_sum_of_one_is_return_time() {
        let g = g2();
        let x = PhasePoint {
            r: 0.4,
            theta: -0.3,
        };
        if crate::induced::in_x(&g, x).unwrap() {
            let rec = crate::induced::induced_forward(&g, x).unwrap();
            let s = induced_observable(&g, &Observable::constant(1.0), x).unwrap();
            assert_eq!(s, rec.return_time as f64);
        }
        let d = PhasePoint {
            r: PI / 2.0,
            theta: 0.0,
        };
        assert!((induced_observable(&g, &Observable::tau(), d).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn table_round_trip_and_interpolation() {
        let text = "r,theta,value\n0,-1,0\n0,1,2\n10,-1,10\n10,1,12\n";
        let obs = Observable::from_table_str("t", text).unwrap();
        let g = g2();
        let v = obs.value(&g, PhasePoint { r: 5.0, theta: 0.0 });
        assert!((v - 6.0).abs() < 1e-12);
        assert!(Observable::from_table_str("t", "r,theta,value\n0,0,1\n").is_err());
        assert!(Observable::from_table_str("t", "x,y,z\n").is_err());
    }

    #[test]
    fn flow_j_examples() {
        let g = g2();
        assert!((flow_j(&g, &FlowObservable::constant(1.0), 16) - 1.0).abs() < 1e-12);
        assert_eq!(flow_j(&g, &FlowObservable::constant(0.0), 16), 0.0);
        // Spreading f0 over its flight halves the perpendicular average.
        let b = Observable::segment_bump();
        let j = flow_j(&g, &FlowObservable::spread(&b), 256);
        assert!((2.0 * j - compute_i(&g, &b, 256)).abs() < 1e-10);
    }

    #[test]
    fn flow_mean_of_spread_observable() {
        let g = g2();
        let phi = FlowObservable::spread(&Observable::segment_bump());
        let m = flow_mean(&g, &phi, 256, 1);
        let direct = mean_mu0(&g, &Observable::segment_bump(), 256) / mean_tau(&g);
        assert!((m - direct).abs() < 1e-12);
    }
}
