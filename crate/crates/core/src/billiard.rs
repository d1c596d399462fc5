//! The collision map `T0`, its inverse, its derivative, and closed-form
//! macro-steps over long runs of bounces between the segments or slides
//! along one arc.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryComponent, PhasePoint, StadiumGeometry, Vec2};

/// Landings with `|cos theta1|` below this are treated as grazing.
pub const GRAZING_TOL: f64 = 1e-12;

/// Default cap on the length of a single closed-form run.
pub const DEFAULT_CAP: u64 = 10_000_000;

/// Slack on the half-plane test that assigns a circle root to an arc.
const ARC_SIDE_TOL: f64 = 1e-9;

/// 2x2 matrix, row-major.
pub type Mat2 = [[f64; 2]; 2];

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

pub fn mat_apply(a: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

pub fn mat_det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// One application of `T0` (or of its inverse).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionStep {
    pub next: PhasePoint,
    /// Euclidean length of the flight between the two collisions.
    pub tau: f64,
    pub crossed_component: BoundaryComponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MacroKind {
    SegmentBounceRun,
    ArcSlideRun,
    Single,
}

/// Several collisions advanced at once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroStep {
    /// First collision on a component of a different type than the run.
    pub entry: PhasePoint,
    pub entry_component: BoundaryComponent,
    /// Collisions skipped in closed form (the run, excluding the start).
    pub bounce_count: u64,
    /// Flight length from the start to `entry`.
    pub total_tau: f64,
    pub kind: MacroKind,
    /// Last collision of the run (the start itself for `Single`).
    pub last_in_run: PhasePoint,
}

impl MacroStep {
    /// Number of applications of `T0` from the start to `entry`.
    #[inline]
    pub fn steps(&self) -> u64 {
        self.bounce_count + 1
    }
}

/// A maximal run of collisions of the same type following a start point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Run {
    pub len: u64,
    pub last: PhasePoint,
    pub tau: f64,
}

#[inline]
fn velocity(geom: &StadiumGeometry, comp: BoundaryComponent, x: PhasePoint) -> (Vec2, Vec2) {
    let (p, t, n) = geom.frame_on(comp, x.r);
    let (s, c) = x.theta.sin_cos();
    (p, n * c + t * s)
}

/// Exit of the ray `p + s v` from the stadium; `from` is the piece `p` lies
/// on, if any.
pub(crate) fn flight(
    geom: &StadiumGeometry,
    p: Vec2,
    v: Vec2,
    from: Option<BoundaryComponent>,
) -> Option<(f64, BoundaryComponent, Vec2)> {
    use BoundaryComponent::*;
    let h = geom.half();
    if v.y > 0.0 && from != Some(TopSegment) {
        let s = (1.0 - p.y) / v.y;
        let x = s.mul_add(v.x, p.x);
        if x.abs() < h {
            return Some((s, TopSegment, Vec2::new(x, 1.0)));
        }
    } else if v.y < 0.0 && from != Some(BottomSegment) {
        let s = (-1.0 - p.y) / v.y;
        let x = s.mul_add(v.x, p.x);
        if x.abs() < h {
            return Some((s, BottomSegment, Vec2::new(x, -1.0)));
        }
    }
    // Try the arc on the side the ray is heading first.
    let order = if v.x >= 0.0 {
        [
            (RightArc, geom.right_center(), 1.0),
            (LeftArc, geom.left_center(), -1.0),
        ]
    } else {
        [
            (LeftArc, geom.left_center(), -1.0),
            (RightArc, geom.right_center(), 1.0),
        ]
    };
    for (comp, center, side) in order {
        let w = p - center;
        let b = w.dot(v);
        let s = if from == Some(comp) {
            -2.0 * b
        } else {
            let cc = w.dot(w) - 1.0;
            let disc = b * b - cc;
            if disc < 0.0 {
                continue;
            }
            let sq = disc.sqrt();
            // Larger root, without cancellation.
            if b < 0.0 {
                sq - b
            } else {
                -cc / (b + sq)
            }
        };
        if !(s > 0.0) {
            continue;
        }
        let q = p + v * s;
        if side * q.x >= h - ARC_SIDE_TOL {
            return Some((s, comp, q));
        }
    }
    None
}

/// Snaps `q` onto `comp` and reflects the incoming velocity `v`.
#[inline]
fn land(
    geom: &StadiumGeometry,
    comp: BoundaryComponent,
    q: Vec2,
    v: Vec2,
    tau: f64,
) -> Result<CollisionStep> {
    use BoundaryComponent::*;
    let (q, n1) = match comp {
        RightArc | LeftArc => {
            let center = if comp == RightArc {
                geom.right_center()
            } else {
                geom.left_center()
            };
            let w = q - center;
            let u = w * (1.0 / w.norm());
            (center + u, -u)
        }
        TopSegment => (Vec2::new(q.x, 1.0), Vec2::new(0.0, -1.0)),
        BottomSegment => (Vec2::new(q.x, -1.0), Vec2::new(0.0, 1.0)),
    };
    let t1 = -n1.perp();
    let r1 = geom.wrap(geom.arclength_on(comp, q));
    let sin1 = v.dot(t1);
    let cos1 = -v.dot(n1);
    if cos1 < GRAZING_TOL {
        return Err(Error::GeometryDegenerate {
            r: r1,
            theta: sin1.atan2(cos1),
        });
    }
    Ok(CollisionStep {
        next: PhasePoint {
            r: r1,
            theta: sin1.atan2(cos1),
        },
        tau,
        crossed_component: geom.classify(r1),
    })
}

/// One application of the collision map.
pub fn forward(geom: &StadiumGeometry, x: PhasePoint) -> Result<CollisionStep> {
    let r = geom.wrap(x.r);
    let comp = geom.classify(r);
    let x = PhasePoint { r, theta: x.theta };
    let (p, v) = velocity(geom, comp, x);
    match flight(geom, p, v, Some(comp)) {
        Some((tau, comp1, q)) => land(geom, comp1, q, v, tau),
        None => Err(Error::GeometryDegenerate { r, theta: x.theta }),
    }
}

/// Collision reached from an arbitrary interior point moving with unit
/// velocity `v`; `tau` is the distance travelled.
pub fn shoot(geom: &StadiumGeometry, p: Vec2, v: Vec2) -> Result<CollisionStep> {
    match flight(geom, p, v, None) {
        Some((tau, comp1, q)) => land(geom, comp1, q, v, tau),
        None => Err(Error::GeometryDegenerate {
            r: f64::NAN,
            theta: f64::NAN,
        }),
    }
}

/// Inverse collision map through the time-reversal involution.
pub fn backward(geom: &StadiumGeometry, x: PhasePoint) -> Result<CollisionStep> {
    let s = forward(geom, x.reversed())?;
    Ok(CollisionStep {
        next: s.next.reversed(),
        ..s
    })
}

/// Derivative of `T0` in `(r, theta)` coordinates.
///
/// With `kappa = 1` on arcs and `0` on segments:
///
/// ```text
/// dr1/dr     = (tau k0 - cos t0) / cos t1      dr1/dtheta     = -tau / cos t1
/// dtheta1/dr = k0 - k1 dr1/dr                  dtheta1/dtheta = -1 + k1 tau / cos t1
/// ```
pub fn tangent_map(geom: &StadiumGeometry, x: PhasePoint) -> Result<Mat2> {
    let step = forward(geom, x)?;
    Ok(tangent_from_step(geom, x, &step))
}

pub(crate) fn tangent_from_step(
    geom: &StadiumGeometry,
    x: PhasePoint,
    step: &CollisionStep,
) -> Mat2 {
    let k0 = geom.classify(x.r).curvature();
    let k1 = step.crossed_component.curvature();
    let c0 = x.theta.cos();
    let c1 = step.next.theta.cos();
    let a = (step.tau * k0 - c0) / c1;
    let b = -step.tau / c1;
    [[a, b], [k0 - k1 * a, -1.0 + k1 * step.tau / c1]]
}

/// Closed-form run of segment hits following a point on a segment.
pub(crate) fn segment_run(geom: &StadiumGeometry, x: PhasePoint, cap: u64) -> Result<Run> {
    let comp = geom.classify(x.r);
    debug_assert!(comp.is_segment());
    let (p, v) = velocity(geom, comp, x);
    if v.x == 0.0 {
        return Err(Error::CapExceeded { run: u64::MAX, cap });
    }
    let h = geom.half();
    let vy = v.y.abs();
    // Horizontal advance between consecutive segment hits.
    let d = 2.0 * v.x / vy;
    let edge = if d > 0.0 { h } else { -h };
    let mf = ((edge - p.x) / d).ceil() - 1.0;
    if !(mf < cap as f64 + 2.0) {
        return Err(Error::CapExceeded { run: u64::MAX, cap });
    }
    let mut m = mf.max(0.0) as u64;
    let at = |k: u64| d.mul_add(k as f64, p.x);
    while m > 0 && at(m).abs() >= h {
        m -= 1;
    }
    while at(m + 1).abs() < h {
        m += 1;
    }
    if m > cap {
        return Err(Error::CapExceeded { run: m, cap });
    }
    if m == 0 {
        return Ok(Run {
            len: 0,
            last: x,
            tau: 0.0,
        });
    }
    let same_line = m % 2 == 0;
    let line = if same_line {
        comp
    } else if comp == BoundaryComponent::TopSegment {
        BoundaryComponent::BottomSegment
    } else {
        BoundaryComponent::TopSegment
    };
    let q = Vec2::new(
        at(m),
        if line == BoundaryComponent::TopSegment {
            1.0
        } else {
            -1.0
        },
    );
    let r = geom.arclength_on(line, q);
    let theta = if same_line { x.theta } else { -x.theta };
    Ok(Run {
        len: m,
        last: PhasePoint { r, theta },
        tau: m as f64 * (2.0 / vy),
    })
}

/// Closed-form run of same-arc collisions following a point on an arc.
pub(crate) fn arc_run(geom: &StadiumGeometry, x: PhasePoint, cap: u64) -> Result<Run> {
    let comp = geom.classify(x.r);
    debug_assert!(comp.is_arc());
    let start = geom.component_start(comp);
    let s = geom.wrap(x.r) - start;
    let delta = PI - 2.0 * x.theta.abs();
    let room = if x.theta >= 0.0 { PI - s } else { s };
    let mf = (room / delta).floor();
    if !(mf < cap as f64 + 1.0) {
        return Err(Error::CapExceeded { run: u64::MAX, cap });
    }
    let m = mf.max(0.0) as u64;
    if m > cap {
        return Err(Error::CapExceeded { run: m, cap });
    }
    if m == 0 {
        return Ok(Run {
            len: 0,
            last: x,
            tau: 0.0,
        });
    }
    let step = if x.theta >= 0.0 { delta } else { -delta };
    let s_m = step.mul_add(m as f64, s).clamp(0.0, PI);
    Ok(Run {
        len: m,
        last: PhasePoint {
            r: start + s_m,
            theta: x.theta,
        },
        tau: m as f64 * 2.0 * x.theta.cos(),
    })
}

/// Run of same-type collisions after `x` (segments count as one type, each
/// arc as its own type).
pub(crate) fn run_from(
    geom: &StadiumGeometry,
    x: PhasePoint,
    cap: u64,
) -> Result<(Run, MacroKind)> {
    if geom.classify(x.r).is_segment() {
        Ok((segment_run(geom, x, cap)?, MacroKind::SegmentBounceRun))
    } else {
        Ok((arc_run(geom, x, cap)?, MacroKind::ArcSlideRun))
    }
}

/// Advances over a whole run of segment bounces or arc slides in O(1).
pub fn macro_forward(geom: &StadiumGeometry, x: PhasePoint, cap: u64) -> Result<MacroStep> {
    if cap == 0 {
        return Err(Error::InvalidArgument("cap must be >= 1".into()));
    }
    let x = PhasePoint {
        r: geom.wrap(x.r),
        theta: x.theta,
    };
    let (run, kind) = run_from(geom, x, cap)?;
    let exit = forward(geom, run.last)?;
    Ok(MacroStep {
        entry: exit.next,
        entry_component: exit.crossed_component,
        bounce_count: run.len,
        total_tau: run.tau + exit.tau,
        kind: if run.len == 0 {
            MacroKind::Single
        } else {
            kind
        },
        last_in_run: run.last,
    })
}

/// Time reversal of [`macro_forward`].
pub fn macro_backward(geom: &StadiumGeometry, x: PhasePoint, cap: u64) -> Result<MacroStep> {
    let m = macro_forward(geom, x.reversed(), cap)?;
    Ok(MacroStep {
        entry: m.entry.reversed(),
        last_in_run: m.last_in_run.reversed(),
        ..m
    })
}
