//! First-return map to the set `X` of arc collisions whose previous
//! collision is on another component, with forward and backward return
//! times and excursion classification.

use serde::{Deserialize, Serialize};

use crate::billiard::{
    arc_run, backward, forward, mat_apply, mat_mul, segment_run, tangent_from_step, Mat2,
    DEFAULT_CAP,
};
use crate::error::{Error, Result};
use crate::geometry::{PhasePoint, StadiumGeometry};

/// Excursions with at most this many collisions are not classified further.
pub const SHORT_THRESHOLD: u64 = 8;

/// `int_X cos(theta) dr dtheta`. On each arc `X` is the parallelogram
/// `{r < pi - 2 theta, theta > 0} u {r > -2 theta, theta < 0}` (arc-local
/// `r`), of cosine mass 4.
pub const X_COS_MASS: f64 = 8.0;

/// Total mass of `X` under the density `cos(theta) dr dtheta / (2 pi)`, in
/// which the induced-measure tail constants are stated.
pub const X_DENSITY_MASS: f64 = X_COS_MASS / (2.0 * std::f64::consts::PI);

/// `mu0(X)` for the normalized invariant measure of the collision map.
pub fn mu0_of_x(geom: &StadiumGeometry) -> f64 {
    X_COS_MASS / (2.0 * geom.perimeter())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExcursionKind {
    Bouncing,
    Sliding,
    Short,
}

/// One application of the induced map.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcursionRecord {
    pub start: PhasePoint,
    pub end: PhasePoint,
    pub return_time: u64,
    pub excursion_kind: ExcursionKind,
    /// Intermediate collisions on the segments and on the arc.
    pub segment_hits: u64,
    pub arc_hits: u64,
    pub collision_trace: Option<Vec<PhasePoint>>,
}

pub(crate) fn classify_excursion(
    return_time: u64,
    segment_hits: u64,
    arc_hits: u64,
) -> ExcursionKind {
    if return_time <= SHORT_THRESHOLD {
        ExcursionKind::Short
    } else if segment_hits >= arc_hits {
        ExcursionKind::Bouncing
    } else {
        ExcursionKind::Sliding
    }
}

/// Whether `x` lies on an arc and its previous collision is elsewhere.
pub fn in_x(geom: &StadiumGeometry, x: PhasePoint) -> Result<bool> {
    let comp = geom.classify(x.r);
    if !comp.is_arc() {
        return Ok(false);
    }
    let prev = backward(geom, x)?;
    Ok(prev.crossed_component != comp)
}

fn require_x(geom: &StadiumGeometry, x: PhasePoint) -> Result<()> {
    if in_x(geom, x)? {
        Ok(())
    } else {
        Err(Error::NotInInducedSet {
            r: x.r,
            theta: x.theta,
        })
    }
}

/// `T(x)` and `phi_+(x)`, in time proportional to the number of component
/// changes rather than the number of collisions.
pub fn induced_forward(geom: &StadiumGeometry, x: PhasePoint) -> Result<ExcursionRecord> {
    induced_forward_with_cap(geom, x, DEFAULT_CAP)
}

pub fn induced_forward_with_cap(
    geom: &StadiumGeometry,
    x: PhasePoint,
    cap: u64,
) -> Result<ExcursionRecord> {
    require_x(geom, x)?;
    let (end, n, seg, arc) = return_forward(geom, x, cap)?;
    Ok(ExcursionRecord {
        start: x,
        end,
        return_time: n,
        excursion_kind: classify_excursion(n, seg, arc),
        segment_hits: seg,
        arc_hits: arc,
        collision_trace: None,
    })
}

/// Forward walk from a point of `X` to the next point of `X`, without the
/// membership check. Returns `(end, steps, segment hits, arc hits)`.
pub(crate) fn return_forward(
    geom: &StadiumGeometry,
    x: PhasePoint,
    cap: u64,
) -> Result<(PhasePoint, u64, u64, u64)> {
    let start_comp = geom.classify(x.r);
    // Slides on the starting arc come first.
    let slide = arc_run(geom, x, cap)?;
    let mut n = slide.len;
    let arc = slide.len;
    let mut seg = 0;
    let exit = forward(geom, slide.last)?;
    n += 1;
    let w = exit.next;
    let wc = exit.crossed_component;
    if wc.is_arc() {
        debug_assert_ne!(wc, start_comp);
        return Ok((w, n, seg, arc));
    }
    seg += 1;
    let bounces = segment_run(geom, w, cap)?;
    n += bounces.len;
    seg += bounces.len;
    let arrive = forward(geom, bounces.last)?;
    n += 1;
    if !arrive.crossed_component.is_arc() {
        return Err(Error::GeometryDegenerate {
            r: bounces.last.r,
            theta: bounces.last.theta,
        });
    }
    Ok((arrive.next, n, seg, arc))
}

/// Backward walk from a point of `X` to the previous point of `X`.
pub(crate) fn return_backward(
    geom: &StadiumGeometry,
    x: PhasePoint,
    cap: u64,
) -> Result<(PhasePoint, u64, u64, u64)> {
    // Reversed, the target set is "on an arc and the next collision leaves
    // the arc": walk forward from R(x) to the last point of the slide run on
    // the arc reached after leaving x's arc.
    let z0 = x.reversed();
    let mut n = 0;
    let mut seg = 0;
    let mut arc = 0;
    let first = forward(geom, z0)?;
    n += 1;
    let mut w = first.next;
    let mut wc = first.crossed_component;
    if wc.is_segment() {
        seg += 1;
        let bounces = segment_run(geom, w, cap)?;
        n += bounces.len;
        seg += bounces.len;
        let s = forward(geom, bounces.last)?;
        n += 1;
        w = s.next;
        wc = s.crossed_component;
        if !wc.is_arc() {
            return Err(Error::GeometryDegenerate {
                r: w.r,
                theta: w.theta,
            });
        }
    }
    let slide = arc_run(geom, w, cap)?;
    n += slide.len;
    // The earliest (in forward time) point is the start of the excursion;
    // the arc collisions after it are intermediate.
    arc += slide.len;
    Ok((slide.last.reversed(), n, seg, arc))
}

/// `T^{-1}(x)` and `phi_-(x) = phi_+(T^{-1} x)`.
pub fn induced_backward(geom: &StadiumGeometry, x: PhasePoint) -> Result<ExcursionRecord> {
    induced_backward_with_cap(geom, x, DEFAULT_CAP)
}

pub fn induced_backward_with_cap(
    geom: &StadiumGeometry,
    x: PhasePoint,
    cap: u64,
) -> Result<ExcursionRecord> {
    require_x(geom, x)?;
    let (start, n, seg, arc) = return_backward(geom, x, cap)?;
    Ok(ExcursionRecord {
        start,
        end: x,
        return_time: n,
        excursion_kind: classify_excursion(n, seg, arc),
        segment_hits: seg,
        arc_hits: arc,
        collision_trace: None,
    })
}

/// Collision-by-collision replay of the excursion starting at `x`, calling
/// `visit` on every collision from `x` up to (excluding) the return to `X`.
/// Returns the return point and the number of collisions.
pub fn walk_excursion(
    geom: &StadiumGeometry,
    x: PhasePoint,
    cap: u64,
    mut visit: impl FnMut(PhasePoint, &crate::billiard::CollisionStep),
) -> Result<(PhasePoint, u64)> {
    let mut z = x;
    let mut zc = geom.classify(x.r);
    let mut n = 0u64;
    loop {
        let s = forward(geom, z)?;
        visit(z, &s);
        n += 1;
        if s.crossed_component.is_arc() && s.crossed_component != zc {
            return Ok((s.next, n));
        }
        if n > cap {
            return Err(Error::CapExceeded { run: n, cap });
        }
        z = s.next;
        zc = s.crossed_component;
    }
}

/// [`induced_forward`] with the full collision sequence recorded.
pub fn induced_forward_traced(geom: &StadiumGeometry, x: PhasePoint) -> Result<ExcursionRecord> {
    let mut rec = induced_forward(geom, x)?;
    let mut trace = Vec::with_capacity(rec.return_time as usize);
    walk_excursion(geom, x, DEFAULT_CAP, |z, _| trace.push(z))?;
    rec.collision_trace = Some(trace);
    Ok(rec)
}

/// Derivative of the induced map at `x` and the excursion it follows.
pub fn induced_tangent(geom: &StadiumGeometry, x: PhasePoint) -> Result<(Mat2, PhasePoint, u64)> {
    let mut m: Mat2 = [[1.0, 0.0], [0.0, 1.0]];
    let (end, n) = walk_excursion(geom, x, DEFAULT_CAP, |z, s| {
        m = mat_mul(&tangent_from_step(geom, z, s), &m);
    })?;
    Ok((m, end, n))
}

/// Per-return hyperbolicity diagnostics along an orbit of `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionReport {
    /// `log` of the expansion factor of the tracked unstable vector at each
    /// measured return.
    pub log_expansion: Vec<f64>,
    pub return_times: Vec<u64>,
    pub kinds: Vec<ExcursionKind>,
    /// For bouncing returns: factor by which `DT` shrinks the p-length
    /// `cos(theta) |dr|` of a stable vector.
    pub stable_contraction: Vec<Option<f64>>,
}

/// Tracks an unstable vector along `steps` returns after `burn_in` returns
/// used to align it with the unstable direction. The stable vector at each
/// point is obtained by pulling a generic vector back through the next
/// `lookahead` returns.
pub fn expansion_check(
    geom: &StadiumGeometry,
    x: PhasePoint,
    steps: usize,
    burn_in: usize,
    lookahead: usize,
) -> Result<ExpansionReport> {
    require_x(geom, x)?;
    let total = burn_in + steps + lookahead;
    let mut points = Vec::with_capacity(total + 1);
    let mut mats = Vec::with_capacity(total);
    let mut times = Vec::with_capacity(total);
    let mut kinds = Vec::with_capacity(total);
    let mut z = x;
    for _ in 0..total {
        let (m, end, n) = induced_tangent(geom, z)?;
        let (_, _, seg, arc) = return_forward(geom, z, DEFAULT_CAP)?;
        points.push(z);
        mats.push(m);
        times.push(n);
        kinds.push(classify_excursion(n, seg, arc));
        z = end;
    }
    points.push(z);
    let mut v = [1.0f64, 1.0];
    let mut report = ExpansionReport {
        log_expansion: Vec::with_capacity(steps),
        return_times: Vec::with_capacity(steps),
        kinds: Vec::with_capacity(steps),
        stable_contraction: Vec::with_capacity(steps),
    };
    for (k, m) in mats.iter().enumerate().take(burn_in + steps) {
        let before = v[0].hypot(v[1]);
        let w = mat_apply(m, v);
        let after = w[0].hypot(w[1]);
        v = [w[0] / after, w[1] / after];
        if k < burn_in {
            continue;
        }
        report.log_expansion.push((after / before).ln());
        report.return_times.push(times[k]);
        report.kinds.push(kinds[k]);
        report
            .stable_contraction
            .push(if kinds[k] == ExcursionKind::Bouncing {
                Some(stable_factor(
                    &mats[k..(k + 1 + lookahead).min(mats.len())],
                    points[k].theta.cos(),
                    points[k + 1].theta.cos(),
                ))
            } else {
                None
            });
    }
    Ok(report)
}

/// p-metric contraction of the first matrix on the stable direction defined
/// by the whole product; `c0`, `c1` are `cos(theta)` before and after.
fn stable_factor(mats: &[Mat2], c0: f64, c1: f64) -> f64 {
    let mut prod: Mat2 = [[1.0, 0.0], [0.0, 1.0]];
    for m in mats {
        prod = mat_mul(m, &prod);
    }
    // The most contracted direction of `prod` is the right singular vector
    // of its smallest singular value.
    let ata = [
        [
            prod[0][0] * prod[0][0] + prod[1][0] * prod[1][0],
            prod[0][0] * prod[0][1] + prod[1][0] * prod[1][1],
        ],
        [
            prod[0][1] * prod[0][0] + prod[1][1] * prod[1][0],
            prod[0][1] * prod[0][1] + prod[1][1] * prod[1][1],
        ],
    ];
    let tr = ata[0][0] + ata[1][1];
    let det = ata[0][0] * ata[1][1] - ata[0][1] * ata[1][0];
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    let small = 0.5 * tr - disc;
    // Eigenvector of ata for `small`.
    let v = if ata[0][1].abs() > 1e-300 {
        [ata[0][1], small - ata[0][0]]
    } else if ata[0][0] <= ata[1][1] {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    let norm = v[0].hypot(v[1]);
    let v = [v[0] / norm, v[1] / norm];
    let w = mat_apply(&mats[0], v);
    (c1 * w[0].abs()) / (c0 * v[0].abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundaryComponent;
    use std::f64::consts::PI;

    fn g2() -> StadiumGeometry {
        StadiumGeometry::new(2.0).unwrap()
    }

    #[test]
    fn cosine_mass_of_x() {
        // Midpoint rule over the right arc, membership decided by dynamics.
        let g = g2();
        let k = 600;
        let (dr, dt) = (PI / k as f64, PI / k as f64);
        let mut mass = 0.0;
        for a in 0..k {
            for b in 0..k {
                let x = PhasePoint {
                    r: (a as f64 + 0.5) * dr,
                    theta: -PI / 2.0 + (b as f64 + 0.5) * dt,
                };
                if in_x(&g, x).unwrap() {
                    mass += x.theta.cos() * dr * dt;
                }
            }
        }
        assert!((2.0 * mass - X_COS_MASS).abs() < 1e-2, "{mass}");
        assert!((mu0_of_x(&g) - 2.0 / (PI + 2.0)).abs() < 1e-15);
    }

    #[test]
    fn membership_examples() {
        let g = g2();
        assert!(!in_x(
            &g,
            PhasePoint {
                r: PI + 1.0,
                theta: 0.0
            }
        )
        .unwrap());
        assert!(in_x(
            &g,
            PhasePoint {
                r: PI / 2.0,
                theta: 0.0
            }
        )
        .unwrap());
        // Mid-slide: the previous chord of a theta = pi/3 slide lands pi/3
        // earlier on the same arc.
        let x = PhasePoint {
            r: 1.5,
            theta: PI / 3.0,
        };
        let prev = backward(&g, x).unwrap();
        assert_eq!(prev.crossed_component, BoundaryComponent::RightArc);
        assert!(!in_x(&g, x).unwrap());
    }

    #[test]
    fn diameter_is_a_short_return() {
        let g = g2();
        let rec = induced_forward(
            &g,
            PhasePoint {
                r: PI / 2.0,
                theta: 0.0,
            },
        )
        .unwrap();
        assert_eq!(rec.return_time, 1);
        assert_eq!(rec.excursion_kind, ExcursionKind::Short);
        assert!((rec.end.r - (1.5 * PI + 2.0)).abs() < 1e-12);
        let back = induced_backward(
            &g,
            PhasePoint {
                r: PI / 2.0,
                theta: 0.0,
            },
        )
        .unwrap();
        assert_eq!(back.return_time, 1);
    }

    #[test]
    fn outside_x_is_rejected() {
        let g = g2();
        let e = induced_forward(
            &g,
            PhasePoint {
                r: PI + 1.0,
                theta: 0.0,
            },
        )
        .unwrap_err();
        assert!(matches!(e, Error::NotInInducedSet { .. }));
    }

    #[test]
    fn classification_rules() {
        assert_eq!(classify_excursion(8, 7, 0), ExcursionKind::Short);
        assert_eq!(classify_excursion(9, 4, 4), ExcursionKind::Bouncing);
        assert_eq!(classify_excursion(12, 3, 8), ExcursionKind::Sliding);
    }
}
