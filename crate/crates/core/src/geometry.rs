//! Stadium boundary, arclength coordinates and the invariant density of the
//! collision map.
//!
//! The boundary is two unit semicircles joined by two horizontal segments of
//! length `ell`. Arclength `r` runs counterclockwise from the lower endpoint
//! of the right semicircle:
//!
//! ```text
//!   [0, pi]               right arc, center ( ell/2, 0)
//!   (pi, pi+ell)          top segment, y = +1, traversed right to left
//!   [pi+ell, 2pi+ell]     left arc, center (-ell/2, 0)
//!   (2pi+ell, 2pi+2ell)   bottom segment, y = -1, traversed left to right
//! ```
//!
//! Arcs are closed and segments open, so junction points belong to an arc.
//!
//! The angle `theta` is measured from the inward normal `n` with the
//! outgoing velocity `v = cos(theta) n + sin(theta) t`, where `t` is the unit
//! tangent along increasing `r`. With this orientation consecutive collisions
//! on one arc advance `r` by `pi - 2 theta`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x.mul_add(o.x, self.y * o.y)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Rotation by +90 degrees.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// One of the four smooth pieces of the stadium boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryComponent {
    RightArc,
    TopSegment,
    LeftArc,
    BottomSegment,
}

impl BoundaryComponent {
    #[inline]
    pub fn is_arc(self) -> bool {
        matches!(
            self,
            BoundaryComponent::RightArc | BoundaryComponent::LeftArc
        )
    }

    #[inline]
    pub fn is_segment(self) -> bool {
        !self.is_arc()
    }

    /// Curvature of the piece seen from inside (focusing arcs are +1).
    #[inline]
    pub fn curvature(self) -> f64 {
        if self.is_arc() {
            1.0
        } else {
            0.0
        }
    }
}

/// Stadium with unit semicircles and straight segments of length `ell`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct StadiumGeometry {
    ell: f64,
    perimeter: f64,
}

impl TryFrom<f64> for StadiumGeometry {
    type Error = Error;
    fn try_from(ell: f64) -> Result<Self> {
        StadiumGeometry::new(ell)
    }
}

impl From<StadiumGeometry> for f64 {
    fn from(g: StadiumGeometry) -> f64 {
        g.ell
    }
}

impl StadiumGeometry {
    pub fn new(ell: f64) -> Result<Self> {
        if !(ell.is_finite() && ell > 0.0) {
            return Err(Error::InvalidLength(ell));
        }
        Ok(Self {
            ell,
            perimeter: 2.0 * PI + 2.0 * ell,
        })
    }

    #[inline]
    pub fn ell(&self) -> f64 {
        self.ell
    }

    #[inline]
    pub fn half(&self) -> f64 {
        0.5 * self.ell
    }

    #[inline]
    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    /// Diagonal of the bounding box; no flight is longer.
    pub fn max_flight(&self) -> f64 {
        ((self.ell + 2.0).powi(2) + 4.0).sqrt()
    }

    #[inline]
    pub fn right_center(&self) -> Vec2 {
        Vec2::new(self.half(), 0.0)
    }

    #[inline]
    pub fn left_center(&self) -> Vec2 {
        Vec2::new(-self.half(), 0.0)
    }

    /// Start of each component's `r`-range.
    #[inline]
    pub fn component_start(&self, c: BoundaryComponent) -> f64 {
        match c {
            BoundaryComponent::RightArc => 0.0,
            BoundaryComponent::TopSegment => PI,
            BoundaryComponent::LeftArc => PI + self.ell,
            BoundaryComponent::BottomSegment => 2.0 * PI + self.ell,
        }
    }

    /// Length of each component's `r`-range.
    #[inline]
    pub fn component_length(&self, c: BoundaryComponent) -> f64 {
        if c.is_arc() {
            PI
        } else {
            self.ell
        }
    }

    /// Reduces `r` into `[0, perimeter)`.
    #[inline]
    pub fn wrap(&self, r: f64) -> f64 {
        let w = r.rem_euclid(self.perimeter);
        if w >= self.perimeter {
            0.0
        } else {
            w
        }
    }

    /// Component containing `r` (mod perimeter); arcs closed, segments open.
    #[inline]
    pub fn classify(&self, r: f64) -> BoundaryComponent {
        let r = self.wrap(r);
        if r <= PI {
            BoundaryComponent::RightArc
        } else if r < PI + self.ell {
            BoundaryComponent::TopSegment
        } else if r <= 2.0 * PI + self.ell {
            BoundaryComponent::LeftArc
        } else {
            BoundaryComponent::BottomSegment
        }
    }

    /// Position, unit tangent (increasing `r`) and inward normal at `r`,
    /// for an `r` already known to lie on `comp`.
    #[inline]
    pub(crate) fn frame_on(&self, comp: BoundaryComponent, r: f64) -> (Vec2, Vec2, Vec2) {
        let h = self.half();
        match comp {
            BoundaryComponent::RightArc => {
                let (s, c) = r.sin_cos();
                let t = Vec2::new(c, s);
                (Vec2::new(h + s, -c), t, t.perp())
            }
            BoundaryComponent::TopSegment => (
                Vec2::new(h - (r - PI), 1.0),
                Vec2::new(-1.0, 0.0),
                Vec2::new(0.0, -1.0),
            ),
            BoundaryComponent::LeftArc => {
                let (s, c) = (r - PI - self.ell).sin_cos();
                let t = Vec2::new(-c, -s);
                (Vec2::new(-h - s, c), t, t.perp())
            }
            BoundaryComponent::BottomSegment => (
                Vec2::new(-h + (r - 2.0 * PI - self.ell), -1.0),
                Vec2::new(1.0, 0.0),
                Vec2::new(0.0, 1.0),
            ),
        }
    }

    /// Position, tangent and inward normal at arclength `r`.
    pub fn frame(&self, r: f64) -> (Vec2, Vec2, Vec2) {
        let r = self.wrap(r);
        self.frame_on(self.classify(r), r)
    }

    /// Boundary point at arclength `r`.
    pub fn position(&self, r: f64) -> Vec2 {
        self.frame(r).0
    }

    /// Arclength of a point on `comp`. The point is assumed to lie on the
    /// component up to rounding; the result is clamped into its range.
    #[inline]
    pub(crate) fn arclength_on(&self, comp: BoundaryComponent, q: Vec2) -> f64 {
        let h = self.half();
        match comp {
            BoundaryComponent::RightArc => {
                let s = (q.x - h).atan2(-q.y);
                s.clamp(0.0, PI)
            }
            BoundaryComponent::TopSegment => PI + (h - q.x).clamp(0.0, self.ell),
            BoundaryComponent::LeftArc => {
                let s = (-(q.x + h)).atan2(q.y);
                PI + self.ell + s.clamp(0.0, PI)
            }
            BoundaryComponent::BottomSegment => {
                2.0 * PI + self.ell + (q.x + h).clamp(0.0, self.ell)
            }
        }
    }

    /// Inverse of [`position`](Self::position) for points on the boundary.
    pub fn arclength(&self, q: Vec2) -> f64 {
        let h = self.half();
        let comp = if q.x >= h {
            BoundaryComponent::RightArc
        } else if q.x <= -h {
            BoundaryComponent::LeftArc
        } else if q.y > 0.0 {
            BoundaryComponent::TopSegment
        } else {
            BoundaryComponent::BottomSegment
        };
        self.wrap(self.arclength_on(comp, q))
    }

    /// Cartesian embedding: collision position and post-collision unit velocity.
    pub fn to_cartesian(&self, x: PhasePoint) -> (Vec2, Vec2) {
        let (p, t, n) = self.frame(x.r);
        let (s, c) = x.theta.sin_cos();
        (p, n * c + t * s)
    }

    /// Recovers the phase point from a boundary position and an inward unit
    /// velocity. `theta` is kept a machine epsilon away from grazing.
    pub fn from_cartesian(&self, q: Vec2, v: Vec2) -> PhasePoint {
        let r = self.arclength(q);
        let (_, t, n) = self.frame(r);
        let lim = FRAC_PI_2 - f64::EPSILON;
        let theta = v.dot(t).atan2(v.dot(n)).clamp(-lim, lim);
        PhasePoint { r, theta }
    }

    /// Density of the invariant measure of the collision map with respect to
    /// `dr dtheta`.
    #[inline]
    pub fn mu0_density(&self, x: PhasePoint) -> f64 {
        x.theta.cos() / (2.0 * self.perimeter)
    }
}

/// A collision: arclength position and angle to the inward normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub r: f64,
    pub theta: f64,
}

impl PhasePoint {
    /// Validated constructor; `r` is reduced modulo the perimeter.
    pub fn new(geom: &StadiumGeometry, r: f64, theta: f64) -> Result<Self> {
        if !r.is_finite() || !theta.is_finite() || theta.abs() >= FRAC_PI_2 {
            return Err(Error::InvalidPhasePoint { r, theta });
        }
        Ok(Self {
            r: geom.wrap(r),
            theta,
        })
    }

    /// Time reversal `(r, theta) -> (r, -theta)`.
    #[inline]
    pub fn reversed(self) -> Self {
        Self {
            r: self.r,
            theta: -self.theta,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;
    use proptest::prelude::*;

    fn g2() -> StadiumGeometry {
        StadiumGeometry::new(2.0).unwrap()
    }

    fn close(a: Vec2, b: Vec2, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn rejects_bad_length() {
        assert!(StadiumGeometry::new(0.0).is_err());
        assert!(StadiumGeometry::new(-1.0).is_err());
        assert!(StadiumGeometry::new(f64::NAN).is_err());
    }

    #[test]
    fn perimeter_is_exact() {
        for ell in [0.1, 1.0, 2.0, 7.5] {
            let g = StadiumGeometry::new(ell).unwrap();
            assert_eq!(g.perimeter(), 2.0 * PI + 2.0 * ell);
        }
    }

    #[test]
    fn classify_examples() {
        let g = g2();
        assert_eq!(g.classify(0.0), BoundaryComponent::RightArc);
        assert_eq!(g.classify(PI + 1.0), BoundaryComponent::TopSegment);
        assert_eq!(g.classify(PI), BoundaryComponent::RightArc);
        assert_eq!(g.classify(PI + 2.0), BoundaryComponent::LeftArc);
        assert_eq!(g.classify(2.0 * PI + 2.0), BoundaryComponent::LeftArc);
        assert_eq!(g.classify(2.0 * PI + 3.0), BoundaryComponent::BottomSegment);
        assert_eq!(g.classify(-0.5), BoundaryComponent::BottomSegment);
    }

    #[test]
    fn cartesian_examples() {
        let g = g2();
        let (p, v) = g.to_cartesian(PhasePoint { r: 0.0, theta: 0.0 });
        assert!(close(p, Vec2::new(1.0, -1.0), 1e-15));
        assert!(close(v, Vec2::new(0.0, 1.0), 1e-15));

        let (p, v) = g.to_cartesian(PhasePoint {
            r: PI + 1.0,
            theta: 0.0,
        });
        assert!(close(p, Vec2::new(0.0, 1.0), 1e-15));
        assert!(close(v, Vec2::new(0.0, -1.0), 1e-15));

        let (p, v) = g.to_cartesian(PhasePoint {
            r: PI / 2.0,
            theta: 0.0,
        });
        assert!(close(p, Vec2::new(2.0, 0.0), 1e-15));
        assert!(close(v, Vec2::new(-1.0, 0.0), 1e-15));
    }

    #[test]
    fn positive_theta_moves_along_increasing_r() {
        let g = g2();
        let (_, t, _) = g.frame(0.7);
        let (_, v) = g.to_cartesian(PhasePoint { r: 0.7, theta: 0.3 });
        assert!(v.dot(t) > 0.0);
    }

    #[test]
    fn boundary_is_continuous_at_junctions() {
        let g = g2();
        let eps = 1e-12;
        for r in [PI, PI + 2.0, 2.0 * PI + 2.0, g.perimeter()] {
            let a = g.position(r - eps);
            let b = g.position(r + eps);
            assert!(close(a, b, 1e-11), "jump at r = {r}");
        }
    }

    #[test]
    fn density_examples() {
        let g = g2();
        let d = g.mu0_density(PhasePoint { r: 1.0, theta: 0.0 });
        assert!((d - 1.0 / (2.0 * (2.0 * PI + 4.0))).abs() < 1e-15);
        assert!((d - 0.04863).abs() < 1e-5);
        let near = g.mu0_density(PhasePoint {
            r: 1.0,
            theta: FRAC_PI_2 - 1e-9,
        });
        assert!(near < 1e-9);
    }

    #[test]
    fn density_integrates_to_one() {
        for ell in [0.5, 2.0] {
            let g = StadiumGeometry::new(ell).unwrap();
            let rule = GaussLegendre::composite(64);
            // The density is r-independent; integrate over the full rectangle
            // anyway to exercise the 2D rule.
            let total = rule.integrate_2d(0.0, g.perimeter(), -FRAC_PI_2, FRAC_PI_2, |r, th| {
                g.mu0_density(PhasePoint { r, theta: th })
            });
            assert!((total - 1.0).abs() < 1e-6, "total = {total}");
        }
    }

    proptest! {
        #[test]
        fn classify_is_periodic(r in -100.0f64..100.0, k in -5i32..5) {
            let g = g2();
            prop_assert_eq!(g.classify(r), g.classify(r + k as f64 * g.perimeter()));
        }

        #[test]
        fn arclength_round_trip(r in 0.0f64..(2.0 * PI + 4.0), th in -1.5f64..1.5) {
            let g = g2();
            let x = PhasePoint::new(&g, r, th).unwrap();
            let (p, v) = g.to_cartesian(x);
            let y = g.from_cartesian(p, v);
            let dr = (y.r - x.r).abs();
            let dr = dr.min(g.perimeter() - dr);
            prop_assert!(dr <= 1e-12 * g.perimeter(), "dr = {}", dr);
            prop_assert!((y.theta - x.theta).abs() <= 1e-12);
        }
    }
}
