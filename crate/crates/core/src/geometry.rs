//! Node layout, forward sensing parameters, and the inverse ellipse map.
//!
//! Angles are in degrees, counter-clockwise positive. The angle of arrival at
//! the RIS is measured from the RIS boresight, so the admissible half-plane in
//! front of the surface is `theta in (-90, 90)`.
//!
//! A target with total delay `tau` lies on the ellipse whose foci are the AP
//! and the RIS and whose focal-distance sum is `c*tau - d(RIS, PR)`. It also
//! lies on the ray leaving the RIS at bearing `theta`. Because the ray starts
//! at a focus it crosses the ellipse exactly once, which is the position.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Propagation speed in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Unit vector at `bearing_deg`.
    pub fn from_bearing(bearing_deg: f64) -> Self {
        let (s, c) = bearing_deg.to_radians().sin_cos();
        Self::new(c, s)
    }

    /// Rotates counter-clockwise about the origin.
    pub fn rotated(self, deg: f64) -> Self {
        let (s, c) = deg.to_radians().sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

pub fn distance(p: Point, q: Point) -> f64 {
    (p - q).norm()
}

/// Bearing of `to` as seen from `from`, in (-180, 180].
pub fn bearing_deg(from: Point, to: Point) -> f64 {
    let d = to - from;
    d.y.atan2(d.x).to_degrees()
}

/// Wraps an angle into (-180, 180].
pub fn wrap_deg(angle: f64) -> f64 {
    let mut a = angle % 360.0;
    if a > 180.0 {
        a -= 360.0;
    } else if a <= -180.0 {
        a += 360.0;
    }
    a
}

/// Positions of the access point, the RIS and the passive radar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeLayout {
    pub ap: Point,
    pub ris: Point,
    pub pr: Point,
    pub cell_width: f64,
    pub cell_height: f64,
    /// Bearing of the RIS array normal; AoAs at the RIS are measured from it.
    pub ris_boresight_deg: f64,
    /// Bearing of the PR array normal.
    pub pr_boresight_deg: f64,
}

impl NodeLayout {
    /// Layout with the RIS facing +x and the PR array facing the RIS.
    pub fn new(ap: Point, ris: Point, pr: Point, cell_width: f64, cell_height: f64) -> Result<Self> {
        let layout = Self {
            ap,
            ris,
            pr,
            cell_width,
            cell_height,
            ris_boresight_deg: 0.0,
            pr_boresight_deg: bearing_deg(pr, ris),
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<()> {
        let pts = [("ap", self.ap), ("ris", self.ris), ("pr", self.pr)];
        if !(self.cell_width.is_finite() && self.cell_width > 0.0)
            || !(self.cell_height.is_finite() && self.cell_height > 0.0)
        {
            return Err(Error::invalid("cell dimensions must be positive and finite"));
        }
        if !self.ris_boresight_deg.is_finite() || !self.pr_boresight_deg.is_finite() {
            return Err(Error::invalid("array boresights must be finite"));
        }
        for (name, p) in pts {
            if !p.is_finite() {
                return Err(Error::invalid(format!("{name} position is not finite")));
            }
            if !self.contains(p) {
                return Err(Error::invalid(format!(
                    "{name} position ({}, {}) lies outside the cell",
                    p.x, p.y
                )));
            }
        }
        if distance(self.ap, self.ris) == 0.0 {
            return Err(Error::DegenerateGeometry(
                "AP and RIS coincide; the ellipse foci must be distinct".into(),
            ));
        }
        Ok(())
    }

    pub fn contains(&self, p: Point) -> bool {
        (0.0..=self.cell_width).contains(&p.x) && (0.0..=self.cell_height).contains(&p.y)
    }

    pub fn ap_ris_distance(&self) -> f64 {
        distance(self.ap, self.ris)
    }

    pub fn ris_pr_distance(&self) -> f64 {
        distance(self.ris, self.pr)
    }

    /// Angle of `p` in the RIS frame.
    pub fn angle_at_ris(&self, p: Point) -> f64 {
        wrap_deg(bearing_deg(self.ris, p) - self.ris_boresight_deg)
    }

    /// Angle of `p` in the PR frame.
    pub fn angle_at_pr(&self, p: Point) -> f64 {
        wrap_deg(bearing_deg(self.pr, p) - self.pr_boresight_deg)
    }

    /// Delay of the target-free AP -> RIS -> PR relay path.
    pub fn relay_delay(&self) -> f64 {
        (self.ap_ris_distance() + self.ris_pr_distance()) / SPEED_OF_LIGHT
    }

    /// Extra path length of a bounce off `p` relative to the direct AP -> RIS hop.
    pub fn excess_path(&self, p: Point) -> f64 {
        distance(self.ap, p) + distance(p, self.ris) - self.ap_ris_distance()
    }

    /// Angle at `p` between the directions to the AP and to the RIS.
    pub fn bistatic_angle_deg(&self, p: Point) -> f64 {
        let u = self.ap - p;
        let v = self.ris - p;
        let c = u.dot(v) / (u.norm() * v.norm());
        c.clamp(-1.0, 1.0).acos().to_degrees()
    }
}

/// Angle of arrival at the RIS and total AP -> target -> RIS -> PR delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingPair {
    pub theta_ris_deg: f64,
    pub tau_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseParams {
    pub a: f64,
    pub b: f64,
    pub center: Point,
    pub tilt_deg: f64,
}

pub fn forward_sensing(target: Point, layout: &NodeLayout) -> Result<SensingPair> {
    if !target.is_finite() {
        return Err(Error::invalid("target position is not finite"));
    }
    let d_ris = distance(target, layout.ris);
    let scale = layout.ap_ris_distance().max(1.0);
    if d_ris <= 1e-12 * scale {
        return Err(Error::DegenerateGeometry("target coincides with the RIS".into()));
    }
    if layout.excess_path(target) <= 1e-12 * scale {
        return Err(Error::DegenerateGeometry(
            "target lies on the AP-RIS segment".into(),
        ));
    }
    let theta = layout.angle_at_ris(target);
    if theta.abs() >= 90.0 {
        return Err(Error::DegenerateGeometry(format!(
            "target bearing {theta:.3} deg is behind the RIS"
        )));
    }
    let path = distance(layout.ap, target) + d_ris + layout.ris_pr_distance();
    Ok(SensingPair {
        theta_ris_deg: theta,
        tau_s: path / SPEED_OF_LIGHT,
    })
}

pub fn ellipse_from_delay(tau_s: f64, layout: &NodeLayout) -> Result<EllipseParams> {
    let focal = layout.ap_ris_distance();
    let path = SPEED_OF_LIGHT * tau_s - layout.ris_pr_distance();
    if !path.is_finite() || path <= focal {
        return Err(Error::InfeasibleDelay {
            path_m: path,
            focal_m: focal,
        });
    }
    let a = 0.5 * path;
    let half_focal = 0.5 * focal;
    let b = ((a - half_focal) * (a + half_focal)).sqrt();
    Ok(EllipseParams {
        a,
        b,
        center: (layout.ap + layout.ris) * 0.5,
        tilt_deg: bearing_deg(layout.ap, layout.ris),
    })
}

/// Intersects the RIS bearing ray with the delay ellipse.
///
/// The ray is substituted into the ellipse equation in the ellipse-aligned
/// frame, `A t^2 + B t + C = 0` with `C < 0` because the ray origin is a
/// focus; the single positive root is the point in front of the RIS.
pub fn map_to_position(pair: SensingPair, layout: &NodeLayout) -> Result<Point> {
    if !(pair.theta_ris_deg.is_finite() && pair.theta_ris_deg.abs() < 90.0) {
        return Err(Error::invalid(format!(
            "AoA {} deg outside (-90, 90)",
            pair.theta_ris_deg
        )));
    }
    let ellipse = ellipse_from_delay(pair.tau_s, layout)?;
    let dir = Point::from_bearing(layout.ris_boresight_deg + pair.theta_ris_deg);

    let o = (layout.ris - ellipse.center).rotated(-ellipse.tilt_deg);
    let u = dir.rotated(-ellipse.tilt_deg);
    let (a2, b2) = (ellipse.a * ellipse.a, ellipse.b * ellipse.b);
    let qa = u.x * u.x / a2 + u.y * u.y / b2;
    let qb = 2.0 * (o.x * u.x / a2 + o.y * u.y / b2);
    let qc = o.x * o.x / a2 + o.y * o.y / b2 - 1.0;
    let disc = qb * qb - 4.0 * qa * qc;
    if !(disc.is_finite() && disc >= 0.0) {
        return Err(Error::NoSolution("ray misses the delay ellipse".into()));
    }
    let sq = disc.sqrt();
    // positive root without cancellation
    let t = if qb >= 0.0 {
        2.0 * qc / (-qb - sq)
    } else {
        (-qb + sq) / (2.0 * qa)
    };
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::NoSolution(format!(
            "no intersection in front of the RIS (t = {t})"
        )));
    }
    Ok(layout.ris + dir * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn toy_layout() -> NodeLayout {
        NodeLayout::new(
            Point::new(0.0, 0.0),
            Point::new(100.0, 0.0),
            Point::new(100.0, 100.0),
            1000.0,
            1000.0,
        )
        .unwrap()
    }

    /// Cell-scale layout: RIS on the west wall facing east.
    fn cell_layout() -> NodeLayout {
        NodeLayout::new(
            Point::new(100.0, 0.0),
            Point::new(0.0, 600.0),
            Point::new(200.0, 1000.0),
            1000.0,
            1000.0,
        )
        .unwrap()
    }

    /// Closed form for a ray leaving a focus: |D + t u| = 2a - t.
    fn focal_ray_oracle(pair: SensingPair, layout: &NodeLayout) -> Point {
        let two_a = SPEED_OF_LIGHT * pair.tau_s - layout.ris_pr_distance();
        let u = Point::from_bearing(layout.ris_boresight_deg + pair.theta_ris_deg);
        let d = layout.ris - layout.ap;
        let t = (two_a * two_a - d.dot(d)) / (2.0 * two_a + 2.0 * u.dot(d));
        layout.ris + u * t
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(Point::new(0.0, 0.0), Point::new(3.0, 4.0)), 5.0);
        assert_eq!(distance(Point::new(7.0, 7.0), Point::new(7.0, 7.0)), 0.0);
        assert_abs_diff_eq!(
            distance(Point::new(0.0, 0.0), Point::new(1000.0, 1000.0)),
            1000.0 * 2f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn forward_sensing_sums_three_hops() {
        // the RIS faces -x so the target is in front of it
        let mut layout = toy_layout();
        layout.ris_boresight_deg = 180.0;
        let t = Point::new(50.0, 50.0);
        let pair = forward_sensing(t, &layout).unwrap();
        let expect = (50f64.hypot(50.0) + 50f64.hypot(50.0) + 100.0) / SPEED_OF_LIGHT;
        assert_abs_diff_eq!(pair.tau_s, expect, epsilon = 1e-18);
        assert_abs_diff_eq!(pair.theta_ris_deg, -45.0, epsilon = 1e-12);
        // facing +x the same point is behind the surface
        assert!(forward_sensing(t, &toy_layout()).is_err());
    }

    #[test]
    fn forward_sensing_rejects_degenerate_targets() {
        let layout = cell_layout();
        assert!(matches!(
            forward_sensing(layout.ris, &layout),
            Err(Error::DegenerateGeometry(_))
        ));
        let mid = (layout.ap + layout.ris) * 0.5;
        assert!(matches!(
            forward_sensing(mid, &layout),
            Err(Error::DegenerateGeometry(_))
        ));
        // behind the surface
        let mut back = layout;
        back.ris = Point::new(500.0, 600.0);
        assert!(forward_sensing(Point::new(100.0, 600.0), &back).is_err());
    }

    #[test]
    fn valid_targets_exceed_relay_path() {
        let layout = cell_layout();
        for t in [Point::new(300.0, 300.0), Point::new(900.0, 900.0), Point::new(20.0, 610.0)] {
            let pair = forward_sensing(t, &layout).unwrap();
            assert!(SPEED_OF_LIGHT * pair.tau_s - layout.ris_pr_distance() > layout.ap_ris_distance());
        }
    }

    #[test]
    fn ellipse_example() {
        let layout = toy_layout();
        let e = ellipse_from_delay(300.0 / SPEED_OF_LIGHT, &layout).unwrap();
        assert_abs_diff_eq!(e.a, 100.0, epsilon = 1e-9);
        assert_abs_diff_eq!(e.b, 50.0 * 3f64.sqrt(), epsilon = 1e-9);
        assert_eq!(e.center, Point::new(50.0, 0.0));
        assert_eq!(e.tilt_deg, 0.0);
        assert!(matches!(
            ellipse_from_delay(200.0 / SPEED_OF_LIGHT, &layout),
            Err(Error::InfeasibleDelay { .. })
        ));
    }

    #[test]
    fn degenerate_delay_is_infeasible() {
        let layout = cell_layout();
        let pair = SensingPair {
            theta_ris_deg: 10.0,
            tau_s: layout.relay_delay(),
        };
        assert!(matches!(
            map_to_position(pair, &layout),
            Err(Error::InfeasibleDelay { .. })
        ));
    }

    #[test]
    fn boresight_point_lies_on_ray_and_ellipse() {
        let layout = cell_layout();
        let tau = (layout.ap_ris_distance() + layout.ris_pr_distance() + 400.0) / SPEED_OF_LIGHT;
        let p = map_to_position(
            SensingPair {
                theta_ris_deg: 0.0,
                tau_s: tau,
            },
            &layout,
        )
        .unwrap();
        assert_abs_diff_eq!(p.y, layout.ris.y, epsilon = 1e-9);
        assert!(p.x > layout.ris.x);
        let focal_sum = distance(p, layout.ap) + distance(p, layout.ris);
        assert_abs_diff_eq!(
            focal_sum,
            SPEED_OF_LIGHT * tau - layout.ris_pr_distance(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn out_of_range_angle_is_rejected() {
        let layout = cell_layout();
        let pair = SensingPair {
            theta_ris_deg: 90.0,
            tau_s: layout.relay_delay() * 2.0,
        };
        assert!(matches!(map_to_position(pair, &layout), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn quadratic_agrees_with_focal_closed_form() {
        let layout = cell_layout();
        for (theta, extra) in [(-55.0, 10.0), (0.0, 800.0), (33.3, 250.0), (59.0, 40.0)] {
            let pair = SensingPair {
                theta_ris_deg: theta,
                tau_s: layout.relay_delay() + extra / SPEED_OF_LIGHT,
            };
            let a = map_to_position(pair, &layout).unwrap();
            let b = focal_ray_oracle(pair, &layout);
            assert!(distance(a, b) < 1e-9, "{a:?} vs {b:?}");
        }
    }

    fn admissible_target() -> impl Strategy<Value = Point> {
        (0.0f64..1000.0, 0.0f64..1000.0)
            .prop_map(|(x, y)| Point::new(x, y))
            .prop_filter("admissible", |p| {
                let l = cell_layout();
                l.angle_at_ris(*p).abs() < 89.0 && l.excess_path(*p) > 1e-3
            })
    }

    proptest! {
        #[test]
        fn round_trip_recovers_position(p in admissible_target()) {
            let layout = cell_layout();
            let pair = forward_sensing(p, &layout).unwrap();
            let q = map_to_position(pair, &layout).unwrap();
            prop_assert!(distance(p, q) < 1e-6);
            let back = forward_sensing(q, &layout).unwrap();
            prop_assert!((back.theta_ris_deg - pair.theta_ris_deg).abs() < 1e-9);
            prop_assert!((back.tau_s - pair.tau_s).abs() < 1e-15);
            // root selection: in front of the surface
            prop_assert!((q - layout.ris).dot(Point::from_bearing(layout.ris_boresight_deg)) > 0.0);
        }

        #[test]
        fn rigid_motion_moves_the_solution(
            p in admissible_target(),
            tx in -500.0f64..500.0, ty in -500.0f64..500.0,
            rot in -180.0f64..180.0,
        ) {
            let layout = cell_layout();
            let pair = forward_sensing(p, &layout).unwrap();
            let base = map_to_position(pair, &layout).unwrap();

            let shift = Point::new(tx, ty);
            let mut moved = layout;
            moved.ap = layout.ap + shift;
            moved.ris = layout.ris + shift;
            moved.pr = layout.pr + shift;
            let q = map_to_position(pair, &moved).unwrap();
            prop_assert!(distance(q, base + shift) < 1e-6);

            let mut turned = layout;
            turned.ap = layout.ap.rotated(rot);
            turned.ris = layout.ris.rotated(rot);
            turned.pr = layout.pr.rotated(rot);
            turned.ris_boresight_deg = layout.ris_boresight_deg + rot;
            turned.pr_boresight_deg = layout.pr_boresight_deg + rot;
            let q = map_to_position(pair, &turned).unwrap();
            prop_assert!(distance(q, base.rotated(rot)) < 1e-6);
        }
    }
}
