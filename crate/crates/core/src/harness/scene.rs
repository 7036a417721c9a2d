//! Random target placement.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{distance, forward_sensing, NodeLayout, Point, SPEED_OF_LIGHT};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConstraints {
    /// Largest admissible |AoA| at the RIS.
    pub sector_deg: f64,
    /// Largest angle at the target between the AP and the RIS. Near 180 deg
    /// the delay ellipse is thin and one sample of delay error maps to a
    /// large position error.
    pub max_bistatic_angle_deg: f64,
    pub min_delay_separation_samples: f64,
    pub min_bearing_separation_deg: f64,
    /// Pairs closer than this in bearing count as sharing a bearing.
    pub co_bearing_tolerance_deg: f64,
    /// Chance that a new target is placed on an existing target's bearing.
    pub co_bearing_probability: f64,
    /// Extra margin, in samples, between a target's delay and the edges of
    /// the receiver's unambiguous delay window.
    pub window_margin_samples: f64,
    pub max_attempts: usize,
}

impl Default for SceneConstraints {
    fn default() -> Self {
        Self {
            sector_deg: 60.0,
            max_bistatic_angle_deg: 115.0,
            min_delay_separation_samples: 3.0,
            min_bearing_separation_deg: 1.0,
            co_bearing_tolerance_deg: 0.1,
            co_bearing_probability: 0.0,
            window_margin_samples: 3.0,
            max_attempts: 10_000,
        }
    }
}

impl SceneConstraints {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(Error::config(format!("scene.{field}"), msg));
        if !(self.sector_deg > 0.0 && self.sector_deg < 90.0) {
            return bad("sector_deg", "must lie in (0, 90)");
        }
        if !(self.max_bistatic_angle_deg > 0.0 && self.max_bistatic_angle_deg <= 180.0) {
            return bad("max_bistatic_angle_deg", "must lie in (0, 180]");
        }
        if !(self.min_delay_separation_samples >= 0.0) {
            return bad("min_delay_separation_samples", "must be non-negative");
        }
        if !(self.min_bearing_separation_deg >= 0.0 && self.co_bearing_tolerance_deg >= 0.0) {
            return bad("min_bearing_separation_deg", "separations must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.co_bearing_probability) {
            return bad("co_bearing_probability", "must lie in [0, 1]");
        }
        if !(self.window_margin_samples >= 0.0) {
            return bad("window_margin_samples", "must be non-negative");
        }
        if self.max_attempts == 0 {
            return bad("max_attempts", "must be at least 1");
        }
        Ok(())
    }
}

/// The receiver's unambiguous delay window, see [`crate::estimation::DelayGate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayWindow {
    pub sample_rate_hz: f64,
    pub period_samples: usize,
    pub guard_samples: usize,
    /// Direct AP -> PR delay to keep clear of, when the receiver gates it.
    pub direct_delay_s: Option<f64>,
}

impl DelayWindow {
    /// Excess-path delay (samples) of a target relative to the relay path.
    fn excess_samples(&self, layout: &NodeLayout, p: Point) -> f64 {
        layout.excess_path(p) / SPEED_OF_LIGHT * self.sample_rate_hz
    }

    fn admits(&self, layout: &NodeLayout, p: Point, margin: f64) -> bool {
        let e = self.excess_samples(layout, p);
        let g = self.guard_samples as f64;
        let l = self.period_samples as f64;
        if !(e >= g + margin && e <= l - 2.0 * g - margin) {
            return false;
        }
        match self.direct_delay_s {
            None => true,
            Some(d) => {
                let total = layout.relay_delay() * self.sample_rate_hz + e;
                let diff = (total - d * self.sample_rate_hz).rem_euclid(l);
                diff.min(l - diff) >= g + margin
            }
        }
    }
}

/// Single-target admissibility.
pub fn admissible(p: Point, layout: &NodeLayout, c: &SceneConstraints, window: &DelayWindow) -> bool {
    layout.contains(p)
        && forward_sensing(p, layout).is_ok_and(|s| s.theta_ris_deg.abs() <= c.sector_deg)
        && layout.bistatic_angle_deg(p) <= c.max_bistatic_angle_deg
        && window.admits(layout, p, c.window_margin_samples)
}

fn separated(p: Point, q: Point, layout: &NodeLayout, c: &SceneConstraints, window: &DelayWindow) -> bool {
    let dd = (window.excess_samples(layout, p) - window.excess_samples(layout, q)).abs();
    if dd < c.min_delay_separation_samples {
        return false;
    }
    let db = (layout.angle_at_ris(p) - layout.angle_at_ris(q)).abs();
    db >= c.min_bearing_separation_deg || db <= c.co_bearing_tolerance_deg
}

/// Draws `k` targets uniformly over the cell, resampling any draw that
/// violates the constraints.
pub fn random_scene<R: Rng + ?Sized>(
    rng: &mut R,
    k: usize,
    layout: &NodeLayout,
    constraints: &SceneConstraints,
    window: &DelayWindow,
) -> Result<Vec<Point>> {
    let mut targets: Vec<Point> = Vec::with_capacity(k);
    let mut rejections = 0usize;
    let diag = distance(Point::new(0.0, 0.0), Point::new(layout.cell_width, layout.cell_height));
    while targets.len() < k {
        let co_bearing = !targets.is_empty()
            && constraints.co_bearing_probability > 0.0
            && rng.random_bool(constraints.co_bearing_probability);
        let p = if co_bearing {
            let anchor = targets[rng.random_range(0..targets.len())];
            let half = 0.5 * constraints.co_bearing_tolerance_deg;
            let off = if half > 0.0 { rng.random_range(-half..=half) } else { 0.0 };
            let bearing = layout.ris_boresight_deg + layout.angle_at_ris(anchor) + off;
            let r = rng.random_range(0.0..diag);
            layout.ris + Point::from_bearing(bearing) * r
        } else {
            Point::new(
                rng.random_range(0.0..=layout.cell_width),
                rng.random_range(0.0..=layout.cell_height),
            )
        };
        if admissible(p, layout, constraints, window)
            && targets
                .iter()
                .all(|&q| separated(p, q, layout, constraints, window))
        {
            targets.push(p);
            continue;
        }
        rejections += 1;
        if rejections >= constraints.max_attempts {
            return Err(Error::SceneGeneration {
                attempts: rejections,
                reason: format!("placed {} of {k} targets", targets.len()),
            });
        }
    }
    Ok(targets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    fn layout() -> NodeLayout {
        NodeLayout::new(
            Point::new(100.0, 0.0),
            Point::new(0.0, 600.0),
            Point::new(200.0, 1000.0),
            1000.0,
            1000.0,
        )
        .unwrap()
    }

    fn window() -> DelayWindow {
        DelayWindow {
            sample_rate_hz: SPEED_OF_LIGHT / 0.5,
            period_samples: 1989,
            guard_samples: 2,
            direct_delay_s: Some(distance(Point::new(100.0, 0.0), Point::new(200.0, 1000.0)) / SPEED_OF_LIGHT),
        }
    }

    #[test]
    fn no_targets_is_empty() {
        let mut rng = stream(1, Stream::Scene);
        assert!(random_scene(&mut rng, 0, &layout(), &SceneConstraints::default(), &window())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn seven_targets_satisfy_every_constraint() {
        let c = SceneConstraints::default();
        let (l, w) = (layout(), window());
        for seed in 0..50 {
            let mut rng = stream(seed, Stream::Scene);
            let t = random_scene(&mut rng, 7, &l, &c, &w).unwrap();
            assert_eq!(t.len(), 7);
            for (i, &p) in t.iter().enumerate() {
                assert!(admissible(p, &l, &c, &w));
                for &q in &t[..i] {
                    assert!(separated(p, q, &l, &c, &w));
                }
            }
        }
    }

    #[test]
    fn fixed_seed_fixed_scene() {
        let c = SceneConstraints::default();
        let a = random_scene(&mut stream(9, Stream::Scene), 4, &layout(), &c, &window()).unwrap();
        let b = random_scene(&mut stream(9, Stream::Scene), 4, &layout(), &c, &window()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn co_bearing_targets_share_a_bearing() {
        let c = SceneConstraints {
            co_bearing_probability: 1.0,
            ..SceneConstraints::default()
        };
        let l = layout();
        let t = random_scene(&mut stream(3, Stream::Scene), 3, &l, &c, &window()).unwrap();
        let b0 = l.angle_at_ris(t[0]);
        for p in &t[1..] {
            assert!((l.angle_at_ris(*p) - b0).abs() <= 0.1 + 1e-9);
        }
    }

    #[test]
    fn impossible_constraints_fail() {
        let c = SceneConstraints {
            min_delay_separation_samples: 5000.0,
            max_attempts: 200,
            ..SceneConstraints::default()
        };
        let e = random_scene(&mut stream(3, Stream::Scene), 2, &layout(), &c, &window()).unwrap_err();
        assert!(matches!(e, Error::SceneGeneration { .. }));
    }
}
