use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    /// Walls reflect agents specularly.
    Bounded,
    /// Toroidal wrap-around.
    Unbounded,
}

/// Square arena `[0, side]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArenaConfig {
    side: f64,
    boundary: BoundaryMode,
}

impl ArenaConfig {
    pub fn new(side: f64, boundary: BoundaryMode) -> Result<Self> {
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::Config(format!("arena side must be positive, got {side}")));
        }
        Ok(Self { side, boundary })
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn boundary(&self) -> BoundaryMode {
        self.boundary
    }

    pub fn centre(&self) -> (f64, f64) {
        (self.side / 2.0, self.side / 2.0)
    }

    /// Vector from `a` to `b`. Under wrap-around this is the minimum-image
    /// displacement.
    #[inline]
    pub fn displacement(&self, a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
        let mut dx = b.0 - a.0;
        let mut dy = b.1 - a.1;
        if self.boundary == BoundaryMode::Unbounded {
            let half = self.side / 2.0;
            if dx > half {
                dx -= self.side;
            } else if dx < -half {
                dx += self.side;
            }
            if dy > half {
                dy -= self.side;
            } else if dy < -half {
                dy += self.side;
            }
        }
        (dx, dy)
    }

    #[inline]
    pub fn distance(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let (dx, dy) = self.displacement(a, b);
        dx.hypot(dy)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self.boundary {
            BoundaryMode::Bounded => (0.0..=self.side).contains(&x) && (0.0..=self.side).contains(&y),
            BoundaryMode::Unbounded => (0.0..self.side).contains(&x) && (0.0..self.side).contains(&y),
        }
    }

    /// Bring a position that left the arena by at most one step back inside.
    ///
    /// Bounded arenas mirror the position about each violated wall and negate
    /// the matching velocity component. Unbounded arenas wrap coordinates.
    pub fn apply_boundary(&self, x: f64, y: f64, heading: f64) -> (f64, f64, f64) {
        match self.boundary {
            BoundaryMode::Unbounded => (wrap(x, self.side), wrap(y, self.side), heading),
            BoundaryMode::Bounded => {
                let (mut x, mut y, mut h) = (x, y, heading);
                if x < 0.0 {
                    x = -x;
                    h = PI - h;
                } else if x > self.side {
                    x = 2.0 * self.side - x;
                    h = PI - h;
                }
                if y < 0.0 {
                    y = -y;
                    h = -h;
                } else if y > self.side {
                    y = 2.0 * self.side - y;
                    h = -h;
                }
                (x.clamp(0.0, self.side), y.clamp(0.0, self.side), normalize_angle(h))
            }
        }
    }
}

fn wrap(v: f64, side: f64) -> f64 {
    let w = v.rem_euclid(side);
    // rem_euclid can round up to `side` for tiny negative inputs
    if w >= side {
        0.0
    } else {
        w
    }
}

/// Map an angle into `[0, 2π)`.
#[inline]
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed difference `to - from` mapped into `(-π, π]`.
#[inline]
pub fn angle_diff(from: f64, to: f64) -> f64 {
    let d = (to - from).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// The three experimental settings: agent count and boundary mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Setting {
    #[serde(rename = "40b")]
    Bounded40,
    #[serde(rename = "30b")]
    Bounded30,
    #[serde(rename = "40u")]
    Unbounded40,
}

impl Setting {
    pub const ALL: [Setting; 3] = [Setting::Bounded40, Setting::Bounded30, Setting::Unbounded40];

    pub fn agents(self) -> usize {
        match self {
            Setting::Bounded40 | Setting::Unbounded40 => 40,
            Setting::Bounded30 => 30,
        }
    }

    pub fn boundary(self) -> BoundaryMode {
        match self {
            Setting::Bounded40 | Setting::Bounded30 => BoundaryMode::Bounded,
            Setting::Unbounded40 => BoundaryMode::Unbounded,
        }
    }

    pub fn ordinal(self) -> u64 {
        match self {
            Setting::Bounded40 => 0,
            Setting::Bounded30 => 1,
            Setting::Unbounded40 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Setting::Bounded40 => "40b",
            Setting::Bounded30 => "30b",
            Setting::Unbounded40 => "40u",
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Setting::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown setting `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bounded() -> ArenaConfig {
        ArenaConfig::new(500.0, BoundaryMode::Bounded).unwrap()
    }

    fn torus() -> ArenaConfig {
        ArenaConfig::new(500.0, BoundaryMode::Unbounded).unwrap()
    }

    #[test]
    fn wraps_past_the_far_edge() {
        let (x, y, h) = torus().apply_boundary(501.0, 250.0, 0.3);
        assert_abs_diff_eq!(x, 1.0, epsilon = 1e-12);
        assert_eq!(y, 250.0);
        assert_eq!(h, 0.3);
    }

    #[test]
    fn reflects_off_the_low_wall() {
        let (x, y, h) = bounded().apply_boundary(-3.0, 250.0, PI);
        assert_eq!((x, y), (3.0, 250.0));
        assert_abs_diff_eq!(h, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn reflects_off_the_high_wall() {
        let (x, _, h) = bounded().apply_boundary(501.0, 250.0, 0.0);
        assert_eq!(x, 499.0);
        assert_abs_diff_eq!(h, PI, epsilon = 1e-12);
        let (_, y, h) = bounded().apply_boundary(10.0, 502.0, PI / 2.0);
        assert_eq!(y, 498.0);
        assert_abs_diff_eq!(h, 3.0 * PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn interior_points_are_untouched() {
        for arena in [bounded(), torus()] {
            assert_eq!(arena.apply_boundary(12.5, 480.0, 1.0), (12.5, 480.0, 1.0));
        }
    }

    #[test]
    fn corner_reflects_both_axes() {
        let (x, y, h) = bounded().apply_boundary(-1.0, -1.0, 5.0 * PI / 4.0);
        assert_eq!((x, y), (1.0, 1.0));
        assert_abs_diff_eq!(h, PI / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn tiny_negative_wraps_inside() {
        let (x, _, _) = torus().apply_boundary(-1e-300, 3.0, 0.0);
        assert!((0.0..500.0).contains(&x));
    }

    #[test]
    fn minimum_image_distance() {
        assert_abs_diff_eq!(torus().distance((1.0, 1.0), (499.0, 499.0)), 8f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(bounded().distance((1.0, 1.0), (499.0, 499.0)), 498.0 * 2f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn rejects_non_positive_side() {
        assert!(ArenaConfig::new(0.0, BoundaryMode::Bounded).is_err());
        assert!(ArenaConfig::new(f64::NAN, BoundaryMode::Bounded).is_err());
    }

    #[test]
    fn angle_helpers() {
        assert_abs_diff_eq!(angle_diff(0.1, TAU - 0.1), -0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(normalize_angle(-PI / 2.0), 3.0 * PI / 2.0, epsilon = 1e-12);
        assert!("41b".parse::<Setting>().is_err());
        assert_eq!("40u".parse::<Setting>().unwrap(), Setting::Unbounded40);
    }
}
