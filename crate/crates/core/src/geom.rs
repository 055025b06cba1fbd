//! Geometry of the unit square.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A position in the unit square `[0,1]²`.
///
/// Fields are public so that computations (distances, stretch) can be run on
/// transformed copies; [`Point::new`] is the checked constructor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let p = Point { x, y };
        if p.in_unit_square() {
            Ok(p)
        } else {
            Err(Error::invalid(format!("point ({x}, {y}) is outside the unit square")))
        }
    }

    pub fn in_unit_square(&self) -> bool {
        (0.0..=1.0).contains(&self.x) && (0.0..=1.0).contains(&self.y)
    }

    pub fn scaled(&self, s: f64) -> Point {
        Point {
            x: self.x * s,
            y: self.y * s,
        }
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Euclidean distance.
#[inline]
pub fn euclid(u: Point, v: Point) -> f64 {
    euclid_sq(u, v).sqrt()
}

/// Squared Euclidean distance, for comparisons against squared radii.
#[inline]
pub fn euclid_sq(u: Point, v: Point) -> f64 {
    let dx = u.x - v.x;
    let dy = u.y - v.y;
    dx * dx + dy * dy
}

/// Draws a point with independent uniform `[0,1)` coordinates, `x` first.
pub fn sample_point<R: Rng + ?Sized>(rng: &mut R) -> Point {
    let x = rng.random::<f64>();
    let y = rng.random::<f64>();
    Point { x, y }
}

/// The intersection of the closed disc of radius `radius` about `centre` with the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClippedDisc {
    centre: Point,
    radius: f64,
}

impl ClippedDisc {
    /// Fails when the centre is outside the square or the radius is not in `[0, √2]`.
    pub fn new(centre: Point, radius: f64) -> Result<Self> {
        if !centre.in_unit_square() {
            return Err(Error::invalid(format!(
                "disc centre ({}, {}) is outside the unit square",
                centre.x, centre.y
            )));
        }
        if !(0.0..=SQRT_2).contains(&radius) {
            return Err(Error::invalid(format!(
                "disc radius {radius} is outside [0, sqrt(2)]"
            )));
        }
        Ok(ClippedDisc { centre, radius })
    }

    pub fn centre(&self) -> Point {
        self.centre
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Exact area of the clipped disc.
    ///
    /// The parts of the disc beyond each of the four edges are circular segments.
    /// Two regions beyond opposite edges cannot overlap, so inclusion–exclusion
    /// stops at the four corner quadrants, which are added back.
    pub fn area(&self) -> f64 {
        let r = self.radius;
        if r == 0.0 {
            return 0.0;
        }
        let Point { x, y } = self.centre;
        let (left, right, bottom, top) = (x, 1.0 - x, y, 1.0 - y);

        let segments = segment_area(r, left)
            + segment_area(r, right)
            + segment_area(r, bottom)
            + segment_area(r, top);
        let corners = quadrant_area(r, left, bottom)
            + quadrant_area(r, left, top)
            + quadrant_area(r, right, bottom)
            + quadrant_area(r, right, top);

        let area = PI * r * r - segments + corners;
        area.clamp(0.0, (PI * r * r).min(1.0))
    }

    pub fn contains(&self, p: Point) -> bool {
        euclid_sq(self.centre, p) <= self.radius * self.radius
    }

    /// Axis-aligned bounding box of the clipped disc: `(x0, x1, y0, y1)`.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let Point { x, y } = self.centre;
        let r = self.radius;
        (
            (x - r).max(0.0),
            (x + r).min(1.0),
            (y - r).max(0.0),
            (y + r).min(1.0),
        )
    }
}

/// Area of a disc of radius `r` beyond a line at distance `h ≥ 0` from its centre.
fn segment_area(r: f64, h: f64) -> f64 {
    if h >= r {
        return 0.0;
    }
    let c = (h / r).clamp(-1.0, 1.0);
    r * r * c.acos() - h * (r * r - h * h).max(0.0).sqrt()
}

/// Area of a disc of radius `r` inside the quadrant `{X ≥ a, Y ≥ b}` of its own
/// frame, with `a, b ≥ 0`.
fn quadrant_area(r: f64, a: f64, b: f64) -> f64 {
    if a * a + b * b >= r * r {
        return 0.0;
    }
    let x1 = (r * r - b * b).max(0.0).sqrt();
    let antiderivative = |t: f64| {
        0.5 * (t * (r * r - t * t).max(0.0).sqrt() + r * r * (t / r).clamp(-1.0, 1.0).asin())
    };
    (antiderivative(x1) - antiderivative(a) - b * (x1 - a)).max(0.0)
}

/// Area of `C(centre, radius)`.
pub fn disc_square_area(centre: Point, radius: f64) -> Result<f64> {
    Ok(ClippedDisc::new(centre, radius)?.area())
}

/// Which radius range of the clipped-disc lower bound applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prop1Regime {
    /// `0 ≤ R ≤ 1/2`: area at least `πR²/4`.
    Half,
    /// `0 ≤ R ≤ √2`: area at least `πR²/32`.
    Sqrt2,
}

impl Prop1Regime {
    /// The tighter regime that covers `radius`, if any.
    pub fn for_radius(radius: f64) -> Option<Self> {
        if (0.0..=0.5).contains(&radius) {
            Some(Prop1Regime::Half)
        } else if (0.0..=SQRT_2).contains(&radius) {
            Some(Prop1Regime::Sqrt2)
        } else {
            None
        }
    }
}

/// Lower bound on the area of any disc of radius `radius` clipped to the square
/// with its centre inside the square.
pub fn prop1_lower_bound(radius: f64, regime: Prop1Regime) -> Result<f64> {
    let (max, divisor) = match regime {
        Prop1Regime::Half => (0.5, 4.0),
        Prop1Regime::Sqrt2 => (SQRT_2, 32.0),
    };
    if !(0.0..=max).contains(&radius) {
        return Err(Error::invalid(format!(
            "radius {radius} outside [0, {max}] for regime {regime:?}"
        )));
    }
    Ok(PI * radius * radius / divisor)
}
