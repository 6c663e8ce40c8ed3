//! Plane points/vectors and polylines.

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

/// Shorthand constructor.
pub fn pt(x: f64, y: f64) -> Point {
    Point { x, y }
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Unit vector at `angle` radians from +x.
    pub fn unit(angle: f64) -> Self {
        Point { x: angle.cos(), y: angle.sin() }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Counterclockwise perpendicular.
    pub fn perp(self) -> Point {
        Point { x: -self.y, y: self.x }
    }

    /// Normalized copy (zero vector maps to zero).
    pub fn normalized(self) -> Point {
        let n = self.norm();
        if n == 0.0 {
            self
        } else {
            self / n
        }
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point { x: self.x + rhs.x, y: self.y + rhs.y }
    }
}
impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point { x: self.x - rhs.x, y: self.y - rhs.y }
    }
}
impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point { x: self.x * rhs, y: self.y * rhs }
    }
}
impl Div<f64> for Point {
    type Output = Point;
    fn div(self, rhs: f64) -> Point {
        Point { x: self.x / rhs, y: self.y / rhs }
    }
}
impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point { x: -self.x, y: -self.y }
    }
}

/// Distance from `p` to the segment [a, b].
pub fn dist_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let w = b - a;
    let len_sq = w.norm_sq();
    if len_sq == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(w) / len_sq).clamp(0.0, 1.0);
    p.dist(a + w * t)
}

/// An ordered chain of points, optionally closed into a loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<Point>,
    pub closed: bool,
}

impl Polyline {
    pub fn open(points: Vec<Point>) -> Self {
        Polyline { points, closed: false }
    }

    pub fn closed(points: Vec<Point>) -> Self {
        Polyline { points, closed: true }
    }

    /// Consecutive segments (including the closing one for loops).
    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.points.len();
        let wrap = if self.closed && n > 1 { 1 } else { 0 };
        (0..n.saturating_sub(1) + wrap).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| a.dist(b)).sum()
    }

    /// Minimum distance from `p` to the polyline.
    pub fn dist_to(&self, p: Point) -> f64 {
        self.segments()
            .map(|(a, b)| dist_to_segment(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Total length of the parts of the segments lying in the closed annulus
/// R1 ≤ |x − center| ≤ R2.  Each segment is clipped exactly by solving the
/// two quadratics |a + t(b−a) − center|² = R², so the only approximation
/// error is the chord-vs-curve error of the polyline itself.
pub fn clipped_length_in_annulus(
    polylines: &[Polyline],
    center: Point,
    r1: f64,
    r2: f64,
) -> f64 {
    let mut total = 0.0;
    for pl in polylines {
        for (a, b) in pl.segments() {
            total += segment_length_in_annulus(a, b, center, r1, r2);
        }
    }
    total
}

fn segment_length_in_annulus(a: Point, b: Point, center: Point, r1: f64, r2: f64) -> f64 {
    let v = a - center;
    let w = b - a;
    let len = w.norm();
    if len == 0.0 {
        return 0.0;
    }
    // |v + t w|² ≤ R² on the t-interval between the roots (if any).
    let sublevel = |r: f64| -> Option<(f64, f64)> {
        let aa = w.norm_sq();
        let bb = 2.0 * v.dot(w);
        let cc = v.norm_sq() - r * r;
        let disc = bb * bb - 4.0 * aa * cc;
        if disc <= 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        Some(((-bb - sq) / (2.0 * aa), (-bb + sq) / (2.0 * aa)))
    };
    let outer = match sublevel(r2) {
        Some((lo, hi)) => (lo.max(0.0), hi.min(1.0)),
        None => return 0.0,
    };
    if outer.1 <= outer.0 {
        return 0.0;
    }
    let mut kept = 0.0;
    match sublevel(r1) {
        None => kept += outer.1 - outer.0,
        Some((ilo, ihi)) => {
            // Remove the open inner-disc interval from the outer interval.
            let lo_piece = (ilo.min(outer.1) - outer.0).max(0.0);
            let hi_piece = (outer.1 - ihi.max(outer.0)).max(0.0);
            kept += lo_piece + hi_piece;
            // Degenerate: inner interval entirely outside the outer one.
            if ihi <= outer.0 || ilo >= outer.1 {
                kept = outer.1 - outer.0;
            }
        }
    }
    kept.min(outer.1 - outer.0) * len
}
