//! Planar primitives: points, boxes and simple polygons.
//!
//! Angles are degrees measured counter-clockwise from the +x axis, which is
//! the convention used for body orientation throughout the crate.

use serde::{Deserialize, Serialize};

/// A position on the floor plan, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Bearing from `self` to `other` in degrees, in (-180, 180].
    pub fn bearing_to(&self, other: &Point2D) -> f64 {
        (other.y - self.y).atan2(other.x - self.x).to_degrees()
    }

    pub fn offset(&self, dx: f64, dy: f64) -> Point2D {
        Point2D::new(self.x + dx, self.y + dy)
    }

    pub fn centroid(points: &[Point2D]) -> Option<Point2D> {
        if points.is_empty() {
            return None;
        }
        let n = points.len() as f64;
        let (sx, sy) = points
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Some(Point2D::new(sx / n, sy / n))
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BBox {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Self {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }

    pub fn of_points<'a>(points: impl IntoIterator<Item = &'a Point2D>) -> Option<BBox> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = BBox::new(first.x, first.y, first.x, first.y);
        for p in it {
            b.min_x = b.min_x.min(p.x);
            b.min_y = b.min_y.min(p.y);
            b.max_x = b.max_x.max(p.x);
            b.max_y = b.max_y.max(p.y);
        }
        Some(b)
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox::new(
            self.min_x.min(other.min_x),
            self.min_y.min(other.min_y),
            self.max_x.max(other.max_x),
            self.max_y.max(other.max_y),
        )
    }

    pub fn contains(&self, p: &Point2D) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    pub fn inflate(&self, margin: f64) -> BBox {
        BBox::new(
            self.min_x - margin,
            self.min_y - margin,
            self.max_x + margin,
            self.max_y + margin,
        )
    }

    pub fn clamp(&self, p: Point2D) -> Point2D {
        Point2D::new(
            p.x.clamp(self.min_x, self.max_x),
            p.y.clamp(self.min_y, self.max_y),
        )
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn corners(&self) -> Vec<Point2D> {
        vec![
            Point2D::new(self.min_x, self.min_y),
            Point2D::new(self.max_x, self.min_y),
            Point2D::new(self.max_x, self.max_y),
            Point2D::new(self.min_x, self.max_y),
        ]
    }
}

/// Wrap an angle in degrees to (-180, 180].
pub fn wrap_degrees(angle: f64) -> f64 {
    let mut a = angle % 360.0;
    if a <= -180.0 {
        a += 360.0;
    } else if a > 180.0 {
        a -= 360.0;
    }
    a
}

/// Normalise an angle in degrees to [0, 360).
pub fn normalize_degrees(angle: f64) -> f64 {
    let a = angle.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if a >= 360.0 {
        0.0
    } else {
        a
    }
}

/// Absolute angular difference in degrees, in [0, 180].
pub fn angular_distance(a: f64, b: f64) -> f64 {
    wrap_degrees(a - b).abs()
}

/// Signed polygon area (positive for counter-clockwise vertex order).
pub fn signed_area(polygon: &[Point2D]) -> f64 {
    let n = polygon.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    acc / 2.0
}

/// Crossing-number point-in-polygon test. Points on the boundary count as
/// inside.
pub fn point_in_polygon(p: &Point2D, polygon: &[Point2D]) -> bool {
    let n = polygon.len();
    if n < 3 {
        return false;
    }
    if on_boundary(p, polygon) {
        return true;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (polygon[i], polygon[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Strict interior test: inside and not on the boundary.
pub fn strictly_inside(p: &Point2D, polygon: &[Point2D]) -> bool {
    point_in_polygon(p, polygon) && !on_boundary(p, polygon)
}

fn on_boundary(p: &Point2D, polygon: &[Point2D]) -> bool {
    let n = polygon.len();
    (0..n).any(|i| on_segment(p, &polygon[i], &polygon[(i + 1) % n]))
}

const GEOM_EPS: f64 = 1e-12;

fn cross(o: &Point2D, a: &Point2D, b: &Point2D) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn on_segment(p: &Point2D, a: &Point2D, b: &Point2D) -> bool {
    let scale = 1.0 + a.distance(b);
    cross(a, b, p).abs() <= GEOM_EPS * scale * scale
        && p.x >= a.x.min(b.x) - GEOM_EPS
        && p.x <= a.x.max(b.x) + GEOM_EPS
        && p.y >= a.y.min(b.y) - GEOM_EPS
        && p.y <= a.y.max(b.y) + GEOM_EPS
}

/// True when segments intersect in any way, including touching endpoints.
fn segments_intersect(a: &Point2D, b: &Point2D, c: &Point2D, d: &Point2D) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    on_segment(a, c, d) || on_segment(b, c, d) || on_segment(c, a, b) || on_segment(d, a, b)
}

/// True when the open segments cross at a single interior point.
fn segments_cross_properly(a: &Point2D, b: &Point2D, c: &Point2D, d: &Point2D) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Checks that the polygon has at least three vertices and no two
/// non-adjacent edges touch.
pub fn is_simple(polygon: &[Point2D]) -> bool {
    let n = polygon.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (polygon[i], polygon[(i + 1) % n]);
        if a.distance(&b) == 0.0 {
            return false;
        }
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let (c, d) = (polygon[j], polygon[(j + 1) % n]);
            if segments_intersect(&a, &b, &c, &d) {
                return false;
            }
        }
    }
    true
}

/// An interior point of a simple polygon, found by ear search.
fn interior_point(polygon: &[Point2D]) -> Option<Point2D> {
    let n = polygon.len();
    let orientation = signed_area(polygon).signum();
    for i in 0..n {
        let prev = polygon[(i + n - 1) % n];
        let cur = polygon[i];
        let next = polygon[(i + 1) % n];
        if cross(&prev, &cur, &next) * orientation <= 0.0 {
            continue;
        }
        let cand = Point2D::new(
            (prev.x + cur.x + next.x) / 3.0,
            (prev.y + cur.y + next.y) / 3.0,
        );
        if strictly_inside(&cand, polygon) {
            return Some(cand);
        }
    }
    None
}

/// Whether the interiors of two simple polygons intersect. Polygons that
/// only share boundary (adjacent rooms) do not overlap.
pub fn polygons_overlap(a: &[Point2D], b: &[Point2D]) -> bool {
    let (na, nb) = (a.len(), b.len());
    for i in 0..na {
        for j in 0..nb {
            if segments_cross_properly(&a[i], &a[(i + 1) % na], &b[j], &b[(j + 1) % nb]) {
                return true;
            }
        }
    }
    let probes = |poly: &[Point2D]| -> Vec<Point2D> {
        let n = poly.len();
        let mut pts: Vec<Point2D> = poly.to_vec();
        pts.extend((0..n).map(|i| {
            let (p, q) = (poly[i], poly[(i + 1) % n]);
            Point2D::new((p.x + q.x) / 2.0, (p.y + q.y) / 2.0)
        }));
        pts.extend(interior_point(poly));
        pts
    };
    probes(a).iter().any(|p| strictly_inside(p, b)) || probes(b).iter().any(|p| strictly_inside(p, a))
}
