use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    fn sub(self, other: Self) -> Self {
        Self::new(self.x - other.x, self.y - other.y)
    }

    fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }
}

/// Four-vertex polygon; vertices are ordered so the shoelace area is
/// non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad(pub [Point2; 4]);

impl Quad {
    pub fn vertices(&self) -> &[Point2; 4] {
        &self.0
    }

    pub fn area(&self) -> f64 {
        math::abs(polygon_area(&self.0))
    }
}

/// Signed shoelace area; positive for vertices in ascending-angle order.
pub fn polygon_area(points: &[Point2]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        twice += a.cross(b);
    }
    twice * 0.5
}

/// Sutherland–Hodgman clipping of `subject` against the convex polygon
/// `clip`. Both polygons must have non-negative signed area.
pub fn clip_convex(subject: &[Point2], clip: &[Point2]) -> Vec<Point2> {
    let mut output: Vec<Point2> = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % m];
        let edge = b.sub(a);
        let side = |p: Point2| edge.cross(p.sub(a));

        let input = core::mem::take(&mut output);
        let mut prev = input[input.len() - 1];
        let mut prev_side = side(prev);
        for &cur in &input {
            let cur_side = side(cur);
            if cur_side >= 0.0 {
                if prev_side < 0.0 {
                    output.push(intersect(prev, cur, prev_side, cur_side));
                }
                output.push(cur);
            } else if prev_side >= 0.0 {
                output.push(intersect(prev, cur, prev_side, cur_side));
            }
            prev = cur;
            prev_side = cur_side;
        }
    }
    output
}

fn intersect(p: Point2, q: Point2, side_p: f64, side_q: f64) -> Point2 {
    let t = side_p / (side_p - side_q);
    Point2::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
}

/// Convex hull by monotone chain. Collinear points are dropped; the result
/// has positive signed area when it has three or more vertices.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| {
        a.x.partial_cmp(&b.x)
            .unwrap_or(Ordering::Equal)
            .then(a.y.partial_cmp(&b.y).unwrap_or(Ordering::Equal))
    });
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }

    let turn = |o: Point2, a: Point2, b: Point2| a.sub(o).cross(b.sub(o));
    let mut hull: Vec<Point2> = Vec::with_capacity(pts.len() * 2);
    for &p in &pts {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// A rectangle given by its center, the unit direction of its first side,
/// and the side lengths along and across that direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedRect {
    pub center: Point2,
    pub direction: Point2,
    pub along: f64,
    pub across: f64,
}

impl RotatedRect {
    pub fn area(&self) -> f64 {
        self.along * self.across
    }
}

/// Minimum-area enclosing rectangle of a convex polygon (rotating calipers:
/// one side of the optimum is collinear with a hull edge).
///
/// Returns `None` for an empty input.
pub fn min_area_rect(hull: &[Point2]) -> Option<RotatedRect> {
    match hull.len() {
        0 => return None,
        1 => {
            return Some(RotatedRect {
                center: hull[0],
                direction: Point2::new(1.0, 0.0),
                along: 0.0,
                across: 0.0,
            })
        }
        _ => {}
    }

    let mut best: Option<RotatedRect> = None;
    let n = hull.len();
    for i in 0..n {
        let edge = hull[(i + 1) % n].sub(hull[i]);
        let len = math::sqrt(edge.dot(edge));
        if len == 0.0 {
            continue;
        }
        let u = Point2::new(edge.x / len, edge.y / len);
        let v = Point2::new(-u.y, u.x);
        let (mut min_u, mut max_u, mut min_v, mut max_v) =
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &p in hull {
            let pu = p.dot(u);
            let pv = p.dot(v);
            min_u = min_u.min(pu);
            max_u = max_u.max(pu);
            min_v = min_v.min(pv);
            max_v = max_v.max(pv);
        }
        let along = max_u - min_u;
        let across = max_v - min_v;
        if best.map_or(true, |b| along * across < b.area()) {
            let mu = 0.5 * (min_u + max_u);
            let mv = 0.5 * (min_v + max_v);
            best = Some(RotatedRect {
                center: Point2::new(u.x * mu + v.x * mv, u.y * mu + v.y * mv),
                direction: u,
                along,
                across,
            });
        }
    }
    best
}
