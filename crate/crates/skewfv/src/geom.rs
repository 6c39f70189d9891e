//! Small 2D vector and polygon primitives used by the mesh layer.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// 2D vector / point with `f64` components.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn unit(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    /// Rotate by -90 degrees: for a CCW polygon edge this points outward.
    pub fn rot_cw(self) -> Vec2 {
        Vec2::new(self.y, -self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Signed area of a polygon (positive for CCW orientation).
pub fn polygon_signed_area(pts: &[Vec2]) -> f64 {
    let n = pts.len();
    let mut a = 0.0;
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        a += p.cross(q);
    }
    0.5 * a
}

/// Area and centroid of a simple polygon. The centroid formula degenerates
/// for near-zero areas; callers must validate the area themselves.
pub fn polygon_centroid(pts: &[Vec2]) -> (f64, Vec2) {
    let n = pts.len();
    let mut a = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        let w = p.cross(q);
        a += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    a *= 0.5;
    (a, Vec2::new(cx / (6.0 * a), cy / (6.0 * a)))
}

/// Point-in-polygon by the crossing number rule. Points on an edge count as
/// inside, which is the behaviour the cell-search fallback relies on.
pub fn point_in_polygon(pts: &[Vec2], p: Vec2) -> bool {
    let n = pts.len();
    let mut inside = false;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        // Half-open rule on the y-interval avoids double counting at vertices.
        if (a.y > p.y) != (b.y > p.y) {
            let t = (p.y - a.y) / (b.y - a.y);
            let x = a.x + t * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
        // Exactly on the segment?
        let ab = b - a;
        let ap = p - a;
        if ab.cross(ap).abs() < 1e-14 * (ab.norm() + 1.0) {
            let t = ap.dot(ab);
            if t >= 0.0 && t <= ab.norm_sq() {
                return true;
            }
        }
    }
    inside
}

/// Clip a polygon against the half-plane `n . x <= c` (Sutherland-Hodgman).
pub fn clip_halfplane(pts: &[Vec2], n: Vec2, c: f64) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(pts.len() + 2);
    let len = pts.len();
    for i in 0..len {
        let a = pts[i];
        let b = pts[(i + 1) % len];
        let da = n.dot(a) - c;
        let db = n.dot(b) - c;
        if da <= 0.0 {
            out.push(a);
        }
        if (da < 0.0) != (db < 0.0) && da != db {
            let t = da / (da - db);
            out.push(a + (b - a) * t);
        }
    }
    out
}

/// Parameter `t` such that `p + t*d` lies on the line through `a` with
/// direction `e`. `None` when `d` and `e` are (nearly) parallel.
pub fn line_line_param(p: Vec2, d: Vec2, a: Vec2, e: Vec2) -> Option<f64> {
    let denom = d.cross(e);
    if denom.abs() < 1e-300 {
        return None;
    }
    Some((a - p).cross(e) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_area_and_centroid() {
        let sq = [
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(0.0, 2.0),
        ];
        let (a, c) = polygon_centroid(&sq);
        assert!((a - 4.0).abs() < 1e-14);
        assert!((c.x - 1.0).abs() < 1e-14 && (c.y - 1.0).abs() < 1e-14);
    }

    #[test]
    fn point_in_polygon_basics() {
        let tri = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        assert!(point_in_polygon(&tri, Vec2::new(0.25, 0.25)));
        assert!(!point_in_polygon(&tri, Vec2::new(0.75, 0.75)));
        assert!(point_in_polygon(&tri, Vec2::new(0.5, 0.0)));
    }

    #[test]
    fn halfplane_clip_splits_square() {
        let sq = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let clipped = clip_halfplane(&sq, Vec2::new(1.0, 0.0), 0.5);
        let (a, _) = polygon_centroid(&clipped);
        assert!((a - 0.5).abs() < 1e-14);
    }

    #[test]
    fn line_intersection_param() {
        // Line from origin along x meets the vertical line x=2 at t=2.
        let t = line_line_param(
            Vec2::ZERO,
            Vec2::new(1.0, 0.0),
            Vec2::new(2.0, -1.0),
            Vec2::new(0.0, 1.0),
        )
        .unwrap();
        assert!((t - 2.0).abs() < 1e-14);
    }
}
