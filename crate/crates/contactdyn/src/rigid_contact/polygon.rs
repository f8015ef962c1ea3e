//! Convex support polygons in a horizontal plane.

use nalgebra::Point2;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("support polygon is degenerate (area {0:.3e} m²)")]
pub struct DegeneratePolygon(pub f64);

/// Convex polygon in the world x–y plane at height `height`, vertices in
/// counter-clockwise order.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportPolygon {
    vertices: Vec<Point2<f64>>,
    height: f64,
}

impl SupportPolygon {
    /// Convex hull of a point set. Fails when the hull has no area.
    pub fn from_points(points: &[Point2<f64>], height: f64) -> Result<Self, DegeneratePolygon> {
        let hull = convex_hull(points);
        let poly = SupportPolygon {
            vertices: hull,
            height,
        };
        let area = poly.area();
        if poly.vertices.len() < 3 || area <= 1e-12 {
            return Err(DegeneratePolygon(area));
        }
        Ok(poly)
    }

    pub fn vertices(&self) -> &[Point2<f64>] {
        &self.vertices
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn area(&self) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        if n < 3 {
            return 0.0;
        }
        let mut twice = 0.0;
        for i in 0..n {
            let a = v[i];
            let b = v[(i + 1) % n];
            twice += a.x * b.y - b.x * a.y;
        }
        0.5 * twice
    }

    /// Signed distance from `p` to the polygon boundary: positive inside,
    /// zero on an edge, negative outside.
    pub fn signed_margin(&self, p: &Point2<f64>) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        let mut margin = f64::INFINITY;
        for i in 0..n {
            let a = v[i];
            let b = v[(i + 1) % n];
            let e = b - a;
            let len = e.norm();
            // CCW ordering: cross > 0 means p is on the interior side.
            let cross = e.x * (p.y - a.y) - e.y * (p.x - a.x);
            margin = margin.min(cross / len);
        }
        margin
    }

    pub fn contains_strict(&self, p: &Point2<f64>) -> bool {
        self.signed_margin(p) > 0.0
    }
}

/// Andrew's monotone-chain convex hull, CCW orientation.
fn convex_hull(points: &[Point2<f64>]) -> Vec<Point2<f64>> {
    let mut pts: Vec<Point2<f64>> = points.to_vec();
    pts.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    pts.dedup_by(|a, b| (a.x - b.x).abs() < 1e-12 && (a.y - b.y).abs() < 1e-12);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>| {
        (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
    };
    let mut lower: Vec<Point2<f64>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0
        {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Point2<f64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0
        {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}
