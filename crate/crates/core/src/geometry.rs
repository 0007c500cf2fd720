//! Planar convex polygons in the PCC (p, q) plane.
//!
//! Polygons are stored clockwise. With that orientation the interior lies to
//! the right of every edge `a -> b`, so a positive cross product
//! `(b - a) x (pt - a)` means `pt` is outside.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formulation::DirectionObjective;

/// Duplicate-vertex merge tolerance (pu).
pub const MERGE_TOL: f64 = 1e-9;
/// Distance below which a vertex is considered collinear with its neighbours (pu).
pub const CONVEXITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),
    #[error("degenerate segment (zero length)")]
    DegenerateSegment,
    #[error("point is not outside the segment")]
    NotOutside,
    #[error("segment is not an edge of the polygon")]
    NotAnEdge,
    #[error("area increase undefined for zero new area")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub p: f64,
    pub q: f64,
}

impl Point2 {
    pub const fn new(p: f64, q: f64) -> Self {
        Point2 { p, q }
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (self.p - other.p).hypot(self.q - other.q)
    }

    fn close(&self, other: &Point2) -> bool {
        self.dist(other) <= MERGE_TOL
    }
}

fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a.p - o.p) * (b.q - o.q) - (a.q - o.q) * (b.p - o.p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
    pub active: bool,
}

impl Segment {
    pub fn new(a: Point2, b: Point2) -> Self {
        Segment { a, b, active: true }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(&self.b)
    }
}

/// Clockwise vertex list. Fewer than three vertices describe a degenerate
/// (point or segment) region with zero area.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polygon {
    vertices: Vec<Point2>,
}

impl Polygon {
    /// Wraps vertices that are already in clockwise order.
    pub fn from_clockwise(vertices: Vec<Point2>) -> Self {
        Polygon { vertices }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        self.area() <= 0.0
    }

    /// Signed shoelace area; negative for clockwise order.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        let mut s = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            s += a.p * b.q - b.p * a.q;
        }
        0.5 * s
    }

    /// Area, zero for degenerate polygons.
    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Edges in vertex order. A two-vertex polygon has both orientations of its segment.
    pub fn edges(&self) -> Vec<Segment> {
        let n = self.vertices.len();
        if n < 2 {
            return Vec::new();
        }
        (0..n)
            .map(|i| Segment::new(self.vertices[i], self.vertices[(i + 1) % n]))
            .collect()
    }

    /// Index `i` such that `vertices[i] ~ seg.a` and `vertices[i+1] ~ seg.b`.
    pub fn edge_index(&self, seg: &Segment) -> Option<usize> {
        let n = self.vertices.len();
        if n < 2 {
            return None;
        }
        (0..n).find(|&i| self.vertices[i].close(&seg.a) && self.vertices[(i + 1) % n].close(&seg.b))
    }

    /// True when `pt` is inside or within `tol` of the boundary.
    pub fn contains(&self, pt: Point2, tol: f64) -> bool {
        match self.vertices.len() {
            0 => false,
            1 => self.vertices[0].dist(&pt) <= tol,
            2 => {
                let seg = Segment::new(self.vertices[0], self.vertices[1]);
                let d = outward_distance(&seg, pt).unwrap_or(f64::INFINITY).abs();
                let (a, b) = (seg.a, seg.b);
                let t = ((pt.p - a.p) * (b.p - a.p) + (pt.q - a.q) * (b.q - a.q))
                    / (seg.length() * seg.length());
                d <= tol && (-tol..=1.0 + tol).contains(&t)
            }
            _ => self
                .edges()
                .iter()
                .all(|e| outward_distance(e, pt).map_or(true, |d| d <= tol)),
        }
    }

    /// Clockwise and convex within [`CONVEXITY_TOL`].
    pub fn is_convex_clockwise(&self) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return true;
        }
        if self.signed_area() > 0.0 {
            return false;
        }
        self.edges().iter().all(|e| {
            self.vertices
                .iter()
                .all(|v| outward_distance(e, *v).is_ok_and(|d| d <= CONVEXITY_TOL))
        })
    }

    pub fn centroid(&self) -> Point2 {
        let n = self.vertices.len() as f64;
        let (sp, sq) = self
            .vertices
            .iter()
            .fold((0.0, 0.0), |(a, b), v| (a + v.p, b + v.q));
        Point2::new(sp / n, sq / n)
    }
}

/// Absolute shoelace area of a polygon with at least three vertices.
pub fn shoelace_area(poly: &Polygon) -> Result<f64, GeometryError> {
    if poly.len() < 3 {
        return Err(GeometryError::DegeneratePolygon(format!(
            "{} vertices",
            poly.len()
        )));
    }
    Ok(poly.area())
}

/// Signed perpendicular distance of `pt` from the line through `seg`,
/// positive on the outward side of a clockwise hull.
pub fn outward_distance(seg: &Segment, pt: Point2) -> Result<f64, GeometryError> {
    let len = seg.length();
    if len <= MERGE_TOL {
        return Err(GeometryError::DegenerateSegment);
    }
    Ok(cross(seg.a, seg.b, pt) / len)
}

/// Outward unit normal of a clockwise hull edge.
pub fn outward_normal(seg: &Segment) -> Result<(f64, f64), GeometryError> {
    let len = seg.length();
    if len <= MERGE_TOL {
        return Err(GeometryError::DegenerateSegment);
    }
    let (dp, dq) = (seg.b.p - seg.a.p, seg.b.q - seg.a.q);
    Ok((-dq / len, dp / len))
}

/// Minimization objective whose optimum maximizes the outward distance from `seg`.
pub fn facet_objective(seg: &Segment) -> Result<DirectionObjective, GeometryError> {
    let (np, nq) = outward_normal(seg)?;
    Ok(DirectionObjective::new(-np, -nq).expect("unit normal is nonzero"))
}

/// Splices `pt` between `seg.a` and `seg.b`, returning the new polygon and the
/// two child segments `a -> pt` and `pt -> b`.
pub fn insert_vertex(
    poly: &Polygon,
    seg: &Segment,
    pt: Point2,
) -> Result<(Polygon, Segment, Segment), GeometryError> {
    let d = outward_distance(seg, pt)?;
    if d <= MERGE_TOL || poly.vertices.iter().any(|v| v.close(&pt)) {
        return Err(GeometryError::NotOutside);
    }
    let i = poly.edge_index(seg).ok_or(GeometryError::NotAnEdge)?;
    let mut vertices = poly.vertices.clone();
    vertices.insert(i + 1, pt);
    Ok((
        Polygon { vertices },
        Segment::new(seg.a, pt),
        Segment::new(pt, seg.b),
    ))
}

/// Relative area increase `(new - prev) / new`.
pub fn area_increase(a_prev: f64, a_new: f64) -> Result<f64, GeometryError> {
    if a_new <= 0.0 {
        return Err(GeometryError::Degenerate);
    }
    Ok((a_new - a_prev) / a_new)
}

/// Clockwise convex hull starting at the lexicographically smallest `(p, q)`
/// vertex. Interior and collinear boundary points are dropped.
pub fn convex_hull(points: &[Point2]) -> Result<Polygon, GeometryError> {
    let poly = hull_any(points);
    if poly.len() < 3 {
        return Err(GeometryError::DegeneratePolygon(format!(
            "{} distinct hull points",
            poly.len()
        )));
    }
    Ok(poly)
}

/// Like [`convex_hull`] but returns degenerate (0, 1 or 2 vertex) results instead of failing.
pub fn hull_any(points: &[Point2]) -> Polygon {
    let mut pts: Vec<Point2> = points
        .iter()
        .copied()
        .filter(|p| p.p.is_finite() && p.q.is_finite())
        .collect();
    pts.sort_by(|a, b| a.p.total_cmp(&b.p).then(a.q.total_cmp(&b.q)));
    let mut uniq: Vec<Point2> = Vec::with_capacity(pts.len());
    for p in pts {
        if !uniq.iter().any(|u| u.close(&p)) {
            uniq.push(p);
        }
    }
    if uniq.len() <= 2 {
        return Polygon { vertices: uniq };
    }

    // Exact monotone chain first; pruning against a tolerance while the
    // chain is built can discard a true corner when near-vertical points
    // arrive in noise-dependent order.
    let chain = |iter: &mut dyn Iterator<Item = Point2>| -> Vec<Point2> {
        let mut h: Vec<Point2> = Vec::new();
        for p in iter {
            while h.len() >= 2 && cross(h[h.len() - 2], p, h[h.len() - 1]) <= 0.0 {
                h.pop();
            }
            h.push(p);
        }
        h
    };
    let mut vertices = chain(&mut uniq.iter().copied());
    vertices.pop();
    let mut lower = chain(&mut uniq.iter().rev().copied());
    lower.pop();
    vertices.extend(lower);

    // Then drop vertices that sit on the chord between their hull neighbours.
    while vertices.len() >= 3 {
        let n = vertices.len();
        let flat = (0..n).find(|&i| {
            let (o, a, p) = (
                vertices[(i + n - 1) % n],
                vertices[i],
                vertices[(i + 1) % n],
            );
            let len = o.dist(&p);
            len <= MERGE_TOL || cross(o, p, a) / len <= CONVEXITY_TOL
        });
        match flat {
            Some(i) => {
                vertices.remove(i);
            }
            None => break,
        }
    }
    if vertices.len() == 2 && vertices[0].close(&vertices[1]) {
        vertices.pop();
    }
    if let Some(start) = (0..vertices.len()).min_by(|&i, &j| {
        let (a, b) = (vertices[i], vertices[j]);
        a.p.total_cmp(&b.p).then(a.q.total_cmp(&b.q))
    }) {
        vertices.rotate_left(start);
    }
    Polygon { vertices }
}
