//! Points, lines, affine charts and conics of the real projective plane.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type V3 = Vector3<f64>;
pub type M3 = Matrix3<f64>;

/// Default tolerance for incidence and collinearity on normalized triples.
pub const INCIDENCE_TOL: f64 = 1e-9;

fn normalize(v: V3) -> Option<V3> {
    let n = v.norm();
    if !n.is_finite() || n == 0.0 {
        return None;
    }
    let mut k = 0;
    for i in 1..3 {
        if v[i].abs() > v[k].abs() {
            k = i;
        }
    }
    let s = if v[k] < 0.0 { -1.0 } else { 1.0 };
    Some(v * (s / n))
}

/// Point of P² in homogeneous coordinates, stored with unit norm and its
/// largest-magnitude entry positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct ProjPoint(V3);

/// Line of P², stored like [`ProjPoint`] in the dual plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct ProjLine(V3);

macro_rules! homogeneous {
    ($t:ident) => {
        impl $t {
            pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
                Self::from_vector(V3::new(x, y, z))
            }

            pub fn from_vector(v: V3) -> Result<Self> {
                normalize(v)
                    .map($t)
                    .ok_or_else(|| Error::DegenerateInput("zero homogeneous triple".into()))
            }

            /// Normalized coordinates.
            pub fn coords(&self) -> V3 {
                self.0
            }

            /// Equality up to scale: the cross product of the normalized
            /// triples is at most `tol`.
            pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
                self.0.cross(&other.0).norm() <= tol
            }
        }

        impl TryFrom<[f64; 3]> for $t {
            type Error = Error;
            fn try_from(a: [f64; 3]) -> Result<Self> {
                Self::new(a[0], a[1], a[2])
            }
        }

        impl From<$t> for [f64; 3] {
            fn from(p: $t) -> [f64; 3] {
                [p.0[0], p.0[1], p.0[2]]
            }
        }
    };
}

homogeneous!(ProjPoint);
homogeneous!(ProjLine);

impl ProjPoint {
    /// The point (x, y) of the standard chart z = 1.
    pub fn affine(x: f64, y: f64) -> Self {
        ProjPoint(normalize(V3::new(x, y, 1.0)).expect("finite affine point"))
    }

    /// Image under the linear map `m`.
    pub fn transform(&self, m: &M3) -> Result<Self> {
        Self::from_vector(m * self.0)
    }
}

impl ProjLine {
    /// Image of the line under the point map `m` (covector ℓ ↦ ℓ m⁻¹).
    pub fn transform(&self, m: &M3) -> Result<Self> {
        let inv = m
            .try_inverse()
            .ok_or_else(|| Error::DegenerateInput("singular transform".into()))?;
        Self::from_vector(inv.transpose() * self.0)
    }
}

/// Incidence residual |⟨p, l⟩| of normalized triples.
pub fn incidence(p: &ProjPoint, l: &ProjLine) -> f64 {
    p.0.dot(&l.0).abs()
}

/// Line through two distinct points.
pub fn join(p: &ProjPoint, q: &ProjPoint) -> Result<ProjLine> {
    let c = p.0.cross(&q.0);
    if c.norm() <= INCIDENCE_TOL {
        return Err(Error::CoincidentPoints);
    }
    ProjLine::from_vector(c)
}

/// Intersection point of two distinct lines.
pub fn meet(l: &ProjLine, m: &ProjLine) -> Result<ProjPoint> {
    let c = l.0.cross(&m.0);
    if c.norm() <= INCIDENCE_TOL {
        return Err(Error::CoincidentLines);
    }
    ProjPoint::from_vector(c)
}

/// Signed cross-ratio [p:x:y:q] = (p−y)(q−x) / ((p−x)(q−y)) of four
/// collinear points. The value is computed from determinants against an
/// auxiliary point off the line, so it does not depend on a chart.
pub fn cross_ratio(p: &ProjPoint, x: &ProjPoint, y: &ProjPoint, q: &ProjPoint) -> Result<f64> {
    cross_ratio_tol(p, x, y, q, INCIDENCE_TOL)
}

pub fn cross_ratio_tol(
    p: &ProjPoint,
    x: &ProjPoint,
    y: &ProjPoint,
    q: &ProjPoint,
    tol: f64,
) -> Result<f64> {
    let pts = [p.0, x.0, y.0, q.0];
    // supporting line from the best-conditioned pair
    let mut line = V3::zeros();
    for i in 0..4 {
        for j in i + 1..4 {
            let c = pts[i].cross(&pts[j]);
            if c.norm() > line.norm() {
                line = c;
            }
        }
    }
    if line.norm() <= tol {
        // all four points coincide
        return Err(Error::CoincidentEndpoints);
    }
    let line = line.normalize();
    let residual = pts.iter().map(|v| v.dot(&line).abs()).fold(0.0, f64::max);
    if residual > tol {
        return Err(Error::NonCollinear { residual });
    }
    let o = line;
    let det = |a: &V3, b: &V3| M3::from_columns(&[*a, *b, o]).determinant();
    let px = det(&p.0, &x.0);
    let qy = det(&q.0, &y.0);
    if px.abs() <= tol * tol || qy.abs() <= tol * tol {
        return Err(Error::CoincidentEndpoints);
    }
    Ok(det(&p.0, &y.0) * det(&q.0, &x.0) / (px * qy))
}

/// Affine chart: chart coordinates (u, w) map to `basis · (u, w, 1)`.
/// The line at infinity is the third row of the inverse basis.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineChart {
    basis: M3,
    inverse: M3,
}

impl AffineChart {
    /// The chart z = 1.
    pub fn standard() -> Self {
        AffineChart {
            basis: M3::identity(),
            inverse: M3::identity(),
        }
    }

    pub fn from_basis(basis: M3) -> Result<Self> {
        let inverse = basis
            .try_inverse()
            .ok_or_else(|| Error::DegenerateInput("singular chart basis".into()))?;
        Ok(AffineChart { basis, inverse })
    }

    /// Chart whose line at infinity is `h = 0`, with origin at `origin`
    /// and an orthonormal frame of `ker h`.
    pub fn from_functional(h: V3, origin: V3) -> Result<Self> {
        let ho = h.dot(&origin);
        if h.norm() == 0.0 || ho.abs() <= 1e-300 {
            return Err(Error::DegenerateInput("origin lies on the line at infinity".into()));
        }
        let o = origin / ho;
        let hn = h.normalize();
        let k = (0..3)
            .min_by(|&a, &b| hn[a].abs().total_cmp(&hn[b].abs()))
            .unwrap_or(0);
        let b1 = hn.cross(&V3::ith(k, 1.0)).normalize();
        let mut b2 = hn.cross(&b1);
        let mut basis = M3::from_columns(&[b1, b2, o]);
        if basis.determinant() < 0.0 {
            b2 = -b2;
            basis = M3::from_columns(&[b1, b2, o]);
        }
        Self::from_basis(basis)
    }

    pub fn basis(&self) -> &M3 {
        &self.basis
    }

    /// Covector of the line at infinity, scaled so it takes value 1 on chart points.
    pub fn functional(&self) -> V3 {
        self.inverse.row(2).transpose()
    }

    pub fn line_at_infinity(&self) -> ProjLine {
        ProjLine::from_vector(self.functional()).expect("invertible basis")
    }

    /// Homogeneous lift `basis · (u, w, 1)`.
    pub fn lift(&self, u: f64, w: f64) -> V3 {
        self.basis * V3::new(u, w, 1.0)
    }

    /// Homogeneous direction `basis · (du, dw, 0)`.
    pub fn direction(&self, du: f64, dw: f64) -> V3 {
        self.basis * V3::new(du, dw, 0.0)
    }

    pub fn point(&self, u: f64, w: f64) -> ProjPoint {
        ProjPoint::from_vector(self.lift(u, w)).expect("chart lift is nonzero")
    }

    /// Chart coordinates of a homogeneous vector, `None` near the line at infinity.
    pub fn coords_of(&self, v: &V3) -> Option<[f64; 2]> {
        let c = self.inverse * v;
        if c[2].abs() <= 1e-14 * c.norm() {
            return None;
        }
        Some([c[0] / c[2], c[1] / c[2]])
    }

    pub fn coords(&self, p: &ProjPoint) -> Option<[f64; 2]> {
        self.coords_of(&p.coords())
    }

    /// Push a tangent vector at chart point `x` to the chart `other`.
    pub fn pushforward(&self, x: [f64; 2], v: [f64; 2], other: &AffineChart) -> Option<[f64; 2]> {
        let xl = other.inverse * self.lift(x[0], x[1]);
        let vl = other.inverse * self.direction(v[0], v[1]);
        if xl[2].abs() <= 1e-14 * xl.norm() {
            return None;
        }
        let z = xl[2];
        Some([
            (vl[0] * z - xl[0] * vl[2]) / (z * z),
            (vl[1] * z - xl[1] * vl[2]) / (z * z),
        ])
    }
}

/// Projective conic v ↦ vᵀ q v, defined up to scale.
#[derive(Clone, Debug, PartialEq)]
pub struct Conic {
    q: M3,
}

impl Conic {
    /// Symmetrizes `q`.
    pub fn new(q: M3) -> Self {
        Conic {
            q: (q + q.transpose()) * 0.5,
        }
    }

    pub fn matrix(&self) -> &M3 {
        &self.q
    }

    pub fn value(&self, v: &V3) -> f64 {
        v.dot(&(self.q * v))
    }

    /// Signs of the eigenvalues as (positive, negative) counts, zero counted
    /// when below `tol` relative to the spectral radius.
    pub fn signature(&self, tol: f64) -> (usize, usize) {
        let e = SymmetricEigen::new(self.q).eigenvalues;
        let r = e.amax();
        let pos = e.iter().filter(|&&l| l > tol * r).count();
        let neg = e.iter().filter(|&&l| l < -tol * r).count();
        (pos, neg)
    }

    /// True when the form or its negative has signature (2,1).
    pub fn is_real_ellipse(&self) -> bool {
        matches!(self.signature(1e-12), (2, 1) | (1, 2))
    }

    /// Pole-polar tangent line at a point of the conic.
    pub fn polar(&self, p: &ProjPoint) -> Result<ProjLine> {
        ProjLine::from_vector(self.q * p.coords())
    }

    pub fn transform(&self, m: &M3) -> Result<Self> {
        let inv = m
            .try_inverse()
            .ok_or_else(|| Error::DegenerateInput("singular transform".into()))?;
        Ok(Conic::new(inv.transpose() * self.q * inv))
    }
}

/// Real intersection points of a line with a conic of signature (2,1).
/// A tangency is reported as a single point.
pub fn line_conic_intersection(c: &Conic, l: &ProjLine) -> Result<Vec<ProjPoint>> {
    if !c.is_real_ellipse() {
        return Err(Error::DegenerateConic);
    }
    let n = l.coords();
    let k = (0..3)
        .min_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))
        .unwrap_or(0);
    let a = n.cross(&V3::ith(k, 1.0)).normalize();
    let b = n.cross(&a).normalize();
    let q = c.matrix();
    let scale = q.norm();
    let qa = a.dot(&(q * a)) / scale;
    let qb = a.dot(&(q * b)) / scale;
    let qc = b.dot(&(q * b)) / scale;
    let disc = qb * qb - qa * qc;
    let tol = 1e-12;
    if disc < -tol {
        return Ok(Vec::new());
    }
    let sq = disc.max(0.0).sqrt();
    let root = |sign: f64| -> V3 {
        if qa.abs() >= qc.abs() {
            a * (-qb + sign * sq) + b * qa
        } else {
            a * qc + b * (-qb + sign * sq)
        }
    };
    if disc <= tol {
        return Ok(vec![ProjPoint::from_vector(root(1.0))?]);
    }
    Ok(vec![
        ProjPoint::from_vector(root(-1.0))?,
        ProjPoint::from_vector(root(1.0))?,
    ])
}

/// Shoelace area of a planar polygon.
pub(crate) fn polygon_area(pts: &[[f64; 2]]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        s += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * s
}

/// Convex hull by monotone chain, counter-clockwise, collinear points dropped.
pub(crate) fn convex_hull(points: &[[f64; 2]]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        points[a][0]
            .total_cmp(&points[b][0])
            .then(points[a][1].total_cmp(&points[b][1]))
    });
    idx.dedup_by(|a, b| points[*a] == points[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let cross = |o: usize, a: usize, b: usize| {
        let (o, a, b) = (points[o], points[a], points[b]);
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for &i in &idx {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], i) <= 0.0 {
            hull.pop();
        }
        hull.push(i);
    }
    let lower = hull.len() + 1;
    for &i in idx.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], i) <= 0.0 {
            hull.pop();
        }
        hull.push(i);
    }
    hull.pop();
    hull
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_circle() -> Conic {
        Conic::new(M3::from_diagonal(&V3::new(1.0, 1.0, -1.0)))
    }

    #[test]
    fn normalization_is_canonical() {
        let p = ProjPoint::new(0.0, -3.0, 4.0).unwrap();
        let q = ProjPoint::new(0.0, 6.0, -8.0).unwrap();
        assert_eq!(p, q);
        assert!((p.coords().norm() - 1.0).abs() < 1e-15);
        assert!(p.coords()[2] > 0.0);
        assert!(ProjPoint::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn join_of_axes_points() {
        let l = join(
            &ProjPoint::new(1.0, 0.0, 0.0).unwrap(),
            &ProjPoint::new(0.0, 1.0, 0.0).unwrap(),
        )
        .unwrap();
        assert!(l.approx_eq(&ProjLine::new(0.0, 0.0, 1.0).unwrap(), 1e-15));
    }

    #[test]
    fn join_is_incident_and_symmetric() {
        let a = ProjPoint::new(1.0, 0.0, 1.0).unwrap();
        let b = ProjPoint::new(0.0, 1.0, 1.0).unwrap();
        let l = join(&a, &b).unwrap();
        assert!(incidence(&a, &l) <= 1e-12);
        assert!(incidence(&b, &l) <= 1e-12);
        assert!(l.approx_eq(&join(&b, &a).unwrap(), 1e-15));
        assert_eq!(join(&a, &a), Err(Error::CoincidentPoints));
    }

    #[test]
    fn meet_dualizes_join() {
        let p = ProjPoint::affine(0.3, -0.2);
        let q = ProjPoint::affine(1.0, 2.0);
        let r = ProjPoint::affine(-4.0, 0.5);
        let m = meet(&join(&p, &q).unwrap(), &join(&p, &r).unwrap()).unwrap();
        assert!(m.approx_eq(&p, 1e-12));
        let l = ProjLine::new(1.0, 2.0, 3.0).unwrap();
        assert_eq!(meet(&l, &l), Err(Error::CoincidentLines));
    }

    #[test]
    fn cross_ratio_of_diameter() {
        let cr = cross_ratio(
            &ProjPoint::affine(-1.0, 0.0),
            &ProjPoint::affine(0.0, 0.0),
            &ProjPoint::affine(0.5, 0.0),
            &ProjPoint::affine(1.0, 0.0),
        )
        .unwrap();
        assert!((cr - 3.0).abs() < 1e-14);
    }

    #[test]
    fn cross_ratio_identity_and_errors() {
        let p = ProjPoint::affine(-1.0, 1.0);
        let x = ProjPoint::affine(0.2, 1.0);
        let q = ProjPoint::affine(3.0, 1.0);
        assert!((cross_ratio(&p, &x, &x, &q).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(cross_ratio(&p, &p, &x, &q), Err(Error::CoincidentEndpoints));
        let off = ProjPoint::affine(0.0, 2.0);
        assert!(matches!(
            cross_ratio(&p, &x, &off, &q),
            Err(Error::NonCollinear { .. })
        ));
    }

    #[test]
    fn cross_ratio_with_point_at_infinity() {
        // points 0, 1, 2 and ∞ on the x-axis: (0−2)/(0−1) = 2
        let cr = cross_ratio(
            &ProjPoint::affine(0.0, 0.0),
            &ProjPoint::affine(1.0, 0.0),
            &ProjPoint::affine(2.0, 0.0),
            &ProjPoint::new(1.0, 0.0, 0.0).unwrap(),
        )
        .unwrap();
        assert!((cr - 2.0).abs() < 1e-14);
    }

    #[test]
    fn circle_line_intersections() {
        let c = unit_circle();
        let two = line_conic_intersection(&c, &ProjLine::new(0.0, 1.0, 0.0).unwrap()).unwrap();
        assert_eq!(two.len(), 2);
        let xs: Vec<f64> = two
            .iter()
            .map(|p| p.coords()[0] / p.coords()[2])
            .collect();
        assert!(xs.iter().any(|x| (x + 1.0).abs() < 1e-12));
        assert!(xs.iter().any(|x| (x - 1.0).abs() < 1e-12));
        let one = line_conic_intersection(&c, &ProjLine::new(0.0, 1.0, -1.0).unwrap()).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one[0].approx_eq(&ProjPoint::affine(0.0, 1.0), 1e-12));
        let none = line_conic_intersection(&c, &ProjLine::new(0.0, 1.0, -2.0).unwrap()).unwrap();
        assert!(none.is_empty());
        let flat = Conic::new(M3::from_diagonal(&V3::new(1.0, 0.0, -1.0)));
        assert_eq!(
            line_conic_intersection(&flat, &ProjLine::new(0.0, 1.0, 0.0).unwrap()),
            Err(Error::DegenerateConic)
        );
    }

    #[test]
    fn chart_round_trip_and_pushforward() {
        let chart = AffineChart::from_functional(V3::new(1.0, 1.0, 1.0), V3::new(1.0, 1.0, 1.0)).unwrap();
        let p = ProjPoint::new(0.2, 0.3, 0.5).unwrap();
        let c = chart.coords(&p).unwrap();
        assert!(chart.point(c[0], c[1]).approx_eq(&p, 1e-14));
        assert!((chart.functional().dot(&chart.lift(0.3, -0.7)) - 1.0).abs() < 1e-14);
        // pushforward agrees with a finite difference of the chart change
        let std = AffineChart::standard();
        let x = [0.1, 0.05];
        let v = [0.3, -0.2];
        let w = chart.pushforward(x, v, &std).unwrap();
        let h = 1e-6;
        let a = std.coords_of(&chart.lift(x[0] + h * v[0], x[1] + h * v[1])).unwrap();
        let b = std.coords_of(&chart.lift(x[0] - h * v[0], x[1] - h * v[1])).unwrap();
        assert!(((a[0] - b[0]) / (2.0 * h) - w[0]).abs() < 1e-7);
        assert!(((a[1] - b[1]) / (2.0 * h) - w[1]).abs() < 1e-7);
    }

    #[test]
    fn hull_drops_interior_and_collinear() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.0], [1.0, 1.0], [0.5, 0.5], [0.0, 1.0]];
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        let poly: Vec<[f64; 2]> = h.iter().map(|&i| pts[i]).collect();
        assert!((polygon_area(&poly) - 1.0).abs() < 1e-15);
    }
}
