//! Properly convex open domains of P² and their Hilbert geometry.
//!
//! Every domain is stored as an open convex cone `C ⊂ R³` together with a
//! covector `h` that is positive on `closure(C) \ {0}`. The canonical chart
//! of a domain has `h = 0` as its line at infinity, so the closure of the
//! domain is bounded there.

use std::f64::consts::PI;

use nalgebra::{SymmetricEigen, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projective::{convex_hull, line_conic_intersection, polygon_area, AffineChart, Conic, ProjLine, ProjPoint, M3, V3};

/// Width of the boundary band used by [`ConvexDomain::contains`].
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Default cap on the number of supporting lines of a halfplane domain.
pub const DEFAULT_LINE_CAP: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Interior,
    Boundary,
    Exterior,
}

/// A Hilbert distance, possibly infinite when a point reaches the boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Distance {
    Finite(f64),
    Infinite,
}

impl Distance {
    pub fn value(self) -> f64 {
        match self {
            Distance::Finite(d) => d,
            Distance::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Distance::Finite(_))
    }
}

/// Endpoints p⁻, p⁺ of the chord through two interior points x, y, ordered
/// so that x lies between p⁻ and y, and y between x and p⁺.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryChords {
    pub p_minus: ProjPoint,
    pub p_plus: ProjPoint,
}

#[derive(Clone, Debug)]
pub struct PolygonDomain {
    lifts: Vec<V3>,
    edges: Vec<V3>,
    h: V3,
    chart: AffineChart,
}

#[derive(Clone, Debug)]
pub struct ConicDomain {
    conic: Conic,
    interior: V3,
    h: V3,
    chart: AffineChart,
}

#[derive(Clone, Debug)]
pub struct HalfplaneDomain {
    lines: Vec<V3>,
    interior: V3,
    ambient: Option<Box<ConvexDomain>>,
    vertices: Option<Vec<V3>>,
    h: V3,
    chart: AffineChart,
}

/// Properly convex open subset of P².
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "DomainSpec", into = "DomainSpec")]
pub enum ConvexDomain {
    Polygon(PolygonDomain),
    Conic(ConicDomain),
    Halfplanes(HalfplaneDomain),
}

fn det3(a: &V3, b: &V3, c: &V3) -> f64 {
    M3::from_columns(&[*a, *b, *c]).determinant()
}

/// Clip the parameter interval of `X + tV` by the halfspace `l > 0`.
fn clip_linear(l: &V3, x: &V3, v: &V3, lo: &mut f64, hi: &mut f64) {
    let a = l.dot(x);
    let b = l.dot(v);
    if b < 0.0 {
        *hi = hi.min(a / -b);
    } else if b > 0.0 {
        *lo = lo.max(-a / b);
    }
}

/// Interval of `t` around 0 where `(X + tV)ᵀ q (X + tV) < 0`, given `XᵀqX < 0`.
fn conic_interval(q: &M3, x: &V3, v: &V3) -> (f64, f64) {
    let a = v.dot(&(q * v));
    let b = x.dot(&(q * v));
    let c = x.dot(&(q * x));
    let scale = a.abs() + b.abs() + c.abs();
    if a.abs() <= 1e-15 * scale {
        return match b.partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Greater) => (f64::NEG_INFINITY, -c / (2.0 * b)),
            Some(std::cmp::Ordering::Less) => (-c / (2.0 * b), f64::INFINITY),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        };
    }
    let disc = b * b - a * c;
    if disc <= 0.0 {
        return (f64::NEG_INFINITY, f64::INFINITY);
    }
    let s = disc.sqrt();
    let k = -(b + b.signum() * s);
    let (mut r1, mut r2) = if k == 0.0 { (-s / a, s / a) } else { (k / a, c / k) };
    if r1 > r2 {
        std::mem::swap(&mut r1, &mut r2);
    }
    if a > 0.0 {
        (r1, r2)
    } else if r1 > 0.0 {
        (f64::NEG_INFINITY, r1)
    } else {
        (r2, f64::INFINITY)
    }
}

impl ConvexDomain {
    /// Polygon from vertex lifts of a single cone, in cyclic order (either orientation).
    pub fn polygon(lifts: &[V3]) -> Result<Self> {
        let n = lifts.len();
        if n < 3 {
            return Err(Error::DegenerateInput("a polygon needs at least 3 vertices".into()));
        }
        let lifts: Vec<V3> = lifts.iter().map(|v| v.normalize()).collect();
        if lifts.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::DegenerateInput("non-finite vertex".into()));
        }
        let sigma = det3(&lifts[0], &lifts[1], &lifts[2]).signum();
        let mut edges = Vec::with_capacity(n);
        for i in 0..n {
            let e = (lifts[i].cross(&lifts[(i + 1) % n]) * sigma)
                .try_normalize(1e-14)
                .ok_or_else(|| Error::DegenerateInput("repeated vertex".into()))?;
            for (k, v) in lifts.iter().enumerate() {
                if k != i && k != (i + 1) % n && e.dot(v) <= 1e-12 {
                    return Err(Error::DegenerateInput("vertices are not in strictly convex position".into()));
                }
            }
            edges.push(e);
        }
        let h: V3 = edges.iter().sum();
        let centroid: V3 = lifts.iter().map(|v| v / h.dot(v)).sum::<V3>() / n as f64;
        let chart = AffineChart::from_functional(h, centroid)?;
        Ok(ConvexDomain::Polygon(PolygonDomain { lifts, edges, h, chart }))
    }

    /// Polygon from vertices given in the standard chart z = 1.
    pub fn polygon_affine(pts: &[[f64; 2]]) -> Result<Self> {
        let lifts: Vec<V3> = pts.iter().map(|p| V3::new(p[0], p[1], 1.0)).collect();
        Self::polygon(&lifts)
    }

    /// Polygon from projective vertices lifted into the chart `chart`.
    pub fn polygon_in_chart(vertices: &[ProjPoint], chart: &AffineChart) -> Result<Self> {
        let psi = chart.functional();
        let mut lifts = Vec::with_capacity(vertices.len());
        for v in vertices {
            let c = v.coords();
            let s = psi.dot(&c);
            if s.abs() <= 1e-12 {
                return Err(Error::InvalidChart);
            }
            lifts.push(c * s.signum());
        }
        Self::polygon(&lifts)
    }

    /// The triangle {x > 0, y > 0, z > 0}.
    pub fn triangle() -> Self {
        Self::polygon(&[V3::x(), V3::y(), V3::z()]).expect("standard simplex")
    }

    /// Interior of a conic of signature (2,1), on the side of `interior`.
    pub fn conic(conic: Conic, interior: ProjPoint) -> Result<Self> {
        if !conic.is_real_ellipse() {
            return Err(Error::DegenerateConic);
        }
        let mut q = *conic.matrix();
        if SymmetricEigen::new(q).eigenvalues.iter().filter(|&&l| l > 0.0).count() != 2 {
            q = -q;
        }
        q /= q.norm();
        let x = interior.coords();
        let c = x.dot(&(q * x));
        if c >= -1e-12 {
            return Err(Error::NotInterior);
        }
        let h = -(q * x);
        let x = x / h.dot(&x);
        let chart = AffineChart::from_functional(h, x)?;
        Ok(ConvexDomain::Conic(ConicDomain {
            conic: Conic::new(q),
            interior: x,
            h,
            chart,
        }))
    }

    /// The unit disk x² + y² < z².
    pub fn unit_disk() -> Self {
        Self::conic(
            Conic::new(M3::from_diagonal(&V3::new(1.0, 1.0, -1.0))),
            ProjPoint::affine(0.0, 0.0),
        )
        .expect("unit disk")
    }

    /// Intersection of the open halfplanes bounded by `lines` that contain
    /// `interior`, optionally inside an ambient domain.
    pub fn halfplanes(lines: &[ProjLine], interior: ProjPoint, ambient: Option<ConvexDomain>) -> Result<Self> {
        Self::halfplanes_with_cap(lines, interior, ambient, DEFAULT_LINE_CAP)
    }

    pub fn halfplanes_with_cap(
        lines: &[ProjLine],
        interior: ProjPoint,
        ambient: Option<ConvexDomain>,
        cap: usize,
    ) -> Result<Self> {
        if lines.len() > cap {
            return Err(Error::DegenerateInput(format!(
                "{} supporting lines exceed the cap of {cap}",
                lines.len()
            )));
        }
        let x = match &ambient {
            Some(a) => {
                if a.contains(&interior) != Membership::Interior {
                    return Err(Error::NotInterior);
                }
                a.lift(&interior).ok_or(Error::NotInterior)?
            }
            None => interior.coords(),
        };
        let mut oriented = Vec::with_capacity(lines.len());
        for l in lines {
            let c = l.coords();
            let s = c.dot(&x);
            if s.abs() <= 1e-12 {
                return Err(Error::NotInterior);
            }
            oriented.push(c * s.signum());
        }
        let (vertices, h) = match &ambient {
            Some(a) => (None, a.functional()),
            None => {
                let verts = halfplane_vertices(&oriented, &x)?;
                let h: V3 = oriented.iter().sum();
                (Some(verts), h)
            }
        };
        let x = x / h.dot(&x);
        let chart = AffineChart::from_functional(h, x)?;
        Ok(ConvexDomain::Halfplanes(HalfplaneDomain {
            lines: oriented,
            interior: x,
            ambient: ambient.map(Box::new),
            vertices,
            h,
            chart,
        }))
    }

    /// Covector positive on the closure of the cone.
    pub fn functional(&self) -> V3 {
        match self {
            ConvexDomain::Polygon(p) => p.h,
            ConvexDomain::Conic(c) => c.h,
            ConvexDomain::Halfplanes(hp) => hp.h,
        }
    }

    /// Chart containing the closure of the domain, centered at an interior point.
    pub fn canonical_chart(&self) -> &AffineChart {
        match self {
            ConvexDomain::Polygon(p) => &p.chart,
            ConvexDomain::Conic(c) => &c.chart,
            ConvexDomain::Halfplanes(hp) => &hp.chart,
        }
    }

    /// A distinguished interior point.
    pub fn center(&self) -> ProjPoint {
        let c = self.canonical_chart();
        c.point(0.0, 0.0)
    }

    /// Lift normalized by `h(X) = 1`; `None` on the line `h = 0`.
    pub fn lift(&self, p: &ProjPoint) -> Option<V3> {
        self.lift_vector(&p.coords())
    }

    pub(crate) fn lift_vector(&self, v: &V3) -> Option<V3> {
        let s = self.functional().dot(v);
        if s.abs() <= 1e-14 * v.norm() {
            return None;
        }
        Some(v / s)
    }

    /// Vertex lifts of a polygonal domain, `None` for curved boundaries.
    pub fn vertex_lifts(&self) -> Option<Vec<V3>> {
        match self {
            ConvexDomain::Polygon(p) => Some(p.lifts.clone()),
            ConvexDomain::Halfplanes(hp) => hp.vertices.clone(),
            ConvexDomain::Conic(_) => None,
        }
    }

    /// Inward edge functionals of a polygonal domain in cyclic order.
    pub fn edge_functionals(&self) -> Option<Vec<V3>> {
        match self {
            ConvexDomain::Polygon(p) => Some(p.edges.clone()),
            ConvexDomain::Halfplanes(hp) if hp.ambient.is_none() => {
                let verts = hp.vertices.as_ref()?;
                let n = verts.len();
                Some(
                    (0..n)
                        .map(|i| {
                            let e = verts[i].cross(&verts[(i + 1) % n]).normalize();
                            let s = verts[(i + 2) % n].dot(&e).signum();
                            e * s
                        })
                        .collect(),
                )
            }
            _ => None,
        }
    }

    pub fn as_conic(&self) -> Option<(&Conic, V3)> {
        match self {
            ConvexDomain::Conic(c) => Some((&c.conic, c.interior)),
            _ => None,
        }
    }

    /// Supporting lines and ambient domain of a halfplane domain.
    pub fn as_halfplanes(&self) -> Option<(&[V3], Option<&ConvexDomain>)> {
        match self {
            ConvexDomain::Halfplanes(hp) => Some((&hp.lines, hp.ambient.as_deref())),
            _ => None,
        }
    }

    /// Signed depth of an `h`-normalized lift: positive inside.
    pub(crate) fn margin(&self, x: &V3) -> f64 {
        match self {
            ConvexDomain::Polygon(p) => p.edges.iter().map(|e| e.dot(x)).fold(f64::INFINITY, f64::min),
            ConvexDomain::Conic(c) => -c.conic.value(x),
            ConvexDomain::Halfplanes(hp) => {
                let m = hp
                    .lines
                    .iter()
                    .map(|l| l.dot(x) / l.norm())
                    .fold(f64::INFINITY, f64::min);
                match &hp.ambient {
                    Some(a) => m.min(a.margin(x)),
                    None => m,
                }
            }
        }
    }

    pub fn contains(&self, p: &ProjPoint) -> Membership {
        self.contains_tol(p, BOUNDARY_TOL)
    }

    pub fn contains_tol(&self, p: &ProjPoint, tol: f64) -> Membership {
        match self.lift(p) {
            None => Membership::Exterior,
            Some(x) => {
                let m = self.margin(&x);
                if m > tol {
                    Membership::Interior
                } else if m >= -tol {
                    Membership::Boundary
                } else {
                    Membership::Exterior
                }
            }
        }
    }

    /// Parameter interval `(t⁻, t⁺)` of `X + tV` inside the cone, for `X`
    /// in the cone. Either end may be infinite when `V` points into the closure.
    pub(crate) fn chord(&self, x: &V3, v: &V3) -> (f64, f64) {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        match self {
            ConvexDomain::Polygon(p) => {
                for e in &p.edges {
                    clip_linear(e, x, v, &mut lo, &mut hi);
                }
            }
            ConvexDomain::Conic(c) => {
                let (a, b) = conic_interval(c.conic.matrix(), x, v);
                lo = a;
                hi = b;
            }
            ConvexDomain::Halfplanes(hp) => {
                if let Some(a) = &hp.ambient {
                    let (a0, a1) = a.chord(x, v);
                    lo = a0;
                    hi = a1;
                }
                for l in &hp.lines {
                    clip_linear(l, x, v, &mut lo, &mut hi);
                }
            }
        }
        (lo, hi)
    }

    fn interior_lift(&self, p: &ProjPoint) -> Result<V3> {
        match self.contains(p) {
            Membership::Interior => self.lift(p).ok_or(Error::NotInterior),
            _ => Err(Error::NotInterior),
        }
    }

    /// Chord endpoints through two distinct interior points.
    pub fn boundary_chords(&self, x: &ProjPoint, y: &ProjPoint) -> Result<BoundaryChords> {
        let xl = self.interior_lift(x)?;
        let yl = self.interior_lift(y)?;
        let v = yl - xl;
        if v.norm() <= 1e-14 {
            return Err(Error::CoincidentPoints);
        }
        let (lo, hi) = self.chord(&xl, &v);
        let end = |t: f64| {
            if t.is_finite() {
                ProjPoint::from_vector(xl + v * t)
            } else {
                ProjPoint::from_vector(v)
            }
        };
        Ok(BoundaryChords {
            p_minus: end(lo)?,
            p_plus: end(hi)?,
        })
    }

    /// Hilbert distance ln [p:x:y:q], without the factor ½.
    pub fn hilbert_distance(&self, x: &ProjPoint, y: &ProjPoint) -> Result<Distance> {
        let mx = self.contains(x);
        let my = self.contains(y);
        if mx == Membership::Exterior || my == Membership::Exterior {
            return Err(Error::NotInterior);
        }
        if mx == Membership::Boundary || my == Membership::Boundary {
            return Ok(if x.approx_eq(y, 1e-15) {
                Distance::Finite(0.0)
            } else {
                Distance::Infinite
            });
        }
        let xl = self.lift(x).ok_or(Error::NotInterior)?;
        let yl = self.lift(y).ok_or(Error::NotInterior)?;
        let v = yl - xl;
        if v.norm() <= 1e-15 {
            return Ok(Distance::Finite(0.0));
        }
        let (lo, hi) = self.chord(&xl, &v);
        if hi <= 1.0 || lo >= 0.0 {
            return Ok(Distance::Infinite);
        }
        // [p:x:y:q] = (1 − t⁻)/(−t⁻) · t⁺/(t⁺ − 1)
        let left = if lo.is_finite() { (1.0 / -lo).ln_1p() } else { 0.0 };
        let right = if hi.is_finite() { (1.0 / (hi - 1.0)).ln_1p() } else { 0.0 };
        let d = left + right;
        if d.is_finite() {
            Ok(Distance::Finite(d))
        } else {
            Ok(Distance::Infinite)
        }
    }

    /// Errors unless the line at infinity of `chart` misses the open domain.
    pub fn validate_chart(&self, chart: &AffineChart) -> Result<()> {
        let psi = chart.functional();
        let ok = match self {
            ConvexDomain::Conic(c) => {
                let line = ProjLine::from_vector(psi)?;
                line_conic_intersection(&c.conic, &line)?.len() <= 1
            }
            ConvexDomain::Halfplanes(hp) if hp.ambient.is_some() => {
                return hp.ambient.as_ref().expect("ambient").validate_chart(chart)
            }
            _ => {
                let verts = self.vertex_lifts().expect("polygonal");
                let vals: Vec<f64> = verts.iter().map(|v| psi.dot(v) / psi.norm()).collect();
                vals.iter().all(|&s| s >= -1e-12) || vals.iter().all(|&s| s <= 1e-12)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidChart)
        }
    }

    /// Lift of the chart point and chart direction, oriented into the cone.
    fn chart_frame(&self, chart: &AffineChart, x: [f64; 2]) -> Result<(V3, M3)> {
        self.chart_frame_tol(chart, x, BOUNDARY_TOL)
    }

    fn chart_frame_tol(&self, chart: &AffineChart, x: [f64; 2], tol: f64) -> Result<(V3, M3)> {
        let mut xl = chart.lift(x[0], x[1]);
        let mut b = *chart.basis();
        if self.functional().dot(&xl) < 0.0 {
            xl = -xl;
            b = -b;
        }
        let p = ProjPoint::from_vector(xl)?;
        if self.contains_tol(&p, tol) != Membership::Interior {
            return Err(Error::NotInterior);
        }
        Ok((xl, b))
    }

    fn norm_in_frame(&self, xl: &V3, b: &M3, v: [f64; 2]) -> f64 {
        let dir = b * V3::new(v[0], v[1], 0.0);
        let (lo, hi) = self.chord(xl, &dir);
        let a = if hi.is_finite() { 1.0 / hi } else { 0.0 };
        let c = if lo.is_finite() { 1.0 / -lo } else { 0.0 };
        a + c
    }

    /// Finsler norm (1/|x − p⁻| + 1/|x − p⁺|)·|v| of a chart vector at a chart point.
    pub fn finsler_norm(&self, chart: &AffineChart, x: [f64; 2], v: [f64; 2]) -> Result<f64> {
        self.validate_chart(chart)?;
        let (xl, b) = self.chart_frame(chart, x)?;
        Ok(self.norm_in_frame(&xl, &b, v))
    }

    /// Polygon approximating the Finsler unit ball at `x`, vertex `k` in
    /// direction `2πk/n_dirs`.
    pub fn tangent_unit_ball(&self, chart: &AffineChart, x: [f64; 2], n_dirs: usize) -> Result<Vec<[f64; 2]>> {
        if n_dirs < 8 {
            return Err(Error::DegenerateInput("at least 8 directions are needed".into()));
        }
        self.validate_chart(chart)?;
        let (xl, b) = self.chart_frame(chart, x)?;
        Ok((0..n_dirs)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / n_dirs as f64;
                let u = [th.cos(), th.sin()];
                let r = 1.0 / self.norm_in_frame(&xl, &b, u);
                [r * u[0], r * u[1]]
            })
            .collect())
    }

    /// Lebesgue area, in chart coordinates, of the Finsler unit ball at `x`.
    pub fn unit_ball_area(&self, chart: &AffineChart, x: [f64; 2]) -> Result<f64> {
        self.validate_chart(chart)?;
        self.unit_ball_area_unchecked(chart, x)
    }

    pub(crate) fn unit_ball_area_unchecked(&self, chart: &AffineChart, x: [f64; 2]) -> Result<f64> {
        let (xl, b) = self.chart_frame_tol(chart, x, 0.0)?;
        match self {
            ConvexDomain::Conic(c) => Ok(conic_ball_area(c.conic.matrix(), &xl, &b)),
            ConvexDomain::Polygon(p) => Ok(polygon_ball_area(&p.edges, &xl, &b)),
            ConvexDomain::Halfplanes(hp) if hp.ambient.is_none() => Ok(polygon_ball_area(&hp.lines, &xl, &b)),
            ConvexDomain::Halfplanes(_) => Ok(self.numeric_ball_area(&xl, &b)),
        }
    }

    /// ∫₀^π r(θ)² dθ by adaptive Simpson; the ball is centrally symmetric.
    fn numeric_ball_area(&self, xl: &V3, b: &M3) -> f64 {
        let f = |th: f64| {
            let n = self.norm_in_frame(xl, b, [th.cos(), th.sin()]);
            1.0 / (n * n)
        };
        let m = 64;
        let mut total = 0.0;
        for k in 0..m {
            let a = PI * k as f64 / m as f64;
            let c = PI * (k + 1) as f64 / m as f64;
            total += adaptive_simpson(&f, a, c, 1e-13, 40);
        }
        total
    }

    /// Image domain `g(Ω)`.
    pub fn transform(&self, g: &M3) -> Result<Self> {
        let inv = g
            .try_inverse()
            .ok_or_else(|| Error::DegenerateInput("singular transform".into()))?;
        match self {
            ConvexDomain::Polygon(p) => {
                let lifts: Vec<V3> = p.lifts.iter().map(|v| g * v).collect();
                Self::polygon(&lifts)
            }
            ConvexDomain::Conic(c) => Self::conic(
                Conic::new(inv.transpose() * c.conic.matrix() * inv),
                ProjPoint::from_vector(g * c.interior)?,
            ),
            ConvexDomain::Halfplanes(hp) => {
                let lines: Vec<ProjLine> = hp
                    .lines
                    .iter()
                    .map(|l| ProjLine::from_vector(inv.transpose() * l))
                    .collect::<Result<_>>()?;
                let ambient = match &hp.ambient {
                    Some(a) => Some(a.transform(g)?),
                    None => None,
                };
                Self::halfplanes(&lines, ProjPoint::from_vector(g * hp.interior)?, ambient)
            }
        }
    }

    /// The dual domain Ω* of lines missing the closure of Ω.
    pub fn dual_domain(&self) -> Result<Self> {
        match self {
            ConvexDomain::Conic(c) => {
                let q = c.conic.matrix();
                let inv = q
                    .try_inverse()
                    .ok_or(Error::DegenerateConic)?;
                Self::conic(Conic::new(inv), ProjPoint::from_vector(-(q * c.interior))?)
            }
            ConvexDomain::Polygon(_) | ConvexDomain::Halfplanes(_) => {
                let edges = self
                    .edge_functionals()
                    .ok_or_else(|| Error::DegenerateInput("dual of a mixed curved domain".into()))?;
                Self::polygon(&edges)
            }
        }
    }

    /// Boundary points in the canonical chart, by ray shooting from the
    /// center at `n` equally spaced angles.
    pub fn boundary_samples(&self, n: usize) -> Vec<[f64; 2]> {
        let chart = self.canonical_chart();
        let x = chart.lift(0.0, 0.0);
        let b = chart.basis();
        (0..n)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / n as f64;
                let (c, s) = (th.cos(), th.sin());
                let v = b * V3::new(c, s, 0.0);
                let (_, t) = self.chord(&x, &v);
                [t * c, t * s]
            })
            .collect()
    }

    /// Distance from the chart center to the boundary in direction `θ`.
    pub fn radial_function(&self, chart: &AffineChart, center: [f64; 2], theta: f64) -> Result<f64> {
        let (xl, b) = self.chart_frame(chart, center)?;
        let v = b * V3::new(theta.cos(), theta.sin(), 0.0);
        Ok(self.chord(&xl, &v).1)
    }

    /// Regularity report of the boundary sampled with `n` rays.
    pub fn regularity_report(&self, n: usize, opts: &RegularityOptions) -> RegularityReport {
        regularity_report(&self.boundary_samples(n), opts)
    }
}

/// Max over directions of the radial gap between two domains seen from a
/// common interior point; an upper bound for their Hausdorff distance in the chart.
pub fn radial_gap(a: &ConvexDomain, b: &ConvexDomain, chart: &AffineChart, center: [f64; 2], n_dirs: usize) -> Result<f64> {
    let mut gap: f64 = 0.0;
    for k in 0..n_dirs {
        let th = 2.0 * PI * k as f64 / n_dirs as f64;
        let ra = a.radial_function(chart, center, th)?;
        let rb = b.radial_function(chart, center, th)?;
        gap = gap.max((ra - rb).abs());
    }
    Ok(gap)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol * whole.abs().max(1e-300) {
        return left + right + diff / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol, depth - 1) + simpson_step(f, m, b, fm, frm, fb, right, tol, depth - 1)
}

/// The Finsler ball of a conic domain is the ellipse {v : vᵀMv < 1} with
/// M = 4((qX)(qX)ᵀ − c q)/c², c = XᵀqX, restricted to chart directions.
fn conic_ball_area(q: &M3, xl: &V3, b: &M3) -> f64 {
    let c = xl.dot(&(q * xl));
    let qx = q * xl;
    let m3 = (qx * qx.transpose() - q * c) * (4.0 / (c * c));
    let b1 = b.column(0).into_owned();
    let b2 = b.column(1).into_owned();
    let m11 = b1.dot(&(m3 * b1));
    let m12 = b1.dot(&(m3 * b2));
    let m22 = b2.dot(&(m3 * b2));
    PI / (m11 * m22 - m12 * m12).sqrt()
}

/// For halfspace cones the unit ball is the polar body of K − K, where K
/// is the hull of the origin and the chart gradients of ℓᵢ / ℓᵢ(X).
fn polygon_ball_area(lines: &[V3], xl: &V3, b: &M3) -> f64 {
    let b1 = b.column(0).into_owned();
    let b2 = b.column(1).into_owned();
    let mut pts: Vec<[f64; 2]> = Vec::with_capacity(lines.len() + 1);
    pts.push([0.0, 0.0]);
    for l in lines {
        let s = l.dot(xl);
        pts.push([l.dot(&b1) / s, l.dot(&b2) / s]);
    }
    let hull: Vec<[f64; 2]> = convex_hull(&pts).into_iter().map(|i| pts[i]).collect();
    let neg: Vec<[f64; 2]> = hull.iter().map(|p| [-p[0], -p[1]]).collect();
    let d = minkowski_sum(&hull, &neg);
    polar_area(&d)
}

fn lowest(p: &[[f64; 2]]) -> usize {
    (0..p.len())
        .min_by(|&a, &b| p[a][1].total_cmp(&p[b][1]).then(p[a][0].total_cmp(&p[b][0])))
        .unwrap_or(0)
}

/// Minkowski sum of two counter-clockwise convex polygons.
pub(crate) fn minkowski_sum(p: &[[f64; 2]], q: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let (n, m) = (p.len(), q.len());
    let (i0, j0) = (lowest(p), lowest(q));
    let mut out = Vec::with_capacity(n + m);
    let (mut i, mut j) = (0usize, 0usize);
    while i < n || j < m {
        let a = p[(i0 + i) % n];
        let b = q[(j0 + j) % m];
        out.push([a[0] + b[0], a[1] + b[1]]);
        let ea = {
            let a1 = p[(i0 + i + 1) % n];
            [a1[0] - a[0], a1[1] - a[1]]
        };
        let eb = {
            let b1 = q[(j0 + j + 1) % m];
            [b1[0] - b[0], b1[1] - b[1]]
        };
        let cr = ea[0] * eb[1] - ea[1] * eb[0];
        if j >= m || (i < n && cr > 0.0) {
            i += 1;
        } else if i >= n || cr < 0.0 {
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    out
}

/// Area of {v : ⟨d, v⟩ ≤ 1 for all vertices d} for a convex polygon with
/// the origin in its interior.
fn polar_area(d: &[[f64; 2]]) -> f64 {
    let n = d.len();
    let mut w = Vec::with_capacity(n);
    for k in 0..n {
        let a = d[k];
        let b = d[(k + 1) % n];
        let det = a[0] * b[1] - a[1] * b[0];
        if det.abs() <= 1e-300 {
            continue;
        }
        w.push([(b[1] - a[1]) / det, (a[0] - b[0]) / det]);
    }
    polygon_area(&w).abs()
}

/// Vertices, in cyclic order, of the polygon cut out by the halfspaces `l > 0`.
fn halfplane_vertices(lines: &[V3], x: &V3) -> Result<Vec<V3>> {
    let xn = x.normalize();
    let k = (0..3)
        .min_by(|&a, &b| xn[a].abs().total_cmp(&xn[b].abs()))
        .unwrap_or(0);
    let e1 = xn.cross(&V3::ith(k, 1.0)).normalize();
    let e2 = xn.cross(&e1);
    let pts: Vec<[f64; 2]> = lines
        .iter()
        .map(|l| {
            let a = l / l.dot(x);
            [a.dot(&e1), a.dot(&e2)]
        })
        .collect();
    let hull = convex_hull(&pts);
    if hull.len() < 3 {
        return Err(Error::NotProper);
    }
    let h: V3 = lines.iter().map(|l| l.normalize()).sum();
    let n = hull.len();
    Ok((0..n)
        .map(|i| {
            let v = lines[hull[i]].cross(&lines[hull[(i + 1) % n]]);
            if h.dot(&v) < 0.0 {
                -v
            } else {
                v
            }
        })
        .collect())
}

/// Thresholds of [`regularity_report`].
#[derive(Clone, Copy, Debug)]
pub struct RegularityOptions {
    /// Three consecutive samples are aligned when the sine of their turning angle is below this.
    pub align_tol: f64,
    /// A run of samples turning by more than this angle (radians) each is a corner.
    pub corner_angle: f64,
}

impl Default for RegularityOptions {
    fn default() -> Self {
        RegularityOptions {
            align_tol: 1e-9,
            corner_angle: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub from: [f64; 2],
    pub to: [f64; 2],
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Corner {
    pub at: [f64; 2],
    pub angle: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RegularityReport {
    pub segments: Vec<Segment>,
    pub corners: Vec<Corner>,
}

/// Detect flat pieces and corners of a closed boundary given by dense samples in cyclic order.
pub fn regularity_report(samples: &[[f64; 2]], opts: &RegularityOptions) -> RegularityReport {
    let n = samples.len();
    if n < 4 {
        return RegularityReport::default();
    }
    let d = |i: usize| {
        let a = samples[i % n];
        let b = samples[(i + 1) % n];
        Vector2::new(b[0] - a[0], b[1] - a[1])
    };
    let mut sine = vec![0.0; n];
    let mut turn = vec![0.0; n];
    for i in 0..n {
        let a = d(i + n - 1);
        let b = d(i);
        let cr = a.x * b.y - a.y * b.x;
        let den = a.norm() * b.norm();
        sine[i] = if den > 0.0 { (cr / den).abs() } else { 0.0 };
        turn[i] = cr.atan2(a.dot(&b));
    }
    let aligned: Vec<bool> = sine.iter().map(|&s| s <= opts.align_tol).collect();
    let sharp: Vec<bool> = turn.iter().map(|&t| t.abs() > opts.corner_angle).collect();

    let runs = |flags: &[bool]| -> Vec<(usize, usize)> {
        // cyclic maximal runs as (start, length)
        if flags.iter().all(|&f| f) {
            return vec![(0, n)];
        }
        let start = (0..n).find(|&i| !flags[i]).unwrap_or(0);
        let mut out = Vec::new();
        let mut k = 0;
        while k < n {
            let i = (start + k) % n;
            if flags[i] {
                let mut len = 0;
                while len < n && flags[(i + len) % n] {
                    len += 1;
                }
                out.push((i, len));
                k += len;
            } else {
                k += 1;
            }
        }
        out
    };

    let segments = runs(&aligned)
        .into_iter()
        .map(|(s, len)| Segment {
            from: samples[(s + n - 1) % n],
            to: samples[(s + len) % n],
            samples: len + 2,
        })
        .collect();
    let corners = runs(&sharp)
        .into_iter()
        .map(|(s, len)| {
            let angle: f64 = (0..len).map(|j| turn[(s + j) % n]).sum();
            Corner {
                at: samples[(s + len / 2) % n],
                angle: angle.abs(),
            }
        })
        .collect();
    RegularityReport { segments, corners }
}

/// JSON layout of a domain.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainSpec {
    /// Vertex lifts of one cone, in cyclic order.
    Polygon { vertices: Vec<[f64; 3]> },
    /// Symmetric matrix of signature (2,1) and a point inside.
    Conic { matrix: [[f64; 3]; 3], interior: [f64; 3] },
    /// Supporting lines, a point inside, optional ambient domain.
    Halfplanes {
        lines: Vec<[f64; 3]>,
        interior: [f64; 3],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ambient: Option<Box<DomainSpec>>,
    },
}

fn arr(v: &V3) -> [f64; 3] {
    [v[0], v[1], v[2]]
}

impl TryFrom<DomainSpec> for ConvexDomain {
    type Error = Error;
    fn try_from(s: DomainSpec) -> Result<Self> {
        match s {
            DomainSpec::Polygon { vertices } => {
                let lifts: Vec<V3> = vertices.iter().map(|a| V3::new(a[0], a[1], a[2])).collect();
                ConvexDomain::polygon(&lifts)
            }
            DomainSpec::Conic { matrix, interior } => {
                let q = M3::from_fn(|i, j| matrix[i][j]);
                ConvexDomain::conic(Conic::new(q), ProjPoint::try_from(interior)?)
            }
            DomainSpec::Halfplanes { lines, interior, ambient } => {
                let lines: Vec<ProjLine> = lines.into_iter().map(ProjLine::try_from).collect::<Result<_>>()?;
                let ambient = match ambient {
                    Some(a) => Some(ConvexDomain::try_from(*a)?),
                    None => None,
                };
                ConvexDomain::halfplanes(&lines, ProjPoint::try_from(interior)?, ambient)
            }
        }
    }
}

impl From<ConvexDomain> for DomainSpec {
    fn from(d: ConvexDomain) -> Self {
        match d {
            ConvexDomain::Polygon(p) => DomainSpec::Polygon {
                vertices: p.lifts.iter().map(arr).collect(),
            },
            ConvexDomain::Conic(c) => {
                let q = c.conic.matrix();
                DomainSpec::Conic {
                    matrix: [
                        [q[(0, 0)], q[(0, 1)], q[(0, 2)]],
                        [q[(1, 0)], q[(1, 1)], q[(1, 2)]],
                        [q[(2, 0)], q[(2, 1)], q[(2, 2)]],
                    ],
                    interior: arr(&c.interior),
                }
            }
            ConvexDomain::Halfplanes(hp) => DomainSpec::Halfplanes {
                lines: hp.lines.iter().map(arr).collect(),
                interior: arr(&hp.interior),
                ambient: hp.ambient.map(|a| Box::new(DomainSpec::from(*a))),
            },
        }
    }
}
