//! Dynamics of unimodular projective transformations.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::domain::{ConvexDomain, Membership};
use crate::error::{Error, Result};
use crate::projective::{convex_hull, join, ProjLine, ProjPoint, M3, V3};

/// A 3×3 real matrix normalized to determinant 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 9]", into = "[f64; 9]")]
pub struct ProjTransform(M3);

impl ProjTransform {
    pub fn new(m: M3) -> Result<Self> {
        let d = m.determinant();
        if !d.is_finite() || d.abs() <= 1e-300 || !m.iter().all(|x| x.is_finite()) {
            return Err(Error::DegenerateInput("singular transform".into()));
        }
        Ok(ProjTransform(m / d.cbrt()))
    }

    pub fn identity() -> Self {
        ProjTransform(M3::identity())
    }

    pub fn matrix(&self) -> &M3 {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let inv = self.0.try_inverse().expect("unimodular");
        ProjTransform::new(inv).expect("unimodular")
    }

    /// `self ∘ other`, renormalized.
    pub fn compose(&self, other: &ProjTransform) -> Self {
        ProjTransform::new(self.0 * other.0).expect("unimodular")
    }

    pub fn apply(&self, p: &ProjPoint) -> Result<ProjPoint> {
        p.transform(&self.0)
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { *self };
        let mut e = n.unsigned_abs();
        let mut acc = M3::identity();
        let mut b = base.0;
        while e > 0 {
            if e & 1 == 1 {
                acc *= b;
            }
            b *= b;
            e >>= 1;
        }
        ProjTransform::new(acc).expect("unimodular")
    }
}

impl TryFrom<[f64; 9]> for ProjTransform {
    type Error = Error;
    fn try_from(a: [f64; 9]) -> Result<Self> {
        ProjTransform::new(M3::from_row_slice(&a))
    }
}

impl From<ProjTransform> for [f64; 9] {
    fn from(t: ProjTransform) -> [f64; 9] {
        let m = t.0;
        [
            m[(0, 0)], m[(0, 1)], m[(0, 2)],
            m[(1, 0)], m[(1, 1)], m[(1, 2)],
            m[(2, 0)], m[(2, 1)], m[(2, 2)],
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Hyperbolic,
    Planar,
    QuasiHyperbolic,
    Parabolic,
    Elliptic,
    Identity,
}

/// Family together with its fixed data.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family")]
pub enum DynClass {
    Hyperbolic {
        lambda_plus: f64,
        lambda_zero: f64,
        lambda_minus: f64,
        p_plus: ProjPoint,
        p_zero: ProjPoint,
        p_minus: ProjPoint,
        /// Line through p⁺ and p⁻.
        d_plus_minus: ProjLine,
        d_plus_zero: ProjLine,
        d_minus_zero: ProjLine,
    },
    /// Conjugate to diag(α, α, β): a line of fixed points and an isolated one.
    Planar {
        alpha: f64,
        beta: f64,
        p: ProjPoint,
        line: ProjLine,
    },
    /// Conjugate to a 2×2 Jordan block of α plus β.
    QuasiHyperbolic {
        alpha: f64,
        beta: f64,
        p1: ProjPoint,
        p2: ProjPoint,
        line: ProjLine,
    },
    Parabolic {
        p: ProjPoint,
        line: ProjLine,
    },
    Elliptic {
        /// Rotation angle in (0, π].
        theta: f64,
        fixed: ProjPoint,
        line: ProjLine,
    },
    Identity,
}

impl DynClass {
    pub fn family(&self) -> Family {
        match self {
            DynClass::Hyperbolic { .. } => Family::Hyperbolic,
            DynClass::Planar { .. } => Family::Planar,
            DynClass::QuasiHyperbolic { .. } => Family::QuasiHyperbolic,
            DynClass::Parabolic { .. } => Family::Parabolic,
            DynClass::Elliptic { .. } => Family::Elliptic,
            DynClass::Identity => Family::Identity,
        }
    }
}

fn svd_vectors(a: &M3) -> ([f64; 3], [V3; 3]) {
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let s = idx.map(|i| svd.singular_values[i]);
    let v = idx.map(|i| vt.row(i).transpose());
    (s, v)
}

/// Unit vector spanning (approximately) the kernel of `a`.
fn null_vector(a: &M3) -> V3 {
    svd_vectors(a).1[0]
}

/// Unit vector maximizing |a v|.
fn top_vector(a: &M3) -> V3 {
    svd_vectors(a).1[2]
}

fn point(v: V3) -> ProjPoint {
    ProjPoint::from_vector(v).expect("unit vector")
}

fn line(v: V3) -> ProjLine {
    ProjLine::from_vector(v).expect("unit vector")
}

/// Classify `g` into one of the six families.
///
/// Jordan structure is decided from annihilating polynomials, whose
/// residuals are well conditioned, rather than from eigenvalue gaps.
pub fn classify(g: &ProjTransform, tol: f64) -> Result<DynClass> {
    let m = *g.matrix();
    let id = M3::identity();
    let scale = m.norm();
    let n = m - id;
    let nn = n.norm();
    if nn <= tol * scale {
        return Ok(DynClass::Identity);
    }
    let n2 = n * n;
    if (n2 * n).norm() <= tol * nn.powi(3) {
        if n2.norm() <= tol.sqrt() * nn * nn {
            // transvection
            return Err(Error::NotConvexCompatible);
        }
        return Ok(DynClass::Parabolic {
            p: point((n2 * top_vector(&n2)).normalize()),
            line: line((n2.transpose() * top_vector(&n2.transpose())).normalize()),
        });
    }

    let ev = m.complex_eigenvalues();
    let rho = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pairs = [(0usize, 1usize, 2usize), (0, 2, 1), (1, 2, 0)];
    let &(i, j, k) = pairs
        .iter()
        .min_by(|a, b| (ev[a.0] - ev[a.1]).norm().total_cmp(&(ev[b.0] - ev[b.1]).norm()))
        .expect("three pairs");
    if (ev[i] - ev[j]).norm() <= 1e-3 * rho && ev[k].im.abs() <= 1e-9 * rho && ev[k].re > 0.0 {
        let beta = ev[k].re;
        let alpha = ((ev[i] + ev[j]).re).signum() / beta.sqrt();
        let a = m - id * alpha;
        let b = m - id * beta;
        let sa = scale + alpha.abs();
        let sb = scale + beta.abs();
        if (a * b).norm() <= tol * sa * sb {
            if alpha < 0.0 {
                if (alpha + 1.0).abs() <= 1e3 * tol && (beta - 1.0).abs() <= 1e3 * tol {
                    return Ok(DynClass::Elliptic {
                        theta: std::f64::consts::PI,
                        fixed: point(null_vector(&b)),
                        line: line(null_vector(&b.transpose())),
                    });
                }
                return Err(Error::NotConvexCompatible);
            }
            return Ok(DynClass::Planar {
                alpha,
                beta,
                p: point(null_vector(&b)),
                line: line(null_vector(&b.transpose())),
            });
        }
        if (a * a * b).norm() <= tol * sa * sa * sb {
            if alpha < 0.0 {
                return Err(Error::NotConvexCompatible);
            }
            return Ok(DynClass::QuasiHyperbolic {
                alpha,
                beta,
                p1: point(null_vector(&a)),
                p2: point(null_vector(&b)),
                line: line(null_vector(&b.transpose())),
            });
        }
    }

    let complex: Vec<Complex<f64>> = ev.iter().copied().filter(|z| z.im.abs() > 0.0).collect();
    if complex.is_empty() {
        let mut lam: Vec<f64> = ev.iter().map(|z| z.re).collect();
        if lam.iter().any(|&l| l <= 0.0) {
            return Err(Error::NotConvexCompatible);
        }
        lam.sort_by(|a, b| b.total_cmp(a));
        let eig = |l: f64| null_vector(&(m - id * l));
        let (vp, v0, vm) = (eig(lam[0]), eig(lam[1]), eig(lam[2]));
        let (pp, p0, pm) = (point(vp), point(v0), point(vm));
        return Ok(DynClass::Hyperbolic {
            lambda_plus: lam[0],
            lambda_zero: lam[1],
            lambda_minus: lam[2],
            d_plus_minus: join(&pp, &pm)?,
            d_plus_zero: join(&pp, &p0)?,
            d_minus_zero: join(&pm, &p0)?,
            p_plus: pp,
            p_zero: p0,
            p_minus: pm,
        });
    }
    let z = complex[0];
    let real = ev.iter().find(|w| w.im == 0.0).map(|w| w.re).unwrap_or(f64::NAN);
    let loose = 1e3 * tol;
    if (z.norm() - 1.0).abs() <= loose && (real - 1.0).abs() <= loose {
        let b = m - id;
        return Ok(DynClass::Elliptic {
            theta: z.arg().abs(),
            fixed: point(null_vector(&b)),
            line: line(null_vector(&b.transpose())),
        });
    }
    Err(Error::NotConvexCompatible)
}

/// Conjugator `P` and normal form `N = P⁻¹ g P` for the real-spectrum families.
fn normal_form(g: &ProjTransform, class: &DynClass) -> Result<(M3, M3)> {
    let m = *g.matrix();
    let id = M3::identity();
    let (p, n) = match *class {
        DynClass::Identity => (id, id),
        DynClass::Hyperbolic {
            lambda_plus,
            lambda_zero,
            lambda_minus,
            ..
        } => {
            let cols: Vec<V3> = [lambda_plus, lambda_zero, lambda_minus]
                .iter()
                .map(|&l| null_vector(&(m - id * l)))
                .collect();
            (
                M3::from_columns(&cols),
                M3::from_diagonal(&V3::new(lambda_plus, lambda_zero, lambda_minus)),
            )
        }
        DynClass::Planar { alpha, beta, .. } => {
            let (_, v) = svd_vectors(&(m - id * alpha));
            let vb = null_vector(&(m - id * beta));
            (M3::from_columns(&[v[0], v[1], vb]), M3::from_diagonal(&V3::new(alpha, alpha, beta)))
        }
        DynClass::QuasiHyperbolic { alpha, beta, .. } => {
            let a = m - id * alpha;
            let b = m - id * beta;
            let v2 = top_vector(&(a * b));
            let v1 = a * v2;
            let vb = null_vector(&b);
            (
                M3::from_columns(&[v1, v2, vb]),
                M3::new(alpha, 1.0, 0.0, 0.0, alpha, 0.0, 0.0, 0.0, beta),
            )
        }
        DynClass::Parabolic { .. } => {
            let nm = m - id;
            let v3 = top_vector(&(nm * nm));
            let v2 = nm * v3;
            let v1 = nm * v2;
            (
                M3::from_columns(&[v1, v2, v3]),
                M3::new(1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0),
            )
        }
        DynClass::Elliptic { .. } => return Err(Error::WrongFamily(Family::Elliptic)),
    };
    Ok((p, n))
}

/// Real power γᵗ along the one-parameter group through γ.
pub fn one_param_power(g: &ProjTransform, t: f64, tol: f64) -> Result<ProjTransform> {
    let class = classify(g, tol).map_err(|e| match e {
        Error::NotConvexCompatible => Error::NoRealLogarithm,
        other => other,
    })?;
    if let DynClass::Elliptic { .. } = class {
        if t.fract() != 0.0 {
            return Err(Error::NoRealLogarithm);
        }
        return Ok(g.powi(t as i64));
    }
    let (p, n) = normal_form(g, &class)?;
    let nt = match class {
        DynClass::Identity => return Ok(ProjTransform::identity()),
        DynClass::Hyperbolic { .. } | DynClass::Planar { .. } => {
            M3::from_diagonal(&V3::new(n[(0, 0)].powf(t), n[(1, 1)].powf(t), n[(2, 2)].powf(t)))
        }
        DynClass::QuasiHyperbolic { alpha, beta, .. } => {
            let at = alpha.powf(t);
            M3::new(at, t * at / alpha, 0.0, 0.0, at, 0.0, 0.0, 0.0, beta.powf(t))
        }
        DynClass::Parabolic { .. } => M3::new(1.0, t, 0.5 * t * (t - 1.0), 0.0, 1.0, t, 0.0, 0.0, 1.0),
        DynClass::Elliptic { .. } => unreachable!("handled above"),
    };
    let pinv = p
        .try_inverse()
        .ok_or_else(|| Error::non_convergent("singular normal-form conjugator"))?;
    ProjTransform::new(p * nt * pinv)
}

/// Invariant pencil λ·z² + μ·(y² − zy − 2xz) of a parabolic, in normal-form
/// coordinates w, with `v = conjugator · w` the ambient coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ParabolicPencil {
    pub conjugator: M3,
    pub normal_form: M3,
}

impl ParabolicPencil {
    /// Pencil member in normal-form coordinates.
    pub fn normal_member(lambda: f64, mu: f64) -> M3 {
        M3::new(0.0, 0.0, -mu, 0.0, mu, -0.5 * mu, -mu, -0.5 * mu, lambda)
    }

    /// Pencil member as a quadratic form in ambient coordinates.
    pub fn member(&self, lambda: f64, mu: f64) -> M3 {
        let pinv = self.conjugator.try_inverse().expect("invertible conjugator");
        pinv.transpose() * Self::normal_member(lambda, mu) * pinv
    }

    /// max |Nᵀ Q N − Q| over the entries, for the normal-form member.
    pub fn invariance_residual(&self, lambda: f64, mu: f64) -> f64 {
        let q = Self::normal_member(lambda, mu);
        let n = self.normal_form;
        (n.transpose() * q * n - q).amax()
    }
}

pub fn parabolic_invariant_pencil(g: &ProjTransform, tol: f64) -> Result<ParabolicPencil> {
    let class = classify(g, tol)?;
    if class.family() != Family::Parabolic {
        return Err(Error::WrongFamily(class.family()));
    }
    let (p, n) = normal_form(g, &class)?;
    Ok(ParabolicPencil {
        conjugator: p,
        normal_form: n,
    })
}

/// Orbit of a quasi-hyperbolic element in the chart z = 1 of the
/// coordinates where γ = [[α, α, 0], [0, α, 0], [0, 0, β]].
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiHyperbolicOrbit {
    pub alpha: f64,
    pub beta: f64,
    /// Maps those coordinates to ambient coordinates.
    pub conjugator: M3,
    pub points: Vec<[f64; 2]>,
}

impl QuasiHyperbolicOrbit {
    /// Residual of X = X₀·Y/Y₀ + Y·ln(Y/Y₀)/ln(α/β) at `p`; on the line Y₀ = 0, |Y|.
    pub fn residual(&self, x0: [f64; 2], p: [f64; 2]) -> f64 {
        if x0[1] == 0.0 {
            return p[1].abs();
        }
        let r = p[1] / x0[1];
        p[0] - x0[0] * r - p[1] * r.ln() / (self.alpha / self.beta).ln()
    }
}

pub fn quasi_hyperbolic_orbit(g: &ProjTransform, x0: [f64; 2], ts: &[f64], tol: f64) -> Result<QuasiHyperbolicOrbit> {
    let class = classify(g, tol)?;
    let DynClass::QuasiHyperbolic { alpha, beta, .. } = class else {
        return Err(Error::WrongFamily(class.family()));
    };
    let (p, _) = normal_form(g, &class)?;
    let mut q = p;
    q.set_column(0, &(p.column(0) / alpha));
    let qinv = q
        .try_inverse()
        .ok_or_else(|| Error::non_convergent("singular normal-form conjugator"))?;
    let start = q * V3::new(x0[0], x0[1], 1.0);
    let mut points = Vec::with_capacity(ts.len());
    for &t in ts {
        let w = qinv * (one_param_power(g, t, tol)?.matrix() * start);
        points.push([w[0] / w[2], w[1] / w[2]]);
    }
    Ok(QuasiHyperbolicOrbit {
        alpha,
        beta,
        conjugator: q,
        points,
    })
}

/// True iff `g` maps the domain onto itself, judged on boundary samples
/// (or exactly by congruence for a conic).
pub fn preserves_domain(g: &ProjTransform, domain: &ConvexDomain, n_samples: usize, tol: f64) -> bool {
    let m = g.matrix();
    if let Some((conic, interior)) = domain.as_conic() {
        let q = conic.matrix();
        let c = m.transpose() * q * m;
        let c = c / c.norm();
        let qn = q / q.norm();
        let congruent = (c - qn).norm() <= tol || (c + qn).norm() <= tol;
        let inside = ProjPoint::from_vector(m * interior)
            .map(|p| domain.contains(&p) == Membership::Interior)
            .unwrap_or(false);
        return congruent && inside;
    }
    let chart = domain.canonical_chart();
    let center = chart.lift(0.0, 0.0);
    match ProjPoint::from_vector(m * center) {
        Ok(p) if domain.contains(&p) == Membership::Interior => {}
        _ => return false,
    }
    domain.boundary_samples(n_samples).iter().all(|s| {
        ProjPoint::from_vector(m * chart.lift(s[0], s[1]))
            .map(|p| domain.contains_tol(&p, tol) == Membership::Boundary)
            .unwrap_or(false)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AxisKind {
    Principal,
    Secondary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Axis {
    pub endpoints: [ProjPoint; 2],
    pub kind: AxisKind,
}

/// Principal axis, plus secondary axes when p⁰ lies on the boundary.
pub fn axes(g: &ProjTransform, domain: &ConvexDomain, tol: f64) -> Result<Vec<Axis>> {
    let class = classify(g, tol)?;
    let (a, b, zero) = match class {
        DynClass::Hyperbolic {
            p_plus, p_zero, p_minus, ..
        } => (p_plus, p_minus, Some(p_zero)),
        DynClass::QuasiHyperbolic { p1, p2, .. } => (p1, p2, None),
        other => return Err(Error::WrongFamily(other.family())),
    };
    if !preserves_domain(g, domain, 256, 1e-7) {
        return Err(Error::DomainNotPreserved);
    }
    let mut out = vec![Axis {
        endpoints: [a, b],
        kind: AxisKind::Principal,
    }];
    if let Some(p0) = zero {
        if domain.contains_tol(&p0, 1e-7) == Membership::Boundary {
            out.push(Axis {
                endpoints: [a, p0],
                kind: AxisKind::Secondary,
            });
            out.push(Axis {
                endpoints: [p0, b],
                kind: AxisKind::Secondary,
            });
        }
    }
    Ok(out)
}

/// Convex hull of the orbit of a seed polygon under γⁿ, |n| ≤ N.
#[derive(Clone, Debug)]
pub struct SectorRegion {
    pub generator: ProjTransform,
    pub seed: Vec<ProjPoint>,
    pub n: usize,
    /// Hull vertices in cyclic order.
    pub hull: Vec<ProjPoint>,
}

pub fn sector(g: &ProjTransform, domain: &ConvexDomain, seed: &[ProjPoint], n: usize) -> Result<SectorRegion> {
    if !preserves_domain(g, domain, 256, 1e-7) {
        return Err(Error::DomainNotPreserved);
    }
    if seed.iter().any(|p| domain.contains(p) != Membership::Interior) {
        return Err(Error::NotInterior);
    }
    let chart = domain.canonical_chart();
    let mut pts = Vec::new();
    let lift = |p: &ProjPoint| domain.lift(p).ok_or(Error::NotInterior);
    let (fwd, bwd) = (*g.matrix(), *g.inverse().matrix());
    for s in seed {
        let x = lift(s)?;
        pts.push(x);
        let (mut a, mut b) = (x, x);
        for _ in 0..n {
            a = fwd * a;
            a /= domain.functional().dot(&a);
            b = bwd * b;
            b /= domain.functional().dot(&b);
            pts.push(a);
            pts.push(b);
        }
    }
    let coords: Vec<[f64; 2]> = pts
        .iter()
        .map(|v| chart.coords_of(v).ok_or(Error::NotInterior))
        .collect::<Result<_>>()?;
    let hull = convex_hull(&coords)
        .into_iter()
        .map(|i| ProjPoint::from_vector(pts[i]))
        .collect::<Result<_>>()?;
    Ok(SectorRegion {
        generator: *g,
        seed: seed.to_vec(),
        n,
        hull,
    })
}

/// Outcome of [`same_geometric_characteristics`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Compatibility {
    pub same: bool,
    /// An input is an elliptic involution, for which the test is best-effort.
    pub order_two_elliptic: bool,
}

/// Whether `g` and `h` lie in a common one-parameter group.
pub fn same_geometric_characteristics(g: &ProjTransform, h: &ProjTransform, tol: f64) -> Result<Compatibility> {
    let cg = classify(g, tol)?;
    let ch = classify(h, tol)?;
    let involution = |c: &DynClass| matches!(c, DynClass::Elliptic { theta, .. } if (theta - std::f64::consts::PI).abs() <= 1e3 * tol);
    let flag = involution(&cg) || involution(&ch);
    let loose = tol.sqrt();
    let pe = |a: &ProjPoint, b: &ProjPoint| a.approx_eq(b, loose);
    let le = |a: &ProjLine, b: &ProjLine| a.approx_eq(b, loose);
    let (mg, mh) = (g.matrix(), h.matrix());
    let commute = (mg * mh - mh * mg).norm() <= loose * mg.norm() * mh.norm();
    let same = match (&cg, &ch) {
        (DynClass::Identity, _) | (_, DynClass::Identity) => true,
        (
            DynClass::Hyperbolic {
                p_plus: a1,
                p_zero: a0,
                p_minus: a2,
                ..
            },
            DynClass::Hyperbolic {
                p_plus: b1,
                p_zero: b0,
                p_minus: b2,
                ..
            },
        ) => pe(a0, b0) && ((pe(a1, b1) && pe(a2, b2)) || (pe(a1, b2) && pe(a2, b1))),
        (DynClass::Planar { p: a, line: la, .. }, DynClass::Planar { p: b, line: lb, .. }) => pe(a, b) && le(la, lb),
        (
            DynClass::QuasiHyperbolic {
                p1: a1, p2: a2, line: la, ..
            },
            DynClass::QuasiHyperbolic {
                p1: b1, p2: b2, line: lb, ..
            },
        ) => pe(a1, b1) && pe(a2, b2) && le(la, lb),
        (DynClass::Parabolic { p: a, line: la }, DynClass::Parabolic { p: b, line: lb }) => pe(a, b) && le(la, lb),
        (
            DynClass::Elliptic { fixed: a, line: la, .. },
            DynClass::Elliptic { fixed: b, line: lb, .. },
        ) => pe(a, b) && le(la, lb),
        _ => false,
    };
    Ok(Compatibility {
        same: same && commute,
        order_two_elliptic: flag,
    })
}
