//! Proper convex cones of R³, the Vinberg characteristic function, and
//! Dirichlet–Lee domains.
//!
//! `characteristic_function` is φ(M) = ∫_{C*} e^{−f(M)} df and
//! `char_gradient` returns G(M) = ∫_{C*} f e^{−f(M)} df, so that the
//! differential of φ is −G.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use serde::Serialize;

use crate::domain::{ConvexDomain, Membership};
use crate::dynamics::ProjTransform;
use crate::error::{Error, Result};
use crate::projective::{Conic, ProjLine, ProjPoint, M3, V3};

/// A proper convex cone.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexCone {
    /// Positive span of three independent generators.
    Simplicial { generators: [V3; 3] },
    /// Positive span of generators listed in cyclic order.
    Polyhedral { generators: Vec<V3> },
    /// Component of {v : vᵀqv < 0} containing `time`.
    Lorentz { q: M3, time: V3 },
}

impl ConvexCone {
    pub fn orthant() -> Self {
        ConvexCone::Simplicial {
            generators: [V3::x(), V3::y(), V3::z()],
        }
    }

    pub fn simplicial(generators: [V3; 3]) -> Result<Self> {
        if M3::from_columns(&generators).determinant().abs() <= 1e-14 {
            return Err(Error::NotProper);
        }
        Ok(ConvexCone::Simplicial { generators })
    }

    pub fn lorentz(q: M3, time: V3) -> Result<Self> {
        if !Conic::new(q).is_real_ellipse() {
            return Err(Error::NotProper);
        }
        let q = (q + q.transpose()) * 0.5;
        let q = if time.dot(&(q * time)) > 0.0 { -q } else { q };
        if time.dot(&(q * time)) >= 0.0 || nalgebra::SymmetricEigen::new(q).eigenvalues.iter().filter(|&&l| l < 0.0).count() != 1 {
            return Err(Error::NotProper);
        }
        Ok(ConvexCone::Lorentz { q, time })
    }

    /// Cone over a polygonal or conic domain.
    pub fn from_domain(domain: &ConvexDomain) -> Result<Self> {
        if let Some((conic, interior)) = domain.as_conic() {
            return ConvexCone::lorentz(*conic.matrix(), interior);
        }
        match domain.vertex_lifts() {
            Some(v) if v.len() == 3 => ConvexCone::simplicial([v[0], v[1], v[2]]),
            Some(v) => Ok(ConvexCone::Polyhedral { generators: v }),
            None => Err(Error::DegenerateInput("cone over a mixed curved domain".into())),
        }
    }

    /// The projectivized cone.
    pub fn domain(&self) -> Result<ConvexDomain> {
        match self {
            ConvexCone::Simplicial { generators } => ConvexDomain::polygon(generators),
            ConvexCone::Polyhedral { generators } => ConvexDomain::polygon(generators),
            ConvexCone::Lorentz { q, time } => ConvexDomain::conic(Conic::new(*q), ProjPoint::from_vector(*time)?),
        }
    }

    /// Covector generators of the dual cone (simplicial and polyhedral cases).
    fn dual_generators(&self) -> Result<Vec<V3>> {
        match self {
            ConvexCone::Simplicial { generators } => {
                let inv = M3::from_columns(generators).try_inverse().ok_or(Error::NotProper)?;
                Ok((0..3).map(|i| inv.row(i).transpose()).collect())
            }
            ConvexCone::Polyhedral { generators } => {
                let n = generators.len();
                let inner: V3 = generators.iter().map(|g| g.normalize()).sum();
                Ok((0..n)
                    .map(|i| {
                        let e = generators[i].cross(&generators[(i + 1) % n]);
                        if e.dot(&inner) < 0.0 {
                            -e
                        } else {
                            e
                        }
                    })
                    .collect())
            }
            ConvexCone::Lorentz { .. } => Err(Error::DegenerateInput("curved cone".into())),
        }
    }

    /// Whether `m` lies in the open cone.
    pub fn contains(&self, m: &V3) -> bool {
        match self {
            ConvexCone::Lorentz { q, time } => {
                m.dot(&(q * m)) < 0.0 && m.dot(&(q * time)) < 0.0
            }
            _ => self
                .dual_generators()
                .map(|gs| gs.iter().all(|g| g.dot(m) > 1e-15 * g.norm() * m.norm()))
                .unwrap_or(false),
        }
    }

    /// Orient `v` into the cone, if either `v` or `−v` is inside.
    fn orient(&self, v: V3) -> Option<V3> {
        if self.contains(&v) {
            Some(v)
        } else if self.contains(&-v) {
            Some(-v)
        } else {
            None
        }
    }
}

/// Dual cone C* = {f : f > 0 on closure(C) \ 0}.
pub fn dual_cone(c: &ConvexCone) -> Result<ConvexCone> {
    match c {
        ConvexCone::Simplicial { .. } => {
            let g = c.dual_generators()?;
            ConvexCone::simplicial([g[0], g[1], g[2]])
        }
        ConvexCone::Polyhedral { .. } => Ok(ConvexCone::Polyhedral {
            generators: c.dual_generators()?,
        }),
        ConvexCone::Lorentz { q, time } => {
            let inv = q.try_inverse().ok_or(Error::NotProper)?;
            ConvexCone::lorentz(inv, -(q * time))
        }
    }
}

/// Simplicial pieces of the dual cone, fanned from the first generator.
fn dual_pieces(c: &ConvexCone) -> Result<Vec<[V3; 3]>> {
    let g = c.dual_generators()?;
    Ok((1..g.len() - 1).map(|i| [g[0], g[i], g[i + 1]]).collect())
}

/// Polar-coordinate cubature over the ellipse slice {f ∈ C* : f(e) = 1}.
struct Slice {
    c0: V3,
    w: [V3; 2],
    center: [f64; 2],
    /// Maps the unit disk onto the slice.
    shape: Matrix2<f64>,
    jac: f64,
    inv_e_norm: f64,
}

impl Slice {
    fn new(q: &M3, time: &V3) -> Result<Self> {
        let qs = q.try_inverse().ok_or(Error::NotProper)?;
        let e = *time;
        let en = e.norm();
        let c0 = e / (en * en);
        let k = (0..3).min_by(|&a, &b| e[a].abs().total_cmp(&e[b].abs())).unwrap_or(0);
        let w1 = e.cross(&V3::ith(k, 1.0)).normalize();
        let w2 = (e / en).cross(&w1);
        let w = [w1, w2];
        let a2 = Matrix2::new(
            w1.dot(&(qs * w1)),
            w1.dot(&(qs * w2)),
            w2.dot(&(qs * w1)),
            w2.dot(&(qs * w2)),
        );
        let b = nalgebra::Vector2::new(w1.dot(&(qs * c0)), w2.dot(&(qs * c0)));
        let kappa = c0.dot(&(qs * c0));
        let chol = a2.cholesky().ok_or(Error::NotProper)?;
        let uc = -chol.solve(&b);
        let kp = kappa + b.dot(&uc);
        if kp >= 0.0 {
            return Err(Error::NotProper);
        }
        let r = (-kp).sqrt();
        let lt_inv = chol.l().transpose().try_inverse().ok_or(Error::NotProper)?;
        let shape = lt_inv * r;
        Ok(Slice {
            c0,
            w,
            center: [uc[0], uc[1]],
            shape,
            jac: shape.determinant().abs(),
            inv_e_norm: 1.0 / en,
        })
    }

    /// ∫ over the slice of `f(g)` with `n_r` Gauss–Legendre radii and `n_t` angles.
    fn integrate<F: Fn(&V3) -> nalgebra::Vector4<f64>>(&self, f: &F, n_r: usize, n_t: usize) -> nalgebra::Vector4<f64> {
        let (nodes, weights) = gauss_legendre(n_r);
        let mut acc = nalgebra::Vector4::zeros();
        for (x, wx) in nodes.iter().zip(&weights) {
            let rho = 0.5 * (x + 1.0);
            let wr = 0.5 * wx * rho;
            for k in 0..n_t {
                let t = 2.0 * PI * k as f64 / n_t as f64;
                let d = self.shape * nalgebra::Vector2::new(rho * t.cos(), rho * t.sin());
                let g = self.c0 + self.w[0] * (self.center[0] + d[0]) + self.w[1] * (self.center[1] + d[1]);
                acc += f(&g) * wr;
            }
        }
        acc * (2.0 * PI / n_t as f64) * self.jac
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pnm1 = p0;
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// φ and G of a Lorentz cone at `m` by quadrature, refined until both
/// change by less than 1e−10 relative.
fn lorentz_quadrature(q: &M3, time: &V3, m: &V3) -> Result<(f64, V3)> {
    let slice = Slice::new(q, time)?;
    let f = |g: &V3| {
        let s = g.dot(m);
        let a = s.powi(-3);
        let b = s.powi(-4);
        nalgebra::Vector4::new(a, g[0] * b, g[1] * b, g[2] * b)
    };
    let mut n_r = 16;
    let mut n_t = 32;
    let mut prev = slice.integrate(&f, n_r, n_t);
    loop {
        n_r *= 2;
        n_t *= 2;
        let cur = slice.integrate(&f, n_r, n_t);
        let done = (cur - prev).amax() <= 1e-10 * cur.amax();
        prev = cur;
        if done {
            break;
        }
        if n_r > 2048 {
            return Err(Error::non_convergent("characteristic function quadrature"));
        }
    }
    let e = slice.inv_e_norm;
    Ok((2.0 * e * prev[0], V3::new(prev[1], prev[2], prev[3]) * 6.0 * e))
}

/// φ and G of a Lorentz cone. The cone is homogeneous, so φ = κ·(−MᵀqM)^{−3/2};
/// κ comes from quadrature at the time vector, where the integrand is smooth.
fn lorentz_phi_grad(q: &M3, time: &V3, m: &V3) -> Result<(f64, V3)> {
    let (phi_t, _) = lorentz_quadrature(q, time, time)?;
    let kappa = phi_t * (-time.dot(&(q * time))).powf(1.5);
    let n = -m.dot(&(q * m));
    let phi = kappa * n.powf(-1.5);
    Ok((phi, q * m * (-3.0 * phi / n)))
}

fn simplicial_phi_grad(pieces: &[[V3; 3]], m: &V3) -> (f64, V3) {
    let mut phi = 0.0;
    let mut grad = V3::zeros();
    for g in pieces {
        let vals = [g[0].dot(m), g[1].dot(m), g[2].dot(m)];
        let p = M3::from_columns(g).determinant().abs() / (vals[0] * vals[1] * vals[2]);
        phi += p;
        grad += (g[0] / vals[0] + g[1] / vals[1] + g[2] / vals[2]) * p;
    }
    (phi, grad)
}

fn phi_grad(c: &ConvexCone, m: &V3) -> Result<(f64, V3)> {
    if !c.contains(m) {
        return Err(Error::NotInterior);
    }
    match c {
        ConvexCone::Lorentz { q, time } => lorentz_phi_grad(q, time, m),
        _ => Ok(simplicial_phi_grad(&dual_pieces(c)?, m)),
    }
}

/// Vinberg characteristic function φ_C(M).
pub fn characteristic_function(c: &ConvexCone, m: &V3) -> Result<f64> {
    Ok(phi_grad(c, m)?.0)
}

/// G(M) = ∫_{C*} f e^{−f(M)} df, equal to −dφ_M.
pub fn char_gradient(c: &ConvexCone, m: &V3) -> Result<V3> {
    Ok(phi_grad(c, m)?.1)
}

/// Point of Σ = {φ = 1} over the projective point `x`.
pub fn sigma_lift(c: &ConvexCone, x: &ProjPoint) -> Result<V3> {
    let v = c.orient(x.coords()).ok_or(Error::NotInterior)?;
    Ok(v * characteristic_function(c, &v)?.cbrt())
}

/// Tangent covector of Σ at X, normalized by ψ_X(X) = 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PsiForm {
    pub base: V3,
    pub psi: V3,
}

/// Tolerance on φ(X) = 1 accepted by [`psi_form`].
pub const SIGMA_TOL: f64 = 1e-7;

pub fn psi_form(c: &ConvexCone, x: &V3) -> Result<PsiForm> {
    let (phi, grad) = phi_grad(c, x)?;
    if (phi - 1.0).abs() > SIGMA_TOL {
        return Err(Error::NotOnSigma { phi });
    }
    Ok(PsiForm {
        base: *x,
        psi: grad / grad.dot(x),
    })
}

/// θ_Ω(x) = [G(x)], a point of the dual domain.
pub fn dual_map_theta(domain: &ConvexDomain, x: &ProjPoint) -> Result<ProjPoint> {
    if domain.contains(x) != Membership::Interior {
        return Err(Error::NotInterior);
    }
    let cone = ConvexCone::from_domain(domain)?;
    let v = cone.orient(x.coords()).ok_or(Error::NotInterior)?;
    ProjPoint::from_vector(char_gradient(&cone, &v)?)
}

/// Lift of `g` that maps the cone to itself rather than to its opposite.
fn oriented(c: &ConvexCone, g: &ProjTransform, x: &V3) -> M3 {
    let m = *g.matrix();
    if c.contains(&(m * x)) {
        m
    } else {
        -m
    }
}

/// Bisector of x₀ and g⁻¹x₀: the line ker(ψ ∘ g − ψ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bisector {
    pub line: ProjLine,
    /// Covector ψ ∘ g − ψ, nonnegative on the side of x₀.
    pub covector: V3,
}

pub fn bisector(c: &ConvexCone, x0: &V3, g: &ProjTransform) -> Result<Bisector> {
    let psi = psi_form(c, x0)?.psi;
    let m = oriented(c, g, x0);
    let gx = m * x0;
    if (gx - x0).norm() <= 1e-12 * x0.norm() {
        return Err(Error::FixedBasePoint);
    }
    let mu = m.transpose() * psi - psi;
    Ok(Bisector {
        line: ProjLine::from_vector(mu)?,
        covector: mu,
    })
}

/// Dirichlet–Lee domain of x₀ for a finite list of group elements.
#[derive(Clone, Debug)]
pub struct DirichletLee {
    pub domain: ConvexDomain,
    pub base: V3,
    pub elements: Vec<ProjTransform>,
    pub bisectors: Vec<Bisector>,
}

impl DirichletLee {
    /// ψ_{x₀}(γX) − ψ_{x₀}(X) ≥ 0 for every listed γ.
    pub fn contains(&self, x: &ProjPoint) -> bool {
        self.domain.contains(x) == Membership::Interior
    }
}

pub fn dirichlet_lee_domain(c: &ConvexCone, group: &[ProjTransform], x0: &ProjPoint) -> Result<DirichletLee> {
    let ambient = c.domain()?;
    if ambient.contains(x0) != Membership::Interior {
        return Err(Error::NotInterior);
    }
    let base = sigma_lift(c, x0)?;
    let mut bisectors = Vec::with_capacity(group.len());
    for (index, g) in group.iter().enumerate() {
        match bisector(c, &base, g) {
            Ok(b) => bisectors.push(b),
            Err(Error::FixedBasePoint) => return Err(Error::StabilizedBasePoint { index }),
            Err(e) => return Err(e),
        }
    }
    let domain = if bisectors.is_empty() {
        ambient
    } else {
        let lines: Vec<ProjLine> = bisectors.iter().map(|b| b.line).collect();
        ConvexDomain::halfplanes(&lines, *x0, Some(ambient))?
    };
    Ok(DirichletLee {
        domain,
        base,
        elements: group.to_vec(),
        bisectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk_cone() -> ConvexCone {
        ConvexCone::lorentz(M3::from_diagonal(&V3::new(1.0, 1.0, -1.0)), V3::z()).unwrap()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn orthant_closed_form_by_one_dimensional_quadrature() {
        // ∫₀^∞ e^{−f m} df = 1/m, evaluated by substitution f = −ln(u)/m
        let m = [0.7, 1.9, 3.1];
        let one_d = |mi: f64| {
            let (x, w) = gauss_legendre(40);
            x.iter()
                .zip(&w)
                .map(|(x, w)| {
                    let u = 0.5 * (x + 1.0);
                    0.5 * w * (1.0 / (u * mi)) * u
                })
                .sum::<f64>()
        };
        let expected: f64 = m.iter().map(|&mi| one_d(mi)).product();
        let phi = characteristic_function(&ConvexCone::orthant(), &V3::new(m[0], m[1], m[2])).unwrap();
        assert!((phi - expected).abs() < 1e-12 * phi);
    }

    #[test]
    fn orthant_values() {
        let c = ConvexCone::orthant();
        assert!((characteristic_function(&c, &V3::new(1.0, 2.0, 4.0)).unwrap() - 0.125).abs() < 1e-15);
        let g = char_gradient(&c, &V3::new(1.0, 1.0, 1.0)).unwrap();
        assert!((g - V3::new(1.0, 1.0, 1.0)).norm() < 1e-15);
        let x = sigma_lift(&c, &ProjPoint::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        assert!((x - V3::new(1.0, 1.0, 1.0)).norm() < 1e-14);
        let psi = psi_form(&c, &x).unwrap();
        assert!((psi.psi - V3::repeat(1.0 / 3.0)).norm() < 1e-15);
        assert_eq!(characteristic_function(&c, &V3::new(1.0, -1.0, 1.0)), Err(Error::NotInterior));
    }

    #[test]
    fn lorentz_closed_form_matches_quadrature() {
        let c = disk_cone();
        let (q, t) = match &c {
            ConvexCone::Lorentz { q, time } => (*q, *time),
            _ => unreachable!(),
        };
        for m in [V3::new(0.3, -0.5, 1.2), V3::new(-0.2, 0.1, 0.7)] {
            let (pq, gq) = lorentz_quadrature(&q, &t, &m).unwrap();
            let (pc, gc) = lorentz_phi_grad(&q, &t, &m).unwrap();
            assert!((pq - pc).abs() < 1e-9 * pc);
            assert!((gq - gc).norm() < 1e-9 * gc.norm());
        }
    }

    #[test]
    fn lorentz_matches_power_law() {
        // φ is proportional to (−MᵀqM)^{−3/2}; check the ratio at two points
        let c = disk_cone();
        let q = M3::from_diagonal(&V3::new(1.0, 1.0, -1.0));
        let m1 = V3::new(0.0, 0.0, 1.0);
        let m2 = V3::new(0.3, -0.5, 1.2);
        let f = |m: &V3| characteristic_function(&c, m).unwrap() * (-m.dot(&(q * m))).powf(1.5);
        assert!((f(&m1) / f(&m2) - 1.0).abs() < 1e-9);
        let s = sigma_lift(&c, &ProjPoint::affine(0.4, 0.1)).unwrap();
        assert!((characteristic_function(&c, &s).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn duals_round_trip() {
        let c = ConvexCone::simplicial([V3::new(1.0, 0.2, 0.1), V3::new(0.0, 1.0, 0.3), V3::new(0.2, 0.1, 1.0)]).unwrap();
        let cc = dual_cone(&dual_cone(&c).unwrap()).unwrap();
        if let (ConvexCone::Simplicial { generators: a }, ConvexCone::Simplicial { generators: b }) = (&c, &cc) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).norm() < 1e-12);
            }
        } else {
            panic!()
        }
        assert_eq!(dual_cone(&ConvexCone::orthant()).unwrap(), ConvexCone::orthant());
    }

    #[test]
    fn theta_at_centers() {
        let t = ConvexDomain::triangle();
        let th = dual_map_theta(&t, &ProjPoint::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        assert!(th.approx_eq(&ProjPoint::new(1.0, 1.0, 1.0).unwrap(), 1e-14));
        let d = ConvexDomain::unit_disk();
        let th = dual_map_theta(&d, &ProjPoint::affine(0.0, 0.0)).unwrap();
        assert!(th.approx_eq(&ProjPoint::affine(0.0, 0.0), 1e-12));
    }

    #[test]
    fn bisector_of_a_boost() {
        let c = disk_cone();
        let s: f64 = 0.6;
        let g = ProjTransform::new(M3::new(s.cosh(), 0.0, s.sinh(), 0.0, 1.0, 0.0, s.sinh(), 0.0, s.cosh())).unwrap();
        let x0 = sigma_lift(&c, &ProjPoint::affine(0.0, 0.0)).unwrap();
        let b = bisector(&c, &x0, &g).unwrap();
        // the line is x = −tanh(s/2), orthogonal to the axis
        let l = b.line.coords();
        assert!(l[1].abs() < 1e-9);
        assert!((-l[2] / l[0] + (s / 2.0).tanh()).abs() < 1e-9);
        assert_eq!(bisector(&c, &x0, &ProjTransform::identity()), Err(Error::FixedBasePoint));
    }
}
