//! Randomized invariants of the geometric primitives.

use hilbertine::busemann::region_volume;
use hilbertine::dynamics::{classify, ProjTransform};
use hilbertine::projective::{cross_ratio, AffineChart, ProjPoint, M3, V3};
use hilbertine::surface::{enumerate_words, GroupPresentation};
use hilbertine::vinberg::{char_gradient, characteristic_function, ConvexCone};
use hilbertine::{ConvexDomain, Membership, Region};
use proptest::prelude::*;

fn unimodular() -> impl Strategy<Value = M3> {
    prop::array::uniform9(-0.5f64..0.5).prop_filter_map("singular", |a| {
        let m = M3::identity() + M3::from_row_slice(&a);
        let d = m.determinant();
        (d.abs() > 0.2).then(|| m / d.cbrt())
    })
}

/// Affine point of the open unit disk, kept away from the boundary.
fn disk_point() -> impl Strategy<Value = [f64; 2]> {
    (0.0f64..0.95, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| [r * t.cos(), r * t.sin()])
}

fn positive_vector() -> impl Strategy<Value = V3> {
    prop::array::uniform3(0.05f64..4.0).prop_map(|a| V3::new(a[0], a[1], a[2]))
}

fn pt(a: [f64; 2]) -> ProjPoint {
    ProjPoint::affine(a[0], a[1])
}

fn simplex_distance(x: &V3, y: &V3) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            best = best.max(((x[i] * y[j]) / (x[j] * y[i])).ln());
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cross_ratio_is_projectively_invariant(
        t in prop::array::uniform4(-3.0f64..3.0),
        g in unimodular(),
    ) {
        let mut ts = t;
        ts.sort_by(f64::total_cmp);
        prop_assume!(ts.windows(2).all(|w| w[1] - w[0] > 0.05));
        let a = V3::new(0.2, -0.1, 1.0);
        let b = V3::new(0.7, 0.4, 0.0);
        let pts: Vec<ProjPoint> = ts.iter().map(|&s| ProjPoint::from_vector(a + b * s).unwrap()).collect();
        let before = cross_ratio(&pts[0], &pts[1], &pts[2], &pts[3]).unwrap();
        let moved: Vec<ProjPoint> = pts.iter().map(|p| p.transform(&g).unwrap()).collect();
        let after = cross_ratio(&moved[0], &moved[1], &moved[2], &moved[3]).unwrap();
        prop_assert!((before - after).abs() <= 1e-9 * before.abs().max(1.0));
    }

    #[test]
    fn distance_is_a_metric(x in disk_point(), y in disk_point(), z in disk_point()) {
        let d = ConvexDomain::unit_disk();
        let dist = |a, b| d.hilbert_distance(&pt(a), &pt(b)).unwrap().value();
        prop_assert!(dist(x, x).abs() < 1e-12);
        prop_assert!((dist(x, y) - dist(y, x)).abs() < 1e-9);
        prop_assert!(dist(x, z) <= dist(x, y) + dist(y, z) + 1e-9);
    }

    #[test]
    fn distance_is_natural(x in disk_point(), y in disk_point(), g in unimodular()) {
        let d = ConvexDomain::unit_disk();
        let gd = d.transform(&g).unwrap();
        let before = d.hilbert_distance(&pt(x), &pt(y)).unwrap().value();
        let after = gd
            .hilbert_distance(&pt(x).transform(&g).unwrap(), &pt(y).transform(&g).unwrap())
            .unwrap()
            .value();
        prop_assert!((before - after).abs() <= 1e-8 * before.max(1.0));
    }

    #[test]
    fn triangle_distance_matches_log_ratio(x in positive_vector(), y in positive_vector()) {
        let t = ConvexDomain::triangle();
        let px = ProjPoint::from_vector(x).unwrap();
        let py = ProjPoint::from_vector(y).unwrap();
        let d = t.hilbert_distance(&px, &py).unwrap().value();
        let oracle = simplex_distance(&x, &y);
        prop_assert!((d - oracle).abs() <= 1e-9 * oracle.max(1.0));
    }

    #[test]
    fn finsler_norm_is_the_infinitesimal_distance(x in disk_point(), th in 0.0f64..std::f64::consts::TAU) {
        let d = ConvexDomain::unit_disk();
        let v = [th.cos(), th.sin()];
        let h = 1e-6;
        let y = [x[0] + h * v[0], x[1] + h * v[1]];
        let fd = d.hilbert_distance(&pt(x), &pt(y)).unwrap().value() / h;
        let n = d.finsler_norm(&AffineChart::standard(), x, v).unwrap();
        prop_assert!((fd - n).abs() <= 1e-4 * n);
    }

    #[test]
    fn classification_is_conjugation_invariant(g in unimodular(), h in unimodular()) {
        let a = ProjTransform::new(g).unwrap();
        let b = ProjTransform::new(h * g * h.try_inverse().unwrap()).unwrap();
        if let (Ok(ca), Ok(cb)) = (classify(&a, 1e-8), classify(&b, 1e-8)) {
            prop_assert_eq!(ca.family(), cb.family());
        }
    }

    #[test]
    fn phi_is_homogeneous_and_g_is_its_gradient(m in positive_vector(), lam in 0.2f64..5.0) {
        let c = ConvexCone::simplicial([V3::new(1.0, 0.2, 0.1), V3::new(0.0, 1.0, 0.3), V3::new(0.2, 0.1, 1.0)]).unwrap();
        prop_assume!(c.contains(&m));
        let phi = characteristic_function(&c, &m).unwrap();
        let scaled = characteristic_function(&c, &(m * lam)).unwrap();
        prop_assert!((scaled * lam.powi(3) - phi).abs() <= 1e-9 * phi);
        let g = char_gradient(&c, &m).unwrap();
        // Euler: ⟨G(M), M⟩ = 3 φ(M)
        prop_assert!((g.dot(&m) - 3.0 * phi).abs() <= 1e-9 * phi);
    }

    #[test]
    fn volume_is_additive(a in disk_point(), b in disk_point(), c in disk_point(), s in 0.1f64..0.9) {
        let d = ConvexDomain::unit_disk();
        let area = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        prop_assume!(area.abs() > 1e-3);
        let m = [b[0] + s * (c[0] - b[0]), b[1] + s * (c[1] - b[1])];
        let tol = 1e-7;
        let whole = region_volume(&d, &Region::Triangle([pt(a), pt(b), pt(c)]), tol).unwrap();
        let left = region_volume(&d, &Region::Triangle([pt(a), pt(b), pt(m)]), tol).unwrap();
        let right = region_volume(&d, &Region::Triangle([pt(a), pt(m), pt(c)]), tol).unwrap();
        prop_assert!((whole - left - right).abs() <= 2.0 * tol * whole);
    }

    #[test]
    fn volume_is_projectively_invariant(a in disk_point(), b in disk_point(), c in disk_point(), g in unimodular()) {
        let d = ConvexDomain::unit_disk();
        let area = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        prop_assume!(area.abs() > 1e-3);
        let tol = 1e-7;
        let tri = [pt(a), pt(b), pt(c)];
        let moved = tri.map(|p| p.transform(&g).unwrap());
        let before = region_volume(&d, &Region::Triangle(tri), tol).unwrap();
        let after = region_volume(&d.transform(&g).unwrap(), &Region::Triangle(moved), tol).unwrap();
        prop_assert!((before - after).abs() <= 2.0 * tol * before);
    }
}

#[test]
fn words_are_closed_under_inversion() {
    let boost = |s: f64| M3::new(s.cosh(), 0.0, s.sinh(), 0.0, 1.0, 0.0, s.sinh(), 0.0, s.cosh());
    let rot = |t: f64| M3::new(t.cos(), -t.sin(), 0.0, t.sin(), t.cos(), 0.0, 0.0, 0.0, 1.0);
    let a = ProjTransform::new(boost(1.2)).unwrap();
    let b = ProjTransform::new(rot(0.7) * boost(1.5) * rot(-0.7)).unwrap();
    let g = GroupPresentation::new(vec![a, b]);
    let words = enumerate_words(&g, 4);
    for w in &words {
        let inv = w.element.inverse();
        let found = words
            .iter()
            .any(|u| (u.element.matrix() - inv.matrix()).norm() <= 1e-8 * inv.matrix().norm());
        assert!(found, "inverse of {:?} missing", w.letters);
    }
}

#[test]
fn membership_of_chart_points() {
    let d = ConvexDomain::unit_disk();
    assert_eq!(d.contains(&ProjPoint::affine(0.3, 0.3)), Membership::Interior);
    assert_eq!(d.contains(&ProjPoint::affine(1.0, 0.0)), Membership::Boundary);
    assert_eq!(d.contains(&ProjPoint::affine(1.2, 0.0)), Membership::Exterior);
}
