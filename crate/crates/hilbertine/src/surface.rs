//! Group-level computations for finitely generated subgroups of SL₃(R).

use std::cmp::Ordering;
use std::collections::BTreeMap;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::domain::ConvexDomain;
use crate::dynamics::{classify, preserves_domain, DynClass, Family, ProjTransform};
use crate::error::{Error, Result};
use crate::projective::{ProjPoint, M3};

/// Relative distance under which two normalized matrices are identified.
pub const DEDUP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupPresentation {
    pub generators: Vec<ProjTransform>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl GroupPresentation {
    pub fn new(generators: Vec<ProjTransform>) -> Self {
        GroupPresentation { generators, labels: None }
    }

    /// Label of letter `l`: generator `l / 2`, inverted when `l` is odd.
    pub fn letter_label(&self, l: usize) -> String {
        let base = self
            .labels
            .as_ref()
            .and_then(|v| v.get(l / 2).cloned())
            .unwrap_or_else(|| format!("g{}", l / 2));
        if l % 2 == 1 {
            format!("{base}^-1")
        } else {
            base
        }
    }

    /// Whether every generator preserves `domain`.
    pub fn preserves(&self, domain: &ConvexDomain, n_samples: usize, tol: f64) -> bool {
        self.generators.iter().all(|g| preserves_domain(g, domain, n_samples, tol))
    }
}

/// A group element with a shortest word found for it.
#[derive(Clone, Debug, PartialEq)]
pub struct Word {
    /// Letters; `2i` is generator i and `2i + 1` its inverse.
    pub letters: Vec<usize>,
    pub element: ProjTransform,
}

#[derive(Clone, Copy, Debug)]
struct Key(f64);

impl PartialEq for Key {
    fn eq(&self, o: &Self) -> bool {
        self.0.total_cmp(&o.0) == Ordering::Equal
    }
}
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Key {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0)
    }
}

/// Set of matrices with approximate membership, swept along a fixed projection.
struct MatrixSet {
    weights: M3,
    index: BTreeMap<Key, Vec<M3>>,
}

impl MatrixSet {
    fn new() -> Self {
        MatrixSet {
            weights: M3::new(0.31, -0.57, 0.12, 0.83, 0.29, -0.44, -0.18, 0.66, 0.47),
            index: BTreeMap::new(),
        }
    }

    fn key(&self, m: &M3) -> f64 {
        m.component_mul(&self.weights).sum()
    }

    /// Insert `m` unless an equal matrix is present; returns true if inserted.
    fn insert(&mut self, m: M3) -> bool {
        let k = self.key(&m);
        let tol = DEDUP_TOL * m.norm();
        let reach = tol * self.weights.norm();
        let hit = self
            .index
            .range(Key(k - reach)..=Key(k + reach))
            .any(|(_, ms)| ms.iter().any(|o| (o - m).norm() <= DEDUP_TOL * o.norm().max(m.norm())));
        if hit {
            return false;
        }
        self.index.entry(Key(k)).or_default().push(m);
        true
    }
}

/// Distinct non-identity elements given by reduced words of length ≤ `max_len`,
/// in shortlex order of their first word.
pub fn enumerate_words(g: &GroupPresentation, max_len: usize) -> Vec<Word> {
    let mut letters = Vec::with_capacity(2 * g.generators.len());
    for x in &g.generators {
        letters.push(*x);
        letters.push(x.inverse());
    }
    let mut seen = MatrixSet::new();
    seen.insert(M3::identity());
    let mut out: Vec<Word> = Vec::new();
    let mut frontier: Vec<Word> = vec![Word {
        letters: vec![],
        element: ProjTransform::identity(),
    }];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for (l, x) in letters.iter().enumerate() {
                if let Some(&last) = w.letters.last() {
                    if last ^ 1 == l {
                        continue;
                    }
                }
                let e = w.element.compose(x);
                if seen.insert(*e.matrix()) {
                    let mut ls = w.letters.clone();
                    ls.push(l);
                    next.push(Word { letters: ls, element: e });
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Verdict of [`finite_volume_criterion`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum VolumeVerdict {
    FiniteVolume,
    InfiniteVolume { index: usize, family: Family },
    Inconclusive { index: usize },
}

fn family_at(g: &ProjTransform, tol: f64) -> Result<Family> {
    Ok(classify(g, tol)?.family())
}

/// Finite volume iff every elementary holonomy is parabolic.
///
/// A classification is borderline when it changes between `tol/10` and `10·tol`.
pub fn finite_volume_criterion(domain: &ConvexDomain, holonomies: &[ProjTransform], tol: f64) -> Result<VolumeVerdict> {
    let mut borderline = None;
    let mut families = Vec::with_capacity(holonomies.len());
    for g in holonomies {
        if !preserves_domain(g, domain, 512, 1e-7) {
            return Err(Error::DomainNotPreserved);
        }
        let f = family_at(g, tol)?;
        let stable = family_at(g, tol / 10.0).ok() == Some(f) && family_at(g, tol * 10.0).ok() == Some(f);
        families.push((f, stable));
    }
    for (i, &(f, stable)) in families.iter().enumerate() {
        if f != Family::Parabolic && stable {
            return Ok(VolumeVerdict::InfiniteVolume { index: i, family: f });
        }
        if !stable && borderline.is_none() {
            borderline = Some(i);
        }
    }
    Ok(match borderline {
        Some(index) => VolumeVerdict::Inconclusive { index },
        None => VolumeVerdict::FiniteVolume,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitPoint {
    pub point: ProjPoint,
    /// Length of the shortest word found with this attracting point.
    pub word_length: usize,
}

/// Attracting fixed points of hyperbolic words.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitSetCloud {
    pub points: Vec<LimitPoint>,
}

impl LimitSetCloud {
    /// Largest chart distance between angularly consecutive points, seen
    /// from the center of the canonical chart of `domain`.
    pub fn resolution(&self, domain: &ConvexDomain) -> f64 {
        let chart = domain.canonical_chart();
        let mut pts: Vec<[f64; 2]> = self.points.iter().filter_map(|p| chart.coords(&p.point)).collect();
        if pts.len() < 2 {
            return f64::INFINITY;
        }
        pts.sort_by(|a, b| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])));
        let n = pts.len();
        (0..n)
            .map(|i| {
                let (a, b) = (pts[i], pts[(i + 1) % n]);
                (a[0] - b[0]).hypot(a[1] - b[1])
            })
            .fold(0.0, f64::max)
    }
}

pub fn limit_set_approx(g: &GroupPresentation, max_len: usize, tol: f64) -> LimitSetCloud {
    let mut points: Vec<LimitPoint> = Vec::new();
    for w in enumerate_words(g, max_len) {
        if let Ok(DynClass::Hyperbolic { p_plus, .. }) = classify(&w.element, tol) {
            if !points.iter().any(|q| q.point.approx_eq(&p_plus, DEDUP_TOL)) {
                points.push(LimitPoint {
                    point: p_plus,
                    word_length: w.letters.len(),
                });
            }
        }
    }
    LimitSetCloud { points }
}

/// Orthogonal projectors onto the real eigenspaces of `m`.
fn eigenspaces(m: &M3, tol: f64) -> Vec<M3> {
    let ev = m.complex_eigenvalues();
    let rho = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut reals: Vec<f64> = ev.iter().filter(|z| z.im.abs() <= tol.sqrt() * rho).map(|z| z.re).collect();
    reals.sort_by(f64::total_cmp);
    reals.dedup_by(|a, b| (*a - *b).abs() <= tol.sqrt() * rho);
    let scale = m.norm();
    reals
        .into_iter()
        .filter_map(|l| {
            let a = m - M3::identity() * l;
            let svd = a.svd(false, true);
            let vt = svd.v_t.expect("requested");
            let mut p = M3::zeros();
            for i in 0..3 {
                if svd.singular_values[i] <= tol.sqrt() * scale {
                    let v = vt.row(i).transpose();
                    p += v * v.transpose();
                }
            }
            (p.norm() > 0.0).then_some(p)
        })
        .collect()
}

/// Projector onto the intersection of the ranges of two projectors.
fn intersect(p: &M3, q: &M3) -> Option<M3> {
    let e = SymmetricEigen::new(p * q * p);
    let mut r = M3::zeros();
    for i in 0..3 {
        if e.eigenvalues[i] >= 1.0 - 1e-6 {
            let v = e.eigenvectors.column(i).into_owned();
            r += v * v.transpose();
        }
    }
    (r.norm() > 0.0).then_some(r)
}

fn common_eigenvector(ms: &[M3], tol: f64) -> bool {
    fn dfs(space: &M3, rest: &[Vec<M3>]) -> bool {
        match rest.split_first() {
            None => true,
            Some((first, tail)) => first
                .iter()
                .any(|e| intersect(space, e).is_some_and(|s| dfs(&s, tail))),
        }
    }
    let spaces: Vec<Vec<M3>> = ms.iter().map(|m| eigenspaces(m, tol)).collect();
    dfs(&M3::identity(), &spaces)
}

/// False iff the generators share a fixed point or an invariant line.
pub fn irreducibility_check(g: &GroupPresentation, tol: f64) -> bool {
    let ms: Vec<M3> = g.generators.iter().map(|x| *x.matrix()).collect();
    let ts: Vec<M3> = ms.iter().map(|m| m.transpose()).collect();
    !(common_eigenvector(&ms, tol) || common_eigenvector(&ts, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::V3;

    fn t(m: M3) -> ProjTransform {
        ProjTransform::new(m).unwrap()
    }

    fn boost(s: f64) -> M3 {
        M3::new(s.cosh(), 0.0, s.sinh(), 0.0, 1.0, 0.0, s.sinh(), 0.0, s.cosh())
    }

    fn rot(a: f64) -> M3 {
        M3::new(a.cos(), -a.sin(), 0.0, a.sin(), a.cos(), 0.0, 0.0, 0.0, 1.0)
    }

    #[test]
    fn cyclic_words() {
        let g = GroupPresentation::new(vec![t(boost(0.5))]);
        let w = enumerate_words(&g, 3);
        assert_eq!(w.len(), 6);
        let lens: Vec<usize> = w.iter().map(|w| w.letters.len()).collect();
        assert_eq!(lens, vec![1, 1, 2, 2, 3, 3]);
        assert!(enumerate_words(&g, 0).is_empty());
    }

    #[test]
    fn free_group_counts() {
        let g = GroupPresentation::new(vec![t(boost(1.7)), t(rot(0.9) * boost(1.7) * rot(-0.9))]);
        let w = enumerate_words(&g, 4);
        assert_eq!(w.len(), 4 + 12 + 36 + 108);
    }

    #[test]
    fn finite_order_collisions() {
        let g = GroupPresentation::new(vec![t(rot(2.0 * std::f64::consts::PI / 3.0))]);
        assert_eq!(enumerate_words(&g, 5).len(), 2);
    }

    #[test]
    fn volume_criterion_basics() {
        let disk = ConvexDomain::unit_disk();
        assert_eq!(finite_volume_criterion(&disk, &[], 1e-8).unwrap(), VolumeVerdict::FiniteVolume);
        let a = M3::new(0.0, -1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0);
        let p = t(M3::identity() + a + a * a * 0.5);
        assert_eq!(finite_volume_criterion(&disk, &[p], 1e-8).unwrap(), VolumeVerdict::FiniteVolume);
        assert_eq!(
            finite_volume_criterion(&disk, &[p, t(boost(0.3))], 1e-8).unwrap(),
            VolumeVerdict::InfiniteVolume {
                index: 1,
                family: Family::Hyperbolic
            }
        );
        let d = t(M3::from_diagonal(&V3::new(2.0, 1.0, 0.5)));
        assert_eq!(finite_volume_criterion(&disk, &[d], 1e-8), Err(Error::DomainNotPreserved));
    }

    #[test]
    fn cyclic_limit_set_has_two_points() {
        let g = GroupPresentation::new(vec![t(boost(0.5))]);
        let cloud = limit_set_approx(&g, 6, 1e-8);
        assert_eq!(cloud.points.len(), 2);
    }

    #[test]
    fn irreducibility() {
        let d1 = t(M3::from_diagonal(&V3::new(2.0, 1.0, 0.5)));
        let d2 = t(M3::from_diagonal(&V3::new(3.0, 0.5, 2.0 / 3.0)));
        assert!(!irreducibility_check(&GroupPresentation::new(vec![d1, d2]), 1e-8));
        assert!(!irreducibility_check(&GroupPresentation::new(vec![d1]), 1e-8));
        let b1 = t(boost(0.8));
        let b2 = t(rot(1.1) * boost(0.8) * rot(-1.1));
        assert!(irreducibility_check(&GroupPresentation::new(vec![b1, b2]), 1e-8));
        // unipotent pair sharing the fixed point [0:0:1]
        let u = t(M3::new(1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0));
        let v = t(M3::new(1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0));
        assert!(!irreducibility_check(&GroupPresentation::new(vec![u, v]), 1e-8));
    }
}
