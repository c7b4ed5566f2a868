//! Subcommand bodies. Each returns the files it wants written.

use hilbertine::busemann::{ideal_triangle_area, pic_volume_profile, region_volume, IdealTriangleOptions, ProfileOptions};
use hilbertine::surface::{enumerate_words, limit_set_approx};
use hilbertine::vinberg::{dirichlet_lee_domain, ConvexCone, DirichletLee};
use hilbertine::{
    classify, AffineChart, ConvexDomain, Distance, DomainSpec, DynClass, Membership, ProjPoint, ProjTransform, Region,
    Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::config::{
    ClassifyConfig, CuspProfile, DirichletTiling, DistanceConfig, DualConfig, IdealTriangleScan, LimitSetConfig,
    RegionSpec, RunConfig, TileConfig, VolumeConfig,
};
use crate::error::{CliError, CliResult};
use crate::svg::{boundary, drawing_chart, Class, Figure};

pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-8;
pub const DEFAULT_REL_TOL: f64 = 1e-6;
const OUTLINE_SAMPLES: usize = 720;

/// Options shared by every subcommand.
#[derive(Clone, Copy, Debug)]
pub struct Common {
    pub seed: u64,
    pub tol: Option<f64>,
}

/// Named output files.
pub type Outputs = Vec<(String, String)>;

fn json<T: Serialize>(v: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Numerical(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn domain_of(spec: &DomainSpec) -> CliResult<ConvexDomain> {
    Ok(ConvexDomain::try_from(spec.clone())?)
}

fn point(a: [f64; 3]) -> CliResult<ProjPoint> {
    Ok(ProjPoint::try_from(a)?)
}

pub fn distance(cfg: &DistanceConfig, _: Common) -> CliResult<Outputs> {
    #[derive(Serialize)]
    struct Report {
        points: [[f64; 3]; 2],
        finite: bool,
        distance: Option<f64>,
    }
    let d = domain_of(&cfg.domain)?;
    let dist = d.hilbert_distance(&point(cfg.points[0])?, &point(cfg.points[1])?)?;
    let report = Report {
        points: cfg.points,
        finite: dist.is_finite(),
        distance: match dist {
            Distance::Finite(v) => Some(v),
            Distance::Infinite => None,
        },
    };
    Ok(vec![("distance.json".into(), json(&report)?)])
}

/// `{family, data}` with the family tag lifted out of the data.
fn class_report(c: &DynClass) -> CliResult<Value> {
    let mut data = serde_json::to_value(c).map_err(|e| CliError::Numerical(e.to_string()))?;
    let family = data
        .as_object_mut()
        .and_then(|m| m.remove("family"))
        .unwrap_or(Value::Null);
    Ok(serde_json::json!({ "family": family, "data": data }))
}

pub fn classify_cmd(cfg: &ClassifyConfig, common: Common) -> CliResult<Outputs> {
    let tol = common.tol.or(cfg.tol).unwrap_or(DEFAULT_CLASSIFY_TOL);
    let c = classify(&cfg.matrix, tol)?;
    Ok(vec![("classify.json".into(), json(&class_report(&c)?)?)])
}

#[derive(Serialize)]
struct VolumeReport {
    region: RegionSpec,
    levels: Vec<f64>,
    partials: Vec<f64>,
    verdict: Verdict,
}

pub fn volume(cfg: &VolumeConfig, common: Common) -> CliResult<Outputs> {
    let d = domain_of(&cfg.domain)?;
    let rel_tol = common.tol.or(cfg.rel_tol).unwrap_or(DEFAULT_REL_TOL);
    let report = match &cfg.region {
        RegionSpec::Triangle { vertices } => {
            let t = [point(vertices[0])?, point(vertices[1])?, point(vertices[2])?];
            fixed_region(&cfg.region, region_volume(&d, &Region::Triangle(t), rel_tol)?)
        }
        RegionSpec::Polygon { vertices } => {
            let p = vertices.iter().map(|&v| point(v)).collect::<CliResult<Vec<_>>>()?;
            fixed_region(&cfg.region, region_volume(&d, &Region::Polygon(p), rel_tol)?)
        }
        RegionSpec::Pic { vertices } => {
            let pic = [point(vertices[0])?, point(vertices[1])?, point(vertices[2])?];
            let mut opts = ProfileOptions {
                rel_tol,
                ..Default::default()
            };
            if let Some(l) = &cfg.levels {
                opts.levels = l.clone();
            }
            let p = pic_volume_profile(&d, &pic, &opts)?;
            VolumeReport {
                region: cfg.region.clone(),
                levels: p.levels,
                partials: p.partials,
                verdict: p.verdict,
            }
        }
    };
    Ok(vec![("volume.json".into(), json(&report)?)])
}

fn fixed_region(region: &RegionSpec, v: f64) -> VolumeReport {
    VolumeReport {
        region: region.clone(),
        levels: vec![],
        partials: vec![v],
        verdict: Verdict::Converged,
    }
}

pub fn dual(cfg: &DualConfig, _: Common) -> CliResult<Outputs> {
    let d = domain_of(&cfg.domain)?;
    let dd = d.dual_domain()?;
    let chart = drawing_chart(&dd);
    let outline = boundary(&dd, &chart, OUTLINE_SAMPLES);
    let mut fig = Figure::fitted(chart, &outline);
    fig.path(Class::Dual, &outline);
    Ok(vec![
        ("dual.json".into(), json(&DomainSpec::from(dd))?),
        ("dual.svg".into(), fig.finish()),
    ])
}

pub fn limit_set(cfg: &LimitSetConfig, common: Common) -> CliResult<Outputs> {
    #[derive(Serialize)]
    struct Report {
        word_length: usize,
        resolution: f64,
        points: Vec<hilbertine::surface::LimitPoint>,
    }
    let d = domain_of(&cfg.domain)?;
    let tol = common.tol.or(cfg.tol).unwrap_or(DEFAULT_CLASSIFY_TOL);
    if !cfg.group.preserves(&d, 256, 1e-7) {
        return Err(hilbertine::Error::DomainNotPreserved.into());
    }
    let cloud = limit_set_approx(&cfg.group, cfg.word_length, tol);
    let chart = drawing_chart(&d);
    let outline = boundary(&d, &chart, OUTLINE_SAMPLES);
    let mut fig = Figure::fitted(chart, &outline);
    fig.path(Class::Domain, &outline);
    for p in &cloud.points {
        if let Some(c) = fig.coords(&p.point) {
            fig.circle(Class::LimitPoint, c, 3.0);
        }
    }
    let report = Report {
        word_length: cfg.word_length,
        resolution: cloud.resolution(&d),
        points: cloud.points,
    };
    Ok(vec![
        ("limit_set.json".into(), json(&report)?),
        ("limit_set.svg".into(), fig.finish()),
    ])
}

#[derive(Serialize)]
struct TilingReport {
    seed: u64,
    base: [f64; 3],
    elements: usize,
    /// Covectors ψ∘γ − ψ, one per element.
    bisectors: Vec<[f64; 3]>,
    fundamental_domain: DomainSpec,
    samples: usize,
    /// Samples lying in at least one listed translate of the domain.
    covered: usize,
    /// Samples lying in two or more translates.
    overlapping: usize,
}

/// Point of Ω drawn uniformly from the bounding box of its outline.
fn sampler(domain: &ConvexDomain, chart: &AffineChart, outline: &[[f64; 2]], seed: u64) -> impl FnMut() -> ProjPoint {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in outline {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domain = domain.clone();
    let chart = chart.clone();
    move || loop {
        let p = chart.point(rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1]));
        if domain.contains(&p) == Membership::Interior {
            return p;
        }
    }
}

/// Chord of Ω along the zero set of `mu`, through the segment from `a` to `b`.
fn bisector_chord(omega: &ConvexDomain, mu: &hilbertine::V3, a: &ProjPoint, b: &ProjPoint) -> Option<[ProjPoint; 2]> {
    let (la, lb) = (omega.lift(a)?, omega.lift(b)?);
    let (fa, fb) = (mu.dot(&la), mu.dot(&lb));
    if fa * fb > 0.0 {
        return None;
    }
    let s = fa / (fa - fb);
    let m = la + (lb - la) * s;
    // direction of the line inside the plane of lifts
    let dir = mu.cross(&(lb - la));
    let step = 1e-3 * m.norm() / dir.norm();
    let mp = ProjPoint::from_vector(m).ok()?;
    let q = ProjPoint::from_vector(m + dir * step).ok()?;
    if omega.contains(&q) != Membership::Interior {
        return None;
    }
    let c = omega.boundary_chords(&mp, &q).ok()?;
    Some([c.p_minus, c.p_plus])
}

fn tiling(
    omega: &ConvexDomain,
    elements: &[ProjTransform],
    base: [f64; 3],
    samples: usize,
    seed: u64,
) -> CliResult<(TilingReport, String)> {
    let cone = ConvexCone::from_domain(omega)?;
    let x0 = point(base)?;
    let dl: DirichletLee = dirichlet_lee_domain(&cone, elements, &x0)?;
    let chart = drawing_chart(omega);
    let outline = boundary(omega, &chart, OUTLINE_SAMPLES);

    let mut next = sampler(omega, &chart, &outline, seed);
    let inverses: Vec<ProjTransform> = elements.iter().map(|g| g.inverse()).collect();
    let (mut covered, mut overlapping) = (0, 0);
    for _ in 0..samples {
        let x = next();
        let mut hits = usize::from(dl.contains(&x));
        for g in &inverses {
            if g.apply(&x).is_ok_and(|y| dl.contains(&y)) {
                hits += 1;
            }
        }
        covered += usize::from(hits > 0);
        overlapping += usize::from(hits > 1);
    }

    let mut fig = Figure::fitted(chart.clone(), &outline);
    fig.path(Class::Domain, &outline);
    let cell = dl.domain.boundary_samples(OUTLINE_SAMPLES);
    let cell_chart = dl.domain.canonical_chart().clone();
    let cell_pts: Vec<ProjPoint> = cell.iter().map(|u| cell_chart.point(u[0], u[1])).collect();
    for g in elements {
        let image: Vec<[f64; 2]> = cell_pts
            .iter()
            .filter_map(|p| g.apply(p).ok().and_then(|q| fig.coords(&q)))
            .collect();
        fig.path(Class::Translate, &image);
    }
    for (g, b) in elements.iter().zip(&dl.bisectors) {
        // ψ∘γ − ψ vanishes halfway between x₀ and γ⁻¹x₀
        let gx = g.inverse().apply(&x0)?;
        if let Some(ends) = bisector_chord(omega, &b.covector, &x0, &gx) {
            let pts: Vec<[f64; 2]> = ends.iter().filter_map(|p| fig.coords(p)).collect();
            fig.polyline(Class::Bisector, &pts);
        }
    }
    if let Some(c) = fig.coords(&x0) {
        fig.circle(Class::BasePoint, c, 4.0);
    }
    let report = TilingReport {
        seed,
        base,
        elements: elements.len(),
        bisectors: dl.bisectors.iter().map(|b| [b.covector[0], b.covector[1], b.covector[2]]).collect(),
        fundamental_domain: DomainSpec::from(dl.domain.clone()),
        samples,
        covered,
        overlapping,
    };
    Ok((report, fig.finish()))
}

pub fn tile(cfg: &TileConfig, common: Common) -> CliResult<Outputs> {
    let omega = domain_of(&cfg.domain)?;
    let elements: Vec<ProjTransform> = enumerate_words(&cfg.group, cfg.word_length)
        .into_iter()
        .map(|w| w.element)
        .collect();
    let (report, svg) = tiling(&omega, &elements, cfg.base, cfg.samples, common.seed)?;
    Ok(vec![("tile.json".into(), json(&report)?), ("tile.svg".into(), svg)])
}

pub fn run(cfg: &RunConfig, common: Common) -> CliResult<Outputs> {
    match cfg {
        RunConfig::IdealTriangleScan(c) => ideal_triangle_scan(c, common),
        RunConfig::CuspProfile(c) => cusp_profile(c, common),
        RunConfig::DirichletTiling(c) => dirichlet_tiling(c, common),
    }
}

fn ideal_triangle_scan(cfg: &IdealTriangleScan, common: Common) -> CliResult<Outputs> {
    #[derive(Serialize)]
    struct Row {
        x: f64,
        area: f64,
        tail: f64,
    }
    #[derive(Serialize)]
    struct Report {
        rows: Vec<Row>,
        argmin: f64,
        min_area: f64,
    }
    let t = ConvexDomain::triangle();
    let mut opts = IdealTriangleOptions::default();
    if let Some(l) = &cfg.levels {
        opts.levels = l.clone();
    }
    if let Some(r) = common.tol.or(cfg.rel_tol) {
        opts.rel_tol = r;
    }
    let mut rows = Vec::with_capacity(cfg.xs.len());
    for &x in &cfg.xs {
        let s = [point([1.0, 1.0, 0.0])?, point([0.0, 1.0, 1.0])?, point([x, 0.0, 1.0])?];
        let a = ideal_triangle_area(&t, &s, &opts)?;
        rows.push(Row {
            x,
            area: a.area,
            tail: a.tail,
        });
    }
    let best = rows
        .iter()
        .min_by(|a, b| a.area.total_cmp(&b.area))
        .expect("xs is non-empty");
    let report = Report {
        argmin: best.x,
        min_area: best.area,
        rows,
    };
    Ok(vec![("ideal_triangle_scan.json".into(), json(&report)?)])
}

fn cusp_profile(cfg: &CuspProfile, common: Common) -> CliResult<Outputs> {
    let omega = domain_of(&cfg.domain)?;
    let apex = match classify(&cfg.generator, DEFAULT_CLASSIFY_TOL)? {
        DynClass::Parabolic { p, .. } => p,
        other => return Err(hilbertine::Error::WrongFamily(other.family()).into()),
    };
    let pic = [apex, point(cfg.vertices[0])?, point(cfg.vertices[1])?];
    let mut opts = ProfileOptions {
        rel_tol: common.tol.or(cfg.rel_tol).unwrap_or(DEFAULT_REL_TOL),
        ..Default::default()
    };
    if let Some(l) = &cfg.levels {
        opts.levels = l.clone();
    }
    let profile = pic_volume_profile(&omega, &pic, &opts)?;
    let region = RegionSpec::Pic {
        vertices: [pic[0].into(), pic[1].into(), pic[2].into()],
    };
    let report = VolumeReport {
        region,
        levels: profile.levels.clone(),
        partials: profile.partials.clone(),
        verdict: profile.verdict,
    };

    let chart = drawing_chart(&omega);
    let outline = boundary(&omega, &chart, OUTLINE_SAMPLES);
    let mut fig = Figure::fitted(chart, &outline);
    fig.path(Class::Domain, &outline);
    let pc = &opts.chart;
    let [a, b, c] = pic.map(|p| pc.coords(&p).expect("validated by the profile"));
    let outline_pic: Vec<[f64; 2]> = pic.iter().filter_map(|p| fig.coords(p)).collect();
    fig.path(Class::Pic, &outline_pic);
    let height = ((a[0] - b[0]) * (c[1] - b[1]) - (a[1] - b[1]) * (c[0] - b[0])).abs() / (c[0] - b[0]).hypot(c[1] - b[1]);
    for &eps in &profile.levels {
        let s = eps / height;
        let cut = [b, c].map(|v| pc.point(a[0] + s * (v[0] - a[0]), a[1] + s * (v[1] - a[1])));
        let pts: Vec<[f64; 2]> = cut.iter().filter_map(|p| fig.coords(p)).collect();
        fig.polyline(Class::Annulus, &pts);
    }
    Ok(vec![
        ("cusp_profile.json".into(), json(&report)?),
        ("cusp_profile.svg".into(), fig.finish()),
    ])
}

fn dirichlet_tiling(cfg: &DirichletTiling, common: Common) -> CliResult<Outputs> {
    let omega = domain_of(&cfg.domain)?;
    let k = cfg.powers as i64;
    let elements: Vec<ProjTransform> = (1..=k).flat_map(|n| [cfg.generator.powi(n), cfg.generator.powi(-n)]).collect();
    let (report, svg) = tiling(&omega, &elements, cfg.base, cfg.samples, common.seed)?;
    Ok(vec![
        ("dirichlet_tiling.json".into(), json(&report)?),
        ("dirichlet_tiling.svg".into(), svg),
    ])
}

