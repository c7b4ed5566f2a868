//! Minimal SVG writer: paths, circles and polylines in a fixed 1000×1000 frame.

use std::fmt::Write;

use hilbertine::{AffineChart, ConvexDomain, ProjPoint};

pub const SIZE: f64 = 1000.0;
pub const MARGIN: f64 = 0.05;

/// Stroke and fill colors of each object class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Class {
    Domain,
    Dual,
    Bisector,
    Translate,
    Annulus,
    Pic,
    LimitPoint,
    BasePoint,
}

impl Class {
    fn stroke(self) -> &'static str {
        match self {
            Class::Domain => "#1b4f72",
            Class::Dual => "#6c3483",
            Class::Bisector => "#c0392b",
            Class::Translate => "#7f8c8d",
            Class::Annulus => "#d68910",
            Class::Pic => "#1e8449",
            Class::LimitPoint => "#117a65",
            Class::BasePoint => "#000000",
        }
    }

    fn fill(self) -> &'static str {
        match self {
            Class::Domain => "#eaf2f8",
            Class::Dual => "#f4ecf7",
            Class::LimitPoint => "#117a65",
            Class::BasePoint => "#000000",
            _ => "none",
        }
    }

    fn name(self) -> &'static str {
        match self {
            Class::Domain => "domain",
            Class::Dual => "dual",
            Class::Bisector => "bisector",
            Class::Translate => "translate",
            Class::Annulus => "annulus",
            Class::Pic => "pic",
            Class::LimitPoint => "limit-point",
            Class::BasePoint => "base-point",
        }
    }
}

/// Chart used to draw `domain`: the standard one when the domain is bounded
/// there, its canonical chart otherwise.
pub fn drawing_chart(domain: &ConvexDomain) -> AffineChart {
    let standard = AffineChart::standard();
    let bounded = domain.validate_chart(&standard).is_ok()
        && boundary_in(domain, &standard, 256)
            .iter()
            .all(|p| p.is_some_and(|c| c[0].abs() < 1e4 && c[1].abs() < 1e4));
    if bounded {
        standard
    } else {
        domain.canonical_chart().clone()
    }
}

fn boundary_in(domain: &ConvexDomain, chart: &AffineChart, n: usize) -> Vec<Option<[f64; 2]>> {
    let canon = domain.canonical_chart();
    domain
        .boundary_samples(n)
        .iter()
        .map(|u| chart.coords(&canon.point(u[0], u[1])))
        .collect()
}

/// Boundary of `domain` sampled by `n` rays, in `chart` coordinates.
pub fn boundary(domain: &ConvexDomain, chart: &AffineChart, n: usize) -> Vec<[f64; 2]> {
    boundary_in(domain, chart, n).into_iter().flatten().collect()
}

pub struct Figure {
    chart: AffineChart,
    center: [f64; 2],
    scale: f64,
    body: String,
}

impl Figure {
    /// Frame fitted to the bounding box of `outline`.
    pub fn fitted(chart: AffineChart, outline: &[[f64; 2]]) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in outline {
            for i in 0..2 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        Figure {
            chart,
            center: [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0],
            scale: SIZE * (1.0 - 2.0 * MARGIN) / span,
            body: String::new(),
        }
    }

    fn px(&self, p: [f64; 2]) -> (f64, f64) {
        (
            SIZE / 2.0 + (p[0] - self.center[0]) * self.scale,
            SIZE / 2.0 - (p[1] - self.center[1]) * self.scale,
        )
    }

    fn points(&self, pts: &[[f64; 2]]) -> String {
        let mut s = String::new();
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = self.px(*p);
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{x:.3},{y:.3}");
        }
        s
    }

    /// Closed outline.
    pub fn path(&mut self, class: Class, pts: &[[f64; 2]]) {
        if pts.len() < 2 {
            return;
        }
        let mut d = String::new();
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = self.px(*p);
            let _ = write!(d, "{}{x:.3} {y:.3} ", if i == 0 { "M" } else { "L" });
        }
        d.push('Z');
        let _ = writeln!(
            self.body,
            r#"<path class="{}" d="{d}" stroke="{}" fill="{}" stroke-width="2"/>"#,
            class.name(),
            class.stroke(),
            class.fill()
        );
    }

    pub fn polyline(&mut self, class: Class, pts: &[[f64; 2]]) {
        if pts.len() < 2 {
            return;
        }
        let _ = writeln!(
            self.body,
            r#"<polyline class="{}" points="{}" stroke="{}" fill="none" stroke-width="1.5"/>"#,
            class.name(),
            self.points(pts),
            class.stroke()
        );
    }

    pub fn circle(&mut self, class: Class, p: [f64; 2], r: f64) {
        let (x, y) = self.px(p);
        let _ = writeln!(
            self.body,
            r#"<circle class="{}" cx="{x:.3}" cy="{y:.3}" r="{r:.1}" stroke="{}" fill="{}"/>"#,
            class.name(),
            class.stroke(),
            class.fill()
        );
    }

    /// Projective point drawn in the figure chart, skipped when at infinity.
    pub fn coords(&self, p: &ProjPoint) -> Option<[f64; 2]> {
        self.chart.coords(p)
    }

    pub fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n{}</svg>\n",
            self.body
        )
    }
}
