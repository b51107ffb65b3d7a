//! SVG 1.1 renderings: the eigenvalue trajectory chart and colored complexes.

use std::fmt::Write;

use hodgetrack_core::analysis::HgcTriple;
use hodgetrack_core::{ComplexSlice, EigenKind, PointCloud, TrajectorySet};

use crate::error::CliError;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 50.0;

/// Stroke color of an eigenpair type: blue harmonic, green gradient, red curl.
pub fn kind_color(kind: EigenKind) -> &'static str {
    match kind {
        EigenKind::Harmonic => "#1f4fd8",
        EigenKind::Gradient => "#1a9641",
        EigenKind::Curl => "#d7191c",
    }
}

// Qualitative palette for cluster ids; ids past its end wrap around.
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

pub fn cluster_color(label: usize) -> &'static str {
    PALETTE[label % PALETTE.len()]
}

/// `rgb(Cu, G, H)` scaled to 0–255: red curl, green gradient, blue harmonic.
pub fn hgc_color(t: &HgcTriple) -> String {
    let c = |x: f64| (x.clamp(0.0, 1.0) * 255.0).round() as u8;
    format!("rgb({},{},{})", c(t.curl), c(t.gradient), c(t.harmonic))
}

fn header(out: &mut String) {
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
}

/// Eigenvalue against filtration step, one path per trajectory, colored by
/// the trajectory's dominant type.
pub fn trajectory_svg(set: &TrajectorySet) -> String {
    let mut out = String::new();
    header(&mut out);
    let steps = set.thresholds.len();
    let lambda_top = set
        .trajectories
        .iter()
        .flat_map(|t| &t.points)
        .fold(0.0f64, |m, p| m.max(p.lambda));
    let lambda_top = if lambda_top > 0.0 { lambda_top } else { 1.0 };
    let (w, h) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let x = |step: usize| {
        if steps > 1 {
            MARGIN + w * step as f64 / (steps - 1) as f64
        } else {
            MARGIN + w / 2.0
        }
    };
    let y = |lambda: f64| HEIGHT - MARGIN - h * lambda / lambda_top;

    let _ = writeln!(
        out,
        "<g stroke=\"black\" stroke-width=\"1\"><line x1=\"{MARGIN}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\"/><line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{b}\"/></g>",
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(
        out,
        "<g font-family=\"sans-serif\" font-size=\"12\"><text x=\"{}\" y=\"{}\" text-anchor=\"middle\">filtration step</text><text x=\"{}\" y=\"{}\" text-anchor=\"end\">{lambda_top:.4}</text><text x=\"{}\" y=\"{}\" text-anchor=\"end\">0</text></g>",
        WIDTH / 2.0,
        HEIGHT - 15.0,
        MARGIN - 4.0,
        MARGIN + 4.0,
        MARGIN - 4.0,
        HEIGHT - MARGIN
    );
    out.push_str("<g fill=\"none\" stroke-width=\"1.5\">\n");
    for tr in &set.trajectories {
        let mut d = String::new();
        for (i, p) in tr.points.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, x(p.step), y(p.lambda));
        }
        if tr.points.len() == 1 {
            // a zero-length segment keeps single-step trajectories visible
            let _ = write!(d, " h0.01");
        }
        let _ = writeln!(
            out,
            "<path id=\"trajectory-{}\" d=\"{d}\" stroke=\"{}\" stroke-linecap=\"round\"/>",
            tr.id,
            kind_color(tr.dominant_kind())
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Draws the n-simplices of a planar slice, simplex `i` in `colors[i]`, over
/// a light-grey rendering of all its edges.
pub fn complex_svg(
    slice: &ComplexSlice<'_>,
    points: Option<&PointCloud>,
    degree: usize,
    colors: &[String],
) -> Result<String, CliError> {
    let points = points.ok_or_else(|| CliError::Projection("the complex has no vertex coordinates".into()))?;
    if points.dim() != 2 {
        return Err(CliError::Projection(format!(
            "only 2D complexes can be drawn, this one is {}D",
            points.dim()
        )));
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points.points() {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let scale = (WIDTH - 2.0 * MARGIN).min(HEIGHT - 2.0 * MARGIN) / span;
    let at = |v: u32| {
        let p = points.point(v as usize);
        (MARGIN + (p[0] - lo[0]) * scale, HEIGHT - MARGIN - (p[1] - lo[1]) * scale)
    };

    let mut out = String::new();
    header(&mut out);
    out.push_str("<g stroke=\"#d0d0d0\" stroke-width=\"0.5\">\n");
    if slice.dimension() >= 1 {
        for e in slice.simplices(1) {
            let (a, b) = (at(e.vertices()[0]), at(e.vertices()[1]));
            let _ = writeln!(out, "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\"/>", a.0, a.1, b.0, b.1);
        }
    }
    out.push_str("</g>\n<g stroke-width=\"1.5\">\n");
    if slice.dimension() >= degree {
        for (s, color) in slice.simplices(degree).zip(colors) {
            let v = s.vertices();
            match degree {
                0 => {
                    let p = at(v[0]);
                    let _ = writeln!(out, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>", p.0, p.1);
                }
                1 => {
                    let (a, b) = (at(v[0]), at(v[1]));
                    let _ = writeln!(
                        out,
                        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\"/>",
                        a.0, a.1, b.0, b.1
                    );
                }
                _ => {
                    let pts: Vec<String> = v
                        .iter()
                        .map(|&u| {
                            let p = at(u);
                            format!("{:.2},{:.2}", p.0, p.1)
                        })
                        .collect();
                    let _ = writeln!(out, "<polygon points=\"{}\" fill=\"{color}\" stroke=\"none\"/>", pts.join(" "));
                }
            }
        }
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}
