//! Static SVG and CSV output. Numbers are printed with fixed precision so
//! identical inputs give identical bytes.

use std::fmt::Write as _;

use aperiodica::address::AnalysisReport;
use aperiodica::pointsets::{sample_from_json, PointSample};
use aperiodica::windows::{window_from_json, Window};
use aperiodica::{Error, Result};
use clap::ValueEnum;
use serde_json::Value;

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 40.0;
const RADIUS: f64 = 2.0;
const OUTLINE_SEGMENTS: usize = 360;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Svg,
    Csv,
}

/// Renders a sample, window or analysis report file, recognised by its
/// fields (`points`, `shape`, `profile`).
pub fn render(v: &Value, format: Format) -> Result<Vec<u8>> {
    let text = if v.get("points").is_some() {
        let s = sample_from_json(v)?;
        match format {
            Format::Svg => patch_svg(&s)?,
            Format::Csv => points_csv(s.positions(), s.dim())?,
            Format::Json => pretty(v),
        }
    } else if v.get("shape").is_some() {
        let w: Window<f64> = window_from_json(v)?;
        match format {
            Format::Svg => window_svg(&w, &[])?,
            Format::Csv => points_csv(&w.outline(OUTLINE_SEGMENTS)?, w.dim())?,
            Format::Json => pretty(v),
        }
    } else if v.get("profile").is_some() {
        let r = AnalysisReport::from_json(&v.to_string())?;
        match format {
            Format::Svg => profile_svg(&r),
            Format::Csv => profile_csv(&r),
            Format::Json => pretty(v),
        }
    } else {
        return Err(Error::Parse("not a sample, window or analysis report".into()));
    };
    Ok(text.into_bytes())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Affine map from a data box onto the canvas, aspect ratio kept, y upward.
struct Frame {
    lo: [f64; 2],
    scale: f64,
    offset: [f64; 2],
}

impl Frame {
    fn new(lo: [f64; 2], hi: [f64; 2]) -> Self {
        let span = [(hi[0] - lo[0]).max(1e-12), (hi[1] - lo[1]).max(1e-12)];
        let usable = CANVAS - 2.0 * MARGIN;
        let scale = (usable / span[0]).min(usable / span[1]);
        let offset = [
            MARGIN + (usable - scale * span[0]) / 2.0,
            MARGIN + (usable - scale * span[1]) / 2.0,
        ];
        Frame { lo, scale, offset }
    }

    /// One-dimensional data sit on the horizontal midline.
    fn line(lo: f64, hi: f64) -> Self {
        let span = (hi - lo).max(1e-12);
        let scale = (CANVAS - 2.0 * MARGIN) / span;
        Frame {
            lo: [lo, 0.0],
            scale,
            offset: [MARGIN, CANVAS / 2.0],
        }
    }

    fn map(&self, p: &[f64]) -> (f64, f64) {
        let x = self.offset[0] + self.scale * (p[0] - self.lo[0]);
        let y = match p.get(1) {
            Some(v) => CANVAS - (self.offset[1] + self.scale * (v - self.lo[1])),
            None => self.offset[1],
        };
        (x, y)
    }
}

fn svg_open() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{c}\" height=\"{c}\" viewBox=\"0 0 {c} {c}\">\n\
         <rect width=\"{c}\" height=\"{c}\" fill=\"white\"/>\n",
        c = CANVAS
    )
}

fn circles(out: &mut String, frame: &Frame, pts: &[Vec<f64>], fill: &str) {
    for p in pts {
        let (x, y) = frame.map(p);
        let _ = writeln!(out, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{RADIUS}\" fill=\"{fill}\"/>");
    }
}

fn bounds(pts: impl Iterator<Item = Vec<f64>>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for p in pts {
        for k in 0..n {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

/// Points as circles over the sample's box; `d ≤ 2`.
pub fn patch_svg(s: &PointSample) -> Result<String> {
    let (lo, hi) = (s.region().lo(), s.region().hi());
    let frame = match s.dim() {
        1 => Frame::line(lo[0], hi[0]),
        2 => Frame::new([lo[0], lo[1]], [hi[0], hi[1]]),
        d => return Err(Error::UnsupportedDimension(d)),
    };
    let mut out = svg_open();
    if s.dim() == 1 {
        let (a, b) = (frame.map(&[lo[0]]), frame.map(&[hi[0]]));
        let _ = writeln!(out, "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"#999\"/>", a.0, a.1, b.0, b.1);
    } else {
        let (a, b) = (frame.map(&[lo[0], lo[1]]), frame.map(&[hi[0], hi[1]]));
        let _ = writeln!(
            out,
            "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"none\" stroke=\"#999\"/>",
            a.0,
            b.1,
            b.0 - a.0,
            a.1 - b.1
        );
    }
    circles(&mut out, &frame, s.positions(), "black");
    out.push_str("</svg>\n");
    Ok(out)
}

/// Window boundary as a path, with optional star images overlaid; `n ≤ 2`.
pub fn window_svg(w: &Window<f64>, images: &[Vec<f64>]) -> Result<String> {
    let n = w.dim();
    if n > 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    let outline = w.outline(OUTLINE_SEGMENTS)?;
    let (lo, hi) = bounds(outline.iter().cloned().chain(images.iter().cloned()), n);
    let frame = if n == 1 {
        Frame::line(lo[0], hi[0])
    } else {
        Frame::new([lo[0], lo[1]], [hi[0], hi[1]])
    };
    let mut out = svg_open();
    let mut d = String::new();
    for (k, p) in outline.iter().enumerate() {
        let (x, y) = frame.map(p);
        let _ = write!(d, "{}{x:.3} {y:.3} ", if k == 0 { "M" } else { "L" });
    }
    if n == 2 {
        d.push('Z');
    }
    let _ = writeln!(out, "<path d=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>", d.trim_end());
    circles(&mut out, &frame, images, "#c33");
    out.push_str("</svg>\n");
    Ok(out)
}

/// Header `x` (1D), `x,y` (2D) or `x1,..,xd`, then one row per point.
pub fn points_csv(pts: &[Vec<f64>], d: usize) -> Result<String> {
    let header = match d {
        1 => "x".to_string(),
        2 => "x,y".to_string(),
        _ => (1..=d).map(|k| format!("x{k}")).collect::<Vec<_>>().join(","),
    };
    let mut out = header + "\n";
    for p in pts {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.len(),
            });
        }
        let row: Vec<String> = p.iter().map(|x| format!("{x}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// `R,C` rows in increasing `R`.
pub fn profile_csv(r: &AnalysisReport) -> String {
    let mut rows = r.profile.clone();
    rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut out = String::from("R,C\n");
    for [x, c] in rows {
        let _ = writeln!(out, "{x},{c}");
    }
    out
}

/// Deviation profile `C(R)` as a polyline with point markers.
pub fn profile_svg(r: &AnalysisReport) -> String {
    let mut rows = r.profile.clone();
    rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let pts: Vec<Vec<f64>> = rows.iter().map(|p| p.to_vec()).collect();
    let (mut lo, hi) = bounds(pts.iter().cloned(), 2);
    lo = vec![0.0_f64.min(lo[0]), 0.0_f64.min(lo[1])];
    let frame = Frame::new([lo[0], lo[1]], [hi[0].max(lo[0] + 1.0), hi[1].max(lo[1] + 1e-9)]);
    let mut out = svg_open();
    let line: Vec<String> = pts
        .iter()
        .map(|p| {
            let (x, y) = frame.map(p);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    let _ = writeln!(out, "<polyline points=\"{}\" fill=\"none\" stroke=\"black\"/>", line.join(" "));
    circles(&mut out, &frame, &pts, "black");
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use aperiodica::modelset::{fixture_sample, Fixture};
    use aperiodica::pointsets::{sample_to_json, BoxRegion};

    #[test]
    fn one_dimensional_patch_sits_on_the_midline() {
        let s = fixture_sample(Fixture::Fibonacci, BoxRegion::interval(0.0, 20.0).unwrap()).unwrap();
        let svg = String::from_utf8(render(&sample_to_json(&s), Format::Svg).unwrap()).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("viewBox=\"0 0 800 800\""));
        let circles: Vec<&str> = svg.lines().filter(|l| l.starts_with("<circle")).collect();
        assert_eq!(circles.len(), s.len());
        assert!(circles.iter().all(|l| l.contains("cy=\"400.000\"") && l.contains("r=\"2\"")));
    }

    #[test]
    fn three_dimensional_patch_is_refused() {
        let s = PointSample::numeric(vec![vec![0.0, 0.0, 0.0]], BoxRegion::new(vec![0.0; 3], vec![1.0; 3]).unwrap()).unwrap();
        assert!(matches!(patch_svg(&s), Err(Error::UnsupportedDimension(3))));
    }

    #[test]
    fn profile_csv_is_sorted_with_header() {
        let r = AnalysisReport {
            s: 2,
            rank_exceeds_d: true,
            a: vec![vec![1.0], vec![0.5]],
            c: 1.0,
            profile: vec![[4.0, 1.0], [1.0, 0.5], [2.0, 0.9]],
            verdict: "meyer_plausible".into(),
        };
        assert_eq!(profile_csv(&r), "R,C\n1,0.5\n2,0.9\n4,1\n");
    }
}
