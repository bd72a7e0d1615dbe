//! Minimal deterministic SVG line and bar plots.

use std::fmt::Write;

use crate::error::{Error, Result};

pub struct Series<'a> {
    pub xs: &'a [f64],
    pub ys: &'a [f64],
    pub color: &'a str,
}

pub struct PlotStyle<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub width: f64,
    pub height: f64,
}

impl<'a> PlotStyle<'a> {
    pub fn new(title: &'a str, x_label: &'a str, y_label: &'a str) -> Self {
        PlotStyle {
            title,
            x_label,
            y_label,
            width: 640.0,
            height: 400.0,
        }
    }
}

const MARGIN: f64 = 56.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn new(plot: &PlotStyle, xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Frame {
        let (x0, x1) = bounds(xs);
        let (y0, y1) = bounds(ys);
        Frame {
            x0,
            x1,
            y0,
            y1,
            w: plot.width,
            h: plot.height,
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (self.w - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        self.h - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (self.h - 2.0 * MARGIN)
    }
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn header(out: &mut String, plot: &PlotStyle, f: &Frame) {
    let (w, h) = (plot.width, plot.height);
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(out, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>",
        w - 2.0 * MARGIN,
        h - 2.0 * MARGIN
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
        w / 2.0,
        escape(plot.title)
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"13\">{}</text>",
        w / 2.0,
        h - 12.0,
        escape(plot.x_label)
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 {:.2})\">{}</text>",
        h / 2.0,
        h / 2.0,
        escape(plot.y_label)
    );
    for (v, x, y, anchor) in [
        (f.x0, MARGIN, h - MARGIN + 16.0, "start"),
        (f.x1, w - MARGIN, h - MARGIN + 16.0, "end"),
    ] {
        let _ = writeln!(
            out,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\" font-size=\"11\">{v:.4}</text>"
        );
    }
    for (v, y) in [(f.y0, h - MARGIN), (f.y1, MARGIN + 10.0)] {
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{y:.2}\" text-anchor=\"end\" font-size=\"11\">{v:.4}</text>",
            MARGIN - 4.0
        );
    }
}

fn polyline(out: &mut String, f: &Frame, xs: &[f64], ys: &[f64], color: &str, dashed: bool) {
    let mut pts = String::new();
    for (x, y) in xs.iter().zip(ys) {
        if x.is_finite() && y.is_finite() {
            let _ = write!(pts, "{:.2},{:.2} ", f.px(*x), f.py(*y));
        }
    }
    let dash = if dashed { " stroke-dasharray=\"4 3\"" } else { "" };
    let _ = writeln!(
        out,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\"{dash}/>",
        pts.trim_end()
    );
}

fn nonempty(ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::domain("nothing to plot"))
    }
}

pub fn line_plot(plot: &PlotStyle, series: &[Series]) -> Result<String> {
    nonempty(series.iter().any(|s| !s.xs.is_empty()))?;
    let f = Frame::new(
        plot,
        series.iter().flat_map(|s| s.xs.iter().copied()),
        series.iter().flat_map(|s| s.ys.iter().copied()),
    );
    let mut out = String::new();
    header(&mut out, plot, &f);
    for s in series {
        polyline(&mut out, &f, s.xs, s.ys, s.color, false);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn bar_plot(plot: &PlotStyle, centers: &[f64], counts: &[f64], bin_width: f64) -> Result<String> {
    nonempty(!centers.is_empty())?;
    let f = Frame::new(
        plot,
        centers
            .iter()
            .map(|c| c - bin_width / 2.0)
            .chain(centers.iter().map(|c| c + bin_width / 2.0)),
        counts.iter().copied().chain([0.0]),
    );
    let mut out = String::new();
    header(&mut out, plot, &f);
    for (c, n) in centers.iter().zip(counts) {
        let (xa, xb) = (f.px(c - bin_width / 2.0), f.px(c + bin_width / 2.0));
        let (ya, yb) = (f.py(*n), f.py(0.0));
        let _ = writeln!(
            out,
            "<rect x=\"{xa:.2}\" y=\"{ya:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"steelblue\"/>",
            xb - xa,
            yb - ya
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Paths in the `(w, x)` plane with vertical guide lines at the given `w`.
pub fn path_plot(plot: &PlotStyle, paths: &[Series], guides: &[(f64, &str)]) -> Result<String> {
    nonempty(paths.iter().any(|s| !s.xs.is_empty()))?;
    let f = Frame::new(
        plot,
        paths
            .iter()
            .flat_map(|s| s.xs.iter().copied())
            .chain(guides.iter().map(|g| g.0)),
        paths.iter().flat_map(|s| s.ys.iter().copied()),
    );
    let mut out = String::new();
    header(&mut out, plot, &f);
    for (w, label) in guides {
        let x = f.px(*w);
        polyline(&mut out, &f, &[*w, *w], &[f.y0, f.y1], "gray", true);
        let _ = writeln!(
            out,
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"11\">{}</text>",
            MARGIN - 4.0,
            escape(label)
        );
    }
    for s in paths {
        polyline(&mut out, &f, s.xs, s.ys, s.color, false);
    }
    out.push_str("</svg>\n");
    Ok(out)
}
