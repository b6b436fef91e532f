//! Self-contained log-log SVG line plots with reference slope guides.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Reference line `y ∝ x^slope`, drawn through the first point of the
/// first series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Guide {
    pub slope: f64,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axes {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub guides: Vec<Guide>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x.log10() - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y.log10() - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn decades(lo: f64, hi: f64) -> (f64, f64) {
    let (a, b) = (lo.floor(), hi.ceil());
    if a == b {
        (a, a + 1.0)
    } else {
        (a, b)
    }
}

pub fn render_svg(series: &[PlotSeries], axes: &Axes) -> CliResult<String> {
    if series.is_empty() || series.iter().all(|s| s.x.is_empty()) {
        return Err(CliError::Plot("empty series".into()));
    }
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for s in series {
        if s.x.len() != s.y.len() {
            return Err(CliError::Plot(format!("series `{}` has mismatched lengths", s.name)));
        }
        for (&x, &y) in s.x.iter().zip(&s.y) {
            if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
                return Err(CliError::Plot(format!(
                    "series `{}` has a nonpositive value ({x}, {y}) on a log axis",
                    s.name
                )));
            }
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    let (x0, x1) = decades(xmin.log10(), xmax.log10());
    let (y0, y1) = decades(ymin.log10(), ymax.log10());
    let fr = Frame { x0, x1, y0, y1 };

    let mut o = String::new();
    let _ = writeln!(
        o,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(o, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        o,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        (WIDTH - RIGHT + LEFT) / 2.0,
        escape(&axes.title)
    );
    let (pl, pr, pt, pb) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        o,
        r##"<rect x="{pl:.2}" y="{pt:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
        pr - pl,
        pb - pt
    );
    for d in (x0 as i32)..=(x1 as i32) {
        let x = fr.px(10f64.powi(d));
        let _ = writeln!(
            o,
            r##"<line x1="{x:.2}" y1="{pt:.2}" x2="{x:.2}" y2="{pb:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{d}</text>"##,
            pb + 16.0
        );
    }
    for d in (y0 as i32)..=(y1 as i32) {
        let y = fr.py(10f64.powi(d));
        let _ = writeln!(
            o,
            r##"<line x1="{pl:.2}" y1="{y:.2}" x2="{pr:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"##,
            pl - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        o,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (pl + pr) / 2.0,
        HEIGHT - 12.0,
        escape(&axes.x_label)
    );
    let _ = writeln!(
        o,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (pt + pb) / 2.0,
        (pt + pb) / 2.0,
        escape(&axes.y_label)
    );
    let _ = writeln!(o, r#"<clipPath id="plot"><rect x="{pl:.2}" y="{pt:.2}" width="{:.2}" height="{:.2}"/></clipPath>"#, pr - pl, pb - pt);

    let first = series.iter().find(|s| !s.x.is_empty()).expect("nonempty series");
    let (ax, ay) = (first.x[0], first.y[0]);
    let mut legend = 0usize;
    for g in &axes.guides {
        let xa = 10f64.powf(x0);
        let xb = 10f64.powf(x1);
        let ya = ay * (xa / ax).powf(g.slope);
        let yb = ay * (xb / ax).powf(g.slope);
        let _ = writeln!(
            o,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="5,4" clip-path="url(#plot)"/>"##,
            fr.px(xa),
            fr.py(ya),
            fr.px(xb),
            fr.py(yb)
        );
        let ly = pt + 14.0 + 16.0 * legend as f64;
        let _ = writeln!(
            o,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="5,4"/><text x="{:.2}" y="{:.2}">{}</text>"##,
            pr + 10.0,
            ly - 4.0,
            pr + 30.0,
            ly - 4.0,
            pr + 36.0,
            ly,
            escape(&g.label)
        );
        legend += 1;
    }
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = s
            .x
            .iter()
            .zip(&s.y)
            .map(|(&x, &y)| format!("{:.2},{:.2}", fr.px(x), fr.py(y)))
            .collect();
        let _ = writeln!(
            o,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        let ly = pt + 14.0 + 16.0 * legend as f64;
        let _ = writeln!(
            o,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            pr + 10.0,
            ly - 4.0,
            pr + 30.0,
            ly - 4.0,
            pr + 36.0,
            ly,
            escape(&s.name)
        );
        legend += 1;
    }
    o.push_str("</svg>\n");
    Ok(o)
}

/// Drops samples that cannot sit on log axes (`t = 0`, zero norms).
pub fn positive_part(name: impl Into<String>, x: &[f64], y: &[f64]) -> PlotSeries {
    let (x, y) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (*a, *b))
        .unzip();
    PlotSeries { name: name.into(), x, y }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axes(slope: f64) -> Axes {
        Axes {
            title: "t".into(),
            x_label: "t".into(),
            y_label: "norm".into(),
            guides: vec![Guide { slope, label: "guide".into() }],
        }
    }

    #[test]
    fn power_law_runs_parallel_to_its_guide() {
        let x: Vec<f64> = (1..=20).map(|i| i as f64 * 10.0).collect();
        let y: Vec<f64> = x.iter().map(|t| 3.0 * t.powf(-0.75)).collect();
        let s = PlotSeries { name: "u".into(), x: x.clone(), y: y.clone() };
        let svg = render_svg(&[s], &axes(-0.75)).unwrap();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        // the guide passes through every point of the series
        let fr = Frame { x0: 1.0, x1: 3.0, y0: -2.0, y1: 0.0 };
        let guide = |t: f64| y[0] * (t / x[0]).powf(-0.75);
        for (&t, &v) in x.iter().zip(&y) {
            assert!((fr.py(guide(t)) - fr.py(v)).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_empty_and_nonpositive() {
        assert!(render_svg(&[], &axes(-1.0)).is_err());
        let empty = PlotSeries { name: "e".into(), x: vec![], y: vec![] };
        assert!(render_svg(&[empty], &axes(-1.0)).is_err());
        let bad = PlotSeries { name: "b".into(), x: vec![1.0, 2.0], y: vec![1.0, 0.0] };
        let e = render_svg(&[bad], &axes(-1.0)).unwrap_err();
        assert!(e.to_string().contains("nonpositive"));
    }

    #[test]
    fn output_is_stable() {
        let s = PlotSeries { name: "a<b".into(), x: vec![1.0, 10.0, 100.0], y: vec![1.0, 0.1, 0.01] };
        let a = render_svg(&[s.clone()], &axes(-1.0)).unwrap();
        let b = render_svg(&[s], &axes(-1.0)).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("a&lt;b"));
    }
}
