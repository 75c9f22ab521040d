//! Minimal SVG plotting: heatmaps, line plots with error bars, bar charts.

use std::fmt::Write;

const FONT: &str = "font-family=\"sans-serif\" font-size=\"11\"";

pub struct Svg {
    width: f64,
    height: f64,
    body: String,
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            body: String::new(),
        }
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
             <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.body,
            "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\" {FONT}>{}</text>",
            escape(s)
        );
    }

    fn line(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, stroke: &str) {
        let _ = writeln!(
            self.body,
            "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y1:.2}\" stroke=\"{stroke}\"/>"
        );
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{fill}\"/>"
        );
    }

    fn frame(&mut self, p: &Panel, x: &Axis, y: &Axis) {
        let _ = writeln!(
            self.body,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>",
            p.x, p.y, p.w, p.h
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let vx = x.lo + f * (x.hi - x.lo);
            let px = p.x + f * p.w;
            self.line(px, p.y + p.h, px, p.y + p.h + 4.0, "black");
            self.text(px, p.y + p.h + 16.0, "middle", &tick(vx));
            let vy = y.lo + f * (y.hi - y.lo);
            let py = p.y + p.h - f * p.h;
            self.line(p.x - 4.0, py, p.x, py, "black");
            self.text(p.x - 6.0, py + 4.0, "end", &tick(vy));
        }
        self.text(p.x + p.w / 2.0, p.y + p.h + 32.0, "middle", &x.label);
        let (cx, cy) = (p.x - 48.0, p.y + p.h / 2.0);
        let _ = writeln!(
            self.body,
            "<text x=\"{cx:.1}\" y=\"{cy:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 {cx:.1} {cy:.1})\" {FONT}>{}</text>",
            escape(&y.label)
        );
        self.text(p.x + p.w / 2.0, p.y - 8.0, "middle", &p.title);
    }

    /// Cells of `values[row][col]`, row 0 at the bottom, coloured on `[lo, hi]`.
    pub fn heatmap(&mut self, p: &Panel, x: &Axis, y: &Axis, values: &[Vec<f64>], lo: f64, hi: f64) {
        let rows = values.len();
        for (r, row) in values.iter().enumerate() {
            let cols = row.len();
            for (c, &v) in row.iter().enumerate() {
                let w = p.w / cols as f64;
                let h = p.h / rows as f64;
                let fill = if v.is_finite() { colour((v - lo) / (hi - lo)) } else { "#cccccc".into() };
                self.rect(p.x + c as f64 * w, p.y + p.h - (r + 1) as f64 * h, w + 0.3, h + 0.3, &fill);
            }
        }
        self.frame(p, x, y);
    }

    pub fn series(&mut self, p: &Panel, x: &Axis, y: &Axis, series: &[Series]) {
        let to_px = |vx: f64, vy: f64| {
            (
                p.x + (x.map(vx) - x.map(x.lo)) / (x.map(x.hi) - x.map(x.lo)) * p.w,
                p.y + p.h - (vy - y.lo) / (y.hi - y.lo) * p.h,
            )
        };
        for (k, s) in series.iter().enumerate() {
            if !s.curve.is_empty() {
                let pts: Vec<String> = s
                    .curve
                    .iter()
                    .map(|&(a, b)| {
                        let (u, v) = to_px(a, b);
                        format!("{u:.2},{v:.2}")
                    })
                    .collect();
                let _ = writeln!(
                    self.body,
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\"/>",
                    pts.join(" "),
                    s.colour
                );
            }
            for &(a, b, e) in &s.points {
                let (u, v) = to_px(a, b);
                let (_, top) = to_px(a, b + e);
                let (_, bottom) = to_px(a, b - e);
                self.line(u, top, u, bottom, s.colour);
                let _ = writeln!(self.body, "<circle cx=\"{u:.2}\" cy=\"{v:.2}\" r=\"3\" fill=\"{}\"/>", s.colour);
            }
            let ly = p.y + 14.0 + 14.0 * k as f64;
            self.rect(p.x + p.w - 140.0, ly - 8.0, 10.0, 8.0, s.colour);
            self.text(p.x + p.w - 126.0, ly, "start", &s.name);
        }
        let mut shown = x.clone();
        if x.log {
            shown.label = format!("{} (log scale)", x.label);
        }
        self.frame(p, &shown, y);
    }

    /// Vertical bars at evenly spaced slots, labels under each.
    pub fn bars(&mut self, p: &Panel, y: &Axis, bars: &[(String, f64)], fill: &str) {
        let n = bars.len() as f64;
        let zero = p.y + p.h - (0.0 - y.lo) / (y.hi - y.lo) * p.h;
        for (k, (label, v)) in bars.iter().enumerate() {
            let w = p.w / n;
            let top = p.y + p.h - (v - y.lo) / (y.hi - y.lo) * p.h;
            self.rect(p.x + k as f64 * w + 0.15 * w, top.min(zero), 0.7 * w, (zero - top).abs(), fill);
            self.text(p.x + (k as f64 + 0.5) * w, p.y + p.h + 14.0, "middle", label);
        }
        let _ = writeln!(
            self.body,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>",
            p.x, p.y, p.w, p.h
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let py = p.y + p.h - f * p.h;
            self.line(p.x - 4.0, py, p.x, py, "black");
            self.text(p.x - 6.0, py + 4.0, "end", &tick(y.lo + f * (y.hi - y.lo)));
        }
        self.text(p.x + p.w / 2.0, p.y - 8.0, "middle", &p.title);
    }
}

pub struct Panel {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub title: String,
}

#[derive(Clone)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub label: String,
    pub log: bool,
}

impl Axis {
    pub fn linear(lo: f64, hi: f64, label: &str) -> Self {
        Self {
            lo,
            hi: if hi > lo { hi } else { lo + 1.0 },
            label: label.into(),
            log: false,
        }
    }

    pub fn log(lo: f64, hi: f64, label: &str) -> Self {
        Self {
            log: true,
            ..Self::linear(lo, hi, label)
        }
    }

    fn map(&self, v: f64) -> f64 {
        if self.log { v.max(1e-300).ln() } else { v }
    }
}

pub struct Series {
    pub name: String,
    pub colour: &'static str,
    /// `(x, y, error)`.
    pub points: Vec<(f64, f64, f64)>,
    pub curve: Vec<(f64, f64)>,
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Dark blue through teal to yellow.
pub fn colour(f: f64) -> String {
    const STOPS: [[f64; 3]; 5] = [
        [68.0, 1.0, 84.0],
        [59.0, 82.0, 139.0],
        [33.0, 145.0, 140.0],
        [94.0, 201.0, 98.0],
        [253.0, 231.0, 37.0],
    ];
    let f = f.clamp(0.0, 1.0) * 4.0;
    let k = (f.floor() as usize).min(3);
    let t = f - k as f64;
    let c: Vec<u8> = (0..3)
        .map(|i| (STOPS[k][i] + t * (STOPS[k + 1][i] - STOPS[k][i])).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colour_ends() {
        assert_eq!(colour(0.0), "#440154");
        assert_eq!(colour(1.0), "#fde725");
        assert_eq!(colour(7.0), "#fde725");
    }

    #[test]
    fn document_is_closed() {
        let mut s = Svg::new(100.0, 80.0);
        let p = Panel { x: 10.0, y: 10.0, w: 50.0, h: 50.0, title: "a<b".into() };
        s.bars(&p, &Axis::linear(0.0, 1.0, "y"), &[("x".into(), 0.5)], "steelblue");
        let out = s.finish();
        assert!(out.starts_with("<svg") && out.trim_end().ends_with("</svg>"));
        assert!(out.contains("a&lt;b"));
    }
}
