//! CSV and SVG artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Round-trip float formatting with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Collects artifact paths relative to the output directory.
pub struct Artifacts {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: PathBuf) -> Self {
        Artifacts { dir, files: Vec::new() }
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_path(self.path(name))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(|v| fmt_f64(*v)))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Rows of preformatted cells; use [`fmt_f64`] for numbers.
    pub fn csv_records(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_path(self.path(name))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &impl serde::Serialize) -> anyhow::Result<()> {
        std::fs::write(self.path(name), serde_json::to_string_pretty(value)?)?;
        Ok(())
    }

    pub fn svg(&mut self, name: &str, plot: &Plot) -> anyhow::Result<()> {
        std::fs::write(self.path(name), plot.render())?;
        Ok(())
    }
}

pub fn write_text(path: &Path, text: &str) -> std::io::Result<()> {
    std::fs::write(path, text)
}

/// Line/scatter chart rendered directly as SVG.
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    /// Draw markers instead of a polyline.
    pub scatter: bool,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Plot { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), log_x: false, log_y: false, series: Vec::new() }
    }

    pub fn line(mut self, name: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series { name: name.into(), points, scatter: false });
        self
    }

    pub fn scatter(mut self, name: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series { name: name.into(), points, scatter: true });
        self
    }

    pub fn log_log(mut self) -> Self {
        self.log_x = true;
        self.log_y = true;
        self
    }

    fn tx(&self, v: f64) -> f64 {
        if self.log_x { v.log10() } else { v }
    }

    fn ty(&self, v: f64) -> f64 {
        if self.log_y { v.log10() } else { v }
    }

    pub fn render(&self) -> String {
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|&(x, y)| (self.tx(x), self.ty(y))))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        let (mut x0, mut x1, mut y0, mut y1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY), |a, &(x, y)| (a.0.min(x), a.1.max(x), a.2.min(y), a.3.max(y)));
        if pts.is_empty() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 <= 0.0 {
            (x0, x1) = (x0 - 0.5, x1 + 0.5);
        }
        if y1 - y0 <= 0.0 {
            (y0, y1) = (y0 - 0.5, y1 + 0.5);
        }
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

        let mut out = String::new();
        let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#);
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(&self.title));
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN
        );
        for k in 0..=4 {
            let fx = x0 + (x1 - x0) * k as f64 / 4.0;
            let fy = y0 + (y1 - y0) * k as f64 / 4.0;
            let lx = if self.log_x { format!("1e{fx:.2}") } else { format!("{fx:.3}") };
            let ly = if self.log_y { format!("1e{fy:.2}") } else { format!("{fy:.3}") };
            let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{lx}</text>"#, sx(fx), HEIGHT - MARGIN + 16.0);
            let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{ly}</text>"#, MARGIN - 6.0, sy(fy) + 4.0);
        }
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 14.0, escape(&self.x_label));
        let _ = writeln!(
            out,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        for (k, s) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let mapped: Vec<(f64, f64)> = s.points.iter().map(|&(x, y)| (self.tx(x), self.ty(y))).filter(|(x, y)| x.is_finite() && y.is_finite()).map(|(x, y)| (sx(x), sy(y))).collect();
            if s.scatter {
                for (x, y) in &mapped {
                    let _ = writeln!(out, r#"<circle cx="{x:.1}" cy="{y:.1}" r="3" fill="{color}"/>"#);
                }
            } else if !mapped.is_empty() {
                let path: Vec<String> = mapped.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
                let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
            }
            let ly = MARGIN + 14.0 + 16.0 * k as f64;
            let _ = writeln!(out, r#"<text x="{}" y="{ly}" fill="{color}" text-anchor="end">{}</text>"#, WIDTH - MARGIN - 8.0, escape(&s.name));
        }
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn svg_is_well_formed() {
        let svg = Plot::new("a < b", "x", "y").line("s", vec![(1.0, 2.0), (2.0, 3.0)]).scatter("t", vec![(1.5, 2.5)]).log_log().render();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a &lt; b") && svg.contains("<polyline") && svg.contains("<circle"));
    }
}
