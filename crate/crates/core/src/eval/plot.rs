use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::report::EvalReport;
use crate::error::Result;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 48.0;

struct Line<'a> {
    label: &'a str,
    color: &'a str,
    y: &'a [f64],
    band: Option<&'a [f64]>,
}

fn bounds(lines: &[Line<'_>]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for l in lines {
        for (i, &y) in l.y.iter().enumerate() {
            let s = l.band.map_or(0.0, |b| b[i]);
            lo = lo.min(y - s);
            hi = hi.max(y + s);
        }
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn chart(title: &str, xlabel: &str, lines: &[Line<'_>]) -> String {
    let len = lines.iter().map(|l| l.y.len()).max().unwrap_or(0);
    let (ylo, yhi) = bounds(lines);
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let x_of = |i: usize| LEFT + if len > 1 { pw * i as f64 / (len - 1) as f64 } else { pw / 2.0 };
    let y_of = |y: f64| TOP + ph * (1.0 - (y - ylo) / (yhi - ylo));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{title}</text>"#, LEFT + pw / 2.0);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let y = ylo + (yhi - ylo) * k as f64 / 4.0;
        let py = y_of(y);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{py:.1}" x2="{}" y2="{py:.1}" stroke="#ddd"/><text x="{}" y="{:.1}" text-anchor="end">{y:.3}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            py + 4.0
        );
    }
    if len > 0 {
        let step = (len / 8).max(1);
        for i in (0..len).step_by(step) {
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{}" text-anchor="middle">{i}</text>"#,
                x_of(i),
                TOP + ph + 16.0
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#,
        LEFT + pw / 2.0,
        H - 10.0
    );
    for (k, l) in lines.iter().enumerate() {
        if let Some(b) = l.band {
            let mut pts: Vec<String> = (0..l.y.len())
                .map(|i| format!("{:.1},{:.1}", x_of(i), y_of(l.y[i] + b[i])))
                .collect();
            pts.extend((0..l.y.len()).rev().map(|i| format!("{:.1},{:.1}", x_of(i), y_of(l.y[i] - b[i]))));
            let _ = writeln!(
                s,
                r#"<polygon points="{}" fill="{}" fill-opacity="0.2" stroke="none"/>"#,
                pts.join(" "),
                l.color
            );
        }
        let pts: Vec<String> = l
            .y
            .iter()
            .enumerate()
            .map(|(i, &y)| format!("{:.1},{:.1}", x_of(i), y_of(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            pts.join(" "),
            l.color
        );
        let ly = TOP + 16.0 + 20.0 * k as f64;
        let lx = W - RIGHT + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="3"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            l.color,
            lx + 26.0,
            ly + 4.0,
            l.label
        );
    }
    s.push_str("</svg>\n");
    s
}

/// One `<stat>.svg` per statistic in the report plus `degree_distribution.svg`.
pub fn write_plots(report: &EvalReport, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (id, stat) in &report.per_stat {
        let svg = chart(
            id.name(),
            "t",
            &[
                Line {
                    label: "test",
                    color: "#1f77b4",
                    y: &stat.test_curve.mean,
                    band: Some(&stat.test_curve.std),
                },
                Line {
                    label: "samples",
                    color: "#d62728",
                    y: &stat.sample_curve.mean,
                    band: Some(&stat.sample_curve.std),
                },
            ],
        );
        let path = dir.join(format!("{}.svg", id.name()));
        fs::write(&path, svg)?;
        written.push(path);
    }
    let svg = chart(
        "final degree distribution",
        "degree",
        &[
            Line {
                label: "test",
                color: "#1f77b4",
                y: &report.final_degree.test,
                band: None,
            },
            Line {
                label: "samples",
                color: "#d62728",
                y: &report.final_degree.samples,
                band: None,
            },
        ],
    );
    let path = dir.join("degree_distribution.svg");
    fs::write(&path, svg)?;
    written.push(path);
    Ok(written)
}
