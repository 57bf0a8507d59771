//! Self-contained SVG line charts of learning curves.
//!
//! Fixed `800×500` viewBox. The plot area spans x ∈ [70, 620] and
//! y ∈ [40, 440]; cumulative epoch 1..E maps linearly onto the x range and
//! accuracy 0..1 onto y (1 at the top). The legend sits right of the plot.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::learn::{LearningCurve, Split};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const X0: f64 = 70.0;
const X1: f64 = 620.0;
const Y0: f64 = 40.0;
const Y1: f64 = 440.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Epoch count of each phase, keyed by phase number.
fn phase_lengths(curve: &LearningCurve) -> BTreeMap<usize, usize> {
    let mut lengths = BTreeMap::new();
    for e in &curve.entries {
        let len = lengths.entry(e.phase).or_insert(0);
        *len = (*len).max(e.epoch);
    }
    lengths
}

pub fn render_svg(curve: &LearningCurve, title: &str) -> String {
    let lengths = phase_lengths(curve);
    let mut offsets = BTreeMap::new();
    let mut total = 0usize;
    for (&phase, &len) in &lengths {
        offsets.insert(phase, total);
        total += len;
    }
    let x_of = |cum: f64| {
        if total <= 1 {
            (X0 + X1) / 2.0
        } else {
            X0 + (cum - 1.0) / (total as f64 - 1.0) * (X1 - X0)
        }
    };
    let y_of = |acc: f64| Y1 - acc * (Y1 - Y0);

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(out, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#, (X0 + X1) / 2.0, escape(title))
        .unwrap();

    // axes and grid
    for k in 0..=5 {
        let acc = k as f64 / 5.0;
        let y = y_of(acc);
        writeln!(out, r##"<line x1="{X0}" y1="{y:.2}" x2="{X1}" y2="{y:.2}" stroke="#e0e0e0"/>"##).unwrap();
        writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{acc:.1}</text>"#, X0 - 6.0, y + 4.0).unwrap();
    }
    writeln!(out, r#"<rect x="{X0}" y="{Y0}" width="{}" height="{}" fill="none" stroke="black"/>"#, X1 - X0, Y1 - Y0).unwrap();
    writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">epoch</text>"#, (X0 + X1) / 2.0, Y1 + 36.0).unwrap();
    writeln!(
        out,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">accuracy</text>"#,
        (Y0 + Y1) / 2.0,
        (Y0 + Y1) / 2.0
    )
    .unwrap();
    let tick_step = (total / 8).max(1);
    for cum in (1..=total).filter(|c| (c - 1) % tick_step == 0 || *c == total) {
        writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{cum}</text>"#, x_of(cum as f64), Y1 + 16.0).unwrap();
    }

    // phase boundaries
    for (&phase, &offset) in &offsets {
        if offset == 0 {
            continue;
        }
        let x = x_of(offset as f64 + 0.5);
        writeln!(out, r##"<line x1="{x:.2}" y1="{Y0}" x2="{x:.2}" y2="{Y1}" stroke="#555555" stroke-dasharray="6,4"/>"##).unwrap();
        writeln!(out, r##"<text x="{:.2}" y="{:.2}" fill="#555555">phase {phase}</text>"##, x + 4.0, Y0 + 14.0).unwrap();
    }

    // one polyline per (task, split)
    let tasks = curve.tasks();
    let mut legend_row = 0;
    for (ti, task) in tasks.iter().enumerate() {
        let color = PALETTE[ti % PALETTE.len()];
        for split in [Split::Train, Split::Test] {
            let points: Vec<String> = curve
                .entries
                .iter()
                .filter(|e| &e.task == task && e.split == split)
                .map(|e| format!("{:.2},{:.2}", x_of((offsets[&e.phase] + e.epoch) as f64), y_of(e.accuracy)))
                .collect();
            if points.is_empty() {
                continue;
            }
            let dash = if split == Split::Train { r#" stroke-dasharray="4,3""# } else { "" };
            writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.8"{dash} points="{}"/>"#,
                points.join(" ")
            )
            .unwrap();
            let ly = Y0 + 10.0 + 20.0 * legend_row as f64;
            writeln!(out, r#"<line x1="640" y1="{ly:.2}" x2="664" y2="{ly:.2}" stroke="{color}" stroke-width="1.8"{dash}/>"#)
                .unwrap();
            writeln!(out, r#"<text x="670" y="{:.2}">{} ({})</text>"#, ly + 4.0, escape(task), split.as_str()).unwrap();
            legend_row += 1;
        }
    }
    out.push_str("</svg>\n");
    out
}
