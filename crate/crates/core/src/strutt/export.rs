//! File emitters for scan results. Every emitter takes the resolved run
//! configuration and embeds it as a header, and writes no timestamps, so
//! identical configurations give byte-identical files.

use std::fmt::Write as _;

use serde::Serialize;

use super::{SqueezePoint, StruttGrid, ZeroCurve};
use crate::floquet::MotionClass;

pub const CLASS_III_FILL: &str = "#f5e663";
pub const U12_STROKE: &str = "#d62728";
pub const U21_STROKE: &str = "#1f77b4";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn comment_block(config: &serde_json::Value) -> String {
    format!("# config: {config}\n")
}

fn csv_body(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// `beta0,beta1,gamma,class,u11,u12,u21,u22`; failed cells carry class
/// `ERR` and `NaN` values.
pub fn grid_csv(grid: &StruttGrid, config: &serde_json::Value) -> String {
    let rows = grid.cells.iter().map(|c| {
        let mut r = vec![num(c.beta0), num(c.beta1)];
        match (c.u, c.gamma, c.motion_class) {
            (Some(u), Some(g), Some(class)) => {
                r.push(num(g));
                r.push(class.label().to_string());
                r.extend(u.to_array().iter().map(|&x| num(x)));
            }
            _ => {
                r.push("NaN".into());
                r.push("ERR".into());
                r.extend(std::iter::repeat_n("NaN".to_string(), 4));
            }
        }
        r
    });
    comment_block(config) + &csv_body(&["beta0", "beta1", "gamma", "class", "u11", "u12", "u21", "u22"], rows)
}

/// `curve_id,element,beta0,beta1`, one row per polyline vertex.
pub fn curves_csv(curves: &[ZeroCurve], config: &serde_json::Value) -> String {
    let rows = curves.iter().enumerate().flat_map(|(id, c)| {
        c.polyline.iter().map(move |&(b0, b1)| vec![id.to_string(), c.element.to_string(), num(b0), num(b1)])
    });
    comment_block(config) + &csv_body(&["curve_id", "element", "beta0", "beta1"], rows)
}

#[derive(Serialize)]
struct SqueezeDoc<'a> {
    config: &'a serde_json::Value,
    squeeze_points: &'a [SqueezePoint],
}

pub fn squeeze_json(points: &[SqueezePoint], config: &serde_json::Value) -> String {
    serde_json::to_string_pretty(&SqueezeDoc { config, squeeze_points: points }).expect("serializable") + "\n"
}

/// Self-contained SVG map: class III cells filled, `u₁₂ = 0` curves red,
/// `u₂₁ = 0` curves blue, squeeze points as black markers.
pub fn svg_map(
    grid: &StruttGrid,
    red: &[ZeroCurve],
    blue: &[ZeroCurve],
    points: &[SqueezePoint],
    config: &serde_json::Value,
) -> String {
    const W: f64 = 600.0;
    const H: f64 = 600.0;
    const M: f64 = 50.0;
    let s = &grid.spec;
    let span = |lo: f64, hi: f64| if hi > lo { hi - lo } else { 1.0 };
    let (sx, sy) = (span(s.beta0.min, s.beta0.max), span(s.beta1.min, s.beta1.max));
    let x = |b0: f64| M + (b0 - s.beta0.min) / sx * W;
    let y = |b1: f64| M + H - (b1 - s.beta1.min) / sy * H;
    let (dx, dy) = (s.beta0.step() / sx * W, s.beta1.step() / sy * H);
    let (dx, dy) = (if dx > 0.0 { dx } else { W }, if dy > 0.0 { dy } else { H });

    let mut out = String::new();
    let cfg_text = config.to_string().replace("--", "- -");
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        W + 2.0 * M + 170.0,
        H + 2.0 * M,
        W + 2.0 * M + 170.0,
        H + 2.0 * M
    );
    let _ = writeln!(out, "<!-- config: {cfg_text} -->");
    let _ = writeln!(out, r#"<rect x="0" y="0" width="100%" height="100%" style="fill:#ffffff"/>"#);

    // Class III cells, merged into horizontal runs per row.
    let _ = writeln!(out, r#"<g style="fill:{CLASS_III_FILL};stroke:none">"#);
    for j in 0..s.beta1.n {
        let mut i = 0;
        while i < s.beta0.n {
            if grid.cell(i, j).motion_class != Some(MotionClass::IIISqueezing) {
                i += 1;
                continue;
            }
            let start = i;
            while i < s.beta0.n && grid.cell(i, j).motion_class == Some(MotionClass::IIISqueezing) {
                i += 1;
            }
            let c0 = grid.cell(start, j);
            let _ = writeln!(
                out,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}"/>"#,
                x(c0.beta0) - dx / 2.0,
                y(c0.beta1) - dy / 2.0,
                dx * (i - start) as f64,
                dy
            );
        }
    }
    let _ = writeln!(out, "</g>");

    for (curves, colour) in [(red, U12_STROKE), (blue, U21_STROKE)] {
        let _ = writeln!(out, r#"<g style="fill:none;stroke:{colour};stroke-width:1.5">"#);
        for c in curves {
            let pts: Vec<String> = c.polyline.iter().map(|&(a, b)| format!("{:.3},{:.3}", x(a), y(b))).collect();
            let _ = writeln!(out, r#"<polyline points="{}"/>"#, pts.join(" "));
        }
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, r#"<g style="fill:#000000;stroke:#ffffff;stroke-width:1">"#);
    for p in points {
        let _ = writeln!(out, r#"<circle cx="{:.3}" cy="{:.3}" r="4"/>"#, x(p.beta0), y(p.beta1));
    }
    let _ = writeln!(out, "</g>");

    // Frame, axis labels and legend.
    let _ = writeln!(out, r#"<rect x="{M}" y="{M}" width="{W}" height="{H}" style="fill:none;stroke:#000000"/>"#);
    let text = r#"style="font-family:sans-serif;font-size:12px;fill:#000000""#;
    let _ = writeln!(out, r#"<text x="{M}" y="{}" {text}>{:.3}</text>"#, M + H + 16.0, s.beta0.min);
    let _ =
        writeln!(out, r#"<text x="{}" y="{}" text-anchor="end" {text}>{:.3}</text>"#, M + W, M + H + 16.0, s.beta0.max);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" {text}>beta0</text>"#, M + W / 2.0, M + H + 32.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end" {text}>{:.3}</text>"#, M - 4.0, M + H, s.beta1.min);
    let _ =
        writeln!(out, r#"<text x="{}" y="{}" text-anchor="end" {text}>{:.3}</text>"#, M - 4.0, M + 12.0, s.beta1.max);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" {text}>beta1</text>"#, M / 2.0, M + H / 2.0);
    let lx = M + W + 15.0;
    let _ = writeln!(
        out,
        r#"<rect x="{lx}" y="{}" width="14" height="14" style="fill:{CLASS_III_FILL};stroke:#000000"/>"#,
        M
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}" {text}>class III (squeezing)</text>"#, lx + 20.0, M + 11.0);
    let _ =
        writeln!(out, r#"<rect x="{lx}" y="{}" width="14" height="14" style="fill:none;stroke:#000000"/>"#, M + 22.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" {text}>class I / II</text>"#, lx + 20.0, M + 33.0);
    let _ = writeln!(
        out,
        r#"<line x1="{lx}" y1="{}" x2="{}" y2="{}" style="stroke:{U12_STROKE};stroke-width:2"/>"#,
        M + 51.0,
        lx + 14.0,
        M + 51.0
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}" {text}>u12 = 0</text>"#, lx + 20.0, M + 55.0);
    let _ = writeln!(
        out,
        r#"<line x1="{lx}" y1="{}" x2="{}" y2="{}" style="stroke:{U21_STROKE};stroke-width:2"/>"#,
        M + 73.0,
        lx + 14.0,
        M + 73.0
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}" {text}>u21 = 0</text>"#, lx + 20.0, M + 77.0);
    let _ = writeln!(out, r#"<circle cx="{}" cy="{}" r="4" style="fill:#000000"/>"#, lx + 7.0, M + 95.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" {text}>squeeze point</text>"#, lx + 20.0, M + 99.0);
    out.push_str("</svg>\n");
    out
}
