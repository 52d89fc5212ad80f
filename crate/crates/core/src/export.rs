//! CSV, JSON and SVG renderings of trajectories.
//!
//! Numbers are written with the shortest representation that parses back to
//! the same `f64`, so CSV output is both full precision and reproducible.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::se2::Pose;
use crate::sim::{GaitReport, Trajectory};

pub fn csv_header(traj: &Trajectory) -> String {
    let mut h = String::from("t,x,y,theta");
    for name in traj.model.coord_names() {
        h.push(',');
        h.push_str(name);
    }
    h
}

/// One row per sample: `t,x,y,theta,<shape coords>`, LF line endings.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = csv_header(traj);
    out.push('\n');
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let p = &s.pose;
        write!(out, "{t},{},{},{}", p.x(), p.y(), p.theta()).unwrap();
        for c in s.shape.coords() {
            write!(out, ",{c}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Samples plus a provenance block describing the run.
pub fn trajectory_json(traj: &Trajectory, report: Option<&GaitReport>) -> Value {
    let samples: Vec<Value> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, s)| {
            json!({
                "t": t,
                "x": s.pose.x(),
                "y": s.pose.y(),
                "theta": s.pose.theta(),
                "shape": s.shape.coords(),
            })
        })
        .collect();
    let mut doc = json!({
        "provenance": {
            "generator": concat!("microswim ", env!("CARGO_PKG_VERSION")),
            "model": traj.model,
            "drag": traj.drag,
            "params": traj.params,
            "signal": traj.signal,
            "shape_coords": traj.model.coord_names(),
        },
        "samples": samples,
    });
    if let Some(r) = report {
        doc["report"] = serde_json::to_value(r).expect("report serializes");
    }
    doc
}

/// Minimal plot of the `(x, y)` path with optional end-of-cycle markers.
pub fn trajectory_svg(traj: &Trajectory, markers: &[Pose]) -> String {
    let pts: Vec<(f64, f64)> = traj.states.iter().map(|s| (s.pose.x(), s.pose.y())).collect();
    let all = pts.iter().copied().chain(markers.iter().map(|p| (p.x(), p.y())));
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let pad = 0.05 * span;
    let (vx, vy, w, h) = (x0 - pad, -(y1 + pad), (x1 - x0) + 2.0 * pad, (y1 - y0) + 2.0 * pad);
    let w = w.max(1e-9);
    let h = h.max(1e-9);
    let stroke = 0.004 * span;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vx} {vy} {w} {h}" width="600" height="{}">"#,
        (600.0 * h / w).round().clamp(50.0, 2000.0)
    )
    .unwrap();
    out.push_str(r#"<polyline fill="none" stroke="black" stroke-width=""#);
    write!(out, "{stroke}").unwrap();
    out.push_str(r#"" points=""#);
    for (i, (x, y)) in pts.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{x},{}", -y).unwrap();
    }
    out.push_str("\"/>\n");
    for p in markers {
        writeln!(out, r#"<circle cx="{}" cy="{}" r="{}" fill="red"/>"#, p.x(), -p.y(), 3.0 * stroke).unwrap();
    }
    out.push_str("</svg>\n");
    out
}
