//! Certificates over grids of drag ratios and shapes, evaluated in parallel
//! and reported in grid order.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lie::{certify, Method};
use crate::models::{DragPair, ModelId, ModelParams, ShapeVector, Swimmer};

fn one() -> f64 {
    1.0
}

/// Grid of `κ = C⊥/C∥` values (with fixed `C∥`) crossed with shapes; an
/// empty shape list means the reference shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(default)]
    pub kappas: Vec<f64>,
    #[serde(default = "one")]
    pub c_par: f64,
    #[serde(default)]
    pub shapes: Vec<Vec<f64>>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid { kappas: Vec::new(), c_par: 1.0, shapes: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub kappa: f64,
    pub shape: Vec<f64>,
    pub det: Option<f64>,
    /// Leading principal minors of the grand resistance matrix.
    pub minors: Option<[f64; 3]>,
    pub controllable: Option<bool>,
    pub error: Option<String>,
}

fn evaluate(
    model: ModelId,
    params: &ModelParams,
    c_par: f64,
    kappa: f64,
    coords: &[f64],
    method: Method,
) -> Result<(f64, [f64; 3], bool)> {
    let drag = DragPair::new(c_par, c_par * kappa)?;
    let sw = Swimmer::new(model, drag, *params)?;
    let shape = ShapeVector::new(model, coords)?;
    let minors = sw.grand_resistance(&shape)?.leading_minors();
    let cert = certify(&sw, &shape, method)?;
    Ok((cert.det, minors, cert.controllable))
}

/// One row per grid point, `κ` outermost. Failures land in the row's
/// `error` field instead of aborting the sweep.
pub fn run_sweep(model: ModelId, params: &ModelParams, grid: &SweepGrid, method: Method) -> Vec<SweepRow> {
    let shapes = if grid.shapes.is_empty() {
        vec![ShapeVector::reference(model, params).coords().to_vec()]
    } else {
        grid.shapes.clone()
    };
    let points: Vec<(f64, Vec<f64>)> =
        grid.kappas.iter().flat_map(|k| shapes.iter().map(move |s| (*k, s.clone()))).collect();
    points
        .into_par_iter()
        .enumerate()
        .map(|(index, (kappa, shape))| match evaluate(model, params, grid.c_par, kappa, &shape, method) {
            Ok((det, minors, ok)) => SweepRow {
                index,
                kappa,
                shape,
                det: Some(det),
                minors: Some(minors),
                controllable: Some(ok),
                error: None,
            },
            Err(e) => SweepRow {
                index,
                kappa,
                shape,
                det: None,
                minors: None,
                controllable: None,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn sweep_csv(model: ModelId, rows: &[SweepRow]) -> String {
    let mut out = String::from("index,kappa");
    for name in model.coord_names() {
        write!(out, ",{name}").unwrap();
    }
    out.push_str(",det,minor1,minor2,minor3,controllable,error\n");
    for r in rows {
        write!(out, "{},{}", r.index, r.kappa).unwrap();
        let n = model.shape_dim();
        for k in 0..n {
            write!(out, ",{}", opt(r.shape.get(k))).unwrap();
        }
        let m = r.minors.map(|m| m.map(|x| x.to_string())).unwrap_or_default();
        write!(out, ",{},{},{},{},{}", opt(r.det), m[0], m[1], m[2], opt(r.controllable)).unwrap();
        let err = r.error.as_deref().unwrap_or("").replace(['"', ','], ";");
        writeln!(out, ",{err}").unwrap();
    }
    out
}
