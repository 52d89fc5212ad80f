//! Swimmer models: shape charts, grand resistance matrices, shape-force
//! vectors and the control fields of the driftless system.
//!
//! Every main model is a pair of straight links hinged at the body origin,
//! the `+` link along angle `σ` and the `−` link along `−σ` (all in the body
//! frame). The models differ only in how the shape coordinates set the two
//! link lengths and in the force exerted by the non-angular shape rates.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::se2::{rot, Inverse3, Mat2, Mat3, Twist, Vec2, Vec3};

/// Drag ratios `C⊥/C∥` accepted by certification lie in `(1, RATIO_MAX]`.
pub const RATIO_MAX: f64 = 2.0;

/// Anisotropic drag coefficients of resistive force theory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DragPair {
    pub c_par: f64,
    pub c_perp: f64,
}

impl Default for DragPair {
    fn default() -> Self {
        DragPair { c_par: 1.0, c_perp: 2.0 }
    }
}

impl DragPair {
    pub fn new(c_par: f64, c_perp: f64) -> Result<DragPair> {
        let d = DragPair { c_par, c_perp };
        d.validate()?;
        Ok(d)
    }

    /// Drag pair with `C∥ = 1` and the given ratio.
    pub fn from_ratio(kappa: f64) -> Result<DragPair> {
        DragPair::new(1.0, kappa)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_par.is_finite() && self.c_perp.is_finite()) {
            return Err(Error::NonFinite("drag coefficients"));
        }
        if self.c_par <= 0.0 || self.c_perp <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "drag coefficients must be positive, got ({}, {})",
                self.c_par, self.c_perp
            )));
        }
        Ok(())
    }

    pub fn ratio(&self) -> f64 {
        self.c_perp / self.c_par
    }

    /// Whether the ratio lies in the slender-body regime `(1, 2]`.
    pub fn in_regime(&self) -> bool {
        let k = self.ratio();
        k > 1.0 && k <= RATIO_MAX
    }

    pub fn scaled(&self, lambda: f64) -> DragPair {
        DragPair { c_par: lambda * self.c_par, c_perp: lambda * self.c_perp }
    }

    // J = diag(C∥, C⊥) expressed in the frame rotated by `alpha`.
    fn rotated(&self, alpha: f64) -> Mat2 {
        let (s, c) = alpha.sin_cos();
        let off = (self.c_par - self.c_perp) * c * s;
        Mat2([[self.c_par * c * c + self.c_perp * s * s, off], [off, self.c_par * s * s + self.c_perp * c * c]])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelId {
    Stretching,
    Sliding,
    Growing,
    Telescopic,
    /// Sliding swimmer with the hinge frozen at the midpoint; only `σ` moves.
    #[serde(alias = "scallop_toy")]
    Scallop,
    /// One-dimensional two-block crawler with a single extension coordinate.
    #[serde(alias = "crawler_toy")]
    Crawler,
}

impl ModelId {
    pub const ALL: [ModelId; 6] = [
        ModelId::Stretching,
        ModelId::Sliding,
        ModelId::Growing,
        ModelId::Telescopic,
        ModelId::Scallop,
        ModelId::Crawler,
    ];

    pub const MAIN: [ModelId; 4] = [ModelId::Stretching, ModelId::Sliding, ModelId::Growing, ModelId::Telescopic];

    /// Number of shape coordinates `n`.
    pub fn shape_dim(self) -> usize {
        self.coord_names().len()
    }

    /// Number of controls `m`; equal to `n` for every model here.
    pub fn controls(self) -> usize {
        self.shape_dim()
    }

    pub fn coord_names(self) -> &'static [&'static str] {
        match self {
            ModelId::Stretching => &["sigma", "gamma_plus", "gamma_minus"],
            ModelId::Sliding => &["sigma", "a"],
            ModelId::Growing => &["sigma", "b_plus", "b_minus"],
            ModelId::Telescopic => &["sigma", "a_hat_plus", "a_hat_minus"],
            ModelId::Scallop => &["sigma"],
            ModelId::Crawler => &["s"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelId::Stretching => "stretching",
            ModelId::Sliding => "sliding",
            ModelId::Growing => "growing",
            ModelId::Telescopic => "telescopic",
            ModelId::Scallop => "scallop",
            ModelId::Crawler => "crawler",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = Error;
    fn from_str(s: &str) -> Result<ModelId> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "stretching" => Ok(ModelId::Stretching),
            "sliding" => Ok(ModelId::Sliding),
            "growing" => Ok(ModelId::Growing),
            "telescopic" => Ok(ModelId::Telescopic),
            "scallop" | "scallop_toy" | "scalloptoy" => Ok(ModelId::Scallop),
            "crawler" | "crawler_toy" | "crawlertoy" => Ok(ModelId::Crawler),
            _ => Err(Error::InvalidParams(format!("unknown model '{s}'"))),
        }
    }
}

fn default_ell() -> f64 {
    1.0
}

fn default_l_max() -> f64 {
    10.0
}

/// Geometric parameters shared by the models.
///
/// `total_length` is the wire length of the sliding swimmer and the outer
/// section length of the telescopic one; `beta` is the sliding hinge margin.
/// `ell` is the reference strain used for the stretching reference shape,
/// `l_max` caps the growing link lengths and `a_hat_min` is the telescopic
/// protrusion lower bound (defaults to `−10·L`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub total_length: f64,
    pub beta: f64,
    #[serde(default = "default_ell")]
    pub ell: f64,
    #[serde(default = "default_l_max")]
    pub l_max: f64,
    #[serde(default)]
    pub a_hat_min: Option<f64>,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { total_length: 1.0, beta: 0.125, ell: 1.0, l_max: 10.0, a_hat_min: None }
    }
}

impl ModelParams {
    pub fn new(total_length: f64, beta: f64) -> Result<ModelParams> {
        let p = ModelParams { total_length, beta, ..ModelParams::default() };
        p.validate()?;
        Ok(p)
    }

    /// Parameters for length `L` with the default margin `β = L/8`.
    pub fn with_length(total_length: f64) -> Result<ModelParams> {
        ModelParams::new(total_length, total_length / 8.0)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.total_length, self.beta, self.ell, self.l_max, self.a_hat_min.unwrap_or(-1.0)];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("model parameters"));
        }
        let l = self.total_length;
        if l <= 0.0 {
            return Err(Error::InvalidParams(format!("total length must be positive, got {l}")));
        }
        if !(self.beta > 0.0 && self.beta < l / 4.0) {
            return Err(Error::InvalidParams(format!(
                "beta must lie in (0, L/4) = (0, {}), got {}",
                l / 4.0,
                self.beta
            )));
        }
        if self.ell <= 0.0 || self.l_max <= 0.0 {
            return Err(Error::InvalidParams("ell and l_max must be positive".into()));
        }
        if self.a_hat_lower() >= 0.0 {
            return Err(Error::InvalidParams("a_hat_min must be negative".into()));
        }
        Ok(())
    }

    pub fn a_hat_lower(&self) -> f64 {
        self.a_hat_min.unwrap_or(-10.0 * self.total_length)
    }
}

/// Model-tagged shape coordinates; unused trailing slots are zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeVector {
    model: ModelId,
    coords: [f64; 3],
}

impl ShapeVector {
    pub fn new(model: ModelId, coords: &[f64]) -> Result<ShapeVector> {
        let n = model.shape_dim();
        if coords.len() != n {
            return Err(Error::ChannelMismatch { expected: n, got: coords.len() });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("shape coordinates"));
        }
        let mut buf = [0.0; 3];
        buf[..n].copy_from_slice(coords);
        Ok(ShapeVector { model, coords: buf })
    }

    pub(crate) fn from_raw(model: ModelId, coords: [f64; 3]) -> ShapeVector {
        ShapeVector { model, coords }
    }

    /// Reference shape at which the closed-form brackets are published.
    pub fn reference(model: ModelId, params: &ModelParams) -> ShapeVector {
        let l = params.total_length;
        let coords = match model {
            ModelId::Stretching => [FRAC_PI_4, params.ell, params.ell],
            ModelId::Sliding => [FRAC_PI_4, -l / 2.0, 0.0],
            ModelId::Growing => [FRAC_PI_4, l, l],
            ModelId::Telescopic => [FRAC_PI_4, -l, -l],
            ModelId::Scallop => [FRAC_PI_4, 0.0, 0.0],
            ModelId::Crawler => [0.0; 3],
        };
        ShapeVector { model, coords }
    }

    pub fn model(&self) -> ModelId {
        self.model
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.model.shape_dim()]
    }

    pub(crate) fn raw(&self) -> [f64; 3] {
        self.coords
    }

    pub fn get(&self, k: usize) -> f64 {
        self.coords()[k]
    }

    pub fn with_coord(&self, k: usize, value: f64) -> ShapeVector {
        let mut s = *self;
        s.coords[k] = value;
        s
    }
}

/// A violated shape-space constraint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundsViolation {
    pub coord: &'static str,
    pub value: f64,
}

impl From<BoundsViolation> for Error {
    fn from(v: BoundsViolation) -> Error {
        Error::ShapeOutOfBounds { coord: v.coord, value: v.value, time: None }
    }
}

/// Checks every shape constraint strictly; reports the first violated one.
pub fn shape_bounds_check(shape: &ShapeVector, params: &ModelParams) -> std::result::Result<(), BoundsViolation> {
    let model = shape.model();
    let names = model.coord_names();
    let c = shape.coords();
    let fail = |k: usize| Err(BoundsViolation { coord: names[k], value: c[k] });
    let inside = |v: f64, lo: f64, hi: f64| v > lo && v < hi;
    let pi = std::f64::consts::PI;
    let l = params.total_length;
    match model {
        ModelId::Crawler => {
            if !c[0].is_finite() {
                return fail(0);
            }
        }
        _ => {
            if !inside(c[0], 0.0, pi) {
                return fail(0);
            }
        }
    }
    let (lo, hi) = match model {
        ModelId::Stretching => (0.0, f64::INFINITY),
        ModelId::Sliding => (-l + params.beta, -params.beta),
        ModelId::Growing => (0.0, params.l_max),
        ModelId::Telescopic => (params.a_hat_lower(), 0.0),
        ModelId::Scallop | ModelId::Crawler => return Ok(()),
    };
    if let Some(k) = (1..c.len()).find(|&k| !inside(c[k], lo, hi)) {
        return fail(k);
    }
    Ok(())
}

/// Model, drag and geometry bundled as the context of every field evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Swimmer {
    pub model: ModelId,
    pub drag: DragPair,
    pub params: ModelParams,
}

/// Control field columns at one shape: twist parts `ξᵢ`; the shape block is
/// the identity for every model, so it is implied rather than stored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlFieldMatrix {
    model: ModelId,
    twists: [Twist; 3],
}

impl ControlFieldMatrix {
    pub fn controls(&self) -> usize {
        self.model.controls()
    }

    pub fn shape_dim(&self) -> usize {
        self.model.shape_dim()
    }

    pub fn twist(&self, i: usize) -> Twist {
        self.twists[..self.controls()][i]
    }

    pub fn twists(&self) -> &[Twist] {
        &self.twists[..self.controls()]
    }

    /// Shape block entry `F[k][i]`.
    pub fn shape_entry(&self, k: usize, i: usize) -> f64 {
        if k == i {
            1.0
        } else {
            0.0
        }
    }

    /// Column `i` as a `(3 + n)`-vector.
    pub fn column(&self, i: usize) -> Vec<f64> {
        let t = self.twist(i);
        let mut col = vec![t.vx, t.vy, t.omega];
        col.extend((0..self.shape_dim()).map(|k| self.shape_entry(k, i)));
        col
    }

    /// Body twist `Σ ξᵢ uᵢ`.
    pub fn apply(&self, u: &[f64]) -> Twist {
        let mut v = Vec3::ZERO;
        for (t, ui) in self.twists().iter().zip(u) {
            v = v + t.as_vec3().scale(*ui);
        }
        Twist::from_vec3(v)
    }
}

// Two-link geometry: hinge angle and the lengths of the `+` and `−` links.
struct Links {
    sigma: f64,
    plus: f64,
    minus: f64,
}

impl Swimmer {
    pub fn new(model: ModelId, drag: DragPair, params: ModelParams) -> Result<Swimmer> {
        drag.validate()?;
        params.validate()?;
        Ok(Swimmer { model, drag, params })
    }

    /// Default drag `(1, 2)` and unit length.
    pub fn with_defaults(model: ModelId) -> Swimmer {
        Swimmer { model, drag: DragPair::default(), params: ModelParams::default() }
    }

    pub fn reference_shape(&self) -> ShapeVector {
        ShapeVector::reference(self.model, &self.params)
    }

    pub fn shape(&self, coords: &[f64]) -> Result<ShapeVector> {
        ShapeVector::new(self.model, coords)
    }

    fn check(&self, shape: &ShapeVector) -> Result<()> {
        if shape.model() != self.model {
            return Err(Error::InvalidParams(format!(
                "shape belongs to model {}, swimmer is {}",
                shape.model(),
                self.model
            )));
        }
        shape_bounds_check(shape, &self.params)?;
        Ok(())
    }

    fn links(&self, c: [f64; 3]) -> Links {
        let l = self.params.total_length;
        let (plus, minus) = match self.model {
            ModelId::Stretching | ModelId::Growing => (c[1], c[2]),
            ModelId::Sliding => (-c[1], l + c[1]),
            ModelId::Telescopic => (l - c[1], l - c[2]),
            ModelId::Scallop => (l / 2.0, l / 2.0),
            ModelId::Crawler => unreachable!("crawler has no links"),
        };
        Links { sigma: c[0], plus, minus }
    }

    pub fn grand_resistance(&self, shape: &ShapeVector) -> Result<Mat3> {
        self.check(shape)?;
        Ok(self.resistance_raw(shape.raw()))
    }

    fn resistance_raw(&self, c: [f64; 3]) -> Mat3 {
        let DragPair { c_par, c_perp } = self.drag;
        if self.model == ModelId::Crawler {
            let k = 2.0 * c_par;
            return Mat3([[k, 0.0, 0.0], [0.0, k, 0.0], [0.0, 0.0, k]]);
        }
        let Links { sigma, plus, minus } = self.links(c);
        let a = self.drag.rotated(sigma).scale(plus) + self.drag.rotated(-sigma).scale(minus);
        let d = (rot(sigma) * Vec2::E2).scale(plus * plus) + (rot(-sigma) * Vec2::E2).scale(minus * minus);
        let cc = c_perp / 3.0 * (plus.powi(3) + minus.powi(3));
        Mat3::from_blocks(a, d.scale(c_perp / 2.0), cc)
    }

    /// Force/torque vectors pairing with each shape rate.
    pub fn shape_force_fields(&self, shape: &ShapeVector) -> Result<Vec<Vec3>> {
        self.check(shape)?;
        let v = self.forces_raw(shape.raw());
        Ok(v[..self.model.controls()].to_vec())
    }

    fn forces_raw(&self, c: [f64; 3]) -> [Vec3; 3] {
        let DragPair { c_par, c_perp } = self.drag;
        if self.model == ModelId::Crawler {
            return [Vec3([-c_par, 0.0, 0.0]), Vec3::ZERO, Vec3::ZERO];
        }
        let Links { sigma, plus, minus } = self.links(c);
        let (rp, rm) = (rot(sigma), rot(-sigma));
        let lin = (rp * Vec2::E2).scale(plus * plus) - (rm * Vec2::E2).scale(minus * minus);
        let v1 = Vec3::stack(lin.scale(c_perp / 2.0), c_perp / 3.0 * (plus.powi(3) - minus.powi(3)));
        let tp = rp * Vec2::E1;
        let tm = rm * Vec2::E1;
        match self.model {
            ModelId::Stretching => {
                [v1, Vec3::stack(tp.scale(c_par / 2.0 * c[1]), 0.0), Vec3::stack(tm.scale(c_par / 2.0 * c[2]), 0.0)]
            }
            ModelId::Sliding => [v1, Vec3::stack((tm.scale(minus) - tp.scale(plus)).scale(c_par), 0.0), Vec3::ZERO],
            ModelId::Growing => [v1, Vec3::ZERO, Vec3::ZERO],
            ModelId::Telescopic => {
                [v1, Vec3::stack(tp.scale(c_par * c[1]), 0.0), Vec3::stack(tm.scale(c_par * c[2]), 0.0)]
            }
            ModelId::Scallop => [v1, Vec3::ZERO, Vec3::ZERO],
            ModelId::Crawler => unreachable!(),
        }
    }

    pub fn control_fields(&self, shape: &ShapeVector) -> Result<ControlFieldMatrix> {
        self.check(shape)?;
        self.control_fields_raw(shape.raw())
    }

    // Caller guarantees the shape is in bounds.
    pub(crate) fn control_fields_raw(&self, c: [f64; 3]) -> Result<ControlFieldMatrix> {
        let inv = Inverse3::new(&self.resistance_raw(c))?;
        let forces = self.forces_raw(c);
        let mut twists = [Twist::ZERO; 3];
        for i in 0..self.model.controls() {
            twists[i] = Twist::from_vec3(-inv.solve(forces[i]));
        }
        Ok(ControlFieldMatrix { model: self.model, twists })
    }

    pub(crate) fn in_bounds(&self, c: [f64; 3]) -> std::result::Result<(), BoundsViolation> {
        shape_bounds_check(&ShapeVector::from_raw(self.model, c), &self.params)
    }
}

pub fn grand_resistance(model: ModelId, shape: &ShapeVector, drag: DragPair, params: ModelParams) -> Result<Mat3> {
    Swimmer::new(model, drag, params)?.grand_resistance(shape)
}

pub fn shape_force_fields(
    model: ModelId,
    shape: &ShapeVector,
    drag: DragPair,
    params: ModelParams,
) -> Result<Vec<Vec3>> {
    Swimmer::new(model, drag, params)?.shape_force_fields(shape)
}

pub fn control_fields(
    model: ModelId,
    shape: &ShapeVector,
    drag: DragPair,
    params: ModelParams,
) -> Result<ControlFieldMatrix> {
    Swimmer::new(model, drag, params)?.control_fields(shape)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{PI, SQRT_2};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn stretching() -> Swimmer {
        Swimmer::with_defaults(ModelId::Stretching)
    }

    #[test]
    fn bounds_examples() {
        let p = ModelParams::default();
        let s = ShapeVector::new(ModelId::Stretching, &[PI / 4.0, 1.0, 1.0]).unwrap();
        assert!(shape_bounds_check(&s, &p).is_ok());
        let s = ShapeVector::new(ModelId::Stretching, &[0.0, 1.0, 1.0]).unwrap();
        assert_eq!(shape_bounds_check(&s, &p).unwrap_err().coord, "sigma");
        let s = ShapeVector::new(ModelId::Sliding, &[PI / 4.0, -0.5]).unwrap();
        assert!(shape_bounds_check(&s, &p).is_ok());
    }

    #[test]
    fn bounds_name_the_coordinate() {
        let p = ModelParams::default();
        let cases: [(ModelId, &[f64], &str); 5] = [
            (ModelId::Stretching, &[1.0, 1.0, -0.1], "gamma_minus"),
            (ModelId::Sliding, &[1.0, -0.1], "a"),
            (ModelId::Sliding, &[1.0, -0.9], "a"),
            (ModelId::Growing, &[1.0, 10.0, 1.0], "b_plus"),
            (ModelId::Telescopic, &[1.0, -1.0, 0.0], "a_hat_minus"),
        ];
        for (m, c, name) in cases {
            let s = ShapeVector::new(m, c).unwrap();
            assert_eq!(shape_bounds_check(&s, &p).unwrap_err().coord, name, "{m}");
        }
        let s = ShapeVector::new(ModelId::Telescopic, &[1.0, -10.5, -1.0]).unwrap();
        assert_eq!(shape_bounds_check(&s, &p).unwrap_err().coord, "a_hat_plus");
    }

    #[test]
    fn shape_length_is_checked() {
        assert!(matches!(
            ShapeVector::new(ModelId::Sliding, &[1.0, 2.0, 3.0]),
            Err(Error::ChannelMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1.0, 0.125).is_ok());
        assert!(ModelParams::new(1.0, 0.25).is_err());
        assert!(ModelParams::new(-1.0, 0.1).is_err());
        assert!(DragPair::new(0.0, 1.0).is_err());
        assert!(DragPair::new(1.0, 2.0).unwrap().in_regime());
        assert!(!DragPair::new(1.0, 1.0).unwrap().in_regime());
        assert!(!DragPair::new(1.0, 2.5).unwrap().in_regime());
    }

    #[test]
    fn stretching_reference_resistance() {
        let sw = stretching();
        let r = sw.grand_resistance(&sw.reference_shape()).unwrap();
        let want = [[3.0, 0.0, 0.0], [0.0, 3.0, SQRT_2], [0.0, SQRT_2, 4.0 / 3.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!(close(r.0[i][j], want[i][j], 1e-15), "{i}{j}: {}", r.0[i][j]);
            }
        }
    }

    #[test]
    fn growing_reference_a_block() {
        let sw = Swimmer::with_defaults(ModelId::Growing);
        let r = sw.grand_resistance(&sw.reference_shape()).unwrap();
        assert!(close(r.0[0][0], 3.0, 1e-15) && close(r.0[1][1], 3.0, 1e-15));
        assert!(close(r.0[0][1], 0.0, 1e-15));
    }

    // Oracle: sum of the per-link resistances obtained by integrating the
    // local drag law along each link with a midpoint rule.
    fn quadrature_resistance(sigma: f64, lp: f64, lm: f64, drag: DragPair) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        let n = 4000;
        for (alpha, len) in [(sigma, lp), (-sigma, lm)] {
            let (s, c) = f64::sin_cos(alpha);
            let t = [c, s];
            let nn = [-s, c];
            for k in 0..n {
                let eta = (k as f64 + 0.5) / n as f64 * len;
                let ds = len / n as f64;
                let x = [eta * c, eta * s];
                // Columns: unit body velocities vx, vy, omega at point x.
                let cols = [[1.0, 0.0], [0.0, 1.0], [-x[1], x[0]]];
                let force = |v: [f64; 2]| {
                    let vt = v[0] * t[0] + v[1] * t[1];
                    let vn = v[0] * nn[0] + v[1] * nn[1];
                    [
                        drag.c_par * vt * t[0] + drag.c_perp * vn * nn[0],
                        drag.c_par * vt * t[1] + drag.c_perp * vn * nn[1],
                    ]
                };
                for (j, v) in cols.iter().enumerate() {
                    let f = force(*v);
                    let torque = x[0] * f[1] - x[1] * f[0];
                    m[0][j] += f[0] * ds;
                    m[1][j] += f[1] * ds;
                    m[2][j] += torque * ds;
                }
            }
        }
        Mat3(m)
    }

    #[test]
    fn resistance_matches_quadrature() {
        let drag = DragPair::new(1.0, 1.7).unwrap();
        let params = ModelParams::default();
        let cases: [(ModelId, [f64; 3], f64, f64); 4] = [
            (ModelId::Stretching, [0.7, 1.3, 0.6], 1.3, 0.6),
            (ModelId::Sliding, [1.1, -0.3, 0.0], 0.3, 0.7),
            (ModelId::Growing, [2.0, 0.4, 2.5], 0.4, 2.5),
            (ModelId::Telescopic, [0.5, -0.2, -1.5], 1.2, 2.5),
        ];
        for (model, c, lp, lm) in cases {
            let sw = Swimmer::new(model, drag, params).unwrap();
            let shape = ShapeVector::new(model, &c[..model.shape_dim()]).unwrap();
            let r = sw.grand_resistance(&shape).unwrap();
            let q = quadrature_resistance(c[0], lp, lm, drag);
            for i in 0..3 {
                for j in 0..3 {
                    assert!(close(r.0[i][j], q.0[i][j], 1e-5), "{model} {i}{j}");
                }
            }
        }
    }

    #[test]
    fn stretching_shape_forces() {
        let sw = stretching();
        let v = sw.shape_force_fields(&sw.reference_shape()).unwrap();
        assert_eq!(v.len(), 3);
        assert!(close(v[0][0], -SQRT_2, 1e-15) && close(v[0][1], 0.0, 1e-15));
        assert!(close(v[0][2], 0.0, 1e-15));
        assert!(close(v[1][0], SQRT_2 / 4.0, 1e-15) && close(v[1][1], SQRT_2 / 4.0, 1e-15));
        assert_eq!(v[1][2], 0.0);
    }

    #[test]
    fn growing_has_no_growth_forces() {
        let sw = Swimmer::with_defaults(ModelId::Growing);
        for c in [[0.3, 0.2, 4.0], [2.9, 7.0, 1.0]] {
            let v = sw.shape_force_fields(&sw.shape(&c).unwrap()).unwrap();
            assert_eq!(v[1], Vec3::ZERO);
            assert_eq!(v[2], Vec3::ZERO);
        }
    }

    #[test]
    fn stretching_control_columns() {
        let sw = stretching();
        let f = sw.control_fields(&sw.reference_shape()).unwrap();
        let g1 = f.column(0);
        let want1 = [SQRT_2 / 3.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        let g2 = f.column(1);
        let want2 = [-SQRT_2 / 12.0, -SQRT_2 / 6.0, 0.25, 0.0, 1.0, 0.0];
        for k in 0..6 {
            assert!(close(g1[k], want1[k], 1e-15), "g1[{k}] = {}", g1[k]);
            assert!(close(g2[k], want2[k], 1e-15), "g2[{k}] = {}", g2[k]);
        }
    }

    // Oracle for the second column: invert the block system by hand.
    #[test]
    fn stretching_g2_by_block_elimination() {
        let (a, d, c) = (3.0, SQRT_2, 4.0 / 3.0);
        let v = [SQRT_2 / 4.0, SQRT_2 / 4.0, 0.0];
        // [[a,0,0],[0,a,d],[0,d,c]] x = -v
        let x0 = -v[0] / a;
        let det = a * c - d * d;
        let x1 = (-v[1] * c + d * v[2]) / det;
        let x2 = (-a * v[2] + d * v[1]) / det;
        let sw = stretching();
        let t = sw.control_fields(&sw.reference_shape()).unwrap().twist(1);
        assert!(close(t.vx, x0, 1e-15) && close(t.vy, x1, 1e-15) && close(t.omega, x2, 1e-15));
    }

    #[test]
    fn scallop_has_one_column() {
        let sw = Swimmer::with_defaults(ModelId::Scallop);
        let f = sw.control_fields(&sw.reference_shape()).unwrap();
        assert_eq!(f.controls(), 1);
        assert_eq!(f.column(0).len(), 4);
        assert_eq!(f.column(0)[3], 1.0);
    }

    #[test]
    fn crawler_field_is_half() {
        let sw = Swimmer::with_defaults(ModelId::Crawler);
        let f = sw.control_fields(&sw.shape(&[0.3]).unwrap()).unwrap();
        assert_eq!(f.twist(0), Twist { vx: 0.5, vy: 0.0, omega: 0.0 });
    }

    #[test]
    fn zero_controls_give_zero_twist() {
        for model in ModelId::ALL {
            let sw = Swimmer::with_defaults(model);
            let f = sw.control_fields(&sw.reference_shape()).unwrap();
            assert_eq!(f.apply(&[0.0; 3][..model.controls()]), Twist::ZERO);
        }
    }

    #[test]
    fn symmetric_stretching_has_no_torque_coupling() {
        let sw = stretching();
        for g in [0.5, 1.0, 2.0] {
            let shape = sw.shape(&[PI / 4.0, g, g]).unwrap();
            let r = sw.grand_resistance(&shape).unwrap();
            assert_eq!(r.0[0][2], 0.0);
            assert_eq!(sw.shape_force_fields(&shape).unwrap()[0][2], 0.0);
        }
    }

    #[test]
    fn out_of_bounds_is_an_error() {
        let sw = stretching();
        let bad = sw.shape(&[PI, 1.0, 1.0]).unwrap();
        assert!(matches!(sw.control_fields(&bad), Err(Error::ShapeOutOfBounds { coord: "sigma", .. })));
    }

    pub(crate) fn random_shape(model: ModelId, u: [f64; 3]) -> ShapeVector {
        let sigma = 0.01 + u[0] * (PI - 0.02);
        let c = match model {
            ModelId::Stretching => [sigma, 0.05 + 3.0 * u[1], 0.05 + 3.0 * u[2]],
            ModelId::Sliding => [sigma, -0.87 + 0.74 * u[1], 0.0],
            ModelId::Growing => [sigma, 0.01 + 9.98 * u[1], 0.01 + 9.98 * u[2]],
            ModelId::Telescopic => [sigma, -9.99 + 9.98 * u[1], -9.99 + 9.98 * u[2]],
            ModelId::Scallop => [sigma, 0.0, 0.0],
            ModelId::Crawler => [10.0 * (u[0] - 0.5), 0.0, 0.0],
        };
        ShapeVector::from_raw(model, c)
    }

    proptest! {
        #[test]
        fn resistance_is_symmetric(u0 in 0.0..1.0f64, u1 in 0.0..1.0f64, u2 in 0.0..1.0f64, kappa in 0.2..5.0f64) {
            for model in ModelId::ALL {
                let sw = Swimmer::new(model, DragPair::new(1.0, kappa).unwrap(), ModelParams::default()).unwrap();
                let r = sw.grand_resistance(&random_shape(model, [u0, u1, u2])).unwrap();
                prop_assert_eq!(r, r.transpose());
            }
        }

        #[test]
        fn fields_invariant_under_drag_scaling(u0 in 0.0..1.0f64, u1 in 0.0..1.0f64, u2 in 0.0..1.0f64, lambda in 0.1..10.0f64) {
            for model in ModelId::ALL {
                let sw = Swimmer::new(model, DragPair::new(1.0, 1.6).unwrap(), ModelParams::default()).unwrap();
                let scaled = Swimmer { drag: sw.drag.scaled(lambda), ..sw };
                let s = random_shape(model, [u0, u1, u2]);
                let (a, b) = (sw.control_fields(&s).unwrap(), scaled.control_fields(&s).unwrap());
                for i in 0..model.controls() {
                    let d = a.twist(i).as_vec3() - b.twist(i).as_vec3();
                    prop_assert!(d.max_abs() <= 1e-12 * (1.0 + a.twist(i).as_vec3().max_abs()));
                }
            }
        }
    }
}
