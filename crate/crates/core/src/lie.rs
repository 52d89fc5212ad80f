//! Lie brackets of the control fields, the published closed-form brackets,
//! determinant certificates and the loop-based phase estimate of a bracket.
//!
//! Brackets live on shape × SE(2). With a constant shape block `F`, the
//! twist part of `[Zᵢ, Zⱼ]` at the identity pose is
//! `[ξᵢ, ξⱼ] + ∇ξⱼ·Fᵢ − ∇ξᵢ·Fⱼ` and its shape part vanishes, so nested
//! brackets only need the directional derivative along the leaf operand.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaits::{square_loop, ControlSignal, Piece};
use crate::models::{DragPair, ModelId, ModelParams, ShapeVector, Swimmer};
use crate::se2::{se2_commutator, Mat3, Twist, Vec3};
use crate::sim::{simulate, IntegratorConfig, State};

/// Default relative finite-difference step for the innermost derivative.
pub const DEFAULT_FD_STEP: f64 = 1e-3;

/// Each nesting level multiplies the step by this factor.
pub const FD_STEP_GROWTH: f64 = 4.0;

/// `|det|` above which three brackets are declared independent.
pub const CERTIFICATE_TOL: f64 = 1e-10;

/// Relative tolerance between numeric and closed-form determinants.
pub const CROSS_CHECK_TOL: f64 = 1e-6;

/// Bracket expression with 1-based control indices, e.g. `[1,[1,2]]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BracketSpec {
    Leaf(usize),
    Pair(Box<BracketSpec>, Box<BracketSpec>),
}

impl BracketSpec {
    pub fn leaf(i: usize) -> BracketSpec {
        BracketSpec::Leaf(i)
    }

    pub fn pair(p: BracketSpec, q: BracketSpec) -> BracketSpec {
        BracketSpec::Pair(Box::new(p), Box::new(q))
    }

    /// `[i, j]` on two leaves.
    pub fn bracket(i: usize, j: usize) -> BracketSpec {
        BracketSpec::pair(BracketSpec::Leaf(i), BracketSpec::Leaf(j))
    }

    /// Nesting depth: 0 for a leaf.
    pub fn depth(&self) -> usize {
        match self {
            BracketSpec::Leaf(_) => 0,
            BracketSpec::Pair(p, q) => 1 + p.depth().max(q.depth()),
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        match self {
            BracketSpec::Leaf(i) if *i == 0 || *i > m => {
                Err(Error::InvalidBracket(format!("leaf index {i} outside 1..={m}")))
            }
            BracketSpec::Leaf(_) => Ok(()),
            BracketSpec::Pair(p, q) => {
                p.validate(m)?;
                q.validate(m)
            }
        }
    }
}

impl fmt::Display for BracketSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BracketSpec::Leaf(i) => write!(f, "{i}"),
            BracketSpec::Pair(p, q) => write!(f, "[{p},{q}]"),
        }
    }
}

impl FromStr for BracketSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<BracketSpec> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let spec = parse_spec(&chars, &mut pos)?;
        if pos != chars.len() {
            return Err(Error::InvalidBracket(format!("trailing input in '{s}'")));
        }
        Ok(spec)
    }
}

fn parse_spec(c: &[char], pos: &mut usize) -> Result<BracketSpec> {
    let bad = |msg: &str, at: usize| Error::InvalidBracket(format!("{msg} at offset {at}"));
    match c.get(*pos) {
        Some('[') => {
            *pos += 1;
            let p = parse_spec(c, pos)?;
            if c.get(*pos) != Some(&',') {
                return Err(bad("expected ','", *pos));
            }
            *pos += 1;
            let q = parse_spec(c, pos)?;
            if c.get(*pos) != Some(&']') {
                return Err(bad("expected ']'", *pos));
            }
            *pos += 1;
            Ok(BracketSpec::pair(p, q))
        }
        Some(d) if d.is_ascii_digit() => {
            let start = *pos;
            while c.get(*pos).is_some_and(|d| d.is_ascii_digit()) {
                *pos += 1;
            }
            let digits: String = c[start..*pos].iter().collect();
            digits.parse().map(BracketSpec::Leaf).map_err(|_| bad("bad index", *pos))
        }
        _ => Err(bad("expected '[' or an index", *pos)),
    }
}

impl Serialize for BracketSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BracketSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Bracket evaluated at `(shape, identity)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BracketValue {
    pub spec: BracketSpec,
    pub shape: ShapeVector,
    /// Twist part followed by the shape part.
    pub full: Vec<f64>,
    /// Twist part as a Lie-algebra element.
    pub projected: Vec3,
}

// Twist part plus the (constant) shape direction of a bracket operand.
struct Field {
    twist: Vec3,
    shape: Option<usize>,
}

fn eval(sw: &Swimmer, spec: &BracketSpec, c: [f64; 3], step: f64) -> Result<Field> {
    match spec {
        BracketSpec::Leaf(i) => {
            let f = sw.control_fields_raw(c)?;
            Ok(Field { twist: f.twist(i - 1).as_vec3(), shape: Some(i - 1) })
        }
        BracketSpec::Pair(p, q) => {
            let fp = eval(sw, p, c, step)?;
            let fq = eval(sw, q, c, step)?;
            let mut v = se2_commutator(&Twist::from_vec3(fp.twist), &Twist::from_vec3(fq.twist)).as_vec3();
            if let Some(k) = fp.shape {
                v = v + directional(sw, q, c, k, step)?;
            }
            if let Some(k) = fq.shape {
                v = v - directional(sw, p, c, k, step)?;
            }
            Ok(Field { twist: v, shape: None })
        }
    }
}

// Five-point central difference of `spec`'s twist part along coordinate `k`.
fn directional(sw: &Swimmer, spec: &BracketSpec, c: [f64; 3], k: usize, base: f64) -> Result<Vec3> {
    let rel = base * FD_STEP_GROWTH.powi(spec.depth() as i32);
    let mut h = rel * c[k].abs().max(1.0);
    for attempt in 0..2 {
        let shifted = |m: f64| {
            let mut s = c;
            s[k] += m * h;
            s
        };
        let stencil = [shifted(-2.0), shifted(-1.0), shifted(1.0), shifted(2.0)];
        match stencil.iter().try_for_each(|s| sw.in_bounds(*s)) {
            Ok(()) => {
                let inner = base;
                let f: Vec<Vec3> =
                    stencil.iter().map(|s| eval(sw, spec, *s, inner).map(|f| f.twist)).collect::<Result<_>>()?;
                let d = (f[0] - f[3]) + (f[2] - f[1]).scale(8.0);
                return Ok(d.scale(1.0 / (12.0 * h)));
            }
            Err(v) if attempt == 1 => return Err(v.into()),
            Err(_) => h /= 2.0,
        }
    }
    unreachable!()
}

/// Evaluates a bracket numerically at `(shape, identity)`.
///
/// `fd_step` is the relative step of the innermost finite difference; each
/// nesting level multiplies it by [`FD_STEP_GROWTH`] so that truncation and
/// rounding errors stay balanced across levels.
pub fn bracket_at(sw: &Swimmer, spec: &BracketSpec, shape: &ShapeVector, fd_step: f64) -> Result<BracketValue> {
    if !(fd_step > 0.0 && fd_step.is_finite()) {
        return Err(Error::InvalidParams(format!("fd_step must be positive, got {fd_step}")));
    }
    spec.validate(sw.model.controls())?;
    sw.control_fields(shape)?;
    let f = eval(sw, spec, shape.raw(), fd_step)?;
    let n = sw.model.shape_dim();
    let mut full = f.twist.0.to_vec();
    full.extend((0..n).map(|k| if f.shape == Some(k) { 1.0 } else { 0.0 }));
    Ok(BracketValue { spec: spec.clone(), shape: *shape, full, projected: f.twist })
}

/// Names of the published brackets of one model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosedFormName {
    G3,
    G4,
    G5,
    G6,
}

impl fmt::Display for ClosedFormName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClosedFormName::G3 => "g3",
            ClosedFormName::G4 => "g4",
            ClosedFormName::G5 => "g5",
            ClosedFormName::G6 => "g6",
        };
        f.write_str(s)
    }
}

impl FromStr for ClosedFormName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "g3" => Ok(ClosedFormName::G3),
            "g4" => Ok(ClosedFormName::G4),
            "g5" => Ok(ClosedFormName::G5),
            "g6" => Ok(ClosedFormName::G6),
            _ => Err(Error::InvalidBracket(format!("unknown bracket name '{s}'"))),
        }
    }
}

/// The three published brackets of a model with their specs; empty for the
/// toy models, whose single field generates no brackets.
pub fn published_set(model: ModelId) -> Vec<(ClosedFormName, BracketSpec)> {
    use BracketSpec as B;
    use ClosedFormName::*;
    let l = B::leaf;
    match model {
        ModelId::Stretching | ModelId::Telescopic => {
            vec![(G4, B::bracket(1, 2)), (G5, B::bracket(1, 3)), (G6, B::bracket(2, 3))]
        }
        ModelId::Sliding => {
            vec![(G3, B::bracket(1, 2)), (G4, B::pair(l(1), B::bracket(1, 2))), (G5, B::pair(l(2), B::bracket(1, 2)))]
        }
        ModelId::Growing => vec![(G4, B::bracket(1, 2)), (G5, B::bracket(1, 3)), (G6, B::pair(l(2), B::bracket(1, 2)))],
        ModelId::Scallop | ModelId::Crawler => Vec::new(),
    }
}

/// Published closed form of a bracket at the model's reference shape.
///
/// The telescopic expressions are transcribed as printed and do not agree
/// with the numeric brackets of the model; they are reported for reference
/// only and never used as a cross-check.
pub fn closed_form_bracket(model: ModelId, name: ClosedFormName, drag: DragPair, params: &ModelParams) -> Result<Vec3> {
    use ClosedFormName::*;
    let p = drag.c_par;
    let n = drag.c_perp;
    let s2 = std::f64::consts::SQRT_2;
    let l = params.total_length;
    let unknown = || Error::UnknownClosedForm { model: model.to_string(), name: name.to_string() };
    let v = match (model, name) {
        (ModelId::Stretching, G4 | G5) => {
            let ell = params.ell;
            let x = -(n - p).powi(2) / (2.0 * s2 * (p + n).powi(2));
            let y = (16.0 * p.powi(3) - 8.0 * p * p * n - 23.0 * p * n * n - 2.0 * n.powi(3))
                / (2.0 * s2 * (p + n) * (n + 4.0 * p).powi(2));
            let t = 3.0 * (8.0 * p.powi(3) + 10.0 * p * p * n + 9.0 * p * n * n + n.powi(3))
                / (2.0 * ell * (p + n) * (n + 4.0 * p).powi(2));
            if name == G4 {
                [x, y, t]
            } else {
                [x, -y, -t]
            }
        }
        (ModelId::Stretching, G6) => {
            let ell = params.ell;
            let den = (p + n) * (n + 4.0 * p);
            [0.0, -p * (2.0 * n + 3.0 * p) / (2.0 * s2 * ell * den), 3.0 * p * (n - p) / (2.0 * ell * ell * den)]
        }
        (ModelId::Growing, G4 | G5) => {
            let x = -n / (2.0 * s2 * (n + p));
            let y = -n * n / (s2 * (p + n) * (n + 4.0 * p));
            let t = 3.0 * (n * n + 3.0 * n * p + 4.0 * p * p) / (2.0 * l * (p + n) * (n + 4.0 * p));
            if name == G4 {
                [x, y, t]
            } else {
                [x, -y, -t]
            }
        }
        (ModelId::Growing, G6) => [
            n * (3.0 * n * n + 15.0 * n * p + 20.0 * p * p) / (2.0 * s2 * l * (p + n).powi(2) * (n + 4.0 * p)),
            0.0,
            -3.0 * (n * n + 3.0 * n * p + 4.0 * p * p) / (2.0 * l * l * (p + n) * (n + 4.0 * p)),
        ],
        (ModelId::Sliding, G3) => [
            0.0,
            s2 * (n.powi(3) + 19.0 * n * n * p + 8.0 * n * p * p - 16.0 * p.powi(3))
                / ((p + n) * (n + 4.0 * p).powi(2)),
            -6.0 * n * (n * n + 11.0 * n * p + 4.0 * p * p) / (l * (p + n) * (n + 4.0 * p).powi(2)),
        ],
        (ModelId::Sliding, G4) => [
            0.0,
            (5.0 * n.powi(5) + 117.0 * n.powi(4) * p - 466.0 * n.powi(3) * p * p - 1128.0 * n * n * p.powi(3)
                + 32.0 * n * p.powi(4)
                + 384.0 * p.powi(5))
                / (s2 * (p + n).powi(2) * (n + 4.0 * p).powi(3)),
            24.0 * p
                * (n.powi(4) + 65.0 * n.powi(3) * p + 110.0 * n * n * p * p + 32.0 * n * p.powi(3) - 32.0 * p.powi(4))
                / (l * (p + n).powi(2) * (n + 4.0 * p).powi(3)),
        ],
        (ModelId::Sliding, G5) => [
            2.0 * s2 * (n - p) * (3.0 * n.powi(3) + 23.0 * n * n * p + 74.0 * n * p * p + 72.0 * p.powi(3))
                / (l * (p + n).powi(2) * (n + 4.0 * p).powi(2)),
            0.0,
            0.0,
        ],
        (ModelId::Telescopic, G4) => [
            (n - p).powi(2) / (2.0 * s2 * (n + p).powi(2)),
            (2.0 * n.powi(3) + 23.0 * n * n * p + 8.0 * n * p * p - 16.0 * p.powi(3))
                / (s2 * (p + n) * (n + 4.0 * p).powi(2)),
            -3.0 * (n.powi(3) + 9.0 * n * n * p + 10.0 * n * p * p + 8.0 * p.powi(3))
                / (4.0 * l * (p + n) * (n + 4.0 * p).powi(2)),
        ],
        (ModelId::Telescopic, G5) => [
            (n - p).powi(2) / (2.0 * s2 * (n + p).powi(2)),
            (4.0 * p - n) * (2.0 * n * n + n * p - 4.0 * p * p) / (s2 * (p + n) * (n + 4.0 * p).powi(2)),
            -3.0 * (n.powi(3) + 5.0 * n * n * p + 22.0 * n * p * p + 24.0 * p.powi(3))
                / (4.0 * l * (p + n) * (n + 4.0 * p).powi(2)),
        ],
        (ModelId::Telescopic, G6) => [
            -p * p / (s2 * l * (p + n) * (n + 4.0 * p)),
            -p * (3.0 * n + 2.0 * p) / (2.0 * s2 * (p + n).powi(2) * (n + 4.0 * p)),
            3.0 * p * (n - p) / (8.0 * l * l * (p + n) * (n + 4.0 * p)),
        ],
        _ => return Err(unknown()),
    };
    Ok(Vec3(v))
}

/// Published closed-form determinant of the three brackets, if any.
pub fn closed_form_det(model: ModelId, drag: DragPair, params: &ModelParams) -> Option<f64> {
    let p = drag.c_par;
    let n = drag.c_perp;
    let k = n / p;
    let l = params.total_length;
    match model {
        ModelId::Stretching => {
            let ell = params.ell;
            Some(
                3.0 * p.powi(3) * (n - p).powi(2) * (31.0 * n + 4.0 * p)
                    / (4.0 * ell * ell * (n + p).powi(3) * (n + 4.0 * p).powi(3)),
            )
        }
        ModelId::Growing => Some(
            3.0 * n.powi(3) * (n * n + 3.0 * n * p + 4.0 * p * p)
                / (4.0 * l * l * (p + n).powi(3) * (n + 4.0 * p).powi(2)),
        ),
        ModelId::Sliding => {
            let pp = 12.0
                * p.powi(5)
                * (n - p).powi(2)
                * (3.0 * n.powi(3) + 23.0 * n * n * p + 74.0 * n * p * p + 72.0 * p.powi(3))
                / (l * l * (p + n).powi(5) * (n + 4.0 * p).powi(5));
            let q = 5.0 * k.powi(5) + 145.0 * k.powi(4) + 458.0 * k.powi(3) + 752.0 * k * k + 160.0 * k - 256.0;
            Some(pp * q)
        }
        ModelId::Telescopic => {
            let pp = -3.0 * (n - p) / (16.0 * l * (p + n).powi(5) * (n + 4.0 * p).powi(3));
            let q = 5.0 * k.powi(7) + 81.0 * k.powi(6) - 149.0 * k.powi(5) - 1149.0 * k.powi(4) - 972.0 * k.powi(3)
                + 1096.0 * k * k
                + 832.0 * k
                - 384.0;
            Some(pp * q)
        }
        ModelId::Scallop | ModelId::Crawler => None,
    }
}

/// Whether the printed closed forms of a model reproduce its numeric brackets.
pub fn closed_form_is_reliable(model: ModelId) -> bool {
    matches!(model, ModelId::Stretching | ModelId::Sliding | ModelId::Growing)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Numeric,
    #[default]
    Both,
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "closed_form" | "closed" => Ok(Method::ClosedForm),
            "numeric" => Ok(Method::Numeric),
            "both" => Ok(Method::Both),
            _ => Err(Error::InvalidParams(format!("unknown method '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossCheck {
    Passed,
    /// No trustworthy closed form exists for this model.
    Skipped,
    NotRequested,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub model: ModelId,
    pub shape: Vec<f64>,
    pub drag: DragPair,
    pub params: ModelParams,
    pub method: Method,
    pub brackets: Vec<BracketSpec>,
    pub names: Vec<ClosedFormName>,
    /// Projections of the brackets, one per spec.
    pub projections: Vec<[f64; 3]>,
    pub det: f64,
    pub numeric_det: Option<f64>,
    pub closed_form_det: Option<f64>,
    /// Printed product formula for the determinant.
    pub printed_det: Option<f64>,
    pub cross_check: CrossCheck,
    pub controllable: bool,
}

fn det3(cols: &[Vec3]) -> f64 {
    Mat3::from_columns(cols[0], cols[1], cols[2]).det()
}

/// Determinant test for gait controllability at one shape.
pub fn certify(sw: &Swimmer, shape: &ShapeVector, method: Method) -> Result<Certificate> {
    sw.control_fields(shape)?;
    let set = published_set(sw.model);
    let is_reference = {
        let r = sw.reference_shape();
        r.coords().iter().zip(shape.coords()).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()))
    };
    if method != Method::Numeric && !set.is_empty() && !is_reference {
        return Err(Error::InvalidParams(format!(
            "closed forms are only available at the reference shape {:?}",
            sw.reference_shape().coords()
        )));
    }
    let mut cert = Certificate {
        model: sw.model,
        shape: shape.coords().to_vec(),
        drag: sw.drag,
        params: sw.params,
        method,
        brackets: set.iter().map(|(_, b)| b.clone()).collect(),
        names: set.iter().map(|(n, _)| *n).collect(),
        projections: Vec::new(),
        det: 0.0,
        numeric_det: None,
        closed_form_det: None,
        printed_det: None,
        cross_check: CrossCheck::NotRequested,
        controllable: false,
    };
    if set.is_empty() {
        if method != Method::ClosedForm {
            cert.numeric_det = Some(0.0);
        }
        return Ok(cert);
    }

    if method != Method::Numeric {
        let cf: Vec<Vec3> =
            set.iter().map(|(n, _)| closed_form_bracket(sw.model, *n, sw.drag, &sw.params)).collect::<Result<_>>()?;
        cert.closed_form_det = Some(det3(&cf));
        cert.printed_det = closed_form_det(sw.model, sw.drag, &sw.params);
        cert.projections = cf.iter().map(|v| v.0).collect();
        cert.det = det3(&cf);
    }
    if method != Method::ClosedForm {
        let num: Vec<Vec3> = set
            .iter()
            .map(|(_, b)| bracket_at(sw, b, shape, DEFAULT_FD_STEP).map(|v| v.projected))
            .collect::<Result<_>>()?;
        let d = det3(&num);
        cert.numeric_det = Some(d);
        cert.projections = num.iter().map(|v| v.0).collect();
        cert.det = d;
    }
    if method == Method::Both {
        let closed = cert.closed_form_det.unwrap_or(0.0);
        let numeric = cert.numeric_det.unwrap_or(0.0);
        if closed_form_is_reliable(sw.model) {
            // Two determinants below the certificate threshold agree on the verdict.
            let both_null = numeric.abs() <= CERTIFICATE_TOL && closed.abs() <= CERTIFICATE_TOL;
            if !both_null && (numeric - closed).abs() > CROSS_CHECK_TOL * closed.abs().max(numeric.abs()) {
                return Err(Error::CrossCheckFailure { numeric, closed });
            }
            cert.cross_check = CrossCheck::Passed;
        } else {
            cert.cross_check = CrossCheck::Skipped;
        }
    }
    cert.controllable = cert.det.abs() > CERTIFICATE_TOL && sw.drag.in_regime();
    Ok(cert)
}

/// Estimates the projected bracket `[Zᵢ, Zⱼ]` from the phase of a square loop.
///
/// Each leg of the loop lasts `τ/4`, so the phase is
/// `A·B·(τ/4)²·[Zᵢ, Zⱼ] + O(τ³)`; the returned estimate divides by that
/// prefactor and converges with error `O(τ)`. With `i = j` the loop is the
/// reciprocal stroke `A, B, −A, −B` along a single channel.
#[allow(clippy::too_many_arguments)]
pub fn flow_phase_bracket(
    sw: &Swimmer,
    i: usize,
    j: usize,
    shape: &ShapeVector,
    a: f64,
    b: f64,
    tau: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec3> {
    let m = sw.model.controls();
    let signal = if i == j {
        if i == 0 || i > m {
            return Err(Error::InvalidSignal(format!("channel {i} outside 1..={m}")));
        }
        let leg = |amp: f64| {
            let mut v = vec![0.0; m];
            v[i - 1] = amp;
            Piece::constant(tau / 4.0, v)
        };
        ControlSignal::from_pieces(m, vec![leg(a), leg(b), leg(-a), leg(-b)])?
    } else {
        square_loop(i, j, a, b, tau, m)?
    };
    if a * b == 0.0 {
        return Ok(Vec3::ZERO);
    }
    let traj = simulate(sw, &State::at_identity(*shape), &signal, cfg)?;
    let g = traj.states.last().expect("trajectory has samples").pose;
    let norm = 16.0 / (a * b * tau * tau);
    Ok(g.as_vec3().scale(norm))
}
