//! Fixed-step RK4 integration of `(ṡ, ġ) = Σ gᵢ(s) uᵢ`, geometric phases
//! and drift versus quasi-periodic classification of iterated gaits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaits::{repeat, ControlSignal, Piece};
use crate::models::{DragPair, ModelId, ModelParams, ShapeVector, Swimmer};
use crate::se2::{rot, Pose, Vec2, Vec3};

/// Per-cycle rotation below which an iterated gait counts as drifting.
pub const THETA_TOL: f64 = 1e-3;

/// Per-cycle translation, in units of the model length, above which an
/// iterated gait counts as drifting.
pub const DRIFT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    #[default]
    Rk4,
}

fn default_substeps() -> usize {
    200
}

/// Step control: a fixed number of steps per constant piece and, for
/// harmonic pieces, a fixed step (default: period / 2000).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default)]
    pub method: Integrator,
    #[serde(default = "default_substeps")]
    pub substeps_per_segment: usize,
    #[serde(default)]
    pub sampled_step: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { method: Integrator::Rk4, substeps_per_segment: 200, sampled_step: None }
    }
}

/// Steps per period used for harmonic pieces when no step is given.
pub const SAMPLED_STEPS_PER_PERIOD: f64 = 2000.0;

impl IntegratorConfig {
    pub fn with_substeps(substeps_per_segment: usize) -> IntegratorConfig {
        IntegratorConfig { substeps_per_segment, ..IntegratorConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.substeps_per_segment < 10 {
            return Err(Error::InvalidParams(format!(
                "substeps_per_segment must be at least 10, got {}",
                self.substeps_per_segment
            )));
        }
        if let Some(h) = self.sampled_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidParams(format!("sampled_step must be positive, got {h}")));
            }
        }
        Ok(())
    }

    fn steps_for(&self, piece: &Piece) -> usize {
        match piece.period() {
            None => self.substeps_per_segment,
            Some(period) => {
                let h = self.sampled_step.unwrap_or(period / SAMPLED_STEPS_PER_PERIOD);
                ((piece.duration() / h) * (1.0 - 1e-12)).ceil().max(1.0) as usize
            }
        }
    }

    /// Number of integration steps the signal takes.
    pub fn steps_in(&self, signal: &ControlSignal) -> usize {
        signal.pieces().iter().map(|p| self.steps_for(p)).sum()
    }
}

/// Full configuration `z = (s, g)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub shape: ShapeVector,
    pub pose: Pose,
}

impl State {
    pub fn new(shape: ShapeVector, pose: Pose) -> State {
        State { shape, pose }
    }

    pub fn at_identity(shape: ShapeVector) -> State {
        State { shape, pose: Pose::IDENTITY }
    }
}

/// Time samples of a simulation with the inputs that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub model: ModelId,
    pub drag: DragPair,
    pub params: ModelParams,
    pub signal: ControlSignal,
    pub times: Vec<f64>,
    pub states: Vec<State>,
}

impl Trajectory {
    /// Index of the sample at time `t` (up to rounding of accumulated times).
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let tol = 1e-9 * t.abs().max(1.0);
        let i = self.times.partition_point(|s| *s < t - tol);
        match self.times.get(i) {
            Some(s) if (s - t).abs() <= tol => Ok(i),
            _ => Err(Error::TimeNotSampled(t)),
        }
    }

    pub fn final_state(&self) -> &State {
        self.states.last().expect("trajectory has at least the initial sample")
    }
}

// Internal state: shape slots, then x, y and the unwrapped angle.
type Y = [f64; 6];

fn rate(sw: &Swimmer, y: &Y, u: &[f64]) -> Result<Y> {
    let c = [y[0], y[1], y[2]];
    sw.in_bounds(c)?;
    let body = sw.control_fields_raw(c)?.apply(u);
    let v = rot(y[5]) * body.linear();
    let mut out = [0.0; 6];
    out[..u.len()].copy_from_slice(u);
    out[3] = v.x();
    out[4] = v.y();
    out[5] = body.omega;
    Ok(out)
}

fn axpy(y: &Y, h: f64, k: &Y) -> Y {
    let mut out = *y;
    for (o, ki) in out.iter_mut().zip(k) {
        *o += h * ki;
    }
    out
}

/// Shape rate (equal to `u`) and world-frame pose rate `(ẋ, ẏ, θ̇)`.
pub fn state_rate(sw: &Swimmer, state: &State, u: &[f64]) -> Result<(Vec<f64>, Vec3)> {
    let m = sw.model.controls();
    if u.len() != m {
        return Err(Error::ChannelMismatch { expected: m, got: u.len() });
    }
    let f = sw.control_fields(&state.shape)?;
    let body = f.apply(u);
    let v = rot(state.pose.theta()) * body.linear();
    Ok((u.to_vec(), Vec3([v.x(), v.y(), body.omega])))
}

/// Integrates `signal` from `state0` with RK4, never stepping across a
/// piece boundary. Every step is recorded.
pub fn simulate(sw: &Swimmer, state0: &State, signal: &ControlSignal, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let m = sw.model.controls();
    if signal.channels() != m {
        return Err(Error::ChannelMismatch { expected: m, got: signal.channels() });
    }
    if state0.shape.model() != sw.model {
        return Err(Error::InvalidParams(format!("initial shape is for model {}", state0.shape.model())));
    }
    sw.control_fields(&state0.shape).map_err(|e| e.at_time(0.0))?;

    let total = cfg.steps_in(signal);
    let mut times = Vec::with_capacity(total + 1);
    let mut states = Vec::with_capacity(total + 1);
    let s0 = state0.shape.raw();
    let p0 = state0.pose;
    let mut y: Y = [s0[0], s0[1], s0[2], p0.x(), p0.y(), p0.theta()];
    times.push(0.0);
    states.push(*state0);

    let mut u = vec![0.0; m];
    let mut start = 0.0;
    for piece in signal.pieces() {
        let n = cfg.steps_for(piece);
        let d = piece.duration();
        let h = d / n as f64;
        for k in 0..n {
            let tl = k as f64 * h;
            let t = start + tl;
            let stage = |y: &Y, tl: f64, u: &mut Vec<f64>| -> Result<Y> {
                piece.eval_into(tl, u);
                rate(sw, y, u).map_err(|e| e.at_time(start + tl))
            };
            let k1 = stage(&y, tl, &mut u)?;
            let k2 = stage(&axpy(&y, h / 2.0, &k1), tl + h / 2.0, &mut u)?;
            let k3 = stage(&axpy(&y, h / 2.0, &k2), tl + h / 2.0, &mut u)?;
            let k4 = stage(&axpy(&y, h, &k3), tl + h, &mut u)?;
            for i in 0..6 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            let t_next = if k + 1 == n { start + d } else { t + h };
            let shape = ShapeVector::from_raw(sw.model, [y[0], y[1], y[2]]);
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("integrated state"));
            }
            sw.in_bounds(shape.raw()).map_err(|v| Error::from(v).at_time(t_next))?;
            times.push(t_next);
            states.push(State { shape, pose: Pose::from_raw(y[3], y[4], y[5]) });
        }
        start += d;
    }
    Ok(Trajectory { model: sw.model, drag: sw.drag, params: sw.params, signal: signal.clone(), times, states })
}

fn shape_distance(a: &ShapeVector, b: &ShapeVector) -> f64 {
    a.coords().iter().zip(b.coords()).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Net displacement `g(t₀)⁻¹·g(t₁)` and the max-norm shape change.
pub fn geometric_phase(traj: &Trajectory, t0: f64, t1: f64) -> Result<(Pose, f64)> {
    let (i, j) = (traj.index_of(t0)?, traj.index_of(t1)?);
    let (a, b) = (&traj.states[i], &traj.states[j]);
    Ok((a.pose.inverse().compose(&b.pose), shape_distance(&a.shape, &b.shape)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaitClass {
    Drift,
    QuasiPeriodic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaitReport {
    /// Body-relative displacement of each cycle, `g_k⁻¹·g_{k+1}`.
    pub per_cycle_phases: Vec<Pose>,
    /// World pose at the start of the run and after each cycle.
    pub cycle_poses: Vec<Pose>,
    pub classification: GaitClass,
    pub drift_direction: Option<Vec2>,
    /// Largest distance of an end-of-cycle position from the start.
    pub max_excursion: f64,
    /// Distance of the first end-of-cycle position from the start.
    pub first_cycle_excursion: f64,
    pub shape_periodicity_residual: f64,
    pub mean_rotation: f64,
    pub mean_translation: f64,
}

/// Index of the sample closing each cycle of a repeated signal.
pub fn cycle_indices(signal: &ControlSignal, cycles: usize, cfg: &IntegratorConfig) -> Vec<usize> {
    let per = cfg.steps_in(signal);
    (0..=cycles).map(|k| k * per).collect()
}

/// Simulates `cycles` repetitions of `signal` and summarizes them.
pub fn run_cycles(
    sw: &Swimmer,
    state0: &State,
    signal: &ControlSignal,
    cycles: usize,
    cfg: &IntegratorConfig,
) -> Result<(Trajectory, GaitReport)> {
    if !signal.is_zero_mean() {
        return Err(Error::InvalidSignal("gait analysis needs a zero-mean signal".into()));
    }
    let traj = simulate(sw, state0, &repeat(signal, cycles.max(1))?, cfg)?;
    let idx = cycle_indices(signal, cycles.max(1), cfg);
    let report = summarize(&traj, &idx, sw.params.total_length);
    Ok((traj, report))
}

fn summarize(traj: &Trajectory, idx: &[usize], length: f64) -> GaitReport {
    let poses: Vec<Pose> = idx.iter().map(|&i| traj.states[i].pose).collect();
    let phases: Vec<Pose> = poses.windows(2).map(|w| w[0].inverse().compose(&w[1])).collect();
    let n = phases.len() as f64;
    let mean_rotation = phases.iter().map(|p| p.theta().abs()).sum::<f64>() / n;
    let mean_translation = phases.iter().map(|p| p.translation().norm()).sum::<f64>() / n;
    let origin = poses[0].translation();
    let dist = |p: &Pose| (p.translation() - origin).norm();
    let max_excursion = poses.iter().map(dist).fold(0.0, f64::max);
    let s0 = &traj.states[idx[0]].shape;
    let shape_periodicity_residual = idx.iter().map(|&i| shape_distance(s0, &traj.states[i].shape)).fold(0.0, f64::max);
    let drifting = mean_rotation < THETA_TOL && mean_translation > DRIFT_TOL * length;
    let drift_direction = if drifting {
        let d = poses[poses.len() - 1].translation() - origin;
        let norm = d.norm();
        (norm > 0.0).then(|| d.scale(1.0 / norm))
    } else {
        None
    };
    GaitReport {
        per_cycle_phases: phases,
        first_cycle_excursion: dist(&poses[1]),
        cycle_poses: poses,
        classification: if drifting { GaitClass::Drift } else { GaitClass::QuasiPeriodic },
        drift_direction,
        max_excursion,
        shape_periodicity_residual,
        mean_rotation,
        mean_translation,
    }
}

/// Iterates a zero-mean gait at least four times and classifies it.
pub fn classify_gait(
    sw: &Swimmer,
    state0: &State,
    signal: &ControlSignal,
    cycles: usize,
    cfg: &IntegratorConfig,
) -> Result<GaitReport> {
    if cycles < 4 {
        return Err(Error::InvalidParams(format!("classification needs at least 4 cycles, got {cycles}")));
    }
    run_cycles(sw, state0, signal, cycles, cfg).map(|(_, r)| r)
}
