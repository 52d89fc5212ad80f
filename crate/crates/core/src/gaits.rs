//! Control signals: square bracket-generating loops, nested loops,
//! concatenation, repetition and the harmonic loop.
//!
//! Signals are declarative lists of pieces so they serialize losslessly and
//! the integrator can align its steps with piece boundaries.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance of the zero-mean test.
pub const ZERO_MEAN_TOL: f64 = 1e-12;

/// One piece of a control signal, parametrized by local time `t ∈ [0, duration)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Piece {
    Constant {
        duration: f64,
        value: Vec<f64>,
    },
    /// `amplitude·(cos(rate·t + phase), sin(rate·t + phase))` on the first
    /// two channels, zero elsewhere.
    Harmonic {
        duration: f64,
        amplitude: f64,
        rate: f64,
        phase: f64,
    },
}

impl Piece {
    pub fn constant(duration: f64, value: Vec<f64>) -> Piece {
        Piece::Constant { duration, value }
    }

    pub fn duration(&self) -> f64 {
        match self {
            Piece::Constant { duration, .. } | Piece::Harmonic { duration, .. } => *duration,
        }
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self, Piece::Harmonic { .. })
    }

    /// Writes the value at local time `t` into `out`.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        match self {
            Piece::Constant { value, .. } => out.copy_from_slice(value),
            Piece::Harmonic { amplitude, rate, phase, .. } => {
                out.fill(0.0);
                let (s, c) = (rate * t + phase).sin_cos();
                out[0] = amplitude * c;
                out[1] = amplitude * s;
            }
        }
    }

    fn integral_into(&self, acc: &mut [f64]) {
        match self {
            Piece::Constant { duration, value } => {
                for (a, v) in acc.iter_mut().zip(value) {
                    *a += duration * v;
                }
            }
            Piece::Harmonic { duration, amplitude, rate, phase } => {
                let end = rate * duration + phase;
                acc[0] += amplitude * (end.sin() - phase.sin()) / rate;
                acc[1] += amplitude * (phase.cos() - end.cos()) / rate;
            }
        }
    }

    fn scaled(&self, k: f64) -> Piece {
        match self {
            Piece::Constant { duration, value } => {
                Piece::Constant { duration: *duration, value: value.iter().map(|v| k * v).collect() }
            }
            Piece::Harmonic { duration, amplitude, rate, phase } => {
                Piece::Harmonic { duration: *duration, amplitude: k * amplitude, rate: *rate, phase: *phase }
            }
        }
    }

    fn compressed(&self, factor: f64) -> Piece {
        match self {
            Piece::Constant { duration, value } => {
                Piece::Constant { duration: duration / factor, value: value.clone() }
            }
            Piece::Harmonic { duration, amplitude, rate, phase } => Piece::Harmonic {
                duration: duration / factor,
                amplitude: *amplitude,
                rate: rate * factor,
                phase: *phase,
            },
        }
    }

    // Same values played backwards in time.
    fn time_reversed(&self) -> Piece {
        match self {
            Piece::Constant { .. } => self.clone(),
            Piece::Harmonic { duration, amplitude, rate, phase } => Piece::Harmonic {
                duration: *duration,
                amplitude: *amplitude,
                rate: -rate,
                phase: rate * duration + phase,
            },
        }
    }

    /// Period of the waveform, for sampled pieces.
    pub fn period(&self) -> Option<f64> {
        match self {
            Piece::Constant { .. } => None,
            Piece::Harmonic { rate, .. } => Some(TAU / rate.abs()),
        }
    }
}

/// Control function on `[0, T]` with `channels` components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSignal {
    channels: usize,
    pieces: Vec<Piece>,
}

impl ControlSignal {
    pub fn from_pieces(channels: usize, pieces: Vec<Piece>) -> Result<ControlSignal> {
        if channels == 0 {
            return Err(Error::InvalidSignal("a signal needs at least one channel".into()));
        }
        for p in &pieces {
            let d = p.duration();
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidSignal(format!("piece duration must be positive, got {d}")));
            }
            match p {
                Piece::Constant { value, .. } => {
                    if value.len() != channels {
                        return Err(Error::ChannelMismatch { expected: channels, got: value.len() });
                    }
                    if value.iter().any(|v| !v.is_finite()) {
                        return Err(Error::NonFinite("control value"));
                    }
                }
                Piece::Harmonic { amplitude, rate, phase, .. } => {
                    if channels < 2 {
                        return Err(Error::InvalidSignal("harmonic pieces need two channels".into()));
                    }
                    if ![amplitude, rate, phase].iter().all(|v| v.is_finite()) || *rate == 0.0 {
                        return Err(Error::InvalidSignal("harmonic parameters must be finite, rate non-zero".into()));
                    }
                }
            }
        }
        Ok(ControlSignal { channels, pieces })
    }

    /// Signal of zero duration.
    pub fn empty(channels: usize) -> ControlSignal {
        ControlSignal { channels, pieces: Vec::new() }
    }

    /// Constant zero control for `duration`.
    pub fn zero(channels: usize, duration: f64) -> Result<ControlSignal> {
        ControlSignal::from_pieces(channels, vec![Piece::constant(duration, vec![0.0; channels])])
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn duration(&self) -> f64 {
        self.pieces.iter().map(Piece::duration).sum()
    }

    pub fn is_sampled(&self) -> bool {
        self.pieces.iter().any(Piece::is_sampled)
    }

    pub fn is_piecewise_constant(&self) -> bool {
        !self.is_sampled()
    }

    pub fn integral(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.channels];
        for p in &self.pieces {
            p.integral_into(&mut acc);
        }
        acc
    }

    /// Zero-mean test within [`ZERO_MEAN_TOL`] relative to the total
    /// actuation `∫|u|`, which absorbs summation-order rounding.
    pub fn is_zero_mean(&self) -> bool {
        let mass: f64 = self
            .pieces
            .iter()
            .map(|p| match p {
                Piece::Constant { duration, value } => duration * value.iter().map(|v| v.abs()).sum::<f64>(),
                Piece::Harmonic { duration, amplitude, .. } => 2.0 * duration * amplitude.abs(),
            })
            .sum();
        let tol = ZERO_MEAN_TOL * mass.max(1.0);
        self.integral().iter().all(|v| v.abs() <= tol)
    }

    /// Value at global time `t`, or `None` outside `[0, T)`.
    pub fn value_at(&self, t: f64) -> Option<Vec<f64>> {
        let mut start = 0.0;
        for p in &self.pieces {
            let end = start + p.duration();
            if t >= start && t < end {
                let mut out = vec![0.0; self.channels];
                p.eval_into(t - start, &mut out);
                return Some(out);
            }
            start = end;
        }
        None
    }

    pub fn scaled(&self, k: f64) -> ControlSignal {
        ControlSignal { channels: self.channels, pieces: self.pieces.iter().map(|p| p.scaled(k)).collect() }
    }

    /// Replays the signal `factor` times faster with unchanged amplitudes.
    pub fn compressed(&self, factor: f64) -> ControlSignal {
        ControlSignal { channels: self.channels, pieces: self.pieces.iter().map(|p| p.compressed(factor)).collect() }
    }

    /// The inverse stroke `t ↦ −u(T − t)`, which retraces the shape path.
    pub fn reversed(&self) -> ControlSignal {
        ControlSignal {
            channels: self.channels,
            pieces: self.pieces.iter().rev().map(|p| p.time_reversed().scaled(-1.0)).collect(),
        }
    }
}

fn unit(m: usize, i: usize, amp: f64) -> Vec<f64> {
    let mut v = vec![0.0; m];
    v[i - 1] = amp;
    v
}

fn check_index(i: usize, m: usize) -> Result<()> {
    if i == 0 || i > m {
        return Err(Error::InvalidSignal(format!("channel {i} outside 1..={m}")));
    }
    Ok(())
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidSignal(format!("tau must be positive, got {tau}")));
    }
    Ok(())
}

/// Square loop `A·eᵢ, B·eⱼ, −A·eᵢ, −B·eⱼ`, each leg of length `τ/4`
/// (indices are 1-based).
pub fn square_loop(i: usize, j: usize, a: f64, b: f64, tau: f64, m: usize) -> Result<ControlSignal> {
    check_index(i, m)?;
    check_index(j, m)?;
    check_tau(tau)?;
    if i == j {
        return Err(Error::InvalidSignal(format!("square loop needs two distinct channels, got {i} twice")));
    }
    let q = tau / 4.0;
    ControlSignal::from_pieces(
        m,
        vec![
            Piece::constant(q, unit(m, i, a)),
            Piece::constant(q, unit(m, j, b)),
            Piece::constant(q, unit(m, i, -a)),
            Piece::constant(q, unit(m, j, -b)),
        ],
    )
}

/// Loop for `[Zᵢ, h]` given the loop of `h`.
///
/// Legs of length `τ/4`: `A·eᵢ`, the inner loop scaled by `B` and compressed
/// to fit the leg, `−A·eᵢ`, then the inverse of that compressed inner loop.
pub fn nested_loop(i: usize, inner: &ControlSignal, a: f64, b: f64, tau: f64) -> Result<ControlSignal> {
    let m = inner.channels();
    check_index(i, m)?;
    check_tau(tau)?;
    if !inner.is_zero_mean() {
        return Err(Error::InvalidSignal("nested loops need a zero-mean inner signal".into()));
    }
    let q = tau / 4.0;
    let t_inner = inner.duration();
    if t_inner <= 0.0 {
        return Err(Error::InvalidSignal("inner signal is empty".into()));
    }
    let h = inner.compressed(t_inner / q).scaled(b);
    let mut pieces = vec![Piece::constant(q, unit(m, i, a))];
    pieces.extend(h.pieces.iter().cloned());
    pieces.push(Piece::constant(q, unit(m, i, -a)));
    pieces.extend(h.reversed().pieces);
    ControlSignal::from_pieces(m, pieces)
}

pub fn concat(s1: &ControlSignal, s2: &ControlSignal) -> Result<ControlSignal> {
    if s1.channels != s2.channels {
        return Err(Error::ChannelMismatch { expected: s1.channels, got: s2.channels });
    }
    let mut pieces = s1.pieces.clone();
    pieces.extend(s2.pieces.iter().cloned());
    Ok(ControlSignal { channels: s1.channels, pieces })
}

pub fn repeat(s: &ControlSignal, n: usize) -> Result<ControlSignal> {
    if n == 0 {
        return Err(Error::InvalidSignal("repeat count must be at least 1".into()));
    }
    let mut pieces = Vec::with_capacity(n * s.pieces.len());
    for _ in 0..n {
        pieces.extend(s.pieces.iter().cloned());
    }
    Ok(ControlSignal { channels: s.channels, pieces })
}

/// One period of `amplitude·(cos t, sin t, 0, …)`.
pub fn sinusoid_loop(amplitude: f64, m: usize) -> Result<ControlSignal> {
    if m < 2 {
        return Err(Error::InvalidSignal("the harmonic loop needs two channels".into()));
    }
    ControlSignal::from_pieces(m, vec![Piece::Harmonic { duration: TAU, amplitude, rate: 1.0, phase: 0.0 }])
}

fn one() -> f64 {
    1.0
}

/// Serializable gait description, expanded into a [`ControlSignal`] once the
/// channel count is known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum GaitDescriptor {
    Square {
        i: usize,
        j: usize,
        #[serde(default = "one")]
        a: f64,
        #[serde(default = "one")]
        b: f64,
        tau: f64,
    },
    Nested {
        i: usize,
        inner: Box<GaitDescriptor>,
        #[serde(default = "one")]
        a: f64,
        #[serde(default = "one")]
        b: f64,
        tau: f64,
    },
    Sinusoid {
        amplitude: f64,
    },
    Concat {
        parts: Vec<GaitDescriptor>,
    },
    Repeat {
        inner: Box<GaitDescriptor>,
        n: usize,
    },
}

impl GaitDescriptor {
    pub fn to_signal(&self, m: usize) -> Result<ControlSignal> {
        match self {
            GaitDescriptor::Square { i, j, a, b, tau } => square_loop(*i, *j, *a, *b, *tau, m),
            GaitDescriptor::Nested { i, inner, a, b, tau } => nested_loop(*i, &inner.to_signal(m)?, *a, *b, *tau),
            GaitDescriptor::Sinusoid { amplitude } => sinusoid_loop(*amplitude, m),
            GaitDescriptor::Concat { parts } => {
                let mut acc = ControlSignal::empty(m);
                for p in parts {
                    acc = concat(&acc, &p.to_signal(m)?)?;
                }
                Ok(acc)
            }
            GaitDescriptor::Repeat { inner, n } => repeat(&inner.to_signal(m)?, *n),
        }
    }

    /// Drift gait of the stretching swimmer: the `[1,2]` and `[1,3]` square
    /// loops back to back, each with `τ = 0.4`. Their rotations cancel by
    /// mirror symmetry.
    pub fn stretching_drift() -> GaitDescriptor {
        let sq = |j| GaitDescriptor::Square { i: 1, j, a: 1.0, b: 1.0, tau: 0.4 };
        GaitDescriptor::Concat { parts: vec![sq(2), sq(3)] }
    }

    /// Harmonic loop of amplitude 0.1.
    pub fn harmonic() -> GaitDescriptor {
        GaitDescriptor::Sinusoid { amplitude: 0.1 }
    }

    /// Drift gait of the sliding swimmer, generating `[2,[1,2]]`.
    pub fn sliding_drift() -> GaitDescriptor {
        let inner = GaitDescriptor::Square { i: 1, j: 2, a: 1.0, b: 1.0, tau: 0.04 };
        GaitDescriptor::Nested { i: 2, inner: Box::new(inner), a: 1.0, b: 1.0, tau: 0.04 }
    }
}
