//! `microswim`: certify, simulate, evaluate brackets and sweep parameters of
//! two-link microswimmer models.

mod config;
mod error;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use microswim::export::{trajectory_csv, trajectory_json, trajectory_svg};
use microswim::gaits::repeat;
use microswim::lie::certify;
use microswim::lie::{
    bracket_at, closed_form_bracket, closed_form_is_reliable, published_set, ClosedFormName, DEFAULT_FD_STEP,
};
use microswim::models::Swimmer;
use microswim::sim::{cycle_indices, run_cycles, simulate, GaitReport};
use microswim::sweep::{run_sweep, sweep_csv, SweepGrid};
use microswim::{BracketSpec, DragPair, Method, ModelId, ModelParams, ShapeVector};
use serde_json::json;

use config::{parse_gait, parse_list, parse_pair, Format, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(name = "microswim", version, about = "Two-link microswimmer controllability and gait simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Determinant certificate of gait controllability (JSON).
    Certify {
        #[command(flatten)]
        common: Common,
        /// closed-form, numeric or both
        #[arg(long)]
        method: Option<Method>,
    },
    /// Integrate a gait and write the trajectory.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Gait as inline JSON, a JSON file, or one of stretching-drift, sliding-drift, harmonic
        #[arg(long)]
        gait: Option<String>,
        #[arg(long)]
        cycles: Option<usize>,
        /// RK4 steps per constant piece
        #[arg(long)]
        steps: Option<usize>,
        /// Initial pose x,y,theta
        #[arg(long, value_name = "X,Y,THETA")]
        pose: Option<String>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Evaluate one Lie bracket of the control fields (JSON).
    Bracket {
        #[command(flatten)]
        common: Common,
        /// Bracket such as "[1,[1,2]]", or a published name such as g4
        #[arg(long)]
        spec: Option<String>,
        #[arg(long, default_value_t = DEFAULT_FD_STEP)]
        fd_step: f64,
    },
    /// Certificates over a grid of drag ratios and shapes.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Drag ratios C⊥/C∥, comma-separated (may be empty)
        #[arg(long, value_name = "K1,K2,...", allow_hyphen_values = true)]
        kappas: Option<String>,
        #[arg(long)]
        method: Option<Method>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the effective configuration to this path
    #[arg(long)]
    save_config: Option<PathBuf>,
    #[arg(long)]
    model: Option<ModelId>,
    /// Drag coefficients C∥,C⊥
    #[arg(long, value_name = "CPAR,CPERP")]
    drag: Option<String>,
    /// Total length and bounds margin L,beta
    #[arg(long, value_name = "L,BETA")]
    params: Option<String>,
    /// Shape coordinates, comma-separated
    #[arg(long, allow_hyphen_values = true)]
    shape: Option<String>,
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn flag_err(flag: &str) -> impl Fn(String) -> CliError + '_ {
    move |e| CliError::Config(format!("--{flag}: {e}"))
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match (&self.config, self.model) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(m)) => RunConfig::new(m),
            (None, None) => return Err(CliError::Config("either --model or --config is required".into())),
        };
        if let Some(m) = self.model {
            if m != cfg.model {
                cfg.model = m;
                cfg.initial.shape = None;
            }
        }
        if let Some(d) = &self.drag {
            let (c_par, c_perp) = parse_pair(d).map_err(flag_err("drag"))?;
            cfg.drag = DragPair { c_par, c_perp };
        }
        if let Some(p) = &self.params {
            let (total_length, beta) = parse_pair(p).map_err(flag_err("params"))?;
            cfg.params = ModelParams { total_length, beta, ..cfg.params };
        }
        if let Some(s) = &self.shape {
            cfg.initial.shape = Some(parse_list(s).map_err(flag_err("shape"))?);
        }
        if let Some(o) = &self.out {
            cfg.output.out = Some(o.clone());
        }
        if let Some(f) = self.format {
            cfg.output.format = f;
        }
        Ok(cfg)
    }
}

fn finish(cfg: &RunConfig, save: &Option<PathBuf>) -> Result<Swimmer, CliError> {
    cfg.validate()?;
    if let Some(path) = save {
        write_file(path, &cfg.to_json())?;
    }
    Ok(Swimmer::new(cfg.model, cfg.drag, cfg.params)?)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source })
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("output serializes") + "\n"
}

fn is_reference(sw: &Swimmer, shape: &ShapeVector) -> bool {
    sw.reference_shape().coords() == shape.coords()
}

// Closed forms exist only at the reference shape, so elsewhere default to numeric.
fn default_method(sw: &Swimmer, shape: &ShapeVector) -> Method {
    if is_reference(sw, shape) {
        Method::Both
    } else {
        Method::Numeric
    }
}

fn cmd_certify(common: &Common, method: Option<Method>) -> Result<(), CliError> {
    let mut cfg = common.resolve()?;
    if method.is_some() {
        cfg.method = method;
    }
    let sw = finish(&cfg, &common.save_config)?;
    let shape = cfg.shape()?;
    let method = cfg.method.unwrap_or_else(|| default_method(&sw, &shape));
    let cert = certify(&sw, &shape, method)?;
    if !cert.controllable {
        eprintln!("{}: not controllable at this shape (det = {:e})", sw.model, cert.det);
    }
    emit(&cfg.output.out, &pretty(&cert))
}

fn cmd_simulate(
    common: &Common,
    gait: &Option<String>,
    cycles: Option<usize>,
    steps: Option<usize>,
    pose: &Option<String>,
    svg: &Option<PathBuf>,
) -> Result<(), CliError> {
    let mut cfg = common.resolve()?;
    if let Some(g) = gait {
        cfg.gait = Some(parse_gait(g)?);
    }
    if let Some(n) = cycles {
        cfg.cycles = n;
    }
    if let Some(n) = steps {
        cfg.integrator.substeps_per_segment = n;
    }
    if let Some(p) = pose {
        match parse_list(p).map_err(flag_err("pose"))?.as_slice() {
            [x, y, theta] => cfg.initial.pose = [*x, *y, *theta],
            v => return Err(CliError::Config(format!("--pose: expected x,y,theta, got {} numbers", v.len()))),
        }
    }
    if let Some(s) = svg {
        cfg.output.svg = Some(s.clone());
    }
    let sw = finish(&cfg, &common.save_config)?;
    let desc = cfg.gait.as_ref().ok_or_else(|| CliError::Config("simulate needs a gait (--gait)".into()))?;
    let signal = desc.to_signal(sw.model.controls())?;
    let state0 = cfg.initial_state()?;

    let (traj, report): (_, Option<GaitReport>) = if signal.is_zero_mean() {
        let (t, r) = run_cycles(&sw, &state0, &signal, cfg.cycles, &cfg.integrator)?;
        (t, Some(r))
    } else {
        (simulate(&sw, &state0, &repeat(&signal, cfg.cycles)?, &cfg.integrator)?, None)
    };

    let text = match cfg.output.format {
        Format::Csv => trajectory_csv(&traj),
        Format::Json => pretty(&trajectory_json(&traj, report.as_ref())),
    };
    emit(&cfg.output.out, &text)?;

    if let Some(path) = &cfg.output.svg {
        let markers: Vec<_> =
            cycle_indices(&signal, cfg.cycles, &cfg.integrator).into_iter().map(|i| traj.states[i].pose).collect();
        write_file(path, &trajectory_svg(&traj, &markers))?;
    }
    match &report {
        Some(r) => eprintln!(
            "{}: {} cycles, {:?}, mean |Δθ| {:.3e}, mean translation {:.3e}, max excursion {:.3e}",
            sw.model, cfg.cycles, r.classification, r.mean_rotation, r.mean_translation, r.max_excursion
        ),
        None => eprintln!("{}: {} cycles of a non-zero-mean signal; shape does not return", sw.model, cfg.cycles),
    }
    Ok(())
}

fn parse_spec(s: &str, model: ModelId) -> Result<BracketSpec, CliError> {
    if let Ok(name) = s.parse::<ClosedFormName>() {
        return published_set(model).into_iter().find(|(n, _)| *n == name).map(|(_, b)| b).ok_or_else(|| {
            microswim::Error::UnknownClosedForm { model: model.to_string(), name: name.to_string() }.into()
        });
    }
    Ok(s.parse()?)
}

fn cmd_bracket(common: &Common, spec: &Option<String>, fd_step: f64) -> Result<(), CliError> {
    let mut cfg = common.resolve()?;
    if let Some(s) = spec {
        cfg.bracket = Some(parse_spec(s, cfg.model)?);
    }
    let sw = finish(&cfg, &common.save_config)?;
    let spec = cfg.bracket.clone().ok_or_else(|| CliError::Config("bracket needs --spec".into()))?;
    if !(fd_step > 0.0 && fd_step.is_finite()) {
        return Err(CliError::Config(format!("--fd-step must be positive, got {fd_step}")));
    }
    let shape = cfg.shape()?;
    let value = bracket_at(&sw, &spec, &shape, fd_step)?;
    let name = published_set(sw.model).into_iter().find(|(_, b)| *b == spec).map(|(n, _)| n);
    let closed = match name {
        Some(n) if is_reference(&sw, &shape) => Some(closed_form_bracket(sw.model, n, sw.drag, &sw.params)?),
        _ => None,
    };
    let delta = closed.map(|c| (0..3).map(|k| value.projected[k] - c[k]).collect::<Vec<_>>());
    let report = json!({
        "model": sw.model,
        "spec": spec,
        "name": name,
        "shape": shape.coords(),
        "drag": sw.drag,
        "params": sw.params,
        "fd_step": fd_step,
        "numeric": value.projected.0,
        "full": value.full,
        "closed_form": closed.map(|c| c.0),
        "closed_form_reliable": name.map(|_| closed_form_is_reliable(sw.model)),
        "delta": delta,
    });
    emit(&cfg.output.out, &pretty(&report))
}

fn cmd_sweep(common: &Common, kappas: &Option<String>, method: Option<Method>) -> Result<(), CliError> {
    let mut cfg = common.resolve()?;
    if let Some(k) = kappas {
        let kappas = parse_list(k).map_err(flag_err("kappas"))?;
        cfg.sweep = Some(SweepGrid { kappas, ..cfg.sweep.unwrap_or_default() });
    }
    if method.is_some() {
        cfg.method = method;
    }
    let sw = finish(&cfg, &common.save_config)?;
    let grid = cfg.sweep.clone().ok_or_else(|| CliError::Config("sweep needs --kappas or a sweep grid".into()))?;
    let method = cfg.method.unwrap_or(if grid.shapes.is_empty() { Method::Both } else { Method::Numeric });
    let rows = run_sweep(sw.model, &sw.params, &grid, method);
    let text = match cfg.output.format {
        Format::Csv => sweep_csv(sw.model, &rows),
        Format::Json => pretty(&rows),
    };
    emit(&cfg.output.out, &text)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Certify { common, method } => cmd_certify(common, *method),
        Command::Simulate { common, gait, cycles, steps, pose, svg } => {
            cmd_simulate(common, gait, *cycles, *steps, pose, svg)
        }
        Command::Bracket { common, spec, fd_step } => cmd_bracket(common, spec, *fd_step),
        Command::Sweep { common, kappas, method } => cmd_sweep(common, kappas, *method),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
