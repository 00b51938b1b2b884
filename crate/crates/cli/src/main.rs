//! `iceline`: simulate the ice-line model, sweep `η_c`, sample nullclines and
//! classify equilibria. Output is CSV and JSON for external plotting.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use iceline::analysis::{standard_initial_condition, sweep_eta_c, Attractor, OrbitSearch};
use iceline::filippov::{integrate_with_section, one_sided_lipschitz, PlanarState, Rect};
use iceline::{IceLineModel, IntegratorConfig, Model, ModelKind, ModelParams, Stability};
use serde::Serialize;

use config::{Overrides, RunConfig};
use output::{num, with_suffix, write_csv, write_json};

#[derive(Debug)]
pub enum CliError {
    /// Bad input or a degenerate case: exit code 2.
    Precondition(String),
    /// Exit code 1.
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Precondition(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    fn report(&self) {
        let (kind, message) = match self {
            CliError::Precondition(m) => ("precondition", m),
            CliError::Runtime(m) => ("runtime", m),
        };
        eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Budyko,
    Jormungand,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Budyko => ModelKind::Budyko,
            ModelArg::Jormungand => ModelKind::Jormungand,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "iceline", version, about = "Ice-line and greenhouse-gas climate model")]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path prefix.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    dump_config: bool,
    #[arg(long, global = true, value_enum)]
    model: Option<ModelArg>,
    #[command(flatten)]
    params: ModelFlags,
    #[command(flatten)]
    integrator: IntegratorFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Default, Args)]
pub struct ModelFlags {
    #[arg(long, global = true, allow_negative_numbers = true)]
    q: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    s2: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    c: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    tc: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    rho: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    delta: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    eta_c: Option<f64>,
    /// Budyko only.
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha1: Option<f64>,
    /// Budyko only.
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha2: Option<f64>,
    /// Jormungand only: steepness of the snow line.
    #[arg(long, global = true, allow_negative_numbers = true)]
    m: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha_w: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha_i: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha_s: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    y_snow: Option<f64>,
}

fn set(slot: &mut f64, v: Option<f64>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl ModelFlags {
    fn apply(&self, params: &mut ModelParams) -> Result<(), CliError> {
        let foreign = |names: &[(&str, Option<f64>)], model: &str| {
            match names.iter().find(|(_, v)| v.is_some()) {
                Some((n, _)) => Err(CliError::Precondition(format!("--{n} does not apply to the {model} model"))),
                None => Ok(()),
            }
        };
        match params {
            ModelParams::Budyko(p) => {
                foreign(
                    &[
                        ("m", self.m),
                        ("alpha-w", self.alpha_w),
                        ("alpha-i", self.alpha_i),
                        ("alpha-s", self.alpha_s),
                        ("y-snow", self.y_snow),
                    ],
                    "budyko",
                )?;
                set(&mut p.q, self.q);
                set(&mut p.s2, self.s2);
                set(&mut p.b, self.b);
                set(&mut p.c, self.c);
                set(&mut p.tc, self.tc);
                set(&mut p.rho, self.rho);
                set(&mut p.delta, self.delta);
                set(&mut p.eta_c, self.eta_c);
                set(&mut p.alpha1, self.alpha1);
                set(&mut p.alpha2, self.alpha2);
            }
            ModelParams::Jormungand(p) => {
                foreign(&[("alpha1", self.alpha1), ("alpha2", self.alpha2)], "jormungand")?;
                set(&mut p.q, self.q);
                set(&mut p.s2, self.s2);
                set(&mut p.b, self.b);
                set(&mut p.c, self.c);
                set(&mut p.tc, self.tc);
                set(&mut p.rho, self.rho);
                set(&mut p.delta, self.delta);
                set(&mut p.eta_c, self.eta_c);
                set(&mut p.m, self.m);
                set(&mut p.alpha_w, self.alpha_w);
                set(&mut p.alpha_i, self.alpha_i);
                set(&mut p.alpha_s, self.alpha_s);
                set(&mut p.y_snow, self.y_snow);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Default, Args)]
pub struct IntegratorFlags {
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    #[arg(long, global = true)]
    max_step: Option<f64>,
}

impl IntegratorFlags {
    fn apply(&self, cfg: &mut IntegratorConfig) {
        set(&mut cfg.rel_tol, self.rel_tol);
        set(&mut cfg.abs_tol, self.abs_tol);
        set(&mut cfg.max_step, self.max_step);
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one trajectory; writes `<out>.csv` and `<out>.events.json`.
    Simulate {
        #[arg(long, allow_negative_numbers = true)]
        a0: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        eta0: Option<f64>,
        /// Defaults to 500/δ.
        #[arg(long)]
        t_max: Option<f64>,
        /// Defaults to t_max/1000.
        #[arg(long)]
        dt_out: Option<f64>,
        /// Also estimate the one-sided Lipschitz constant over the visited box.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Classify the attractor on a uniform grid of η_c.
    Sweep {
        #[arg(long, default_value_t = 0.05)]
        eta_c_min: f64,
        #[arg(long, default_value_t = 0.95)]
        eta_c_max: f64,
        #[arg(long, default_value_t = 19)]
        steps: usize,
        /// Orbit search horizon; defaults to 2000/δ.
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Sample the η-nullcline on [0, 1].
    Nullcline {
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Print the interior equilibrium and its stability as JSON.
    Equilibrium,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            e.report();
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (a0, eta0, t_max, dt_out, seed) = match &cli.command {
        Command::Simulate {
            a0,
            eta0,
            t_max,
            dt_out,
            seed,
        } => (*a0, *eta0, *t_max, *dt_out, *seed),
        Command::Sweep { t_max, .. } => (None, None, *t_max, None, None),
        _ => (None, None, None, None, None),
    };
    let cfg = config::load(
        cli.config.as_deref(),
        Overrides {
            model: cli.model.map(Into::into),
            params: &cli.params,
            integrator: &cli.integrator,
            a0,
            eta0,
            t_max,
            dt_out,
            seed,
        },
    )?;
    if cli.dump_config {
        println!("{}", cfg.canonical_json());
        return Ok(());
    }
    cfg.integrator
        .validate()
        .map_err(|e| CliError::Precondition(e.to_string()))?;
    let model = cfg
        .params
        .build()
        .map_err(|e| CliError::Precondition(e.to_string()))?;

    match cli.command {
        Command::Simulate { .. } => simulate(&cfg, &model, cli.out.as_deref()),
        Command::Sweep {
            eta_c_min,
            eta_c_max,
            steps,
            ..
        } => sweep(&cfg, eta_c_min, eta_c_max, steps, cli.jobs, cli.out.as_deref()),
        Command::Nullcline { samples } => nullcline(&model, samples, cli.out.as_deref()),
        Command::Equilibrium => equilibrium(&model),
    }
}

#[derive(Serialize)]
struct Diagnostics {
    seed: u64,
    pairs: usize,
    rect: Rect,
    one_sided_lipschitz: f64,
}

fn simulate(cfg: &RunConfig, model: &Model, out: Option<&Path>) -> Result<(), CliError> {
    let prefix = out.unwrap_or(Path::new("simulation"));
    let ic = match cfg.ic {
        Some(ic) => PlanarState::interior(ic.a, ic.eta),
        None => standard_initial_condition(model),
    };
    let t_max = cfg.t_max.unwrap_or(500.0 / model.delta());
    let dt_out = cfg.dt_out.unwrap_or(if t_max > 0.0 { t_max / 1000.0 } else { 1.0 });
    if !(ic.x.is_finite() && ic.y.is_finite()) {
        return Err(CliError::Precondition("initial condition must be finite".into()));
    }
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(CliError::Precondition(format!("t_max must be finite and >= 0, got {t_max}")));
    }
    if !(dt_out > 0.0 && dt_out.is_finite()) {
        return Err(CliError::Precondition(format!("dt_out must be finite and > 0, got {dt_out}")));
    }

    let csv_path = with_suffix(prefix, ".csv");
    let events_path = with_suffix(prefix, ".events.json");
    let traj = match integrate_with_section(model, ic, t_max, dt_out, None, &cfg.integrator) {
        Ok(traj) => traj,
        Err(failure) => {
            // Keep what was computed; the error itself goes to stderr.
            let rows = output::trajectory_rows(&failure.partial.samples);
            write_csv(Some(&with_suffix(&csv_path, ".partial")), &output::TRAJECTORY_HEADER, &rows)?;
            write_json(
                &with_suffix(&events_path, ".partial"),
                &output::event_records(&failure.partial.events),
            )?;
            return Err(CliError::Runtime(failure.to_string()));
        }
    };
    write_csv(
        Some(&csv_path),
        &output::TRAJECTORY_HEADER,
        &output::trajectory_rows(&traj.samples),
    )?;
    write_json(&events_path, &output::event_records(&traj.events))?;

    if let Some(seed) = cfg.seed {
        let (mut rect, pairs) = (
            Rect {
                x_min: f64::INFINITY,
                x_max: f64::NEG_INFINITY,
                y_min: f64::INFINITY,
                y_max: f64::NEG_INFINITY,
            },
            10_000,
        );
        for s in &traj.samples {
            rect.x_min = rect.x_min.min(s.x - 1e-3);
            rect.x_max = rect.x_max.max(s.x + 1e-3);
            rect.y_min = rect.y_min.min(s.y - 1e-3);
            rect.y_max = rect.y_max.max(s.y + 1e-3);
        }
        let k = one_sided_lipschitz(model, rect, pairs, seed, &cfg.integrator)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        write_json(
            &with_suffix(prefix, ".diagnostics.json"),
            &Diagnostics {
                seed,
                pairs,
                rect,
                one_sided_lipschitz: k,
            },
        )?;
    }
    Ok(())
}

fn sweep(
    cfg: &RunConfig,
    lo: f64,
    hi: f64,
    steps: usize,
    jobs: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if !(lo < hi) {
        return Err(CliError::Precondition(format!(
            "--eta-c-min ({lo}) must be below --eta-c-max ({hi})"
        )));
    }
    if steps == 0 {
        return Err(CliError::Precondition("--steps must be at least 1".into()));
    }
    if jobs == 0 {
        return Err(CliError::Precondition("--jobs must be at least 1".into()));
    }
    let grid: Vec<f64> = if steps == 1 {
        vec![lo]
    } else {
        (0..steps)
            .map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64)
            .collect()
    };
    let search = OrbitSearch {
        t_max: cfg.t_max,
        ..Default::default()
    };
    let rows = sweep_eta_c(&cfg.params, &grid, &cfg.integrator, &search, jobs)
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let csv_rows = output::sweep_rows(&rows);
    match out {
        Some(prefix) => {
            write_csv(Some(&with_suffix(prefix, ".csv")), &output::SWEEP_HEADER, &csv_rows)?;
            write_json(&with_suffix(prefix, ".json"), &rows)?;
        }
        None => write_csv(None, &output::SWEEP_HEADER, &csv_rows)?,
    }
    if rows.iter().all(|r| r.attractor == Attractor::Undetermined) {
        return Err(CliError::Runtime(format!("all {} sweep rows are undetermined", rows.len())));
    }
    Ok(())
}

fn nullcline(model: &Model, samples: usize, out: Option<&Path>) -> Result<(), CliError> {
    if samples < 2 {
        return Err(CliError::Precondition(format!("--samples must be at least 2, got {samples}")));
    }
    let rows: Vec<Vec<String>> = (0..samples)
        .map(|k| {
            let eta = k as f64 / (samples - 1) as f64;
            // Slope stability: the branch attracts in η where ∂h/∂η < 0.
            let branch = if model.dh_deta(eta) < 0.0 { "stable" } else { "unstable" };
            vec![num(eta), num(model.nullcline_a(eta)), branch.to_string()]
        })
        .collect();
    let path = out.map(|p| with_suffix(p, ".csv"));
    write_csv(path.as_deref(), &output::NULLCLINE_HEADER, &rows)
}

fn equilibrium(model: &Model) -> Result<(), CliError> {
    let eta_c = model.eta_c();
    if !(eta_c > 0.0 && eta_c < 1.0) {
        return Err(CliError::Precondition(format!(
            "degenerate case: eta_c = {eta_c} lies on or outside the boundary of (0, 1); \
             no interior equilibrium is classified"
        )));
    }
    let report = model.equilibrium();
    if report.stability == Stability::Degenerate {
        eprintln!("warning: eigenvalues have zero real part at eta_c = {eta_c}");
    }
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    println!("{text}");
    Ok(())
}
