//! CSV and JSON writers. Floats go out with 17 significant digits.

use std::io::Write;
use std::path::{Path, PathBuf};

use iceline::analysis::{Attractor, BifurcationRow};
use iceline::filippov::{Event, PlanarState};
use serde::Serialize;

use crate::CliError;

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("writing {}: {e}", path.display()))
}

pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Rows to a file, or to stdout when `path` is `None`.
pub fn write_csv(path: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| io_err(p, e))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let label = path.unwrap_or(Path::new("<stdout>"));
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header).map_err(|e| io_err(label, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| io_err(label, e))?;
    }
    w.flush().map_err(|e| io_err(label, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

pub const TRAJECTORY_HEADER: [&str; 4] = ["t", "A", "eta", "mode"];

pub fn trajectory_rows(samples: &[PlanarState]) -> Vec<Vec<String>> {
    samples
        .iter()
        .map(|s| vec![num(s.t), num(s.x), num(s.y), s.mode.as_str().to_string()])
        .collect()
}

#[derive(Serialize)]
pub struct EventRecord {
    kind: &'static str,
    t: f64,
    #[serde(rename = "A")]
    a: f64,
    eta: f64,
    /// Mode right after the event.
    mode: &'static str,
}

pub fn event_records(events: &[Event]) -> Vec<EventRecord> {
    events
        .iter()
        .map(|e| EventRecord {
            kind: e.kind.as_str(),
            t: e.t,
            a: e.state.x,
            eta: e.state.y,
            mode: e.state.mode.as_str(),
        })
        .collect()
}

pub const SWEEP_HEADER: [&str; 8] = [
    "eta_c",
    "attractor",
    "A_c",
    "lambda_re_max",
    "period",
    "eta_min",
    "eta_max",
    "reason",
];

pub fn sweep_rows(rows: &[BifurcationRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            let eq = r.equilibrium.as_ref();
            let orbit = r.orbit.as_ref().filter(|_| r.attractor == Attractor::PeriodicOrbit);
            vec![
                num(r.eta_c),
                r.attractor.as_str().to_string(),
                opt(eq.map(|e| e.a_c)),
                opt(eq.map(|e| e.lambda_re_max())),
                opt(orbit.map(|o| o.period)),
                opt(orbit.map(|o| o.eta_min)),
                opt(orbit.map(|o| o.eta_max)),
                r.reason.clone().unwrap_or_default(),
            ]
        })
        .collect()
}

pub const NULLCLINE_HEADER: [&str; 3] = ["eta", "A", "stability_branch"];
