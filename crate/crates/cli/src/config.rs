//! Run configuration: a JSON document, then command-line overrides.

use std::path::Path;

use iceline::budyko::BudykoParams;
use iceline::jormungand::JormungandParams;
use iceline::{IntegratorConfig, ModelKind, ModelParams};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::{CliError, IntegratorFlags, ModelFlags};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCondition {
    #[serde(rename = "A")]
    pub a: f64,
    pub eta: f64,
}

/// The file as written. `params` stays untyped until the model is known.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    model: Option<ModelKind>,
    params: Map<String, Value>,
    integrator: IntegratorConfig,
    ic: Option<InitialCondition>,
    t_max: Option<f64>,
    dt_out: Option<f64>,
    seed: Option<u64>,
}

/// Effective configuration after file and flags are merged.
///
/// `None` fields fall back to the defaults of the command being run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: ModelKind,
    pub params: ModelParams,
    pub integrator: IntegratorConfig,
    pub ic: Option<InitialCondition>,
    pub t_max: Option<f64>,
    pub dt_out: Option<f64>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn typed_params(kind: ModelKind, raw: Map<String, Value>) -> Result<ModelParams, CliError> {
    let bad = |e: serde_json::Error| CliError::Precondition(format!("params: {e}"));
    Ok(match kind {
        ModelKind::Budyko => {
            ModelParams::Budyko(serde_json::from_value::<BudykoParams>(Value::Object(raw)).map_err(bad)?)
        }
        ModelKind::Jormungand => ModelParams::Jormungand(
            serde_json::from_value::<JormungandParams>(Value::Object(raw)).map_err(bad)?,
        ),
    })
}

pub struct Overrides<'a> {
    pub model: Option<ModelKind>,
    pub params: &'a ModelFlags,
    pub integrator: &'a IntegratorFlags,
    pub a0: Option<f64>,
    pub eta0: Option<f64>,
    pub t_max: Option<f64>,
    pub dt_out: Option<f64>,
    pub seed: Option<u64>,
}

pub fn load(path: Option<&Path>, flags: Overrides) -> Result<RunConfig, CliError> {
    let file = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Runtime(format!("reading {}: {e}", p.display())))?;
            serde_json::from_str::<ConfigFile>(&text)
                .map_err(|e| CliError::Precondition(format!("{}: {e}", p.display())))?
        }
        None => ConfigFile::default(),
    };
    let model = flags.model.or(file.model).unwrap_or(ModelKind::Budyko);
    let mut params = typed_params(model, file.params)?;
    flags.params.apply(&mut params)?;

    let mut integrator = file.integrator;
    flags.integrator.apply(&mut integrator);

    let ic = match (flags.a0, flags.eta0, file.ic) {
        (Some(a), Some(eta), _) => Some(InitialCondition { a, eta }),
        (None, None, ic) => ic,
        (a, eta, Some(ic)) => Some(InitialCondition {
            a: a.unwrap_or(ic.a),
            eta: eta.unwrap_or(ic.eta),
        }),
        _ => {
            return Err(CliError::Precondition(
                "--a0 and --eta0 must be given together unless the config has an ic".into(),
            ))
        }
    };

    Ok(RunConfig {
        model,
        params,
        integrator,
        ic,
        t_max: flags.t_max.or(file.t_max),
        dt_out: flags.dt_out.or(file.dt_out),
        seed: flags.seed.or(file.seed),
    })
}
