//! Run configuration: JSON file, command-line overrides and validation.

use std::path::{Path, PathBuf};

use efm_core::grid::GridConfig;
use efm_core::kernel::{MoleculeModel, DEFAULT_ANGULAR_NODES, DEFAULT_RADIAL_NODES};
use efm_core::{InitMode, MethodVariant, Problem, SimulationSetup, TimeSpec};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// JSON schema for [`RunConfig`], also shipped as `schema/run-config.schema.json`.
pub const SCHEMA: &str = include_str!("../schema/run-config.schema.json");

/// Environment variable naming the kernel cache directory.
pub const CACHE_ENV: &str = "EFM_KERNEL_CACHE";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    #[serde(default = "default_method")]
    pub method: MethodVariant,
    /// Velocity dimension; must match the problem when given.
    #[serde(default)]
    pub dim: Option<usize>,
    pub modes: usize,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default)]
    pub box_half_width: Option<f64>,
    #[serde(default)]
    pub allow_aliasing: bool,
    #[serde(default = "default_angular_nodes")]
    pub angular_nodes: usize,
    #[serde(default = "default_radial_nodes")]
    pub radial_nodes: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_output_every")]
    pub output_every: usize,
    /// Defaults to interpolation for collocation methods and projection for FGM.
    #[serde(default)]
    pub init: Option<InitMode>,
    /// Mollifier width for discontinuous data; defaults to the grid spacing.
    #[serde(default)]
    pub mollifier: Option<f64>,
    /// Times at which the full field on the `v_3 = 0` plane is written.
    #[serde(default)]
    pub field_times: Vec<f64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub kernel_cache: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn default_method() -> MethodVariant {
    MethodVariant::Efm
}

fn default_radius() -> f64 {
    6.0
}

fn default_angular_nodes() -> usize {
    DEFAULT_ANGULAR_NODES
}

fn default_radial_nodes() -> usize {
    DEFAULT_RADIAL_NODES
}

fn default_dt() -> f64 {
    TimeSpec::default().dt
}

fn default_t_end() -> f64 {
    TimeSpec::default().t_end
}

fn default_output_every() -> usize {
    1
}

impl RunConfig {
    /// Defaults for a problem at `modes` modes per dimension.
    pub fn new(problem: Problem, method: MethodVariant, modes: usize) -> Self {
        Self {
            problem,
            method,
            dim: None,
            modes,
            radius: default_radius(),
            box_half_width: None,
            allow_aliasing: false,
            angular_nodes: default_angular_nodes(),
            radial_nodes: default_radial_nodes(),
            dt: default_dt(),
            t_end: default_t_end(),
            output_every: 1,
            init: None,
            mollifier: None,
            field_times: Vec::new(),
            out_dir: None,
            kernel_cache: None,
            seed: 0,
        }
    }

    /// Reads `path` and applies `overrides` (`key=value`, dotted keys reach into `problem`).
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{} is not valid JSON: {e}", path.display())))?;
        Self::from_value(value, overrides)
    }

    pub fn from_value(mut value: Value, overrides: &[String]) -> Result<Self, CliError> {
        for item in overrides {
            apply_override(&mut value, item)?;
        }
        check_problem_keys(&value)?;
        let config: Self =
            serde_json::from_value(value).map_err(|e| CliError::Config(format!("invalid configuration: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Cross-field checks the schema cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        let need = self.problem.dim();
        if let Some(dim) = self.dim {
            if dim != need {
                return Err(CliError::Config(format!(
                    "problem `{}` is {need}-dimensional but dim = {dim}; drop `dim` or set it to {need}",
                    self.problem.name()
                )));
            }
        }
        if self.modes < 3 {
            return Err(CliError::Config(format!("modes must be at least 3, got {}", self.modes)));
        }
        if self.angular_nodes == 0 || self.radial_nodes == 0 {
            return Err(CliError::Config("quadrature node counts must be positive".into()));
        }
        if let Problem::Discontinuous2d { rho1 } = self.problem {
            if !(rho1 > 0.0 && rho1 < 2.0) {
                return Err(CliError::Config(format!("discontinuous2d needs 0 < rho1 < 2, got {rho1}")));
            }
        }
        self.time().validate().map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(t) = self.field_times.iter().find(|t| !(**t >= 0.0 && **t <= self.t_end)) {
            return Err(CliError::Config(format!("field time {t} lies outside [0, {}]", self.t_end)));
        }
        Ok(())
    }

    pub fn time(&self) -> TimeSpec {
        TimeSpec {
            dt: self.dt,
            t_end: self.t_end,
            output_every: self.output_every,
        }
    }

    /// Cache directory from the config, falling back to the environment.
    pub fn cache_dir(&self) -> Option<PathBuf> {
        self.kernel_cache
            .clone()
            .or_else(|| std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
    }

    pub fn setup(&self) -> Result<SimulationSetup, CliError> {
        let dim = self.problem.dim();
        let form = MoleculeModel::for_dim(dim)
            .map_err(|e| CliError::Config(e.to_string()))?
            .form();
        Ok(SimulationSetup {
            problem: self.problem,
            method: self.method,
            grid: GridConfig {
                dim,
                modes: self.modes,
                radius: self.radius,
                box_half_width: self.box_half_width,
                form,
                allow_aliasing: self.allow_aliasing,
            },
            angular_nodes: self.angular_nodes,
            radial_nodes: self.radial_nodes,
            time: self.time(),
            init: self.init.unwrap_or_else(|| self.method.default_init()),
            mollifier: self.mollifier,
            kernel_cache: self.cache_dir(),
        })
    }

    /// The configuration with every default made explicit, as echoed in summaries.
    pub fn resolved(&self) -> Self {
        let mut out = self.clone();
        out.dim = Some(self.problem.dim());
        out.init = Some(self.init.unwrap_or_else(|| self.method.default_init()));
        out.kernel_cache = self.cache_dir();
        out
    }
}

/// Serde accepts stray keys next to the tag of a parameterless problem, so check them here.
fn check_problem_keys(root: &Value) -> Result<(), CliError> {
    let Some(problem) = root.get("problem").and_then(Value::as_object) else {
        return Ok(());
    };
    let allowed: &[&str] = match problem.get("kind").and_then(Value::as_str) {
        Some("bkw2d" | "bkw3d") => &["kind"],
        Some("bigaussian2d") => &["kind", "u1", "u2"],
        Some("discontinuous2d") => &["kind", "rho1"],
        _ => return Ok(()),
    };
    match problem.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(extra) => Err(CliError::Config(format!(
            "problem `{}` has no parameter `{extra}`; expected {}",
            problem["kind"].as_str().unwrap_or_default(),
            allowed.join(", ")
        ))),
        None => Ok(()),
    }
}

/// Sets `key=value` in a JSON object. The value is read as JSON when it parses, otherwise as a
/// string, so `method=fgm` and `modes=64` both work.
pub fn apply_override(root: &mut Value, item: &str) -> Result<(), CliError> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{item}` is not KEY=VALUE")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::Config(format!("override `{item}` has an empty key")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let object = node
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("override `{key}`: `{}` is not an object", parts[..i].join("."))))?;
        if i + 1 == parts.len() {
            object.insert(part.to_string(), value);
            return Ok(());
        }
        node = object
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("split yields at least one part")
}
