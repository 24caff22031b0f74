use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use spherecong::{Orientation, Tolerances};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCfg {
    pub nu: usize,
    pub nv: usize,
}

impl Default for GridCfg {
    fn default() -> Self {
        GridCfg { nu: 21, nv: 21 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Obj,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ObjProjection {
    #[default]
    First3,
    Pca,
}

/// Job description; unknown fields are rejected so runs stay reproducible.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub schema: u32,
    pub command: String,
    #[serde(default)]
    pub surface: Option<String>,
    /// For `verify`: "dualize" (default), "rouxel", or a surface id/path.
    #[serde(default)]
    pub partner: Option<String>,
    #[serde(default)]
    pub grid: GridCfg,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub orientation: Orientation,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    #[serde(default)]
    pub obj_projection: ObjProjection,
    /// Gallery parameters for the surface.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Include the Willmore stencil pass in `analyze`.
    #[serde(default = "default_true")]
    pub willmore: bool,
}

fn default_order() -> usize {
    3
}

fn default_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv]
}

fn default_true() -> bool {
    true
}

#[derive(Debug)]
pub struct CliError {
    pub kind: String,
    pub message: String,
    pub field: Option<String>,
    pub code: u8,
}

impl CliError {
    pub fn config(message: impl Into<String>, field: Option<&str>) -> Self {
        CliError {
            kind: "ConfigError".into(),
            message: message.into(),
            field: field.map(|s| s.to_string()),
            code: 1,
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError { kind: "IoError".into(), message: message.into(), field: None, code: 1 }
    }

    pub fn from_core(err: spherecong::Error) -> Self {
        use spherecong::Error as E;
        let (kind, code) = match &err {
            E::DegenerateCoverage { .. } | E::InsufficientSamples { .. } => ("DegenerateCoverage", 2),
            E::CertificationFailed { .. } => ("CertificationFailed", 3),
            _ => ("EvaluationError", 2),
        };
        CliError { kind: kind.into(), message: err.to_string(), field: None, code }
    }

    pub fn verification(message: impl Into<String>) -> Self {
        CliError { kind: "VerificationFailed".into(), message: message.into(), field: None, code: 3 }
    }

    pub fn exit_code(&self) -> u8 {
        self.code
    }

    pub fn to_stderr_json(&self) -> String {
        #[derive(Serialize)]
        struct Payload<'a> {
            error: Inner<'a>,
        }
        #[derive(Serialize)]
        struct Inner<'a> {
            kind: &'a str,
            message: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            field: Option<&'a str>,
        }
        serde_json::to_string(&Payload {
            error: Inner { kind: &self.kind, message: &self.message, field: self.field.as_deref() },
        })
        .expect("error payload serializes")
    }
}

pub fn load(path: &Path, cli_command: &str) -> Result<JobConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
    let cfg: JobConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("invalid job config: {e}"), None))?;
    if cfg.schema != 1 {
        return Err(CliError::config(
            format!("unsupported schema {}", cfg.schema),
            Some("schema"),
        ));
    }
    let known = ["analyze", "dual", "verify", "classify", "gallery", "export"];
    if !known.contains(&cfg.command.as_str()) {
        return Err(CliError::config(format!("unknown command `{}`", cfg.command), Some("command")));
    }
    if cfg.command != cli_command {
        return Err(CliError::config(
            format!("config command `{}` does not match CLI command `{cli_command}`", cfg.command),
            Some("command"),
        ));
    }
    if cfg.grid.nu < 2 {
        return Err(CliError::config("grid.nu must be at least 2", Some("grid.nu")));
    }
    if cfg.grid.nv < 2 {
        return Err(CliError::config("grid.nv must be at least 2", Some("grid.nv")));
    }
    if !(2..=4).contains(&cfg.order) {
        return Err(CliError::config("order must be in 2..=4", Some("order")));
    }
    if let Err(msg) = cfg.tolerances.validate() {
        return Err(CliError::config(msg, Some("tolerances")));
    }
    if cfg.command != "gallery" && cfg.surface.is_none() {
        return Err(CliError::config("surface is required for this command", Some("surface")));
    }
    Ok(cfg)
}
