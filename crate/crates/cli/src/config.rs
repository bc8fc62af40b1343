use std::path::Path;

use ruin_alloc::{validate, RiskModel};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Reads a model file, rejecting unknown fields and invalid parameters.
pub fn parse_config(path: &Path) -> Result<RiskModel, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let model = parse_str(&text).map_err(|e| match e {
        CliError::Parse {
            line,
            column,
            message,
            ..
        } => CliError::Parse {
            file: path.display().to_string(),
            line,
            column,
            message,
        },
        other => other,
    })?;
    Ok(model)
}

pub fn parse_str(text: &str) -> Result<RiskModel, CliError> {
    let model: RiskModel = serde_json::from_str(text).map_err(|e| CliError::Parse {
        file: String::new(),
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    let report = validate(&model);
    if !report.is_valid() {
        return Err(CliError::Risk(ruin_alloc::RiskError::InvalidModel(
            report.violations,
        )));
    }
    Ok(model)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// SHA-256 of the canonical JSON form, so formatting does not change the hash.
pub fn model_hash(model: &RiskModel) -> String {
    let canonical = serde_json::to_vec(model).expect("models always serialize");
    hex::encode(Sha256::digest(canonical))
}
