use ruin_alloc::RiskError;
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{file}: parse error at line {line} column {column}: {message}")]
    Parse {
        file: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error("{0} verification check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } | CliError::Io(_) => 1,
            CliError::Risk(e) if e.is_validation() || matches!(e, RiskError::NotSupported(_)) => 1,
            CliError::Risk(_) | CliError::ChecksFailed(_) => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Parse { .. } => "parse",
            CliError::Io(_) => "io",
            CliError::Risk(e) => match e {
                RiskError::InvalidModel(_) => "invalid_model",
                RiskError::Domain(_) => "domain",
                RiskError::NoCramerRoot => "no_cramer_root",
                RiskError::InfeasibleCondition(_) => "infeasible_condition",
                RiskError::UndefinedAllocation(_) => "undefined_allocation",
                RiskError::NotSupported(_) => "not_supported",
                RiskError::ZeroRuinedPaths => "zero_ruined_paths",
                RiskError::ZeroConditioningPaths => "zero_conditioning_paths",
            },
            CliError::ChecksFailed(_) => "checks_failed",
        }
    }

    /// One-line JSON description for standard error.
    pub fn to_json(&self) -> String {
        let mut v = json!({
            "error": if self.exit_code() == 1 { "validation" } else { "numerical" },
            "kind": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        match self {
            CliError::Parse { line, column, .. } => {
                v["line"] = json!(line);
                v["column"] = json!(column);
            }
            CliError::Risk(RiskError::InvalidModel(violations)) => {
                v["violations"] = json!(violations)
            }
            _ => {}
        }
        v.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Risk(RiskError::NoCramerRoot).exit_code(), 2);
        assert_eq!(CliError::Risk(RiskError::Domain("x".into())).exit_code(), 1);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::ChecksFailed(1).exit_code(), 2);
    }

    #[test]
    fn json_line_is_parseable() {
        let e = CliError::Parse {
            file: "m.json".into(),
            line: 3,
            column: 7,
            message: "bad".into(),
        };
        let v: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(v["line"], 3);
        assert_eq!(v["error"], "validation");
        assert!(!e.to_json().contains('\n'));
    }
}
