use thiserror::Error;

/// Failure classes of a run, each mapped to a fixed process exit status.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("solver failure ({kind}): {message}")]
    SolverFailure { kind: String, message: String },
    #[error("acceptance failure: criteria {0:?} did not pass")]
    AcceptanceFailure(Vec<u32>),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::ConfigInvalid(_) => 2,
            Self::SolverFailure { .. } => 3,
            Self::AcceptanceFailure(_) => 4,
            Self::Io(_) => 1,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Self::ConfigInvalid(msg.into())
    }

    /// Wraps a typed solver error, keeping its variant name for the manifest.
    pub fn solver<E: std::fmt::Debug + std::fmt::Display>(err: E) -> Self {
        Self::SolverFailure {
            kind: variant_name(&format!("{err:?}")),
            message: err.to_string(),
        }
    }
}

/// Leading variant of a `Debug` rendering; wrappers like `Gp(StabilityViolation { .. })`
/// report the inner variant.
fn variant_name(debug: &str) -> String {
    let ident = |s: &str| -> String { s.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect() };
    let head = ident(debug);
    if let Some(inner) = debug[head.len()..].strip_prefix('(') {
        let name = ident(inner);
        if name.starts_with(|c: char| c.is_ascii_uppercase()) {
            return name;
        }
    }
    head
}

pub type LabResult<T> = Result<T, LabError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names() {
        assert_eq!(variant_name("NonPositiveMu(0.0)"), "NonPositiveMu");
        assert_eq!(variant_name("Gp(StabilityViolation { dt: 1.0 })"), "StabilityViolation");
        assert_eq!(variant_name("GridMismatch"), "GridMismatch");
    }
}
