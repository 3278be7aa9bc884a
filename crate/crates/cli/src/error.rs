use metfraisse_core::amalgam::AmalgamError;
use metfraisse_core::apx::ApxError;
use metfraisse_core::banach::BanachError;
use metfraisse_core::engine::EngineError;
use metfraisse_core::metric::MetricError;
use serde::Serialize;

/// A failed command. The exit code is 1 for domain failures, 2 for usage
/// errors and 3 for exhausted budgets.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{kind}: {message}")]
    Domain {
        kind: String,
        message: String,
        report: Option<serde_json::Value>,
    },
    #[error("budget exceeded: {0}")]
    Budget(String),
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a serde_json::Value>,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Budget(_) => 3,
        }
    }

    pub fn domain(kind: &str, message: impl Into<String>) -> Self {
        CliError::Domain {
            kind: kind.into(),
            message: message.into(),
            report: None,
        }
    }

    pub fn kind(&self) -> &str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Domain { kind, .. } => kind,
            CliError::Budget(_) => "BudgetExceeded",
        }
    }

    /// `{"error": kind, "message": ..., "report": ...}`.
    pub fn to_json(&self) -> String {
        let message = match self {
            CliError::Domain { message, .. } => message.clone(),
            other => other.to_string(),
        };
        let report = match self {
            CliError::Domain { report, .. } => report.as_ref(),
            _ => None,
        };
        serde_json::to_string(&ErrorJson {
            error: self.kind(),
            message,
            report,
        })
        .expect("serializable")
    }
}

/// The innermost variant name of an error's debug form, skipping wrappers
/// such as `Apx(Metric(TriangleViolation { .. }))`.
fn variant(debug: &str) -> String {
    let mut s = debug;
    loop {
        let end = s
            .find(|c: char| !c.is_alphanumeric() && c != '_')
            .unwrap_or(s.len());
        let name = &s[..end];
        let wrapper = matches!(name, "Metric" | "Apx" | "Amalgam" | "Banach" | "Engine");
        if wrapper && s[end..].starts_with('(') {
            s = &s[end + 1..];
            continue;
        }
        return name.to_string();
    }
}

macro_rules! domain_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Domain { kind: variant(&format!("{:?}", e)), message: e.to_string(), report: None }
            }
        }
    )*};
}

domain_from!(MetricError, ApxError, AmalgamError, BanachError);

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            e => CliError::Domain {
                kind: variant(&format!("{:?}", e)),
                message: e.to_string(),
                report: None,
            },
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(format!("malformed JSON: {}", e))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}
