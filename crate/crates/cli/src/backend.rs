//! Backend selection from `--backend` specs.

use std::str::FromStr;
use std::sync::Arc;

use fincpt_core::genbackend::{GenerationBackend, HttpBackend, MockBackend, ReferenceBackend, RetryPolicy};
use fincpt_core::trainer::TinyLm;
use fincpt_core::ByteTokenizer;

use crate::error::CliError;

/// `mock-echo`, `mock-fail`, `mock-fixed:<text>` (`\n` is a newline), `mock-hashed:<seed>`,
/// `http:<url>` or `reference:<model.json>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendSpec {
    MockEcho,
    MockFail,
    MockFixed(String),
    MockHashed(u64),
    Http(String),
    Reference(String),
}

impl FromStr for BackendSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        match (kind, arg) {
            ("mock-echo", None) => Ok(BackendSpec::MockEcho),
            ("mock-fail", None) => Ok(BackendSpec::MockFail),
            ("mock-fixed", Some(text)) => Ok(BackendSpec::MockFixed(text.replace("\\n", "\n"))),
            ("mock-hashed", Some(seed)) => {
                seed.parse().map(BackendSpec::MockHashed).map_err(|_| format!("bad mock seed `{seed}`"))
            }
            ("http", Some(url)) if !url.is_empty() => Ok(BackendSpec::Http(url.to_string())),
            ("reference", Some(path)) if !path.is_empty() => Ok(BackendSpec::Reference(path.to_string())),
            _ => Err(format!(
                "unknown backend `{s}` (expected mock-echo, mock-fail, mock-fixed:<text>, mock-hashed:<seed>, http:<url> or reference:<model.json>)"
            )),
        }
    }
}

/// Builds the backend. `identity` labels it in reports.
pub fn build_backend(spec: &BackendSpec, identity: &str, retry: RetryPolicy) -> Result<Box<dyn GenerationBackend>, CliError> {
    Ok(match spec {
        BackendSpec::MockEcho => Box::new(MockBackend::echo(identity)),
        BackendSpec::MockFail => Box::new(MockBackend::failing(identity)),
        BackendSpec::MockFixed(text) => Box::new(MockBackend::fixed(identity, text.clone())),
        BackendSpec::MockHashed(seed) => Box::new(MockBackend::hashed(identity, *seed, 8, 64)),
        BackendSpec::Http(url) => {
            Box::new(HttpBackend::from_env(identity, url.clone(), retry).map_err(|e| CliError::Backend(e.to_string()))?)
        }
        BackendSpec::Reference(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{path}: {e}")))?;
            let model: TinyLm = serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{path}: {e}")))?;
            Box::new(ReferenceBackend::new(identity, Arc::new(model), Arc::new(ByteTokenizer)))
        }
    })
}
