//! Report envelope and file output.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use microyoung::{Error, RunConfig};
use serde::Serialize;
use serde_json::Value;

/// Outcome classes and their exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotAdmissible,
    Inconclusive,
    InputError,
    Error,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail | Status::Error => 1,
            Status::NotAdmissible => 2,
            Status::Inconclusive => 3,
            Status::InputError => 4,
        }
    }

    pub fn of_error(e: &Error) -> Status {
        match e {
            Error::NotAdmissible(_) | Error::NoExtension(_) | Error::MultiplePoints(_) => {
                Status::NotAdmissible
            }
            Error::Inconclusive(_) | Error::RolesUndetermined(_) => Status::Inconclusive,
            Error::InvalidInput(_)
            | Error::DomainMismatch(_)
            | Error::InsufficientDerivatives { .. } => Status::InputError,
            _ => Status::Error,
        }
    }
}

#[derive(Debug, Serialize)]
struct Meta {
    tool: &'static str,
    version: &'static str,
    /// Seconds since the epoch; `SOURCE_DATE_EPOCH` overrides the clock.
    timestamp: u64,
}

/// Everything except `meta.timestamp` is a function of the inputs.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub kernels: Vec<String>,
    pub config: RunConfig,
    pub status: Status,
    pub reason: Option<String>,
    pub result: Value,
    meta: Meta,
}

fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        })
}

impl Report {
    pub fn new(
        command: &str,
        kernels: &[String],
        config: &RunConfig,
        status: Status,
        reason: Option<String>,
        result: Value,
    ) -> Self {
        Report {
            command: command.into(),
            kernels: kernels.to_vec(),
            config: config.clone(),
            status,
            reason,
            result,
            meta: Meta {
                tool: "microyoung",
                version: env!("CARGO_PKG_VERSION"),
                timestamp: timestamp(),
            },
        }
    }

    fn slug(&self) -> String {
        let mut s = self.command.replace(' ', "-");
        for k in &self.kernels {
            s.push('_');
            s.extend(k.chars().map(|c| {
                if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                    c
                } else {
                    '-'
                }
            }));
        }
        s
    }

    /// Writes `<slug>.json` and, when given, `<slug>.csv`. Returns the JSON path.
    pub fn write(&self, dir: &Path, csv: Option<&str>) -> std::io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let slug = self.slug();
        let json = dir.join(format!("{slug}.json"));
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        fs::write(&json, text)?;
        if let Some(c) = csv {
            fs::write(dir.join(format!("{slug}.csv")), c)?;
        }
        Ok(json)
    }
}
