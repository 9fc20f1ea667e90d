//! JSON report envelope shared by the audits and the command line.

use serde::Serialize;

/// Every emitted report carries the crate version, the command that
/// produced it and an overall verdict, alongside the command payload.
#[derive(Clone, Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub version: &'static str,
    pub command: String,
    pub pass: bool,
    pub payload: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &str, pass: bool, payload: T) -> Report<T> {
        Report {
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            pass,
            payload,
        }
    }

    /// Deterministic single-line JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }

    /// Deterministic pretty JSON, newline-terminated.
    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Payload {
        max_deviation: f64,
        samples: usize,
    }

    #[test]
    fn envelope_carries_version_command_and_verdict() {
        let r = Report::new(
            "coherence-check",
            true,
            Payload {
                max_deviation: 1e-15,
                samples: 100,
            },
        );
        let json = r.to_json();
        assert!(json.contains("\"command\":\"coherence-check\""));
        assert!(json.contains("\"pass\":true"));
        assert!(json.contains("\"version\""));
        // identical inputs give identical bytes
        assert_eq!(
            json,
            Report::new(
                "coherence-check",
                true,
                Payload {
                    max_deviation: 1e-15,
                    samples: 100
                }
            )
            .to_json()
        );
    }
}
