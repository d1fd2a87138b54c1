//! Human-readable and structured renderings of a [`CountReport`].

use std::fmt::Write as _;
use std::str::FromStr;

use super::{AbortReason, CountReport, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Structured,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "structured" | "json" => Ok(ReportFormat::Structured),
            other => Err(format!("unknown format `{other}` (expected text or structured)")),
        }
    }
}

impl CountReport {
    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Text => self.to_text(),
            ReportFormat::Structured => self.to_json(),
        }
    }

    /// One JSON object with every field.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        match (self.status, self.exact_count) {
            (Status::Exact, Some(0)) => s.push_str("Exact Count: 0 (empty)\n"),
            (Status::Exact, Some(n)) => {
                let _ = writeln!(s, "Exact Count: {n}");
                let _ = writeln!(s, "Influence: {:.4} bits", (n as f64).log2());
            }
            _ => {
                if let Status::Aborted = self.status {
                    let why = match &self.abort_reason {
                        Some(AbortReason::MaxIterations) => "iteration limit reached".to_string(),
                        Some(AbortReason::Solver { message }) => format!("solver error: {message}"),
                        None => "unknown".to_string(),
                    };
                    let _ = writeln!(s, "Aborted: {why}");
                }
                if let (Some(lo), Some(hi)) = (self.lower, self.upper) {
                    let _ = writeln!(s, "Lower: {lo:.4} Upper: {hi:.4}");
                }
                if let (Some(m), Some(sd)) = (self.mean, self.sigma) {
                    let _ = writeln!(
                        s,
                        "Mean: {m:.4} Sigma: {sd:.4} (confidence {:.3})",
                        self.confidence_level
                    );
                }
            }
        }
        if let Some(lo) = self.sound_lower {
            let hi = self
                .sound_upper
                .map_or_else(|| "none".to_string(), |u| format!("{u:.4}"));
            let _ = writeln!(
                s,
                "Sound Lower: {lo:.4} Sound Upper: {hi} (confidence >= {:.4})",
                self.sound_confidence.unwrap_or(0.0)
            );
        }
        let _ = writeln!(
            s,
            "Iterations: {} Queries: {} Seed: {} Time: {:.3}s",
            self.iterations, self.total_queries, self.seed, self.wall_time_secs
        );
        s
    }
}
