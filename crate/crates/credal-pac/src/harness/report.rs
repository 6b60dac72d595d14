//! Campaign results: per-epsilon violation frequencies with analytic
//! comparisons, plus JSON and CSV emission.
//!
//! Reports are deterministic: every field is a function of the
//! validated config and the master seed, so re-running a config
//! reproduces the emitted bytes (wall time is kept in memory only and
//! never serialized). JSON carries the full structure; CSV is the flat
//! plot-ready table `eps, frequency, std_error, analytic_bound,
//! verdict`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CampaignMode {
    Classical,
    Credal,
}

/// Verdict of an empirical frequency against its analytic bound.
///
/// `ViolatedBeyondSlack` means `frequency > bound + 3 * std_error`;
/// anything within that slack — or any row without a bound — is
/// `Consistent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    ViolatedBeyondSlack,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::ViolatedBeyondSlack => "violated_beyond_slack",
        }
    }
}

/// One grid point of a violation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsRow {
    pub eps: f64,
    /// Fraction of trials whose operative risk (classical risk in
    /// classical mode, worst-case credal risk in credal mode) strictly
    /// exceeds `eps`.
    pub frequency: f64,
    /// Binomial standard error `sqrt(f (1 - f) / trials)`.
    pub std_error: f64,
    /// In credal mode, the fraction of trials whose risk under the
    /// trial's own training distribution exceeds `eps`; `None` in
    /// classical mode, where it would equal `frequency`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub classical_frequency: Option<f64>,
    /// The configured candidate bound evaluated at `eps`, clipped to
    /// `[0, 1]`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub analytic_bound: Option<f64>,
    pub verdict: Verdict,
}

/// The empirical epsilon calibrated from a campaign: the smallest grid
/// epsilon whose violation frequency is at most the target delta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CalibrationOutcome {
    Calibrated { eps: f64 },
    UncalibratableOnGrid,
}

/// Result of a Monte Carlo violation campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub config_digest: String,
    pub master_seed: u64,
    pub mode: CampaignMode,
    pub trials: u64,
    pub n: usize,
    pub delta: f64,
    /// Trials whose ERM had empirical risk exactly zero.
    pub erm_zero_empirical_risk_trials: u64,
    pub rows: Vec<EpsRow>,
    /// Calibration at the config's delta.
    pub calibration: CalibrationOutcome,
    /// Measured wall time; in-memory only so emitted reports stay
    /// byte-identical across runs and thread counts.
    #[serde(skip)]
    pub wall_time_ms: Option<u64>,
}

impl ViolationReport {
    /// Smallest grid epsilon with `frequency <= delta`.
    pub fn calibrate(&self, delta: f64) -> CalibrationOutcome {
        for row in &self.rows {
            if row.frequency <= delta {
                return CalibrationOutcome::Calibrated { eps: row.eps };
            }
        }
        CalibrationOutcome::UncalibratableOnGrid
    }

    /// True if any row is violated beyond slack.
    pub fn has_violation(&self) -> bool {
        self.rows
            .iter()
            .any(|row| row.verdict == Verdict::ViolatedBeyondSlack)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Renders a report in the requested format. Numbers are written in
/// shortest round-trip decimal form in both formats.
pub fn emit_report(report: &ViolationReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(report).expect("report serializes");
            text.push('\n');
            text
        }
        ReportFormat::Csv => {
            let mut text = String::from("eps,frequency,std_error,analytic_bound,verdict\n");
            for row in &report.rows {
                let bound = row
                    .analytic_bound
                    .map(|b| b.to_string())
                    .unwrap_or_default();
                text.push_str(&format!(
                    "{},{},{},{},{}\n",
                    row.eps,
                    row.frequency,
                    row.std_error,
                    bound,
                    row.verdict.as_str()
                ));
            }
            text
        }
    }
}
