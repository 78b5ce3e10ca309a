use std::io::Write;

use serde::Serialize;

use super::checks::{CheckLine, ScanReport};
use super::experiment::ExperimentReport;
use super::HarnessError;

/// One CSV row per experiment instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub seed: u64,
    pub d: usize,
    pub n: usize,
    pub mode: String,
    pub state: String,
    pub codec: String,
    pub instance: usize,
    pub trials: u64,
    pub correlation_hat: f64,
    pub correlation_stderr: f64,
    pub oracle_correlation: f64,
    pub z_score: f64,
    pub marginal_a_hat: f64,
    pub marginal_b_hat: f64,
    pub oracle_marginal_a: f64,
    pub oracle_marginal_b: f64,
    pub marginals_simulated: bool,
    pub mean_iterations: f64,
    pub mean_message_bits: f64,
    pub empirical_entropy: f64,
    pub analytic_entropy: f64,
    pub success_rate: Option<f64>,
    pub pass: bool,
}

pub fn experiment_rows(report: &ExperimentReport) -> Vec<ExperimentRow> {
    let cfg = &report.config;
    report
        .instances
        .iter()
        .map(|r| {
            let s = &r.stats;
            ExperimentRow {
                seed: cfg.seed,
                d: cfg.d,
                n: report.n,
                mode: cfg.mode.to_string(),
                state: cfg.state.to_string(),
                codec: report.codec.clone(),
                instance: r.index,
                trials: s.trials,
                correlation_hat: s.correlation_hat,
                correlation_stderr: s.correlation_stderr,
                oracle_correlation: s.oracle_correlation,
                z_score: s.z_score,
                marginal_a_hat: s.marginal_a_hat,
                marginal_b_hat: s.marginal_b_hat,
                oracle_marginal_a: s.oracle_marginal_a,
                oracle_marginal_b: s.oracle_marginal_b,
                marginals_simulated: s.marginals_simulated,
                mean_iterations: s.mean_iterations,
                mean_message_bits: s.mean_message_bits,
                empirical_entropy: s.empirical_entropy,
                analytic_entropy: s.analytic_entropy,
                success_rate: s.postselection.as_ref().map(|p| p.success_rate),
                pass: r.pass,
            }
        })
        .collect()
}

/// Writes serializable rows as CSV with a header line.
pub fn write_csv<S: Serialize, W: Write>(rows: &[S], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_experiment_csv<W: Write>(
    report: &ExperimentReport,
    out: W,
) -> Result<(), HarnessError> {
    write_csv(&experiment_rows(report), out)
}

pub fn write_scan_csv<W: Write>(report: &ScanReport, out: W) -> Result<(), HarnessError> {
    write_csv(&report.rows, out)
}

pub fn write_checks_csv<W: Write>(lines: &[CheckLine], out: W) -> Result<(), HarnessError> {
    write_csv(lines, out)
}

/// Pretty JSON followed by a newline.
pub fn write_json<S: Serialize, W: Write>(value: &S, mut out: W) -> Result<(), HarnessError> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}
