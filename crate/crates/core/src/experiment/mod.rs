//! Experiment orchestration: configuration, bundled fixtures, the attack
//! sweep, run records and reports.

mod config;
pub mod fixtures;
mod records;
mod report;
mod runner;

pub use config::{
    AttackEntry, ClassifierOverrides, ClassifierSection, DatasetEntry, DatasetSource,
    ExperimentConfig, NamedDataset, OutputSection, ReportFormat, OUTPUT_DIR_ENV,
};
pub use records::{
    read_records, write_records, Outcome, RecordStage, RunMetrics, RunRecord, RECORD_HEADER,
};
pub use report::{
    aggregate, emit_report, read_report_csv, render_markdown, report_rows, write_report_csv,
    ExperimentReport, MetricCell, ReportCell, ReportCsvRow, REPORT_CSV_HEADER, REPORT_METRICS,
};
pub use runner::{run_experiment, run_experiment_observed, CellContext, PipelineObserver};

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const RECORDS_FILE: &str = "run_records.csv";
pub const REPORT_MARKDOWN_FILE: &str = "report.md";
pub const REPORT_CSV_FILE: &str = "report.csv";

/// Writes the run records and, when the report has cells, the report files
/// in the configured formats. Returns the paths written.
pub fn write_outputs(
    dir: &Path,
    records: &[RunRecord],
    report: &ExperimentReport,
    formats: &[ReportFormat],
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let records_path = dir.join(RECORDS_FILE);
    let file = std::fs::File::create(&records_path).map_err(|e| Error::io(&records_path, e))?;
    write_records(records, std::io::BufWriter::new(file))?;
    written.push(records_path);
    if !report.is_empty() {
        for &format in formats {
            let path = dir.join(match format {
                ReportFormat::Markdown => REPORT_MARKDOWN_FILE,
                ReportFormat::Csv => REPORT_CSV_FILE,
            });
            emit_report(report, format, &path)?;
            written.push(path);
        }
    }
    Ok(written)
}
