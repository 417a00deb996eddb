//! Aggregation of run records into percentage-change grids, and report
//! output.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::attacks::AttackKind;
use crate::error::{Error, Result};
use crate::metrics::percent_change;
use crate::tabular::format_real;

use super::config::ReportFormat;
use super::records::{cmp_ratio, RecordStage, RunRecord};

pub const REPORT_METRICS: [&str; 6] = ["LR", "RF", "MLP", "WD", "KS", "KLD"];

/// Mean percentage change of one metric over the contributors for which it
/// is defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricCell {
    pub mean: Option<f64>,
    pub defined: usize,
    /// Contributors with a zero baseline.
    pub undefined: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportCell {
    pub attack: AttackKind,
    pub ratio: Option<f64>,
    pub metrics: [MetricCell; 6],
    /// Attacked runs keyed to this cell.
    pub contributors: usize,
    /// Runs that failed, attacked or baseline.
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub cells: Vec<ReportCell>,
}

fn mean_of(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

impl ExperimentReport {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell(&self, attack: AttackKind, ratio: Option<f64>) -> Option<&ReportCell> {
        self.cells
            .iter()
            .find(|c| c.attack == attack && cmp_ratio(c.ratio, ratio).is_eq())
    }

    /// Attacks in report order.
    pub fn attacks(&self) -> Vec<AttackKind> {
        let mut out: Vec<AttackKind> = self.cells.iter().map(|c| c.attack).collect();
        out.dedup();
        out
    }

    /// Per-metric mean of an attack's cell means over its ratios.
    pub fn attack_average(&self, attack: AttackKind) -> [Option<f64>; 6] {
        std::array::from_fn(|m| {
            let means: Vec<f64> = self
                .cells
                .iter()
                .filter(|c| c.attack == attack)
                .filter_map(|c| c.metrics[m].mean)
                .collect();
            mean_of(&means)
        })
    }
}

/// Percentage changes per `(attack, ratio)`, each computed against the
/// matching `(dataset, generator, seed)` baseline and then averaged.
/// The result does not depend on the order of `records`.
pub fn aggregate(records: &[RunRecord]) -> Result<ExperimentReport> {
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.sort_cmp(b));

    let mut baselines = BTreeMap::new();
    for r in sorted.iter().filter(|r| r.stage == RecordStage::Baseline) {
        baselines.insert(r.baseline_key(), *r);
    }

    struct Acc {
        attack: AttackKind,
        ratio: Option<f64>,
        changes: [Vec<f64>; 6],
        undefined: [usize; 6],
        contributors: usize,
        failed: usize,
    }
    let mut cells: Vec<Acc> = Vec::new();
    for r in sorted.iter().filter(|r| r.stage == RecordStage::Attacked) {
        let base = baselines.get(&r.baseline_key()).ok_or_else(|| {
            Error::OrphanRecord(format!(
                "dataset={} generator={} seed={} attack={}",
                r.dataset, r.generator, r.seed, r.attack
            ))
        })?;
        let idx = match cells
            .iter()
            .position(|c| c.attack == r.attack && cmp_ratio(c.ratio, r.ratio).is_eq())
        {
            Some(i) => i,
            None => {
                cells.push(Acc {
                    attack: r.attack,
                    ratio: r.ratio,
                    changes: Default::default(),
                    undefined: [0; 6],
                    contributors: 0,
                    failed: 0,
                });
                cells.len() - 1
            }
        };
        let acc = &mut cells[idx];
        acc.contributors += 1;
        match (base.metrics(), r.metrics()) {
            (Some(b), Some(a)) => {
                for (m, (bv, av)) in b.as_array().into_iter().zip(a.as_array()).enumerate() {
                    match percent_change(bv, av) {
                        Ok(v) => acc.changes[m].push(v),
                        Err(_) => acc.undefined[m] += 1,
                    }
                }
            }
            _ => acc.failed += 1,
        }
    }
    cells.sort_by(|a, b| {
        a.attack
            .cmp(&b.attack)
            .then_with(|| cmp_ratio(a.ratio, b.ratio))
    });
    Ok(ExperimentReport {
        cells: cells
            .into_iter()
            .map(|acc| ReportCell {
                attack: acc.attack,
                ratio: acc.ratio,
                metrics: std::array::from_fn(|m| MetricCell {
                    mean: mean_of(&acc.changes[m]),
                    defined: acc.changes[m].len(),
                    undefined: acc.undefined[m],
                }),
                contributors: acc.contributors,
                failed: acc.failed,
            })
            .collect(),
    })
}

fn ratio_label(r: Option<f64>) -> String {
    r.map_or_else(|| "-".to_string(), |v| format!("{v}"))
}

fn markdown_value(cell: &MetricCell, contributors: usize) -> String {
    match cell.mean {
        None => "N/A".into(),
        Some(v) if cell.defined < contributors => {
            format!("{v:.2} ({}/{contributors})", cell.defined)
        }
        Some(v) => format!("{v:.2}"),
    }
}

/// Markdown table with one row per `(attack, ratio)` cell and an `Avg` row
/// after each attack.
pub fn render_markdown(report: &ExperimentReport) -> Result<String> {
    if report.is_empty() {
        return Err(Error::InvalidParameter("report has no cells".into()));
    }
    let mut s = String::new();
    s.push_str("| Attack Type | Attack Ratio | LR | RF | MLP | WD | KS | KLD |\n");
    s.push_str("|---|---|---|---|---|---|---|---|\n");
    for attack in report.attacks() {
        for cell in report.cells.iter().filter(|c| c.attack == attack) {
            s.push_str(&format!(
                "| {} | {} |",
                attack.label(),
                ratio_label(cell.ratio)
            ));
            for m in &cell.metrics {
                s.push_str(&format!(" {} |", markdown_value(m, cell.contributors)));
            }
            s.push('\n');
        }
        s.push_str(&format!("| {} | Avg |", attack.label()));
        for v in report.attack_average(attack) {
            s.push_str(&format!(
                " {} |",
                v.map_or_else(|| "N/A".to_string(), |v| format!("{v:.2}"))
            ));
        }
        s.push('\n');
    }
    s.push_str(
        "\nValues are percentage changes against the clean baseline of the same dataset, generator and seed. \
         A count in parentheses gives the runs with a defined change out of all runs in the cell.\n",
    );
    Ok(s)
}

pub const REPORT_CSV_HEADER: [&str; 9] = [
    "attack",
    "ratio",
    "metric",
    "value",
    "value_2dp",
    "defined",
    "undefined",
    "failed",
    "contributors",
];

/// One line of the report CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportCsvRow {
    pub attack: AttackKind,
    /// A ratio, `-` for ratio-free attacks, or `Avg`.
    pub ratio: String,
    pub metric: String,
    pub value: Option<f64>,
    pub defined: usize,
    pub undefined: usize,
    pub failed: usize,
    pub contributors: usize,
}

pub fn report_rows(report: &ExperimentReport) -> Vec<ReportCsvRow> {
    let mut rows = Vec::new();
    for attack in report.attacks() {
        for cell in report.cells.iter().filter(|c| c.attack == attack) {
            for (name, m) in REPORT_METRICS.iter().zip(&cell.metrics) {
                rows.push(ReportCsvRow {
                    attack,
                    ratio: ratio_label(cell.ratio),
                    metric: name.to_string(),
                    value: m.mean,
                    defined: m.defined,
                    undefined: m.undefined,
                    failed: cell.failed,
                    contributors: cell.contributors,
                });
            }
        }
        let cells: Vec<&ReportCell> = report.cells.iter().filter(|c| c.attack == attack).collect();
        for (m, (name, avg)) in REPORT_METRICS
            .iter()
            .zip(report.attack_average(attack))
            .enumerate()
        {
            rows.push(ReportCsvRow {
                attack,
                ratio: "Avg".into(),
                metric: name.to_string(),
                value: avg,
                defined: cells.iter().filter(|c| c.metrics[m].mean.is_some()).count(),
                undefined: cells.iter().filter(|c| c.metrics[m].mean.is_none()).count(),
                failed: cells.iter().map(|c| c.failed).sum(),
                contributors: cells.iter().map(|c| c.contributors).sum(),
            });
        }
    }
    rows
}

/// Report CSV: full-precision `value` alongside a 2-decimal `value_2dp`.
pub fn write_report_csv<W: Write>(report: &ExperimentReport, writer: W) -> Result<()> {
    if report.is_empty() {
        return Err(Error::InvalidParameter("report has no cells".into()));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(REPORT_CSV_HEADER)?;
    for row in report_rows(report) {
        w.write_record([
            row.attack.as_str().to_string(),
            row.ratio,
            row.metric,
            row.value.map(format_real).unwrap_or_else(|| "N/A".into()),
            row.value
                .map(|v| format!("{v:.2}"))
                .unwrap_or_else(|| "N/A".into()),
            row.defined.to_string(),
            row.undefined.to_string(),
            row.failed.to_string(),
            row.contributors.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<report>", e))?;
    Ok(())
}

pub fn read_report_csv<R: Read>(reader: R) -> Result<Vec<ReportCsvRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != REPORT_CSV_HEADER {
        return Err(Error::HeaderMismatch {
            expected: REPORT_CSV_HEADER.iter().map(|s| s.to_string()).collect(),
            found: header,
        });
    }
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row?;
        let bad = |c: usize| Error::Cell {
            row: i + 1,
            column: REPORT_CSV_HEADER[c].into(),
            value: row.get(c).unwrap_or("").into(),
            reason: "unparseable".into(),
        };
        let count = |c: usize| {
            row.get(c)
                .unwrap_or("")
                .parse::<usize>()
                .map_err(|_| bad(c))
        };
        let value = match row.get(3).unwrap_or("") {
            "N/A" => None,
            v => Some(v.parse::<f64>().map_err(|_| bad(3))?),
        };
        out.push(ReportCsvRow {
            attack: row.get(0).unwrap_or("").parse()?,
            ratio: row.get(1).unwrap_or("").into(),
            metric: row.get(2).unwrap_or("").into(),
            value,
            defined: count(5)?,
            undefined: count(6)?,
            failed: count(7)?,
            contributors: count(8)?,
        });
    }
    Ok(out)
}

/// Writes the report in `format` to `path`.
pub fn emit_report(
    report: &ExperimentReport,
    format: ReportFormat,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        ReportFormat::Markdown => render_markdown(report)?.into_bytes(),
        ReportFormat::Csv => {
            let mut buf = Vec::new();
            write_report_csv(report, &mut buf)?;
            buf
        }
    };
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
