//! Per-run metric records and their CSV form.

use std::cmp::Ordering;
use std::io::{Read, Write};

use crate::attacks::AttackKind;
use crate::error::{Error, Result};
use crate::tabular::format_real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RecordStage {
    Baseline,
    Attacked,
}

impl RecordStage {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordStage::Baseline => "baseline",
            RecordStage::Attacked => "attacked",
        }
    }
}

/// The six reported quantities of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetrics {
    pub acc_lr: f64,
    pub acc_rf: f64,
    pub acc_mlp: f64,
    pub wd: f64,
    pub ks: f64,
    pub kld: f64,
}

impl RunMetrics {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.acc_lr,
            self.acc_rf,
            self.acc_mlp,
            self.wd,
            self.ks,
            self.kld,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Completed(RunMetrics),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub dataset: String,
    pub generator: String,
    pub attack: AttackKind,
    /// Present only for ratio-driven attacks.
    pub ratio: Option<f64>,
    pub seed: u64,
    pub stage: RecordStage,
    pub outcome: Outcome,
}

impl RunRecord {
    pub fn metrics(&self) -> Option<&RunMetrics> {
        match &self.outcome {
            Outcome::Completed(m) => Some(m),
            Outcome::Failed(_) => None,
        }
    }

    /// The `(dataset, generator, seed)` triple shared with its baseline.
    pub fn baseline_key(&self) -> (&str, &str, u64) {
        (&self.dataset, &self.generator, self.seed)
    }

    /// Total order used to make outputs independent of execution order.
    pub fn sort_cmp(&self, other: &Self) -> Ordering {
        self.dataset
            .cmp(&other.dataset)
            .then_with(|| self.generator.cmp(&other.generator))
            .then_with(|| self.seed.cmp(&other.seed))
            .then_with(|| self.stage.cmp(&other.stage))
            .then_with(|| self.attack.cmp(&other.attack))
            .then_with(|| cmp_ratio(self.ratio, other.ratio))
    }
}

pub(crate) fn cmp_ratio(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (a, b) => a.is_some().cmp(&b.is_some()),
    }
}

pub const RECORD_HEADER: [&str; 14] = [
    "dataset",
    "generator",
    "attack",
    "ratio",
    "seed",
    "stage",
    "status",
    "acc_lr",
    "acc_rf",
    "acc_mlp",
    "wd",
    "ks",
    "kld",
    "error",
];

/// Writes records at full precision.
pub fn write_records<W: Write>(records: &[RunRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        let mut row = vec![
            r.dataset.clone(),
            r.generator.clone(),
            r.attack.as_str().to_string(),
            r.ratio.map(format_real).unwrap_or_default(),
            r.seed.to_string(),
            r.stage.as_str().to_string(),
        ];
        match &r.outcome {
            Outcome::Completed(m) => {
                row.push("ok".into());
                row.extend(m.as_array().iter().map(|&v| format_real(v)));
                row.push(String::new());
            }
            Outcome::Failed(reason) => {
                row.push("failed".into());
                row.extend(std::iter::repeat_n(String::new(), 6));
                row.push(reason.clone());
            }
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<records>", e))?;
    Ok(())
}

pub fn read_records<R: Read>(reader: R) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != RECORD_HEADER {
        return Err(Error::HeaderMismatch {
            expected: RECORD_HEADER.iter().map(|s| s.to_string()).collect(),
            found: header,
        });
    }
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row?;
        let line = i + 1;
        let cell = |c: usize| row.get(c).unwrap_or("");
        let parse_f = |c: usize| -> Result<f64> {
            cell(c).parse().map_err(|_| Error::Cell {
                row: line,
                column: RECORD_HEADER[c].into(),
                value: cell(c).into(),
                reason: "expected a real number".into(),
            })
        };
        let stage = match cell(5) {
            "baseline" => RecordStage::Baseline,
            "attacked" => RecordStage::Attacked,
            other => {
                return Err(Error::Cell {
                    row: line,
                    column: "stage".into(),
                    value: other.into(),
                    reason: "expected baseline or attacked".into(),
                })
            }
        };
        let outcome = match cell(6) {
            "ok" => Outcome::Completed(RunMetrics {
                acc_lr: parse_f(7)?,
                acc_rf: parse_f(8)?,
                acc_mlp: parse_f(9)?,
                wd: parse_f(10)?,
                ks: parse_f(11)?,
                kld: parse_f(12)?,
            }),
            "failed" => Outcome::Failed(cell(13).to_string()),
            other => {
                return Err(Error::Cell {
                    row: line,
                    column: "status".into(),
                    value: other.into(),
                    reason: "expected ok or failed".into(),
                })
            }
        };
        out.push(RunRecord {
            dataset: cell(0).into(),
            generator: cell(1).into(),
            attack: cell(2).parse()?,
            ratio: if cell(3).is_empty() {
                None
            } else {
                Some(parse_f(3)?)
            },
            seed: cell(4).parse().map_err(|_| Error::Cell {
                row: line,
                column: "seed".into(),
                value: cell(4).into(),
                reason: "expected an unsigned integer".into(),
            })?,
            stage,
            outcome,
        });
    }
    Ok(out)
}
