//! Speedup analysis: parallel fraction, Amdahl's law, measured speedup,
//! percentage difference, and benchmark report tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::RenderConfig;
use crate::partition::Scheme;
use crate::runtime::RunResult;

/// Asymptotic speedup measured for the 8000×8000 / 2000-iteration serial
/// reference run; its inverse is the serial fraction.
pub const REFERENCE_ASYMPTOTIC_SPEEDUP: f64 = 356.22764;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("speedup is unbounded: the serial fraction is zero")]
    UnboundedSpeedup,
    #[error("no single-task baseline run supplied")]
    MissingBaseline,
    #[error("baseline must be a single-task run, got {0} tasks")]
    BaselineNotSingleTask(usize),
    #[error("run {scheme} × {num_tasks} uses a different render configuration from the baseline")]
    InconsistentConfig { scheme: Scheme, num_tasks: usize },
    #[error("repetitions of {scheme} × {num_tasks} disagree on message count ({first} vs {other})")]
    InconsistentMessages { scheme: Scheme, num_tasks: usize, first: u64, other: u64 },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn invalid(msg: impl Into<String>) -> AnalysisError {
    AnalysisError::InvalidInput(msg.into())
}

fn positive(name: &str, v: f64) -> Result<f64, AnalysisError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Split of a program's runtime into a serial and a parallelizable part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmdahlModel {
    parallel: f64,
}

impl AmdahlModel {
    pub fn from_parallel_fraction(parallel: f64) -> Result<Self, AnalysisError> {
        if (0.0..=1.0).contains(&parallel) {
            Ok(AmdahlModel { parallel })
        } else {
            Err(invalid(format!("parallel fraction must lie in [0, 1], got {parallel}")))
        }
    }

    pub fn from_serial_fraction(serial: f64) -> Result<Self, AnalysisError> {
        if (0.0..=1.0).contains(&serial) {
            Ok(AmdahlModel { parallel: 1.0 - serial })
        } else {
            Err(invalid(format!("serial fraction must lie in [0, 1], got {serial}")))
        }
    }

    /// Model whose unbounded-task speedup equals `speedup`, i.e. `r_s = 1/speedup`.
    pub fn from_asymptotic_speedup(speedup: f64) -> Result<Self, AnalysisError> {
        if !(speedup.is_finite() && speedup >= 1.0) {
            return Err(invalid(format!("asymptotic speedup must be finite and at least 1, got {speedup}")));
        }
        Self::from_serial_fraction(1.0 / speedup)
    }

    /// The model behind the reference speedup table.
    pub fn reference() -> Self {
        Self::from_asymptotic_speedup(REFERENCE_ASYMPTOTIC_SPEEDUP).expect("reference speedup is valid")
    }

    pub fn parallel_fraction(&self) -> f64 {
        self.parallel
    }

    pub fn serial_fraction(&self) -> f64 {
        1.0 - self.parallel
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskCount {
    Finite(usize),
    Unbounded,
}

impl From<usize> for TaskCount {
    fn from(n: usize) -> Self {
        TaskCount::Finite(n)
    }
}

/// `r_p = t_p / t_s`: time in the parallelizable part over total serial time.
pub fn parallel_fraction(parallel_time: f64, serial_time: f64) -> Result<f64, AnalysisError> {
    positive("parallel time", parallel_time)?;
    positive("serial time", serial_time)?;
    if parallel_time > serial_time {
        return Err(invalid(format!("parallel time {parallel_time} exceeds total serial time {serial_time}")));
    }
    Ok(parallel_time / serial_time)
}

/// `1 / (r_s + r_p / p)`; for unbounded `p`, `1 / r_s`.
pub fn amdahl_speedup(model: &AmdahlModel, tasks: impl Into<TaskCount>) -> Result<f64, AnalysisError> {
    let serial = model.serial_fraction();
    match tasks.into() {
        TaskCount::Finite(0) => Err(invalid("task count must be at least 1")),
        TaskCount::Finite(1) => Ok(1.0),
        TaskCount::Finite(p) => Ok(1.0 / (serial + model.parallel / p as f64)),
        TaskCount::Unbounded if serial <= 0.0 => Err(AnalysisError::UnboundedSpeedup),
        TaskCount::Unbounded => Ok(1.0 / serial),
    }
}

/// Single-task time over multi-task time.
pub fn actual_speedup(single_task_time: f64, multi_task_time: f64) -> Result<f64, AnalysisError> {
    Ok(positive("single-task time", single_task_time)? / positive("multi-task time", multi_task_time)?)
}

/// `|T − A| / ((T + A) / 2) × 100`.
pub fn percentage_difference(theoretical: f64, actual: f64) -> Result<f64, AnalysisError> {
    positive("theoretical speedup", theoretical)?;
    positive("actual speedup", actual)?;
    Ok((theoretical - actual).abs() / ((theoretical + actual) / 2.0) * 100.0)
}

/// The timing-relevant part of a [`RunResult`], without the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMeasurement {
    pub scheme: Scheme,
    pub num_tasks: usize,
    pub config: RenderConfig,
    pub compute_time: Duration,
    pub total_time: Duration,
    pub messages_sent: u64,
}

impl From<&RunResult> for RunMeasurement {
    fn from(r: &RunResult) -> Self {
        RunMeasurement {
            scheme: r.scheme,
            num_tasks: r.num_tasks,
            config: r.config,
            compute_time: r.compute_time,
            total_time: r.total_time,
            messages_sent: r.messages_sent,
        }
    }
}

/// A (scheme, task count) group whose runs were abandoned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailedGroup {
    pub scheme: Scheme,
    pub num_tasks: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupStats {
    pub compute_times: Vec<f64>,
    pub total_times: Vec<f64>,
    pub mean_compute: f64,
    pub mean_total: f64,
    pub min_total: f64,
    pub max_total: f64,
    pub theoretical_speedup: f64,
    /// Baseline mean total time over this group's mean total time.
    pub actual_speedup: f64,
    /// Same ratio over compute times only.
    pub compute_speedup: f64,
    pub percentage_difference: f64,
    pub messages_sent: u64,
}

impl GroupStats {
    pub fn repetitions(&self) -> usize {
        self.total_times.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroupOutcome {
    Completed(GroupStats),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scheme: Scheme,
    pub num_tasks: usize,
    pub outcome: GroupOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub baseline_compute: f64,
    pub baseline_total: f64,
    pub model: AmdahlModel,
    pub groups: Vec<RunReport>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Groups runs by (scheme, task count), averages repetitions and derives
/// speedups against the mean of the single-task `baseline` runs.
pub fn build_report(
    baseline: &[RunMeasurement],
    runs: &[RunMeasurement],
    failed: &[FailedGroup],
    model: &AmdahlModel,
) -> Result<Report, AnalysisError> {
    let first = baseline.first().ok_or(AnalysisError::MissingBaseline)?;
    for b in baseline {
        if b.num_tasks != 1 {
            return Err(AnalysisError::BaselineNotSingleTask(b.num_tasks));
        }
        if b.config != first.config {
            return Err(AnalysisError::InconsistentConfig { scheme: b.scheme, num_tasks: b.num_tasks });
        }
    }
    let baseline_compute = mean(&baseline.iter().map(|b| b.compute_time.as_secs_f64()).collect::<Vec<_>>());
    let baseline_total = mean(&baseline.iter().map(|b| b.total_time.as_secs_f64()).collect::<Vec<_>>());

    let mut grouped: BTreeMap<(Scheme, usize), Vec<&RunMeasurement>> = BTreeMap::new();
    for run in runs {
        if run.config != first.config {
            return Err(AnalysisError::InconsistentConfig { scheme: run.scheme, num_tasks: run.num_tasks });
        }
        grouped.entry((run.scheme, run.num_tasks)).or_default().push(run);
    }

    let mut outcomes: BTreeMap<(Scheme, usize), GroupOutcome> = BTreeMap::new();
    for ((scheme, num_tasks), group) in grouped {
        let messages_sent = group[0].messages_sent;
        if let Some(other) = group.iter().find(|r| r.messages_sent != messages_sent) {
            return Err(AnalysisError::InconsistentMessages {
                scheme,
                num_tasks,
                first: messages_sent,
                other: other.messages_sent,
            });
        }
        let compute_times: Vec<f64> = group.iter().map(|r| r.compute_time.as_secs_f64()).collect();
        let total_times: Vec<f64> = group.iter().map(|r| r.total_time.as_secs_f64()).collect();
        let mean_compute = mean(&compute_times);
        let mean_total = mean(&total_times);
        let theoretical_speedup = amdahl_speedup(model, num_tasks)?;
        let actual = actual_speedup(baseline_total, mean_total)?;
        let stats = GroupStats {
            min_total: total_times.iter().copied().fold(f64::INFINITY, f64::min),
            max_total: total_times.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            compute_speedup: actual_speedup(baseline_compute, mean_compute)?,
            percentage_difference: percentage_difference(theoretical_speedup, actual)?,
            actual_speedup: actual,
            theoretical_speedup,
            mean_compute,
            mean_total,
            compute_times,
            total_times,
            messages_sent,
        };
        outcomes.insert((scheme, num_tasks), GroupOutcome::Completed(stats));
    }
    // a failure marks the whole group, replacing any partial repetitions
    for f in failed {
        outcomes.insert((f.scheme, f.num_tasks), GroupOutcome::Failed(f.reason.clone()));
    }

    Ok(Report {
        baseline_compute,
        baseline_total,
        model: *model,
        groups: outcomes
            .into_iter()
            .map(|((scheme, num_tasks), outcome)| RunReport { scheme, num_tasks, outcome })
            .collect(),
    })
}

/// One line of the CSV report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scheme: String,
    pub tasks: usize,
    pub repetitions: usize,
    pub mean_compute_s: Option<f64>,
    pub mean_total_s: Option<f64>,
    pub min_total_s: Option<f64>,
    pub max_total_s: Option<f64>,
    pub theoretical_speedup: Option<f64>,
    pub actual_speedup: Option<f64>,
    pub compute_speedup: Option<f64>,
    pub percentage_difference: Option<f64>,
    pub messages: Option<u64>,
    pub status: String,
}

impl Report {
    pub fn rows(&self) -> Vec<ReportRow> {
        self.groups
            .iter()
            .map(|g| match &g.outcome {
                GroupOutcome::Completed(s) => ReportRow {
                    scheme: g.scheme.to_string(),
                    tasks: g.num_tasks,
                    repetitions: s.repetitions(),
                    mean_compute_s: Some(s.mean_compute),
                    mean_total_s: Some(s.mean_total),
                    min_total_s: Some(s.min_total),
                    max_total_s: Some(s.max_total),
                    theoretical_speedup: Some(s.theoretical_speedup),
                    actual_speedup: Some(s.actual_speedup),
                    compute_speedup: Some(s.compute_speedup),
                    percentage_difference: Some(s.percentage_difference),
                    messages: Some(s.messages_sent),
                    status: "ok".into(),
                },
                GroupOutcome::Failed(reason) => ReportRow {
                    scheme: g.scheme.to_string(),
                    tasks: g.num_tasks,
                    repetitions: 0,
                    mean_compute_s: None,
                    mean_total_s: None,
                    min_total_s: None,
                    max_total_s: None,
                    theoretical_speedup: None,
                    actual_speedup: None,
                    compute_speedup: None,
                    percentage_difference: None,
                    messages: None,
                    status: format!("failed: {reason}"),
                },
            })
            .collect()
    }

    pub fn to_csv(&self) -> Result<String, AnalysisError> {
        rows_to_csv(&self.rows())
    }

    pub fn to_text_table(&self) -> String {
        render_table(&self.rows())
    }

    pub fn has_failures(&self) -> bool {
        self.groups.iter().any(|g| matches!(g.outcome, GroupOutcome::Failed(_)))
    }
}

pub fn rows_to_csv(rows: &[ReportRow]) -> Result<String, AnalysisError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    if rows.is_empty() {
        writer.write_record(CSV_HEADER)?;
    }
    let bytes = writer.into_inner().map_err(|e| AnalysisError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

const CSV_HEADER: [&str; 13] = [
    "scheme",
    "tasks",
    "repetitions",
    "mean_compute_s",
    "mean_total_s",
    "min_total_s",
    "max_total_s",
    "theoretical_speedup",
    "actual_speedup",
    "compute_speedup",
    "percentage_difference",
    "messages",
    "status",
];

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<ReportRow>, AnalysisError> {
    csv::Reader::from_reader(input).deserialize().collect::<Result<Vec<ReportRow>, _>>().map_err(AnalysisError::from)
}

fn cell<T>(v: Option<T>, fmt: impl Fn(T) -> String) -> String {
    v.map(fmt).unwrap_or_else(|| "-".into())
}

/// Aligned plain-text table for terminals.
pub fn render_table(rows: &[ReportRow]) -> String {
    let header = [
        "scheme",
        "N",
        "reps",
        "mean compute (s)",
        "mean total (s)",
        "min total (s)",
        "max total (s)",
        "T_n",
        "A_n",
        "% diff",
        "messages",
        "status",
    ];
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.scheme.clone(),
                r.tasks.to_string(),
                r.repetitions.to_string(),
                cell(r.mean_compute_s, |v| format!("{v:.6}")),
                cell(r.mean_total_s, |v| format!("{v:.6}")),
                cell(r.min_total_s, |v| format!("{v:.6}")),
                cell(r.max_total_s, |v| format!("{v:.6}")),
                cell(r.theoretical_speedup, |v| format!("{v:.5}")),
                cell(r.actual_speedup, |v| format!("{v:.5}")),
                cell(r.percentage_difference, |v| format!("{v:.5}")),
                cell(r.messages, |v| v.to_string()),
                r.status.clone(),
            ]
        })
        .collect();
    aligned(&header, &body)
}

/// Theoretical speedup for each task count, plus the unbounded limit when
/// the serial fraction is non-zero.
pub fn theoretical_table(model: &AmdahlModel, tasks: &[usize]) -> Result<String, AnalysisError> {
    let mut body = Vec::with_capacity(tasks.len() + 1);
    for &p in tasks {
        body.push(vec![p.to_string(), format!("{:.5}", amdahl_speedup(model, p)?)]);
    }
    match amdahl_speedup(model, TaskCount::Unbounded) {
        Ok(limit) => body.push(vec!["inf".into(), format!("{limit:.5}")]),
        Err(AnalysisError::UnboundedSpeedup) => body.push(vec!["inf".into(), "unbounded".into()]),
        Err(e) => return Err(e),
    }
    Ok(aligned(&["tasks", "speedup"], &body))
}

fn aligned(header: &[&str], body: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in body {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut parts = Vec::new();
        for (c, w) in cells.zip(&widths) {
            parts.push(format!("{c:>w$}"));
        }
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&mut header.iter().copied());
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    line(&mut rule.iter().map(String::as_str));
    for row in body {
        line(&mut row.iter().map(String::as_str));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference_model() -> AmdahlModel {
        AmdahlModel::from_parallel_fraction(0.9971928).unwrap()
    }

    #[test]
    fn parallel_fraction_examples() {
        assert_eq!(parallel_fraction(5.0, 10.0).unwrap(), 0.5);
        assert_eq!(parallel_fraction(10.0, 10.0).unwrap(), 1.0);
        assert!(parallel_fraction(11.0, 10.0).is_err());
        assert!(parallel_fraction(1.0, 0.0).is_err());
    }

    #[test]
    fn amdahl_examples() {
        assert!((amdahl_speedup(&reference_model(), 2).unwrap() - 1.99440).abs() < 5e-4);
        assert!((amdahl_speedup(&reference_model(), 32).unwrap() - 29.4382).abs() < 1e-3);
        let serial = AmdahlModel::from_parallel_fraction(0.0).unwrap();
        for p in [1, 2, 64] {
            assert_eq!(amdahl_speedup(&serial, p).unwrap(), 1.0);
        }
        assert_eq!(amdahl_speedup(&serial, TaskCount::Unbounded).unwrap(), 1.0);
    }

    #[test]
    fn amdahl_unbounded() {
        let full = AmdahlModel::from_parallel_fraction(1.0).unwrap();
        assert!(matches!(amdahl_speedup(&full, TaskCount::Unbounded), Err(AnalysisError::UnboundedSpeedup)));
        assert_eq!(amdahl_speedup(&full, 8).unwrap(), 8.0);
        let reference = AmdahlModel::reference();
        assert!((amdahl_speedup(&reference, TaskCount::Unbounded).unwrap() - 356.22764).abs() < 1e-9);
        assert!(amdahl_speedup(&reference, 0).is_err());
    }

    #[test]
    fn speedup_and_difference_examples() {
        assert_eq!(actual_speedup(10.0, 5.0).unwrap(), 2.0);
        assert_eq!(actual_speedup(3.3, 3.3).unwrap(), 1.0);
        assert!(actual_speedup(0.0, 1.0).is_err());
        assert!((percentage_difference(1.99440, 1.97812).unwrap() - 0.8196).abs() < 0.005);
        assert!((percentage_difference(1.99440, 1.00396).unwrap() - 66.065).abs() < 0.005);
        assert_eq!(percentage_difference(4.2, 4.2).unwrap(), 0.0);
        assert!(percentage_difference(-1.0, 1.0).is_err());
    }

    #[test]
    fn model_validation() {
        assert!(AmdahlModel::from_parallel_fraction(1.5).is_err());
        assert!(AmdahlModel::from_serial_fraction(-0.1).is_err());
        assert!(AmdahlModel::from_asymptotic_speedup(0.5).is_err());
    }

    fn measurement(scheme: Scheme, n: usize, compute: f64, total: f64, messages: u64) -> RunMeasurement {
        RunMeasurement {
            scheme,
            num_tasks: n,
            config: RenderConfig::new(8, 8).unwrap(),
            compute_time: Duration::from_secs_f64(compute),
            total_time: Duration::from_secs_f64(total),
            messages_sent: messages,
        }
    }

    #[test]
    fn report_means_and_speedups() {
        let baseline = [measurement(Scheme::Serial, 1, 8.0, 10.0, 0)];
        let runs = [
            measurement(Scheme::Naive, 2, 3.0, 4.0, 1),
            measurement(Scheme::Naive, 2, 5.0, 6.0, 1),
            measurement(Scheme::Fcfs, 2, 7.0, 7.0, 16),
        ];
        let model = AmdahlModel::from_parallel_fraction(1.0).unwrap();
        let report = build_report(&baseline, &runs, &[], &model).unwrap();
        assert_eq!(report.groups.len(), 2);
        match &report.groups[0].outcome {
            GroupOutcome::Completed(s) => {
                assert_eq!(report.groups[0].scheme, Scheme::Naive);
                assert_eq!(s.mean_compute, 4.0);
                assert_eq!(s.mean_total, 5.0);
                assert_eq!((s.min_total, s.max_total), (4.0, 6.0));
                assert_eq!(s.actual_speedup, 2.0);
                assert_eq!(s.compute_speedup, 2.0);
                assert_eq!(s.theoretical_speedup, 2.0);
                assert_eq!(s.percentage_difference, 0.0);
                assert_eq!(s.messages_sent, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn identical_repetitions_average_to_themselves() {
        let baseline = [measurement(Scheme::Serial, 1, 1.0, 1.0, 0)];
        let runs: Vec<_> = (0..5).map(|_| measurement(Scheme::Alternating, 4, 0.25, 0.3, 3)).collect();
        let report = build_report(&baseline, &runs, &[], &AmdahlModel::reference()).unwrap();
        match &report.groups[0].outcome {
            GroupOutcome::Completed(s) => {
                assert!((s.mean_total - 0.3).abs() < 1e-12);
                assert_eq!(s.repetitions(), 5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn report_errors() {
        let model = AmdahlModel::reference();
        let runs = [measurement(Scheme::Naive, 2, 1.0, 1.0, 1)];
        assert!(matches!(build_report(&[], &runs, &[], &model), Err(AnalysisError::MissingBaseline)));
        let two_task = [measurement(Scheme::Naive, 2, 1.0, 1.0, 1)];
        assert!(matches!(build_report(&two_task, &runs, &[], &model), Err(AnalysisError::BaselineNotSingleTask(2))));
        let baseline = [measurement(Scheme::Serial, 1, 1.0, 1.0, 0)];
        let mut other = measurement(Scheme::Naive, 2, 1.0, 1.0, 1);
        other.config = RenderConfig::new(9, 8).unwrap();
        assert!(matches!(
            build_report(&baseline, &[other], &[], &model),
            Err(AnalysisError::InconsistentConfig { .. })
        ));
        let disagree = [measurement(Scheme::Naive, 2, 1.0, 1.0, 1), measurement(Scheme::Naive, 2, 1.0, 1.0, 2)];
        assert!(matches!(
            build_report(&baseline, &disagree, &[], &model),
            Err(AnalysisError::InconsistentMessages { .. })
        ));
    }

    #[test]
    fn failed_groups_and_csv_shape() {
        let baseline = [measurement(Scheme::Serial, 1, 1.0, 1.0, 0)];
        let runs = [measurement(Scheme::Naive, 2, 0.5, 0.6, 1), measurement(Scheme::Naive, 4, 0.3, 0.4, 3)];
        let failed = [FailedGroup { scheme: Scheme::Fcfs, num_tasks: 2, reason: "rank 1 failed, \"x\"".into() }];
        let report = build_report(&baseline, &runs, &failed, &AmdahlModel::reference()).unwrap();
        assert!(report.has_failures());
        let csv = report.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 3 + 1);
        assert!(csv.starts_with("scheme,tasks,repetitions,mean_compute_s"));
        // embedded quotes and commas are escaped
        assert!(csv.contains("\"failed: rank 1 failed, \"\"x\"\"\""));
        let parsed = read_csv(csv.as_bytes()).unwrap();
        assert_eq!(parsed, report.rows());
        let table = report.to_text_table();
        assert_eq!(table.lines().count(), 2 + 3);
        // rebuilding is byte-identical
        let again = build_report(&baseline, &runs, &failed, &AmdahlModel::reference()).unwrap();
        assert_eq!(again.to_csv().unwrap(), csv);
    }

    #[test]
    fn empty_csv_still_has_header() {
        assert_eq!(rows_to_csv(&[]).unwrap().lines().count(), 1);
    }

    #[test]
    fn theoretical_table_lists_limit() {
        let table = theoretical_table(&AmdahlModel::reference(), &[2, 4]).unwrap();
        assert!(table.contains("1.99440"));
        assert!(table.contains("356.22764"));
        let full = AmdahlModel::from_parallel_fraction(1.0).unwrap();
        assert!(theoretical_table(&full, &[2]).unwrap().contains("unbounded"));
    }

    proptest! {
        #[test]
        fn amdahl_increasing_and_bounded(rp in 0.01f64..0.99, p in 1usize..512) {
            let model = AmdahlModel::from_parallel_fraction(rp).unwrap();
            let s = amdahl_speedup(&model, p).unwrap();
            let next = amdahl_speedup(&model, p + 1).unwrap();
            prop_assert!(next > s);
            prop_assert!(s < 1.0 / model.serial_fraction());
        }

        #[test]
        fn percentage_difference_symmetric(a in 0.01f64..100.0, b in 0.01f64..100.0) {
            let ab = percentage_difference(a, b).unwrap();
            prop_assert_eq!(ab, percentage_difference(b, a).unwrap());
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab == 0.0, a == b);
        }
    }
}
