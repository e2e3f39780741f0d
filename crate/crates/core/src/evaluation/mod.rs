//! Leave-one-out evaluation, F1 reports and the summary table.

mod table;

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{ClassifierKind, ClassifierSpec, Learner, Predictor};
use crate::error::{Error, Result};
use crate::field::FieldKind;
use crate::imaging::Dataset;

pub use table::{build_report_table, round_half_even_3, ReportTable};

/// Binary confusion counts with class 1 as the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn from_predictions(truth: &[u8], predicted: &[u8]) -> Self {
        let mut m = ConfusionMatrix::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            m.add(t, p);
        }
        m
    }

    pub fn add(&mut self, truth: u8, predicted: u8) {
        match (truth, predicted) {
            (1, 1) => self.tp += 1,
            (0, 1) => self.fp += 1,
            (1, _) => self.fn_ += 1,
            _ => self.tn += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// 0 when nothing was predicted positive.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    /// 0 when there are no positives.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_from_confusion(m: &ConfusionMatrix) -> f64 {
    let (p, r) = (m.precision(), m.recall());
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub shape_id: String,
    pub truth: u8,
    pub predicted: u8,
    pub score: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LooOutcome {
    pub folds: Vec<FoldRecord>,
    /// Held-out ids whose training split contained a single class.
    pub skipped: Vec<String>,
}

impl LooOutcome {
    pub fn confusion(&self) -> ConfusionMatrix {
        let mut m = ConfusionMatrix::default();
        for f in &self.folds {
            m.add(f.truth, f.predicted);
        }
        m
    }
}

/// Trains on all samples but one and predicts the held-out sample, for every
/// sample. Folds run in parallel; results are in dataset order.
pub fn loo_evaluate<L: Learner>(learner: &L, dataset: &Dataset) -> Result<LooOutcome> {
    let x = dataset.feature_matrix();
    let y = dataset.labels();
    let n = dataset.len();
    let folds: Vec<Option<FoldRecord>> = (0..n)
        .into_par_iter()
        .map(|held| {
            let keep: Vec<usize> = (0..n).filter(|&i| i != held).collect();
            let train_y: Vec<u8> = keep.iter().map(|&i| y[i]).collect();
            if !train_y.contains(&0) || !train_y.contains(&1) {
                log::warn!("skipping fold `{}`: training split has one class", dataset.images[held].shape_id);
                return Ok(None);
            }
            let model = learner.fit(&x.select(&keep), &train_y)?;
            let pred = model.predict(x.row(held));
            Ok(Some(FoldRecord {
                shape_id: dataset.images[held].shape_id.clone(),
                truth: y[held],
                predicted: pred.label,
                score: pred.score,
            }))
        })
        .collect::<Result<_>>()?;
    let mut out = LooOutcome::default();
    for (i, f) in folds.into_iter().enumerate() {
        match f {
            Some(f) => out.folds.push(f),
            None => out.skipped.push(dataset.images[i].shape_id.clone()),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationReport {
    pub classifier: ClassifierKind,
    pub probe_kind: FieldKind,
    pub confusion: ConfusionMatrix,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Wall-clock seconds of the whole LOO run; 0 when timing is disabled.
    pub seconds: f64,
    pub folds: Vec<FoldRecord>,
    pub skipped: Vec<String>,
    pub seed: u64,
}

impl EvaluationReport {
    pub fn from_confusion(
        classifier: ClassifierKind,
        probe_kind: FieldKind,
        confusion: ConfusionMatrix,
        seconds: f64,
        seed: u64,
    ) -> Self {
        EvaluationReport {
            classifier,
            probe_kind,
            confusion,
            precision: confusion.precision(),
            recall: confusion.recall(),
            f1: f1_from_confusion(&confusion),
            seconds,
            folds: Vec::new(),
            skipped: Vec::new(),
            seed,
        }
    }
}

/// LOO evaluation of one classifier on one dataset.
pub fn evaluate_classifier(spec: &ClassifierSpec, dataset: &Dataset, record_timing: bool) -> Result<EvaluationReport> {
    let start = Instant::now();
    let outcome = loo_evaluate(spec, dataset)?;
    let seconds = if record_timing { start.elapsed().as_secs_f64() } else { 0.0 };
    let mut report =
        EvaluationReport::from_confusion(spec.kind(), dataset.probe_kind, outcome.confusion(), seconds, spec.seed);
    report.folds = outcome.folds;
    report.skipped = outcome.skipped;
    Ok(report)
}

pub const REPORT_CSV_HEADER: &str = "classifier,probe_kind,tp,fp,tn,fn,precision,recall,f1,seconds";
pub const FOLD_LOG_HEADER: &str = "shape_id,true,predicted,score";

pub fn write_report_csv(reports: &[EvaluationReport]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for r in reports {
        let c = &r.confusion;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.3}",
            r.classifier.key(),
            r.probe_kind.as_str(),
            c.tp,
            c.fp,
            c.tn,
            c.fn_,
            r.precision,
            r.recall,
            r.f1,
            r.seconds
        );
    }
    out
}

/// Reads the CSV written by [`write_report_csv`]. Metrics are recomputed
/// from the confusion counts.
pub fn parse_report_csv(text: &str, path: &Path) -> Result<Vec<EvaluationReport>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == REPORT_CSV_HEADER => {}
        _ => return Err(Error::format(path, format!("expected header `{REPORT_CSV_HEADER}`"))),
    }
    let mut reports = Vec::new();
    for (number, line) in lines {
        let bad = |why: String| Error::format(path, format!("line {}: {why}", number + 1));
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 10 {
            return Err(bad(format!("expected 10 fields, found {}", cells.len())));
        }
        let classifier =
            ClassifierKind::parse(cells[0]).ok_or_else(|| bad(format!("unknown classifier `{}`", cells[0])))?;
        let probe = FieldKind::parse(cells[1]).ok_or_else(|| bad(format!("unknown probe kind `{}`", cells[1])))?;
        let count = |i: usize| cells[i].parse::<usize>().map_err(|_| bad(format!("bad count `{}`", cells[i])));
        let confusion = ConfusionMatrix { tp: count(2)?, fp: count(3)?, tn: count(4)?, fn_: count(5)? };
        let seconds: f64 = cells[9].parse().map_err(|_| bad(format!("bad seconds `{}`", cells[9])))?;
        reports.push(EvaluationReport::from_confusion(classifier, probe, confusion, seconds, 0));
    }
    Ok(reports)
}

pub fn write_fold_log(folds: &[FoldRecord]) -> String {
    let mut out = String::from(FOLD_LOG_HEADER);
    out.push('\n');
    for f in folds {
        let _ = writeln!(out, "{},{},{},{:.6}", f.shape_id, f.truth, f.predicted, f.score);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_conventions() {
        let none = ConfusionMatrix { tp: 0, fp: 0, tn: 5, fn_: 0 };
        assert_eq!(f1_from_confusion(&none), 0.0);
        let m = ConfusionMatrix { tp: 8, fp: 2, tn: 5, fn_: 4 };
        let (p, r) = (0.8, 8.0 / 12.0);
        assert!((f1_from_confusion(&m) - 2.0 * p * r / (p + r)).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trips_counts() {
        let r = EvaluationReport::from_confusion(
            ClassifierKind::Gpc,
            FieldKind::H,
            ConfusionMatrix { tp: 30, fp: 3, tn: 29, fn_: 2 },
            1.25,
            0,
        );
        let text = write_report_csv(std::slice::from_ref(&r));
        let back = parse_report_csv(&text, Path::new("r.csv")).unwrap();
        assert_eq!(back[0].confusion, r.confusion);
        assert_eq!(back[0].f1, r.f1);
    }
}
