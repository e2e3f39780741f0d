mod common;

use std::path::Path;

use proptest::prelude::*;

use nfscan::classifiers::{ClassifierKind, ClassifierSpec, Features, Learner, Prediction, Predictor};
use nfscan::evaluation::{
    build_report_table, evaluate_classifier, f1_from_confusion, loo_evaluate, parse_report_csv, round_half_even_3,
    write_fold_log, write_report_csv, ConfusionMatrix, EvaluationReport, FOLD_LOG_HEADER,
};
use nfscan::field::FieldKind;
use nfscan::imaging::{Dataset, Provenance, ScanImage, PIXELS};
use nfscan::Error;

/// Reads the label straight out of pixel 0.
struct Oracle;
struct OracleModel;

impl Predictor for OracleModel {
    fn predict(&self, x: &[f64]) -> Prediction {
        Prediction::from_probability(x[0])
    }
}

impl Learner for Oracle {
    type Model = OracleModel;
    fn fit(&self, _: &Features, _: &[u8]) -> nfscan::Result<OracleModel> {
        Ok(OracleModel)
    }
}

struct AlwaysOpen;
struct AlwaysOpenModel;

impl Predictor for AlwaysOpenModel {
    fn predict(&self, _: &[f64]) -> Prediction {
        Prediction::from_probability(1.0)
    }
}

impl Learner for AlwaysOpen {
    type Model = AlwaysOpenModel;
    fn fit(&self, _: &Features, _: &[u8]) -> nfscan::Result<AlwaysOpenModel> {
        Ok(AlwaysOpenModel)
    }
}

fn labelled(labels: &[u8]) -> Dataset {
    let images = labels
        .iter()
        .enumerate()
        .map(|(i, &label)| {
            let mut pixels = vec![0.25f32; PIXELS];
            pixels[0] = label as f32;
            pixels[1] = i as f32 / labels.len() as f32;
            ScanImage { shape_id: format!("s{i:03}"), pixels, label, provenance: Provenance::Synthetic }
        })
        .collect();
    Dataset::new(FieldKind::H, images).unwrap()
}

fn balanced() -> Dataset {
    labelled(&(0..64).map(|i| u8::from(i % 2 == 1)).collect::<Vec<_>>())
}

fn cm(tp: usize, fp: usize, tn: usize, fn_: usize) -> ConfusionMatrix {
    ConfusionMatrix { tp, fp, tn, fn_ }
}

#[test]
fn hand_worked_f1_values() {
    assert!((f1_from_confusion(&cm(3, 1, 3, 1)) - 0.75).abs() < 1e-15);
    assert_eq!(f1_from_confusion(&cm(0, 0, 64, 0)), 0.0);
    assert_eq!(f1_from_confusion(&cm(32, 0, 32, 0)), 1.0);
    assert_eq!(f1_from_confusion(&cm(0, 32, 0, 32)), 0.0);
    let m = ConfusionMatrix::from_predictions(&[1, 1, 0, 0, 1], &[1, 0, 0, 1, 1]);
    assert_eq!(m, cm(2, 1, 1, 1));
}

#[test]
fn oracle_learner_scores_one() {
    let out = loo_evaluate(&Oracle, &balanced()).unwrap();
    assert_eq!(out.confusion(), cm(32, 0, 32, 0));
    assert_eq!(f1_from_confusion(&out.confusion()), 1.0);
}

#[test]
fn constant_open_learner_scores_two_thirds() {
    let m = loo_evaluate(&AlwaysOpen, &balanced()).unwrap().confusion();
    assert_eq!(m, cm(32, 32, 0, 0));
    assert_eq!(m.precision(), 0.5);
    assert_eq!(m.recall(), 1.0);
    assert!((f1_from_confusion(&m) - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn every_sample_is_held_out_exactly_once_in_order() {
    let data = balanced();
    let out = loo_evaluate(&Oracle, &data).unwrap();
    assert_eq!(out.folds.len(), data.len());
    assert!(out.skipped.is_empty());
    for (fold, img) in out.folds.iter().zip(&data.images) {
        assert_eq!(fold.shape_id, img.shape_id);
        assert_eq!(fold.truth, img.label);
    }
}

#[test]
fn folds_with_a_single_training_class_are_skipped() {
    // Holding out the lone positive leaves an all-negative training split.
    let data = labelled(&[0, 0, 0, 1, 0]);
    let out = loo_evaluate(&Oracle, &data).unwrap();
    assert_eq!(out.skipped, vec!["s003".to_string()]);
    assert_eq!(out.folds.len(), 4);
}

#[test]
fn metrics_recomputed_from_the_fold_log_match() {
    let spec = ClassifierSpec::new(ClassifierKind::NearestCentroid);
    let report = evaluate_classifier(&spec, common::magnetic(), false).unwrap();
    let log = write_fold_log(&report.folds);
    let mut lines = log.lines();
    assert_eq!(lines.next(), Some(FOLD_LOG_HEADER));
    let mut m = ConfusionMatrix::default();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        m.add(cells[1].parse().unwrap(), cells[2].parse().unwrap());
    }
    assert_eq!(m, report.confusion);
    assert_eq!(f1_from_confusion(&m).to_bits(), report.f1.to_bits());
    assert_eq!(m.total(), 64);
}

#[test]
fn report_csv_round_trips() {
    let reports = vec![
        EvaluationReport::from_confusion(ClassifierKind::Gpc, FieldKind::H, cm(27, 7, 25, 5), 1.5, 0),
        EvaluationReport::from_confusion(ClassifierKind::Knn, FieldKind::E, cm(20, 3, 29, 12), 0.0, 0),
    ];
    let text = write_report_csv(&reports);
    let back = parse_report_csv(&text, Path::new("results.csv")).unwrap();
    assert_eq!(back, reports);
}

#[test]
fn malformed_report_csv_is_a_format_error() {
    let path = Path::new("results.csv");
    assert!(matches!(parse_report_csv("nope\n", path), Err(Error::Format { .. })));
    let short = "classifier,probe_kind,tp,fp,tn,fn,precision,recall,f1,seconds\nknn,h,1,2\n";
    assert!(matches!(parse_report_csv(short, path), Err(Error::Format { .. })));
    let unknown = "classifier,probe_kind,tp,fp,tn,fn,precision,recall,f1,seconds\nxgb,h,1,2,3,4,0,0,0,0\n";
    assert!(matches!(parse_report_csv(unknown, path), Err(Error::Format { .. })));
}

#[test]
fn single_report_gives_one_row_with_one_blank_cell() {
    let r = EvaluationReport::from_confusion(ClassifierKind::Svm, FieldKind::E, cm(3, 1, 3, 1), 0.0, 0);
    let table = build_report_table(&[r]).unwrap();
    assert_eq!(table.rows.len(), 1);
    assert_eq!(table.cell(ClassifierKind::Svm, FieldKind::E), Some(0.75));
    assert_eq!(table.cell(ClassifierKind::Svm, FieldKind::H), None);
    assert_eq!(table.to_csv(), "classifier,magnetic_h,electric_e\nsvm,,0.750\n");
}

#[test]
fn duplicate_pairs_are_rejected() {
    let r = EvaluationReport::from_confusion(ClassifierKind::Svm, FieldKind::E, cm(3, 1, 3, 1), 0.0, 0);
    let err = build_report_table(&[r.clone(), r]).unwrap_err();
    assert!(matches!(err, Error::DuplicateReport { .. }));
}

#[test]
fn table_rows_follow_the_fixed_classifier_order() {
    let reports: Vec<EvaluationReport> = ClassifierKind::ALL
        .iter()
        .rev()
        .map(|&k| EvaluationReport::from_confusion(k, FieldKind::H, cm(3, 1, 3, 1), 0.0, 0))
        .collect();
    let table = build_report_table(&reports).unwrap();
    let order: Vec<ClassifierKind> = table.rows.iter().map(|(k, _)| *k).collect();
    assert_eq!(order, ClassifierKind::ALL.to_vec());
    assert_eq!(table.column_mean(FieldKind::H), Some(0.75));
    assert_eq!(table.column_mean(FieldKind::E), None);
}

#[test]
fn ties_round_to_even() {
    assert_eq!(round_half_even_3(0.8285), "0.828");
    assert_eq!(round_half_even_3(0.8275), "0.828");
    assert_eq!(round_half_even_3(2.0 / 3.0), "0.667");
}

#[test]
fn permuting_the_dataset_keeps_the_confusion_matrix() {
    let data = common::magnetic();
    let mut images = data.images.clone();
    images.reverse();
    images.rotate_left(17);
    let permuted = Dataset::new(data.probe_kind, images).unwrap();
    for kind in [ClassifierKind::Knn, ClassifierKind::NearestCentroid, ClassifierKind::Gnb] {
        let spec = ClassifierSpec::new(kind);
        let a = evaluate_classifier(&spec, data, false).unwrap();
        let b = evaluate_classifier(&spec, &permuted, false).unwrap();
        assert_eq!(a.confusion, b.confusion, "{kind:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn f1_is_bounded_and_symmetric_in_precision_recall(tp in 0usize..50, fp in 0usize..50, tn in 0usize..50, fn_ in 0usize..50) {
        let m = cm(tp, fp, tn, fn_);
        let f1 = f1_from_confusion(&m);
        prop_assert!((0.0..=1.0).contains(&f1));
        prop_assert!(f1 <= m.precision().max(m.recall()) + 1e-15);
        prop_assert!(f1 >= m.precision().min(m.recall()) - 1e-15);
        // Swapping false positives and false negatives swaps precision and recall.
        prop_assert!((f1 - f1_from_confusion(&cm(tp, fn_, tn, fp))).abs() < 1e-15);
        prop_assert_eq!(m.total(), tp + fp + tn + fn_);
    }

    #[test]
    fn rounding_is_within_half_a_unit(x in 0.0f64..1.0) {
        let r: f64 = round_half_even_3(x).parse().unwrap();
        prop_assert!((r - x).abs() <= 0.0005 + 1e-12);
    }
}
