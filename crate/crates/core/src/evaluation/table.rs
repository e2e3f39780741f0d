use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::EvaluationReport;
use crate::classifiers::ClassifierKind;
use crate::error::{Error, Result};
use crate::field::FieldKind;

/// Rounds to three decimals, ties to even, working on the decimal
/// expansion so `0.8285` and `0.8275` both print as `0.828`.
pub fn round_half_even_3(x: f64) -> String {
    let s = format!("{:.10}", x.abs());
    let (int, frac) = s.split_once('.').expect("fixed-point format has a dot");
    let mut digits: Vec<u8> = int.bytes().chain(frac[..3].bytes()).map(|b| b - b'0').collect();
    let rest = &frac[3..];
    let first = rest.as_bytes()[0];
    let tail_zero = rest[1..].bytes().all(|b| b == b'0');
    let round_up = first > b'5'
        || (first == b'5' && !tail_zero)
        || (first == b'5' && tail_zero && digits.last().is_some_and(|d| d % 2 == 1));
    if round_up {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - 3;
    let int: String = digits[..split].iter().map(|d| char::from(b'0' + d)).collect();
    let frac: String = digits[split..].iter().map(|d| char::from(b'0' + d)).collect();
    let negative = x < 0.0 && digits.iter().any(|&d| d != 0);
    format!("{}{int}.{frac}", if negative { "-" } else { "" })
}

/// F1 per classifier (rows, fixed order) and probe kind (columns H, E).
#[derive(Clone, Debug, PartialEq)]
pub struct ReportTable {
    pub rows: Vec<(ClassifierKind, [Option<f64>; 2])>,
}

const COLUMNS: [(FieldKind, &str); 2] = [(FieldKind::H, "Magnetic (H)"), (FieldKind::E, "Electric (E)")];

impl ReportTable {
    pub fn cell(&self, kind: ClassifierKind, probe: FieldKind) -> Option<f64> {
        let col = COLUMNS.iter().position(|(k, _)| *k == probe)?;
        self.rows.iter().find(|(k, _)| *k == kind).and_then(|(_, c)| c[col])
    }

    /// Mean F1 of a column over the rows that have a value.
    pub fn column_mean(&self, probe: FieldKind) -> Option<f64> {
        let col = COLUMNS.iter().position(|(k, _)| *k == probe)?;
        let vals: Vec<f64> = self.rows.iter().filter_map(|(_, c)| c[col]).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{:<18}{:>14}{:>14}\n", "Classifier", COLUMNS[0].1, COLUMNS[1].1);
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), round_half_even_3);
        for (kind, c) in &self.rows {
            let _ = writeln!(out, "{:<18}{:>14}{:>14}", kind.name(), cell(c[0]), cell(c[1]));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("classifier,magnetic_h,electric_e\n");
        let cell = |v: Option<f64>| v.map_or_else(String::new, round_half_even_3);
        for (kind, c) in &self.rows {
            let _ = writeln!(out, "{},{},{}", kind.key(), cell(c[0]), cell(c[1]));
        }
        out
    }
}

/// Arranges reports into the summary table. Two reports for the same
/// (classifier, probe) pair are an error.
pub fn build_report_table(reports: &[EvaluationReport]) -> Result<ReportTable> {
    let mut cells: BTreeMap<ClassifierKind, [Option<f64>; 2]> = BTreeMap::new();
    for r in reports {
        let col = COLUMNS.iter().position(|(k, _)| *k == r.probe_kind).expect("two probe kinds");
        let row = cells.entry(r.classifier).or_default();
        if row[col].is_some() {
            return Err(Error::DuplicateReport {
                classifier: r.classifier.name().to_string(),
                probe: r.probe_kind.as_str().to_string(),
            });
        }
        row[col] = Some(r.f1);
    }
    let rows = ClassifierKind::ALL.into_iter().filter_map(|k| cells.get(&k).map(|c| (k, *c))).collect();
    Ok(ReportTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_ties_go_to_even() {
        assert_eq!(round_half_even_3(0.8285), "0.828");
        assert_eq!(round_half_even_3(0.8275), "0.828");
        assert_eq!(round_half_even_3(0.8286), "0.829");
        assert_eq!(round_half_even_3(0.9995), "1.000");
        assert_eq!(round_half_even_3(1.0), "1.000");
        assert_eq!(round_half_even_3(0.0), "0.000");
    }
}
