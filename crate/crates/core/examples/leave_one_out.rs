//! Leave-one-out F1 for a set of classifiers on freshly generated datasets.
//!
//!     cargo run --release --example leave_one_out -- [kind ...]
//!
//! With no arguments the fast kinds run; pass `all` for every classifier.

use nfscan::classifiers::{ClassifierKind, ClassifierSpec};
use nfscan::evaluation::{build_report_table, evaluate_classifier};
use nfscan::field::FieldKind;
use nfscan::geometry::{generate_wire_library, LibraryConfig};
use nfscan::imaging::{build_datasets, ImagingConfig};

fn main() -> Result<(), nfscan::Error> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let kinds: Vec<ClassifierKind> = match args.as_slice() {
        [] => vec![ClassifierKind::Svm, ClassifierKind::Knn, ClassifierKind::Gnb, ClassifierKind::Qda, ClassifierKind::NearestCentroid],
        [all] if all == "all" => ClassifierKind::ALL.to_vec(),
        names => names
            .iter()
            .map(|n| ClassifierKind::parse(n).ok_or_else(|| nfscan::Error::Config(format!("unknown classifier `{n}`"))))
            .collect::<Result<_, _>>()?,
    };
    let library = generate_wire_library(&LibraryConfig::default(), 0)?;
    let datasets = build_datasets(&library, &[FieldKind::H, FieldKind::E], &ImagingConfig::default())?;
    let mut reports = Vec::new();
    for d in &datasets {
        for &kind in &kinds {
            let r = evaluate_classifier(&ClassifierSpec::new(kind), d, true)?;
            let c = r.confusion;
            println!(
                "{:<16} {}  tp {:2} fp {:2} tn {:2} fn {:2}  F1 {:.3}  ({:.1} s)",
                kind.name(),
                d.probe_kind.as_str(),
                c.tp,
                c.fp,
                c.tn,
                c.fn_,
                r.f1,
                r.seconds
            );
            reports.push(r);
        }
    }
    println!();
    print!("{}", build_report_table(&reports)?.to_text());
    Ok(())
}
