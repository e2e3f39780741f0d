//! Trains a Gaussian process classifier on the magnetic dataset, prints
//! the fitted kernel hyperparameters, and round-trips the model through
//! its binary file.

use nfscan::classifiers::{load_model, save_model, train, ClassifierKind, ClassifierSpec, FittedModel};
use nfscan::field::FieldKind;
use nfscan::geometry::{generate_wire_library, LibraryConfig};
use nfscan::imaging::{build_dataset, ImagingConfig};

fn main() -> Result<(), nfscan::Error> {
    let library = generate_wire_library(&LibraryConfig::default(), 0)?;
    let data = build_dataset(&library, FieldKind::H, &ImagingConfig::default())?;
    let (x, y) = (data.feature_matrix(), data.labels());
    // Hold the last four shapes out.
    let train_idx: Vec<usize> = (0..x.n() - 4).collect();
    let train_y: Vec<u8> = train_idx.iter().map(|&i| y[i]).collect();
    let model = train(&ClassifierSpec::new(ClassifierKind::Gpc), &x.select(&train_idx), &train_y)?;
    if let FittedModel::Gpc(gpc) = &model.fitted {
        println!(
            "signal variance {:.3}, length scale {:.3}, log marginal likelihood {:.3}",
            gpc.theta[0].exp(),
            gpc.theta[1].exp(),
            gpc.log_marginal
        );
    }

    let path = std::env::temp_dir().join("nfscan_gpc.model");
    save_model(&model, &path)?;
    let loaded = load_model(&path)?;
    for i in x.n() - 4..x.n() {
        let (a, b) = (model.predict(x.row(i)), loaded.predict(x.row(i)));
        assert_eq!(a, b);
        println!("{:<12} truth {}  predicted {}  p(open) {:.3}", data.images[i].shape_id, y[i], a.label, a.score);
    }
    println!("model file: {} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());
    Ok(())
}
