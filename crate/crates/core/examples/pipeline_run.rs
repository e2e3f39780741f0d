//! The `generate` → `evaluate` → `report` flow of the command-line tool,
//! driven from a TOML configuration.

use std::path::PathBuf;

use nfscan::pipeline::{self, RunConfig};

const CONFIG: &str = r#"
seed = 0
out = "out/pipeline"
probes = ["h", "e"]
classifiers = ["svm", "knn", "nearest_centroid"]

[imaging]
combine = "total"
"#;

fn main() -> Result<(), nfscan::Error> {
    let cfg = RunConfig::from_toml_str(CONFIG)?;
    for path in pipeline::generate(&cfg)? {
        println!("wrote {}", path.display());
    }
    pipeline::evaluate(&cfg)?;
    let table = pipeline::report(&cfg, &[PathBuf::from("out/pipeline/results.csv")])?;
    print!("{}", table.to_text());
    println!("resolved config: {}", cfg.out.join(pipeline::CONFIG_FILE).display());
    Ok(())
}
