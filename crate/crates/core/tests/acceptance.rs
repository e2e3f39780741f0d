//! One PASS/FAIL line per acceptance criterion.
//!
//! Exits 0 even when a criterion fails; set `NFSCAN_ACCEPTANCE_STRICT=1`
//! to exit 1 instead.

mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nfscan::classifiers::gpc::{log_marginal_and_gradient, pairwise_sq_dists};
use nfscan::classifiers::svm::{kkt_violation, solve_dual};
use nfscan::classifiers::{train, ClassifierKind, ClassifierSpec, FittedModel, GpcParams, Hyperparameters, RfParams, SvmParams, Tree, TreeNode};
use nfscan::evaluation::{f1_from_confusion, ConfusionMatrix, ReportTable};
use nfscan::field::{compute_field_map, fields_at, FieldKind, Filament, ProbeGrid};
use nfscan::geometry::{generate_wire_library, mesh_wire_refined, LibraryConfig, Placement, WireGeometry};
use nfscan::mom::{assemble_impedance_matrix, solve_currents, solve_geometry, SolveConfig};
use nfscan::pipeline::{self, RunConfig};

use common::oracles::{brute_force_knn, hertzian, V3};

type Outcome = (bool, String);

fn main() {
    let mut ctx = Context::default();
    let checks: [(&str, fn(&mut Context) -> Outcome); 7] = [
        ("dipole impedance oracle", dipole),
        ("ground-plane boundary condition", ground_plane),
        ("Hertzian dipole + image fields", hertzian_fields),
        ("classifier oracles", classifier_oracles),
        ("table reproduction", table),
        ("determinism", determinism),
        ("property suite", property_suite),
    ];
    let mut passed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = check(&mut ctx);
        let secs = start.elapsed().as_secs_f64();
        println!("{} {}. {name}: {detail} [{secs:.1} s]", if ok { "PASS" } else { "FAIL" }, i + 1);
        passed += usize::from(ok);
    }
    println!("acceptance: {passed}/{} criteria passed", checks.len());
    let strict = std::env::var("NFSCAN_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && passed < checks.len() {
        std::process::exit(1);
    }
}

fn input_impedance(g: &WireGeometry, cfg: &SolveConfig, refinement: usize) -> Complex64 {
    let mesh = mesh_wire_refined(g, cfg.frequency, refinement).unwrap();
    let z = assemble_impedance_matrix(&mesh, cfg);
    solve_currents(&z, &mesh, cfg).unwrap().input_impedance
}

fn dipole(_: &mut Context) -> Outcome {
    let cfg = SolveConfig { frequency: 1e9, source_voltage: 1.0, ground_plane: false };
    let lambda = cfg.wavelength();
    let (length, radius) = (0.47 * lambda, lambda / 1000.0);
    let v = vec![Vector3::new(-length / 2.0, 0.0, 1.0), Vector3::new(length / 2.0, 0.0, 1.0)];
    let g = WireGeometry::new("dipole", v, false, radius, Placement::Middle, 0).unwrap();
    let start = Instant::now();
    let z1 = input_impedance(&g, &cfg, 1);
    let z2 = input_impedance(&g, &cfg, 2);
    let secs = start.elapsed().as_secs_f64();
    let oracle = common::oracles::induced_emf_impedance(length / 2.0, radius, cfg.frequency);
    let re_err = (z1.re - oracle.re).abs() / oracle.re;
    let change = (z2.norm() - z1.norm()).abs() / z1.norm();
    let ok = re_err < 0.10 && change < 0.02 && secs < 5.0;
    let detail = format!(
        "Z = {:.2}{:+.2}j vs induced EMF {:.2}{:+.2}j (Re off {:.1}% < 10%), |Z| change on doubling {:.2}% < 2%, solve {secs:.2} s < 5 s",
        z1.re, z1.im, oracle.re, oracle.im, re_err * 100.0, change * 100.0
    );
    (ok, detail)
}

fn ground_plane(_: &mut Context) -> Outcome {
    let start = Instant::now();
    let cfg = SolveConfig::default();
    let grid = ProbeGrid::default();
    let lib = generate_wire_library(&LibraryConfig::default(), 0).unwrap();
    let mut worst = f64::NEG_INFINITY;
    for g in &lib {
        let sol = solve_geometry(g, &cfg).unwrap();
        let scan = compute_field_map(&sol, &grid, FieldKind::E, &cfg).unwrap();
        let norm = |v: &[Complex64; 3]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let reference = scan.samples.iter().map(norm).fold(0.0, f64::max);
        let ground = compute_field_map(&sol, &grid.with_height(0.0), FieldKind::E, &cfg).unwrap();
        for v in &ground.samples {
            let tangential = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            worst = worst.max(20.0 * (tangential / reference).log10());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (worst < -60.0 && secs < 120.0, format!("{} shapes, worst tangential E {worst:.1} dB < -60 dB, {secs:.1} s < 120 s", lib.len()))
}

fn hertzian_fields(_: &mut Context) -> Outcome {
    let (f, dl) = (1e9, 2e-4);
    let i0 = Complex64::new(0.7, -0.3);
    let at = Vector3::new(0.12, 0.15, 0.01);
    let dir = Vector3::new(0.6, 0.8, 0.0);
    let source = Filament::new(at - dir * (dl / 2.0), at + dir * (dl / 2.0), i0, i0);
    let filaments = vec![source.clone(), source.image()];
    let image_at = Vector3::new(at.x, at.y, -at.z);
    let image_dir = Vector3::new(-dir.x, -dir.y, dir.z);
    let to_v3 = |a: &[Complex64; 3]| V3::new(a[0], a[1], a[2]);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let obs = loop {
            let p = Vector3::new(rng.gen_range(0.0..0.3), rng.gen_range(0.0..0.3), rng.gen_range(0.005..0.05));
            if (p - at).norm() > 0.01 {
                break p;
            }
        };
        let (e, h) = fields_at(&filaments, &obs, f);
        let (e1, h1) = hertzian(i0 * dl, &dir, &at, &obs, f);
        let (e2, h2) = hertzian(i0 * dl, &image_dir, &image_at, &obs, f);
        let (e_ref, h_ref) = (e1 + e2, h1 + h2);
        worst = worst.max((to_v3(&e) - &e_ref).norm() / e_ref.norm());
        worst = worst.max((to_v3(&h) - &h_ref).norm() / h_ref.norm());
    }
    (worst < 0.01, format!("20 points, worst E/H relative error {:.3}% < 1%", worst * 100.0))
}

fn leaves_pure(tree: &Tree) -> bool {
    tree.nodes.iter().all(|n| match n {
        TreeNode::Leaf { counts } => counts[0] == 0 || counts[1] == 0,
        TreeNode::Split { .. } => true,
    })
}

fn classifier_oracles(_: &mut Context) -> Outcome {
    let ds = common::magnetic();
    let (x, y) = (ds.feature_matrix(), ds.labels());
    let mut notes = Vec::new();
    let mut ok = true;

    let knn = train(&ClassifierSpec::new(ClassifierKind::Knn), &x, &y).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut agree = 0;
    for _ in 0..200 {
        let (a, b) = (rng.gen_range(0..x.n()), rng.gen_range(0..x.n()));
        let w: f64 = rng.gen_range(0.0..1.0);
        let q: Vec<f64> =
            x.row(a).iter().zip(x.row(b)).map(|(u, v)| w * u + (1.0 - w) * v + rng.gen_range(-0.05..0.05)).collect();
        agree += usize::from(knn.predict(&q).label == brute_force_knn(&x, &y, &q, 3));
    }
    ok &= agree == 200;
    notes.push(format!("KNN {agree}/200"));

    let idx = [0, 5, 11, 20, 33, 40, 52, 63];
    let xs = x.select(&idx);
    let t: Vec<f64> = idx.iter().map(|&i| y[i] as f64).collect();
    let d2 = pairwise_sq_dists(&xs);
    let p = GpcParams { newton_tol: 1e-14, max_newton: 200, ..GpcParams::default() };
    let mut worst_grad: f64 = 0.0;
    for theta in [[0.0, 2.0], [2.0, 3.0], [-1.0, 1.5]] {
        let (_, grad, _) = log_marginal_and_gradient(&d2, &t, theta, &p).unwrap();
        for c in 0..2 {
            let h = 1e-5;
            let (mut up, mut down) = (theta, theta);
            up[c] += h;
            down[c] -= h;
            let fd = (log_marginal_and_gradient(&d2, &t, up, &p).unwrap().0
                - log_marginal_and_gradient(&d2, &t, down, &p).unwrap().0)
                / (2.0 * h);
            worst_grad = worst_grad.max((grad[c] - fd).abs() / fd.abs().max(1e-8));
        }
    }
    ok &= worst_grad < 1e-4;
    notes.push(format!("GPC gradient rel err {worst_grad:.1e}"));

    let sp = SvmParams::default();
    let kkt = kkt_violation(&x, &solve_dual(&x, &y, &sp), &sp);
    ok &= kkt < 1e-3;
    notes.push(format!("SVM KKT {kkt:.1e}"));

    let dtc = train(&ClassifierSpec::new(ClassifierKind::Dtc), &x, &y).unwrap();
    let rf_spec = ClassifierSpec { hyperparameters: Hyperparameters::Rf(RfParams::default()), seed: 0 };
    let rf = train(&rf_spec, &x, &y).unwrap();
    let pure = match (&dtc.fitted, &rf.fitted) {
        (FittedModel::Dtc(t), FittedModel::Rf(f)) => leaves_pure(t) && f.trees.iter().all(leaves_pure),
        _ => false,
    };
    ok &= pure;
    notes.push(format!("DTC/RF leaves pure {pure}"));

    let cm = |tp, fp, tn, fn_| ConfusionMatrix { tp, fp, tn, fn_ };
    let f1_ok = (f1_from_confusion(&cm(3, 1, 3, 1)) - 0.75).abs() < 1e-15
        && f1_from_confusion(&cm(0, 0, 64, 0)) == 0.0
        && f1_from_confusion(&cm(32, 0, 32, 0)) == 1.0
        && (f1_from_confusion(&cm(32, 32, 0, 0)) - 2.0 / 3.0).abs() < 1e-15;
    ok &= f1_ok;
    notes.push(format!("F1 hand cases {f1_ok}"));
    (ok, notes.join(", "))
}

/// Full generate + 11×2 leave-one-out run, shared by the table and
/// determinism checks.
struct FullRun {
    dir: tempfile::TempDir,
    table: ReportTable,
    evaluate_secs: f64,
}

fn full_run(seed: u64) -> FullRun {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { seed, out: dir.path().to_path_buf(), ..RunConfig::default() };
    pipeline::generate(&cfg).unwrap();
    let start = Instant::now();
    pipeline::evaluate(&cfg).unwrap();
    let evaluate_secs = start.elapsed().as_secs_f64();
    let table = pipeline::report(&cfg, &[]).unwrap();
    FullRun { dir, table, evaluate_secs }
}

#[derive(Default)]
struct Context {
    first: Option<FullRun>,
}

impl Context {
    fn first_run(&mut self) -> &FullRun {
        self.first.get_or_insert_with(|| full_run(0))
    }
}

fn table(ctx: &mut Context) -> Outcome {
    let run = ctx.first_run();
    let t = &run.table;
    let mut ok = true;
    let mut notes = Vec::new();
    for probe in [FieldKind::H, FieldKind::E] {
        let cell = |k| t.cell(k, probe).unwrap_or(f64::NAN);
        let (gpc, svm, knn) = (cell(ClassifierKind::Gpc), cell(ClassifierKind::Svm), cell(ClassifierKind::Knn));
        let floor = gpc >= 0.70 && svm >= 0.70 && knn >= 0.70;
        let best_kernel = gpc.max(svm);
        let gap = best_kernel - gpc;
        let near_best = gap <= 0.05;
        ok &= floor && near_best;
        notes.push(format!(
            "{}: GPC {gpc:.3} SVM {svm:.3} KNN {knn:.3} (all >= 0.70: {floor}; GPC {gap:.3} behind best kernel, <= 0.05: {near_best})",
            probe.as_str()
        ));
    }
    let all: Vec<f64> = t.rows.iter().flat_map(|(_, c)| c.iter().flatten().copied()).collect();
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let full = all.len() == 22;
    ok &= mean >= 0.70 && full && run.evaluate_secs < 1800.0;
    notes.push(format!("mean F1 over {} cells {mean:.3} >= 0.70", all.len()));
    notes.push(format!("LOO run {:.0} s < 1800 s", run.evaluate_secs));
    print!("{}", t.to_text());
    (ok, notes.join("; "))
}

fn digests(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().unwrap() != "config.toml" {
                let key = path.strip_prefix(dir).unwrap().display().to_string();
                out.insert(key, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn determinism(ctx: &mut Context) -> Outcome {
    let a = digests(ctx.first_run().dir.path());
    let second = full_run(0);
    let b = digests(second.dir.path());
    let datasets = a.keys().filter(|k| k.ends_with(".nfds")).count();
    let folds = a.keys().filter(|k| k.starts_with("folds")).count();
    let differing: Vec<&String> = a.keys().filter(|k| a.get(*k) != b.get(*k)).collect();
    let ok = a.len() == b.len() && differing.is_empty() && datasets == 2 && folds == 22 && a.contains_key("results.csv");
    let detail = format!(
        "{} files compared ({datasets} datasets, {folds} fold logs, results.csv, tables): {} differ",
        a.len(),
        differing.len()
    );
    (ok, detail)
}

/// Runs the sibling integration-test and unit-test executables that the
/// same `cargo test` invocation built.
fn property_suite(_: &mut Context) -> Outcome {
    let exe = std::env::current_exe().unwrap();
    let deps = exe.parent().unwrap();
    let suites = ["nfscan", "geometry", "mom", "field", "imaging", "classifiers", "evaluation", "cli"];
    let mut found: BTreeMap<&str, Vec<(std::time::SystemTime, PathBuf)>> = BTreeMap::new();
    for entry in std::fs::read_dir(deps).unwrap() {
        let path = entry.unwrap().path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        let Some((stem, _hash)) = name.rsplit_once('-') else { continue };
        if path.extension().is_some() || !suites.contains(&stem) {
            continue;
        }
        // The command-line binary lives here too; only test harnesses answer `--list`.
        let harness = Command::new(&path).arg("--list").output().is_ok_and(|o| o.status.success());
        if !harness {
            continue;
        }
        let modified = path.metadata().and_then(|m| m.modified()).unwrap();
        found.entry(suites[suites.iter().position(|s| *s == stem).unwrap()]).or_default().push((modified, path));
    }
    let mut ok = true;
    let mut notes = Vec::new();
    for suite in suites {
        let Some(builds) = found.get(suite) else {
            ok = false;
            notes.push(format!("{suite}: not built"));
            continue;
        };
        // Stale builds from older invocations linger in the same directory;
        // the library and bin unit tests share a stem and are built together.
        let latest = builds.iter().map(|(t, _)| *t).max().unwrap();
        let window = std::time::Duration::from_secs(120);
        let current: Vec<&PathBuf> =
            builds.iter().filter(|(t, _)| latest.duration_since(*t).unwrap_or_default() <= window).map(|(_, p)| p).collect();
        let (mut passed, mut success) = (0, true);
        for path in current {
            let (n, good) = run_suite(path);
            passed += n;
            success &= good;
        }
        ok &= success;
        notes.push(format!("{suite} {passed}{}", if success { "" } else { " FAILED" }));
    }
    (ok, format!("tests passing per suite: {}", notes.join(", ")))
}

fn run_suite(path: &Path) -> (usize, bool) {
    let out = Command::new(path).arg("-q").env("NFSCAN_LOG", "error").output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    let passed = stdout
        .lines()
        .filter_map(|l| l.strip_prefix("test result: ").and_then(|r| r.split_once(". ")))
        .filter_map(|(_, rest)| rest.split_whitespace().next()?.parse::<usize>().ok())
        .sum();
    (passed, out.status.success())
}
