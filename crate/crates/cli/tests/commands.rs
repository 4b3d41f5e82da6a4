use std::path::Path;
use std::process::Command;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vadesc_cli::commands::{self, read_predictions, trace_path};
use vadesc_cli::{Checkpoint, RunConfig};
use vadesc_core::data::{load_csv, save_csv, SyntheticConfig};
use vadesc_core::metrics::{ari, calibration_slope, clustering_accuracy, concordance_index, kaplan_meier, nmi, rae_c, rae_nc};
use vadesc_core::{FeatureKind, Matrix, SurvivalDataset};

const SMALL: &str = "num_rows = 300\ninput_dim = 12\nlatent_dim = 3\nhidden_layers = 16\nbatch_size = 64\nepochs = 2\n";

fn small_config() -> RunConfig {
    RunConfig::parse(SMALL).unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn parse_report(text: &str) -> Vec<(String, f64)> {
    text.lines()
        .map(|l| {
            let (k, v) = l.split_once('=').unwrap();
            (k.to_string(), v.parse().unwrap())
        })
        .collect()
}

fn get(report: &[(String, f64)], key: &str) -> Option<f64> {
    report.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
}

fn write_predictions(path: &Path, t_hat: &[f64], cluster: Option<&[usize]>) {
    let mut text = String::from(if cluster.is_some() { "row_id,cluster,t_hat\n" } else { "row_id,t_hat\n" });
    for (i, t) in t_hat.iter().enumerate() {
        match cluster {
            Some(c) => text.push_str(&format!("{i},{},{t}\n", c[i])),
            None => text.push_str(&format!("{i},{t}\n")),
        }
    }
    std::fs::write(path, text).unwrap();
}

fn fixture(path: &Path, times: &[f64], events: &[bool], labels: Option<Vec<usize>>) -> SurvivalDataset {
    let x = Matrix::from_fn(times.len(), 2, |i, j| (i * 2 + j) as f64);
    let ds = SurvivalDataset::new(x, times.to_vec(), events.to_vec(), labels, FeatureKind::Real).unwrap();
    save_csv(&ds, path).unwrap();
    ds
}

#[test]
fn simulate_writes_desk_scale_files() {
    let dir = tempfile::tempdir().unwrap();
    let desk = SyntheticConfig::desk_scale(11);
    let mut c = RunConfig::default();
    c.num_rows = desk.num_rows;
    c.input_dim = desk.input_dim;
    c.train.seed = 11;
    let out = commands::simulate(&c, dir.path()).unwrap();
    let train = load_csv(&out.train, FeatureKind::Real).unwrap();
    let test = load_csv(&out.test, FeatureKind::Real).unwrap();
    assert_eq!((train.len(), test.len()), (3500, 1500));
    assert_eq!((train.num_features(), test.num_features()), (100, 100));
    assert!(train.labels().unwrap().iter().all(|&l| l < 3));
    let manifest = read(&out.manifest);
    assert!(manifest.contains("seed = 11\n"));
    assert!(manifest.contains("input_dim = 100\n"));
    let echoed: String = manifest.split("# config\n").nth(1).unwrap().to_string();
    assert_eq!(RunConfig::parse(&echoed).unwrap(), c);
}

#[test]
fn simulate_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let c = small_config();
    let fa = commands::simulate(&c, a.path()).unwrap();
    let fb = commands::simulate(&c, b.path()).unwrap();
    assert_eq!(read(&fa.train), read(&fb.train));
    assert_eq!(read(&fa.test), read(&fb.test));
    assert_eq!(read(&fa.manifest), read(&fb.manifest));

    let mut other = c.clone();
    other.train.seed += 1;
    let c_dir = tempfile::tempdir().unwrap();
    let fc = commands::simulate(&other, c_dir.path()).unwrap();
    assert_ne!(read(&fa.train), read(&fc.train));
}

#[test]
fn simulate_survmnist_surrogate() {
    let dir = tempfile::tempdir().unwrap();
    let c = RunConfig::parse("dataset = survmnist\nnum_clusters = 5\nnum_rows = 500\n").unwrap();
    let out = commands::simulate(&c, dir.path()).unwrap();
    let train = load_csv(&out.train, FeatureKind::Binary).unwrap();
    assert_eq!(train.num_features(), 10);
    assert!(train.features().as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
    assert!(read(&out.manifest).contains("digit_clusters = "));
    let missing_labels = RunConfig::parse("dataset = survmnist\nmnist_images = x.idx\n").unwrap();
    assert!(commands::simulate(&missing_labels, dir.path()).is_err());
}

#[test]
fn train_predict_evaluate_round() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config();
    c.train.epochs = 1;
    let files = commands::simulate(&c, dir.path()).unwrap();
    let ckpt_path = dir.path().join("m.vdsc");
    let trained = commands::train(&c, &files.train, &ckpt_path).unwrap();
    let loaded = Checkpoint::load(&ckpt_path).unwrap();
    assert_eq!(loaded.params, trained.params);
    let trace = read(&trace_path(&ckpt_path));
    assert_eq!(trace.lines().count(), 1 + c.train.epochs);
    assert!(trace.starts_with("epoch,elbo,"));

    let pred_path = dir.path().join("pred.csv");
    commands::predict(&loaded, &files.test, &pred_path).unwrap();
    let test = load_csv(&files.test, FeatureKind::Real).unwrap();
    let mut rdr = csv::Reader::from_path(&pred_path).unwrap();
    let header = rdr.headers().unwrap().clone();
    assert_eq!(header.iter().filter(|h| h.starts_with("p_")).count(), 3);
    assert_eq!(header.iter().filter(|h| h.starts_with("z_")).count(), 3);
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let p: f64 = (3..6).map(|j| rec[j].parse::<f64>().unwrap()).sum();
        assert!((p - 1.0).abs() <= 1e-9);
        assert!(rec[6].parse::<f64>().unwrap() > 0.0);
        rows += 1;
    }
    assert_eq!(rows, test.len());

    let report = parse_report(&commands::evaluate(&pred_path, &files.test).unwrap());
    for key in ["ci", "rae_nc", "rae_c", "cal", "acc", "nmi", "ari", "acc_no_time"] {
        assert!(get(&report, key).is_some(), "{key} missing");
    }
    let km = commands::km_export(&pred_path, &files.test).unwrap();
    assert!(km.starts_with("cluster,time,survival\n"));

    let mut wide = c.clone();
    wide.input_dim = 13;
    let wide_dir = tempfile::tempdir().unwrap();
    let wide_files = commands::simulate(&wide, wide_dir.path()).unwrap();
    let e = commands::predict(&loaded, &wide_files.test, &dir.path().join("x.csv")).unwrap_err();
    assert!(e.message().contains("D = 12"), "{e}");
}

#[test]
fn predicted_times_ignore_the_time_column() {
    let dir = tempfile::tempdir().unwrap();
    let c = small_config();
    let files = commands::simulate(&c, dir.path()).unwrap();
    let ckpt = commands::train(&c, &files.train, &dir.path().join("m.vdsc")).unwrap();

    let test = load_csv(&files.test, FeatureKind::Real).unwrap();
    let mut order: Vec<usize> = (0..test.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(0));
    let times: Vec<f64> = order.iter().map(|&i| test.times()[i]).collect();
    let events: Vec<bool> = order.iter().map(|&i| !test.events()[i]).collect();
    let permuted = SurvivalDataset::new(test.features().clone(), times, events, None, FeatureKind::Real).unwrap();
    let permuted_path = dir.path().join("permuted.csv");
    save_csv(&permuted, &permuted_path).unwrap();

    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    commands::predict(&ckpt, &files.test, &a).unwrap();
    commands::predict(&ckpt, &permuted_path, &b).unwrap();
    let columns = |path: &Path, names: &[&str]| -> Vec<Vec<String>> {
        let mut rdr = csv::Reader::from_path(path).unwrap();
        let header = rdr.headers().unwrap().clone();
        let idx: Vec<usize> = header
            .iter()
            .enumerate()
            .filter(|(_, h)| names.iter().any(|n| h.starts_with(n)))
            .map(|(i, _)| i)
            .collect();
        rdr.records().map(|r| idx.iter().map(|&i| r.as_ref().unwrap()[i].to_string()).collect()).collect()
    };
    let kept = ["row_id", "cluster_no_time", "t_hat", "z_"];
    assert_eq!(columns(&a, &kept), columns(&b, &kept));
    assert_eq!(read_predictions(&a).unwrap().t_hat, read_predictions(&b).unwrap().t_hat);
}

#[test]
fn evaluate_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let preds = dir.path().join("pred.csv");
    let times = [1.0, 2.5, 3.0, 4.0, 7.5];
    fixture(&data, &times, &[true; 5], Some(vec![0, 0, 1, 1, 2]));
    write_predictions(&preds, &times, Some(&[2, 2, 0, 0, 1]));
    let r = parse_report(&commands::evaluate(&preds, &data).unwrap());
    assert_eq!(get(&r, "rae_nc"), Some(0.0));
    assert_eq!(get(&r, "cal"), Some(1.0));
    assert_eq!(get(&r, "acc"), Some(1.0));
    assert_eq!(get(&r, "ci"), Some(1.0));
    assert_eq!(get(&r, "rae_c"), None);
    assert_eq!(get(&r, "acc_no_time"), None);

    fixture(&data, &times, &[true; 5], None);
    let r = parse_report(&commands::evaluate(&preds, &data).unwrap());
    assert_eq!(get(&r, "acc"), None);
    assert_eq!(get(&r, "nmi"), None);
}

#[test]
fn evaluate_matches_the_metric_functions() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let preds = dir.path().join("pred.csv");
    let t = [3.0, 1.0, 4.0, 1.5, 5.0, 9.0, 2.5, 6.5];
    let e = [true, false, true, true, false, true, false, true];
    let truth = vec![0, 1, 1, 0, 2, 2, 1, 0];
    let pred = [1, 1, 0, 0, 2, 2, 1, 0];
    let t_hat = [2.0, 2.0, 5.0, 1.0, 3.0, 8.0, 4.0, 6.0];
    fixture(&data, &t, &e, Some(truth.clone()));
    write_predictions(&preds, &t_hat, Some(&pred));
    let r = parse_report(&commands::evaluate(&preds, &data).unwrap());
    let risk: Vec<f64> = t_hat.iter().map(|v| -v).collect();
    assert_eq!(get(&r, "ci"), concordance_index(&t, &e, &risk).unwrap());
    assert_eq!(get(&r, "rae_nc"), rae_nc(&t, &t_hat, &e).unwrap());
    assert_eq!(get(&r, "rae_c"), rae_c(&t, &t_hat, &e).unwrap());
    assert_eq!(get(&r, "cal"), calibration_slope(&t, &t_hat, &e).unwrap());
    assert_eq!(get(&r, "acc"), Some(clustering_accuracy(&truth, &pred).unwrap()));
    assert_eq!(get(&r, "nmi"), Some(nmi(&truth, &pred).unwrap()));
    assert_eq!(get(&r, "ari"), Some(ari(&truth, &pred).unwrap()));
}

#[test]
fn misaligned_predictions_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let preds = dir.path().join("pred.csv");
    fixture(&data, &[1.0, 2.0, 3.0], &[true; 3], None);

    write_predictions(&preds, &[1.0, 2.0], None);
    assert_eq!(commands::evaluate(&preds, &data).unwrap_err().kind(), "alignment");
    std::fs::write(&preds, "row_id,t_hat\n0,1\n2,2\n1,3\n").unwrap();
    let e = commands::evaluate(&preds, &data).unwrap_err();
    assert_eq!(e.kind(), "alignment");
    assert!(e.message().contains("row 2"), "{e}");
    std::fs::write(&preds, "row_id,cluster\n0,1\n").unwrap();
    assert_eq!(commands::evaluate(&preds, &data).unwrap_err().kind(), "format");
}

#[test]
fn km_export_curves() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let preds = dir.path().join("pred.csv");
    let times = [4.0, 1.0, 3.0, 2.0, 2.0];
    fixture(&data, &times, &[true; 5], None);
    write_predictions(&preds, &[1.0; 5], Some(&[0; 5]));
    let km = kaplan_meier(&times, &[true; 5]).unwrap();
    let mut expected = String::from("cluster,time,survival\n");
    for (t, s) in km.times.iter().zip(&km.survival) {
        expected.push_str(&format!("0,{t},{s}\n"));
    }
    assert_eq!(commands::km_export(&preds, &data).unwrap(), expected);
    assert!(expected.contains("0,2,0.4\n"));

    let t: Vec<f64> = (1..=12).map(|v| v as f64 * 0.5).collect();
    let e: Vec<bool> = (0..12).map(|i| i % 3 != 0).collect();
    fixture(&data, &t, &e, None);
    let cl = [0, 2, 0, 2, 0, 2, 0, 2, 0, 2, 0, 2];
    std::fs::write(&preds, {
        let mut s = String::from("row_id,cluster,p_0,p_1,p_2,t_hat\n");
        for (i, c) in cl.iter().enumerate() {
            s.push_str(&format!("{i},{c},0.3,0.3,0.4,1\n"));
        }
        s
    })
    .unwrap();
    let out = commands::km_export(&preds, &data).unwrap();
    let rows: Vec<(usize, f64, f64)> = out
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert!(rows.iter().all(|r| r.0 != 1));
    for c in [0, 2] {
        let curve: Vec<&(usize, f64, f64)> = rows.iter().filter(|r| r.0 == c).collect();
        assert!(!curve.is_empty());
        for w in curve.windows(2) {
            assert!(w[1].1 > w[0].1 && w[1].2 <= w[0].2);
        }
    }
}

fn vadesc(args: &[&str], cwd: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_vadesc")).args(args).current_dir(cwd).output().unwrap()
}

#[test]
fn binary_exit_codes_and_error_lines() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("run.cfg"), format!("{SMALL}seed = 1\n")).unwrap();
    let ok = vadesc(&["simulate", "--config", "run.cfg", "--out", "d", "--seed", "9"], p);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(read(&p.join("d/manifest")).contains("seed = 9\n"));

    assert!(vadesc(&["train", "--config", "run.cfg", "--data", "d/train.csv", "--out", "m.vdsc"], p).status.success());
    assert!(vadesc(&["predict", "--checkpoint", "m.vdsc", "--data", "d/test.csv", "--out", "p.csv"], p).status.success());
    let eval = vadesc(&["evaluate", "--predictions", "p.csv", "--data", "d/test.csv"], p);
    assert!(eval.status.success());
    assert!(String::from_utf8(eval.stdout).unwrap().starts_with("ci="));
    assert!(vadesc(&["km-export", "--predictions", "p.csv", "--data", "d/test.csv", "--out", "km.csv"], p).status.success());
    assert!(read(&p.join("km.csv")).starts_with("cluster,time,survival\n"));

    std::fs::write(p.join("bad.cfg"), "epochs = 1\nepoch = 2\n").unwrap();
    let cases: [(&[&str], &str); 4] = [
        (&["train", "--config", "bad.cfg", "--data", "d/train.csv", "--out", "x"], "error[config]: "),
        (&["predict", "--checkpoint", "d/test.csv", "--data", "d/test.csv", "--out", "x"], "error[format]: "),
        (&["evaluate", "--predictions", "p.csv", "--data", "d/train.csv"], "error[alignment]: "),
        (&["simulate", "--nonsense"], "error[usage]: "),
    ];
    for (args, prefix) in cases {
        let out = vadesc(args, p);
        assert!(!out.status.success(), "{args:?}");
        let stderr = String::from_utf8(out.stderr).unwrap();
        let errors: Vec<&str> = stderr.lines().filter(|l| l.starts_with("error[")).collect();
        assert_eq!(errors.len(), 1, "{stderr}");
        assert!(errors[0].starts_with(prefix), "{stderr}");
    }
    let bad = vadesc(&["train", "--config", "bad.cfg", "--data", "d/train.csv", "--out", "x"], p);
    assert!(String::from_utf8(bad.stderr).unwrap().contains("line 2"));
}
