use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use vadesc_core::data::{
    fit_preprocess, gen_survmnist, gen_synthetic, load_csv, load_idx_images, load_idx_labels, preprocess, save_csv,
    train_test_split, MnistSource,
};
use vadesc_core::metrics::{clustering_accuracy, kaplan_meier};
use vadesc_core::{fit, predict as model_predict, MetricsReport, SurvivalDataset};

use crate::checkpoint::Checkpoint;
use crate::config::{DatasetKind, RunConfig};
use crate::error::{io_at, CliError, CliResult};

/// Files written by [`simulate`].
#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub train: PathBuf,
    pub test: PathBuf,
    pub manifest: PathBuf,
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(io_at(dir))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(io_at(path))
}

fn load_data(path: &Path, config: &RunConfig) -> CliResult<SurvivalDataset> {
    load_csv(path, config.resolved_feature_kind())
        .map_err(|e| CliError::new(e.kind(), format!("{}: {e}", path.display())))
}

/// Generates the configured benchmark, splits it and writes `train.csv`,
/// `test.csv` and `manifest` into `out_dir`.
pub fn simulate(config: &RunConfig, out_dir: &Path) -> CliResult<SimulateOutput> {
    let seed = config.train.seed;
    let (data, extra) = match config.dataset {
        DatasetKind::Synthetic => {
            let (data, _) = gen_synthetic(&config.synthetic())?;
            (data, String::new())
        }
        DatasetKind::SurvMnist => {
            let source = match (&config.mnist_images, &config.mnist_labels) {
                (Some(images), Some(labels)) => {
                    let features = load_idx_images(images).map_err(|e| CliError::new(e.kind(), format!("{}: {e}", images.display())))?;
                    let digits = load_idx_labels(labels).map_err(|e| CliError::new(e.kind(), format!("{}: {e}", labels.display())))?;
                    MnistSource::Images { features, digits }
                }
                (None, None) => MnistSource::Surrogate {
                    rows: config.num_rows,
                    noise: config.surrogate_noise,
                },
                _ => return Err(CliError::config("mnist_images and mnist_labels must be given together")),
            };
            let (data, truth) = gen_survmnist(&config.survmnist(), source)?;
            let clusters: Vec<String> = truth.digit_clusters.iter().map(|c| c.to_string()).collect();
            (
                data,
                format!(
                    "digit_clusters = {}\ncensoring_time = {}\nquantile = {}\n",
                    clusters.join(","),
                    truth.censoring_time,
                    truth.quantile
                ),
            )
        }
    };
    let data = data.with_feature_kind(config.resolved_feature_kind());
    let (train, test) = train_test_split(&data, config.test_fraction, seed, true)?;

    create_dir(out_dir)?;
    let out = SimulateOutput {
        train: out_dir.join("train.csv"),
        test: out_dir.join("test.csv"),
        manifest: out_dir.join("manifest"),
    };
    save_csv(&train, &out.train).map_err(|e| CliError::new(e.kind(), format!("{}: {e}", out.train.display())))?;
    save_csv(&test, &out.test).map_err(|e| CliError::new(e.kind(), format!("{}: {e}", out.test.display())))?;

    let mut manifest = String::new();
    writeln!(manifest, "# generated data").unwrap();
    writeln!(manifest, "seed = {seed}").unwrap();
    writeln!(manifest, "rows = {}", data.len()).unwrap();
    writeln!(manifest, "train_rows = {}", train.len()).unwrap();
    writeln!(manifest, "test_rows = {}", test.len()).unwrap();
    writeln!(manifest, "features = {}", data.num_features()).unwrap();
    writeln!(manifest, "censored_fraction = {}", data.censored_fraction()).unwrap();
    manifest.push_str(&extra);
    writeln!(manifest, "# config").unwrap();
    manifest.push_str(&config.to_text());
    write_file(&out.manifest, &manifest)?;
    Ok(out)
}

/// Trace file written next to a checkpoint.
pub fn trace_path(checkpoint: &Path) -> PathBuf {
    let mut name = checkpoint.as_os_str().to_owned();
    name.push(".trace.csv");
    PathBuf::from(name)
}

/// Preprocesses `data`, trains, and writes the checkpoint plus a per-epoch
/// ELBO trace.
pub fn train(config: &RunConfig, data: &Path, checkpoint: &Path) -> CliResult<Checkpoint> {
    let raw = load_data(data, config)?;
    let (processed, stats) = fit_preprocess(&raw)?;
    let output = fit(&processed, &config.train)?;

    let mut trace = String::from("epoch,elbo,reconstruction,survival,clustering,prior,entropy\n");
    for r in &output.trace {
        let t = &r.terms;
        writeln!(
            trace,
            "{},{},{},{},{},{},{}",
            r.epoch,
            t.total(),
            t.reconstruction,
            t.survival,
            t.clustering,
            t.prior,
            t.entropy
        )
        .unwrap();
    }

    let ckpt = Checkpoint {
        config: config.clone(),
        params: output.params,
        stats,
    };
    ckpt.save(checkpoint)?;
    write_file(&trace_path(checkpoint), &trace)?;
    Ok(ckpt)
}

/// Writes one row per input row: `row_id, cluster, cluster_no_time,
/// p_0..p_{K-1}, t_hat, z_0..z_{J-1}`. `cluster` and the `p_c` columns use the
/// observed time and event; `cluster_no_time` and `t_hat` never do.
pub fn predict(checkpoint: &Checkpoint, data: &Path, out: &Path) -> CliResult<()> {
    let mut config = checkpoint.config.clone();
    config.feature_kind = Some(checkpoint.stats.feature_kind);
    let raw = load_data(data, &config)?;
    let expected = checkpoint.params.input_dim();
    if raw.num_features() != expected {
        return Err(CliError::new(
            "shape",
            format!("{} has {} feature columns, the model expects D = {expected}", data.display(), raw.num_features()),
        ));
    }
    let ds = preprocess(&raw, &checkpoint.stats)?;
    let pred = model_predict(&checkpoint.params, ds.features(), Some((ds.times(), ds.events())))?;
    let no_time = pred.labels_no_time();
    let k = pred.posterior.probs().cols();
    let j = pred.latent.cols();

    let file = std::fs::File::create(out).map_err(io_at(out))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let mut header = vec!["row_id".to_string(), "cluster".into(), "cluster_no_time".into()];
    header.extend((0..k).map(|c| format!("p_{c}")));
    header.push("t_hat".into());
    header.extend((0..j).map(|d| format!("z_{d}")));
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for i in 0..ds.len() {
        record.clear();
        record.push(i.to_string());
        record.push(pred.labels[i].to_string());
        record.push(no_time[i].to_string());
        record.extend(pred.posterior.probs().row(i).iter().map(|p| p.to_string()));
        record.push(checkpoint.stats.unscale_time(pred.median_time[i]).to_string());
        record.extend(pred.latent.row(i).iter().map(|z| z.to_string()));
        w.write_record(&record)?;
    }
    w.flush().map_err(io_at(out))?;
    Ok(())
}

/// The columns of a predictions file that evaluation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub t_hat: Vec<f64>,
    pub cluster: Option<Vec<usize>>,
    pub cluster_no_time: Option<Vec<usize>>,
    /// Number of `p_c` columns.
    pub num_clusters: usize,
}

fn bad_predictions(path: &Path, message: impl std::fmt::Display) -> CliError {
    CliError::new("format", format!("{}: {message}", path.display()))
}

pub fn read_predictions(path: &Path) -> CliResult<Predictions> {
    let file = std::fs::File::open(path).map_err(io_at(path))?;
    let mut rdr = csv::Reader::from_reader(std::io::BufReader::new(file));
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let id_col = col("row_id").ok_or_else(|| bad_predictions(path, "missing column \"row_id\""))?;
    let t_col = col("t_hat").ok_or_else(|| bad_predictions(path, "missing column \"t_hat\""))?;
    let c_col = col("cluster");
    let nt_col = col("cluster_no_time");
    let num_clusters = headers.iter().filter(|h| h.trim().starts_with("p_")).count();

    let mut out = Predictions {
        t_hat: Vec::new(),
        cluster: c_col.map(|_| Vec::new()),
        cluster_no_time: nt_col.map(|_| Vec::new()),
        num_clusters,
    };
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let cell = |c: usize| record.get(c).map(str::trim).ok_or_else(|| bad_predictions(path, format!("row {row}: missing cell")));
        let id = cell(id_col)?;
        if id.parse::<usize>().ok() != Some(i) {
            return Err(CliError::new(
                "alignment",
                format!("{}: row {row} has id {id:?}, expected {i}", path.display()),
            ));
        }
        let t = cell(t_col)?;
        out.t_hat
            .push(t.parse().map_err(|_| bad_predictions(path, format!("row {row}: t_hat is not a number: {t:?}")))?);
        for (c, dst) in [(c_col, &mut out.cluster), (nt_col, &mut out.cluster_no_time)] {
            if let (Some(c), Some(dst)) = (c, dst.as_mut()) {
                let s = cell(c)?;
                dst.push(s.parse().map_err(|_| bad_predictions(path, format!("row {row}: bad cluster {s:?}")))?);
            }
        }
    }
    Ok(out)
}

fn aligned(pred: &Predictions, data: &SurvivalDataset, predictions: &Path, data_path: &Path) -> CliResult<()> {
    if pred.t_hat.len() != data.len() {
        return Err(CliError::new(
            "alignment",
            format!(
                "{} has {} rows but {} has {}",
                predictions.display(),
                pred.t_hat.len(),
                data_path.display(),
                data.len()
            ),
        ));
    }
    Ok(())
}

/// Metrics of a predictions file against the data it was made from, as
/// `key=value` lines. Clustering metrics need a `cluster` column in both.
pub fn evaluate(predictions: &Path, data: &Path) -> CliResult<String> {
    let pred = read_predictions(predictions)?;
    let ds = load_data(data, &RunConfig::default())?;
    aligned(&pred, &ds, predictions, data)?;
    let clusters = match (ds.labels(), pred.cluster.as_deref()) {
        (Some(truth), Some(p)) => Some((truth, p)),
        _ => None,
    };
    let report = MetricsReport::compute(ds.times(), ds.events(), &pred.t_hat, clusters)?;
    let mut text = report.to_string();
    if let (Some(truth), Some(p)) = (ds.labels(), pred.cluster_no_time.as_deref()) {
        writeln!(text, "acc_no_time={}", clustering_accuracy(truth, p)?).unwrap();
    }
    Ok(text)
}

/// Per-cluster Kaplan-Meier curves as `cluster,time,survival` rows, one row
/// per distinct event time. Clusters without rows are left out.
pub fn km_export(predictions: &Path, data: &Path) -> CliResult<String> {
    let pred = read_predictions(predictions)?;
    let ds = load_data(data, &RunConfig::default())?;
    aligned(&pred, &ds, predictions, data)?;
    let clusters = pred
        .cluster
        .ok_or_else(|| bad_predictions(predictions, "missing column \"cluster\""))?;
    let k = clusters.iter().max().map_or(0, |m| m + 1).max(pred.num_clusters);
    let mut text = String::from("cluster,time,survival\n");
    for c in 0..k {
        let members: Vec<usize> = (0..ds.len()).filter(|&i| clusters[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        let t: Vec<f64> = members.iter().map(|&i| ds.times()[i]).collect();
        let e: Vec<bool> = members.iter().map(|&i| ds.events()[i]).collect();
        let km = kaplan_meier(&t, &e)?;
        for (time, s) in km.times.iter().zip(&km.survival) {
            writeln!(text, "{c},{time},{s}").unwrap();
        }
    }
    Ok(text)
}

/// Writes `text` to `out`, or to standard output when `out` is `None`.
pub fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()?;
            Ok(())
        }
    }
}
