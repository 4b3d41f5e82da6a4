use std::io::{Read, Write};
use std::path::Path;

use super::dataset::{FeatureKind, SurvivalDataset};
use crate::error::{Error, Location, Result};
use crate::nn::Matrix;

fn header_error(message: impl Into<String>) -> Error {
    Error::Format {
        location: Location::Header,
        message: message.into(),
    }
}

fn row_error(row: usize, message: impl Into<String>) -> Error {
    Error::Format {
        location: Location::Row(row),
        message: message.into(),
    }
}

struct Layout {
    features: Vec<usize>,
    time: usize,
    event: usize,
    cluster: Option<usize>,
}

fn layout(headers: &csv::StringRecord) -> Result<Layout> {
    let mut features: Vec<(usize, usize)> = Vec::new();
    let (mut time, mut event, mut cluster) = (None, None, None);
    for (col, name) in headers.iter().enumerate() {
        let name = name.trim();
        if let Some(idx) = name.strip_prefix("feature_") {
            let idx: usize = idx
                .parse()
                .map_err(|_| header_error(format!("bad feature column name {name:?}")))?;
            features.push((idx, col));
        } else {
            let slot = match name {
                "time" => &mut time,
                "event" => &mut event,
                "cluster" => &mut cluster,
                other => return Err(header_error(format!("unexpected column {other:?}"))),
            };
            if slot.replace(col).is_some() {
                return Err(header_error(format!("duplicate column {name:?}")));
            }
        }
    }
    features.sort();
    for (expected, (idx, _)) in features.iter().enumerate() {
        if *idx != expected {
            return Err(header_error(format!("feature columns must be feature_0..feature_{}; missing feature_{expected}", features.len() - 1)));
        }
    }
    Ok(Layout {
        features: features.into_iter().map(|(_, c)| c).collect(),
        time: time.ok_or_else(|| header_error("missing column \"time\""))?,
        event: event.ok_or_else(|| header_error("missing column \"event\""))?,
        cluster,
    })
}

/// Reads `feature_0..feature_{D-1}, time, event[, cluster]` from any reader.
pub fn read_csv(reader: impl Read, kind: FeatureKind) -> Result<SurvivalDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let layout = layout(rdr.headers()?)?;
    let d = layout.features.len();
    let mut data = Vec::new();
    let mut times = Vec::new();
    let mut events = Vec::new();
    let mut labels = layout.cluster.map(|_| Vec::new());
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let cell = |col: usize| -> Result<&str> {
            record.get(col).map(str::trim).ok_or_else(|| row_error(row, format!("missing cell in column {col}")))
        };
        let number = |col: usize, name: &str| -> Result<f64> {
            let s = cell(col)?;
            s.parse::<f64>()
                .map_err(|_| row_error(row, format!("{name} is not a number: {s:?}")))
        };
        for (j, &col) in layout.features.iter().enumerate() {
            let v = number(col, &format!("feature_{j}"))?;
            if !v.is_finite() {
                return Err(row_error(row, format!("feature_{j} is not finite")));
            }
            data.push(v);
        }
        let t = number(layout.time, "time")?;
        if !(t > 0.0) || !t.is_finite() {
            return Err(row_error(row, format!("time must be positive, got {t}")));
        }
        times.push(t);
        events.push(match cell(layout.event)? {
            "1" => true,
            "0" => false,
            other => return Err(row_error(row, format!("event must be 0 or 1, got {other:?}"))),
        });
        if let (Some(col), Some(l)) = (layout.cluster, labels.as_mut()) {
            let s = cell(col)?;
            l.push(s.parse::<usize>().map_err(|_| row_error(row, format!("cluster is not a label: {s:?}")))?);
        }
    }
    let n = times.len();
    SurvivalDataset::new(Matrix::from_vec(n, d, data)?, times, events, labels, kind)
}

pub fn load_csv(path: impl AsRef<Path>, kind: FeatureKind) -> Result<SurvivalDataset> {
    read_csv(std::fs::File::open(path)?, kind)
}

/// Writes with shortest round-trip decimal formatting, so reading back
/// reproduces every value exactly.
pub fn write_csv(dataset: &SurvivalDataset, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let d = dataset.num_features();
    let mut header: Vec<String> = (0..d).map(|j| format!("feature_{j}")).collect();
    header.push("time".into());
    header.push("event".into());
    if dataset.labels().is_some() {
        header.push("cluster".into());
    }
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for i in 0..dataset.len() {
        record.clear();
        record.extend(dataset.features().row(i).iter().map(|v| v.to_string()));
        record.push(dataset.times()[i].to_string());
        record.push(if dataset.events()[i] { "1".into() } else { "0".into() });
        if let Some(l) = dataset.labels() {
            record.push(l[i].to_string());
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(dataset: &SurvivalDataset, path: impl AsRef<Path>) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_csv(dataset, file)
}
