//! Survival and clustering evaluation.

mod clustering;
mod survival;

use std::fmt;

pub use clustering::{ari, clustering_accuracy, contingency, hungarian, nmi, Contingency};
pub use survival::{calibration_slope, concordance_index, kaplan_meier, rae_c, rae_nc, KaplanMeier};

use crate::error::Result;

/// All metrics for one prediction set; a field is `None` when its inputs are
/// missing or degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricsReport {
    pub ci: Option<f64>,
    pub rae_nc: Option<f64>,
    pub rae_c: Option<f64>,
    pub cal: Option<f64>,
    pub acc: Option<f64>,
    pub nmi: Option<f64>,
    pub ari: Option<f64>,
}

impl MetricsReport {
    /// Survival metrics from predicted times (risk is their negation) plus
    /// clustering metrics when true labels are supplied.
    pub fn compute(
        times: &[f64],
        events: &[bool],
        predicted: &[f64],
        clusters: Option<(&[usize], &[usize])>,
    ) -> Result<Self> {
        let risk: Vec<f64> = predicted.iter().map(|p| -p).collect();
        let mut report = MetricsReport {
            ci: concordance_index(times, events, &risk)?,
            rae_nc: rae_nc(times, predicted, events)?,
            rae_c: rae_c(times, predicted, events)?,
            cal: calibration_slope(times, predicted, events)?,
            ..MetricsReport::default()
        };
        if let Some((truth, pred)) = clusters {
            report.acc = Some(clustering_accuracy(truth, pred)?);
            report.nmi = Some(nmi(truth, pred)?);
            report.ari = if truth.len() >= 2 { Some(ari(truth, pred)?) } else { None };
        }
        Ok(report)
    }

    pub fn entries(&self) -> [(&'static str, Option<f64>); 7] {
        [
            ("ci", self.ci),
            ("rae_nc", self.rae_nc),
            ("rae_c", self.rae_c),
            ("cal", self.cal),
            ("acc", self.acc),
            ("nmi", self.nmi),
            ("ari", self.ari),
        ]
    }
}

/// `key=value` lines for the metrics that are present.
impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.entries() {
            if let Some(v) = v {
                writeln!(f, "{k}={v}")?;
            }
        }
        Ok(())
    }
}
