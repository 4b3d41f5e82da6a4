use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::SurvivalDataset;
use crate::error::{Error, Result};

/// Random `(train, test)` split with `round(N * test_fraction)` test rows.
/// With `stratify_by_time` the rows are binned into time quartiles and each
/// bin is split separately.
pub fn train_test_split(
    dataset: &SurvivalDataset,
    test_fraction: f64,
    seed: u64,
    stratify_by_time: bool,
) -> Result<(SurvivalDataset, SurvivalDataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!("test fraction must lie in (0, 1), got {test_fraction}")));
    }
    let n = dataset.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    if stratify_by_time {
        let mut by_time: Vec<usize> = (0..n).collect();
        by_time.sort_by(|&a, &b| dataset.times()[a].total_cmp(&dataset.times()[b]).then(a.cmp(&b)));
        for q in 0..4 {
            let mut bin: Vec<usize> = by_time[q * n / 4..(q + 1) * n / 4].to_vec();
            bin.shuffle(&mut rng);
            let k = (bin.len() as f64 * test_fraction).round() as usize;
            test.extend_from_slice(&bin[..k]);
            train.extend_from_slice(&bin[k..]);
        }
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let k = (n as f64 * test_fraction).round() as usize;
        test.extend_from_slice(&order[..k]);
        train.extend_from_slice(&order[k..]);
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::Config(format!(
            "split of {n} rows at fraction {test_fraction} leaves {} train and {} test rows",
            train.len(),
            test.len()
        )));
    }
    Ok((dataset.subset(&train), dataset.subset(&test)))
}
