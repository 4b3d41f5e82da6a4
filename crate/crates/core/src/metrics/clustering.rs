use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Minimum-cost perfect matching on a square matrix; `result[row] = col`.
/// Shortest augmenting paths with potentials, `O(n^3)`.
pub fn hungarian(cost: &Matrix) -> Result<Vec<usize>> {
    let n = cost.rows();
    if cost.cols() != n {
        return Err(Error::shape("hungarian", "square matrix", format!("{}x{}", cost.rows(), cost.cols())));
    }
    if !cost.all_finite() {
        return Err(Error::non_finite("hungarian cost matrix"));
    }
    // 1-based arrays with a virtual column 0.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost.get(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if row_of[j] > 0 {
            assignment[row_of[j] - 1] = j - 1;
        }
    }
    Ok(assignment)
}

/// Relabels to `0..k` in order of first appearance.
fn dense(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut ids = BTreeMap::new();
    for &l in labels {
        let next = ids.len();
        ids.entry(l).or_insert(next);
    }
    (labels.iter().map(|l| ids[l]).collect(), ids.len())
}

/// Contingency table of two labelings and its margins.
pub struct Contingency {
    pub table: Vec<Vec<u64>>,
    pub rows: Vec<u64>,
    pub cols: Vec<u64>,
    pub n: u64,
}

pub fn contingency(truth: &[usize], pred: &[usize]) -> Result<Contingency> {
    if truth.len() != pred.len() {
        return Err(Error::shape("contingency", truth.len(), pred.len()));
    }
    if truth.is_empty() {
        return Err(Error::Domain("clustering metrics need at least one point".into()));
    }
    let (a, ka) = dense(truth);
    let (b, kb) = dense(pred);
    let mut table = vec![vec![0u64; kb]; ka];
    for (i, j) in a.iter().zip(&b) {
        table[*i][*j] += 1;
    }
    let rows = table.iter().map(|r| r.iter().sum()).collect();
    let cols = (0..kb).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    Ok(Contingency {
        table,
        rows,
        cols,
        n: truth.len() as u64,
    })
}

/// Best matched fraction over one-to-one label mappings.
pub fn clustering_accuracy(truth: &[usize], pred: &[usize]) -> Result<f64> {
    let c = contingency(truth, pred)?;
    let m = c.rows.len().max(c.cols.len());
    let cost = Matrix::from_fn(m, m, |i, j| {
        -(c.table.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0) as f64)
    });
    let assignment = hungarian(&cost)?;
    let matched: u64 = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| c.table.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0))
        .sum();
    Ok(matched as f64 / c.n as f64)
}

fn entropy(counts: &[u64], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// `I(U; V) / sqrt(H(U) H(V))` with natural logs; 0 if either labeling is
/// constant.
pub fn nmi(truth: &[usize], pred: &[usize]) -> Result<f64> {
    let c = contingency(truth, pred)?;
    let n = c.n as f64;
    let hu = entropy(&c.rows, n);
    let hv = entropy(&c.cols, n);
    if hu == 0.0 || hv == 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (i, row) in c.table.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij > 0 {
                let nij = nij as f64;
                mi += nij / n * (n * nij / (c.rows[i] as f64 * c.cols[j] as f64)).ln();
            }
        }
    }
    Ok((mi / (hu * hv).sqrt()).clamp(0.0, 1.0))
}

fn pairs(x: u64) -> f64 {
    (x as f64) * (x as f64 - 1.0) / 2.0
}

/// Pair-counting Rand index adjusted for chance; 1 when the chance-corrected
/// denominator vanishes.
pub fn ari(truth: &[usize], pred: &[usize]) -> Result<f64> {
    if truth.len() < 2 {
        return Err(Error::Domain("ari needs at least two points".into()));
    }
    let c = contingency(truth, pred)?;
    let index: f64 = c.table.iter().flatten().map(|&x| pairs(x)).sum();
    let sa: f64 = c.rows.iter().map(|&x| pairs(x)).sum();
    let sb: f64 = c.cols.iter().map(|&x| pairs(x)).sum();
    let expected = sa * sb / pairs(c.n);
    let max = 0.5 * (sa + sb);
    let den = max - expected;
    if den == 0.0 {
        return Ok(1.0);
    }
    Ok((index - expected) / den)
}
