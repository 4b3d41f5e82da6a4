use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::Matrix;

pub const DEFAULT_RESTARTS: usize = 10;
pub const MAX_ITERATIONS: usize = 300;

/// Result of Lloyd's algorithm: the best restart plus the inertia of every
/// restart.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansModel {
    pub centers: Matrix,
    /// Sum of squared distances to the assigned centre.
    pub inertia: f64,
    pub restart_inertias: Vec<f64>,
}

impl KMeansModel {
    /// Nearest-centre labels; ties go to the lowest index.
    pub fn assign(&self, x: &Matrix) -> Result<Vec<usize>> {
        kmeans_assign(self, x)
    }
}

/// Best of `restarts` k-means++-seeded Lloyd runs by inertia. Restart `r`
/// draws from stream `r` of a ChaCha8 generator seeded with `seed`.
pub fn kmeans_fit(x: &Matrix, k: usize, restarts: usize, seed: u64) -> Result<KMeansModel> {
    let n = x.rows();
    if k == 0 || n < k {
        return Err(Error::Config(format!("k-means needs 1 <= K <= N, got K={k}, N={n}")));
    }
    if restarts == 0 {
        return Err(Error::Config("k-means needs at least one restart".into()));
    }
    if !x.all_finite() {
        return Err(Error::non_finite("k-means input"));
    }
    let mut best: Option<(Matrix, f64)> = None;
    let mut inertias = Vec::with_capacity(restarts);
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let (centers, inertia) = lloyd(x, plus_plus(x, k, &mut rng));
        inertias.push(inertia);
        if best.as_ref().is_none_or(|(_, b)| inertia < *b) {
            best = Some((centers, inertia));
        }
    }
    let (centers, inertia) = best.expect("at least one restart");
    Ok(KMeansModel {
        centers,
        inertia,
        restart_inertias: inertias,
    })
}

pub fn kmeans_assign(model: &KMeansModel, x: &Matrix) -> Result<Vec<usize>> {
    if x.cols() != model.centers.cols() {
        return Err(Error::shape("kmeans_assign", model.centers.cols(), x.cols()));
    }
    Ok(x.iter_rows().map(|row| nearest(row, &model.centers).0).collect())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(row: &[f64], centers: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter_rows().enumerate() {
        let d = sq_dist(row, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus<R: Rng + ?Sized>(x: &Matrix, k: usize, rng: &mut R) -> Matrix {
    let n = x.rows();
    let mut centers = Matrix::zeros(k, x.cols());
    let first = rng.random_range(0..n);
    centers.row_mut(0).copy_from_slice(x.row(first));
    let mut d2: Vec<f64> = x.iter_rows().map(|row| sq_dist(row, centers.row(0))).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, d) in d2.iter().enumerate() {
                acc += d;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.row_mut(c).copy_from_slice(x.row(pick));
        for (d, row) in d2.iter_mut().zip(x.iter_rows()) {
            *d = d.min(sq_dist(row, centers.row(c)));
        }
    }
    centers
}

fn lloyd(x: &Matrix, mut centers: Matrix) -> (Matrix, f64) {
    let (n, d) = x.shape();
    let k = centers.rows();
    let mut labels = vec![usize::MAX; n];
    let mut dists = vec![0.0; n];
    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        for (i, row) in x.iter_rows().enumerate() {
            let (c, dist) = nearest(row, &centers);
            dists[i] = dist;
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        let mut counts = vec![0usize; k];
        for &c in &labels {
            counts[c] += 1;
        }
        // Re-seat empty clusters on the points farthest from their centres.
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .filter(|&i| counts[labels[i]] > 1)
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)));
                if let Some(i) = far {
                    counts[labels[i]] -= 1;
                    labels[i] = c;
                    counts[c] = 1;
                    dists[i] = 0.0;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
        let mut sums = Matrix::zeros(k, d);
        for (row, &c) in x.iter_rows().zip(&labels) {
            for (s, v) in sums.row_mut(c).iter_mut().zip(row) {
                *s += v;
            }
        }
        for c in 0..k {
            let inv = 1.0 / counts[c] as f64;
            for (dst, s) in centers.row_mut(c).iter_mut().zip(sums.row(c)) {
                *dst = s * inv;
            }
        }
    }
    let inertia = x
        .iter_rows()
        .zip(&labels)
        .map(|(row, &c)| sq_dist(row, centers.row(c)))
        .sum();
    (centers, inertia)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cluster_is_the_mean() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [3.0, -4.0], [5.0, 0.5]]).unwrap();
        let m = kmeans_fit(&x, 1, 3, 0).unwrap();
        assert_eq!(m.centers.row(0), &[3.0, (2.0 - 4.0 + 0.5) / 3.0]);
    }

    #[test]
    fn too_few_points() {
        let x = Matrix::zeros(2, 1);
        assert_eq!(kmeans_fit(&x, 3, 1, 0).unwrap_err().kind(), "config");
    }

    #[test]
    fn duplicate_points_do_not_leave_empty_clusters() {
        let x = Matrix::from_rows(&[[0.0], [0.0], [0.0], [1.0]]).unwrap();
        let m = kmeans_fit(&x, 3, 2, 1).unwrap();
        assert!(m.centers.all_finite());
        assert!(m.inertia >= 0.0);
    }
}
