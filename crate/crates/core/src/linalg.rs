//! Small dense factorisations used by the generators and their tests.

use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Lower-triangular `L` with `L L^T = a`.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::shape("cholesky", "square matrix", format!("{}x{}", a.rows(), a.cols())));
    }
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::Numerical(format!("matrix is not positive definite (pivot {i} is {s})")));
                }
                l.set(i, i, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// Orthonormal basis of the column space of a full-column-rank `a`, by
/// modified Gram-Schmidt with one reorthogonalisation pass.
pub fn orthonormal_columns(a: &Matrix) -> Result<Matrix> {
    let (m, n) = a.shape();
    if n > m {
        return Err(Error::shape("orthonormal_columns", "rows >= cols", format!("{m}x{n}")));
    }
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| a.get(i, j)).collect()).collect();
    for j in 0..n {
        let (done, rest) = cols.split_at_mut(j);
        let v = &mut rest[0];
        for _ in 0..2 {
            for q in done.iter() {
                let dot: f64 = q.iter().zip(v.iter()).map(|(x, y)| x * y).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= dot * qi;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 1e-12) {
            return Err(Error::Numerical(format!("column {j} is linearly dependent on the previous ones")));
        }
        v.iter_mut().for_each(|x| *x /= norm);
    }
    Ok(Matrix::from_fn(m, n, |i, j| cols[j][i]))
}

/// Rank by Gaussian elimination with partial pivoting; pivots at or below
/// `tol` times the largest absolute entry count as zero.
pub fn matrix_rank(a: &Matrix, tol: f64) -> usize {
    let (rows, cols) = a.shape();
    let mut m = a.clone();
    let scale = a.as_slice().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let pivot = (rank..rows).max_by(|&x, &y| m.get(x, c).abs().total_cmp(&m.get(y, c).abs())).expect("nonempty");
        if m.get(pivot, c).abs() <= tol * scale {
            continue;
        }
        for k in 0..cols {
            let tmp = m.get(rank, k);
            m.set(rank, k, m.get(pivot, k));
            m.set(pivot, k, tmp);
        }
        for r in rank + 1..rows {
            let f = m.get(r, c) / m.get(rank, c);
            for k in c..cols {
                m.set(r, k, m.get(r, k) - f * m.get(rank, k));
            }
        }
        rank += 1;
    }
    rank
}
