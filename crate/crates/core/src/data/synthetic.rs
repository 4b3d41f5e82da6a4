use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Open01, StandardNormal};

use super::dataset::{FeatureKind, SurvivalDataset};
use crate::dist::{softplus, WeibullSpec};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, orthonormal_columns};
use crate::nn::{Matrix, Trans};

/// Reading of the per-cluster covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceMode {
    /// The full random SPD matrix.
    Full,
    /// Only its diagonal.
    Diagonal,
}

/// Effective rank of [`LowRankMode::Profile`] weights.
pub const PROFILE_EFFECTIVE_RANK: f64 = 10.0;
/// Weight of the slowly decaying tail in [`LowRankMode::Profile`].
pub const PROFILE_TAIL_STRENGTH: f64 = 0.5;

/// How the decoder weight matrices are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowRankMode {
    /// Full rank with a bell-shaped singular-value profile plus a fat tail
    /// (see [`gen_low_rank_profile`]).
    Profile,
    /// Exact rank `ceil(min(m, n) / 5)` (see [`gen_low_rank`]).
    Factored,
}

impl fmt::Display for CovarianceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CovarianceMode::Full => "full",
            CovarianceMode::Diagonal => "diagonal",
        })
    }
}

impl FromStr for CovarianceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "full" => Ok(CovarianceMode::Full),
            "diagonal" => Ok(CovarianceMode::Diagonal),
            other => Err(Error::Config(format!("covariance must be full or diagonal, got {other:?}"))),
        }
    }
}

impl fmt::Display for LowRankMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LowRankMode::Profile => "profile",
            LowRankMode::Factored => "factored",
        })
    }
}

impl FromStr for LowRankMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "profile" => Ok(LowRankMode::Profile),
            "factored" => Ok(LowRankMode::Factored),
            other => Err(Error::Config(format!("low_rank must be profile or factored, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub num_clusters: usize,
    pub num_rows: usize,
    pub latent_dim: usize,
    pub input_dim: usize,
    pub weibull_shape: f64,
    pub p_cens: f64,
    pub hidden_width: usize,
    pub covariance: CovarianceMode,
    pub low_rank: LowRankMode,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    /// The published setting: K=3, N=60000, J=16, D=1000, k=1, 30% censoring.
    fn default() -> Self {
        SyntheticConfig {
            num_clusters: 3,
            num_rows: 60_000,
            latent_dim: 16,
            input_dim: 1000,
            weibull_shape: 1.0,
            p_cens: 0.3,
            hidden_width: 32,
            covariance: CovarianceMode::Full,
            low_rank: LowRankMode::Profile,
            seed: 42,
        }
    }
}

impl SyntheticConfig {
    /// N=5000 and D=100, otherwise the defaults.
    pub fn desk_scale(seed: u64) -> Self {
        SyntheticConfig {
            num_rows: 5000,
            input_dim: 100,
            seed,
            ..SyntheticConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("num_clusters", self.num_clusters),
            ("num_rows", self.num_rows),
            ("latent_dim", self.latent_dim),
            ("input_dim", self.input_dim),
            ("hidden_width", self.hidden_width),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !(self.weibull_shape > 0.0 && self.weibull_shape.is_finite()) {
            return Err(Error::Config(format!("weibull_shape must be positive, got {}", self.weibull_shape)));
        }
        if !(0.0..1.0).contains(&self.p_cens) {
            return Err(Error::Config(format!("p_cens must lie in [0, 1), got {}", self.p_cens)));
        }
        Ok(())
    }
}

/// Generating quantities kept for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTruth {
    /// `N x J` latent draws.
    pub latent: Matrix,
    /// `K x J`.
    pub means: Matrix,
    pub covariances: Vec<Matrix>,
    /// `K x (J + 1)`, bias last.
    pub betas: Matrix,
    /// Weibull scale of each row.
    pub scales: Vec<f64>,
    /// Uncensored event times `u`.
    pub event_times: Vec<f64>,
}

/// `A^T A / d + 0.1 I` with standard-normal `A`; eigenvalues are at least 0.1.
pub fn gen_spd(d: usize, seed: u64) -> Matrix {
    spd_from(d, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn spd_from<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Matrix {
    let a = Matrix::from_fn(d, d, |_, _| StandardNormal.sample(rng));
    let g = a.matmul(Trans::Yes, &a, Trans::No).expect("square");
    let inv = 1.0 / d as f64;
    Matrix::from_fn(d, d, |i, j| {
        let sym = 0.5 * (g.get(i, j) + g.get(j, i)) * inv;
        if i == j {
            sym + 0.1
        } else {
            sym
        }
    })
}

/// `A B / sqrt(r)` with standard-normal `A: m x r`, `B: r x n` and
/// `r = ceil(min(m, n) / 5)`.
pub fn gen_low_rank(m: usize, n: usize, seed: u64) -> Matrix {
    low_rank_from(m, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn low_rank_dim(m: usize, n: usize) -> usize {
    m.min(n).div_ceil(5)
}

/// `U diag(s) V^T` with Haar-like orthonormal `U: m x q`, `V: n x q`,
/// `q = min(m, n)` and `s_i = (1 - tail) exp(-(i / r)^2) + tail exp(-0.1 i / r)`.
pub fn gen_low_rank_profile(m: usize, n: usize, effective_rank: f64, tail_strength: f64, seed: u64) -> Matrix {
    profile_from(m, n, effective_rank, tail_strength, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn profile_from<R: Rng + ?Sized>(m: usize, n: usize, effective_rank: f64, tail: f64, rng: &mut R) -> Matrix {
    let q = m.min(n);
    let gaussian_basis = |rows: usize, rng: &mut R| loop {
        let a = Matrix::from_fn(rows, q, |_, _| StandardNormal.sample(rng));
        if let Ok(basis) = orthonormal_columns(&a) {
            break basis;
        }
    };
    let u = gaussian_basis(m, rng);
    let v = gaussian_basis(n, rng);
    let s: Vec<f64> = (0..q)
        .map(|i| {
            let x = i as f64 / effective_rank;
            (1.0 - tail) * (-x * x).exp() + tail * (-0.1 * x).exp()
        })
        .collect();
    Matrix::from_fn(m, n, |i, j| (0..q).map(|k| u.get(i, k) * s[k] * v.get(j, k)).sum())
}

fn low_rank_from<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Matrix {
    let r = low_rank_dim(m, n);
    let a = Matrix::from_fn(m, r, |_, _| StandardNormal.sample(rng));
    let b = Matrix::from_fn(r, n, |_, _| StandardNormal.sample(rng));
    let w = a.matmul(Trans::No, &b, Trans::No).expect("inner dims agree");
    w.map(|v| v / (r as f64).sqrt())
}

/// Mixture-of-Weibull-regressions data with a random relu decoder.
pub fn gen_synthetic(config: &SyntheticConfig) -> Result<(SurvivalDataset, SyntheticTruth)> {
    config.validate()?;
    let SyntheticConfig {
        num_clusters: k,
        num_rows: n,
        latent_dim: j,
        input_dim: d,
        hidden_width: h,
        ..
    } = *config;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    let means = Matrix::from_fn(k, j, |_, _| rng.random_range(-0.5..0.5));
    let mut covariances = Vec::with_capacity(k);
    let mut factors = Vec::with_capacity(k);
    for _ in 0..k {
        let s = spd_from(j, &mut rng);
        let s = match config.covariance {
            CovarianceMode::Full => s,
            CovarianceMode::Diagonal => Matrix::from_fn(j, j, |a, b| if a == b { s.get(a, a) } else { 0.0 }),
        };
        factors.push(cholesky(&s)?);
        covariances.push(s);
    }
    let mut latent = Matrix::zeros(n, j);
    let mut noise = vec![0.0; j];
    for (i, &c) in labels.iter().enumerate() {
        for v in noise.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        let l = &factors[c];
        let row = latent.row_mut(i);
        for a in 0..j {
            let mut acc = means.get(c, a);
            for b in 0..=a {
                acc += l.get(a, b) * noise[b];
            }
            row[a] = acc;
        }
    }

    // Weights are stored input x output so rows of `latent` multiply directly.
    let mut weights = |m: usize, n: usize| match config.low_rank {
        LowRankMode::Profile => profile_from(m, n, PROFILE_EFFECTIVE_RANK, PROFILE_TAIL_STRENGTH, &mut rng),
        LowRankMode::Factored => low_rank_from(m, n, &mut rng),
    };
    let w0 = weights(j, h);
    let w1 = weights(h, h);
    let w2 = weights(h, d);
    let b0: Vec<f64> = (0..h).map(|_| StandardNormal.sample(&mut rng)).collect();
    let b1: Vec<f64> = (0..h).map(|_| StandardNormal.sample(&mut rng)).collect();
    let b2: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    let affine = |x: &Matrix, w: &Matrix, b: &[f64], relu: bool| -> Matrix {
        let mut out = x.matmul(Trans::No, w, Trans::No).expect("widths agree");
        for r in 0..out.rows() {
            for (v, bias) in out.row_mut(r).iter_mut().zip(b) {
                *v += bias;
                if relu {
                    *v = v.max(0.0);
                }
            }
        }
        out
    };
    let hidden = affine(&latent, &w0, &b0, true);
    let hidden = affine(&hidden, &w1, &b1, true);
    let features = affine(&hidden, &w2, &b2, false);

    let betas = Matrix::from_fn(k, j + 1, |_, _| rng.random_range(-10.0..10.0));
    let mut scales = Vec::with_capacity(n);
    let mut event_times = Vec::with_capacity(n);
    let mut times = Vec::with_capacity(n);
    let mut events = Vec::with_capacity(n);
    for (i, &c) in labels.iter().enumerate() {
        let beta = betas.row(c);
        let z = latent.row(i);
        let pre = beta[j] + z.iter().zip(&beta[..j]).map(|(a, b)| a * b).sum::<f64>();
        let scale = softplus(pre).max(f64::MIN_POSITIVE);
        let u = WeibullSpec::new(scale, config.weibull_shape)?.sample(&mut rng).max(f64::MIN_POSITIVE);
        let event = rng.random::<f64>() < 1.0 - config.p_cens;
        let t = if event {
            u
        } else {
            let frac: f64 = Open01.sample(&mut rng);
            (u * frac).max(f64::MIN_POSITIVE)
        };
        scales.push(scale);
        event_times.push(u);
        times.push(t);
        events.push(event);
    }

    let dataset = SurvivalDataset::new(features, times, events, Some(labels), FeatureKind::Real)?;
    Ok((
        dataset,
        SyntheticTruth {
            latent,
            means,
            covariances,
            betas,
            scales,
            event_times,
        },
    ))
}
