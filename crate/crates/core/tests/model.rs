use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vadesc_core::data::{fit_preprocess, gen_synthetic, SyntheticConfig};
use vadesc_core::dist::{log_gaussian_diag, log_weibull_censored, softplus, softplus_inverse, DiagGaussianSpec, WeibullSpec};
use vadesc_core::metrics::clustering_accuracy;
use vadesc_core::model::{
    cluster_posterior, cluster_posterior_prior_only, elbo_gradient, elbo_terms_frozen, elbo_terms_with_noise,
    encode, fit_arrays, posterior_matrix, predict, pretrain_init, reparameterize, sample_noise, weibull_scale, Batch,
};
use vadesc_core::nn::{finite_diff_grad, Activation, DenseLayer, DenseNet, Matrix};
use vadesc_core::{ReconLoss, TrainConfig, VadescParams};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

fn small_config(j: usize, k: usize) -> TrainConfig {
    TrainConfig {
        latent_dim: j,
        num_clusters: k,
        hidden_layers: vec![4],
        ..TrainConfig::default()
    }
}

/// Random parameters with nontrivial mixture and survival heads.
fn random_params(d: usize, j: usize, k: usize, recon: ReconLoss, rng: &mut ChaCha8Rng) -> VadescParams {
    let config = TrainConfig {
        recon_loss: recon,
        ..small_config(j, k)
    };
    let mut p = VadescParams::init(d, &config, rng).unwrap();
    for v in p.log_vars.as_mut_slice() {
        *v = rng.random_range(-0.5..0.5);
    }
    for v in p.mixture_logits.iter_mut() {
        *v = rng.random_range(-1.0..1.0);
    }
    for v in p.betas.as_mut_slice() {
        *v = rng.random_range(-1.0..1.0);
    }
    p
}

/// Unnormalised log posterior evaluated with the public kernels.
fn scores(p: &VadescParams, z: &[f64], surv: Option<(f64, bool)>) -> Vec<f64> {
    let log_pi = p.log_mixture_weights();
    (0..p.num_components())
        .map(|c| {
            let var: Vec<f64> = p.log_vars.row(c).iter().map(|v| v.exp()).collect();
            let spec = DiagGaussianSpec::new(p.means.row(c).to_vec(), var).unwrap();
            let mut s = log_pi[c] + log_gaussian_diag(z, &spec).unwrap();
            if let Some((t, e)) = surv {
                let w = WeibullSpec::new(weibull_scale(z, &p.betas, c), p.shape).unwrap();
                s += log_weibull_censored(t, e, &w).unwrap();
            }
            s
        })
        .collect()
}

fn first_max(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

fn linear(weight: Matrix, activation: Activation) -> DenseNet {
    let bias = vec![0.0; weight.cols()];
    DenseNet::new(vec![DenseLayer {
        weight,
        bias,
        activation,
    }])
    .unwrap()
}

#[test]
fn weibull_scale_examples() {
    let zero = Matrix::zeros(1, 3);
    assert!((weibull_scale(&[0.4, -2.0], &zero, 0) - std::f64::consts::LN_2).abs() < 1e-15);
    let bias = Matrix::from_rows(&[[0.7, -0.2, 1.3]]).unwrap();
    assert_eq!(weibull_scale(&[0.0, 0.0], &bias, 0), softplus(1.3));
    let b = Matrix::from_rows(&[[0.0, 0.0, 0.0], [1.0, 1.0, 0.0]]).unwrap();
    let direct = (1.0 + 2.0f64.exp()).ln();
    assert!((weibull_scale(&[1.0, 1.0], &b, 1) - direct).abs() < 1e-15);
    assert!((direct - 2.126_928_011_042_972_5).abs() < 1e-15);
    let floor = Matrix::from_rows(&[[0.0, -1000.0]]).unwrap();
    assert_eq!(weibull_scale(&[0.0], &floor, 0), vadesc_core::model::SCALE_FLOOR);
}

#[test]
fn posterior_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut p = VadescParams::init(2, &small_config(2, 1), &mut rng).unwrap();
    assert_eq!(cluster_posterior(&p, &[0.3, 0.1], 0.5, true).unwrap(), vec![1.0]);
    assert_eq!(cluster_posterior_prior_only(&p, &[0.3, 0.1]).unwrap(), vec![1.0]);

    p = VadescParams::init(2, &small_config(2, 2), &mut rng).unwrap();
    p.means = Matrix::zeros(2, 2);
    p.betas = Matrix::from_rows(&[[0.0, 0.0, softplus_inverse(1.0)], [0.0, 0.0, softplus_inverse(2.0)]]).unwrap();
    let post = cluster_posterior(&p, &[0.3, -0.4], 1.0, true).unwrap();
    let a = (-1.0f64).exp();
    let b = 0.5 * (-0.5f64).exp();
    assert!((post[0] - a / (a + b)).abs() < 1e-12, "{post:?}");
    assert!((post[0] - 0.548_137).abs() < 1e-6);
    assert!((post[0] + post[1] - 1.0).abs() < 1e-15);

    p.betas = Matrix::from_rows(&[[0.2, 0.1, 0.3], [0.2, 0.1, 0.3]]).unwrap();
    let half = cluster_posterior(&p, &[0.5, 0.5], 0.7, false).unwrap();
    assert!(half.iter().all(|v| (v - 0.5).abs() < 1e-15), "{half:?}");

    let mut p = VadescParams::init(2, &small_config(1, 2), &mut rng).unwrap();
    p.means = Matrix::from_rows(&[[-1.0], [1.0]]).unwrap();
    p.log_vars = Matrix::zeros(2, 1);
    let post = cluster_posterior_prior_only(&p, &[0.5]).unwrap();
    let oracle = 1.0 / (1.0 + 1.0f64.exp());
    assert!((post[0] - oracle).abs() < 1e-12, "{post:?}");
    assert!((post[1] - 0.731_058_578_630_004_9).abs() < 1e-12);
    let half = cluster_posterior_prior_only(&p, &[0.0]).unwrap();
    assert!(half.iter().all(|v| (v - 0.5).abs() < 1e-15), "{half:?}");

    assert!(cluster_posterior(&p, &[0.5], 0.0, true).is_err());
    assert!(cluster_posterior_prior_only(&p, &[0.5, 1.0]).is_err());
    p.log_vars = Matrix::filled(2, 1, -800.0);
    let err = cluster_posterior_prior_only(&p, &[0.5]).unwrap_err();
    assert_eq!(err.kind(), "numerical");
}

#[test]
fn posterior_rows_sum_to_one_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for trial in 0..10_000 {
        let k = 1 + trial % 5;
        let j = 1 + (trial / 5) % 4;
        let mut p = random_params(3, j, k, ReconLoss::Mse, &mut rng);
        for v in p.means.as_mut_slice() {
            *v = rng.random_range(-3.0..3.0);
        }
        let z: Vec<f64> = (0..j).map(|_| rng.random_range(-5.0..5.0)).collect();
        let t = rng.random_range(1e-3..3.0);
        let post = if trial % 3 == 0 {
            cluster_posterior_prior_only(&p, &z).unwrap()
        } else {
            cluster_posterior(&p, &z, t, rng.random_bool(0.5)).unwrap()
        };
        assert!(post.iter().all(|v| *v >= 0.0));
        worst = worst.max((post.iter().sum::<f64>() - 1.0).abs());
    }
    assert!(worst <= 1e-9, "{worst}");
}

proptest! {
    #[test]
    fn posterior_matches_independent_scores(seed in any::<u64>(), k in 1usize..5, j in 1usize..4, event in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_params(3, j, k, ReconLoss::Mse, &mut rng);
        let z: Vec<f64> = (0..j).map(|_| rng.random_range(-2.0..2.0)).collect();
        let t = rng.random_range(0.01..2.0);
        let s = scores(&p, &z, Some((t, event)));
        let m = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = s.iter().map(|v| (v - m).exp()).sum();
        let post = cluster_posterior(&p, &z, t, event).unwrap();
        for (a, v) in post.iter().zip(&s) {
            prop_assert!((a - (v - m).exp() / total).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_survival_heads_give_the_prior_posterior(seed in any::<u64>(), k in 1usize..5, j in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = random_params(3, j, k, ReconLoss::Mse, &mut rng);
        let row: Vec<f64> = p.betas.row(0).to_vec();
        for c in 0..k {
            p.betas.row_mut(c).copy_from_slice(&row);
        }
        let z: Vec<f64> = (0..j).map(|_| rng.random_range(-2.0..2.0)).collect();
        let with_t = cluster_posterior(&p, &z, rng.random_range(0.01..2.0), rng.random_bool(0.5)).unwrap();
        let without = cluster_posterior_prior_only(&p, &z).unwrap();
        for (a, b) in with_t.iter().zip(&without) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn logit_shift_leaves_posteriors_unchanged(seed in any::<u64>(), shift in -50.0f64..50.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_params(3, 2, 3, ReconLoss::Mse, &mut rng);
        let mut q = p.clone();
        for v in q.mixture_logits.iter_mut() {
            *v += shift;
        }
        let z = Matrix::from_fn(5, 2, |_, _| rng.random_range(-2.0..2.0));
        let t: Vec<f64> = (0..5).map(|_| rng.random_range(0.01..2.0)).collect();
        let e = vec![true, false, true, false, true];
        for surv in [None, Some((t.as_slice(), e.as_slice()))] {
            let a = posterior_matrix(&p, &z, surv).unwrap();
            let b = posterior_matrix(&q, &z, surv).unwrap();
            for (x, y) in a.probs().as_slice().iter().zip(b.probs().as_slice()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn predict_argmax_is_invariant_to_monotone_maps(seed in any::<u64>(), a in 0.01f64..100.0, b in -100.0f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = random_params(3, 2, 4, ReconLoss::Mse, &mut rng);
        for v in p.means.as_mut_slice() {
            *v = rng.random_range(-1.0..1.0);
        }
        let x = Matrix::from_fn(6, 3, |_, _| rng.random_range(-1.0..1.0));
        let t: Vec<f64> = (0..6).map(|_| rng.random_range(0.01..2.0)).collect();
        let e: Vec<bool> = (0..6).map(|_| rng.random_bool(0.7)).collect();
        let pred = predict(&p, &x, Some((&t, &e))).unwrap();
        for i in 0..6 {
            let s = scores(&p, pred.latent.row(i), Some((t[i], e[i])));
            let maps: [&dyn Fn(f64) -> f64; 3] = [&|v| a * v + b, &|v| (v / 10.0).exp(), &|v| v * v * v];
            for f in maps {
                let mapped: Vec<f64> = s.iter().map(|v| f(*v)).collect();
                prop_assert_eq!(pred.labels[i], first_max(&mapped));
            }
            let s0 = scores(&p, pred.latent.row(i), None);
            prop_assert_eq!(pred.labels_no_time()[i], first_max(&s0));
        }
    }
}

/// With one component and no survival term, the clustering, prior and entropy
/// terms together are the negative KL from `q(z|x)` to the prior. The
/// log-density is quadratic in `z`, so antithetic unit noise makes the
/// two-sample estimate equal to its expectation.
#[test]
fn single_component_elbo_is_the_vae_bound() {
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (d, j, b) = (5, 3, 7);
        let mut p = random_params(d, j, 1, ReconLoss::Mse, &mut rng);
        for v in p.means.as_mut_slice() {
            *v = rng.random_range(-1.0..1.0);
        }
        let x = Matrix::from_fn(b, d, |_, _| rng.random_range(-1.0..1.0));
        let t: Vec<f64> = (0..b).map(|_| rng.random_range(0.1..1.0)).collect();
        let e = vec![true; b];
        let batch = Batch::new(&x, &t, &e).unwrap();
        let eps = Matrix::from_fn(2 * b, j, |r, _| if r < b { 1.0 } else { -1.0 });
        let terms = elbo_terms_with_noise(&p, &batch, &eps, 0.0).unwrap();
        assert_eq!(terms.survival, 0.0);

        let (mu, lv) = encode(&p, &x).unwrap();
        let mut kl = 0.0;
        for i in 0..b {
            for jj in 0..j {
                let (m1, lv1) = (p.means.get(0, jj), p.log_vars.get(0, jj));
                let (mq, lq) = (mu.get(i, jj), lv.get(i, jj));
                kl += 0.5 * (lv1 - lq + (lq.exp() + (mq - m1).powi(2)) / lv1.exp() - 1.0);
            }
        }
        kl /= b as f64;
        let z = reparameterize(&mu, &lv, &eps).unwrap();
        let xhat = p.decoder.predict(&z).unwrap();
        let mut recon = 0.0;
        for r in 0..2 * b {
            for (xi, ai) in x.row(r % b).iter().zip(xhat.row(r)) {
                recon -= 0.5 * ((xi - ai).powi(2) + LN_2PI);
            }
        }
        recon /= (2 * b) as f64;

        let neg_kl = terms.clustering + terms.prior + terms.entropy;
        assert!((neg_kl + kl).abs() < 1e-8, "seed {seed}: {neg_kl} vs {}", -kl);
        assert!((terms.reconstruction - recon).abs() < 1e-8);
        assert!((terms.total() - (recon - kl)).abs() < 1e-8);
    }
}

fn check_gradient(recon: ReconLoss, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = random_params(3, 2, 2, recon, &mut rng);
    let x = Matrix::from_fn(4, 3, |_, _| match recon {
        ReconLoss::Mse => rng.random_range(-1.0..1.0),
        ReconLoss::Bce => rng.random_range(0.0..1.0),
    });
    let t: Vec<f64> = (0..4).map(|_| rng.random_range(0.1..1.0)).collect();
    let e: Vec<bool> = (0..4).map(|_| rng.random_bool(0.7)).collect();
    let eps = sample_noise(4, 2, 1, &mut rng);
    let batch = Batch::new(&x, &t, &e).unwrap();
    let g = elbo_gradient(&p, &batch, &eps, 1.0, None).unwrap();
    let gamma = g.responsibilities;
    let numeric = finite_diff_grad(
        |v| {
            let mut q = p.clone();
            q.set_flat(v).unwrap();
            elbo_terms_frozen(&q, &batch, &eps, 1.0, &gamma).unwrap().total()
        },
        &p.to_flat(),
        1e-5,
    );
    for (i, (a, n)) in g.grads.to_flat().iter().zip(&numeric).enumerate() {
        let err = (a - n).abs() / a.abs().max(n.abs()).max(1e-3);
        assert!(err <= 1e-4, "{recon} seed {seed} coordinate {i}: analytic {a} numeric {n}");
    }
}

#[test]
fn elbo_gradient_matches_finite_differences() {
    for seed in 0..50 {
        check_gradient(ReconLoss::Mse, seed);
        check_gradient(ReconLoss::Bce, seed);
    }
}

#[test]
fn single_cluster_prediction() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = random_params(3, 2, 1, ReconLoss::Mse, &mut rng);
    let x = Matrix::from_fn(4, 3, |_, _| rng.random_range(-1.0..1.0));
    let pred = predict(&p, &x, None).unwrap();
    assert_eq!(pred.labels, vec![0; 4]);
    for i in 0..4 {
        let spec = WeibullSpec::new(weibull_scale(pred.latent.row(i), &p.betas, 0), p.shape).unwrap();
        assert!((pred.median_time[i] - spec.median()).abs() < 1e-12);
    }
    assert!(predict(&p, &Matrix::zeros(1, 4), None).is_err());
}

#[test]
fn symmetric_clusters_tie_to_the_lower_index() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut p = random_params(3, 2, 2, ReconLoss::Mse, &mut rng);
    p.means = Matrix::zeros(2, 2);
    p.log_vars = Matrix::zeros(2, 2);
    p.mixture_logits = vec![0.3, 0.3];
    let row = p.betas.row(0).to_vec();
    p.betas.row_mut(1).copy_from_slice(&row);
    let x = Matrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
    let pred = predict(&p, &x, Some((&[0.2, 0.5, 0.9], &[true, false, true]))).unwrap();
    assert_eq!(pred.labels, vec![0; 3]);
    for i in 0..3 {
        let row = pred.posterior.row(i);
        assert_eq!(row[0], row[1]);
        assert!((row[0] - 0.5).abs() < 1e-15);
    }
}

#[test]
fn prediction_uses_the_encoder_mean_and_ignores_time_for_medians() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = random_params(3, 2, 3, ReconLoss::Mse, &mut rng);
    let x = Matrix::from_fn(5, 3, |_, _| rng.random_range(-1.0..1.0));
    let t: Vec<f64> = (0..5).map(|_| rng.random_range(0.1..1.0)).collect();
    let e = vec![true; 5];
    let with = predict(&p, &x, Some((&t, &e))).unwrap();
    let without = predict(&p, &x, None).unwrap();
    assert_eq!(with.latent, encode(&p, &x).unwrap().0);
    assert_eq!(with.median_time, without.median_time);
    assert_eq!(with.posterior_no_time, without.posterior);
}

fn blobs(n: usize, d: usize, sep: f64, rng: &mut ChaCha8Rng) -> (Matrix, Vec<usize>) {
    let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let x = Matrix::from_fn(n, d, |i, _| {
        let centre = if labels[i] == 0 { -sep } else { sep };
        centre + rng.random_range(-0.5..0.5)
    });
    (x, labels)
}

#[test]
fn pretraining_recovers_blob_centres() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (x, labels) = blobs(400, 2, 3.0, &mut rng);
    let config = TrainConfig {
        latent_dim: 2,
        num_clusters: 2,
        hidden_layers: vec![],
        pretrain_epochs: 1,
        learning_rate: 1e-6,
        ..TrainConfig::default()
    };
    let mut p = VadescParams::init(2, &config, &mut rng).unwrap();
    let enc = Matrix::from_rows(&[[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]]).unwrap();
    p.encoder = linear(enc, Activation::Identity);
    p.decoder = linear(Matrix::identity(2), Activation::Identity);
    let (p, trace) = pretrain_init(p, &x, &config, &mut rng).unwrap();
    assert_eq!(trace.len(), 1);

    let mut centres = [[0.0; 2]; 2];
    for (i, l) in labels.iter().enumerate() {
        for jj in 0..2 {
            centres[*l][jj] += x.get(i, jj) / 200.0;
        }
    }
    for centre in centres {
        let best = (0..2)
            .map(|c| {
                let m = p.means.row(c);
                (m[0] - centre[0]).abs().max((m[1] - centre[1]).abs())
            })
            .fold(f64::INFINITY, f64::min);
        assert!(best < 0.1, "{centre:?} vs {:?}", p.means);
    }
    for w in p.mixture_weights() {
        assert!((w - 0.5).abs() < 0.05);
    }
}

#[test]
fn zero_epochs_return_the_initialisation() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (x, _) = blobs(20, 3, 1.0, &mut rng);
    let t = vec![0.5; 20];
    let e = vec![true; 20];
    let config = TrainConfig {
        epochs: 0,
        ..small_config(2, 3)
    };
    let out = fit_arrays(&x, &t, &e, &config).unwrap();
    assert!(out.trace.is_empty() && out.pretrain_trace.is_empty());
    let init = VadescParams::init(3, &config, &mut ChaCha8Rng::seed_from_u64(config.seed)).unwrap();
    assert_eq!(out.params, init);
    assert_eq!(out.params.mixture_weights(), vec![1.0 / 3.0; 3]);
}

#[test]
fn separable_blobs_are_clustered_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (x, labels) = blobs(400, 4, 4.0, &mut rng);
    let t: Vec<f64> = labels
        .iter()
        .map(|l| if *l == 0 { rng.random_range(0.05..0.3) } else { rng.random_range(0.6..1.0) })
        .collect();
    let e = vec![true; 400];
    let config = TrainConfig {
        latent_dim: 2,
        num_clusters: 2,
        hidden_layers: vec![16],
        batch_size: 50,
        epochs: 40,
        pretrain_epochs: 20,
        seed: 3,
        ..TrainConfig::default()
    };
    let out = fit_arrays(&x, &t, &e, &config).unwrap();
    let pred = predict(&out.params, &x, Some((&t, &e))).unwrap();
    assert_eq!(clustering_accuracy(&labels, &pred.labels).unwrap(), 1.0);
    assert_eq!(clustering_accuracy(&labels, &pred.labels_no_time()).unwrap(), 1.0);
}

#[test]
fn training_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (x, _) = blobs(60, 3, 2.0, &mut rng);
    let t: Vec<f64> = (0..60).map(|_| rng.random_range(0.1..1.0)).collect();
    let e: Vec<bool> = (0..60).map(|_| rng.random_bool(0.8)).collect();
    let config = TrainConfig {
        epochs: 3,
        pretrain_epochs: 2,
        batch_size: 16,
        ..small_config(2, 2)
    };
    let a = fit_arrays(&x, &t, &e, &config).unwrap();
    let b = fit_arrays(&x, &t, &e, &config).unwrap();
    assert_eq!(a.params, b.params);
    assert_eq!(a.pretrain_trace, b.pretrain_trace);
}

#[test]
fn smoothed_elbo_climbs_on_desk_data() {
    let (data, _) = gen_synthetic(&SyntheticConfig::desk_scale(1)).unwrap();
    let (train, _) = fit_preprocess(&data).unwrap();
    let config = TrainConfig {
        epochs: 100,
        hidden_layers: vec![64, 64],
        ..TrainConfig::default()
    };
    let out = fit_arrays(train.features(), train.times(), train.events(), &config).unwrap();
    let elbo: Vec<f64> = out.trace.iter().map(|r| r.elbo()).collect();
    assert_eq!(elbo.len(), 100);
    let smoothed = |end: usize| {
        let start = end.saturating_sub(20);
        elbo[start..end].iter().sum::<f64>() / (end - start) as f64
    };
    assert!(smoothed(100) > smoothed(1), "{} vs {}", smoothed(100), smoothed(1));
}

#[test]
fn without_a_mixture_prior_latents_are_clustered_by_kmeans() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (x, labels) = blobs(200, 3, 4.0, &mut rng);
    let t: Vec<f64> = (0..200).map(|_| rng.random_range(0.1..1.0)).collect();
    let e = vec![true; 200];
    let config = TrainConfig {
        gmm_prior: false,
        epochs: 30,
        batch_size: 50,
        ..small_config(2, 2)
    };
    let out = fit_arrays(&x, &t, &e, &config).unwrap();
    assert_eq!(out.params.num_components(), 1);
    assert_eq!(out.params.means, Matrix::zeros(1, 2));
    assert_eq!(out.params.log_vars, Matrix::zeros(1, 2));
    assert_eq!(out.params.num_clusters(), 2);
    let pred = predict(&out.params, &x, None).unwrap();
    for i in 0..200 {
        let row = pred.posterior.row(i);
        assert_eq!(row[pred.labels[i]], 1.0);
    }
    assert!(clustering_accuracy(&labels, &pred.labels).unwrap() > 0.9);
}
