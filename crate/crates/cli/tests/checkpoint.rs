use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vadesc_cli::{Checkpoint, RunConfig};
use vadesc_core::{FeatureKind, Matrix, PreprocessStats, TrainConfig, VadescParams};

fn checkpoint(gmm_prior: bool, seed: u64) -> Checkpoint {
    let mut config = RunConfig::parse("latent_dim = 3\nnum_clusters = 4\nhidden_layers = 7,5\n").unwrap();
    config.train.gmm_prior = gmm_prior;
    config.train.seed = seed;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = VadescParams::init(6, &config.train, &mut rng).unwrap();
    for (_, v) in params.tensors_mut() {
        v.iter_mut().for_each(|x| *x = rng.random_range(-3.0..3.0) * 1e-3f64.powi(rng.random_range(0..3)));
    }
    if !gmm_prior {
        params.latent_centers = Some(Matrix::from_fn(4, 3, |_, _| rng.random()));
    }
    let stats = PreprocessStats {
        max_time: rng.random_range(1.0..1000.0),
        feature_kind: FeatureKind::Real,
        means: (0..6).map(|_| rng.random()).collect(),
        stds: (0..6).map(|_| rng.random()).collect(),
    };
    Checkpoint { config, params, stats }
}

fn bits(c: &Checkpoint) -> Vec<u64> {
    let mut out: Vec<u64> = c.params.to_flat().iter().map(|v| v.to_bits()).collect();
    out.push(c.params.shape.to_bits());
    out.push(c.stats.max_time.to_bits());
    out.extend(c.stats.means.iter().chain(&c.stats.stds).map(|v| v.to_bits()));
    if let Some(m) = &c.params.latent_centers {
        out.extend(m.as_slice().iter().map(|v| v.to_bits()));
    }
    out
}

fn byte_offset(e: &vadesc_cli::CliError) -> u64 {
    let msg = e.message();
    let rest = msg.split("byte ").nth(1).unwrap_or_else(|| panic!("no offset in {msg:?}"));
    rest.split(|c: char| !c.is_ascii_digit()).next().unwrap().parse().unwrap()
}

#[test]
fn round_trip_is_bit_exact() {
    for (seed, gmm) in [(1, true), (2, false), (3, true)] {
        let c = checkpoint(gmm, seed);
        let bytes = c.to_bytes();
        assert_eq!(&bytes[..4], b"VDSC");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        assert_eq!(bits(&back), bits(&c));
        assert_eq!(back.params, c.params);
        assert_eq!(back.stats, c.stats);
        assert_eq!(back.config.train, c.config.train);
        assert_eq!(back.to_bytes(), bytes);
    }
}

#[test]
fn tensor_shapes_are_preserved() {
    let c = checkpoint(true, 4);
    let back = Checkpoint::from_bytes(&c.to_bytes()).unwrap();
    let shapes = |p: &VadescParams| -> Vec<(usize, usize)> {
        p.encoder
            .layers()
            .iter()
            .chain(p.decoder.layers())
            .map(|l| l.weight.shape())
            .chain([p.means.shape(), p.log_vars.shape(), p.betas.shape()])
            .collect()
    };
    assert_eq!(shapes(&back.params), vec![(6, 7), (7, 5), (5, 6), (3, 5), (5, 7), (7, 6), (4, 3), (4, 3), (4, 4)]);
    let acts: Vec<_> = back.params.encoder.layers().iter().map(|l| l.activation).collect();
    assert_eq!(acts, c.params.encoder.layers().iter().map(|l| l.activation).collect::<Vec<_>>());
}

#[test]
fn save_and_load_through_files() {
    let c = checkpoint(true, 5);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.vdsc");
    c.save(&path).unwrap();
    assert_eq!(bits(&Checkpoint::load(&path).unwrap()), bits(&c));
    let e = Checkpoint::load(&dir.path().join("missing")).unwrap_err();
    assert_eq!(e.kind(), "io");
}

#[test]
fn corrupt_files_are_rejected_with_offsets() {
    let good = checkpoint(false, 6).to_bytes();

    let mut bad = good.clone();
    bad[1] = b'X';
    let e = Checkpoint::from_bytes(&bad).unwrap_err();
    assert_eq!(e.kind(), "format");
    assert_eq!(byte_offset(&e), 0);
    assert!(e.message().contains("magic"));

    let mut bad = good.clone();
    bad[4..8].copy_from_slice(&2u32.to_le_bytes());
    let e = Checkpoint::from_bytes(&bad).unwrap_err();
    assert_eq!(byte_offset(&e), 4);
    assert!(e.message().contains("version 2"));

    for len in (0..good.len()).step_by(7).chain([good.len() - 1]) {
        let e = Checkpoint::from_bytes(&good[..len]).unwrap_err();
        assert_eq!(e.kind(), "format", "prefix {len}: {e}");
        assert!(byte_offset(&e) <= len as u64, "prefix {len}: {e}");
    }

    let mut long = good.clone();
    long.extend_from_slice(&[0, 0, 0]);
    let e = Checkpoint::from_bytes(&long).unwrap_err();
    assert_eq!(byte_offset(&e), good.len() as u64);

    let config_len = u64::from_le_bytes(good[8..16].try_into().unwrap()) as usize;
    let mut bad = good.clone();
    let key = b"latent_dim";
    let at = 16 + bad[16..16 + config_len].windows(key.len()).position(|w| w == key).unwrap();
    bad[at] = b'X';
    let e = Checkpoint::from_bytes(&bad).unwrap_err();
    assert!(e.message().contains("unknown key"), "{e}");
}

#[test]
fn default_config_is_echoed() {
    let mut c = checkpoint(true, 7);
    c.config = RunConfig::default();
    c.config.train = TrainConfig {
        latent_dim: 3,
        num_clusters: 4,
        hidden_layers: vec![7, 5],
        ..TrainConfig::default()
    };
    let bytes = c.to_bytes();
    let len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let text = std::str::from_utf8(&bytes[16..16 + len]).unwrap();
    assert!(text.contains("epochs = 1000\n"));
    assert!(text.contains("feature_kind = real\n"));
}
