//! Datasets, the two benchmark generators, file formats and preprocessing.

mod csv_io;
mod dataset;
mod idx;
mod preprocess;
mod split;
mod survmnist;
mod synthetic;

pub use csv_io::{load_csv, read_csv, save_csv, write_csv};
pub use dataset::{FeatureKind, SurvivalDataset};
pub use idx::{load_idx_images, load_idx_labels, parse_idx_images, parse_idx_labels, IMAGE_MAGIC, LABEL_MAGIC};
pub use preprocess::{fit_preprocess, preprocess, PreprocessStats, STD_FLOOR, TIME_OFFSET};
pub use split::train_test_split;
pub use survmnist::{gen_survmnist, surrogate_features, upper_quantile, MnistSource, SurvMnistConfig, SurvMnistTruth};
pub use synthetic::{
    gen_low_rank, gen_low_rank_profile, gen_spd, gen_synthetic, low_rank_dim, CovarianceMode, LowRankMode, SyntheticConfig,
    SyntheticTruth, PROFILE_EFFECTIVE_RANK, PROFILE_TAIL_STRENGTH,
};
