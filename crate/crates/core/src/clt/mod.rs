//! Linear statistics, cumulant estimation, limiting-variance predictors and
//! Monte Carlo experiments.

mod combinatorics;
mod cumulants;
mod montecarlo;
mod predict;

pub use combinatorics::{compositions, identity_a, identity_b, multinomial};
pub use cumulants::{costin_lebowitz_cumulant, k_statistics, normality_report, CumulantReport, NormalityReport};
pub use montecarlo::{
    compare_batches, ks_statistic, linear_statistic, map_samples, run_batch, sample_spectrum, statistics_csv,
    universality_compare, BatchComparison, Normalization, UniversalityReport,
};
pub use predict::{
    dirichlet_energy, fourier_coefficients, line_variance_constant, predict_bulk_variance, predict_ginue_variance,
    predict_line_variance, GinueVariance,
};
