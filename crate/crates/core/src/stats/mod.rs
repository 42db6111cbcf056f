//! Statistical primitives: autocorrelation, portmanteau and diagnostic
//! tests, decomposition strengths, effective sample size, and multi-model
//! significance tests.

pub mod acf;
pub mod compare;
pub mod decompose;
pub mod diagnostics;
pub mod dist;

pub use acf::{acf, effective_sample_size, pacf, EffectiveSampleSize};
pub use compare::{friedman_test, nemenyi_cd, rank_comparison, RankComparison};
pub use decompose::{strengths, DecompositionStrengths};
pub use diagnostics::{
    arch_lm_stat, ljung_box, ljung_box_lags, lumpiness, paired_t_one_tail, spectral_entropy,
    teraesvirta_stat, TestResult,
};
