//! Network-based systemic risk for layered interbank exposure networks.
//!
//! DebtRank per layer and on the combined network, expected systemic loss
//! (exact power-set form and its single-default approximation), credit
//! expected loss, marginal contributions of single exposures, and the layer
//! statistics and null models used to compare layers.

pub mod cli;
pub mod debtrank;
pub mod error;
pub mod exposure;
pub mod io;
pub mod loss;
pub mod report;
pub mod stats;
pub mod synth;

pub use debtrank::{
    average_debtrank, debtrank, economic_value, impact_matrix, normalized_layer_debtrank,
    sr_profile, DebtRankResult, Network, RiskProfile, Scope, ValueMode,
};
pub use error::{Error, Result};
pub use exposure::{
    bank_records, combine_layers, BankId, BankRecord, BankRecords, LayerId, LiabilityMatrix,
    MultiLayerSnapshot,
};
pub use loss::{
    expected_systemic_loss_approx, expected_systemic_loss_exact, DefaultProbabilities,
    ExposureDelta, LossGivenDefault, LossReport,
};
pub use stats::{
    exposure_cdf, jaccard, layer_pair_stats, null_model_rewire, pearson, powerlaw_fit,
    LayerPairStats, PowerLawFit,
};
