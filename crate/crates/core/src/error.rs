use std::path::PathBuf;

use crate::exposure::{BankId, LayerId, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("snapshot failed validation: {}", join_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("unknown bank `{0}`")]
    UnknownBank(BankId),

    #[error("unknown layer `{0}`")]
    UnknownLayer(LayerId),

    #[error("invalid exposure {debtor} -> {creditor}: {reason}")]
    InvalidExposure {
        debtor: BankId,
        creditor: BankId,
        reason: &'static str,
    },

    #[error("seed set is empty")]
    EmptySeedSet,

    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("total economic value is zero")]
    ZeroTotalValue,

    #[error("bank `{0}` has no total_noninterbank_assets, required in with-external-assets mode")]
    MissingExternalAssets(BankId),

    #[error("bank `{bank}` is active on {date} but has no capital record on or before it")]
    MissingCapital {
        bank: BankId,
        date: chrono::NaiveDate,
    },

    #[error("no default probability for bank `{0}`")]
    MissingProbability(BankId),

    #[error("{banks} banks exceed the exact enumeration cap of {cap}")]
    OverExactCap { banks: usize, cap: usize },

    #[error("exact expected loss is zero while the approximation is {approx}")]
    ZeroExactLoss { approx: f64 },

    #[error("recovery rate must be below 1")]
    FullRecovery,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("power-law tail is degenerate: every tail sample equals x_min")]
    DegenerateTail,

    #[error("infeasible generator config: {0}")]
    InfeasibleConfig(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// True for errors caused by bad input data rather than by a computation.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Invalid(_)
                | Error::Parse { .. }
                | Error::Io { .. }
                | Error::Csv(_)
                | Error::Json(_)
                | Error::UnknownBank(_)
                | Error::UnknownLayer(_)
                | Error::InvalidExposure { .. }
                | Error::MissingCapital { .. }
                | Error::MissingProbability(_)
                | Error::MissingExternalAssets(_)
        )
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
