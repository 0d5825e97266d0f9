//! Error type shared by all solver components.

use crate::problem::ValidationReport;
use crate::uncertainty::UncertaintyKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("kind mismatch: expected {expected} container, found {found}")]
    KindMismatch {
        expected: UncertaintyKind,
        found: UncertaintyKind,
    },

    #[error("operation requires a non-empty container")]
    EmptyContainer,

    #[error("cannot maximize over an empty choice set")]
    EmptyChoice,

    #[error("state `{key}` is not a member of the layer at t={t}")]
    InvalidState { t: usize, key: String },

    #[error("control `{key}` is not available in state `{state}` at t={t}")]
    InvalidCtrl {
        t: usize,
        state: String,
        key: String,
    },

    #[error("control `{key}` is not feasible in state `{state}` at t={t}")]
    InfeasibleCtrl {
        t: usize,
        state: String,
        key: String,
    },

    #[error("viability table has no layer for (t={t}, n={n})")]
    TableMiss { t: usize, n: usize },

    #[error("state `{key}` is outside the policy domain at t={t}")]
    DomainMiss { t: usize, key: String },

    #[error("operation is only defined for deterministic problems")]
    NotDeterministic,

    #[error("state `{key}` is not viable for {n} steps at t={t}")]
    NotViable { n: usize, t: usize, key: String },

    #[error("enumeration requires {required} evaluations, cap is {cap}")]
    TooLarge { required: u128, cap: u64 },

    #[error("problem is not well-posed:\n{0}")]
    IllPosed(ValidationReport),

    #[error("measure `{name}` has not passed the monotonicity harness")]
    UncheckedMeasure { name: String },

    #[error("slip probability {slip} is outside [0, 1)")]
    InvalidSlip { slip: f64 },

    #[error("probability {prob} is negative")]
    NegativeProbability { prob: f64 },

    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
