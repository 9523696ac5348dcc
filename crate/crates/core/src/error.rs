use thiserror::Error;

/// Errors raised by the qfree-core routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vector is not a unit vector (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("invalid gamma specification: {0}")]
    InvalidSpec(String),

    #[error("no isometric clique covers beta = {beta:?}")]
    Coverage { beta: Vec<f64> },

    #[error("isometric cover incomplete: {} sampled directions uncovered", witnesses.len())]
    CoverIncomplete { witnesses: Vec<Vec<f64>> },

    #[error("index set is empty")]
    EmptyIndexSet,

    #[error("slice embedding is rank deficient (rank {rank})")]
    DegenerateEmbed { rank: usize },

    #[error("invalid slice specification: {0}")]
    InvalidSlice(String),

    #[error("Jacobi iteration did not converge after {sweeps} sweeps")]
    NonConvergence { sweeps: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry})")]
    NotSymmetric { asymmetry: f64 },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("quadratic is not reducible to standard form (n = {n}, m = {m})")]
    NotReducible { n: usize, m: usize },

    #[error("no cut: every ray is a recession direction of the set")]
    NoCut,

    #[error("apex is not interior (margin {margin})")]
    ApexNotInterior { margin: f64 },

    #[error("ray matrix is ill-conditioned or singular (condition {condition})")]
    BadRays { condition: f64 },

    #[error("direction is not exposed at sampling resolution (delta* = {delta})")]
    NotExposed { delta: f64 },

    #[error("t = {t} is below the sequence start t_bar = {t_bar}")]
    BelowStart { t: u64, t_bar: u64 },

    #[error("exposing witness is invalid: {0}")]
    InvalidWitness(String),

    #[error("no sampled inequality separates the point at t = {t}")]
    EmptySeparatingSet { t: u64 },

    #[error("t list must be strictly increasing")]
    UnorderedTList,
}

pub type Result<T> = std::result::Result<T, Error>;
