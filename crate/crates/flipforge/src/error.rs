use thiserror::Error;

use crate::convex::{Diagonal, Label};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("diagonal ({}, {}) is not in the triangulation", .0.0, .0.1)]
    UnknownDiagonal(Diagonal),
    #[error("label {0} is not in the triangulation")]
    UnknownLabel(Label),
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("invalid triangulation: {0}")]
    InvalidTriangulation(String),
    #[error("position out of range: {0}")]
    OutOfRange(String),
    #[error("crossing pairs ({}, {}) and ({}, {})", .0.0, .0.1, .1.0, .1.1)]
    CrossingPairs((usize, usize), (usize, usize)),
    #[error("state is not a fan at apex 0")]
    NotFan,
    #[error("invalid round: {0}")]
    InvalidRound(String),
    #[error("certificate violated at round {round}: delta {delta} exceeds crossed count {crossed} + 1")]
    CertificateViolation {
        round: usize,
        delta: usize,
        crossed: usize,
    },
    #[error("start state is not a red/blue fan")]
    InvalidStart,
    #[error("edge ({0}, {1}) is not flippable")]
    NotFlippable(usize, usize),
    #[error("edge ({0}, {1}) does not exist")]
    UnknownEdge(usize, usize),
    #[error("edges are not adjacent around a spine vertex")]
    NotAdjacent,
    #[error("vertex count {0} is too small")]
    TooSmall(usize),
    #[error("state budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("target unreachable")]
    Unreachable,
    #[error("bad size: {0}")]
    BadSize(String),
}

pub type Result<T> = std::result::Result<T, Error>;
