use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("letter {letter} out of range for a braid on {n} strands")]
    LetterOutOfRange { letter: i32, n: usize },

    #[error("invalid strand count {0}")]
    InvalidStrandCount(usize),

    #[error("pure braid generator A_({i},{j}) invalid for {n} strands")]
    GeneratorIndex { i: usize, j: usize, n: usize },

    #[error("strand count mismatch: {left} vs {right}")]
    StrandMismatch { left: usize, right: usize },

    #[error("parse error at token {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("series mismatch: {0}")]
    SeriesMismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("braid word is not pure")]
    NotPure,

    #[error("strands {a} and {b} collide (distance {distance:.3e}) in piece {piece}")]
    Collision {
        piece: usize,
        a: usize,
        b: usize,
        distance: f64,
    },

    #[error("path pieces {0} and {1} do not chain")]
    BrokenChain(usize, usize),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("associator extrapolation did not converge: {0}")]
    NonConvergence(String),

    #[error("cache i/o: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
