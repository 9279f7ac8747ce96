use thiserror::Error;

use crate::square::CellRef;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("order mismatch: expected {expected}, found {found}")]
    OrderMismatch { expected: usize, found: usize },
    #[error("order {0} is not supported")]
    UnsupportedOrder(usize),
    #[error("symbol {symbol} out of range for order {n}")]
    SymbolOutOfRange { symbol: usize, n: usize },
    #[error("cell ({row}, {col}) out of range for order {n}", row = .cell.row, col = .cell.col)]
    CellOutOfRange { cell: CellRef, n: usize },
    #[error("grid is not a Latin square: {0}")]
    NotLatin(String),
    #[error("grid is not a partial Latin square: {0}")]
    NotPartialLatin(String),
    #[error("trade entry at {cell:?} expects {expected} but the square holds {found}")]
    OldMismatch { cell: CellRef, expected: usize, found: usize },
    #[error("trade does not yield a Latin square")]
    NotLatinAfterTrade,
    #[error("malformed trade: {0}")]
    MalformedTrade(String),
    #[error("cells do not form an intercalate")]
    NotIntercalate,
    #[error("order {0} is odd")]
    OddOrder(usize),
    #[error("order {0} is even")]
    EvenOrder(usize),
    #[error("starting square census not met: {bad} deficient cells, budget {budget}")]
    ConstructionFailed { bad: usize, budget: usize },
    #[error("no well-behaved scramble within {tries} tries (best score {best_score})")]
    ScrambleExhausted { tries: usize, best_score: usize },
    #[error("bounded list edge colouring failed: {0}")]
    ColoringFailed(String),
    #[error("coloured cell {0:?} collides with a prescribed cell")]
    MergeClash(CellRef),
    #[error("no valid column pair for the exchange")]
    NoValidColumns,
    #[error("feasibility inequality fails: {0}")]
    FeasibilityUnmet(String),
    #[error("no valid donor cell")]
    NoValidDonorCell,
    #[error("no valid auxiliary symbol")]
    NoAuxSymbol,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("prescribed symbol at {0:?} is forbidden there")]
    InputClash(CellRef),
    #[error("instance is infeasible")]
    Infeasible,
    #[error("search limit hit after {nodes} nodes")]
    LimitHit { nodes: u64 },
    #[error("parse error: {0}")]
    Parse(String),
}
