//! Completion of sparse partial Latin squares that avoid a forbidden-symbol array.
//!
//! Indices and symbols are 0-based throughout the library. File formats
//! (see [`io`]) use 1-based values.
//!
//! The solver follows a four-step construction:
//! [`starting`] builds a square rich in strong intercalates, [`scramble`]
//! permutes the inputs until the square is well-behaved, [`coloring`] turns the
//! remaining conflicts into extra prescriptions, and [`trades`] fixes prescribed
//! cells one at a time. [`pipeline`] ties the steps together and [`oracle`]
//! provides exhaustive search for small orders.

pub mod array;
pub mod coloring;
pub mod error;
pub mod gen;
pub mod intercalate;
pub mod io;
pub mod oracle;
pub mod params;
pub mod pipeline;
#[cfg(test)]
mod proptests;
pub mod scramble;
pub mod square;
pub mod starting;
pub mod sweep;
pub mod trade;
pub mod trades;
pub mod verify;

pub use array::AvoidanceArray;
pub use error::{Error, Result};
pub use intercalate::Intercalate;
pub use params::{FallbackPolicy, Fraction, LinearFloor, Params};
pub use square::{CellRef, LatinSquare, PartialLatinSquare};
pub use trade::{Trade, TradeEntry};
