//! Construction, coding and evaluation of N-bit-delay AIFV codes.

pub mod bench;
pub mod bits;
pub mod builder;
pub mod error;
pub mod forest;
pub mod huffman;
pub mod markov;
pub mod mode;
pub mod optimizer;
pub mod source;

pub use error::{Error, ErrorClass, Result};
