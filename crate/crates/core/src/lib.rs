//! Continuous polarization calculus for binary erasure channels.

pub mod cli;
pub mod compare;
pub mod error;
pub mod exact;
pub mod grid;
pub mod ivp;
pub mod local;
pub mod maps;
pub mod order;
pub mod path;
pub mod word;

pub use compare::{compare_words, CompareConfig, OrderVerdict};
pub use error::{Error, Result};
pub use maps::{eval_word, step0, step1, Capacity};
pub use word::{Bit, PolarWord, Segment};
