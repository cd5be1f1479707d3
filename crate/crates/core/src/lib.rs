//! Sarcasm detection in conversation context: text preparation, lexical
//! features, a linear baseline, LSTM/attention models, training and
//! evaluation, and attention/annotation analysis.

pub mod analysis;
pub mod baseline;
pub mod error;
pub mod lexicons;
pub mod model;
pub mod nn;
pub mod pipeline;
pub mod synthetic;
pub mod text;
pub mod train;

pub use error::{Error, Result};
