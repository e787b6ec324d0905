//! Dense feed-forward networks with exact reverse-mode gradients, Adam and
//! a binary checkpoint format.

mod adam;
pub mod io;
mod network;

pub use adam::{Adam, ScalarAdam};
pub use network::{split_cols, Activation, Cache, Grads, Layer, Network};
