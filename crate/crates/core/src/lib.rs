pub mod cat;
pub mod catrl;
pub mod chirp;
pub mod domains;
pub mod error;
pub mod harness;
pub mod mdp;
pub mod options;
pub mod planner;

pub use error::{Error, Result};

/// Random generator used for every stochastic stream in the crate.
pub type Rng = rand_chacha::ChaCha8Rng;
