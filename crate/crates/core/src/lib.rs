pub mod baselines;
pub mod data;
pub mod error;
pub mod eval;
pub mod hsic;
pub mod model_io;
pub mod numerics;
pub mod semgraph;
pub mod solver;

pub use error::{CkdError, Result};
pub use numerics::Matrix;
