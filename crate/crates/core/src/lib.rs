pub mod channel;
pub mod conic;
pub mod cost;
pub mod discrimination;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod random;
pub mod symmetry;
pub mod tensor;

pub use error::{Error, Result};
