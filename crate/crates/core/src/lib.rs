pub mod analysis;
pub mod error;
pub mod linalg;
pub mod protocol;
pub mod quantum;

pub use error::{Error, Result};
