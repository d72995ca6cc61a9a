pub mod certification;
pub mod dark;
pub mod error;
pub mod evolution;
pub mod measurement;
pub mod model;
pub mod observables;
pub mod repro;
pub mod spin;

pub use error::{Error, Result};
