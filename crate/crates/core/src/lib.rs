pub mod analysis;
pub mod error;
pub mod grid;
pub mod io;
pub mod magnetics;
pub mod solver;
pub mod spectrum;
pub mod variational;
pub mod verify;

pub use error::{Error, Result};
