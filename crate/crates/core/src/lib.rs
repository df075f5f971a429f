pub mod continuation;
mod dd;
pub mod error;
pub mod evolution;
pub mod fixtures;
pub mod growth;
pub mod jost;
pub mod lattice;
pub mod scattering;
pub mod selfcheck;
pub mod spectral;
pub mod tridiag;
pub mod uncertainty;

pub use error::{Error, Result};
