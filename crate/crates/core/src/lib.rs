pub mod error;
pub mod fock;
pub mod hybrid;
pub mod phase_algebra;
pub mod protocols;

pub use error::{Result, SimError};
