pub mod ensembles;
pub mod cayley;
pub mod cli;
pub mod error;
pub mod feedback;
pub mod numkernel;
pub mod pdelab;
pub mod simkit;
pub mod sysnode;

pub use error::{LabError, Result};
