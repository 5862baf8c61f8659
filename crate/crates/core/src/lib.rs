//! The 231-avoiding consecutive stack sort: exact semantics, exhaustive
//! enumeration of sort-numbers, seeded Monte-Carlo estimation, power-law
//! fitting, and exhaustive property suites.

pub mod analyze;
pub mod cli;
pub mod enumerate;
pub mod error;
pub mod parallel;
pub mod perm;
pub mod sample;
pub mod verify;

pub use error::{Error, Result};
pub use perm::Permutation;
