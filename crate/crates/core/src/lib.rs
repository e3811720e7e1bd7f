//! Uniformly most powerful winner and non-winner tests for voting under Mallows'
//! and Condorcet's models.

pub mod ballot_file;
pub mod cache;
pub mod distribution;
pub mod error;
pub mod models;
pub mod oracle;
pub mod profile;
pub mod rank;
pub mod selection;
pub mod simplex;
pub mod space;
pub mod statistics;
pub mod testing;
pub mod ump;

pub use error::{Error, Result};
