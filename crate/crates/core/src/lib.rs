//! Marked semi-simplicial sets, their tensor product, anodyne decompositions,
//! non-unital categories and the supporting combinatorics.

pub mod decompose;
pub mod error;
pub mod homology;
pub mod kanext;
pub mod lifting;
pub mod marked;
pub mod nucat;
pub mod oracle;
pub mod ordinal;
pub mod sset;
pub mod suite;

pub use error::{Error, Result};
