//! Augmentations of the framed cord algebra of a braid closure and the
//! rank-one simple sheaves they correspond to, computed exactly.

pub mod braid;
pub mod cli;
pub mod cordaug;
pub mod correspondence;
pub mod error;
pub mod exactfield;
pub mod exactlinalg;
pub mod moduli;
pub mod sheafmodel;

pub use error::{Error, Result};
