#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bundle;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod linalg;
pub mod multiplier;
pub mod poly;
pub mod quotient;
pub mod similarity;
pub mod truncation;
pub mod wirtinger;

pub use error::{Error, Result};
