#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod augment;
pub mod cauchy;
pub mod cheb;
pub mod contour;
pub mod jost;
pub mod linalg;
pub mod potential;
pub mod error;
pub mod evolution;
pub mod rhp;
pub mod recon;
pub mod gauge;

pub use error::{Error, Result};

pub use num_complex::Complex64 as C64;
