//! File formats, batch commands and a pseudo-spectral PDE oracle around
//! [`dnls_core`].

pub use dnls_core;

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod pde;
