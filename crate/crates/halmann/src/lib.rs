//! File formats and the batch front end for `halmann-core`.

pub mod catalog;
pub mod commands;
pub mod config;
pub mod io;
