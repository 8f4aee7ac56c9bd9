//! Alternating Halpern-Mann iteration for pairs of nonexpansive mappings on
//! W-hyperbolic spaces, together with exact integer evaluation of its rates
//! of (T- and U-) asymptotic regularity and a harness that certifies those
//! rates against iteration traces.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the command
//! line front end live in the companion `halmann` crate.
#![no_std]
// `!(a <= b)` is the NaN-aware form throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod benchmarks;
pub mod error;
pub mod exact;
pub mod iterate;
pub mod maps;
pub mod rates;
pub mod report;
pub mod schedules;
pub mod spaces;
pub mod verify;

pub use error::{Error, Result};
pub use iterate::{IterationProblem, Trace, TraceSeries, Variant};
pub use maps::{MapHandle, MapSpec};
pub use rates::RateContext;
pub use schedules::{Modulus, ModulusKind, Schedule};
pub use spaces::{Point, Space, SpaceHandle};

/// Natural numbers used by every modulus and rate function.
pub type Nat = u128;
