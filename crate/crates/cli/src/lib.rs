//! File formats, seeded experiments and the worked-example reproduction behind
//! the `onebit` binary.

pub mod experiment;
pub mod io;
pub mod repro;
pub mod rng;
