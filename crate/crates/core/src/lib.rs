//! Exact arithmetic in truncated quotient rings, with the algebraic
//! structures built on top of it: delta-rings and oriented prisms, Witt
//! vectors, q-analogs and the q-logarithm, prismatic envelopes, frames and
//! windows, Dieudonne modules, and a low-degree Ext complex over finite
//! abelian groups. Every identity is checked exactly in the quotient ring;
//! guaranteed p-precision is tracked through divisions.

pub mod error;
pub mod linalg;
pub mod ring;
pub mod witt;
pub mod qprism;
pub mod envelope;
pub mod semilinear;
pub mod frames;
pub mod dmodules;
pub mod ext_complex;
pub mod report;
pub mod cli;

pub use error::{Error, Result};
pub use cli::run_cli;
pub use ring::{val, Element, Mono, QSpec, Ring, RingSpec, Val};
