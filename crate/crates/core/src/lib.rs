//! Algorithmic core of the corpuskit toolkit.
//!
//! Everything in this crate is pure computation over in-memory data: no
//! file IO, no clocks, no global state. The companion `corpuskit` crate
//! layers record files, model serialization, and the CLI on top.
//!
//! The crate is `no_std` (with `alloc`) so the algorithms stay portable
//! and trivially embeddable; all operations are deterministic given their
//! inputs and, where applicable, an explicit seed.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod text;
pub mod corpus;
pub mod mixture;
pub mod rng;
