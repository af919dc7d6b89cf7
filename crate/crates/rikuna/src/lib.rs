//! Exact arithmetic for the iterated Rikuna polynomial family: construction
//! of the iterates over Z and over finite fields, Newton-polygon (order-one
//! Montes) index computation with closed-form cross-checks, discriminants,
//! and the cycle/tail structure of the associated rational map on the
//! projective line over F_q, with its consequences for prime splitting in
//! the iterated extensions.
//!
//! Every closed form in the crate is backed by an independent brute-force
//! oracle somewhere in the test suite: discriminants against exact
//! resultants, index formulas against polygon lattice counts, the graph
//! structure theorem against raw iteration, and splitting predictions
//! against full polynomial factorization.

pub mod arith;
pub mod error;
pub mod finite_field;
pub mod iterates;
pub mod montes;
pub mod closed_forms;
pub mod zpoly;

pub use error::{Error, Result};
