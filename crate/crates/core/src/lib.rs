//! Nested lattice coding over ergodic fading channels.
//!
//! The crate simulates MMSE-equalised lattice transceivers over fading
//! MIMO and multiple-access channels, evaluates their achievable rates by
//! Monte Carlo and quadrature, and checks closed-form gap-to-capacity bounds
//! together with the supporting inequalities.

// `!(x > 0.0)` is deliberate throughout: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod error;
#[cfg(feature = "cli")]
pub mod experiments;
pub mod lattice;
pub mod mac;
pub mod mc;
pub mod quadrature;
pub mod special;
pub mod transceiver;

pub use error::{Error, Result};
