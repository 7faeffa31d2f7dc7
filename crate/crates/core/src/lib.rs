//! Successive-cancellation flip (SCF) decoding of CRC-aided polar codes, and a
//! time-stepped model of an SCF decoder fed at a fixed rate through a bounded
//! input buffer whose controller cuts decoding trials to prevent overflow.
//!
//! The crate is organised bottom-up:
//!
//! - [`polarcode`]: construction, encoding, CRC and frozen-set files.
//! - [`channel`]: BPSK over AWGN with seeded, per-frame noise streams.
//! - [`scdec`]: the SC kernel with optional forced bit flip.
//! - [`scfdec`]: the SCF trial loop and the flip-candidate metric.
//! - [`bufctl`]: circular buffer, threshold controller and threshold selection.
//! - [`harness`]: ideal Monte Carlo (phase 1) and the buffered system replay (phase 2).
//! - [`cli`]: configuration, presets and the `scf-sim` commands.

pub mod bufctl;
pub mod channel;
pub mod cli;
pub mod error;
pub mod harness;
pub mod polarcode;
pub mod scdec;
pub mod scfdec;

pub use error::{Error, Result};
