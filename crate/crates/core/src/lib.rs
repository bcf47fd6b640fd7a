//! Primorial-wheel prime matrices.
//!
//! Integers `>= 2` are laid out in matrices `A_k` with `p_k#` rows, row `i`
//! holding the arithmetic progression `(i + 1) + p_k# * (j - 1)`. Rows whose
//! residue shares a factor with the primorial hold only composites; the rest
//! carry every prime above `p_k`. Twin primes can only live in pairs of such
//! rows whose indices differ by 2.
//!
//! The crate enumerates those twin-row pairs, lifts them from one level to
//! the next, and measures how primes spread across them.

pub mod cli;
pub mod error;
pub mod format;
pub mod matrix;
pub mod numtheory;
pub mod sieve;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use matrix::{Fate, Graymap, KilledOffsets, LiftedPair, MatrixSpec, RowClass, RowStatus, TwinRowPair};
pub use numtheory::{PrimeBasis, MAX_BASIS_LEN};
