//! Exact algebra, truncated Dirac operator and spectral zeta functions for
//! the quantum group SU_q(2).
//!
//! The crate has five layers:
//!
//! - [`numerics`]: exact scalars over Q(sqrt(q)) and an arbitrary-precision
//!   floating context (q-powers, q-numbers, complex powers of q, gamma).
//! - [`qalgebra`]: the coordinate algebra with normal-ordered multiplication,
//!   star structure, Haar state, diagonal automorphisms and the left/right
//!   actions of the quantized enveloping algebra.
//! - [`spectral`]: the truncated GNS lattice with spinor doubling, the Dirac
//!   operator and its companions, the approximating representation, and
//!   brute-force spectral sums used as oracles.
//! - [`zeta`]: closed-form evaluation of the weighted zeta family, its pole
//!   structure, residues and the residue-based criteria.
//! - [`integral`]: the non-commutative integral, its normalization, and the
//!   comparison against the Haar state and the modular group.
//!
//! The command-line driver lives in the `qsu2` binary; [`verify`] holds the
//! suite runners it shares with the integration tests.

mod error;

pub mod cli;
pub mod integral;
pub mod numerics;
pub mod qalgebra;
pub mod spectral;
pub mod verify;
pub mod zeta;

pub use error::{Error, Result};
