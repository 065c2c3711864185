//! Taylor joint spectrum of commuting pairs of matrix contractions.
//!
//! The crate builds the two-variable Koszul complex of a commuting pair
//! `(A1, A2)` with `A1A1* + A2A2* ≤ I`, evaluates its characteristic function
//! `θ_A` on the unit ball of `C²`, and relates the kernels of `θ_A` to the three
//! components of the Taylor spectrum. The `moebius` module transports all of
//! this through the involutive automorphisms of the ball.

pub mod charfn;
pub mod cli;
pub mod error;
pub mod koszul;
pub mod moebius;
pub mod numerics;
pub mod scan;
pub mod tuple;
pub mod verify;

pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, ComplexVector, Tolerance};
pub use tuple::{build_pair, BallPoint, CommutingPair};
