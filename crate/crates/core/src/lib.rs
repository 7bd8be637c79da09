//! Desk-scale computation with free complex Banach lattices over
//! finite-dimensional spaces.
//!
//! Elements of the free lattice are represented as positively homogeneous
//! expression trees evaluated on dual functionals; free norms are
//! estimated as certified lower bounds with feasible witness tuples, with
//! exact oracles in dimension one; induced lattice homomorphisms act by
//! generator substitution and their spectra are compared against the
//! predictions available for the induced maps.

pub mod error;
pub mod fbl_norm;
pub mod homs;
pub mod lattice;
pub mod linalg;
pub mod optim;
pub mod par;
pub mod report;
pub mod rng;
pub mod sampling;
pub mod smooth;
pub mod spaces;
pub mod spectra;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
