//! Numerical toolkit for ((2,3)) quantum secret sharing schemes.
//!
//! A secret subspace of a three-party Hilbert space is represented by a
//! complex four-leg tensor. The toolkit certifies the threshold property
//! through three equivalent lenses:
//!
//! - minimality of the tripartite information I₃ on purifications,
//! - existence of unitary recovery maps against erasure of any one party,
//! - multi-unitarity of the tensor (all three matrix foldings unitary).
//!
//! It also stress-tests the norm and I₃ bounds satisfied by Haar-random
//! scrambling unitaries via seeded Monte-Carlo sweeps.

pub mod codespace;
pub mod error;
pub mod infotheory;
pub mod random_lab;
pub mod scheme;
pub mod tensor;
pub mod verifier;

pub use error::{Error, Result};
pub use tensor::{ComplexMatrix, Party, Tensor4, UnitarityResidual};
