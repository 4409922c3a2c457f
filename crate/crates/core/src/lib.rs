// SPDX-License-Identifier: Apache-2.0

//! Bosonic private-key quantum homomorphic encryption, simulated at desk scale.
//!
//! * [`fock`] enumerates occupation bases and lifts single-particle unitaries.
//! * [`crypto`] builds the Fourier-diagonal encryptor and keys.
//! * [`evaluate`] covers linear-optical circuits, Reck synthesis and sampling.
//! * [`secinfo`] reconstructs the key-averaged ciphertext and its entropies.
//! * [`pipeline`] chains encryption, evaluation and decryption.
//! * [`io`] holds the JSON artifact schemas and [`verify`] the invariant checks.

pub mod crypto;
pub mod error;
pub mod evaluate;
pub mod fock;
pub mod io;
pub mod linalg;
pub mod pipeline;
pub mod secinfo;
pub mod verify;

pub use error::{Error, Result};
