//! KMS states of Toeplitz and Cuntz–Pimsner algebras attached to the shift on
//! the infinite-path space of a finite directed graph, and to integer-matrix
//! coverings of the torus.
//!
//! The crate is `no_std` with `alloc`. File formats, the CLI and parallel
//! verification live in the `kmslab` companion crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod examples;
pub mod exact;
pub mod fock;
pub mod graph;
pub mod kms;
pub mod linalg;
pub mod measure;
pub mod shift;
pub mod spectral;
pub mod torus;

pub use error::{Error, Result};
pub use graph::{DirectedMultigraph, EdgeId, PathWord, VertexId, VertexMatrix};
