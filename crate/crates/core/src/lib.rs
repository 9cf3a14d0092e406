//! Categorical Galois theory on finite instances.
//!
//! The engine works with the Galois structure of groups over abelian groups
//! (abelianisation as reflector, surjections as fibrations) and with étale
//! maps of finite graphs (connected components as reflector). It computes
//! Galois groups two independent ways, fundamental groups relative to
//! certified weakly universal extensions, and checks the Kan-extension
//! properties of the resulting comparison maps on finite diagrams.
//!
//! The crate is `no_std` and only needs an allocator. File formats, the CLI
//! and scenario loading live in the companion `catgal` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod config;
pub mod error;
pub mod fixtures;
pub mod galgroup;
pub mod galois;
pub mod graph;
pub mod group;
pub mod groupoid;
pub mod homology;
pub mod kan;
pub mod search;

pub use config::Config;
pub use error::{Error, Result};
pub use group::{
    abelian_invariants, abelianization, center, commutator_subgroup, derived_subgroup, product,
    pullback, quotient, subgroup_generated, AbelianInvariants, Extension, Group, GroupRef, Hom,
    Pullback, Subgroup,
};
pub use search::{enumerate_homs, is_isomorphic};
