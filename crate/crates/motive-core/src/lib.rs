//! Desk-scale computational algebra for 1-motives and their biextensions.
//!
//! The crate works over small prime fields and integer lattices, so every
//! object is finite and every check is exhaustive or exactly solvable:
//!
//! * integer matrices, Smith normal form, congruence systems ([`mat`], [`snf`]);
//! * elliptic curves over F_p by full enumeration, torsion bases, and the
//!   Weil pairing via Miller's algorithm ([`curve`], [`pairing`]);
//! * semi-abelian group models mixing curve points with roots of unity
//!   ([`group`], [`semiabelian`]);
//! * 1-motives as seven-tuples with weight filtration, Cartier duality and
//!   isogeny tests ([`motive`]);
//! * biextensions: symmetric cocycles, trivializations, the Poincare
//!   biextension, morphism verification, and Biext^0 / Biext^1 computations
//!   ([`cocycle`], [`biext_group`], [`motive_biext`], [`morphism`]);
//! * tensor-product weight bookkeeping: the two-term complex attached to a
//!   pair of motives, graded decompositions of tensor quotients, weight
//!   component matrices, and linearized Hom groups ([`tensor_complex`],
//!   [`graded`]).
//!
//! Brute-force searches are bounded by `MOTIVECALC_MAX_ENUM` (default 10^6
//! candidates). With the default `parallel` feature the heavy enumerations
//! run on rayon; `*_seq` variants always stay on one thread.

pub mod error;
pub mod mat;
pub mod snf;
pub mod finite;
pub mod lattice;
pub mod limits;
pub mod field;
pub mod curve;
pub mod pairing;
pub mod torus;
pub mod semiabelian;
pub mod group;
pub mod motive;
pub mod cocycle;
pub mod biext_group;
pub mod motive_biext;
pub mod morphism;
pub mod tensor_complex;
pub mod graded;

pub use error::{Error, Result};
