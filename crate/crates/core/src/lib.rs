//! Exact cohomology, flat-model Rumin complexes and finite-dimensional
//! analytic torsion for graded nilpotent Lie algebras.
//!
//! The crate is organised bottom-up:
//!
//! * [`rational`], [`linalg`], [`exterior`]: exact scalars, dense rational
//!   matrices and exterior-algebra bookkeeping.
//! * [`graded_lie`]: graded nilpotent Lie algebras and their automorphisms.
//! * [`cohomology`]: Chevalley–Eilenberg complex, weights, Hodge decomposition,
//!   star operator and duality pairing.
//! * [`sieve`]: the Poincaré-polynomial sieve on grading dimensions.
//! * [`uea`], [`rumin`]: operators with coefficients in the universal
//!   enveloping algebra and the Rumin complex of the flat model.
//! * [`torsion`]: analytic torsion of finite complexes with inner products.
//! * [`nilgroup`]: group law, lattice and characters of the (2,3,5) group.

pub mod cohomology;
pub mod exterior;
pub mod graded_lie;
pub mod linalg;
pub mod nilgroup;
pub mod rational;
pub mod rumin;
pub mod sieve;
pub mod torsion;
pub mod uea;

pub use cohomology::{GradedInnerProduct, WeightedCohomology};
pub use graded_lie::{GradedAutomorphism, GradedLieAlgebra};
pub use linalg::QMatrix;
pub use rational::Q;
