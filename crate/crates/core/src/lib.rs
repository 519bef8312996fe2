//! Numerical workbench for N-wise joint measurability of unsharp dichotomic
//! measurements.
//!
//! The crate decides joint measurability of qubit and Clifford-type measurement
//! families, locates critical unsharpness values, evaluates the `2^{N−1}`-term
//! bipartite incompatibility witness together with its sum-of-squares certificate,
//! tests steering assemblages for local-hidden-state models, and runs the
//! corresponding linear programs for polytopic generalized probabilistic theories.
//!
//! Module map:
//!
//! - [`matcore`]: Hermitian linear algebra (Jacobi eigensolver, PSD projection,
//!   norms, Kronecker products, partial traces).
//! - [`observables`]: Paulis, Bloch observables, Clifford generators, unsharp POVMs.
//! - [`jointmeas`]: joint-measurability feasibility and thresholds.
//! - [`witness`]: the incompatibility witness, optimal Bob observables, SOS gap.
//! - [`gptfrag`]: polytopic GPT fragments and LP-based joint measurability.
//! - [`assemblage`]: steered assemblages and LHS decompositions.
//! - [`app`]: command implementations and reports behind the `nwise` binary.

pub mod app;
pub mod assemblage;
pub mod config;
pub mod error;
pub mod feasibility;
pub mod gptfrag;
pub mod jointmeas;
pub mod matcore;
pub mod observables;
pub mod random;
pub mod states;
pub mod witness;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use feasibility::FeasibilityStatus;
