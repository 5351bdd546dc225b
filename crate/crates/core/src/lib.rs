//! Fixed points of relaxing quantum dynamical semigroups and their
//! steering by Hamiltonian control.
//!
//! The crate works in the coherence-vector picture: a Lindblad generator
//! becomes the affine ODE `dr/dt = (A + B) r + c` over the Pauli-string
//! basis ([`lindblad`]). When `A + B` is stable the flow has a unique global
//! attractor `r_f = -(A + B)^{-1} c`; adding a control Hamiltonian changes
//! `A` only, which moves `r_f` over the set of stabilizable states
//! ([`control`]). [`entanglement`] scores two-qubit fixed points and
//! [`scenarios`] packages the one-spin Bloch and two-spin entangled
//! examples together with the pulsed (stroboscopic) regime.

pub mod control;
pub mod entanglement;
pub mod error;
pub mod exec;
pub mod lindblad;
pub mod linalg;
pub mod operators;
pub mod random;
pub mod scenarios;

pub use error::{RelaxError, Result};
pub use exec::Execution;
pub use lindblad::{CoherenceRep, FixedPointResult, LindbladModel};
pub use operators::{ComplexMatrix, CoherenceVector, OperatorBasis};
