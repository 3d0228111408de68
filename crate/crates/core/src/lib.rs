//! Synthesis of Clifford-group operations into GHZ-state-injection schedules.
//!
//! The crate is organised around two architectures: a linear qubit row with a
//! single GHZ bus, and a square-lattice "dual snake" with two intertwined
//! buses. Multi-qubit primitives (CNOT fan-out, Pauli rotations, clique
//! flips) each consume one injected GHZ state; single-qubit gates are free.
//!
//! Modules:
//! - [`gf2`]: dense bit-matrix linear algebra (rank, symmetric factorization,
//!   minrank over diagonal completions).
//! - [`tableau`]: symplectic Clifford tableaus with exact sign tracking,
//!   stabilizer measurement and random sampling.
//! - [`circuit`]: the gate algebra, architectures, schedules and the greedy
//!   layer packer.
//! - [`cz_synth`]: CZ-layer (graph) synthesis into clique flips.
//! - [`cx_synth`]: reversible linear circuit synthesis into fan-outs.
//! - [`hfree_synth`]: Hadamard-free synthesis by absorbing a CZ layer into
//!   fan-outs.
//! - [`clifford_synth`]: full Clifford pipelines for both architectures and
//!   grid permutation routing.
//! - [`gadgets`]: physical-level expansion of the injection primitives with
//!   exhaustive measurement-branch verification.
//! - [`bounds`]: closed-form lower bounds for reporting.

pub mod gf2;
pub mod tableau;
pub mod circuit;
pub mod cz_synth;
pub mod cx_synth;
pub mod hfree_synth;
pub mod clifford_synth;
pub mod gadgets;
pub mod bounds;




pub use gf2::{BitMatrix, BitVec};

