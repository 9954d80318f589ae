//! Brute-force evolution of the joint system and meter state.
//!
//! [`joint`] and [`grid`] build everything from the interaction unitary and
//! never call the closed forms in [`crate::gaussian`] or
//! [`crate::qubit_meter`]; [`crate::adjudicate`] and [`crate::verify`]
//! compare the two.

pub mod grid;
pub mod joint;

pub use grid::{gaussian_grid_evolve, GaussianGridOracle, PositionGrid};
pub use joint::{qubit_joint_evolve, qubit_joint_state, trace_out_system};
