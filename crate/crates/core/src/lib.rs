//! Weak measurements of a qubit with postselection when the preselected
//! state has been degraded by noise.
//!
//! The crate evaluates closed-form pointer shifts and meter readings for a
//! Gaussian pointer and for a qubit pointer, the maxima of those quantities
//! over all pre/postselection pairs, and checks both against brute-force
//! joint evolution in [`oracle`].

pub mod adjudicate;
pub mod channels;
pub mod error;
pub mod gaussian;
pub mod optimizer;
pub mod oracle;
pub mod qubit;
pub mod qubit_meter;
pub mod verify;

pub use adjudicate::{adjudicate_variants, adjudicate_variants_with, AdjudicationReport, Dispute, Verdict};
pub use channels::{amplitude_damping, depolarizing, phase_damping, ChannelKind, KrausChannel};
pub use error::{Error, Result};
pub use gaussian::{gaussian_max_shifts, gaussian_shifts, GaussianMaxima, GaussianMeter, MaxResult, ShiftResult, PROB_FLOOR};
pub use optimizer::{amplitude_damping_max, maximize, OptimizationResult, PpsPoint};
pub use qubit::{decompose, density_from_bloch, overlap, pure_state, BlochVector, PureQubit, QubitDensity};
pub use qubit_meter::{ordinary_reading, postselected_reading, qubit_max_reading, QubitMeterReading};
pub use verify::{run_verification, Formula, Perturbation, VerifyOptions, VerifyReport};
