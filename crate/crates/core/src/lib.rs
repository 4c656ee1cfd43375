//! Induction motor fault simulation and diagnosis.
//!
//! The crate covers the whole pipeline: a d-q model of a 5 hp squirrel-cage
//! motor, injection of open-circuit, short-circuit, overload and
//! broken-rotor-bar faults, FFT-based current features, generation of a
//! labeled dataset, and from-scratch classifiers with an evaluation suite.

pub mod dataset;
pub mod error;
pub mod fault;
pub mod features;
pub mod fmt;
pub mod ml;
pub mod motor;
pub mod spectrum;
pub mod supply;
pub mod transforms;
