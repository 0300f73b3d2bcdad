//! Steady-state contingency analysis for plant auxiliary power systems.
//!
//! Build a [`network::NetworkModel`] from a network document, solve it with
//! [`powerflow`], impose N-1 failures with [`contingency`], and score
//! remedial switching plans with [`ras`]. [`study::run_study`] ties the
//! pieces together and [`study_io`] reads and writes the documents.

pub mod contingency;
pub mod network;
pub mod powerflow;
pub mod ras;
pub mod study;
pub mod study_io;
pub mod topology;
pub mod units;

pub use contingency::{Contingency, ContingencyKind, ContingencyResult, VoltageLimits};
pub use network::{build_network, NetworkModel};
pub use powerflow::SolverSettings;
pub use study::run_study;
pub use study_io::fixture::reference_network;
