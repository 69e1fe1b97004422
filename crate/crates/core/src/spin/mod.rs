//! The complex spin system dual to the multi-occupancy loop model, evaluated
//! by grid quadrature and checked against exact path sums.

pub mod observable;
pub mod quadrature;
pub mod verify;

pub use observable::{Monomial, SiteFactor, SpinObservable};
pub use quadrature::{spin_expect, spin_partition, Quadrature, SpinSystem};
pub use verify::VerificationReport;
