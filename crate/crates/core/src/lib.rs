//! Routing core for square-grid devices augmented with EPR-pair ancillas.
//!
//! The pipeline is: build a [`device::Device`], derive its
//! [`device::AugmentedGraph`] and [`device::DistanceMatrix`], place and
//! route a circuit with [`router`], expand augmented CXs into remote-CX
//! blocks with [`lower`], then measure the result with [`schedule`] and
//! certify it with [`verify`].
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod circuit;
pub mod dag;
pub mod device;
pub mod error;
pub mod generators;
pub mod lower;
pub mod router;
pub mod schedule;
pub mod verify;

pub use circuit::{gate_counts, Circuit, Condition, EdgeKind, Gate, GateCounts, GateKind, Provenance};
pub use dag::{build_dag, depth, CircuitDag, DepthMode};
pub use device::{augment, build_grid_device, weighted_distances, AugmentedGraph, Device, DistanceMatrix, Role, Weight};
pub use error::{CircuitError, DeviceError, LowerError, ReportError, RouteError, SimError};
