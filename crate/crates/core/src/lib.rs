//! Simulation and analysis toolkit for hyperentangled Bell-state analysis
//! with linear optics.
//!
//! The crate models two photons entangled simultaneously in polarization and
//! in linear momentum (path), evolves them through passive linear-optical
//! circuits, and studies how far click patterns at the output detectors can
//! distinguish the sixteen hyper-Bell states:
//!
//! - [`fock`] — two-photon Fock space, coefficient matrices, mode unitaries;
//! - [`bellstates`] — the sixteen hyper-Bell states, local Pauli-type
//!   operations and their orbits;
//! - [`circuits`] — circuit descriptions, compilation to mode unitaries,
//!   detection-signature distributions and partitions, plus the two
//!   reference analyzers (the Kwiat–Weinfurter arrangement and the modified
//!   scheme) with calibration search;
//! - [`distinguish`] — the van Loock–Lütkenhaus-style feasibility criterion
//!   for distinguishing state subsets, the exhaustive octet sweep showing no
//!   linear-optics scheme resolves eight classes, and counting bounds;
//! - [`twocopy`] — two-copy discrimination: combining both analyzers
//!   identifies all sixteen states;
//! - [`protocols`] — superdense coding beyond the one-copy bound,
//!   quantum fingerprinting, and teleportation with the embedded analyzer.

pub mod bellstates;
pub mod circuits;
pub mod distinguish;
pub mod fock;
pub mod protocols;
pub mod tol;
pub mod twocopy;

pub use fock::{CMat, CVec, FockError, TwoPhotonState, WMatrix};
