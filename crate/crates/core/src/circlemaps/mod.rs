//! Circle homeomorphisms: PL maps, rotation numbers, the general Rieffel
//! projection and orbit simulation.

mod orbit;
mod piecewise;
mod pl;
mod projection;
mod rotation;

pub use orbit::{
    reversing_example, simulate, simulate_back, ReversingExample, OrbitDiagnostics, OrbitPoint, OrbitSample, SimulationMode,
    DISCREPANCY_CELLS, DISCREPANCY_THRESHOLD,
};
pub use piecewise::{identity_violations, CircleFunction, Piece, Poly, Term};
pub use pl::{PLCocycle, PlHomeo, PlLift, PlLiftF64};
pub(crate) use projection::rotation_cocycle;
pub use projection::{
    build_projection, rieffel_general, trace_by_integration, verify_identities, GeneralRieffel, IdentityReport, ProjectionData,
};
pub use rotation::{
    perturb_rotation, rotation_enclosure, rotation_number, rotation_target, CircleArc, PerturbedRotation,
    RotationCertificate, RotationNumber, RotationTarget,
};
