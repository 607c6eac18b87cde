//! Reeb flow integration, closed-orbit shooting, Floquet analysis and
//! recurrence-seeded orbit scans.

mod field;
mod floquet;
mod flow;
mod integrator;
mod scan;
mod shooting;

use thiserror::Error;

use crate::geometry::GeometryError;

pub use field::{ReebField, VectorField};
pub use floquet::{floquet, floquet_from_monodromy, FloquetData, Multiplier, Nondegeneracy, NULLITY_CUTOFF};
pub use flow::{flow_lifted, flow_samples, integrate, monodromy};
pub use integrator::{DenseStep, Integrator};
pub use scan::{
    hausdorff, orbit_image, scan_orbits, seed_points, Coverage, FamilyTopology, OrbitFamily, ScanOptions, ScanReport,
    HAUSDORFF_MERGE, IMAGE_SAMPLES, MAX_REPRESENTATIVES,
};
pub use shooting::{
    reintegrate_residual, shoot_closed_orbit, ClosedOrbit, ShootingOptions, DIVISOR_RETURN_TOL, ORBIT_TOLERANCE,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget exhausted at t = {t}")]
    MaxSteps { t: f64 },
    #[error("trajectory left the chart: {0}")]
    LeftChart(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("monodromy conditioning failure: {0}")]
    MonodromyConditioning(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
