//! Numerical toolkit for Reeb dynamics on model contact manifolds: closed
//! orbit search and Floquet analysis, period spectra and rigid
//! constellations, profile arithmetic for radial Hamiltonians, hypothesis
//! certificates for orbit-count theorems, and the fast-orbit semi-plug.

pub mod certify;
pub mod constellation;
pub mod dynamics;
pub mod geometry;
pub mod numeric;
pub mod plug;
pub mod profiles;
pub mod spectrum;
