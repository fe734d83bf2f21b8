//! Maritime radar-in-weather simulation: environment, sensing, vessel
//! motion, a baseline autonomy stack and run metrics.

pub mod autonomy;
pub mod bathymetry;
pub mod dynamics;
pub mod geom;
pub mod radar;
pub mod weather;
pub mod log;
pub mod scenario;
pub mod metrics;
pub mod study;
