//! Finite-difference and finite-element reference solvers.

pub mod banded;
pub mod cg;
pub mod strip;
pub mod transmission;

pub use strip::{
    caccioppoli_check, decay_fit, solve_strip, CaccioppoliPair, CaccioppoliReport, DecayFit, LateralData, StripData,
    StripDomain, StripGrid, StripShape, StripSolution,
};
pub use transmission::{solve_transmission, BoundaryData, BoundaryKind, Grid, GridSolution};
