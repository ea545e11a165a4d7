pub mod error;
pub mod geometry;
mod mobius;
pub mod green;
pub mod quadrature;
pub mod potential;
pub mod fd;
pub mod conformal;
pub mod experiments;
