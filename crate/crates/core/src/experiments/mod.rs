//! Experiment drivers behind the command-line tool.

use num_complex::Complex64 as C;

pub mod checks;
pub mod config;
pub mod equivalence;
pub mod jikang;
pub mod narrow;
pub mod output;
pub mod sweep;

pub use config::Config;

/// Centre of the positive lobe of the default dipole source.
pub const DEFAULT_SOURCE_CENTER: C = C::new(1.05, 1.6);
pub const DEFAULT_SOURCE_SIGMA: f64 = 0.06;
