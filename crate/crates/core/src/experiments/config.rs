//! TOML configuration shared by all subcommands.
//!
//! Every section and key is optional; missing values take the defaults below.
//!
//! ```toml
//! [series]
//! tol = 1e-10
//! k_max = 1000000
//!
//! [quadrature]
//! n_radial = 32
//! n_angular = 32
//! tol = 1e-6
//!
//! [source]
//! center = [1.05, 1.6]
//! sigma = 0.06
//!
//! [sweep]
//! eps = [0.1, 0.01, 0.001, 0.0001]
//! orders = [1, 2, 3]
//! probe_spacing = 0.25     # in units of eps
//! oracle = false
//!
//! [[sweep.regime]]
//! label = "theorem"
//! k1 = 0.1
//! k2 = 10.0
//!
//! [narrow]
//! eps = [0.01, 0.004, 0.001]
//! shape = "parabolic"
//! nx = 1600
//! ny = 32
//! fit_range = [0.1, 0.5]
//! radii = [0.4, 0.3, 0.2, 0.15]
//! ```

use std::path::Path;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::{LateralData, StripGrid};
use crate::green::{Conductivity, GreenParams};
use crate::potential::SourceData;
use crate::quadrature::Quadrature;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub series: SeriesConfig,
    pub quadrature: QuadratureConfig,
    pub source: SourceConfig,
    pub sweep: SweepConfig,
    pub narrow: NarrowConfig,
    pub green_check: GreenCheckConfig,
    pub fd: FdConfig,
    pub conformal: ConformalConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            series: SeriesConfig::default(),
            quadrature: QuadratureConfig::default(),
            source: SourceConfig::default(),
            sweep: SweepConfig::default(),
            narrow: NarrowConfig::default(),
            green_check: GreenCheckConfig::default(),
            fd: FdConfig::default(),
            conformal: ConformalConfig::default(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.sweep.validate()?;
        self.narrow.validate()?;
        check_descending("green_check.eps", &self.green_check.eps)?;
        for r in self.sweep.regimes.iter().chain(&self.green_check.regimes) {
            r.conductivity()?;
        }
        if !(self.series.tol > 0.0) || self.series.k_max == 0 {
            return Err(Error::Config("series.tol must be positive and series.k_max nonzero".into()));
        }
        if self.quadrature.n_radial < 2 || self.quadrature.n_angular < 2 {
            return Err(Error::Config("quadrature needs at least 2 nodes per direction".into()));
        }
        Ok(())
    }

    pub fn quadrature(&self) -> Quadrature {
        let q = self.quadrature;
        Quadrature { n_radial: q.n_radial, n_angular: q.n_angular, tol: q.tol }
    }

    pub fn green_params(&self) -> GreenParams {
        GreenParams { tol: self.series.tol, k_max: self.series.k_max, ..GreenParams::default() }
    }
}

fn check_descending(name: &str, list: &[f64]) -> Result<()> {
    if list.is_empty() {
        return Err(Error::Config(format!("{name} is empty")));
    }
    if list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Config(format!("{name} must contain positive values")));
    }
    if list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config(format!("{name} must be sorted in descending order")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeriesConfig {
    pub tol: f64,
    pub k_max: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self { tol: 1e-10, k_max: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub n_radial: usize,
    pub n_angular: usize,
    pub tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { n_radial: 32, n_angular: 32, tol: 1e-6 }
    }
}

/// Gaussian dipole: a normalized bump at `center` minus its copy at `-center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceConfig {
    pub center: [f64; 2],
    pub sigma: f64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        let c = super::DEFAULT_SOURCE_CENTER;
        Self { center: [c.re, c.im], sigma: super::DEFAULT_SOURCE_SIGMA }
    }
}

impl SourceConfig {
    pub fn build(&self) -> Result<SourceData> {
        SourceData::gaussian_dipole(C::new(self.center[0], self.center[1]), self.sigma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeLabel {
    /// `k1 < 1 < k2` with `gamma ∈ (1/2, 1)`.
    Theorem,
    BothLarge,
    BothSmall,
    /// `k1 = k2 = 1`.
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Regime {
    pub label: RegimeLabel,
    pub k1: f64,
    pub k2: f64,
}

impl Regime {
    pub const fn new(label: RegimeLabel, k1: f64, k2: f64) -> Self {
        Self { label, k1, k2 }
    }

    /// Builds the conductivity, checking it against the label.
    pub fn conductivity(&self) -> Result<Conductivity> {
        let c = Conductivity::new(self.k1, self.k2)?;
        let ok = match self.label {
            RegimeLabel::Theorem => c.in_theorem_regime(),
            RegimeLabel::BothLarge => self.k1 > 1.0 && self.k2 > 1.0,
            RegimeLabel::BothSmall => self.k1 < 1.0 && self.k2 < 1.0,
            RegimeLabel::Reference => self.k1 == 1.0 && self.k2 == 1.0,
        };
        if !ok {
            return Err(Error::Config(format!(
                "(k1, k2) = ({}, {}) does not belong to regime {:?} (gamma = {})",
                self.k1, self.k2, self.label, c.gamma
            )));
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub eps: Vec<f64>,
    pub orders: Vec<u32>,
    #[serde(rename = "regime")]
    pub regimes: Vec<Regime>,
    /// Both radii; the series is available for unit radii only.
    pub r1: f64,
    pub r2: f64,
    /// Spacing of the 3×3 probe block around the gap centre, in units of eps.
    pub probe_spacing: f64,
    /// Explicit probes `[x, y]`, replacing the block.
    pub probes: Option<Vec<[f64; 2]>>,
    /// Cross-check `|Du|` against the FD solver for the two largest eps.
    pub oracle: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            eps: vec![1e-1, 1e-2, 1e-3, 1e-4],
            orders: vec![1, 2, 3],
            regimes: vec![Regime::new(RegimeLabel::Theorem, 0.1, 10.0), Regime::new(RegimeLabel::BothLarge, 100.0, 100.0)],
            r1: 1.0,
            r2: 1.0,
            probe_spacing: 0.25,
            probes: None,
            oracle: false,
        }
    }
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        check_descending("sweep.eps", &self.eps)?;
        if self.r1 != 1.0 || self.r2 != 1.0 {
            return Err(Error::Config("sweeps need r1 = r2 = 1; reduce other radii with the conformal map first".into()));
        }
        if self.orders.is_empty() || self.orders.iter().any(|&m| m == 0 || m as usize > crate::green::MAX_ORDER) {
            return Err(Error::Config(format!("sweep.orders must lie in 1..={}", crate::green::MAX_ORDER)));
        }
        if self.regimes.is_empty() {
            return Err(Error::Config("sweep needs at least one [[sweep.regime]]".into()));
        }
        Ok(())
    }

    /// Probe points for gap width `eps`.
    pub fn probe_points(&self, eps: f64) -> Vec<C> {
        if let Some(p) = &self.probes {
            return p.iter().map(|q| C::new(q[0], q[1])).collect();
        }
        let d = self.probe_spacing * eps;
        (-1..=1).flat_map(|j| (-1..=1).map(move |i| C::new(i as f64 * d, j as f64 * d))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeName {
    Flat,
    Parabolic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NarrowConfig {
    pub eps: Vec<f64>,
    pub shape: ShapeName,
    pub curvature: f64,
    pub half_width: f64,
    pub nx: usize,
    pub ny: usize,
    pub bottom: f64,
    pub lateral: LateralData,
    pub fit_range: [f64; 2],
    pub radii: Vec<f64>,
}

impl Default for NarrowConfig {
    fn default() -> Self {
        let g = StripGrid::default();
        Self {
            eps: vec![1e-2, 4e-3, 1e-3],
            shape: ShapeName::Parabolic,
            curvature: 1.0,
            half_width: 1.0,
            nx: g.nx,
            ny: g.ny,
            bottom: 0.0,
            lateral: LateralData::OddLinear,
            fit_range: [0.1, 0.5],
            radii: crate::fd::strip::DEFAULT_RADII.to_vec(),
        }
    }
}

impl NarrowConfig {
    fn validate(&self) -> Result<()> {
        check_descending("narrow.eps", &self.eps)?;
        if !(self.fit_range[0] >= 0.0 && self.fit_range[1] > self.fit_range[0]) {
            return Err(Error::Config(format!("narrow.fit_range {:?} is not an interval", self.fit_range)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreenCheckConfig {
    pub eps: Vec<f64>,
    #[serde(rename = "regime")]
    pub regimes: Vec<Regime>,
    /// Source points `[x, y]`.
    pub sources: Vec<[f64; 2]>,
    /// Points per interface circle.
    pub points: usize,
    /// Offset of the one-sided samples.
    pub h: f64,
    /// Spacing of the Laplacian stencil.
    pub laplacian_h: f64,
}

impl Default for GreenCheckConfig {
    fn default() -> Self {
        Self {
            eps: vec![1e-1, 1e-2, 1e-3],
            regimes: vec![
                Regime::new(RegimeLabel::Theorem, 0.1, 10.0),
                Regime::new(RegimeLabel::BothLarge, 100.0, 100.0),
                Regime::new(RegimeLabel::BothSmall, 0.2, 0.05),
            ],
            sources: vec![[0.3, 0.9]],
            points: 64,
            h: 1e-4,
            laplacian_h: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirichletSource {
    /// Values of the represented field.
    Representation,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdConfig {
    pub eps: f64,
    pub k1: f64,
    pub k2: f64,
    /// Half side of the square centred at the origin.
    pub half: f64,
    /// Spacing as a fraction of eps (at most 1/8).
    pub h_over_eps: f64,
    pub dirichlet: DirichletSource,
    /// Include the dipole source inside the square.
    pub with_source: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { eps: 0.1, k1: 0.1, k2: 10.0, half: 0.5, h_over_eps: 0.125, dirichlet: DirichletSource::Representation, with_source: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConformalConfig {
    pub samples: usize,
    pub seed: u64,
    pub r_range: [f64; 2],
    pub eps_range: [f64; 2],
}

impl Default for ConformalConfig {
    fn default() -> Self {
        Self { samples: 20, seed: 7, r_range: [0.5, 10.0], eps_range: [1e-4, 0.5] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(Config::from_toml("").unwrap(), Config::default());
    }

    #[test]
    fn parses_regimes_and_lists() {
        let cfg = Config::from_toml(
            r#"
            [sweep]
            eps = [0.1, 0.05]
            orders = [2]
            [[sweep.regime]]
            label = "reference"
            k1 = 1.0
            k2 = 1.0
            [narrow]
            shape = "flat"
            lateral = { constant = 1.0 }
            "#,
        )
        .unwrap();
        assert_eq!(cfg.sweep.eps, vec![0.1, 0.05]);
        assert_eq!(cfg.sweep.regimes[0].label, RegimeLabel::Reference);
        assert_eq!(cfg.narrow.lateral, LateralData::Constant(1.0));
        assert_eq!(cfg.sweep.probe_points(0.1).len(), 9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Config::from_toml("[sweep]\neps = [0.01, 0.1]").is_err());
        assert!(Config::from_toml("[sweep]\nbogus = 1").is_err());
        // gamma = 0.18 for (0.5, 2): outside (1/2, 1).
        assert!(Config::from_toml("[[sweep.regime]]\nlabel = \"theorem\"\nk1 = 0.5\nk2 = 2.0").is_err());
        assert!(Config::from_toml("[sweep]\nr1 = 2.0").is_err());
    }
}
