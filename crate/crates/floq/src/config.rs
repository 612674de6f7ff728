//! TOML-backed run configuration for the command-line front end.
//!
//! Every section is optional and every field has a default, so an empty file
//! is a valid configuration (the ideal small junction). Complex amplitudes
//! are written as two-element `[re, im]` arrays:
//!
//! ```toml
//! [model]
//! n_l = 3
//! n_m = 2
//! n_r = 2
//!
//! [model.couplings.l]
//! intra1 = [0.0, 1.5]
//! inter2 = [0.0, 3.0]
//! ```
//!
//! Omitting `[model.couplings]` entirely selects the ideal drive amplitudes;
//! inside an explicit couplings table, omitted amplitudes are zero. Unknown
//! keys are rejected so typos fail loudly instead of silently reverting to
//! defaults.

use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{ProtocolKind, StaticSweepConfig, SweepConfig};
use crate::lattice::{BranchCouplings, DisorderFamilies, DisorderSpec, YJunctionSpec};
use crate::protocols::{ModeKind, StaticChainSpec, StaticMode, StaticProtocol};

/// A complex amplitude as it appears in TOML: `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexAmp(pub [f64; 2]);

impl ComplexAmp {
    pub const ZERO: ComplexAmp = ComplexAmp([0.0, 0.0]);

    pub fn to_c64(self) -> C64 {
        C64::new(self.0[0], self.0[1])
    }
}

impl From<C64> for ComplexAmp {
    fn from(z: C64) -> Self {
        ComplexAmp([z.re, z.im])
    }
}

/// Drive amplitudes of one branch, one table per branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BranchSection {
    pub intra1: ComplexAmp,
    pub inter1: ComplexAmp,
    pub intra2: ComplexAmp,
    pub inter2: ComplexAmp,
}

impl Default for BranchSection {
    fn default() -> Self {
        BranchSection {
            intra1: ComplexAmp::ZERO,
            inter1: ComplexAmp::ZERO,
            intra2: ComplexAmp::ZERO,
            inter2: ComplexAmp::ZERO,
        }
    }
}

impl BranchSection {
    fn to_couplings(self) -> BranchCouplings {
        BranchCouplings {
            intra1: self.intra1.to_c64(),
            inter1: self.inter1.to_c64(),
            intra2: self.intra2.to_c64(),
            inter2: self.inter2.to_c64(),
        }
    }

    pub fn from_couplings(c: &BranchCouplings) -> Self {
        BranchSection {
            intra1: c.intra1.into(),
            inter1: c.inter1.into(),
            intra2: c.intra2.into(),
            inter2: c.inter2.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingsSection {
    pub l: BranchSection,
    pub m: BranchSection,
    pub r: BranchSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub n_l: usize,
    pub n_m: usize,
    pub n_r: usize,
    /// Explicit drive amplitudes; omit for the ideal point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub couplings: Option<CouplingsSection>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection { n_l: 3, n_m: 2, n_r: 2, couplings: None }
    }
}

impl ModelSection {
    pub fn to_spec(&self) -> Result<YJunctionSpec> {
        let spec = match &self.couplings {
            None => YJunctionSpec::ideal(self.n_l, self.n_m, self.n_r),
            Some(c) => YJunctionSpec {
                n_l: self.n_l,
                n_m: self.n_m,
                n_r: self.n_r,
                l: c.l.to_couplings(),
                m: c.m.to_couplings(),
                r: c.r.to_couplings(),
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Named disorder families, as they appear in the `families` list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    IntraFirst,
    InterSecond,
    AddedL,
    AddedR,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisorderSection {
    pub w: f64,
    pub families: Vec<FamilyName>,
    pub seed: u64,
}

impl Default for DisorderSection {
    fn default() -> Self {
        DisorderSection {
            w: 0.0,
            families: vec![
                FamilyName::IntraFirst,
                FamilyName::InterSecond,
                FamilyName::AddedL,
                FamilyName::AddedR,
            ],
            seed: 0,
        }
    }
}

impl DisorderSection {
    pub fn to_families(&self) -> DisorderFamilies {
        let mut f = DisorderFamilies {
            intra_first: false,
            inter_second: false,
            added_l: false,
            added_r: false,
        };
        for name in &self.families {
            match name {
                FamilyName::IntraFirst => f.intra_first = true,
                FamilyName::InterSecond => f.inter_second = true,
                FamilyName::AddedL => f.added_l = true,
                FamilyName::AddedR => f.added_r = true,
            }
        }
        f
    }

    pub fn to_spec(&self) -> Result<DisorderSpec> {
        let spec = DisorderSpec { w: self.w, families: self.to_families(), seed: self.seed };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransferMode {
    Stepwise,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransferSection {
    pub mode: TransferMode,
    /// Periods per schedule step in the stepwise protocol.
    pub periods_per_step: usize,
    /// Total periods in the two-stage direct protocol (must be even).
    pub direct_total_periods: usize,
    /// Which edge mode to carry.
    pub target_mode: ModeKind,
}

impl Default for TransferSection {
    fn default() -> Self {
        TransferSection {
            mode: TransferMode::Stepwise,
            periods_per_step: 40,
            direct_total_periods: 160,
            target_mode: ModeKind::Zero,
        }
    }
}

impl TransferSection {
    pub fn kind(&self) -> ProtocolKind {
        match self.mode {
            TransferMode::Stepwise => {
                ProtocolKind::TransferStepwise { periods_per_step: self.periods_per_step }
            }
            TransferMode::Direct => {
                ProtocolKind::TransferDirect { total_periods: self.direct_total_periods }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntangleSection {
    pub periods_per_step: usize,
    /// How many times to run the whole three-step sequence back to back.
    pub applications: usize,
}

impl Default for EntangleSection {
    fn default() -> Self {
        EntangleSection { periods_per_step: 200, applications: 1 }
    }
}

impl EntangleSection {
    pub fn kind(&self) -> ProtocolKind {
        ProtocolKind::Entangle { periods_per_step: self.periods_per_step }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub w_grid: Vec<f64>,
    pub realizations: usize,
    pub master_seed: u64,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            w_grid: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            realizations: 100,
            master_seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StaticSection {
    pub n_q: usize,
    pub g: f64,
    /// Total sweep time; omitted → `π/(0.01·g)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_total: Option<f64>,
    /// Integrator step; omitted → `0.01/g`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub mode: StaticMode,
    pub gap_samples: usize,
}

impl Default for StaticSection {
    fn default() -> Self {
        StaticSection {
            n_q: 21,
            g: 1.0,
            t_total: None,
            dt: None,
            mode: StaticMode::Original,
            gap_samples: 201,
        }
    }
}

impl StaticSection {
    pub fn chain(&self) -> Result<StaticChainSpec> {
        let spec = StaticChainSpec { n_q: self.n_q, g: self.g };
        spec.validate()?;
        Ok(spec)
    }

    pub fn resolved_t_total(&self) -> f64 {
        self.t_total.unwrap_or(std::f64::consts::PI / (0.01 * self.g))
    }

    pub fn resolved_dt(&self) -> f64 {
        self.dt.unwrap_or(0.01 / self.g)
    }

    pub fn protocol(&self, mode: StaticMode) -> Result<StaticProtocol> {
        StaticProtocol::new(self.chain()?, mode, self.resolved_t_total(), self.resolved_dt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseDiagramSection {
    /// Grid cells per axis.
    pub grid: usize,
    /// Distance kept from the axes and the `π` edges.
    pub margin: f64,
    /// Brillouin-zone discretization for the winding integrals.
    pub k_points: usize,
}

impl Default for PhaseDiagramSection {
    fn default() -> Self {
        PhaseDiagramSection { grid: 50, margin: 0.02, k_points: 1024 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    /// Record a spectrum row every this many periods.
    pub sample_every: usize,
    /// Edge modes excluded from the bulk when measuring the gap.
    pub expected_zero_modes: usize,
    pub expected_pi_modes: usize,
    /// Window (in quasienergy) for the reported mode counts.
    pub mode_tol: f64,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection {
            sample_every: 1,
            expected_zero_modes: 1,
            expected_pi_modes: 1,
            mode_tol: 0.3,
        }
    }
}

/// The whole configuration file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub model: ModelSection,
    pub disorder: DisorderSection,
    pub transfer: TransferSection,
    pub entangle: EntangleSection,
    pub sweep: SweepSection,
    #[serde(rename = "static")]
    pub static_chain: StaticSection,
    pub phase_diagram: PhaseDiagramSection,
    pub spectrum: SpectrumSection,
}

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Config> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Config> {
        toml::from_str(text).map_err(|e| Error::config(format!("config parse: {e}")))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::backend(format!("config serialize: {e}")))
    }

    pub fn model_spec(&self) -> Result<YJunctionSpec> {
        self.model.to_spec()
    }

    /// Disorder sweep over the transfer protocol selected by `[transfer]`.
    pub fn transfer_sweep(&self) -> Result<SweepConfig> {
        let cfg = SweepConfig {
            spec: self.model_spec()?,
            protocol: self.transfer.kind(),
            mode: self.transfer.target_mode,
            w_grid: self.sweep.w_grid.clone(),
            realizations: self.sweep.realizations,
            master_seed: self.sweep.master_seed,
            families: self.disorder.to_families(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Disorder sweep over the entangling sequence.
    pub fn entangle_sweep(&self) -> Result<SweepConfig> {
        let cfg = SweepConfig {
            spec: self.model_spec()?,
            protocol: self.entangle.kind(),
            mode: ModeKind::Zero,
            w_grid: self.sweep.w_grid.clone(),
            realizations: self.sweep.realizations,
            master_seed: self.sweep.master_seed,
            families: self.disorder.to_families(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Paired original-vs-stepwise comparison on the static chain.
    pub fn static_sweep(&self) -> Result<StaticSweepConfig> {
        let cfg = StaticSweepConfig {
            original: self.static_chain.protocol(StaticMode::Original)?,
            improved: self.static_chain.protocol(StaticMode::Stepwise)?,
            w_grid: self.sweep.w_grid.clone(),
            realizations: self.sweep.realizations,
            master_seed: self.sweep.master_seed,
            gap_samples: self.static_chain.gap_samples,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
