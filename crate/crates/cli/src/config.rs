//! Run configuration. One JSON object per run; every section except `p` and
//! `n` has defaults, and unknown keys are rejected at every level.

use std::path::{Path, PathBuf};

use hardyopt_core::defaults;
use hardyopt_core::domain::{Limit, ProblemParams, ProfileForm, RadialDomain};
use hardyopt_core::optimality::{RayleighOptions, VerifySpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionKind {
    #[default]
    Case1,
    Case2,
    Alpha,
    TwoEnds,
    Interpolated,
    GroundStateQuotient,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r_lo: f64,
    pub r_hi: f64,
    pub nodes: usize,
    /// extra radii merged into the table
    #[serde(default)]
    pub include: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RayleighSection {
    pub starts: usize,
    pub rel_tol: f64,
    pub stall_window: usize,
    pub max_iter: usize,
    pub tie_tol: f64,
}

impl Default for RayleighSection {
    fn default() -> Self {
        let d = RayleighOptions::default();
        RayleighSection {
            starts: d.starts,
            rel_tol: d.rel_tol,
            stall_window: d.stall_window,
            max_iter: d.max_iter,
            tie_tol: d.tie_tol,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub nodes: usize,
    /// half-width of the widest window in the domain coordinate
    pub span: f64,
    pub mass_decades: usize,
    pub rayleigh: RayleighSection,
}

impl Default for VerifySection {
    fn default() -> Self {
        let d = VerifySpec::default();
        VerifySection { nodes: d.nodes, span: d.span, mass_decades: d.mass_decades, rayleigh: RayleighSection::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntegrandSpec {
    Indicator { lo: f64, hi: f64 },
    /// `(t-lo)^2 (hi-t)^2 (1 + k t)`
    Bump { lo: f64, hi: f64, #[serde(default)] k: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoareaSection {
    pub levels: usize,
    /// empty: two integrands placed inside the level range automatically
    pub integrands: Vec<IntegrandSpec>,
}

impl Default for CoareaSection {
    fn default() -> Self {
        CoareaSection { levels: 20, integrands: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RellichKind {
    #[default]
    Rellich,
    DaviesHinz,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RellichSection {
    pub kind: RellichKind,
    pub alpha: f64,
    /// exponent `δ > 1` of the Davies–Hinz form
    pub delta: f64,
    /// `v = r^exponent`; defaults to `2 - n`
    pub exponent: Option<f64>,
    pub family_size: usize,
}

impl Default for RellichSection {
    fn default() -> Self {
        RellichSection { kind: RellichKind::Rellich, alpha: 0.5, delta: 2.0, exponent: None, family_size: 100 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    /// defaults to `[1/p, 2/p]`
    pub gammas: Option<Vec<f64>>,
    pub eps: Vec<f64>,
}

impl Default for ProbeSection {
    fn default() -> Self {
        ProbeSection { gammas: None, eps: vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6] }
    }
}

fn unit() -> f64 {
    1.0
}

/// Closed-form profile `scale * form(r)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    /// `r^a`
    Power { a: f64, #[serde(default = "unit")] scale: f64 },
    /// `r^a - offset`
    PowerShift { a: f64, offset: f64, #[serde(default = "unit")] scale: f64 },
    /// `ln(radius / r)`
    Log { radius: f64, #[serde(default = "unit")] scale: f64 },
}

impl ProfileSpec {
    pub fn form_and_scale(&self) -> (ProfileForm, f64) {
        match *self {
            ProfileSpec::Power { a, scale } => (ProfileForm::Power { a }, scale),
            ProfileSpec::PowerShift { a, offset, scale } => (ProfileForm::PowerShift { a, offset }, scale),
            ProfileSpec::Log { radius, scale } => (ProfileForm::Log { radius }, scale),
        }
    }
}

fn default_domain() -> RadialDomain {
    RadialDomain::PuncturedSpace
}

fn default_indices() -> Vec<f64> {
    vec![10.0, 100.0, 1000.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub p: f64,
    pub n: u32,
    #[serde(default = "default_domain")]
    pub domain: RadialDomain,
    /// closed-form profile `scale * form(r)` replacing the catalog one
    #[serde(default)]
    pub profile: Option<ProfileSpec>,
    #[serde(default)]
    pub construction: ConstructionKind,
    /// exponent of the alpha, two-ends and interpolated constructions
    #[serde(default)]
    pub alpha: Option<f64>,
    /// inner limit for the constructions that need it; read off the
    /// profile when absent
    #[serde(default)]
    pub gamma: Option<f64>,
    /// end limits for the two-ends construction; read off the profile when
    /// absent
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default)]
    pub big_m: Option<Limit>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default = "default_indices")]
    pub sequence_indices: Vec<f64>,
    #[serde(default)]
    pub coarea: CoareaSection,
    #[serde(default)]
    pub rellich: RellichSection,
    #[serde(default)]
    pub probe: ProbeSection,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.params()?;
        self.domain.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let v = &self.verify;
        if v.nodes < defaults::MIN_GRID_NODES {
            return Err(CliError::Config(format!("verify.nodes must be at least {}", defaults::MIN_GRID_NODES)));
        }
        if !(v.span > 0.0 && v.span.is_finite()) {
            return Err(CliError::Config("verify.span must be positive".into()));
        }
        if v.rayleigh.starts == 0 || v.rayleigh.stall_window == 0 {
            return Err(CliError::Config("verify.rayleigh.starts and stall_window must be positive".into()));
        }
        if let Some(g) = &self.grid {
            if !(g.r_lo > 0.0 && g.r_lo < g.r_hi && g.nodes >= 2) {
                return Err(CliError::Config("grid needs 0 < r_lo < r_hi and at least 2 nodes".into()));
            }
        }
        if self.sequence_indices.iter().any(|k| !(*k >= 3.0 && k.is_finite())) {
            return Err(CliError::Config("sequence_indices must be finite and at least 3".into()));
        }
        if self.coarea.levels < 3 {
            return Err(CliError::Config("coarea.levels must be at least 3".into()));
        }
        if self.rellich.family_size == 0 {
            return Err(CliError::Config("rellich.family_size must be positive".into()));
        }
        if self.probe.eps.is_empty() {
            return Err(CliError::Config("probe.eps must not be empty".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ProblemParams, CliError> {
        ProblemParams::new(self.p, self.n).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn verify_spec(&self, exec: hardyopt_core::Exec) -> VerifySpec {
        let v = &self.verify;
        let r = &v.rayleigh;
        VerifySpec {
            nodes: v.nodes,
            span: v.span,
            null_indices: self.sequence_indices.clone(),
            mass_decades: v.mass_decades,
            rayleigh: RayleighOptions {
                starts: r.starts,
                rel_tol: r.rel_tol,
                stall_window: r.stall_window,
                max_iter: r.max_iter,
                tie_tol: r.tie_tol,
                seed: self.seed,
                exec,
            },
        }
    }
}
