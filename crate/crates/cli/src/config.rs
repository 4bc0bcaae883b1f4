//! JSON experiment configurations. One file fully determines one run; the
//! canonical echo written next to the outputs re-runs to identical bytes.

use heatbasis::caloric::{BallProblem, CaloricAtom};
use heatbasis::dobasis::{self, DensityConfig};
use heatbasis::domain::{BaseKind, Cylinder};
use heatbasis::potentials::PotentialResolution;
use heatbasis::sobolev::SpecKind;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    BesselZeros,
    GreenCheck,
    Basis,
    Density,
    Continue,
}

impl std::fmt::Display for CommandName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            CommandName::BesselZeros => "bessel-zeros",
            CommandName::GreenCheck => "green-check",
            CommandName::Basis => "basis",
            CommandName::Density => "density",
            CommandName::Continue => "continue",
        };
        f.write_str(name)
    }
}

/// Top-level configuration: the `command` tag selects the experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExperimentConfig {
    BesselZeros(BesselZerosConfig),
    GreenCheck(GreenCheckConfig),
    Basis(BasisConfig),
    Density(DensityRun),
    Continue(ContinueConfig),
}

impl ExperimentConfig {
    pub fn command(&self) -> CommandName {
        match self {
            ExperimentConfig::BesselZeros(_) => CommandName::BesselZeros,
            ExperimentConfig::GreenCheck(_) => CommandName::GreenCheck,
            ExperimentConfig::Basis(_) => CommandName::Basis,
            ExperimentConfig::Density(_) => CommandName::Density,
            ExperimentConfig::Continue(_) => CommandName::Continue,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            ExperimentConfig::BesselZeros(c) => c.validate(),
            ExperimentConfig::GreenCheck(c) => c.validate(),
            ExperimentConfig::Basis(c) => c.validate(),
            ExperimentConfig::Density(c) => c.validate(),
            ExperimentConfig::Continue(c) => c.validate(),
        }
    }
}

fn check_output_name(name: &str) -> Result<(), CliError> {
    if name.is_empty() || name.contains('/') || name.contains("..") {
        return Err(CliError::InvalidConfig(format!(
            "output name {name:?} must be a bare file name"
        )));
    }
    Ok(())
}

fn check_tolerance(value: f64, what: &str) -> Result<(), CliError> {
    if !(value > 0.0 && value < 1.0) {
        return Err(CliError::InvalidConfig(format!(
            "{what} = {value} must lie in (0, 1)"
        )));
    }
    Ok(())
}

/// Strict geometric containment of the small cylinder in the big one, with
/// matching time intervals.
fn check_nesting(omega: &Cylinder, big: &Cylinder) -> Result<(), CliError> {
    if omega.t_start() != big.t_start() || omega.t_end() != big.t_end() {
        return Err(CliError::InvalidConfig(
            "omega and big cylinders must share the time interval".into(),
        ));
    }
    match big.base().contains_domain(omega.base()) {
        Ok(true) => Ok(()),
        Ok(false) => Err(CliError::InvalidConfig(
            "omega base must lie strictly inside the big base".into(),
        )),
        Err(e) => Err(CliError::InvalidConfig(e.to_string())),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesselZerosConfig {
    pub orders: Vec<f64>,
    pub max_zero_index: usize,
    pub kinds: Vec<heatbasis::specialfn::ZeroKind>,
    #[serde(default = "default_bessel_output")]
    pub output: String,
}

fn default_bessel_output() -> String {
    "bessel_zeros.csv".into()
}

impl BesselZerosConfig {
    fn validate(&self) -> Result<(), CliError> {
        if self.orders.is_empty() || self.kinds.is_empty() || self.max_zero_index == 0 {
            return Err(CliError::InvalidConfig(
                "bessel-zeros needs orders, kinds and max_zero_index >= 1".into(),
            ));
        }
        if self.orders.iter().any(|&nu| nu < 0.0) {
            return Err(CliError::InvalidConfig("orders must be >= 0".into()));
        }
        check_output_name(&self.output)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbePoint {
    pub x: Vec<f64>,
    pub t: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenResolution {
    pub spatial: (usize, usize),
    pub surface: usize,
    pub time_per_level: usize,
    pub levels: usize,
}

impl From<GreenResolution> for PotentialResolution {
    fn from(r: GreenResolution) -> Self {
        PotentialResolution {
            spatial: r.spatial,
            surface: r.surface,
            time_per_level: r.time_per_level,
            levels: r.levels,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenCheckConfig {
    pub cylinder: Cylinder,
    pub targets: Vec<CaloricAtom>,
    pub probes: Vec<ProbePoint>,
    pub resolution: GreenResolution,
    #[serde(default = "default_green_output")]
    pub output: String,
}

fn default_green_output() -> String {
    "green_check.csv".into()
}

impl GreenCheckConfig {
    fn validate(&self) -> Result<(), CliError> {
        if !matches!(self.cylinder.base().kind(), BaseKind::Ball { .. }) {
            return Err(CliError::InvalidConfig(
                "green-check runs on ball-based cylinders".into(),
            ));
        }
        if self.targets.is_empty() || self.probes.is_empty() {
            return Err(CliError::InvalidConfig(
                "green-check needs at least one target and one probe".into(),
            ));
        }
        let n = self.cylinder.n();
        if self.probes.iter().any(|p| p.x.len() != n) {
            return Err(CliError::InvalidConfig(format!(
                "probe points must have {n} coordinates"
            )));
        }
        check_output_name(&self.output)
    }
}

/// Which atom families enter the dictionary. Separable atoms take the big
/// ball radius as their eigenvalue radius.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionaryRecipe {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_atoms: Option<EAtomRecipe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heat_polynomials: Option<HeatPolyRecipe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub static_harmonics: Option<StaticHarmonicRecipe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fundamental_shell: Option<ShellRecipe>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EAtomRecipe {
    pub k_max: usize,
    pub m_max: usize,
    pub problems: Vec<BallProblem>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatPolyRecipe {
    pub total_degree_max: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticHarmonicRecipe {
    pub k_max: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShellRecipe {
    pub per_ring: usize,
    pub shell_factor: f64,
}

impl DictionaryRecipe {
    pub fn build(&self, big: &Cylinder) -> Result<Vec<CaloricAtom>, CliError> {
        let n = big.n();
        let mut atoms = Vec::new();
        if let Some(e) = &self.e_atoms {
            let BaseKind::Ball { radius, .. } = *big.base().kind() else {
                return Err(CliError::InvalidConfig(
                    "e_atoms need a ball-based big cylinder".into(),
                ));
            };
            atoms.extend(dobasis::e_atom_family(
                n, radius, e.k_max, e.m_max, &e.problems,
            )?);
        }
        if let Some(h) = &self.heat_polynomials {
            atoms.extend(dobasis::heat_poly_family(n, h.total_degree_max)?);
        }
        if let Some(s) = &self.static_harmonics {
            for k in 0..=s.k_max {
                for j in 1..=heatbasis::specialfn::harmonic_dimension(n, k)? {
                    atoms.push(CaloricAtom::static_harmonic(n, k, j)?);
                }
            }
        }
        if let Some(shell) = &self.fundamental_shell {
            let BaseKind::Ball { radius, .. } = *big.base().kind() else {
                return Err(CliError::InvalidConfig(
                    "fundamental_shell needs a ball-based big cylinder".into(),
                ));
            };
            let times = dobasis::standard_ring_times(big.t_start(), big.t_end());
            atoms.extend(dobasis::translate_shell(
                n,
                shell.shell_factor * radius,
                &times,
                shell.per_ring,
            )?);
        }
        if atoms.is_empty() {
            return Err(CliError::InvalidConfig(
                "the dictionary recipe produced no atoms".into(),
            ));
        }
        Ok(atoms)
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(shell) = &self.fundamental_shell {
            if shell.per_ring == 0 || shell.shell_factor <= 1.0 {
                return Err(CliError::InvalidConfig(
                    "fundamental_shell needs per_ring >= 1 and shell_factor > 1".into(),
                ));
            }
        }
        if let Some(e) = &self.e_atoms {
            if e.m_max == 0 || e.problems.is_empty() {
                return Err(CliError::InvalidConfig(
                    "e_atoms need m_max >= 1 and at least one problem".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    pub omega: Cylinder,
    pub big: Cylinder,
    pub dictionary: DictionaryRecipe,
    pub spec_big: SpecKind,
    pub omega_resolution: (usize, usize, usize),
    pub big_resolution: (usize, usize, usize),
    pub rel_tol: f64,
    #[serde(default = "default_mu_output")]
    pub eigenvalues_output: String,
    #[serde(default = "default_diag_output")]
    pub diagnostics_output: String,
}

fn default_mu_output() -> String {
    "basis_mu.csv".into()
}

fn default_diag_output() -> String {
    "basis_diagnostics.csv".into()
}

impl BasisConfig {
    fn validate(&self) -> Result<(), CliError> {
        check_nesting(&self.omega, &self.big)?;
        check_tolerance(self.rel_tol, "rel_tol")?;
        self.dictionary.validate()?;
        check_output_name(&self.eigenvalues_output)?;
        check_output_name(&self.diagnostics_output)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityRun {
    pub experiment: DensityConfig,
    #[serde(default = "default_density_output")]
    pub output: String,
}

fn default_density_output() -> String {
    "density_curve.csv".into()
}

impl DensityRun {
    fn validate(&self) -> Result<(), CliError> {
        let e = &self.experiment;
        if !(e.t_start < e.t_end) {
            return Err(CliError::InvalidConfig(format!(
                "time interval [{}, {}] is degenerate",
                e.t_start, e.t_end
            )));
        }
        check_tolerance(e.rel_tol, "rel_tol")?;
        if e.angles_sweep.is_empty() {
            return Err(CliError::InvalidConfig("angles_sweep is empty".into()));
        }
        check_output_name(&self.output)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinueConfig {
    pub omega: Cylinder,
    pub big: Cylinder,
    pub dictionary: DictionaryRecipe,
    pub spec_big: SpecKind,
    pub omega_resolution: (usize, usize, usize),
    pub big_resolution: (usize, usize, usize),
    pub rel_tol: f64,
    /// the target sampled on omega, reconstructed on the big cylinder
    pub target: CaloricAtom,
    /// truncation levels to report; values beyond the rank are skipped
    pub truncation_sweep: Vec<usize>,
    pub probes: Vec<ProbePoint>,
    #[serde(default = "default_continue_output")]
    pub output: String,
}

fn default_continue_output() -> String {
    "continuation.csv".into()
}

impl ContinueConfig {
    fn validate(&self) -> Result<(), CliError> {
        check_nesting(&self.omega, &self.big)?;
        check_tolerance(self.rel_tol, "rel_tol")?;
        self.dictionary.validate()?;
        if self.truncation_sweep.is_empty() || self.probes.is_empty() {
            return Err(CliError::InvalidConfig(
                "continue needs a truncation sweep and probe points".into(),
            ));
        }
        let n = self.big.n();
        if self.probes.iter().any(|p| p.x.len() != n) {
            return Err(CliError::InvalidConfig(format!(
                "probe points must have {n} coordinates"
            )));
        }
        check_output_name(&self.output)
    }
}
