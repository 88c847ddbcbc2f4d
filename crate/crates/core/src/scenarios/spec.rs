use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::modulation::EnergyConfig;
use crate::reduced_pde::{Grid, MeanMode, Scheme, SolverConfig, SupStop};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Smooth,
    Nonsmooth,
    PressurelessExact,
    SteadyState,
    Custom,
}

impl FromStr for ScenarioKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "smooth" => Self::Smooth,
            "nonsmooth" => Self::Nonsmooth,
            "pressureless_exact" => Self::PressurelessExact,
            "steady_state" => Self::SteadyState,
            "custom" => Self::Custom,
            _ => return Err(format!("unknown scenario kind `{s}`")),
        })
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Smooth => "smooth",
            Self::Nonsmooth => "nonsmooth",
            Self::PressurelessExact => "pressureless_exact",
            Self::SteadyState => "steady_state",
            Self::Custom => "custom",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    Power { n: usize, g: f64 },
    Geometric { n: usize, z_min: f64 },
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        match *self {
            GridSpec::Power { n, g } => Grid::power(n, g),
            GridSpec::Geometric { n, z_min } => Grid::geometric(n, z_min),
        }
    }

    pub fn cells(&self) -> usize {
        match *self {
            GridSpec::Power { n, .. } | GridSpec::Geometric { n, .. } => n,
        }
    }

    pub fn with_cells(&self, n: usize) -> Self {
        match *self {
            GridSpec::Power { g, .. } => GridSpec::Power { n, g },
            GridSpec::Geometric { z_min, .. } => GridSpec::Geometric { n, z_min },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    /// Tail fraction of norm records used for the blow-up time.
    pub window_frac: f64,
    /// Tail fraction of modulation states used for the power-law ν fit.
    pub nu_window_frac: f64,
    /// The trapped window starts this much self-similar time after the first state.
    pub trap_delay: f64,
    /// Optional cap on the cusp-fit window in `Z`.
    pub cusp_window: Option<f64>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { window_frac: 0.25, nu_window_frac: 0.5, trap_delay: 1.0, cusp_window: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub beta: f64,
    pub lambda0: f64,
    /// Explicit ν₀; otherwise derived from the kind.
    pub nu0: Option<f64>,
    /// ν̃₀ = ν₀/λ₀^β for nonsmooth data.
    pub nu_tilde0: Option<f64>,
    pub nu_tilde_star: f64,
    pub kappa: f64,
    /// Frequency of the perturbation `sin²(πZ) cos(2πmZ)`.
    pub pert_m: u32,
    /// Mode of the steady state `cos(2πkZ)`.
    pub mode_k: u32,
    /// Blow-up time of the pressureless exact solution.
    pub t_blowup: f64,
    pub horizon: f64,
    pub grid: GridSpec,
    pub solver: SolverConfig,
    pub energy: EnergyConfig,
    pub fit: FitConfig,
    pub outputs_dir: String,
}

impl ScenarioSpec {
    /// Defaults for each kind.
    pub fn preset(kind: ScenarioKind) -> Self {
        let solver = SolverConfig::default();
        let base = Self {
            kind,
            beta: 0.0,
            lambda0: 1e-4,
            nu0: None,
            nu_tilde0: None,
            nu_tilde_star: 1.0,
            kappa: 0.0,
            pert_m: 1,
            mode_k: 1,
            t_blowup: 1.0,
            horizon: 1.0,
            grid: GridSpec::Power { n: 512, g: 2.0 },
            solver: SolverConfig { mean_mode: MeanMode::Projected, ..solver },
            energy: EnergyConfig::new(0.0).expect("β = 0 energy defaults"),
            fit: FitConfig::default(),
            outputs_dir: format!("out/{kind}"),
        };
        match kind {
            ScenarioKind::Smooth | ScenarioKind::Custom => base,
            ScenarioKind::Nonsmooth => Self {
                beta: 1.0,
                lambda0: 1e-3,
                nu_tilde0: Some(0.5),
                grid: GridSpec::Geometric { n: 512, z_min: 1e-16 },
                solver: SolverConfig { sup_stop: SupStop::Factor(1e3), ..base.solver.clone() },
                energy: EnergyConfig::new(1.0).expect("β = 1 energy defaults"),
                ..base
            },
            ScenarioKind::PressurelessExact => Self {
                beta: 1.0,
                lambda0: 1.0,
                horizon: 0.5,
                grid: GridSpec::Geometric { n: 512, z_min: 1e-16 },
                solver: SolverConfig { pressure_on: false, mean_mode: MeanMode::Literal, ..base.solver.clone() },
                energy: EnergyConfig::new(1.0).expect("β = 1 energy defaults"),
                ..base
            },
            ScenarioKind::SteadyState => Self {
                lambda0: 1.0,
                horizon: 5.0,
                grid: GridSpec::Power { n: 512, g: 1.0 },
                solver: SolverConfig {
                    mean_mode: MeanMode::Literal,
                    scheme: Scheme::Upwind5,
                    snapshot_every: 0,
                    ..base.solver.clone()
                },
                ..base
            },
        }
    }

    /// ν₀ after applying the kind's convention.
    pub fn resolved_nu0(&self) -> f64 {
        if let Some(v) = self.nu0 {
            return v;
        }
        match self.kind {
            ScenarioKind::Nonsmooth => self.nu_tilde0.unwrap_or(0.5) * self.lambda0.powf(self.beta),
            ScenarioKind::PressurelessExact => self.t_blowup.powf(self.beta),
            ScenarioKind::SteadyState => 1.0,
            _ => 1.0 / (1.0 / self.lambda0).ln(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::constraint("beta ≥ 0", format!("got {}", self.beta)));
        }
        if !(self.lambda0 > 0.0) {
            return Err(Error::constraint("lambda0 > 0", format!("got {}", self.lambda0)));
        }
        if !(self.kappa >= 0.0) {
            return Err(Error::constraint("kappa ≥ 0", format!("got {}", self.kappa)));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::constraint("horizon > 0", format!("got {}", self.horizon)));
        }
        if (self.energy.beta - self.beta).abs() > 0.0 {
            return Err(Error::Contract("energy config built for a different β".into()));
        }
        self.solver.validate()?;
        let nu0 = self.resolved_nu0();
        if !(nu0 > 0.0) {
            return Err(Error::constraint("nu0 > 0", format!("got {nu0}")));
        }
        match self.kind {
            ScenarioKind::Smooth => {
                if self.beta != 0.0 {
                    return Err(Error::constraint("beta = 0 for smooth data", format!("got {}", self.beta)));
                }
                if !(self.lambda0 < 1.0) {
                    return Err(Error::constraint("lambda0 < 1", format!("got {}", self.lambda0)));
                }
                let l = (1.0 / self.lambda0).ln();
                let (lo, hi) = (2.0 / (3.0 * l), 3.0 / (2.0 * l));
                if !(nu0 >= lo && nu0 <= hi) {
                    return Err(Error::constraint(
                        "2/(3 log(1/λ₀)) ≤ ν₀ ≤ 3/(2 log(1/λ₀))",
                        format!("ν₀ = {nu0} outside [{lo}, {hi}]"),
                    ));
                }
            }
            ScenarioKind::Nonsmooth => {
                if !(self.beta > 0.0) {
                    return Err(Error::constraint("beta > 0 for nonsmooth data", format!("got {}", self.beta)));
                }
                let nt = nu0 / self.lambda0.powf(self.beta);
                if !(nt > 0.0 && nt <= self.nu_tilde_star) {
                    return Err(Error::constraint(
                        "0 < ν̃₀ = ν₀/λ₀^β ≤ ν̃₀*",
                        format!("ν̃₀ = {nt}, ν̃₀* = {}", self.nu_tilde_star),
                    ));
                }
            }
            ScenarioKind::PressurelessExact => {
                if !(self.t_blowup > 0.0) {
                    return Err(Error::constraint("T > 0", format!("got {}", self.t_blowup)));
                }
                if !(self.horizon < self.t_blowup) {
                    return Err(Error::constraint("horizon < T", format!("{} ≥ {}", self.horizon, self.t_blowup)));
                }
            }
            ScenarioKind::SteadyState => {
                if self.mode_k == 0 {
                    return Err(Error::constraint("k ≥ 1", "got 0"));
                }
            }
            ScenarioKind::Custom => {}
        }
        Ok(())
    }
}
