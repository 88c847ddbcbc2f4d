//! Canonical scenarios: presets, initial data, the analysis pipeline and sweeps.

mod initial;
mod lift;
mod pipeline;
mod spec;
mod sweep;

pub use initial::{build_initial, c2_proxy, perturbation, InitialData};
pub use lift::{incompressibility_residual, lift_to_2d, momentum_residual, Lift2d};
pub use pipeline::{last_decade, run_scenario, Bundle, DecaySlopes, FitSummary, ModulationRow, Verdict};
pub use spec::{FitConfig, GridSpec, ScenarioKind, ScenarioSpec};
pub use sweep::{kappa_sweep, sweep, sweep_seq, KappaPoint};
