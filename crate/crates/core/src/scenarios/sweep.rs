use serde::Serialize;

use super::pipeline::{run_scenario, Bundle};
use super::spec::ScenarioSpec;
use crate::error::Result;
use crate::par;

/// Runs independent scenarios, in parallel when the feature is enabled.
pub fn sweep(specs: &[ScenarioSpec]) -> Vec<Result<Bundle>> {
    par::map(specs, run_scenario)
}

pub fn sweep_seq(specs: &[ScenarioSpec]) -> Vec<Result<Bundle>> {
    par::map_seq(specs, run_scenario)
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaPoint {
    pub kappa: f64,
    pub lambda0: f64,
    pub t_blowup: Option<f64>,
    pub log_law_tail: Option<f64>,
    pub passed: bool,
    pub error: Option<String>,
}

/// Grid of perturbation sizes against `λ₀` on top of a base spec.
pub fn kappa_sweep(base: &ScenarioSpec, kappas: &[f64], lambdas: &[f64]) -> Vec<KappaPoint> {
    let specs: Vec<ScenarioSpec> = lambdas
        .iter()
        .flat_map(|&l| kappas.iter().map(move |&k| (l, k)))
        .map(|(l, k)| ScenarioSpec { kappa: k, lambda0: l, ..base.clone() })
        .collect();
    sweep(&specs)
        .into_iter()
        .zip(&specs)
        .map(|(r, s)| match r {
            Ok(b) => KappaPoint {
                kappa: s.kappa,
                lambda0: s.lambda0,
                t_blowup: b.fits.t_blowup,
                log_law_tail: b.fits.log_law_tail,
                passed: b.passed(),
                error: None,
            },
            Err(e) => KappaPoint {
                kappa: s.kappa,
                lambda0: s.lambda0,
                t_blowup: None,
                log_law_tail: None,
                passed: false,
                error: Some(e.to_string()),
            },
        })
        .collect()
}
