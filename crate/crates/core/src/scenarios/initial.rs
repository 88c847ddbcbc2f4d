use std::f64::consts::PI;
use std::sync::Arc;

use super::spec::{ScenarioKind, ScenarioSpec};
use crate::error::{Error, Result};
use crate::profile::ProfileSpec;
use crate::reduced_pde::{Field, Grid, MeanMode, Operators};

#[derive(Debug, Clone)]
pub struct InitialData {
    pub field: Field,
    /// Constant subtracted to enforce zero mean (projected mode).
    pub mean_removed: f64,
    /// Discrete C² proxy of the added perturbation (equals κ when κ > 0).
    pub perturbation_norm: f64,
    pub nu0: f64,
}

/// `max(|f|, |Df|, |D²f|)` with divided differences on the grid.
pub fn c2_proxy(z: &[f64], f: &[f64]) -> f64 {
    let mut m = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for j in 0..z.len() - 1 {
        m = m.max(((f[j + 1] - f[j]) / (z[j + 1] - z[j])).abs());
    }
    for j in 1..z.len() - 1 {
        let (h0, h1) = (z[j] - z[j - 1], z[j + 1] - z[j]);
        let d2 = 2.0 * ((f[j + 1] - f[j]) / h1 - (f[j] - f[j - 1]) / h0) / (h0 + h1);
        m = m.max(d2.abs());
    }
    m
}

/// `κ sin²(πZ) cos(2πmZ)` scaled to unit C² proxy.
pub fn perturbation(grid: &Grid, kappa: f64, m: u32) -> Vec<f64> {
    let z = grid.nodes();
    let raw: Vec<f64> = z.iter().map(|&x| (PI * x).sin().powi(2) * (2.0 * PI * m as f64 * x).cos()).collect();
    if kappa == 0.0 {
        return vec![0.0; z.len()];
    }
    let norm = c2_proxy(z, &raw);
    raw.into_iter().map(|v| kappa * v / norm).collect()
}

pub fn build_initial(spec: &ScenarioSpec, profile: &ProfileSpec, grid: Arc<Grid>) -> Result<InitialData> {
    spec.validate()?;
    if profile.beta() != spec.beta {
        return Err(Error::Contract(format!("profile β = {} but scenario β = {}", profile.beta(), spec.beta)));
    }
    let z = grid.nodes().to_vec();
    let nu0 = spec.resolved_nu0();
    let mut values: Vec<f64> = match spec.kind {
        ScenarioKind::SteadyState => z.iter().map(|&x| (2.0 * PI * spec.mode_k as f64 * x).cos()).collect(),
        ScenarioKind::PressurelessExact => {
            let t = spec.t_blowup;
            let zs: Vec<f64> = z.iter().map(|&x| x / nu0).collect();
            profile.eval_phi_batch(&zs)?.into_iter().map(|p| p / t).collect()
        }
        _ => {
            let zs: Vec<f64> = z.iter().map(|&x| x / nu0).collect();
            profile.eval_phi_batch(&zs)?.into_iter().map(|p| p / spec.lambda0).collect()
        }
    };
    let pert = perturbation(&grid, spec.kappa, spec.pert_m);
    values.iter_mut().zip(&pert).for_each(|(v, p)| *v += p);
    let perturbation_norm = if spec.kappa > 0.0 { c2_proxy(&z, &pert) } else { 0.0 };
    let mut mean_removed = 0.0;
    if spec.solver.mean_mode == MeanMode::Projected {
        let ops = Operators::new(&grid, spec.solver.scheme);
        mean_removed = ops.integral(&values);
        values.iter_mut().for_each(|v| *v -= mean_removed);
    }
    Ok(InitialData { field: Field::new(grid, values, 0.0)?, mean_removed, perturbation_norm, nu0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn perturbation_is_normalised() {
        let g = Grid::power(256, 2.0).unwrap();
        let p = perturbation(&g, 0.1, 2);
        assert_relative_eq!(c2_proxy(g.nodes(), &p), 0.1, max_relative = 1e-12);
        assert_eq!(p[0], 0.0);
    }

    #[test]
    fn smooth_data_without_mean_correction_is_the_profile() {
        let mut spec = ScenarioSpec::preset(ScenarioKind::Smooth);
        spec.lambda0 = 1e-3;
        spec.solver.mean_mode = MeanMode::Literal;
        let g = Arc::new(Grid::power(64, 2.0).unwrap());
        let p = ProfileSpec::new(0.0).unwrap();
        let init = build_initial(&spec, &p, g.clone()).unwrap();
        let nu0 = 1.0 / 1e3f64.ln();
        for (z, v) in g.nodes().iter().zip(&init.field.values) {
            assert_eq!(*v, (-z / nu0).exp() / 1e-3);
        }
    }

    #[test]
    fn projected_mode_reports_the_correction() {
        let mut spec = ScenarioSpec::preset(ScenarioKind::Smooth);
        spec.lambda0 = 1e-3;
        let g = Arc::new(Grid::power(512, 2.0).unwrap());
        let init = build_initial(&spec, &ProfileSpec::new(0.0).unwrap(), g).unwrap();
        // ∫ φ(Z/ν₀)/λ₀ ≈ ν₀/λ₀
        assert_relative_eq!(init.mean_removed, init.nu0 / 1e-3, max_relative = 1e-3);
    }

    #[test]
    fn steady_state_data() {
        let mut spec = ScenarioSpec::preset(ScenarioKind::SteadyState);
        spec.mode_k = 2;
        let g = Arc::new(Grid::uniform(32).unwrap());
        let init = build_initial(&spec, &ProfileSpec::new(0.0).unwrap(), g).unwrap();
        assert_relative_eq!(init.field.values[8], -1.0, epsilon = 1e-15);
    }
}
