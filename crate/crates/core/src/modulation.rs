//! Modulation decomposition `a = λ⁻¹[φ(Z/ν) + ε(Z/ν)]` and its diagnostics.

use crate::characteristics::interp_linear;
use crate::error::{Error, Result};
use crate::par;
use crate::profile::ProfileSpec;
use crate::reduced_pde::{fornberg_weights, Field};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationState {
    pub t: f64,
    pub lambda: f64,
    pub nu: f64,
    /// Self-similar time; filled by [`selfsimilar_time`].
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonField {
    pub zgrid: Vec<f64>,
    pub values: Vec<f64>,
    /// `φ` on `zgrid`, so that `φ + ε = λ a(νz)`.
    pub phi: Vec<f64>,
    /// Set when requested points fell outside `[0, 1/ν]` and were clamped.
    pub clamped: bool,
}

/// Fraction of the profile used for the cusp fit, in units of ξ (`φ = 1/(1+ξ)`).
const FIT_XI: f64 = 0.2;
const FIT_MIN_NODES: usize = 6;

/// Recovers `(λ, ν)` from the gauge conditions at `Z = 0`.
///
/// `λ = 1/a(0)`. For β = 0, `ν = −a(0)/∂_Z a(0)`. For β > 0 the cusp
/// coefficient is fitted: `1 − λa ≈ c₁x + c₂x² + c₃x³ + c₄x⁴` with
/// `x = Z^{1/(β+1)}` on nodes where `φ ≥ 1/(1+0.2)`, optionally capped at
/// `Z ≤ fit_window`, and `ν = c₁^{−(β+1)}`.
pub fn extract_modulation(f: &Field, spec: &ProfileSpec, fit_window: Option<f64>) -> Result<ModulationState> {
    let z = f.grid.nodes();
    let a = &f.values;
    if !(a[0] > 0.0) {
        return Err(Error::Gauge(format!("a(t,0) = {} must be positive", a[0])));
    }
    let lambda = 1.0 / a[0];
    let beta = spec.beta();
    let nu = if beta == 0.0 {
        let w = fornberg_weights(0.0, &z[0..3], 1).pop().unwrap();
        let da0 = w[0] * a[0] + w[1] * a[1] + w[2] * a[2];
        if !(da0 < 0.0) {
            return Err(Error::Gauge(format!("∂_Z a(t,0) = {da0} must be negative")));
        }
        -a[0] / da0
    } else {
        cusp_fit(z, a, lambda, spec, fit_window)?
    };
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::Gauge(format!("degenerate spatial scale ν = {nu}")));
    }
    Ok(ModulationState { t: f.time, lambda, nu, s: 0.0 })
}

fn cusp_fit(z: &[f64], a: &[f64], lambda: f64, spec: &ProfileSpec, fit_window: Option<f64>) -> Result<f64> {
    let beta = spec.beta();
    let k = a.iter().position(|&v| lambda * v <= 0.5).ok_or_else(|| {
        Error::Gauge("λa never drops to 1/2: profile half-width not resolved".into())
    })?;
    let (y0, y1) = (lambda * a[k - 1], lambda * a[k]);
    let z_half = z[k - 1] + (y0 - 0.5) / (y0 - y1) * (z[k] - z[k - 1]);
    let nu_prelim = z_half / spec.z_of_xi(1.0)?;
    let mut top = spec.z_of_xi(FIT_XI)? * nu_prelim;
    if let Some(w) = fit_window {
        top = top.min(w);
    }
    let p = 1.0 / (beta + 1.0);
    let pts: Vec<(f64, f64)> = z
        .iter()
        .zip(a)
        .skip(1)
        .take_while(|(&zj, _)| zj <= top)
        .map(|(&zj, &aj)| (zj.powf(p), 1.0 - lambda * aj))
        .collect();
    if pts.len() < FIT_MIN_NODES {
        return Err(Error::Gauge(format!(
            "cusp fit window Z ≤ {top:.3e} holds {} nodes, need {FIT_MIN_NODES}",
            pts.len()
        )));
    }
    let xs = pts.last().unwrap().0;
    let basis = |x: f64| {
        let u = x / xs;
        [u, u * u, u * u * u, u * u * u * u]
    };
    let mut m = [[0.0; 4]; 4];
    let mut r = [0.0; 4];
    for &(x, y) in &pts {
        let b = basis(x);
        for i in 0..4 {
            r[i] += b[i] * y;
            for j in 0..4 {
                m[i][j] += b[i] * b[j];
            }
        }
    }
    let c = solve4(m, r).ok_or_else(|| Error::Gauge("singular cusp fit".into()))?;
    let c1 = c[0] / xs;
    if !(c1 > 0.0) {
        return Err(Error::Gauge(format!("cusp coefficient {c1} is not positive")));
    }
    Ok(c1.powf(-(beta + 1.0)))
}

fn solve4(mut m: [[f64; 4]; 4], mut r: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in col + 1..4 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
            r[row] -= f * r[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let s: f64 = (row + 1..4).map(|k| m[row][k] * x[k]).sum();
        x[row] = (r[row] - s) / m[row][row];
    }
    Some(x)
}

/// `ε(z) = λ a(νz) − φ(z)` on the image of the grid, `z_j = Z_j/ν`.
pub fn to_selfsimilar(f: &Field, m: &ModulationState, spec: &ProfileSpec) -> Result<EpsilonField> {
    check_time(f, m)?;
    let zgrid: Vec<f64> = f.grid.nodes().iter().map(|&zz| zz / m.nu).collect();
    let phi = spec.eval_phi_batch(&zgrid)?;
    let values = f.values.iter().zip(&phi).map(|(&a, &p)| m.lambda * a - p).collect();
    Ok(EpsilonField { zgrid, values, phi, clamped: false })
}

/// As [`to_selfsimilar`], resampled on `zgrid` by linear interpolation of `a`.
pub fn to_selfsimilar_on(f: &Field, m: &ModulationState, spec: &ProfileSpec, zgrid: &[f64]) -> Result<EpsilonField> {
    check_time(f, m)?;
    let zmax = 1.0 / m.nu;
    let mut clamped = false;
    let zs: Vec<f64> = zgrid
        .iter()
        .map(|&zz| {
            if zz > zmax || zz < 0.0 {
                clamped = true;
            }
            zz.clamp(0.0, zmax)
        })
        .collect();
    let phi = spec.eval_phi_batch(&zs)?;
    let values = zs
        .iter()
        .zip(&phi)
        .map(|(&zz, &p)| m.lambda * interp_linear(f.grid.nodes(), &f.values, m.nu * zz) - p)
        .collect();
    Ok(EpsilonField { zgrid: zs, values, phi, clamped })
}

fn check_time(f: &Field, m: &ModulationState) -> Result<()> {
    if (f.time - m.t).abs() > 1e-12 * f.time.abs().max(1.0) {
        return Err(Error::Contract(format!("state time {} differs from field time {}", m.t, f.time)));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    /// `w = z^{−2}` (β = 0).
    InverseSquare,
    /// `w = z^α e^{−Kz}` (β > 0).
    PowerExp { alpha: f64, big_k: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyConfig {
    pub beta: f64,
    /// Only meaningful for β > 0.
    pub eta: f64,
    /// Exponential decay target `e^{−δs}` (β > 0).
    pub delta: f64,
    pub alpha: f64,
    pub big_k: f64,
    pub zstar: f64,
}

impl EnergyConfig {
    pub fn new(beta: f64) -> Result<Self> {
        let eta = if beta > 0.0 { beta.min(1.0) / 2.0 } else { 0.0 };
        Self::with(beta, eta, 8.0, 4.0)
    }

    pub fn with(beta: f64, eta: f64, big_k: f64, zstar: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::constraint("beta ≥ 0", format!("got {beta}")));
        }
        if !(big_k >= 1.0) {
            return Err(Error::constraint("energy.k ≥ 1", format!("got {big_k}")));
        }
        if !(zstar >= 1.0) {
            return Err(Error::constraint("energy.zstar ≥ 1", format!("got {zstar}")));
        }
        if beta == 0.0 {
            return Ok(Self { beta, eta: 0.0, delta: 0.0, alpha: -2.0, big_k, zstar });
        }
        let cap = beta.min(1.0);
        if !(eta > 0.0 && eta < cap) {
            return Err(Error::constraint("0<η<min(β,1)", format!("got η = {eta}, min(β,1) = {cap}")));
        }
        let delta = 2.0 * cap - eta;
        let alpha = ((1.0 - beta).abs() - 2.0 + eta / 2.0) / (beta + 1.0);
        if !(alpha > -1.0 && alpha < 1.0) {
            return Err(Error::constraint("−1 < α < 1", format!("got α = {alpha}")));
        }
        Ok(Self { beta, eta, delta, alpha, big_k, zstar })
    }

    pub fn weight(&self) -> Weight {
        if self.beta == 0.0 {
            Weight::InverseSquare
        } else {
            Weight::PowerExp { alpha: self.alpha, big_k: self.big_k }
        }
    }

    /// Power-law decay targets for `(E1, E2)` when β = 0: both squares below `s^{−4/3}`.
    pub fn power_targets(&self) -> (f64, f64) {
        (-2.0 / 3.0, -2.0 / 3.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyE1 {
    pub value: f64,
    /// Analytic estimate of the first cell's share of `E1²`, included in `value`.
    pub first_cell: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub e1: f64,
    pub e1_first_cell: f64,
    pub e2: f64,
    pub config: EnergyConfig,
}

/// `E1 = (∫₀^{z*} w ε_z²)^{1/2}` from cellwise slopes.
///
/// Cells use the exact integral of the power part of `w` with `e^{−Kz}`
/// frozen at the midpoint. On the first cell `ε_z` follows the gauge decay
/// `ε_z ~ A z^q` (`q = 1` for β = 0, `2/(β+1) − 1` otherwise) with `A`
/// matched to the cell's mean slope.
pub fn energy_e1(e: &EpsilonField, cfg: &EnergyConfig) -> Result<EnergyE1> {
    let z = &e.zgrid;
    let v = &e.values;
    if z.len() < 2 || *z.last().unwrap() < cfg.zstar {
        return Err(Error::Domain(format!(
            "ε grid ends at {:.4e} < z* = {}",
            z.last().copied().unwrap_or(0.0),
            cfg.zstar
        )));
    }
    let (q, wpow, kk) = match cfg.weight() {
        Weight::InverseSquare => (1.0, -2.0, 0.0),
        Weight::PowerExp { alpha, big_k } => (2.0 / (cfg.beta + 1.0) - 1.0, alpha, big_k),
    };
    let power_integral = |a: f64, b: f64| {
        let e1 = wpow + 1.0;
        if e1.abs() < 1e-14 {
            (b / a).ln()
        } else {
            (b.powf(e1) - a.powf(e1)) / e1
        }
    };
    let z1 = z[1].min(cfg.zstar);
    let s0 = (interp_linear(z, v, z1) - v[0]) / z1;
    let amp = (q + 1.0) * s0 / z1.powf(q);
    let first_cell = amp * amp * z1.powf(wpow + 2.0 * q + 1.0) / (wpow + 2.0 * q + 1.0);
    let mut total = first_cell;
    for j in 1..z.len() - 1 {
        let a = z[j];
        if a >= cfg.zstar {
            break;
        }
        let b = z[j + 1].min(cfg.zstar);
        let vb = if b < z[j + 1] { interp_linear(z, v, b) } else { v[j + 1] };
        let slope = (vb - v[j]) / (b - a);
        total += slope * slope * power_integral(a, b) * (-kk * 0.5 * (a + b)).exp();
    }
    Ok(EnergyE1 { value: total.max(0.0).sqrt(), first_cell })
}

/// `E2 = sup |ε|` over `[z*, 1/ν]`.
pub fn energy_e2(e: &EpsilonField, cfg: &EnergyConfig, m: &ModulationState) -> Result<f64> {
    let top = 1.0 / m.nu;
    if cfg.zstar > top {
        return Err(Error::Domain(format!("z* = {} exceeds 1/ν = {top:.4e}", cfg.zstar)));
    }
    let mut sup = (interp_linear(&e.zgrid, &e.values, cfg.zstar)).abs();
    for (&zz, &v) in e.zgrid.iter().zip(&e.values) {
        if zz >= cfg.zstar && zz <= top * (1.0 + 1e-12) {
            sup = sup.max(v.abs());
        }
    }
    Ok(sup)
}

pub fn energies(e: &EpsilonField, cfg: &EnergyConfig, m: &ModulationState) -> Result<EnergyReport> {
    let e1 = energy_e1(e, cfg)?;
    Ok(EnergyReport { e1: e1.value, e1_first_cell: e1.first_cell, e2: energy_e2(e, cfg, m)?, config: *cfg })
}

/// Fills `s = s₀ + ∫ dt/λ` (trapezoid over the samples).
pub fn selfsimilar_time(states: &mut [ModulationState], s0: f64) -> Result<()> {
    if let Some(bad) = states.iter().find(|m| !(m.lambda > 0.0)) {
        return Err(Error::Contract(format!("nonpositive λ = {} at t = {}", bad.lambda, bad.t)));
    }
    let mut s = s0;
    for i in 0..states.len() {
        if i > 0 {
            let (p, c) = (states[i - 1], states[i]);
            if !(c.t > p.t) {
                return Err(Error::Contract("state times must increase".into()));
            }
            s += 0.5 * (c.t - p.t) * (1.0 / p.lambda + 1.0 / c.lambda);
        }
        states[i].s = s;
    }
    Ok(())
}

/// Large root of `s e^{−s} = λ₀`, the critical-case convention for `s₀`.
pub fn s0_critical(lambda0: f64) -> Result<f64> {
    let max = (-1.0f64).exp();
    if !(lambda0 > 0.0 && lambda0 < max) {
        return Err(Error::Domain(format!("s e^(-s) = {lambda0} has no root above s = 1")));
    }
    let mut s = -lambda0.ln();
    for _ in 0..100 {
        // Newton on g(s) = ln s − s − ln λ₀
        let g = s.ln() - s - lambda0.ln();
        let ds = g / (1.0 / s - 1.0);
        s -= ds;
        if ds.abs() < 1e-15 * s {
            break;
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRow {
    pub s: f64,
    /// `λ_s/λ + 1`.
    pub lhs1: f64,
    /// `(−ν_s/ν − β)/(β+1)`.
    pub lhs2: f64,
    /// `2ν ∫₀^{1/ν} (φ+ε)²`, always computed.
    pub rhs: f64,
    /// RHS the equations are compared against (zero without pressure).
    pub rhs_used: f64,
    /// `(lhs − rhs_used)/|rhs|`.
    pub res1: f64,
    pub res2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub rows: Vec<ResidualRow>,
    pub pressure_on: bool,
}

impl ResidualReport {
    pub fn max_abs(&self, range: std::ops::Range<usize>) -> (f64, f64) {
        self.rows[range].iter().fold((0.0, 0.0), |(a, b), r| (a.max(r.res1.abs()), b.max(r.res2.abs())))
    }
}

/// Residuals of both modulation equations.
///
/// Derivatives in `s` are second-order (one-sided at the ends). Without
/// pressure the equations are compared against zero, and the pressure RHS
/// that would have been present is still reported.
pub fn modulation_residual(
    states: &[ModulationState],
    eps: &[EpsilonField],
    beta: f64,
    pressure_on: bool,
) -> Result<ResidualReport> {
    let n = states.len();
    if n < 3 {
        return Err(Error::Contract(format!("modulation residual needs ≥ 3 states, got {n}")));
    }
    if eps.len() != n {
        return Err(Error::Contract("one ε field per state required".into()));
    }
    let s: Vec<f64> = states.iter().map(|m| m.s).collect();
    if s.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Contract("self-similar times must increase".into()));
    }
    let ll: Vec<f64> = states.iter().map(|m| m.lambda.ln()).collect();
    let ln: Vec<f64> = states.iter().map(|m| m.nu.ln()).collect();
    let rows = (0..n)
        .map(|i| {
            let (idx, w) = three_point(&s, i);
            let d = |v: &[f64]| w[0] * v[idx[0]] + w[1] * v[idx[1]] + w[2] * v[idx[2]];
            let lhs1 = d(&ll) + 1.0;
            let lhs2 = (-d(&ln) - beta) / (beta + 1.0);
            let rhs = 2.0 * states[i].nu * trapezoid_sq(&eps[i].zgrid, &eps[i], 1.0 / states[i].nu);
            let rhs_used = if pressure_on { rhs } else { 0.0 };
            let scale = rhs.abs().max(f64::MIN_POSITIVE);
            ResidualRow {
                s: s[i],
                lhs1,
                lhs2,
                rhs,
                rhs_used,
                res1: (lhs1 - rhs_used) / scale,
                res2: (lhs2 - rhs_used) / scale,
            }
        })
        .collect();
    Ok(ResidualReport { rows, pressure_on })
}

fn trapezoid_sq(z: &[f64], e: &EpsilonField, top: f64) -> f64 {
    let f = |j: usize| {
        let u = e.phi[j] + e.values[j];
        u * u
    };
    let mut acc = 0.0;
    for j in 0..z.len() - 1 {
        if z[j] >= top {
            break;
        }
        acc += 0.5 * (z[j + 1] - z[j]) * (f(j) + f(j + 1));
    }
    acc
}

/// Nodes and weights of a three-point first-derivative stencil at `i`.
fn three_point(s: &[f64], i: usize) -> ([usize; 3], [f64; 3]) {
    let n = s.len();
    let start = i.saturating_sub(1).min(n - 3);
    let idx = [start, start + 1, start + 2];
    let w = fornberg_weights(s[i], &[s[idx[0]], s[idx[1]], s[idx[2]]], 1).pop().unwrap();
    (idx, [w[0], w[1], w[2]])
}

/// Extraction and energies for a batch of snapshots, in parallel.
///
/// Energies are NaN for states whose self-similar domain does not reach `z*`.
pub fn decompose_all(
    snapshots: &[Field],
    spec: &ProfileSpec,
    cfg: &EnergyConfig,
    fit_window: Option<f64>,
) -> Result<Vec<(ModulationState, EpsilonField, EnergyReport)>> {
    par::try_map(snapshots, |f| {
        let m = extract_modulation(f, spec, fit_window)?;
        let e = to_selfsimilar(f, &m, spec)?;
        let r = match energies(&e, cfg, &m) {
            Err(Error::Domain(_)) => {
                EnergyReport { e1: f64::NAN, e1_first_cell: f64::NAN, e2: f64::NAN, config: *cfg }
            }
            r => r?,
        };
        Ok((m, e, r))
    })
}

/// Builds `a(Z) = λ⁻¹ φ(Z/ν)` on a grid (used to test gauge recovery).
pub fn synthesize(grid: std::sync::Arc<crate::reduced_pde::Grid>, lambda: f64, nu: f64, spec: &ProfileSpec, t: f64) -> Result<Field> {
    let zs: Vec<f64> = grid.nodes().iter().map(|&zz| zz / nu).collect();
    let phi = spec.eval_phi_batch(&zs)?;
    Field::new(grid, phi.into_iter().map(|p| p / lambda).collect(), t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduced_pde::Grid;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    #[test]
    fn beta_zero_exact_profile() {
        let g = Arc::new(Grid::power(2000, 2.0).unwrap());
        let spec = ProfileSpec::new(0.0).unwrap();
        let f = Field::from_fn(g, 0.0, |z| 100.0 * (-z / 0.1).exp()).unwrap();
        let m = extract_modulation(&f, &spec, None).unwrap();
        assert_relative_eq!(m.lambda, 0.01, max_relative = 1e-14);
        assert_relative_eq!(m.nu, 0.1, max_relative = 1e-6);
        let e = to_selfsimilar(&f, &m, &spec).unwrap();
        assert_eq!(e.values[0], 0.0);
        assert!(e.values.iter().all(|v| v.abs() < 1e-5));
    }

    #[test]
    fn cusp_fit_recovers_scale() {
        let g = Arc::new(Grid::geometric(512, 1e-16).unwrap());
        let spec = ProfileSpec::new(1.0).unwrap();
        let f = synthesize(g, 0.02, 0.05, &spec, 0.0).unwrap();
        let m = extract_modulation(&f, &spec, None).unwrap();
        assert_relative_eq!(m.lambda, 0.02, max_relative = 1e-14);
        assert_relative_eq!(m.nu, 0.05, max_relative = 1e-3);
    }

    #[test]
    fn gauge_errors() {
        let g = Arc::new(Grid::uniform(32).unwrap());
        let spec = ProfileSpec::new(0.0).unwrap();
        let neg = Field::from_fn(g.clone(), 0.0, |z| z - 1.0).unwrap();
        assert!(matches!(extract_modulation(&neg, &spec, None), Err(Error::Gauge(_))));
        let up = Field::from_fn(g, 0.0, |z| 1.0 + z).unwrap();
        assert!(matches!(extract_modulation(&up, &spec, None), Err(Error::Gauge(_))));
    }

    #[test]
    fn e1_of_quadratic_with_inverse_square_weight() {
        let n = 4000;
        let zgrid: Vec<f64> = (0..=n).map(|j| j as f64 / n as f64).collect();
        let values: Vec<f64> = zgrid.iter().map(|z| z * z).collect();
        let e = EpsilonField { phi: vec![0.0; zgrid.len()], zgrid, values, clamped: false };
        let cfg = EnergyConfig::with(0.0, 0.0, 1.0, 1.0).unwrap();
        let e1 = energy_e1(&e, &cfg).unwrap();
        assert_relative_eq!(e1.value, 2.0, max_relative = 1e-3);
    }

    #[test]
    fn energy_config_constraints() {
        let c = EnergyConfig::with(1.0, 0.5, 8.0, 4.0).unwrap();
        assert_relative_eq!(c.alpha, -0.875);
        assert_relative_eq!(c.delta, 1.5);
        match EnergyConfig::with(0.5, 0.5, 8.0, 4.0) {
            Err(Error::Constraint { constraint, .. }) => assert_eq!(constraint, "0<η<min(β,1)"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn selfsimilar_time_closed_forms() {
        let mut st: Vec<ModulationState> = (0..=100)
            .map(|i| {
                let t = i as f64 * 0.009;
                ModulationState { t, lambda: 1.0 - t, nu: 1.0, s: 0.0 }
            })
            .collect();
        selfsimilar_time(&mut st, 2.0).unwrap();
        let last = st.last().unwrap();
        assert_relative_eq!(last.s, 2.0 + (1.0 / (1.0 - last.t)).ln(), max_relative = 1e-3);
    }

    #[test]
    fn s0_critical_solves_convention() {
        let s = s0_critical(1e-4).unwrap();
        assert_relative_eq!(s * (-s).exp(), 1e-4, max_relative = 1e-12);
        assert!(s > 1.0);
    }

    #[test]
    fn synthetic_parameter_odes_have_zero_residual() {
        let beta = 0.5;
        let states: Vec<ModulationState> = (0..20)
            .map(|i| {
                let s = 1.0 + 0.1 * i as f64;
                ModulationState { t: s, lambda: (-s).exp(), nu: 0.3 * (-beta * s).exp(), s }
            })
            .collect();
        let eps: Vec<EpsilonField> = states
            .iter()
            .map(|m| {
                let zgrid: Vec<f64> = (0..=64).map(|j| j as f64 / 64.0 / m.nu).collect();
                let phi = vec![0.5; zgrid.len()];
                EpsilonField { values: vec![0.0; zgrid.len()], phi, zgrid, clamped: false }
            })
            .collect();
        let rep = modulation_residual(&states, &eps, beta, false).unwrap();
        for r in &rep.rows {
            assert!(r.res1.abs() < 1e-6 && r.res2.abs() < 1e-6);
            assert!(r.rhs > 0.0);
        }
    }
}
