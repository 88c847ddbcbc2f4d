//! Acceptance suite: thirteen criteria, each a list of pinned checks.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use crate::characteristics::{compare_to_eulerian, integrate_characteristics};
use crate::error::{Error, Result};
use crate::par;
use crate::profile::{self, ProfileSpec};
use crate::reduced_pde::{mean_evolution_check, rhs, Field, Grid, MeanMode, Scheme, Solver, SolverConfig, SupStop};
use crate::scaling_laws::{self, DecayLaw, LawMode};
use crate::scenarios::{build_initial, lift_to_2d, momentum_residual, run_scenario, Bundle, ScenarioKind, ScenarioSpec};

pub mod tol {
    pub const PROFILE_RESIDUAL: f64 = 1e-8;
    pub const EXP_BRANCH_ULPS: f64 = 4.0;
    pub const SMALL_Z_WINDOW: (f64, f64) = (0.98, 1.02);
    pub const TAIL_SPREAD: f64 = 1e-3;
    pub const PRESSURE_CONSTANT: f64 = 1e-10;
    pub const STEADY_DRIFT: f64 = 1e-3;
    pub const TRACKING_ORDER: f64 = 0.9;
    pub const TRACKING_ABS: f64 = 1e-2;
    pub const PROJECTED_MEAN: f64 = 1e-12;
    pub const LITERAL_ORDER: f64 = 1.8;
    pub const ORACLE: f64 = 1e-2;
    pub const BETA_HAT: f64 = 0.10;
    pub const T_WINDOW: f64 = 0.02;
    pub const MODULATION: f64 = 0.20;
    pub const DECAY_SLOPE: f64 = -0.3;
    pub const HALVING: (f64, f64) = (1.6, 2.4);
    pub const FITTER: f64 = 1e-10;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub bound: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, measured: f64, bound: impl Into<String>) -> Self {
        Self { name: name.into(), pass, measured, bound: bound.into() }
    }

    fn below(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self::new(name, measured < limit, measured, format!("< {limit:e}"))
    }

    fn error(name: impl Into<String>, e: &Error) -> Self {
        Self::new(format!("{}: {e}", name.into()), false, f64::NAN, "no error")
    }
}

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    /// Informational measurements that do not gate the criterion.
    pub notes: Vec<String>,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        writeln!(
            f,
            "{} {:>2}. {} ({} checks, {} failed, {:.1}s)",
            if self.pass() { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.checks.len(),
            failed,
            self.seconds
        )?;
        for c in &self.checks {
            writeln!(f, "      [{}] {}: {:.6e} {}", if c.pass { "ok" } else { "xx" }, c.name, c.measured, c.bound)?;
        }
        for n in &self.notes {
            writeln!(f, "      info: {n}")?;
        }
        Ok(())
    }
}

pub const TITLES: [&str; 13] = [
    "profile correctness",
    "profile asymptotics",
    "pressure constant",
    "steady-state family",
    "pressureless exact tracking",
    "conservation",
    "oracle agreement",
    "non-smooth rate recovery",
    "smooth (critical) scenario",
    "modulation law",
    "perturbation decay",
    "reduction certificate",
    "fitter exactness",
];

pub fn run_criterion(id: u8) -> CriterionReport {
    let start = Instant::now();
    let mut notes = Vec::new();
    let checks = match id {
        1 => c01_profile(),
        2 => c02_asymptotics(&mut notes),
        3 => c03_pressure(),
        4 => c04_steady(),
        5 => c05_tracking(&mut notes),
        6 => c06_conservation(&mut notes),
        7 => c07_oracle(&mut notes),
        8 => c08_nonsmooth(&mut notes),
        9 => c09_smooth(&mut notes),
        10 => c10_modulation(),
        11 => c11_perturbation(&mut notes),
        12 => c12_reduction(&mut notes),
        13 => c13_fitters(),
        _ => vec![Check::new(format!("unknown criterion {id}"), false, f64::NAN, "1..=13")],
    };
    CriterionReport {
        id,
        title: (id as usize).checked_sub(1).and_then(|i| TITLES.get(i)).copied().unwrap_or("unknown"),
        checks,
        notes,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs the selected criteria (all when empty), in parallel when enabled.
pub fn run(ids: &[u8]) -> Vec<CriterionReport> {
    let ids: Vec<u8> = if ids.is_empty() { (1..=13).collect() } else { ids.to_vec() };
    par::map(&ids, |&id| run_criterion(id))
}

fn collect(name: &str, r: Result<Vec<Check>>) -> Vec<Check> {
    r.unwrap_or_else(|e| vec![Check::error(name, &e)])
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn c01_profile() -> Vec<Check> {
    collect("profile", (|| {
        let zs = log_space(1e-3, 50.0, 50);
        let mut out: Vec<Check> = par::try_map(&[0.25, 0.5, 1.0, 2.0], |&beta| {
            let s = ProfileSpec::new(beta)?;
            let worst = zs.iter().map(|&z| s.profile_residual(z).map(f64::abs)).try_fold(0.0f64, |m, r| r.map(|r| m.max(r)))?;
            Ok::<_, Error>(Check::below(format!("β={beta}: max |residual| on [1e-3, 50]"), worst, tol::PROFILE_RESIDUAL))
        })?;
        let s0 = ProfileSpec::new(0.0)?;
        let mut ulps: f64 = 0.0;
        for &z in &zs {
            let e = (-z).exp();
            ulps = ulps.max((s0.eval_phi(z)? - e).abs() / (e * f64::EPSILON));
        }
        out.push(Check::new(
            "β=0: |φ − e^{−z}| in units of ε·e^{−z}",
            ulps <= tol::EXP_BRANCH_ULPS,
            ulps,
            format!("≤ {}", tol::EXP_BRANCH_ULPS),
        ));
        Ok(out)
    })())
}

fn c02_asymptotics(notes: &mut Vec<String>) -> Vec<Check> {
    let (lo, hi) = tol::SMALL_Z_WINDOW;
    let mut out = Vec::new();
    for beta in [0.5, 1.0, 2.0] {
        let r = (|| {
            let s = ProfileSpec::new(beta)?;
            let z: f64 = 1e-4;
            let x = z.powf(1.0 / (beta + 1.0));
            let ratio = (1.0 - s.eval_phi(z)?) / x;
            let tail = profile::tail_constant(beta)?;
            let raw: Vec<f64> = [1e3, 1e4, 1e5].iter().map(|&z: &f64| Ok(s.eval_phi(z)? * z.powf(1.0 / beta))).collect::<Result<_>>()?;
            notes.push(format!(
                "β={beta}: two-term expansion 1 − (β+1)/(β+2)·x predicts {:.6}; raw z^(1/β)φ spread over z ∈ {{1e3,1e4,1e5}} = {:.3e}; limit ≈ {:.6} (closed form d_β = {:.6})",
                1.0 - (beta + 1.0) / (beta + 2.0) * x,
                profile_spread(&raw),
                tail.value,
                profile::tail_constant_closed_form(beta)
            ));
            Ok(vec![
                Check::new(
                    format!("β={beta}: (1 − φ(z))/z^(1/(β+1)) at z=1e-4"),
                    (lo..=hi).contains(&ratio),
                    ratio,
                    format!("in [{lo}, {hi}]"),
                ),
                Check::below(format!("β={beta}: spread of accelerated z^(1/β)φ estimates a decade apart"), tail.spread, tol::TAIL_SPREAD),
            ])
        })();
        out.extend(collect(&format!("β={beta}"), r));
    }
    out
}

fn profile_spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    (max - min) / max.abs()
}

fn c03_pressure() -> Vec<Check> {
    collect("pressure constant", (|| {
        let c = profile::pressure_constant(0.0)?;
        Ok(vec![Check::below("|C_0 − 1|", (c - 1.0).abs(), tol::PRESSURE_CONSTANT)])
    })())
}

fn c04_steady() -> Vec<Check> {
    let specs: Vec<ScenarioSpec> = (1..=3)
        .map(|k| ScenarioSpec { mode_k: k, ..ScenarioSpec::preset(ScenarioKind::SteadyState) })
        .collect();
    par::map(&specs, |s| match run_scenario(s) {
        Ok(b) => Check::below(format!("k={}: sup |a(5) − a(0)|, N=512", s.mode_k), b.diagnostics["drift"], tol::STEADY_DRIFT),
        Err(e) => Check::error(format!("k={}", s.mode_k), &e),
    })
}

fn observed_order(coarse: f64, fine: f64, ratio: f64) -> f64 {
    (coarse / fine).ln() / ratio.ln()
}

fn c05_tracking(notes: &mut Vec<String>) -> Vec<Check> {
    collect("pressureless", (|| {
        let ns = [128usize, 256, 512];
        let specs: Vec<ScenarioSpec> = ns
            .iter()
            .map(|&n| {
                let s = ScenarioSpec::preset(ScenarioKind::PressurelessExact);
                ScenarioSpec { grid: s.grid.with_cells(n), ..s }
            })
            .collect();
        let errs: Vec<f64> =
            par::try_map(&specs, |s| run_scenario(s).map(|b| b.diagnostics["tracking_error"]))?;
        notes.push(format!("relative sup errors at N = 128, 256, 512: {:.3e}, {:.3e}, {:.3e}", errs[0], errs[1], errs[2]));
        let mut out: Vec<Check> = (0..2)
            .map(|i| {
                let p = observed_order(errs[i], errs[i + 1], 2.0);
                Check::new(
                    format!("observed order {}→{}", ns[i], ns[i + 1]),
                    p >= tol::TRACKING_ORDER,
                    p,
                    format!("≥ {}", tol::TRACKING_ORDER),
                )
            })
            .collect();
        out.push(Check::below("relative sup error at N=512, t=0.5", errs[2], tol::TRACKING_ABS));
        Ok(out)
    })())
}

fn c06_conservation(notes: &mut Vec<String>) -> Vec<Check> {
    collect("conservation", (|| {
        let mut out = Vec::new();
        // projected: zero-mean smooth-blowup data
        let spec = ScenarioSpec::preset(ScenarioKind::Smooth);
        let p = ProfileSpec::new(0.0)?;
        let g = Arc::new(spec.grid.build()?);
        let init = build_initial(&spec, &p, g.clone())?;
        let tr = Solver::new(g, spec.solver.clone())?.run(&init.field, spec.horizon)?;
        let worst = mean_evolution_check(&tr)?.max_relative_mean;
        out.push(Check::new(
            format!("projected: max_t |∫a|/sup|a| over {} steps", tr.norms.len() - 1),
            worst <= tol::PROJECTED_MEAN,
            worst,
            format!("≤ {:e}", tol::PROJECTED_MEAN),
        ));

        // literal: m' = −m a(·,1) on data with nonzero mean
        let law = |scheme: Scheme, n: usize| -> Result<f64> {
            let g = Arc::new(Grid::uniform(n)?);
            let f = Field::from_fn(g.clone(), 0.0, |z| 1.0 + z + 0.5 * (2.0 * PI * z).cos())?;
            let cfg = SolverConfig { scheme, mean_mode: MeanMode::Literal, ..SolverConfig::default() };
            let r = mean_evolution_check(&Solver::new(g, cfg)?.run(&f, 0.2)?)?;
            Ok(r.law_residual / r.law_scale)
        };
        let ns = [128usize, 256, 512];
        let hi: Vec<f64> = par::try_map(&ns, |&n| law(Scheme::Upwind5, n))?;
        let lo: Vec<f64> = par::try_map(&ns, |&n| law(Scheme::Upwind1, n))?;
        for i in 0..2 {
            let p = observed_order(hi[i], hi[i + 1], 2.0);
            out.push(Check::new(
                format!("literal (upwind5): order of the mean-law residual {}→{}", ns[i], ns[i + 1]),
                p >= tol::LITERAL_ORDER,
                p,
                format!("≥ {}", tol::LITERAL_ORDER),
            ));
        }
        notes.push(format!(
            "literal mean-law relative residuals, upwind5: {:.2e} {:.2e} {:.2e}; upwind1: {:.2e} {:.2e} {:.2e} (order {:.2})",
            hi[0],
            hi[1],
            hi[2],
            lo[0],
            lo[1],
            lo[2],
            observed_order(lo[1], lo[2], 2.0)
        ));
        Ok(out)
    })())
}

fn c07_oracle(notes: &mut Vec<String>) -> Vec<Check> {
    collect("oracle", (|| {
        let spec = ScenarioSpec::preset(ScenarioKind::Smooth);
        let p = ProfileSpec::new(0.0)?;
        let g = Arc::new(spec.grid.build()?);
        let init = build_initial(&spec, &p, g.clone())?;
        let cfg = SolverConfig { sup_stop: SupStop::Factor(10.0), cfl: 0.1, ..spec.solver.clone() };
        let tr = Solver::new(g.clone(), cfg.clone())?.run(&init.field, spec.horizon)?;
        let last = tr.last();
        let ps = integrate_characteristics(&init.field, g.len(), last.time, &cfg)?;
        let c = compare_to_eulerian(&ps, last)?;
        notes.push(format!("sup grew by {:.3}x to t = {:.6e}; solver.cfl = 0.1", last.sup() / init.field.sup(), last.time));
        Ok(vec![Check::below("sup |a_Euler − a_char| / sup|a|, N = n = 512", c.relative(), tol::ORACLE)])
    })())
}

fn c08_nonsmooth(notes: &mut Vec<String>) -> Vec<Check> {
    let specs: Vec<ScenarioSpec> = [0.5, 1.0]
        .iter()
        .map(|&beta| {
            let mut s = ScenarioSpec::preset(ScenarioKind::Nonsmooth);
            s.beta = beta;
            s.energy = crate::modulation::EnergyConfig::new(beta).expect("admissible β");
            s
        })
        .collect();
    let runs = par::map(&specs, run_scenario);
    let mut out = Vec::new();
    for (s, r) in specs.iter().zip(runs) {
        match r {
            Ok(b) => {
                let bh = b.fits.beta_hat.unwrap_or(f64::NAN);
                out.push(Check::new(
                    format!("β={}: β̂", s.beta),
                    (bh - s.beta).abs() <= tol::BETA_HAT * s.beta,
                    bh,
                    format!("within {}% of {}", tol::BETA_HAT * 100.0, s.beta),
                ));
                let rel = b.diagnostics.get("T_window_rel_change").copied().unwrap_or(f64::NAN);
                out.push(Check::below(format!("β={}: |ΔT̂|/T̂ under halving the window", s.beta), rel, tol::T_WINDOW));
                notes.push(format!(
                    "β={}: T̂ = {:.6e}, ν̃_∞ = {:.4}, E2 exp slope = {:.3} (target −δ = {:.3})",
                    s.beta,
                    b.fits.t_blowup.unwrap_or(f64::NAN),
                    b.fits.nu_inf.unwrap_or(f64::NAN),
                    b.fits.decay_slopes.e2.unwrap_or(f64::NAN),
                    -s.energy.delta
                ));
            }
            Err(e) => out.push(Check::error(format!("β={}", s.beta), &e)),
        }
    }
    out
}

fn smooth_bundle() -> &'static std::result::Result<Bundle, String> {
    static SMOOTH: OnceLock<std::result::Result<Bundle, String>> = OnceLock::new();
    SMOOTH.get_or_init(|| run_scenario(&ScenarioSpec::preset(ScenarioKind::Smooth)).map_err(|e| e.to_string()))
}

fn verdict_checks(b: &Bundle, prefixes: &[&str]) -> Vec<Check> {
    prefixes
        .iter()
        .map(|p| match b.verdict(p) {
            Some(v) => Check::new(v.claim.clone(), v.pass, v.measured, format!("target {} ± {}", v.target, v.tolerance)),
            None => Check::new(format!("{p} (not evaluated)"), false, f64::NAN, "verdict present"),
        })
        .collect()
}

const BLOWUP_CLAIMS: [&str; 4] = ["blow-up time finite", "ν|log(T̂−t)| in", "ν|log(T̂−t)| trends", "λ/(T̂−t)"];

fn c09_smooth(notes: &mut Vec<String>) -> Vec<Check> {
    match smooth_bundle() {
        Ok(b) => {
            let trend: Vec<String> =
                (0..6).filter_map(|i| b.diagnostics.get(&format!("log_law_trend_{i}"))).map(|v| format!("{v:.4}")).collect();
            notes.push(format!("ν|log(T̂−t)| at six log-spaced points of the last decade: {}", trend.join(", ")));
            verdict_checks(b, &BLOWUP_CLAIMS)
        }
        Err(e) => vec![Check::new(format!("smooth run: {e}"), false, f64::NAN, "no error")],
    }
}

fn c10_modulation() -> Vec<Check> {
    match smooth_bundle() {
        Ok(b) => verdict_checks(b, &["modulation equation 1", "modulation equation 2"]),
        Err(e) => vec![Check::new(format!("smooth run: {e}"), false, f64::NAN, "no error")],
    }
}

fn c11_perturbation(notes: &mut Vec<String>) -> Vec<Check> {
    let specs: Vec<ScenarioSpec> =
        [1e-2, 1e-1].iter().map(|&k| ScenarioSpec { kappa: k, ..ScenarioSpec::preset(ScenarioKind::Smooth) }).collect();
    let runs = par::map(&specs, run_scenario);
    let mut out = Vec::new();
    for (s, r) in specs.iter().zip(runs) {
        match r {
            Ok(b) => {
                let slope = b.fits.decay_slopes.e2.unwrap_or(f64::NAN);
                out.push(Check::new(
                    format!("κ={}: E2 power slope on the trapped window", s.kappa),
                    slope <= tol::DECAY_SLOPE,
                    slope,
                    format!("≤ {}", tol::DECAY_SLOPE),
                ));
                let failed: Vec<&str> = BLOWUP_CLAIMS
                    .iter()
                    .filter(|p| b.verdict(p).is_none_or(|v| !v.pass))
                    .copied()
                    .collect();
                out.push(Check::new(
                    format!("κ={}: blow-up verdicts unchanged", s.kappa),
                    failed.is_empty(),
                    failed.len() as f64,
                    "0 failed",
                ));
                notes.push(format!(
                    "κ={}: T̂ = {:.9e}, ν|log| tail = {:.6}, E2(s₀) = {:.3e}, κ·λ₀ = {:.1e} (perturbation size in profile units)",
                    s.kappa,
                    b.fits.t_blowup.unwrap_or(f64::NAN),
                    b.fits.log_law_tail.unwrap_or(f64::NAN),
                    b.modulation.first().map_or(f64::NAN, |r| r.e2),
                    s.kappa * s.lambda0
                ));
            }
            Err(e) => out.push(Check::error(format!("κ={}", s.kappa), &e)),
        }
    }
    out
}

fn c12_reduction(notes: &mut Vec<String>) -> Vec<Check> {
    collect("reduction", (|| {
        let ns = [128usize, 256, 512];
        let p = ProfileSpec::new(0.0)?;
        let res: Vec<f64> = par::try_map(&ns, |&n| {
            let base = ScenarioSpec::preset(ScenarioKind::Smooth);
            let s = ScenarioSpec { grid: base.grid.with_cells(n), ..base };
            let init = build_initial(&s, &p, Arc::new(s.grid.build()?))?;
            let xs: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
            let lift = lift_to_2d(&init.field, &xs)?;
            momentum_residual(&lift, &rhs(&init.field, &s.solver)?)
        })?;
        notes.push(format!("momentum residuals: {:.4e}, {:.4e}, {:.4e}", res[0], res[1], res[2]));
        let (lo, hi) = tol::HALVING;
        Ok((0..2)
            .map(|i| {
                let r = res[i] / res[i + 1];
                Check::new(format!("residual ratio {}→{}", ns[i], ns[i + 1]), (lo..=hi).contains(&r), r, format!("in [{lo}, {hi}]"))
            })
            .collect())
    })())
}

fn c13_fitters() -> Vec<Check> {
    collect("fitters", (|| {
        let ts: Vec<f64> = (0..200).map(|i| 0.99 * i as f64 / 199.0).collect();
        let mut out = Vec::new();

        let sups: Vec<f64> = ts.iter().map(|t| 1.0 / (1.0 - t)).collect();
        let f = scaling_laws::fit_blowup_time(&ts, &sups, 0.25)?;
        out.push(Check::below("sups = 1/(1−t): residual", f.residual, tol::FITTER));
        out.push(Check::below("sups = 1/(1−t): |T − 1|", (f.t_blowup - 1.0).abs(), 1e-6));

        let nus: Vec<f64> = ts.iter().map(|t| 0.5 * (1.0 - t).powf(0.7)).collect();
        let f = scaling_laws::fit_nu_law(&ts, &nus, 1.0, LawMode::Power)?;
        out.push(Check::below("ν = 0.5(1−t)^0.7: residual", f.residual, tol::FITTER));
        out.push(Check::below("ν = 0.5(1−t)^0.7: |β̂ − 0.7| + |ν̃_∞ − 0.5|", (f.exponent_or_limit - 0.7).abs() + (f.nu_inf - 0.5).abs(), 1e-6));

        let tl: Vec<f64> = ts.iter().copied().filter(|&t| t > 0.0).collect();
        let nus: Vec<f64> = tl.iter().map(|t| 1.0 / (1.0 - t).ln().abs()).collect();
        let f = scaling_laws::fit_nu_law(&tl, &nus, 1.0, LawMode::Log)?;
        out.push(Check::below("ν = 1/|log(1−t)|: residual", f.residual, tol::FITTER));
        out.push(Check::below("ν = 1/|log(1−t)|: |tail mean − 1|", (f.exponent_or_limit - 1.0).abs(), 1e-6));

        let ss: Vec<f64> = (1..=100).map(|i| i as f64 * 0.2).collect();
        let e: Vec<f64> = ss.iter().map(|s| (-0.8 * s).exp()).collect();
        let f = scaling_laws::fit_remainder_decay(&ss, &e, DecayLaw::Exp)?;
        out.push(Check::below("E = e^{−0.8s}: residual", f.residual, tol::FITTER));
        out.push(Check::below("E = e^{−0.8s}: |slope + 0.8|", (f.slope + 0.8).abs(), 1e-6));

        let e: Vec<f64> = ss.iter().map(|s| s.powf(-2.0 / 3.0)).collect();
        let f = scaling_laws::fit_remainder_decay(&ss, &e, DecayLaw::Power)?;
        out.push(Check::below("E = s^{−2/3}: residual", f.residual, tol::FITTER));
        out.push(Check::below("E = s^{−2/3}: |slope + 2/3|", (f.slope + 2.0 / 3.0).abs(), 1e-6));
        Ok(out)
    })())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_criteria() {
        for id in [1, 3, 13] {
            let r = run_criterion(id);
            assert!(r.pass(), "{r}");
        }
    }

    #[test]
    fn unknown_id_fails() {
        assert!(!run_criterion(14).pass());
    }
}
