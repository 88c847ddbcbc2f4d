//! Flat `key = value` scenario files.
//!
//! Blank lines and `#` comments are ignored. Keys are applied on top of the
//! preset selected by `kind` (default `smooth`).

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::modulation::EnergyConfig;
use crate::reduced_pde::{MeanMode, Scheme, SupStop};
use crate::scenarios::{GridSpec, ScenarioKind, ScenarioSpec};

pub const KEYS: &[&str] = &[
    "kind",
    "beta",
    "lambda0",
    "nu0",
    "nu_tilde0",
    "nu_tilde_star",
    "kappa",
    "pert.m",
    "k",
    "T",
    "horizon",
    "grid.n",
    "grid.g",
    "grid.zmin",
    "solver.cfl",
    "solver.pressure",
    "solver.mean",
    "solver.scheme",
    "solver.stop_factor",
    "solver.max_steps",
    "solver.snapshot_every",
    "energy.eta",
    "energy.k",
    "energy.zstar",
    "fit.window_frac",
    "fit.nu_window_frac",
    "fit.trap_delay",
    "fit.cusp_window",
    "outputs.dir",
    "sweep.lambda0",
    "sweep.kappa",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub spec: ScenarioSpec,
    pub sweep_lambda0: Vec<f64>,
    pub sweep_kappa: Vec<f64>,
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<ParsedConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

fn value<T: FromStr>(e: &Entry, key: &str) -> Result<T> {
    e.value
        .parse()
        .map_err(|_| Error::Parse { line: e.line, msg: format!("invalid value `{}` for `{key}`", e.value) })
}

fn list(e: &Entry, key: &str) -> Result<Vec<f64>> {
    e.value
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Parse { line: e.line, msg: format!("invalid list item `{}` for `{key}`", s.trim()) })
        })
        .collect()
}

fn flag(e: &Entry, key: &str) -> Result<bool> {
    match e.value {
        "on" | "true" | "1" => Ok(true),
        "off" | "false" | "0" => Ok(false),
        _ => Err(Error::Parse { line: e.line, msg: format!("`{key}` expects on/off, got `{}`", e.value) }),
    }
}

pub fn parse_config_str(text: &str) -> Result<ParsedConfig> {
    let mut entries: BTreeMap<&str, Entry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(Error::Parse { line, msg: format!("expected `key = value`, got `{content}`") });
        };
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(Error::Parse { line, msg: format!("unknown key `{k}`") });
        }
        if let Some(prev) = entries.get(k) {
            return Err(Error::Parse { line, msg: format!("duplicate key `{k}` (first set on line {})", prev.line) });
        }
        entries.insert(k, Entry { line, value: v });
    }

    let kind = match entries.get("kind") {
        Some(e) => e.value.parse::<ScenarioKind>().map_err(|msg| Error::Parse { line: e.line, msg })?,
        None => ScenarioKind::Smooth,
    };
    let mut spec = ScenarioSpec::preset(kind);
    let mut sweep_lambda0 = Vec::new();
    let mut sweep_kappa = Vec::new();
    let (mut grid_g, mut grid_zmin, mut grid_n) = (None, None, None);
    let (mut eta, mut big_k, mut zstar) = (None, None, None);

    for (&key, e) in &entries {
        match key {
            "kind" => {}
            "beta" => spec.beta = value(e, key)?,
            "lambda0" => spec.lambda0 = value(e, key)?,
            "nu0" => spec.nu0 = Some(value(e, key)?),
            "nu_tilde0" => spec.nu_tilde0 = Some(value(e, key)?),
            "nu_tilde_star" => spec.nu_tilde_star = value(e, key)?,
            "kappa" => spec.kappa = value(e, key)?,
            "pert.m" => spec.pert_m = value(e, key)?,
            "k" => spec.mode_k = value(e, key)?,
            "T" => spec.t_blowup = value(e, key)?,
            "horizon" => spec.horizon = value(e, key)?,
            "grid.n" => grid_n = Some(value::<usize>(e, key)?),
            "grid.g" => grid_g = Some((e.line, value::<f64>(e, key)?)),
            "grid.zmin" => grid_zmin = Some((e.line, value::<f64>(e, key)?)),
            "solver.cfl" => spec.solver.cfl = value(e, key)?,
            "solver.pressure" => spec.solver.pressure_on = flag(e, key)?,
            "solver.mean" => {
                spec.solver.mean_mode = match e.value {
                    "literal" => MeanMode::Literal,
                    "projected" => MeanMode::Projected,
                    _ => return Err(Error::Parse { line: e.line, msg: format!("`{key}` expects literal/projected") }),
                }
            }
            "solver.scheme" => {
                spec.solver.scheme = match e.value {
                    "upwind1" => Scheme::Upwind1,
                    "upwind5" => Scheme::Upwind5,
                    _ => return Err(Error::Parse { line: e.line, msg: format!("`{key}` expects upwind1/upwind5") }),
                }
            }
            "solver.stop_factor" => spec.solver.sup_stop = SupStop::Factor(value(e, key)?),
            "solver.max_steps" => spec.solver.max_steps = value(e, key)?,
            "solver.snapshot_every" => spec.solver.snapshot_every = value(e, key)?,
            "energy.eta" => eta = Some(value::<f64>(e, key)?),
            "energy.k" => big_k = Some(value::<f64>(e, key)?),
            "energy.zstar" => zstar = Some(value::<f64>(e, key)?),
            "fit.window_frac" => spec.fit.window_frac = value(e, key)?,
            "fit.nu_window_frac" => spec.fit.nu_window_frac = value(e, key)?,
            "fit.trap_delay" => spec.fit.trap_delay = value(e, key)?,
            "fit.cusp_window" => spec.fit.cusp_window = Some(value(e, key)?),
            "outputs.dir" => spec.outputs_dir = e.value.to_string(),
            "sweep.lambda0" => sweep_lambda0 = list(e, key)?,
            "sweep.kappa" => sweep_kappa = list(e, key)?,
            _ => unreachable!("key list and match arms disagree on `{key}`"),
        }
    }

    spec.grid = match (grid_g, grid_zmin) {
        (Some((line, _)), Some(_)) => {
            return Err(Error::Parse { line, msg: "grid.g and grid.zmin are mutually exclusive".into() })
        }
        (Some((_, g)), None) => GridSpec::Power { n: grid_n.unwrap_or(spec.grid.cells()), g },
        (None, Some((_, z_min))) => GridSpec::Geometric { n: grid_n.unwrap_or(spec.grid.cells()), z_min },
        (None, None) => grid_n.map_or(spec.grid, |n| spec.grid.with_cells(n)),
    };

    let defaults = EnergyConfig::new(spec.beta)?;
    spec.energy = EnergyConfig::with(
        spec.beta,
        eta.unwrap_or(defaults.eta),
        big_k.unwrap_or(defaults.big_k),
        zstar.unwrap_or(defaults.zstar),
    )?;
    spec.grid.build()?;
    spec.validate()?;
    for &k in &sweep_kappa {
        if !(k >= 0.0) {
            return Err(Error::constraint("kappa ≥ 0", format!("sweep.kappa item {k}")));
        }
    }
    for &l in &sweep_lambda0 {
        if !(l > 0.0) {
            return Err(Error::constraint("lambda0 > 0", format!("sweep.lambda0 item {l}")));
        }
    }
    Ok(ParsedConfig { spec, sweep_lambda0, sweep_kappa })
}

/// Effective configuration as `key → value` (sorted, for manifests).
pub fn echo(spec: &ScenarioSpec) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        m.insert(k.to_string(), v);
    };
    put("kind", spec.kind.to_string());
    put("beta", format!("{}", spec.beta));
    put("lambda0", format!("{}", spec.lambda0));
    put("nu0", format!("{}", spec.resolved_nu0()));
    put("nu_tilde_star", format!("{}", spec.nu_tilde_star));
    put("kappa", format!("{}", spec.kappa));
    put("pert.m", spec.pert_m.to_string());
    put("k", spec.mode_k.to_string());
    put("T", format!("{}", spec.t_blowup));
    put("horizon", format!("{}", spec.horizon));
    match spec.grid {
        GridSpec::Power { n, g } => {
            put("grid.n", n.to_string());
            put("grid.g", format!("{g}"));
        }
        GridSpec::Geometric { n, z_min } => {
            put("grid.n", n.to_string());
            put("grid.zmin", format!("{z_min}"));
        }
    }
    let s = &spec.solver;
    put("solver.cfl", format!("{}", s.cfl));
    put("solver.pressure", if s.pressure_on { "on" } else { "off" }.into());
    put("solver.mean", if s.mean_mode == MeanMode::Literal { "literal" } else { "projected" }.into());
    put("solver.scheme", if s.scheme == Scheme::Upwind1 { "upwind1" } else { "upwind5" }.into());
    match s.sup_stop {
        SupStop::Factor(f) => put("solver.stop_factor", format!("{f}")),
        SupStop::Absolute(a) => put("solver.stop_abs", format!("{a}")),
    }
    put("solver.max_steps", s.max_steps.to_string());
    put("solver.snapshot_every", s.snapshot_every.to_string());
    put("energy.eta", format!("{}", spec.energy.eta));
    put("energy.k", format!("{}", spec.energy.big_k));
    put("energy.zstar", format!("{}", spec.energy.zstar));
    put("fit.window_frac", format!("{}", spec.fit.window_frac));
    put("fit.nu_window_frac", format!("{}", spec.fit.nu_window_frac));
    put("fit.trap_delay", format!("{}", spec.fit.trap_delay));
    if let Some(c) = spec.fit.cusp_window {
        put("fit.cusp_window", format!("{c}"));
    }
    put("outputs.dir", spec.outputs_dir.clone());
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constraint_of(r: Result<ParsedConfig>) -> String {
        match r {
            Err(Error::Constraint { constraint, .. }) => constraint,
            other => panic!("expected a constraint error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_smooth_config() {
        let c = parse_config_str("kind = smooth\nlambda0 = 1e-4\n").unwrap();
        assert_eq!(c.spec.resolved_nu0(), 1.0 / 1e4f64.ln());
        assert_eq!(c.spec.grid, GridSpec::Power { n: 512, g: 2.0 });
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = parse_config_str("# header\n\nkappa = 0.01  # small\ngrid.n = 256\n").unwrap();
        assert_eq!(c.spec.kappa, 0.01);
        assert_eq!(c.spec.grid.cells(), 256);
    }

    #[test]
    fn negative_beta() {
        let r = parse_config_str("kind = custom\nbeta = -1\n");
        assert_eq!(constraint_of(r), "beta ≥ 0");
    }

    #[test]
    fn eta_out_of_range() {
        let r = parse_config_str("kind = nonsmooth\nbeta = 0.5\nenergy.eta = 0.5\n");
        assert_eq!(constraint_of(r), "0<η<min(β,1)");
    }

    #[test]
    fn line_numbers() {
        match parse_config_str("kind = smooth\n\nbogus = 1\n") {
            Err(Error::Parse { line: 3, msg }) => assert!(msg.contains("bogus")),
            other => panic!("{other:?}"),
        }
        match parse_config_str("kappa = 0\nkappa = 1\n") {
            Err(Error::Parse { line: 2, msg }) => assert!(msg.contains("duplicate")),
            other => panic!("{other:?}"),
        }
        match parse_config_str("lambda0 = tiny\n") {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn smooth_window() {
        let r = parse_config_str("lambda0 = 1e-4\nnu0 = 0.5\n");
        assert_eq!(constraint_of(r), "2/(3 log(1/λ₀)) ≤ ν₀ ≤ 3/(2 log(1/λ₀))");
    }

    #[test]
    fn cfl_and_grid() {
        assert_eq!(constraint_of(parse_config_str("solver.cfl = 1.5\n")), "0 < solver.cfl < 1");
        assert_eq!(constraint_of(parse_config_str("grid.n = 8\n")), "grid.n ≥ 16");
    }

    #[test]
    fn every_key_is_handled() {
        let text = "kind = nonsmooth\nbeta = 1\nlambda0 = 1e-3\nnu_tilde0 = 0.5\nnu_tilde_star = 1\n\
            kappa = 0\npert.m = 2\nk = 1\nT = 1\nhorizon = 1\ngrid.n = 128\ngrid.zmin = 1e-12\n\
            solver.cfl = 0.3\nsolver.pressure = on\nsolver.mean = projected\nsolver.scheme = upwind1\n\
            solver.stop_factor = 100\nsolver.max_steps = 1000\nsolver.snapshot_every = 2\n\
            energy.eta = 0.4\nenergy.k = 6\nenergy.zstar = 3\nfit.window_frac = 0.2\n\
            fit.nu_window_frac = 0.4\nfit.trap_delay = 0.5\nfit.cusp_window = 0.01\noutputs.dir = x\n\
            sweep.lambda0 = 1e-3, 1e-4\nsweep.kappa = 0, 0.1\n";
        let c = parse_config_str(text).unwrap();
        assert_eq!(c.sweep_lambda0, vec![1e-3, 1e-4]);
        assert_eq!(c.spec.energy.eta, 0.4);
        assert_eq!(c.spec.grid, GridSpec::Geometric { n: 128, z_min: 1e-12 });
        assert_eq!(c.spec.fit.cusp_window, Some(0.01));
        assert_eq!(echo(&c.spec)["solver.snapshot_every"], "2");
    }
}
