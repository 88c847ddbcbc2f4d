use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::reduced_pde::{Field, NormRecord};
use crate::scenarios::{Bundle, FitSummary, ModulationRow, Verdict};

pub const OUT_ENV: &str = "HYDROBLOW_OUT";

pub const SNAPSHOTS: &str = "snapshots.csv";
pub const NORMS: &str = "norms.csv";
pub const MODULATION: &str = "modulation.csv";
pub const FITS: &str = "fits.json";
pub const VERDICTS: &str = "verdicts.json";
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VerdictCounts {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

impl VerdictCounts {
    pub fn of(v: &[Verdict]) -> Self {
        let passed = v.iter().filter(|v| v.pass).count();
        Self { total: v.len(), passed, failed: v.len() - passed }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub snapshots: usize,
    pub wall_time_s: f64,
    pub version: String,
    pub verdicts: VerdictCounts,
}

/// Output directory: relative paths are resolved against `$HYDROBLOW_OUT` when set.
pub fn resolve_dir(dir: &str) -> PathBuf {
    let p = Path::new(dir);
    match std::env::var_os(OUT_ENV) {
        Some(root) if p.is_relative() => Path::new(&root).join(p),
        _ => p.to_path_buf(),
    }
}

fn num(out: &mut String, v: f64) {
    write!(out, "{v:.16e}").unwrap();
}

pub fn snapshots_csv(snaps: &[Field]) -> String {
    let mut s = String::from("t,Z,a\n");
    for f in snaps {
        for (z, a) in f.grid.nodes().iter().zip(&f.values) {
            num(&mut s, f.time);
            s.push(',');
            num(&mut s, *z);
            s.push(',');
            num(&mut s, *a);
            s.push('\n');
        }
    }
    s
}

pub fn norms_csv(norms: &[NormRecord]) -> String {
    let mut s = String::from("t,sup,dZa0,mean,dt\n");
    for r in norms {
        for (i, v) in [r.t, r.sup, r.dza0, r.mean, r.dt].into_iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            num(&mut s, v);
        }
        s.push('\n');
    }
    s
}

pub fn modulation_csv(rows: &[ModulationRow]) -> String {
    let mut s = String::from("t,s,lambda,nu,E1,E2,res_mod1,res_mod2\n");
    for r in rows {
        for (i, v) in [r.t, r.s, r.lambda, r.nu, r.e1, r.e2, r.res_mod1, r.res_mod2].into_iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            num(&mut s, v);
        }
        s.push('\n');
    }
    s
}

/// Reads a numeric CSV with a header line into named columns.
pub fn read_csv(path: &Path) -> Result<BTreeMap<String, Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: format!("{}: empty file", path.display()) })?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut cols = vec![Vec::new(); header.len()];
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(Error::Parse { line: i + 2, msg: format!("{}: expected {} fields", path.display(), header.len()) });
        }
        for (c, f) in cols.iter_mut().zip(fields) {
            c.push(f.trim().parse().map_err(|_| Error::Parse {
                line: i + 2,
                msg: format!("{}: bad number `{f}`", path.display()),
            })?);
        }
    }
    Ok(header.into_iter().zip(cols).collect())
}

fn write(dir: &Path, name: &str, body: &str, listed: &mut Vec<String>) -> Result<()> {
    let p = dir.join(name);
    fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
    listed.push(name.to_string());
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Parts of a run that can be written; any of them may be empty.
pub struct Artifacts<'a> {
    pub snapshots: &'a [Field],
    pub norms: &'a [NormRecord],
    pub modulation: Option<&'a [ModulationRow]>,
    pub fits: Option<&'a FitSummary>,
    pub verdicts: &'a [Verdict],
}

impl<'a> From<&'a Bundle> for Artifacts<'a> {
    fn from(b: &'a Bundle) -> Self {
        Self {
            snapshots: &b.trajectory.snapshots,
            norms: &b.trajectory.norms,
            modulation: Some(&b.modulation),
            fits: Some(&b.fits),
            verdicts: &b.verdicts,
        }
    }
}

/// Writes the CSV/JSON artifacts and the manifest into `dir`.
pub fn emit_outputs(
    art: Artifacts,
    dir: &Path,
    command: &str,
    config: BTreeMap<String, String>,
    wall_time_s: f64,
) -> Result<RunManifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut outputs = Vec::new();
    write(dir, SNAPSHOTS, &snapshots_csv(art.snapshots), &mut outputs)?;
    write(dir, NORMS, &norms_csv(art.norms), &mut outputs)?;
    if let Some(rows) = art.modulation {
        write(dir, MODULATION, &modulation_csv(rows), &mut outputs)?;
    }
    if let Some(f) = art.fits {
        write_json(&dir.join(FITS), f)?;
        outputs.push(FITS.into());
    }
    write_json(&dir.join(VERDICTS), &art.verdicts)?;
    outputs.push(VERDICTS.into());
    outputs.push(MANIFEST.into());
    let manifest = RunManifest {
        command: command.to_string(),
        config,
        outputs,
        snapshots: art.snapshots.len(),
        wall_time_s,
        version: env!("CARGO_PKG_VERSION").to_string(),
        verdicts: VerdictCounts::of(art.verdicts),
    };
    write_json(&dir.join(MANIFEST), &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_run() {
        let dir = tempfile::tempdir().unwrap();
        let art = Artifacts { snapshots: &[], norms: &[], modulation: None, fits: None, verdicts: &[] };
        let m = emit_outputs(art, dir.path(), "simulate", BTreeMap::new(), 0.0).unwrap();
        assert_eq!(m.snapshots, 0);
        let text = fs::read_to_string(dir.path().join(MANIFEST)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["verdicts"]["total"], 0);
        for f in &m.outputs {
            assert!(dir.path().join(f).exists(), "{f}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let rows = [ModulationRow { t: 0.1, s: 1.0 / 3.0, lambda: 1e-300, nu: 0.7, e1: 2.0, e2: f64::NAN, res_mod1: -0.0, res_mod2: 5e-324 }];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        fs::write(&p, modulation_csv(&rows)).unwrap();
        let cols = read_csv(&p).unwrap();
        assert_eq!(cols["s"][0], 1.0 / 3.0);
        assert_eq!(cols["lambda"][0], 1e-300);
        assert_eq!(cols["res_mod2"][0], 5e-324);
        assert!(cols["E2"][0].is_nan());
    }
}
