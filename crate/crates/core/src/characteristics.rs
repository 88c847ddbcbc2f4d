//! Lagrangian reference solver.
//!
//! Along `Ż = ∫₀^Z a` the equation reduces to `ȧ = a² − 2∫₀¹a²`, so particles
//! carry `(X_j, A_j)` and only the nonlocal terms need quadrature.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::reduced_pde::{Field, Grid, MeanMode, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    pub positions: Vec<f64>,
    pub values: Vec<f64>,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleComparison {
    pub max_abs_diff: f64,
    pub sup: f64,
    pub nodes_compared: usize,
}

impl OracleComparison {
    pub fn relative(&self) -> f64 {
        self.max_abs_diff / self.sup.max(f64::MIN_POSITIVE)
    }
}

pub(crate) fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let k = xs.partition_point(|&v| v <= x) - 1;
    let w = (x - xs[k]) / (xs[k + 1] - xs[k]);
    ys[k] + w * (ys[k + 1] - ys[k])
}

/// Fills `V` at the particles and returns `(∫₀¹ A, ∫₀¹ A²)`, trapezoid cells clipped to `[0, 1]`.
fn nonlocal(x: &[f64], a: &[f64], v: &mut [f64]) -> (f64, f64) {
    v[0] = 0.0;
    let mut m = 0.0;
    let mut q = 0.0;
    for j in 0..x.len() - 1 {
        let h = x[j + 1] - x[j];
        v[j + 1] = v[j] + 0.5 * h * (a[j] + a[j + 1]);
        if x[j] < 1.0 {
            let (hb, ab) = if x[j + 1] > 1.0 {
                let w = (1.0 - x[j]) / h;
                (1.0 - x[j], a[j] + w * (a[j + 1] - a[j]))
            } else {
                (h, a[j + 1])
            };
            m += 0.5 * hb * (a[j] + ab);
            q += 0.5 * hb * (a[j] * a[j] + ab * ab);
        }
    }
    let last = *x.last().unwrap();
    if last < 1.0 {
        // inflow region beyond the last particle carries its value
        let al = *a.last().unwrap();
        m += (1.0 - last) * al;
        q += (1.0 - last) * al * al;
    }
    (m, q)
}

struct Rates {
    dx: Vec<f64>,
    da: Vec<f64>,
}

fn rates(x: &[f64], a: &[f64], pressure_on: bool) -> Rates {
    let mut v = vec![0.0; x.len()];
    let (_, q) = nonlocal(x, a, &mut v);
    let p = if pressure_on { 2.0 * q } else { 0.0 };
    Rates { dx: v, da: a.iter().map(|&y| y * y - p).collect() }
}

fn project(x: &[f64], a: &mut [f64]) {
    let mut v = vec![0.0; x.len()];
    let (m, _) = nonlocal(x, a, &mut v);
    a.iter_mut().for_each(|y| *y -= m);
}

/// Advances particles seeded from `f0` to `t_end`.
///
/// With `n_particles` equal to the node count the particles start on the
/// nodes of `f0`; otherwise on a grid of the same grading.
pub fn integrate_characteristics(
    f0: &Field,
    n_particles: usize,
    t_end: f64,
    config: &SolverConfig,
) -> Result<ParticleSet> {
    config.validate()?;
    if n_particles < 17 {
        return Err(Error::constraint("n_particles ≥ 17 (16 cells)", format!("got {n_particles}")));
    }
    if !(t_end >= f0.time) {
        return Err(Error::Contract(format!("t_end {t_end} precedes t0 = {}", f0.time)));
    }
    let (mut x, mut a) = if n_particles == f0.grid.len() {
        (f0.grid.nodes().to_vec(), f0.values.clone())
    } else {
        let g = f0.grid.regraded(n_particles.saturating_sub(1))?;
        let vals = g.nodes().iter().map(|&z| interp_linear(f0.grid.nodes(), &f0.values, z)).collect();
        (g.nodes().to_vec(), vals)
    };
    if config.mean_mode == MeanMode::Projected {
        project(&x, &mut a);
    }
    let n = x.len();
    let mut t = f0.time;
    let mut steps = 0usize;
    while t < t_end {
        if steps >= config.max_steps {
            return Err(Error::Precision(format!("characteristics exceeded {} steps", config.max_steps)));
        }
        let r1 = rates(&x, &a, config.pressure_on);
        let sup = a.iter().fold(0.0f64, |m, y| m.max(y.abs()));
        let mut lim = 1.0 / (sup + 1.0);
        for j in 0..n - 1 {
            let dv = (r1.dx[j + 1] - r1.dx[j]).abs() + f64::EPSILON;
            lim = lim.min((x[j + 1] - x[j]) / dv);
        }
        let dt = (config.cfl * lim).min(t_end - t);
        let stage = |k: &Rates, s: f64| -> (Vec<f64>, Vec<f64>) {
            (
                x.iter().zip(&k.dx).map(|(p, d)| p + s * d).collect(),
                a.iter().zip(&k.da).map(|(p, d)| p + s * d).collect(),
            )
        };
        let (x2, a2) = stage(&r1, 0.5 * dt);
        let r2 = rates(&x2, &a2, config.pressure_on);
        let (x3, a3) = stage(&r2, 0.5 * dt);
        let r3 = rates(&x3, &a3, config.pressure_on);
        let (x4, a4) = stage(&r3, dt);
        let r4 = rates(&x4, &a4, config.pressure_on);
        for j in 0..n {
            x[j] += dt / 6.0 * (r1.dx[j] + 2.0 * r2.dx[j] + 2.0 * r3.dx[j] + r4.dx[j]);
            a[j] += dt / 6.0 * (r1.da[j] + 2.0 * r2.da[j] + 2.0 * r3.da[j] + r4.da[j]);
        }
        t = if t + dt >= t_end { t_end } else { t + dt };
        steps += 1;
        if a.iter().chain(&x).any(|v| !v.is_finite()) {
            return Err(Error::Overflow { time: t });
        }
        if let Some(index) = x.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Crossing { time: t, index });
        }
        if config.mean_mode == MeanMode::Projected {
            project(&x, &mut a);
        }
    }
    Ok(ParticleSet { positions: x, values: a, time: t })
}

/// Sup-distance between the particle solution (linearly reconstructed) and an
/// Eulerian field at the same time, over nodes covered by particles.
pub fn compare_to_eulerian(ps: &ParticleSet, f: &Field) -> Result<OracleComparison> {
    if (ps.time - f.time).abs() > 1e-12 * ps.time.abs().max(1.0) {
        return Err(Error::Contract(format!(
            "particle time {} differs from field time {}",
            ps.time, f.time
        )));
    }
    let top = *ps.positions.last().unwrap();
    let mut max_abs_diff: f64 = 0.0;
    let mut nodes_compared = 0;
    for (&z, &v) in f.grid.nodes().iter().zip(&f.values) {
        if z > top {
            break;
        }
        let w = interp_linear(&ps.positions, &ps.values, z);
        max_abs_diff = max_abs_diff.max((w - v).abs());
        nodes_compared += 1;
    }
    Ok(OracleComparison { max_abs_diff, sup: f.sup(), nodes_compared })
}

/// The particle values as a field on the particles' own (moved) mesh, clipped to `[0, 1]`.
pub fn particles_on_grid(ps: &ParticleSet, grid: Arc<Grid>) -> Result<Field> {
    let values = grid.nodes().iter().map(|&z| interp_linear(&ps.positions, &ps.values, z)).collect();
    Field::new(grid, values, ps.time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_data_follows_riccati() {
        let g = Arc::new(Grid::uniform(16).unwrap());
        let f = Field::from_fn(g, 0.0, |_| 1.0).unwrap();
        let cfg = SolverConfig { pressure_on: false, cfl: 0.05, ..Default::default() };
        let ps = integrate_characteristics(&f, 17, 0.5, &cfg).unwrap();
        assert_relative_eq!(ps.values[3], 2.0, max_relative = 1e-7);
        // Ẋ = A X with A = 1/(1 − t)
        assert_relative_eq!(ps.positions[16], 2.0, max_relative = 1e-7);
    }

    #[test]
    fn time_mismatch_is_a_contract_error() {
        let g = Arc::new(Grid::uniform(16).unwrap());
        let f = Field::from_fn(g, 0.0, |z| z - 0.5).unwrap();
        let ps = ParticleSet { positions: f.grid.nodes().to_vec(), values: f.values.clone(), time: 1.0 };
        assert!(matches!(compare_to_eulerian(&ps, &f), Err(Error::Contract(_))));
    }

    #[test]
    fn interpolation() {
        let xs = [0.0, 1.0, 3.0];
        let ys = [0.0, 2.0, 6.0];
        assert_eq!(interp_linear(&xs, &ys, 2.0), 4.0);
        assert_eq!(interp_linear(&xs, &ys, 5.0), 6.0);
    }
}
