use std::sync::Arc;

use super::grid::{sup_abs, Field, Grid};
use super::scheme::{Operators, Scheme};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanMode {
    /// Evolve the equation as written; `∫a` follows `m' = −m a(·,1)`.
    #[default]
    Literal,
    /// Remove the discrete mean after every step.
    Projected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupStop {
    Absolute(f64),
    /// Multiple of the initial sup norm.
    Factor(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub pressure_on: bool,
    pub cfl: f64,
    pub sup_stop: SupStop,
    pub mean_mode: MeanMode,
    pub scheme: Scheme,
    pub max_steps: usize,
    /// Store every k-th step (0 stores only the endpoints and `output_times`).
    pub snapshot_every: usize,
    /// Times that are hit exactly and always stored.
    pub output_times: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            pressure_on: true,
            cfl: 0.4,
            sup_stop: SupStop::Factor(1e4),
            mean_mode: MeanMode::Literal,
            scheme: Scheme::Upwind1,
            max_steps: 2_000_000,
            snapshot_every: 1,
            output_times: Vec::new(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::constraint("0 < solver.cfl < 1", format!("got {}", self.cfl)));
        }
        match self.sup_stop {
            SupStop::Absolute(v) | SupStop::Factor(v) if !(v > 0.0) => {
                Err(Error::constraint("sup_norm_stop > 0", format!("got {v}")))
            }
            SupStop::Factor(v) if v <= 1.0 => Err(Error::constraint("sup_norm_stop > initial sup norm", format!("factor {v}"))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormRecord {
    pub t: f64,
    pub sup: f64,
    pub dza0: f64,
    pub mean: f64,
    pub dt: f64,
    pub a0: f64,
    pub a1: f64,
    pub int_a2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Horizon,
    SupNorm,
    MaxSteps,
    /// A step produced non-finite values; the trajectory ends at the last finite state.
    Overflow { time: f64 },
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Arc<Grid>,
    pub snapshots: Vec<Field>,
    pub norms: Vec<NormRecord>,
    pub termination: Termination,
    pub sup_stop: f64,
    pub pressure_on: bool,
    pub mean_mode: MeanMode,
    /// Mean removed from the initial data in projected mode.
    pub initial_mean_removed: f64,
}

impl Trajectory {
    pub fn last(&self) -> &Field {
        self.snapshots.last().expect("trajectory has snapshots")
    }
}

/// Grid-bound solver with precomputed operators.
#[derive(Debug, Clone)]
pub struct Solver {
    pub grid: Arc<Grid>,
    pub config: SolverConfig,
    pub ops: Operators,
}

impl Solver {
    pub fn new(grid: Arc<Grid>, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let ops = Operators::new(&grid, config.scheme);
        Ok(Self { grid, config, ops })
    }

    pub fn cumulative(&self, a: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; a.len()];
        self.ops.cumulative_into(a, &mut v);
        v
    }

    pub fn rhs_into(&self, a: &[f64], speed: &mut [f64], out: &mut [f64]) {
        self.ops.cumulative_into(a, speed);
        let p = if self.config.pressure_on { 2.0 * self.ops.integral_sq(a) } else { 0.0 };
        for j in 0..a.len() {
            let v = speed[j];
            out[j] = a[j] * a[j] - v * self.ops.upwind_derivative(a, j, v) - p;
        }
    }

    pub fn rhs(&self, a: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; a.len()];
        let mut out = vec![0.0; a.len()];
        self.rhs_into(a, &mut v, &mut out);
        out
    }

    pub fn adaptive_dt(&self, a: &[f64]) -> f64 {
        let v = self.cumulative(a);
        let z = self.grid.nodes();
        let mut lim = f64::INFINITY;
        for j in 1..z.len() {
            let s = v[j].abs().max(v[j - 1].abs()) + f64::EPSILON;
            lim = lim.min((z[j] - z[j - 1]) / s);
        }
        self.config.cfl * lim.min(1.0 / (sup_abs(a) + 1.0))
    }

    /// Removes the discrete mean in place and returns it.
    pub fn project(&self, a: &mut [f64]) -> f64 {
        let m = self.ops.integral(a);
        a.iter_mut().for_each(|x| *x -= m);
        m
    }

    /// One classical RK4 step.
    pub fn step(&self, a: &[f64], t: f64, dt: f64) -> Result<Vec<f64>> {
        let n = a.len();
        let mut v = vec![0.0; n];
        let mut k1 = vec![0.0; n];
        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        self.rhs_into(a, &mut v, &mut k1);
        axpy(&mut tmp, a, 0.5 * dt, &k1);
        self.rhs_into(&tmp, &mut v, &mut k2);
        axpy(&mut tmp, a, 0.5 * dt, &k2);
        self.rhs_into(&tmp, &mut v, &mut k3);
        axpy(&mut tmp, a, dt, &k3);
        self.rhs_into(&tmp, &mut v, &mut k4);
        let mut next: Vec<f64> = (0..n)
            .map(|j| a[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
            .collect();
        if next.iter().any(|x| !x.is_finite()) {
            return Err(Error::Overflow { time: t + dt });
        }
        if self.config.mean_mode == MeanMode::Projected {
            self.project(&mut next);
        }
        Ok(next)
    }

    pub fn record(&self, a: &[f64], t: f64, dt: f64) -> NormRecord {
        NormRecord {
            t,
            sup: sup_abs(a),
            dza0: self.ops.derivative_at_origin(a),
            mean: self.ops.integral(a),
            dt,
            a0: a[0],
            a1: *a.last().unwrap(),
            int_a2: self.ops.integral_sq(a),
        }
    }

    /// Integrates from `init` until `horizon`, the sup-norm stop or `max_steps`.
    pub fn run(&self, init: &Field, horizon: f64) -> Result<Trajectory> {
        if !Arc::ptr_eq(&init.grid, &self.grid) && *init.grid != *self.grid {
            return Err(Error::Contract("initial field lives on a different grid".into()));
        }
        if !(horizon > init.time) {
            return Err(Error::Contract(format!("horizon {horizon} must exceed t0 = {}", init.time)));
        }
        let mut a = init.values.clone();
        let mut removed = 0.0;
        if self.config.mean_mode == MeanMode::Projected {
            removed = self.project(&mut a);
        }
        let sup0 = sup_abs(&a);
        let sup_stop = match self.config.sup_stop {
            SupStop::Absolute(v) => v,
            SupStop::Factor(f) if sup0 > 0.0 => f * sup0,
            SupStop::Factor(_) => f64::INFINITY,
        };
        if sup_stop <= sup0 {
            return Err(Error::constraint(
                "sup_norm_stop > initial sup norm",
                format!("{sup_stop:e} ≤ {sup0:e}"),
            ));
        }
        let mut outputs: Vec<f64> = self.config.output_times.iter().copied().filter(|&x| x > init.time).collect();
        outputs.sort_by(f64::total_cmp);
        outputs.dedup();
        let mut next_out = 0;

        let mut t = init.time;
        let mut snapshots = vec![Field { grid: self.grid.clone(), values: a.clone(), time: t }];
        let mut norms = vec![self.record(&a, t, 0.0)];
        let mut steps = 0usize;
        let termination = loop {
            if t >= horizon {
                break Termination::Horizon;
            }
            if sup_abs(&a) >= sup_stop {
                break Termination::SupNorm;
            }
            if steps >= self.config.max_steps {
                break Termination::MaxSteps;
            }
            let mut dt = self.adaptive_dt(&a).min(horizon - t);
            let mut hit_output = false;
            if next_out < outputs.len() && t + dt >= outputs[next_out] {
                dt = outputs[next_out] - t;
                hit_output = true;
            }
            let a_next = match self.step(&a, t, dt) {
                Ok(v) => v,
                Err(Error::Overflow { time }) => break Termination::Overflow { time },
                Err(e) => return Err(e),
            };
            a = a_next;
            t = if hit_output {
                let o = outputs[next_out];
                next_out += 1;
                o
            } else if t + dt >= horizon {
                horizon
            } else {
                t + dt
            };
            steps += 1;
            norms.push(self.record(&a, t, dt));
            let every = self.config.snapshot_every;
            if hit_output || (every > 0 && steps.is_multiple_of(every)) {
                snapshots.push(Field { grid: self.grid.clone(), values: a.clone(), time: t });
            }
        };
        if snapshots.last().map(|s| s.time) != Some(t) {
            snapshots.push(Field { grid: self.grid.clone(), values: a, time: t });
        }
        Ok(Trajectory {
            grid: self.grid.clone(),
            snapshots,
            norms,
            termination,
            sup_stop,
            pressure_on: self.config.pressure_on,
            mean_mode: self.config.mean_mode,
            initial_mean_removed: removed,
        })
    }
}

fn axpy(out: &mut [f64], x: &[f64], s: f64, y: &[f64]) {
    for j in 0..out.len() {
        out[j] = x[j] + s * y[j];
    }
}

/// `∫₀^Z a` at every node, with trapezoid cells.
pub fn cumulative_integral(f: &Field) -> Field {
    let ops = Operators::new(&f.grid, Scheme::Upwind1);
    let mut v = vec![0.0; f.values.len()];
    ops.cumulative_into(&f.values, &mut v);
    Field { grid: f.grid.clone(), values: v, time: f.time }
}

pub fn rhs(f: &Field, config: &SolverConfig) -> Result<Vec<f64>> {
    Ok(Solver::new(f.grid.clone(), config.clone())?.rhs(&f.values))
}

pub fn adaptive_dt(f: &Field, config: &SolverConfig) -> Result<f64> {
    Ok(Solver::new(f.grid.clone(), config.clone())?.adaptive_dt(&f.values))
}

pub fn step(f: &Field, dt: f64, config: &SolverConfig) -> Result<Field> {
    if !(dt > 0.0) {
        return Err(Error::Contract(format!("step size must be positive, got {dt}")));
    }
    let s = Solver::new(f.grid.clone(), config.clone())?;
    let values = s.step(&f.values, f.time, dt)?;
    Ok(Field { grid: f.grid.clone(), values, time: f.time + dt })
}

pub fn run(init: &Field, config: &SolverConfig, horizon: f64) -> Result<Trajectory> {
    Solver::new(init.grid.clone(), config.clone())?.run(init, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(n: usize) -> Arc<Grid> {
        Arc::new(Grid::uniform(n).unwrap())
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let f = Field::from_fn(grid(32), 0.0, |_| 0.0).unwrap();
        let cfg = SolverConfig::default();
        assert_eq!(adaptive_dt(&f, &cfg).unwrap(), cfg.cfl);
        let tr = run(&f, &cfg, 1.0).unwrap();
        assert!(tr.last().values.iter().all(|&x| x == 0.0));
        assert_eq!(tr.termination, Termination::Horizon);
    }

    #[test]
    fn cumulative_of_linear_is_exact() {
        let f = Field::from_fn(grid(64), 0.0, |z| 2.0 * z - 1.0).unwrap();
        let c = cumulative_integral(&f);
        for (z, v) in f.grid.nodes().iter().zip(&c.values) {
            assert_relative_eq!(*v, z * z - z, epsilon = 1e-15);
        }
    }

    #[test]
    fn constant_data_ode_without_pressure() {
        // a_t = a² for spatially constant data, a(t) = a0/(1 − a0 t)
        let f = Field::from_fn(grid(16), 0.0, |_| 1.0).unwrap();
        let cfg = SolverConfig { pressure_on: false, cfl: 0.05, ..Default::default() };
        let tr = run(&f, &cfg, 0.5).unwrap();
        assert_relative_eq!(tr.last().values[7], 2.0, max_relative = 1e-6);
    }

    #[test]
    fn rejects_bad_cfl() {
        let f = Field::from_fn(grid(16), 0.0, |_| 0.0).unwrap();
        let cfg = SolverConfig { cfl: 1.5, ..Default::default() };
        assert!(matches!(run(&f, &cfg, 1.0), Err(Error::Constraint { .. })));
    }

    #[test]
    fn output_times_are_hit_exactly() {
        let f = Field::from_fn(grid(32), 0.0, |z| (std::f64::consts::PI * z).cos()).unwrap();
        let cfg = SolverConfig { snapshot_every: 0, output_times: vec![0.123, 0.3], ..Default::default() };
        let tr = run(&f, &cfg, 0.5).unwrap();
        let times: Vec<f64> = tr.snapshots.iter().map(|s| s.time).collect();
        assert_eq!(times, vec![0.0, 0.123, 0.3, 0.5]);
    }

    #[test]
    fn projected_mode_keeps_zero_mean() {
        let f = Field::from_fn(grid(64), 0.0, |z| 0.3 + (std::f64::consts::PI * z).cos()).unwrap();
        let cfg = SolverConfig { mean_mode: MeanMode::Projected, ..Default::default() };
        let tr = run(&f, &cfg, 0.5).unwrap();
        assert_relative_eq!(tr.initial_mean_removed, 0.3, epsilon = 1e-12);
        assert!(tr.norms.iter().all(|r| r.mean.abs() <= 1e-14 * r.sup.max(1.0)));
    }
}
