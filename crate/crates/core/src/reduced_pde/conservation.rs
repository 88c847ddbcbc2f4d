use super::solver::{MeanMode, Trajectory};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MeanReport {
    pub mode: MeanMode,
    /// `max_t |∫a| / sup|a|`.
    pub max_relative_mean: f64,
    /// `max_t |m' + m a(·,1) − 2∫a² (pressureless only)|` at interior records.
    pub law_residual: f64,
    /// Scale of the law terms, `max_t |m a(·,1)|` plus the pressureless source.
    pub law_scale: f64,
}

/// Checks the evolution of the mean `m(t) = ∫₀¹ a` along a trajectory.
///
/// Exact solutions satisfy `m' = −m a(t,1)` (plus `2∫a²` without pressure);
/// projected runs keep `m ≡ 0`.
pub fn mean_evolution_check(traj: &Trajectory) -> Result<MeanReport> {
    let r = &traj.norms;
    if r.len() < 3 {
        return Err(Error::Contract("mean check needs at least 3 time records".into()));
    }
    let max_relative_mean = r.iter().map(|x| x.mean.abs() / x.sup.max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
    let mut law_residual: f64 = 0.0;
    let mut law_scale: f64 = 0.0;
    for i in 1..r.len() - 1 {
        let (p, c, n) = (&r[i - 1], &r[i], &r[i + 1]);
        let h0 = c.t - p.t;
        let h1 = n.t - c.t;
        if h0 <= 0.0 || h1 <= 0.0 {
            continue;
        }
        let dm = -h1 / (h0 * (h0 + h1)) * p.mean + (h1 - h0) / (h0 * h1) * c.mean + h0 / (h1 * (h0 + h1)) * n.mean;
        let source = if traj.pressure_on { 0.0 } else { 2.0 * c.int_a2 };
        law_residual = law_residual.max((dm + c.mean * c.a1 - source).abs());
        law_scale = law_scale.max((c.mean * c.a1).abs() + source.abs());
    }
    Ok(MeanReport { mode: traj.mean_mode, max_relative_mean, law_residual, law_scale })
}
