//! Lift of a reduced solution to the 2D hydrostatic Euler fields on `[−L, L] × [0, 1]`.

use crate::error::{Error, Result};
use crate::reduced_pde::{cumulative_integral, fornberg_weights, Field};

#[derive(Debug, Clone, PartialEq)]
pub struct Lift2d {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub a: Vec<f64>,
    /// `u[i][j] = −X_i a(Z_j)`.
    pub u: Vec<Vec<f64>>,
    /// `w(Z) = ∫₀^Z a`, independent of `X`.
    pub w: Vec<f64>,
    /// `p(X) = −X² ∫₀¹ a²`.
    pub p: Vec<f64>,
}

pub fn lift_to_2d(f: &Field, x_nodes: &[f64]) -> Result<Lift2d> {
    if x_nodes.len() < 3 || x_nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Contract("x_nodes must be ≥ 3 strictly increasing values".into()));
    }
    let z = f.grid.nodes().to_vec();
    let a = f.values.clone();
    let w = cumulative_integral(f).values;
    let sq = Field { grid: f.grid.clone(), values: a.iter().map(|v| v * v).collect(), time: f.time };
    let int_a2 = *cumulative_integral(&sq).values.last().unwrap();
    let u = x_nodes.iter().map(|&x| a.iter().map(|&v| -x * v).collect()).collect();
    let p = x_nodes.iter().map(|&x| -x * x * int_a2).collect();
    Ok(Lift2d { x: x_nodes.to_vec(), z, a, u, w, p })
}

/// Second-order first-derivative stencils (one-sided at the ends).
fn d1_stencils(x: &[f64]) -> Vec<(usize, [f64; 3])> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let s = i.saturating_sub(1).min(n - 3);
            let w = fornberg_weights(x[i], &x[s..s + 3], 1).pop().unwrap();
            (s, [w[0], w[1], w[2]])
        })
        .collect()
}

fn apply(st: &(usize, [f64; 3]), v: impl Fn(usize) -> f64) -> f64 {
    st.1[0] * v(st.0) + st.1[1] * v(st.0 + 1) + st.1[2] * v(st.0 + 2)
}

/// `sup |u_t + u u_X + w u_Z + p_X|` with `u_t = −X a_rate`.
pub fn momentum_residual(lift: &Lift2d, a_rate: &[f64]) -> Result<f64> {
    if a_rate.len() != lift.z.len() {
        return Err(Error::Contract("a_rate length differs from the grid".into()));
    }
    let dx = d1_stencils(&lift.x);
    let dz = d1_stencils(&lift.z);
    let mut sup: f64 = 0.0;
    for i in 0..lift.x.len() {
        let px = apply(&dx[i], |k| lift.p[k]);
        for j in 0..lift.z.len() {
            let u = lift.u[i][j];
            let ut = -lift.x[i] * a_rate[j];
            let ux = apply(&dx[i], |k| lift.u[k][j]);
            let uz = apply(&dz[j], |k| lift.u[i][k]);
            sup = sup.max((ut + u * ux + lift.w[j] * uz + px).abs());
        }
    }
    Ok(sup)
}

/// `sup |u_X + w_Z|`, with `u_X` differenced in `X` and `w_Z = a`.
pub fn incompressibility_residual(lift: &Lift2d) -> f64 {
    let dx = d1_stencils(&lift.x);
    let mut sup: f64 = 0.0;
    for i in 0..lift.x.len() {
        for j in 0..lift.z.len() {
            let ux = apply(&dx[i], |k| lift.u[k][j]);
            sup = sup.max((ux + lift.a[j]).abs());
        }
    }
    sup
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduced_pde::{rhs, Grid, SolverConfig};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn xs() -> Vec<f64> {
        (0..=20).map(|i| -1.0 + 0.1 * i as f64).collect()
    }

    #[test]
    fn cosine_closed_forms() {
        let g = Arc::new(Grid::uniform(2000).unwrap());
        let f = Field::from_fn(g, 0.0, |z| (2.0 * PI * z).cos()).unwrap();
        let l = lift_to_2d(&f, &xs()).unwrap();
        assert_relative_eq!(l.p[0], -0.5, max_relative = 1e-5);
        assert_relative_eq!(l.w[500], 1.0 / (2.0 * PI), max_relative = 1e-5);
        assert!(incompressibility_residual(&l) < 1e-13);
    }

    #[test]
    fn zero_data() {
        let g = Arc::new(Grid::uniform(16).unwrap());
        let f = Field::from_fn(g, 0.0, |_| 0.0).unwrap();
        let l = lift_to_2d(&f, &xs()).unwrap();
        let r = rhs(&f, &SolverConfig::default()).unwrap();
        assert_eq!(momentum_residual(&l, &r).unwrap(), 0.0);
    }
}
