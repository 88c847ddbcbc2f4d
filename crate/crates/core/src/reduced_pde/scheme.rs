//! Spatial operators: upwind derivatives and cell quadrature.

use super::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// First-order upwind differences, trapezoid quadrature.
    #[default]
    Upwind1,
    /// Six-point biased upwind differences with matching six-point quadrature.
    Upwind5,
}

#[derive(Debug, Clone)]
struct Stencil {
    start: usize,
    w: Vec<f64>,
}

impl Stencil {
    #[inline]
    fn apply(&self, v: &[f64]) -> f64 {
        self.w.iter().zip(&v[self.start..]).map(|(w, x)| w * x).sum()
    }
}

/// Precomputed stencils for one grid and scheme.
#[derive(Debug, Clone)]
pub struct Operators {
    pub scheme: Scheme,
    back: Vec<Stencil>,
    fwd: Vec<Stencil>,
    cells: Vec<Stencil>,
    weights: Vec<f64>,
    dz0: Stencil,
}

impl Operators {
    pub fn new(grid: &Grid, scheme: Scheme) -> Self {
        let z = grid.nodes();
        let n = grid.cells();
        let (back, fwd, cells): (Vec<Stencil>, Vec<Stencil>, Vec<Stencil>) = match scheme {
            Scheme::Upwind1 => {
                let two = |i: usize| {
                    let h = z[i + 1] - z[i];
                    Stencil { start: i, w: vec![-1.0 / h, 1.0 / h] }
                };
                let back = (0..=n).map(|j| two(j.max(1) - 1)).collect();
                let fwd = (0..=n).map(|j| two(j.min(n - 1))).collect();
                let cells = (0..n)
                    .map(|j| {
                        let h = z[j + 1] - z[j];
                        Stencil { start: j, w: vec![0.5 * h, 0.5 * h] }
                    })
                    .collect();
                (back, fwd, cells)
            }
            Scheme::Upwind5 => {
                let deriv = |j: usize, lead: isize| {
                    let start = (j as isize - lead).clamp(0, n as isize - 5) as usize;
                    let w = fornberg_weights(z[j], &z[start..start + 6], 1).pop().unwrap();
                    Stencil { start, w }
                };
                let back = (0..=n).map(|j| deriv(j, 3)).collect();
                let fwd = (0..=n).map(|j| deriv(j, 2)).collect();
                let cells = (0..n)
                    .map(|j| {
                        let start = (j as isize - 2).clamp(0, n as isize - 5) as usize;
                        Stencil { start, w: cell_weights(&z[start..start + 6], z[j], z[j + 1]) }
                    })
                    .collect();
                (back, fwd, cells)
            }
        };
        let mut weights = vec![0.0; n + 1];
        for c in &cells {
            for (k, w) in c.w.iter().enumerate() {
                weights[c.start + k] += w;
            }
        }
        let dz0 = Stencil { start: 0, w: fornberg_weights(0.0, &z[0..3], 1).pop().unwrap() };
        Self { scheme, back, fwd, cells, weights, dz0 }
    }

    /// Nodal quadrature weights for `∫₀¹`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integral(&self, v: &[f64]) -> f64 {
        self.weights.iter().zip(v).map(|(w, x)| w * x).sum()
    }

    pub fn integral_sq(&self, v: &[f64]) -> f64 {
        self.weights.iter().zip(v).map(|(w, x)| w * x * x).sum()
    }

    /// `V_j = ∫₀^{Z_j} v`.
    pub fn cumulative_into(&self, v: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
        let mut acc = 0.0;
        for (j, c) in self.cells.iter().enumerate() {
            acc += c.apply(v);
            out[j + 1] = acc;
        }
    }

    /// `∂_Z v` at node `j`, biased against the direction of `speed`.
    #[inline]
    pub fn upwind_derivative(&self, v: &[f64], j: usize, speed: f64) -> f64 {
        if speed >= 0.0 {
            self.back[j].apply(v)
        } else {
            self.fwd[j].apply(v)
        }
    }

    /// Second-order one-sided `∂_Z v(0)`.
    pub fn derivative_at_origin(&self, v: &[f64]) -> f64 {
        self.dz0.apply(v)
    }
}

/// Finite-difference weights for derivatives `0..=m` at `x0` on nodes `xs`
/// (Fornberg's recursion). Row `k` holds the weights for the `k`-th derivative.
pub fn fornberg_weights(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Weights integrating the interpolant through `xs` over `[a, b]`.
fn cell_weights(xs: &[f64], a: f64, b: f64) -> Vec<f64> {
    // three-point Gauss–Legendre is exact for the degree-5 Lagrange basis
    const GL: [(f64, f64); 3] = [
        (-0.774_596_669_241_483_4, 5.0 / 9.0),
        (0.0, 8.0 / 9.0),
        (0.774_596_669_241_483_4, 5.0 / 9.0),
    ];
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    (0..xs.len())
        .map(|i| {
            GL.iter()
                .map(|&(x, g)| {
                    let t = c + h * x;
                    let l: f64 = (0..xs.len())
                        .filter(|&k| k != i)
                        .map(|k| (t - xs[k]) / (xs[i] - xs[k]))
                        .product();
                    g * h * l
                })
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fornberg_central_difference() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[1], vec![-0.5, 0.0, 0.5]);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
    }

    #[test]
    fn high_order_operators_are_exact_on_quintics() {
        let g = Grid::power(40, 2.0).unwrap();
        let ops = Operators::new(&g, Scheme::Upwind5);
        let f = |z: f64| 1.0 + z - 2.0 * z.powi(3) + z.powi(5);
        let df = |z: f64| 1.0 - 6.0 * z * z + 5.0 * z.powi(4);
        let v: Vec<f64> = g.nodes().iter().map(|&z| f(z)).collect();
        for (j, &z) in g.nodes().iter().enumerate() {
            assert_relative_eq!(ops.upwind_derivative(&v, j, 1.0), df(z), epsilon = 1e-9);
            assert_relative_eq!(ops.upwind_derivative(&v, j, -1.0), df(z), epsilon = 1e-9);
        }
        let mut cum = vec![0.0; v.len()];
        ops.cumulative_into(&v, &mut cum);
        for (j, &z) in g.nodes().iter().enumerate() {
            let exact = z + z * z / 2.0 - z.powi(4) / 2.0 + z.powi(6) / 6.0;
            assert_relative_eq!(cum[j], exact, epsilon = 1e-13);
        }
    }

    #[test]
    fn first_order_weights_are_trapezoid() {
        let g = Grid::uniform(16).unwrap();
        let ops = Operators::new(&g, Scheme::Upwind1);
        let h = 1.0 / 16.0;
        assert_relative_eq!(ops.weights()[0], h / 2.0);
        assert_relative_eq!(ops.weights()[5], h);
        assert_relative_eq!(ops.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }
}
