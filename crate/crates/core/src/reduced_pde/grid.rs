use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grading {
    /// `Z_j = (j/N)^g`.
    Power { g: f64 },
    /// `Z_0 = 0`, then geometric from `z_min` to 1.
    Geometric { z_min: f64 },
    Custom,
}

/// Strictly increasing nodes `0 = Z_0 < … < Z_N = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    grading: Grading,
}

pub const MIN_CELLS: usize = 16;

impl Grid {
    pub fn power(n: usize, g: f64) -> Result<Self> {
        check_cells(n)?;
        if !(g >= 1.0 && g.is_finite()) {
            return Err(Error::constraint("grid.g ≥ 1", format!("got {g}")));
        }
        let nodes = (0..=n).map(|j| (j as f64 / n as f64).powf(g)).collect();
        Ok(Self { nodes, grading: Grading::Power { g } })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::power(n, 1.0)
    }

    pub fn geometric(n: usize, z_min: f64) -> Result<Self> {
        check_cells(n)?;
        if !(z_min > 0.0 && z_min < 1.0) {
            return Err(Error::constraint("0 < grid.zmin < 1", format!("got {z_min}")));
        }
        let mut nodes = Vec::with_capacity(n + 1);
        nodes.push(0.0);
        for j in 1..=n {
            nodes.push(z_min.powf(1.0 - (j - 1) as f64 / (n - 1) as f64));
        }
        nodes[n] = 1.0;
        Ok(Self { nodes, grading: Grading::Geometric { z_min } })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        check_cells(nodes.len().saturating_sub(1))?;
        if nodes[0] != 0.0 || *nodes.last().unwrap() != 1.0 {
            return Err(Error::constraint("Z_0 = 0 and Z_N = 1", "grid endpoints"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::constraint("strictly increasing nodes", "grid is not monotone"));
        }
        Ok(Self { nodes, grading: Grading::Custom })
    }

    /// A grid with the same grading and `n` cells.
    pub fn regraded(&self, n: usize) -> Result<Self> {
        match self.grading {
            Grading::Power { g } => Self::power(n, g),
            Grading::Geometric { z_min } => Self::geometric(n, z_min),
            Grading::Custom => Err(Error::Contract("custom grids cannot be regraded".into())),
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    pub fn max_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

fn check_cells(n: usize) -> Result<()> {
    if n < MIN_CELLS {
        Err(Error::constraint("grid.n ≥ 16", format!("got {n} cells")))
    } else {
        Ok(())
    }
}

/// Nodal values of `a(t, ·)` on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
    pub time: f64,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Contract(format!(
                "field has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("field contains non-finite values".into()));
        }
        Ok(Self { grid, values, time })
    }

    pub fn from_fn(grid: Arc<Grid>, time: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&z| f(z)).collect();
        Self::new(grid, values, time)
    }

    pub fn sup(&self) -> f64 {
        sup_abs(&self.values)
    }
}

pub(crate) fn sup_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradings() {
        let p = Grid::power(16, 2.0).unwrap();
        assert_eq!(p.nodes()[1], 1.0 / 256.0);
        let g = Grid::geometric(32, 1e-8).unwrap();
        assert_eq!(g.nodes()[1], 1e-8);
        assert_eq!(*g.nodes().last().unwrap(), 1.0);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        assert!(Grid::power(8, 1.0).is_err());
        assert!(Grid::power(32, 0.5).is_err());
    }

    #[test]
    fn regrade_keeps_grading() {
        let g = Grid::geometric(32, 1e-6).unwrap().regraded(64).unwrap();
        assert_eq!(g.grading(), Grading::Geometric { z_min: 1e-6 });
        assert_eq!(g.cells(), 64);
    }
}
