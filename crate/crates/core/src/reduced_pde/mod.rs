//! Method-of-lines solver for `a_t = a² − (∫₀^Z a) a_Z − 2∫₀¹ a²` on graded grids.

mod conservation;
mod grid;
mod scheme;
mod solver;

pub use conservation::{mean_evolution_check, MeanReport};
pub use grid::{Field, Grading, Grid};
pub use scheme::{fornberg_weights, Operators, Scheme};
pub use solver::{
    adaptive_dt, cumulative_integral, rhs, run, step, MeanMode, NormRecord, Solver, SolverConfig, SupStop, Termination,
    Trajectory,
};
