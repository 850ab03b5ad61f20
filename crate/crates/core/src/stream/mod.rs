//! Constant-Bernoulli free-boundary problem for the pseudo-stream function
//! on `0 < y < eta(x)`, where interior stagnation points are allowed.

mod free_boundary;
mod slope;
mod solution;
mod stagnation;
mod surface;

pub use free_boundary::{solve_free_boundary, solve_wave, FreeBoundaryOptions};
pub use slope::{surface_slope_check, SlopeReport};
pub use solution::{bernoulli_residual, solve_dirichlet, solve_poisson, StreamSolution};
pub use stagnation::{locate_stagnation_points, StagnationPoint};
pub use surface::SurfaceShape;
