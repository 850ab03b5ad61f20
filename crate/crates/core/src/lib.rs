//! Steady stratified periodic water waves: laminar flows, bifurcation
//! speeds, nonlinear wave solvers in height and stream-function form, and
//! reflection diagnostics for symmetry.

pub mod error;
pub mod field;
pub mod grid;
pub mod height;
pub mod kv;
pub mod laminar;
pub mod linalg;
pub mod params;
pub mod profile;
pub mod stream;
pub mod symmetry;

pub use error::{Error, Result};
pub use field::HeightField;
pub use grid::{make_grid, Grid2D};
pub use laminar::{
    bifurcation_lambdas, dispersion_lambdas, find_stagnation_depths, laminar_psi, laminar_psi_y, Branch, LaminarFlow,
    StagnationCase, StagnationClassification,
};
pub use params::FluidParameters;
pub use profile::{linear_stratification, StratificationProfile};
pub use height::{
    assemble_linearization, check_discrete_max_principle, continue_branch, laminar_height_field,
    newton_solve, pde_residual, recover_physical, BranchPoint, ContinuationOptions, DiscreteOperator,
    MaxPrincipleOptions, MaxPrincipleReport, PhysicalFields, ResidualField, SolutionBranch,
    SolveReport,
};
pub use stream::{
    bernoulli_residual, locate_stagnation_points, solve_dirichlet, solve_free_boundary, solve_wave,
    surface_slope_check, FreeBoundaryOptions, SlopeReport, StagnationPoint, StreamSolution,
    SurfaceShape,
};
pub use symmetry::{
    asymmetry_norm, check_monotone_streamlines, moving_plane_sweep_height, reflect_height,
    reflect_stream, serrin_edge_check, CaseTag, EdgePointTable, ReflectionReport,
};
