//! Height-function formulation: streamline heights `h(q, p)` over the
//! rectangle `[-pi, pi) x [p0, 0]`, valid while the flow has no
//! stagnation points.

mod continuation;
mod max_principle;
mod operator;
mod physical;
mod solve;

pub use continuation::{continue_branch, BranchPoint, ContinuationOptions, SolutionBranch};
pub use max_principle::{
    check_discrete_max_principle, Counterexample, MaxPrincipleOptions, MaxPrincipleReport,
};
pub use operator::{assemble_linearization, pde_residual, DiscreteOperator, ResidualField};
pub use physical::{recover_physical, PhysicalFields};
pub use solve::{laminar_height_field, newton_solve, SolveReport};
