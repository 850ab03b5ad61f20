use thiserror::Error;

use crate::field::HeightField;
use crate::height::{SolutionBranch, SolveReport};
use crate::stream::StreamSolution;

/// Errors raised by the solvers and diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("laminar stream function is not strictly decreasing in y: {0}")]
    NonMonotoneStream(String),

    #[error("stagnation encountered: min h_p = {min_hp:e}")]
    StagnationEncountered { min_hp: f64 },

    #[error("bottom condition violated: max |h(q, p0)| = {max_abs:e}")]
    BedCondition { max_abs: f64 },

    #[error("Newton iteration did not converge: residual {:e} after {} iterations", .report.residual, .report.iterations)]
    NoConvergence {
        best: Box<HeightField>,
        report: SolveReport,
    },

    #[error("free-boundary iteration did not converge: residual {residual:e} after {iterations} iterations")]
    StreamNoConvergence {
        best: Box<StreamSolution>,
        residual: f64,
        iterations: usize,
    },

    #[error("branch terminated after {} accepted steps: {reason}", .branch.len())]
    BranchTerminated {
        branch: Box<SolutionBranch>,
        reason: String,
    },

    #[error("singular sigma mapping: surface height {min_eta:e} at x = {x}")]
    SingularMapping { min_eta: f64, x: f64 },

    #[error("stagnation point at ({x}, {y}) violates the interior margin (local surface {eta})")]
    StagnationOnSurface { x: f64, y: f64, eta: f64 },

    #[error("surface stagnation: |psi_y| = {psi_y:e} at x = {x}")]
    SurfaceStagnation { x: f64, psi_y: f64 },

    #[error("surface minimum not at q = -pi after phase alignment (found at index {index})")]
    TroughNotAligned { index: usize },

    #[error("reflection axis {lambda} is not on the half-grid (spacing {spacing})")]
    OffGridReflection { lambda: f64, spacing: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("linear solver failure: {0}")]
    LinearSolver(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the mathematical model (as opposed to bad input).
    pub fn is_model_error(&self) -> bool {
        matches!(
            self,
            Error::NonMonotoneStream(_)
                | Error::StagnationEncountered { .. }
                | Error::NoConvergence { .. }
                | Error::StreamNoConvergence { .. }
                | Error::BranchTerminated { .. }
                | Error::SingularMapping { .. }
                | Error::StagnationOnSurface { .. }
                | Error::SurfaceStagnation { .. }
                | Error::TroughNotAligned { .. }
                | Error::LinearSolver(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
