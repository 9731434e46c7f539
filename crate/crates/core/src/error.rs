use thiserror::Error;

use crate::algebra::BlockShape;
use crate::integrator::TrajectoryDiagnostics;
use crate::solvers::SolverReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: BlockShape, right: BlockShape },

    #[error("invalid block shape: {0}")]
    InvalidShape(String),

    #[error("singular factor in block {block}")]
    SingularBlock { block: usize },

    #[error("block {block} is not skew-Hermitian (defect {defect:.3e})")]
    NotSkewHermitian { block: usize, defect: f64 },

    #[error("block {block} has nonzero trace (|Tr| = {trace:.3e}); it lies in the kernel direction")]
    NotTraceless { block: usize, trace: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension {dim} exceeds the limit {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("dense Newton did not converge after {iterations} steps (residual {residual:.3e})")]
    OracleNoConvergence { iterations: usize, residual: f64 },

    #[error("oracle Jacobian disagrees with finite differences (relative error {rel_error:.3e})")]
    OracleJacobianMismatch { rel_error: f64 },

    #[error("no real solution: {0}")]
    NoRealSolution(String),

    #[error("inner solver failed at step {step}: {}", report.summary())]
    StepFailed { step: usize, report: Box<SolverReport> },

    #[error("trajectory aborted at step {step}: {}", report.summary())]
    TrajectoryAborted {
        step: usize,
        report: Box<SolverReport>,
        partial: Box<TrajectoryDiagnostics>,
    },
}
