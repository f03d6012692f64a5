//! Fractional Green and Martin kernels on the unit ball, Schwarz
//! symmetrization of piecewise-constant sources, and numerical verification
//! of boundary Talenti-type comparison inequalities for `(-Δ)^s`.

pub mod error;
pub mod geometry;
pub mod kernels;
pub mod quadrature;
pub mod solver;
pub mod sources;
pub mod special;
pub mod talenti;

pub use error::{Error, Result};
pub use solver::SolutionHandle;
pub use sources::{BoundaryTrace, BumpSource, RadialProfile, SourceFunction};
pub use special::{LogBranch, Normalization, ProblemParams};
pub use talenti::VerificationReport;
