//! Probably certifiably correct minimum bisection for the two-community
//! stochastic block model.
//!
//! The pipeline has two halves. [`solver::solve`] produces a candidate
//! bisection quickly (spectral rounding plus swap refinement). [`certifier::certify`]
//! then builds the closed-form dual diagonal `dᵢ = xᵢ (Bx)ᵢ` and checks
//! `λ₂(D - B) > 0`; when that holds the candidate is provably the unique
//! minimum bisection. The certifier never accepts a candidate it cannot prove
//! optimal, whichever solver produced it.
//!
//! ```
//! use sbm_pcc::{make_params, sample_instance, ParamMode, SignedAdjacency};
//! use sbm_pcc::{pcc, CertifyConfig, SolverConfig};
//!
//! let params = make_params(200, ParamMode::LogScale { alpha: 16.0, beta: 2.0 }).unwrap();
//! let inst = sample_instance(&params, 7).unwrap();
//! let b = SignedAdjacency::from_graph(&inst.graph);
//! let (solution, report) = pcc(&b, &SolverConfig::default(), &CertifyConfig::default()).unwrap();
//! if report.is_certified() {
//!     assert!(solution.partition.eq_up_to_sign(&inst.hidden));
//! }
//! ```

pub mod certifier;
pub mod error;
pub mod io;
pub mod lanczos;
pub mod linops;
pub mod model;
pub mod oracle;
pub mod solver;

pub use certifier::{certify, CertificateReport, CertifyConfig, CertifyMethod, Reason, Status};
pub use error::{PccError, Result};
pub use linops::{DualDiagonal, SignedAdjacency};
pub use model::{make_params, sample_instance, Graph, Instance, ParamMode, Partition, SbmParams};
pub use solver::{solve, SolveOutcome, SolverConfig};

/// Solve, then certify the candidate. The solver metadata is attached to the
/// report diagnostics.
pub fn pcc(
    b: &SignedAdjacency,
    solver_cfg: &SolverConfig,
    certify_cfg: &CertifyConfig,
) -> Result<(SolveOutcome, CertificateReport)> {
    let solution = solve(b, solver_cfg)?;
    let mut report = certify(b, &solution.partition, certify_cfg)?;
    report.diagnostics.solver = Some(solution.meta.clone());
    Ok((solution, report))
}
