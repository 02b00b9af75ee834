//! Cut-set capacity upper bounds for symmetric two-layer Gaussian relay
//! networks.
//!
//! The network model has a source broadcasting to `N` first-layer relays over
//! gain-`r1` channels, a second layer of `N` relays listening to the coherent
//! sum of the first layer over gain-`r2` channels, and a destination listening
//! to the coherent sum of the second layer over a gain-`r3` channel. The
//! single-layer (diamond) special case drops the middle hop.
//!
//! Everything revolves around quadratic forms `1^T Q_{T|C} 1` of the all-ones
//! vector over conditional covariances of a structured `2N x 2N` correlation
//! matrix: unit diagonal, `rho1` within the first layer, `rho2` within the
//! second, `rho12` across layers. Closed forms for these quadratic forms
//! (`psi`, `phi`, `mu`) feed sup-min optimizers that search correlation
//! parameters against the worst cut.
//!
//! Module map:
//!
//! - [`linalg`]: dense symmetric eigendecomposition, Moore-Penrose
//!   pseudoinverse, generalized Schur complements, all-ones quadratic forms.
//!   This is the independent oracle every closed form is checked against.
//! - [`covariance`]: the structured correlation matrix, its closed-form
//!   spectrum, feasibility (positive semidefiniteness), and the admissible
//!   `rho12` intervals.
//! - [`quadforms`]: the closed-form quadratic forms `psi`, `phi`, `mu`, their
//!   boundary-configuration values, limit classification along degenerate
//!   paths, and the second derivative of `phi` in `rho12` at zero.
//! - [`bounds`]: cut enumeration, per-cut objectives, and the sup-min bound
//!   optimizers (single-layer, two-layer, and the decoupled per-pair variant).
//! - [`verify`]: seeded self-check suites that re-derive the closed forms
//!   against the dense oracle and report structured pass/fail evidence.

pub mod bounds;
pub mod covariance;
pub mod error;
pub mod linalg;
pub mod quadforms;
pub mod verify;

pub use bounds::{
    enumerate_cuts, layered_bound, lemma2_objective, nd_bound, special_mu_bound, theorem2_bound,
    theorem2_pair_value, v2_additive_constant, BoundResult, BoundVariant, Lemma2Variant, LogBase,
    ObjectiveVariant, OptimizerConfig, Rho12Mode, SolverMeta, Theorem2PairValue, Theorem2Results,
};
pub use covariance::{
    build_cov, eigenvalues_closed, eigenvalues_closed_expanded, eigenvalues_equal_rho_forms,
    is_feasible, rho12_feasible_interval, zeta_interval, CorrelationParams, NetworkParams,
    ZetaInterval, FEASIBILITY_TOL,
};
pub use error::Error;
pub use linalg::{eigen_sym, gen_schur, pinv, pinv_with_tol, quad_form_ones, IndexSet, SymMatrix};
pub use quadforms::{
    d2phi_at_zero, limit_checks, mu, phi, phi_special, psi, psi_with_sign, schur_oracle_quadform,
    Cut, LimitClass, LimitOutcome, LimitPath, LimitReport, OracleLayer, PsiDenomSign,
    SchurIntermediates, DEGENERACY_TOL,
};
pub use verify::{
    verify_eigen, verify_lemma3, verify_limits, verify_maxima, verify_oracle,
    verify_timeshare_onesided, Failure, Finding, VerifyReport,
};

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
