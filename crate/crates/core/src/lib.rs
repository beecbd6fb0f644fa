//! Stochastic nonconvex optimization schemes on test objectives with known
//! critical sets, plus a certification harness for the descent inequalities,
//! moment conditions, step-size summability and Kurdyka-Łojasiewicz
//! inequalities that underwrite almost-sure convergence of the iterates.
//!
//! The crate is organized around five pieces:
//!
//! * [`problems`] — the objective catalog: coercive differentiable functions
//!   with exact gradients, minimum values and closed-form critical-set
//!   geometry (a point, a finite set, or a continuum).
//! * [`kl`] — power-form desingularizers, their bounded extensions, and
//!   sampled verification of the KL inequality near critical components.
//! * [`oracles`] — stochastic gradients, random preconditioners with hard
//!   spectrum bounds, and exact/stochastic proximity operators, all with
//!   exactly computable moment coefficients.
//! * [`schemes`] — the preconditioned stochastic gradient iteration and the
//!   stochastic proximal-gradient iteration, plus a deterministic seeded
//!   trajectory runner.
//! * [`certifier`] — coefficient calculators for both schemes, premise
//!   checks, Monte-Carlo certification of the one-step inequalities,
//!   Lyapunov tracking and convergence diagnostics.
//!
//! Everything that consumes randomness addresses a counter-based substream
//! keyed by `(seed, replicate, iteration, role)` (see [`rng`]), so runs are
//! reproducible bit for bit and replicates parallelize without coordination.

pub mod certifier;
pub mod error;
pub mod kl;
pub mod oracles;
pub mod problems;
pub mod rng;
pub mod schedule;
pub mod schemes;
pub mod vecn;

pub use certifier::coefficients::{
    gradient_scheme_coefficients, splitting_scheme_coefficients, CoeffSeq, DescentCoefficients,
    GradientSchemeInputs, SplittingAuxiliary, SplittingSchemeInputs,
};
pub use certifier::diagnostics::{
    diagnose, summarize, DiagnosticsOptions, MultiSeedSummary, TrajectoryDiagnostics,
};
pub use certifier::lyapunov::{
    limit_event_monitor, lyapunov_track, phi_telescope_partial_sums, LimitEventReport,
    LyapunovTrack, TelescopeReport,
};
pub use certifier::mc::{analytic_descent_expectation, certify_descent, certify_step_bound};
pub use certifier::premises::check_premises;
pub use certifier::{CertificateReport, CheckEntry, Evidence, Verdict};
pub use error::{Error, Result};
pub use kl::{
    build_extended_uniform, kl_check_pointwise, kl_check_uniform, ComponentKl, Desingularizer,
    ExtendedDesingularizer, KlComponentReport, KlPointCheck, KlReport, MergedKl,
    SumDesingularizer,
};
pub use oracles::{
    empirical_moment_check, empirical_moment_check_against, exact_prox, GradientOracle,
    MomentReport, PreconditionerModel, ProxOracle, SampledOperator,
};
pub use problems::{CriticalComponent, Geometry, Problem, QuadraticTerm, Split};
pub use rng::{substream, Role};
pub use schedule::{Schedule, Summability};
pub use schemes::{
    run_trajectory, step_preconditioned_sgd, step_prox_gradient, ProxScheme, Scheme, SgdScheme,
    StepOutcome, TrajectoryRecord,
};
