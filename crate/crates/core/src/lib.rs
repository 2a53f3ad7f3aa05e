//! Itô integration against simulated Wiener paths.
//!
//! The integral is built the way it is characterized: for simple processes
//! it is the explicit sum `sum b(t_i) (W(t_i) - W(t_{i-1}))`; for a general
//! adapted integrand `b` it is the limit in probability of the integrals of
//! simple approximations `b_n` whose pathwise L2 distance to `b` goes to
//! zero. Monte Carlo checks in [`verification`] test that limit, its
//! independence from the approximating sequence, and the classical
//! consequences (isometry, martingale increments, continuity, Itô's lemma).
//!
//! * [`rng`]: counter-based Gaussian streams addressed by seed, path and purpose.
//! * [`wiener`]: time grids, Wiener paths, Brownian-bridge refinement, ensembles.
//! * [`process`]: path prefixes, simple processes, adapted integrands.
//! * [`integrator`]: simple-process integrals and approximation traces.
//! * [`approximation`]: approximating schemes and pathwise L2 error.
//! * [`convergence`]: exceedance probabilities and the Ky Fan metric.
//! * [`verification`]: the Monte Carlo checks.
//! * [`experiment`]: configuration and the runner used by the binary.

pub mod approximation;
pub mod convergence;
pub mod error;
pub mod experiment;
pub mod integrator;
pub mod process;
pub mod rng;
pub mod verification;
pub mod wiener;

pub use approximation::{approximate, l2_error, ApproximationScheme, GridFamily, Truncation};
pub use convergence::{assess, exceedance_prob, ky_fan, ConvergenceReport, MonteCarloEstimate};
pub use error::{Error, Result};
pub use integrator::{integral_path, integrate_general, integrate_simple, IntegralTrace};
pub use process::{
    eval_simple, probe_adaptedness, BuiltinIntegrand, IntegrandFunctional, PathPrefix,
    SimpleProcess,
};
pub use rng::{derive_seed, gaussian_stream, Purpose, SeedSpec};
pub use verification::CheckResult;
pub use wiener::{refine, sample_path, PathEnsemble, TimeGrid, WienerPath};
