//! Centralized numeric and solver tolerances.
//!
//! Every tolerance-sensitive comparison in the crate reads its thresholds from
//! one of the records below, passed explicitly at call sites, so that results
//! and certificates are reproducible across runs and machines.

/// Tolerances for validity checks that scale with the data.
#[derive(Debug, Clone, Copy)]
pub struct NumericPolicy {
    /// Absolute tolerance for positivity and normalization checks.
    pub abs: f64,
    /// Relative tolerance for comparisons against a data-dependent scale.
    pub rel: f64,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self {
            abs: 1e-9,
            rel: 1e-8,
        }
    }
}

/// Hermitian symmetry defect allowed after construction (construction symmetrizes).
pub const HERMITIAN_SYMMETRY_TOL: f64 = 1e-12;

/// Tolerance on row/column sums of probability tables.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Relative gap below which adjacent eigenvalues are merged into one eigenspace.
pub const EIGEN_MERGE_REL: f64 = 1e-10;

/// Knobs for the iterative solvers and feasibility routines.
#[derive(Debug, Clone, Copy)]
pub struct SolverPolicy {
    pub numeric: NumericPolicy,
    /// Certification tolerance on the bracket `upper - lower`.
    pub cert_tol: f64,
    /// Iteration cap for the fixed-point ascent.
    pub max_iterations: usize,
    /// Minimal per-step value increase below which the ascent stops.
    pub ascent_stop: f64,
    /// Relative cutoff under which eigenvalues count as zero in pseudo-inverses.
    pub pinv_cutoff: f64,
    /// Perturbed restarts attempted while the bracket stays open.
    pub restarts: usize,
    /// Cap on |Y|^|T| style enumerations.
    pub enumeration_cap: usize,
    /// Round cap for the alternating-projection feasibility search.
    pub dykstra_rounds: usize,
    /// Marginal residual below which a collection is declared compatible.
    pub dykstra_residual: f64,
    /// Seed for perturbed restarts and randomized probes.
    pub seed: u64,
}

impl Default for SolverPolicy {
    fn default() -> Self {
        Self {
            numeric: NumericPolicy::default(),
            cert_tol: 1e-6,
            max_iterations: 10_000,
            ascent_stop: 1e-12,
            pinv_cutoff: 1e-12,
            restarts: 5,
            enumeration_cap: 1_000_000,
            dykstra_rounds: 50_000,
            dykstra_residual: 1e-7,
            seed: 0,
        }
    }
}

impl SolverPolicy {
    /// Same policy with a different certification tolerance.
    pub fn with_cert_tol(mut self, tol: f64) -> Self {
        self.cert_tol = tol;
        self
    }

    /// Same policy with a different seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}
