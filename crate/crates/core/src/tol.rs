//! Numerical tolerances shared by every module.

/// Jacobi sweeps stop once the off-diagonal Frobenius norm is below this
/// multiple of the matrix Frobenius norm.
pub const JACOBI_OFF_DIAG: f64 = 1e-12;
/// Upper limit on Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// `ldet_pd` requires `λ_min > PD_RELATIVE · λ_max`.
pub const PD_RELATIVE: f64 = 1e-12;
/// Cholesky pivots must exceed this multiple of the largest diagonal entry.
pub const CHOLESKY_PIVOT_RELATIVE: f64 = 1e-14;

/// Covariance eigenvalues in `[-PSD_REPAIR · λ₁, 0)` are clipped to zero.
pub const PSD_REPAIR: f64 = 1e-8;
/// Eigenvalues above `RANK_RELATIVE · λ₁` count towards the numerical rank.
pub const RANK_RELATIVE: f64 = 1e-9;
/// Complementation needs `λ_min > INVERTIBLE_RELATIVE · λ₁`.
pub const INVERTIBLE_RELATIVE: f64 = 1e-9;

/// Slack allowed on `A·x ≤ b` and on the equality `eᵀx = s`.
pub const FEASIBILITY: f64 = 1e-9;
/// Objective values within this distance are co-optimal.
pub const TIE: f64 = 1e-9;
/// Minimum improvement accepted by the swap local search.
pub const LOCAL_SEARCH_IMPROVEMENT: f64 = 1e-10;

/// Default Frank-Wolfe gap tolerance.
pub const FW_GAP: f64 = 1e-6;
/// Default Frank-Wolfe iteration budget.
pub const FW_MAX_ITER: usize = 2000;
/// Inner gap tolerance while optimizing a scaling vector.
pub const FW_GAP_SCALING: f64 = 1e-8;

/// LP pivot and reduced-cost tolerance.
pub const LP_PIVOT: f64 = 1e-9;

/// Stopping rule for the scalar scaling Newton iteration.
pub const O_SCALING_DERIVATIVE: f64 = 1e-10;
/// Iteration cap for the scalar scaling Newton iteration.
pub const O_SCALING_MAX_ITER: usize = 100;

/// A probe fixes a variable when its certified bound is below `lb - FIX_MARGIN`.
pub const FIX_MARGIN: f64 = 1e-9;
/// Probes are only trusted when their Frank-Wolfe gap is at most this.
pub const PROBE_GAP: f64 = 1e-6;

/// Factorization spectra with `λ_s ≤ DDFACT_DOMAIN · λ₁` are outside the
/// domain of Γ_s.
pub const DDFACT_DOMAIN: f64 = 1e-12;
