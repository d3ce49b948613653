use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Shapes or parameters are inconsistent.
    InvalidInput(String),
    /// A matrix or vector contains NaN or an infinity.
    NonFinite,
    /// The matrix is not positive definite; carries the smallest eigenvalue.
    NotPositiveDefinite { lambda_min: f64 },
    /// The matrix is singular to working precision.
    Singular,
    /// The covariance has an eigenvalue below the PSD repair threshold.
    NotPsd { lambda_min: f64, lambda_max: f64 },
    /// The covariance has numerical rank below the cardinality.
    RankDeficient { rank: usize, s: usize },
    /// No index set (or no point of the relaxation polytope) satisfies the constraints.
    Infeasible,
    /// Exhaustive enumeration would exceed the subset budget.
    BudgetExceeded { subsets: u128, budget: u128 },
    /// An objective could not be evaluated at any iterate.
    Domain(String),
    /// The complementary problem needs an invertible covariance.
    ComplementUnavailable,
    /// An iterative method produced a non-finite quantity.
    Numerical(String),
    /// Fixing derived contradictory fixes; the supplied lower bound is not valid.
    InconsistentLowerBound(usize),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::NonFinite => f.write_str("input contains non-finite values"),
            Error::NotPositiveDefinite { lambda_min } => {
                write!(f, "matrix is not positive definite (smallest eigenvalue {lambda_min:e})")
            }
            Error::Singular => f.write_str("matrix is singular"),
            Error::NotPsd { lambda_min, lambda_max } => write!(
                f,
                "covariance is not positive semidefinite (eigenvalues {lambda_min:e} .. {lambda_max:e})"
            ),
            Error::RankDeficient { rank, s } => {
                write!(f, "covariance rank {rank} is smaller than s = {s}")
            }
            Error::Infeasible => f.write_str("no feasible solution"),
            Error::BudgetExceeded { subsets, budget } => {
                write!(f, "{subsets} subsets exceed the enumeration budget of {budget}")
            }
            Error::Domain(msg) => write!(f, "objective undefined: {msg}"),
            Error::ComplementUnavailable => {
                f.write_str("complementary bound unavailable: covariance is singular")
            }
            Error::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            Error::InconsistentLowerBound(j) => write!(
                f,
                "index {j} was fixed both to 0 and to 1; the lower bound is not valid"
            ),
        }
    }
}

impl core::error::Error for Error {}

impl Error {
    /// True for errors caused by the caller's data rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::NonFinite
                | Error::NotPsd { .. }
                | Error::RankDeficient { .. }
                | Error::Infeasible
                | Error::BudgetExceeded { .. }
        )
    }
}
