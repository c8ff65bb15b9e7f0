use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the engine.
///
/// Variants map one-to-one onto the failure modes each operation documents,
/// so callers (the CLI in particular) can route them to exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("unsupported basis: {0}")]
    Basis(String),

    #[error("operator not in span of basis (residual {residual:.3e}){}", pair_suffix(*.pair))]
    NotInSpan {
        residual: f64,
        pair: Option<(usize, usize)>,
    },

    #[error("invalid model: {0}")]
    Model(String),

    #[error("invalid time {0}: propagation requires t >= 0")]
    Time(f64),

    #[error("superoperator is not diagonalizable (eigenvector condition number {condition:.3e})")]
    NonDiagonalizable { condition: f64 },

    #[error("no stationary density matrix found: {0}")]
    StationaryState(String),

    #[error(
        "adjoint propagator is ill-conditioned (condition estimate {condition:.3e}){}; use the spectral path for large t",
        pair_suffix(*.pair)
    )]
    IllConditioned {
        condition: f64,
        pair: Option<(usize, usize)>,
    },

    #[error("eigen-operators do not span the operator space (rank {rank} of {expected})")]
    SpectralSpan { rank: usize, expected: usize },

    #[error("peripheral spectrum oscillates; t -> infinity limit does not exist (eigenvalues {eigenvalues:?})")]
    OscillatoryPeripheralSpectrum { eigenvalues: Vec<Complex64> },

    #[error("asymptotic structure constant alpha[{i}][{j}][{k}] does not converge")]
    NonConvergentEntry { i: usize, j: usize, k: usize },

    #[error("invalid projection family: {0}")]
    Projection(String),

    #[error("probe basis is incomplete: {found} independent elements, need {needed}")]
    IncompleteProbeBasis { found: usize, needed: usize },

    #[error("Kossakowski matrix is not positive: |m|^2 = {m_sq} exceeds n(n+1) = {bound}")]
    Positivity { m_sq: f64, bound: f64 },

    #[error("truncation dimension {found} too small (need at least {min})")]
    Truncation { found: usize, min: usize },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("linear algebra backend failure: {0}")]
    Numerical(String),
}

fn pair_suffix(pair: Option<(usize, usize)>) -> String {
    match pair {
        Some((i, j)) => format!(" at basis pair ({i}, {j})"),
        None => String::new(),
    }
}

impl Error {
    /// Attach an `(i, j)` basis-pair context to span and conditioning errors.
    pub fn with_pair(self, i: usize, j: usize) -> Self {
        match self {
            Error::NotInSpan { residual, .. } => Error::NotInSpan {
                residual,
                pair: Some((i, j)),
            },
            Error::IllConditioned { condition, .. } => Error::IllConditioned {
                condition,
                pair: Some((i, j)),
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
