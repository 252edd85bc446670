//! Numerical laboratory for Hankel operators `H_f = (I - P) M_f` on weighted
//! Fock spaces over the complex plane.
//!
//! The crate builds finite sections of `H_f` in the monomial basis of
//! `F²_φ`, computes their singular values and Schatten partial sums, and
//! evaluates the mean-oscillation functionals that characterise Schatten
//! membership of `H_f` and `H_{f̄}`.

pub mod fock;
pub mod hankel;
pub mod oscillation;
pub mod quadrature;
pub mod spectra;
pub mod symbols;

pub use fock::{FockBasis, FockError, RadialWeight, WeightProfile};
pub use hankel::{
    default_projection_truncation, single_frequency_spectrum, single_frequency_spectrum_of,
    HankelError, HankelModel,
};
pub use num_complex::Complex64;
pub use oscillation::{BmoReport, GEstimate, LatticeReport, OscillationError, OscillationParams};
pub use quadrature::{Domain, PolarGrid, QuadratureError, QuadratureRule};
pub use spectra::{HermitianMatrix, SingularSpectrum, SpectraError, TruncationMeta};
pub use symbols::{RadialProfile, Symbol, SymbolError, SymbolKind};

/// Any failure raised by the library.
#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Hankel(#[from] HankelError),
    #[error(transparent)]
    Oscillation(#[from] OscillationError),
}

impl Error {
    /// True for failures that indicate an internally inconsistent numerical
    /// result rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature(QuadratureError::NonFinite { .. })
                | Error::Spectra(SpectraError::NotConverged { .. })
                | Error::Spectra(SpectraError::NegativeEigenvalue { .. })
                | Error::Hankel(HankelError::TruncationInconsistency { .. })
                | Error::Hankel(HankelError::Spectra(SpectraError::NotConverged { .. }))
                | Error::Hankel(HankelError::Spectra(
                    SpectraError::NegativeEigenvalue { .. }
                ))
                | Error::Hankel(HankelError::Quadrature(QuadratureError::NonFinite { .. }))
                | Error::Oscillation(OscillationError::NumericalInconsistency { .. })
                | Error::Oscillation(OscillationError::Quadrature(
                    QuadratureError::NonFinite { .. }
                ))
        )
    }
}
