//! Analysis of linear descriptor systems `F Y'(t) = G Y(t) + B V(t)` through
//! matrix pencil theory.
//!
//! The crate classifies the pencil `sF - G`, extracts its finite/infinite
//! eigenstructure, builds the Weierstrass canonical form, solves the
//! continuous system in closed form (with an independent fundamental-matrix
//! route for cross-checking), discretizes under zero-order hold sampling, and
//! connects the resulting recursion to a singular system of nabla fractional
//! difference equations.
//!
//! All matrix machinery is generic over the scalar type: `f64` (and `f32`)
//! for numeric work, `BigRational` / `Complex<BigRational>` for exact
//! structural computations. Concrete aliases live at the crate root.

pub mod discretize;
pub mod error;
pub mod expm;
pub mod fractional;
pub mod gamma;
mod jordan;
pub mod matrix;
pub mod pencil;
pub mod poly;
pub mod quad;
pub mod scalar;
pub mod sequence;
pub mod signal;
pub mod solve;
pub mod system;
pub mod weierstrass;

pub use discretize::{
    backward_diff, compare_with_continuous, discrete_simulate, discretize,
    fast_correction_coeffs, sample_signal, DiscretizedSystem,
};
pub use error::{Error, Result};
pub use expm::mat_exp;
pub use fractional::{
    correspondence_diagnostic, nabla_apply, nabla_coefficients, solve_fractional_system,
    telescope_recursion, CorrespondenceReport, CorrespondenceVerdict, FractionalOrder,
    FractionalSystem, NablaCoefficients,
};
pub use gamma::{gamma, ln_gamma_sign, rising_factorial};
pub use sequence::SampleSequence;
pub use matrix::{real_part_checked, Matrix, Tolerance};
pub use pencil::{classify_pencil, det_polynomial, spectral_structure, Pencil, PencilClass};
pub use scalar::{ExpScalar, RealScalar, Scalar};
pub use signal::InputSignal;
pub use solve::{
    fundamental_matrix, residual_check, solve_continuous, solve_via_fundamental, uniform_grid,
    Trajectory,
};
pub use system::{build_system, consistency_check, k_vector, ConsistencyReport, DescriptorSystem};
pub use weierstrass::{
    elementary_divisors, verify_decomposition, weierstrass_decompose, ElementaryDivisorList,
    WeierstrassDecomposition,
};

pub use num_complex::Complex64;
pub type Rational = num_rational::BigRational;
pub type ComplexRational = num_complex::Complex<Rational>;

/// Concrete matrix aliases for the supported scalar modes.
pub type Mat32 = Matrix<f32>;
pub type Mat64 = Matrix<f64>;
pub type CMat64 = Matrix<Complex64>;
pub type QMat = Matrix<Rational>;
pub type CQMat = Matrix<ComplexRational>;
