//! Numerical tests of holomorphic extendibility of functions on the punctured
//! plane from circles.
//!
//! A continuous function on a circle `b∆(a, ρ)` extends holomorphically into the
//! disc exactly when every negative Fourier coefficient of its boundary values
//! vanishes. The crate turns that statement into a measurable *defect*, and
//! builds the surrounding machinery:
//!
//! * [`expr`] parses functions of `z`, `conj(z)` and `abs(z)` and evaluates them.
//! * [`circles`] samples on circles, computes spectra and defects, and evaluates
//!   interior extensions (spectral and, for rational functions, closed form).
//! * [`geometry`] implements the complex curves `(z-a)(w-ā) = ρ²` in `ℂ²`, the
//!   domain `|w| > |z|` and the checks that organise the extension argument.
//! * [`characterize`] builds the line- and ray-constant families, Möbius
//!   transport identities and grid scans over circle centres.
//! * [`cli`] is the command-line front end.
//!
//! The accompanying guide lives in `book/` at the repository root; its code
//! listings are compiled and run as doc-tests of this crate.

pub mod characterize;
pub mod circles;
pub mod cli;
pub mod expr;
pub mod geometry;

/// Double precision complex number used throughout.
pub type C64 = num_complex::Complex64;

pub use circles::{BoundarySpectrum, Circle, DefectReport, Verdict};
pub use expr::{parse, ComplexFunction, EvalError, FunctionModel, ModelKind, ParseError};
pub use geometry::VarietyPoint;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/expressions.md")]
    mod expressions {}
    #[doc = include_str!("../../../book/src/defect.md")]
    mod defect {}
    #[doc = include_str!("../../../book/src/rational.md")]
    mod rational {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/deformation.md")]
    mod deformation {}
    #[doc = include_str!("../../../book/src/characterize.md")]
    mod characterize {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
