//! Numerical harmonic analysis for vector-valued functions on the unit disc.
//!
//! Functions take values in a finite-dimensional normed space (`l^p_d`, possibly
//! renormed by an invertible linear map). The crate evaluates BMO norms,
//! Littlewood-Paley and Lusin square functions, Carleson functionals of the
//! gradient measure, moduli of convexity and smoothness, and the half-plane
//! kernels behind the singular-integral operators used to compare them.
//!
//! Study drivers live in [`experiments`]; they are registered by name and
//! emit JSON/CSV reports.

pub mod disc_harmonics;
pub mod experiments;
pub mod functionals;
pub mod halfplane_kernels;
pub mod normed_spaces;
pub mod quadrature;

pub use disc_harmonics::{DiscPoint, GradientValue, TrigPolynomial};
pub use functionals::CarlesonReport;

pub use normed_spaces::NormSpec;
pub use quadrature::{QuadratureRule, RefinementEstimate};
