//! Desk-scale computational engine for finite higher-rank graphs (k-graphs),
//! the cylinder-set algebra of their path groupoids, finite-dimensional
//! C*-correspondence systems over them, and the dense *-algebra of sections
//! of the resulting Fell bundle, with machine-checked Cuntz–Pimsner relations.
//!
//! The numeric core is generic over the real scalar type via [`Real`];
//! concrete engines use [`f64`] (see the type aliases at the crate root).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, NumAssign};

pub mod algebra;
pub mod bimodule;
pub mod cprep;
pub mod cylsets;
pub mod degree;
pub mod error;
pub mod gallery;
pub mod kgraph;
pub mod linalg;
pub mod lsystem;
pub mod sampling;
pub mod sections;
pub mod specfile;
pub mod tensor;

/// Real scalar underlying all complex arithmetic: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    fn from_f64c(x: f64) -> Self {
        Self::from_f64(x).expect("scalar conversion")
    }
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar conversion")
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
}

/// Complex scalar over a [`Real`] base.
pub type C<T> = Complex<T>;

/// Double-precision complex scalar, the default engine scalar.
pub type C64 = Complex<f64>;
/// Single-precision complex scalar (loose-tolerance smoke work only).
pub type C32 = Complex<f32>;

/// Dense complex matrix over the default scalar.
pub type Mat64 = linalg::CMat<f64>;

/// Numeric thresholds shared by every check in the engine.
#[derive(Clone, Copy, Debug)]
pub struct Tolerances<T: Real> {
    /// Operator equality.
    pub eq: T,
    /// Gram-kernel rank cut: singular values below it count as zero.
    pub rank_cut: T,
    /// Covariance sums (frame expansions compose several solves).
    pub cov: T,
    /// Identities expected at machine-level accuracy.
    pub exact: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances {
            eq: T::from_f64c(1e-9),
            rank_cut: T::from_f64c(1e-10),
            cov: T::from_f64c(1e-8),
            exact: T::from_f64c(1e-12),
        }
    }
}

impl Tolerances<f32> {
    /// Loose thresholds suitable for `f32` smoke runs.
    pub fn single_precision() -> Self {
        Tolerances {
            eq: 1e-4,
            rank_cut: 1e-5,
            cov: 1e-3,
            exact: 1e-5,
        }
    }
}
