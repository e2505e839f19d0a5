//! Tree tensor network representations of multivariate functions on
//! binary-quantized grids.
//!
//! Every continuous variable `x_i` in `[0, 1)` is written as `L` binary
//! digits `x_i = 0.x_{i,1} x_{i,2} ... x_{i,L}`. A labeled tree assigns one
//! vertex to each digit and a [`TreeTensorNetwork`] stores one tensor per
//! vertex. The crate provides:
//!
//! - [`topology`]: labeled trees, digit encoding and built-in tree layouts
//! - [`tensor`]: a dense named-index tensor kernel (contraction, direct sum,
//!   fused outer product, SVD and interpolative decompositions)
//! - [`ttn`]: network evaluation, arithmetic, truncation and integration
//! - [`funcbuild`]: exact constructions of constants, exponentials, deltas,
//!   hyperbolic functions and polynomials on any tree
//! - [`treeci`]: tree tensor cross interpolation
//! - [`fredholm`]: an iterative solver for non-linear Fredholm equations of
//!   the second kind
//! - [`analysis`]: sampled error metrics and digit mutual information
//! - [`targets`]: named benchmark functions selectable at runtime

pub mod analysis;
pub mod error;
pub mod fredholm;
pub mod funcbuild;
pub mod function;
pub mod scalar;
pub mod targets;
pub mod tensor;
pub mod topology;
pub mod treeci;
pub mod ttn;

pub use error::{Error, Result};
pub use function::{GridFunction, OfCoords};
pub use scalar::{Scalar, ScalarKind};
pub use tensor::{DenseTensor, Index, IndexId};
pub use topology::{DigitId, GridPoint, LabeledTree};
pub use ttn::{AnyNetwork, NetworkStats, Reduced, TreeTensorNetwork};

pub use num_complex::Complex64;
