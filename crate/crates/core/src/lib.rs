//! Variable-smoothness Besov quasi-norms on sampled functions: dyadic grids,
//! weight classes, convolution, difference and spline characterizations, and
//! the experiment harness comparing them.

pub mod error;
pub mod conv;
pub mod corpus;
pub mod diff;
pub mod ext;
pub mod grid;
pub mod harness;
pub mod hardy;
pub mod kernel;
pub mod mollifier;
pub mod norm;
pub mod par;
pub mod spline;
pub mod trace;
pub mod weights;

pub use error::{Error, Result};
pub use grid::{cubes_in_box, local_lp_norm, DyadicCube, GridFunction, Region};
pub use kernel::{convolve, rescale_kernel, Kernel};
