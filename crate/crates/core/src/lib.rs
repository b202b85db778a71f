//! Optimization over the special orthogonal group through the exponential of
//! skew-symmetric matrices.
//!
//! The crate is organised bottom-up:
//!
//! * [`matcore`] dense row-major matrices, LU, one-sided Jacobi SVD.
//! * [`expm`] scaling-and-squaring Padé exponential, Cayley map, Fréchet
//!   derivative of the exponential and its adjoint.
//! * [`liegroup`] skew parametrization of `so(n)`, tangent projections,
//!   Riemannian gradient descent, retractions and the gradient pullback
//!   through `exp`.
//! * [`optim`] Euclidean first-order optimizers over flat parameter groups.
//! * [`exprnn`] the orthogonal recurrent cell with hand-written BPTT.
//! * [`tasks`] copying-memory generator and IDX (MNIST) ingestion.
//! * [`train`] and [`verify`] drive the command line tool.
//!
//! The linear algebra and geometry layers are generic over the scalar type
//! (anything implementing [`Real`]); the network and training code run in
//! `f64`. The aliases below name the concrete types used throughout.

pub mod error;
pub mod expm;
pub mod exprnn;
pub mod liegroup;
pub mod matcore;
pub mod optim;
pub mod scalar;
pub mod tasks;
pub mod train;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

/// Dense square matrix in double precision.
pub type SquareMat = matcore::Matrix<f64>;
/// Dense rectangular matrix in double precision.
pub type RectMat = matcore::Matrix<f64>;
/// Single precision matrix, for callers that want the generic kernels in `f32`.
pub type Matrix32 = matcore::Matrix<f32>;
/// Skew parameter vector in double precision.
pub type SkewParam = liegroup::SkewParam<f64>;
/// Cached orthogonal kernel in double precision.
pub type OrthoLayer = liegroup::OrthoLayer<f64>;
