//! Geometry of the special orthogonal group `SO(n)`.
//!
//! `so(n)` (skew-symmetric matrices) is identified with `R^{n(n-1)/2}` through
//! [`SkewParam`]. On top of that sit the ambient-space tools for Riemannian
//! gradient descent ([`tangent_project`], [`rgd_step`], [`retraction_step`]),
//! the pullback of a Euclidean gradient through `B = exp(A)`
//! ([`grad_pullback`]) and the cached kernel [`OrthoLayer`] that keeps a
//! parametrized orthogonal matrix in sync with its skew parameter.
//!
//! All inner products are the trace metric `⟨X, Y⟩ = tr(XᵀY)`.

mod layer;
mod pullback;
mod riemannian;
mod skew;

pub use layer::{OrthoLayer, REGION_WARN_NORM};
pub use pullback::{coordinate_gradient, grad_pullback, grad_pullback_with_kernel};
pub use riemannian::{
    metric_inner, retraction_step, rgd_step, riemannian_grad, sphere_retraction, tangent_project,
    RetractionKind, ORTHO_CHECK_TOL,
};
pub use skew::{skew_from_vec, skew_len, vec_from_skew, SkewParam};
