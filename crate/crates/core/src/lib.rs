//! Variational (Tikhonov-type) regularization of manifold-valued signals and
//! images observed through an indirect measurement operator.
//!
//! The forward model replaces the matrix-vector product `Au` by row-wise
//! weighted Riemannian centers of mass, so blur on phase, direction or
//! diffusion-tensor data is modeled intrinsically. Reconstruction minimizes
//!
//! ```text
//! F(u) = Σ_i dist(A(u)_i, f_i)^p + R(u)
//! ```
//!
//! with `R` one of TV, Vq, mixed first/second order TV, or TGV, using
//! generalized forward-backward schemes (plain, trajectory, stochastic) or a
//! cyclic proximal point algorithm.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod differentials;
pub mod error;
pub mod karcher;
pub mod manifold;
pub mod operator;
pub mod regularizers;
pub mod signal;
pub mod sim;
pub mod solvers;

pub use error::{Error, Result};
pub use manifold::{ManifoldKind, ManifoldPoint, TangentVector};
pub use signal::Signal;
