//! Manifold-KPLS pipeline for visual speech recognition and speaker
//! identification.
//!
//! The pipeline has three stages. Each image sequence (a "visual unit") is
//! first summarized by a fixed-size manifold parameterization: a D x n
//! coefficient matrix from a regularized Gaussian-RBF regression onto the
//! unit interval ([`manifold`]). Parameterizations are then compared by one
//! of several manifold-to-manifold kernels — matrix-based (cosine,
//! Euclidean), curve-based (Frechet, edit distance) or subspace-based
//! (Grassmannian) — assembled into Gram matrices ([`kernels`]). Finally,
//! kernel partial least squares embeds units into a supervised latent space
//! ([`kpls`]) where regression-for-classification or nearest neighbors
//! assigns speech or speaker labels ([`classify`]).
//!
//! [`features`] extracts the underlying per-frame LBP histograms,
//! [`datasets`] handles manifests, synthetic data and the SSD / SI / SpId
//! evaluation splits.

pub mod classify;
mod container;
pub mod datasets;
pub mod error;
pub mod features;
pub mod kernels;
pub mod kpls;
pub mod manifold;

pub use error::{Error, Result};
