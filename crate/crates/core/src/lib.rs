//! Planning and loss toolkit for sparse-view reconstruction pipelines.
//!
//! * [`view_graph`] picks a compact, degree-bounded set of image pairs on a
//!   cycle of views.
//! * [`baselines`] holds the reference pairing strategies (complete, one
//!   reference view, cosine similarity, sequential window).
//! * [`wavelet`] implements the separable 2D DWT, multi-level pyramids and the
//!   band-weighted residual loss together with its analytic gradient.
//! * [`splat`] is a small CPU renderer for 3D Gaussian primitives used to
//!   produce deterministic fixtures.
//! * [`dump`] reads and writes flat little-endian `f64` dumps with a JSON
//!   header line.

pub mod baselines;
pub mod dump;
mod error;
pub mod splat;
pub mod view_graph;
pub mod wavelet;

pub use error::{Error, Result};
